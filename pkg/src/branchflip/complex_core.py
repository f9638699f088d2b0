"""Loose ideal triangulations of closed surfaces, stored as gluing data.

A triangulation is a set of abstract triangles ``0..F-1``.  Each triangle has
corners ``0, 1, 2`` and slots ``0, 1, 2``; slot ``i`` is the side opposite
corner ``i``.  The two endpoints of slot ``i`` are listed in increasing corner
order by :data:`SLOT_ENDS` (the "fixed corner order along the slot").

Slots are matched in pairs.  Each matched pair carries one bit: ``0`` glues
the low endpoint of one slot to the low endpoint of the other, ``1`` crosses
them.  Matching two slots of the same triangle is allowed (this is how trapped
edges arise); matching a slot to itself is not.
"""
from __future__ import annotations

import itertools
from array import array
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

from .errors import Disconnected, NonPerfectMatching, SlotSelfMatch, TriangulationError

SLOT_ENDS = ((1, 2), (0, 2), (0, 1))
# +1 when walking the boundary 0->1->2->0 traverses the slot low -> high.
SLOT_SENSE = (1, -1, 1)

Slot = tuple  # (triangle, slot index)


def third(a, b):
    return 3 - a - b


def slot_between(a, b):
    """The slot whose endpoints are corners ``a`` and ``b``."""
    return 3 - a - b


class Edge(NamedTuple):
    id: int
    a: tuple  # primary slot, the lexicographically smaller one
    b: tuple
    bit: int

    @property
    def trapped(self):
        return self.a[0] == self.b[0]


class Nutshell(NamedTuple):
    triangles: tuple  # (U, W) with U < W
    corners: tuple  # corner of the central vertex in U and in W
    center: int  # vertex label


class Star(NamedTuple):
    triangles: tuple  # three distinct triangles, sorted
    corners: tuple  # corner of the center in each of them
    center: int


@dataclass(frozen=True)
class SurfaceClass:
    orientable: bool
    genus_or_crosscaps: int
    euler: int
    n_vertices: int

    def __post_init__(self):
        g = self.genus_or_crosscaps
        if g < 0 or self.n_vertices < 1:
            raise ValueError("genus/crosscaps must be >= 0 and n_vertices >= 1")
        if self.orientable and self.euler != 2 - 2 * g:
            raise ValueError("orientable surface needs euler = 2 - 2*genus")
        if not self.orientable and (g < 1 or self.euler != 2 - g):
            raise ValueError("non-orientable surface needs euler = 2 - crosscaps")

    @classmethod
    def of(cls, orientable, genus_or_crosscaps, n_vertices=1):
        g = genus_or_crosscaps
        euler = 2 - 2 * g if orientable else 2 - g
        return cls(orientable, g, euler, n_vertices)

    @property
    def name(self):
        if self.orientable:
            base = {0: "S2", 1: "T2"}.get(self.genus_or_crosscaps, f"Sg{self.genus_or_crosscaps}")
        else:
            base = {1: "P2", 2: "K"}.get(self.genus_or_crosscaps, f"N{self.genus_or_crosscaps}")
        return f"{base},{self.n_vertices}"


def corner_image(a_slot, partner_slot, bit, corner):
    """Where ``corner`` (an endpoint of ``a_slot``) lands on ``partner_slot``."""
    lo, hi = SLOT_ENDS[a_slot]
    plo, phi = SLOT_ENDS[partner_slot]
    if corner == lo:
        return plo if bit == 0 else phi
    if corner == hi:
        return phi if bit == 0 else plo
    raise ValueError(f"corner {corner} is not an endpoint of slot {a_slot}")


def gluing_bit(a_slot, partner_slot, image_of_lo):
    """The bit for a gluing that sends the low end of ``a_slot`` to ``image_of_lo``."""
    return 0 if image_of_lo == SLOT_ENDS[partner_slot][0] else 1


class Triangulation:
    """An immutable, validated loose triangulation of a closed surface.

    ``glue[t][i] == (u, j, bit)`` says slot ``i`` of triangle ``t`` is matched
    with slot ``j`` of ``u``.  ``labels[t][c]`` is the persistent label of the
    vertex at corner ``c`` of ``t``.  Use :func:`build` to construct one from a
    gluing list.
    """

    def __init__(self, glue, labels, _validate=True):
        self.glue = tuple(tuple(tuple(x) for x in row) for row in glue)
        self.labels = tuple(tuple(row) for row in labels)
        if _validate:
            self._validate()

    # -- validation -------------------------------------------------------
    def _validate(self):
        F = len(self.glue)
        if F == 0 or F % 2:
            raise TriangulationError(f"a closed surface needs an even, positive number of triangles (got {F})")
        if len(self.labels) != F or any(len(r) != 3 for r in self.labels):
            raise TriangulationError("labels must give three corner labels per triangle")
        for t, row in enumerate(self.glue):
            if len(row) != 3:
                raise NonPerfectMatching(f"triangle {t} does not have three slots")
            for i, (u, j, bit) in enumerate(row):
                if not (0 <= u < F and 0 <= j < 3 and bit in (0, 1)):
                    raise NonPerfectMatching(f"slot ({t},{i}) has an invalid partner {(u, j, bit)}")
                if (u, j) == (t, i):
                    raise SlotSelfMatch(f"slot ({t},{i}) is matched to itself")
                if self.glue[u][j] != (t, i, bit):
                    raise NonPerfectMatching(f"slot ({t},{i}) -> ({u},{j}) is not reciprocated")
        comp = self.corner_classes
        for t in range(F):
            for c in range(3):
                root = comp[3 * t + c]
                if self.labels[t][c] != self.labels[root // 3][root % 3]:
                    raise TriangulationError(f"corner ({t},{c}) carries a label inconsistent with its vertex")
        if len(set(self.vertex_of.values())) != len(self.vertex_of):
            raise TriangulationError("two distinct vertices share a label")
        seen = {0}
        todo = [0]
        while todo:
            t = todo.pop()
            for u, _, _ in self.glue[t]:
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        if len(seen) != F:
            raise Disconnected(f"only {len(seen)} of {F} triangles are reachable")

    # -- basic counts -----------------------------------------------------
    @property
    def F(self):
        return len(self.glue)

    @property
    def E(self):
        return 3 * len(self.glue) // 2

    @property
    def V(self):
        return len(self.vertices)

    @property
    def euler(self):
        return self.V - self.E + self.F

    def __eq__(self, other):
        return isinstance(other, Triangulation) and self.glue == other.glue and self.labels == other.labels

    def __hash__(self):
        return hash((self.glue, self.labels))

    def __repr__(self):
        return f"Triangulation(F={self.F}, V={self.V}, chi={self.euler})"

    # -- derived structure -----------------------------------------------
    @cached_property
    def corner_classes(self):
        """Union-find roots (as ``3*t + c``) of the corner identification."""
        parent = list(range(3 * self.F))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for t, row in enumerate(self.glue):
            for i, (u, j, bit) in enumerate(row):
                for c in SLOT_ENDS[i]:
                    a, b = find(3 * t + c), find(3 * u + corner_image(i, j, bit, c))
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return tuple(find(x) for x in range(3 * self.F))

    @cached_property
    def vertex_of(self):
        """Map corner-class root -> vertex label."""
        return {r: self.labels[r // 3][r % 3] for r in set(self.corner_classes)}

    @cached_property
    def vertices(self):
        return tuple(sorted(set(self.vertex_of.values())))

    @cached_property
    def corners_at(self):
        """Vertex label -> sorted list of corners ``(t, c)`` at that vertex."""
        out = {v: [] for v in self.vertices}
        for t in range(self.F):
            for c in range(3):
                out[self.labels[t][c]].append((t, c))
        return out

    def valence(self, v):
        return len(self.corners_at[v])

    @cached_property
    def edges(self):
        found = []
        for t, row in enumerate(self.glue):
            for i, (u, j, bit) in enumerate(row):
                if (t, i) < (u, j):
                    found.append(((t, i), (u, j), bit))
        found.sort()
        return tuple(Edge(k, a, b, bit) for k, (a, b, bit) in enumerate(found))

    @cached_property
    def slot_edge(self):
        """``slot_edge[t][i]`` is the id of the edge carried by slot ``(t, i)``."""
        table = [[-1, -1, -1] for _ in range(self.F)]
        for e in self.edges:
            table[e.a[0]][e.a[1]] = e.id
            table[e.b[0]][e.b[1]] = e.id
        return tuple(tuple(r) for r in table)

    def edge(self, e):
        return self.edges[e]

    @cached_property
    def slot_twist(self):
        """``slot_twist[t][i]`` is 0 on an edge's primary slot and the gluing bit
        on its secondary slot, so a primary-frame direction XOR twist gives the
        direction seen from that slot."""
        table = [[0, 0, 0] for _ in range(self.F)]
        for e in self.edges:
            table[e.b[0]][e.b[1]] = e.bit
        return tuple(tuple(r) for r in table)

    def edge_endpoints(self, e):
        """Vertex labels at the low and high ends of the primary slot of ``e``."""
        t, i = self.edges[e].a
        lo, hi = SLOT_ENDS[i]
        return self.labels[t][lo], self.labels[t][hi]

    def corner_across(self, t, i, c):
        """Image ``(u, c')`` of corner ``c`` of ``t`` across slot ``i``."""
        u, j, bit = self.glue[t][i]
        return u, corner_image(i, j, bit, c)

    @cached_property
    def orientation(self):
        """Coherent triangle orientations (``+1`` means corner order 0,1,2),
        anchored at triangle 0, or ``None`` when the surface is not orientable."""
        return self.coherent_orientation(0, 1)

    def coherent_orientation(self, anchor, sign):
        """The coherent orientation giving triangle ``anchor`` the sign ``sign``."""
        o = [0] * self.F
        o[anchor] = sign
        todo = deque([anchor])
        while todo:
            t = todo.popleft()
            for i, (u, j, bit) in enumerate(self.glue[t]):
                want = -o[t] * SLOT_SENSE[i] * SLOT_SENSE[j] * (-1 if bit else 1)
                if o[u] == 0:
                    o[u] = want
                    todo.append(u)
                elif o[u] != want:
                    return None
        return tuple(o)

    @property
    def orientable(self):
        return self.orientation is not None

    def gluing_list(self):
        return [(e.a, e.b, e.bit) for e in self.edges]


def build(triangle_count, gluing_list: Iterable, labels=None) -> Triangulation:
    """Validate a gluing list and return the triangulation.

    ``gluing_list`` holds ``((t, i), (u, j), bit)`` triples; it must be a perfect
    matching on all ``3 * triangle_count`` slots.  Without ``labels`` the
    vertices are numbered ``0, 1, ...`` in order of their first corner.
    """
    F = triangle_count
    if F <= 0 or F % 2:
        raise TriangulationError(f"a closed surface needs an even, positive number of triangles (got {F})")
    glue = [[None] * 3 for _ in range(F)]
    for entry in gluing_list:
        (t, i), (u, j), bit = entry
        for s in ((t, i), (u, j)):
            if not (0 <= s[0] < F and 0 <= s[1] < 3):
                raise NonPerfectMatching(f"slot {s} does not exist")
        if (t, i) == (u, j):
            raise SlotSelfMatch(f"slot ({t},{i}) is matched to itself")
        if bit not in (0, 1):
            raise TriangulationError(f"gluing bit must be 0 or 1, got {bit!r}")
        for s in ((t, i), (u, j)):
            if glue[s[0]][s[1]] is not None:
                raise NonPerfectMatching(f"slot {s} is matched twice")
        glue[t][i] = (u, j, bit)
        glue[u][j] = (t, i, bit)
    missing = [(t, i) for t in range(F) for i in range(3) if glue[t][i] is None]
    if missing:
        raise NonPerfectMatching(f"unmatched slots: {missing}")
    if labels is None:
        draft = Triangulation(glue, [[0, 0, 0]] * F, _validate=False)
        roots = draft.corner_classes
        order = {}
        for r in roots:
            order.setdefault(r, len(order))
        labels = [[order[roots[3 * t + c]] for c in range(3)] for t in range(F)]
    return Triangulation(glue, labels)


def classify_surface(T: Triangulation) -> SurfaceClass:
    chi = T.euler
    if T.orientable:
        return SurfaceClass(True, (2 - chi) // 2, chi, T.V)
    return SurfaceClass(False, 2 - chi, chi, T.V)


def trapped_edges(T: Triangulation) -> frozenset:
    return frozenset(e.id for e in T.edges if e.trapped)


def find_nutshells(T: Triangulation) -> list:
    """All nutshells: two triangles glued along both sides at a valence-2 vertex,
    whose remaining sides are not glued to each other."""
    found = []
    for v in T.vertices:
        corners = T.corners_at[v]
        if len(corners) != 2:
            continue
        (U, cu), (W, cw) = corners
        if U == W:
            continue
        ok = True
        for s in range(3):
            if s == cu:
                continue
            u, j, bit = T.glue[U][s]
            if u != W or j == cw or corner_image(s, j, bit, cu) != cw:
                ok = False
        if ok and T.glue[U][cu][:2] != (W, cw):
            found.append(Nutshell((U, W), (cu, cw), v))
    return found


def find_triangular_stars(T: Triangulation) -> list:
    """All triangular stars: three distinct triangles around a valence-3 vertex."""
    found = []
    for v in T.vertices:
        corners = T.corners_at[v]
        if len(corners) != 3 or len({t for t, _ in corners}) != 3:
            continue
        tris = {t: c for t, c in corners}
        ok = True
        for t, c in corners:
            for s in range(3):
                if s == c:
                    continue
                u, j, bit = T.glue[t][s]
                if u not in tris or u == t or corner_image(s, j, bit, c) != tris[u]:
                    ok = False
        if ok:
            ts = tuple(sorted(tris))
            found.append(Star(ts, tuple(tris[t] for t in ts), v))
    return found


PERMS = tuple(itertools.permutations(range(3)))


def _encode_from(T, start, perm, fix_labels, orders):
    """Relabel by breadth-first traversal from one flag and encode the result."""
    F = T.F
    new_id = {start: 0}
    perms = [perm]
    queue = [start]
    out = array("q")
    relabel = {}
    k = 0
    while k < len(queue):
        t = queue[k]
        sigma = perms[k]
        k += 1
        for s in range(3):
            old_slot = sigma[s]
            u, j, bit = T.glue[t][old_slot]
            lo, hi = SLOT_ENDS[s]
            a, b = corner_image(old_slot, j, bit, sigma[lo]), corner_image(old_slot, j, bit, sigma[hi])
            if u not in new_id:
                new_id[u] = len(queue)
                queue.append(u)
                perms.append((a, b, j))
            tau = perms[new_id[u]]
            ps = tau.index(j)
            out.append(new_id[u])
            out.append(ps)
            out.append(0 if tau.index(a) == SLOT_ENDS[ps][0] else 1)
        if fix_labels:
            out.extend(T.labels[t][sigma[c]] for c in range(3))
        if orders is not None:
            inv = [sigma.index(c) for c in range(3)]
            out.extend(inv[c] for c in orders[t])
    if len(queue) != F:
        raise Disconnected("triangulation is not connected")
    return out


def canonical_key(T: Triangulation, fix_vertex_labels: bool = True, orders=None) -> bytes:
    """Isomorphism-invariant byte key.

    Minimises the breadth-first encoding over all ``6F`` starting flags.  With
    ``fix_vertex_labels`` the labels must match too; ``orders`` (per-triangle
    local vertex orders, as corner triples) folds a branching into the key.
    """
    best = None
    for t in range(T.F):
        for perm in PERMS:
            code = _encode_from(T, t, perm, fix_vertex_labels, orders)
            if best is None or code < best:
                best = code
    return best.tobytes()
