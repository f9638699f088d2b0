"""Named triangulations, branched bricks, chain assemblies and random instances."""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from typing import NamedTuple

from .branching import Branching, dirs_for_order, iter_branchings, from_vertex_order
from .complex_core import SLOT_ENDS, SurfaceClass, Triangulation, build, classify_surface, gluing_bit, trapped_edges
from .errors import BadVertexCount, UnsupportedSurface
from .moves import BFlip, BubblePlus, Stellar13, bflip_choices, step


class Built(NamedTuple):
    triangulation: Triangulation
    branching: Branching
    connections: tuple = ()  # connection edge ids


def _named(tris, pairs):
    """Gluing list from triangles given as corner names.

    ``pairs`` holds ``((t, (n1, n2)), (u, (m1, m2)))``: the side n1-n2 of ``t``
    is glued to m1-m2 of ``u`` with n1 on m1 and n2 on m2.
    """
    out = []
    for (t, (n1, n2)), (u, (m1, m2)) in pairs:
        c1, c2 = tris[t].index(n1), tris[t].index(n2)
        d1, d2 = tris[u].index(m1), tris[u].index(m2)
        i, j = 3 - c1 - c2, 3 - d1 - d2
        image = d1 if SLOT_ENDS[i][0] == c1 else d2
        out.append(((t, i), (u, j), gluing_bit(i, j, image)))
    return out


def _first_branching(T, forbid_long=(), where=None):
    for B in iter_branchings(T, forbid_long):
        if where is None or where(B):
            return B
    raise UnsupportedSurface("no branching satisfies the reference constraints")


# -- the small closed surfaces --------------------------------------------------

def sphere3() -> Built:
    """Two triangles glued along their whole boundary."""
    T = build(2, [((0, i), (1, i), 0) for i in range(3)])
    return Built(T, from_vertex_order(T, T.vertices))


def torus1() -> Built:
    """Square a b c d, cut along a-c, opposite sides identified by translation."""
    tris = [("a", "b", "c"), ("a", "c", "d")]
    pairs = [
        ((0, ("a", "c")), (1, ("a", "c"))),  # diagonal
        ((0, ("a", "b")), (1, ("d", "c"))),  # bottom to top
        ((0, ("b", "c")), (1, ("a", "d"))),  # right to left
    ]
    T = build(2, _named(tris, pairs))
    return Built(T, _first_branching(T))


def klein_quad() -> Built:
    """As :func:`torus1` with the bottom glued to the top by a reflection."""
    tris = [("a", "b", "c"), ("a", "c", "d")]
    pairs = [
        ((0, ("a", "c")), (1, ("a", "c"))),
        ((0, ("a", "b")), (1, ("c", "d"))),
        ((0, ("b", "c")), (1, ("a", "d"))),
    ]
    T = build(2, _named(tris, pairs))
    return Built(T, _first_branching(T))


def klein_bigons() -> Built:
    """Two truncated bigons (Moebius triangles) glued along their boundaries."""
    T = build(2, [((0, 2), (0, 1), 1), ((1, 2), (1, 1), 1), ((0, 0), (1, 0), 0)])
    return Built(T, _first_branching(T))


def projective2() -> Built:
    """A bigon with antipodal sides, coned to one internal vertex.

    The two triangles share both internal edges; their bigon sides are glued
    with a twist.  The reference branching makes the internal vertex a pit.
    """
    T = build(2, [((0, 1), (1, 1), 0), ((0, 0), (1, 0), 0), ((0, 2), (1, 2), 1)])
    center = T.labels[0][2]
    return Built(T, _first_branching(T, where=lambda B: all(B.head_label(e) == center for e in _edges_at(T, center))))


def _edges_at(T, v):
    return [e.id for e in T.edges if v in T.edge_endpoints(e.id)]


NAMED = {
    "sphere3": sphere3,
    "torus1": torus1,
    "projective2": projective2,
    "klein_bigons": klein_bigons,
    "klein_quad": klein_quad,
}


# -- bricks --------------------------------------------------------------------

def _polygon(word):
    """Fan triangulation of a polygon with a side word.

    ``word`` lists ``(letter, +1/-1)`` per side; letters used twice are glued,
    letters used once are connection sides.  Returns the triangle count, the
    internal gluings and ``{letter: slot}`` for the connection sides.
    """
    k = len(word)
    F = k - 2
    gl = [((m, 1), (m + 1, 2), 0) for m in range(F - 1)]

    def side(s):
        if s == 0:
            return (0, 2), 0
        if s == k - 1:
            return (F - 1, 1), 1
        return (s - 1, 0), 0

    seen, conn = {}, {}
    for s, (letter, sign) in enumerate(word):
        slot, f = side(s)
        tail_lo = (f == 0) == (sign > 0)
        if letter in seen:
            other, other_lo = seen.pop(letter)
            gl.append((other, slot, 0 if other_lo == tail_lo else 1))
        else:
            seen[letter] = (slot, tail_lo)
    for letter, (slot, _) in seen.items():
        conn[letter] = slot
    return F, gl, conn


@dataclass(frozen=True)
class Brick:
    """A triangulated surface with boundary; its unglued slots are the
    connection sides, listed in chain order."""
    kind: str
    F: int
    gluings: tuple
    connections: tuple

    def slot_partner(self):
        out = {}
        for a, b, bit in self.gluings:
            out[a] = (b, bit)
            out[b] = (a, bit)
        return out

    def is_branched(self, orders) -> bool:
        """Per-triangle corner orders agree on every internal gluing."""
        partner = self.slot_partner()
        for (t, i), ((u, j), bit) in partner.items():
            lo, hi = SLOT_ENDS[i]
            rt = {c: k for k, c in enumerate(orders[t])}
            ru = {c: k for k, c in enumerate(orders[u])}
            lo_u, hi_u = SLOT_ENDS[j] if bit == 0 else SLOT_ENDS[j][::-1]
            if (rt[lo] < rt[hi]) != (ru[lo_u] < ru[hi_u]):
                return False
        return True

    def branchings(self):
        """All consistent per-triangle corner orders."""
        perms = list(itertools.permutations(range(3)))
        return [o for o in itertools.product(perms, repeat=self.F) if self.is_branched(o)]

    def reference_orders(self):
        """First branching whose connection sides are short edges, when any is."""
        found = self.branchings()
        for o in found:
            if all(o[t][1] != i for t, i in self.connections):
                return o
        return found[0]

    def with_connection(self, orders, k, direction):
        """Orders with connection side ``k`` running low->high (``direction``
        0) or high->low (1) on its slot.

        The side is reversed alone when that stays branched; otherwise (the
        Moebius triangle, whose connection side is always long) the first
        branching of the brick with the requested direction is returned.
        """
        t, i = self.connections[k]
        d = dirs_for_order(orders[t])
        if d[i] == direction:
            return orders
        d = list(d)
        d[i] = direction
        from .branching import _ORDER

        if tuple(d) in _ORDER:
            new = list(orders)
            new[t] = _ORDER[tuple(d)]
            if self.is_branched(new):
                return tuple(new)
        for o in self.branchings():
            if dirs_for_order(o[t])[i] == direction:
                return o
        raise UnsupportedSurface(f"{self.kind}: connection side {k} cannot run {direction}")


BRICK_WORDS = {
    "torus_1p": [("x", 1), ("y", 1), ("x", -1), ("y", -1), ("c", 1)],
    "klein_1p": [("x", 1), ("y", 1), ("x", -1), ("y", 1), ("c", 1)],
    # square a b c d truncated at a and c: a1 b c1 c2 d a2
    "torus_2p": [("x", 1), ("y", 1), ("c1", 1), ("x", -1), ("y", -1), ("c2", 1)],
}


def brick(kind) -> Brick:
    if kind == "proj_1p":
        # one Moebius triangle: sides 0-1 and 0-2 glued with a twist, side 1-2 free
        return Brick(kind, 1, (((0, 2), (0, 1), 1),), ((0, 0),))
    if kind not in BRICK_WORDS:
        raise UnsupportedSurface(f"unknown brick {kind!r}")
    F, gl, conn = _polygon(BRICK_WORDS[kind])
    order = sorted(conn)
    return Brick(kind, F, tuple(gl), tuple(conn[c] for c in order))


# -- chains --------------------------------------------------------------------

class ChainBuild(NamedTuple):
    triangulation: Triangulation
    branching: Branching
    connections: tuple  # edge ids
    bricks: tuple  # (kind, first triangle id)


def chain_kinds(orientable, g):
    if orientable:
        if g < 2:
            raise UnsupportedSurface("orientable surfaces of genus < 2 have their own builders")
        return ["torus_1p"] + ["torus_2p"] * (g - 2) + ["torus_1p"]
    if g < 3:
        raise UnsupportedSurface("non-orientable surfaces with < 3 crosscaps have their own builders")
    if g % 2:
        k = (g - 1) // 2
        return ["torus_1p"] + ["torus_2p"] * (k - 1) + ["proj_1p"]
    k = (g - 2) // 2
    return ["torus_1p"] + ["torus_2p"] * (k - 1) + ["klein_1p"]


def chain_surface(orientable: bool, genus_or_crosscaps: int) -> ChainBuild:
    kinds = chain_kinds(orientable, genus_or_crosscaps)
    bricks = [brick(k) for k in kinds]
    offsets, F = [], 0
    for b in bricks:
        offsets.append(F)
        F += b.F
    internal = []
    for b, off in zip(bricks, offsets):
        internal += [((t + off, i), (u + off, j), bit) for (t, i), (u, j), bit in b.gluings]
    links = []
    for k in range(len(bricks) - 1):
        left, right = bricks[k], bricks[k + 1]
        lt, li = left.connections[-1]
        rt, ri = right.connections[0]
        links.append(((lt + offsets[k], li), (rt + offsets[k + 1], ri)))
    want = SurfaceClass.of(orientable, genus_or_crosscaps, 1)
    for bits in itertools.product((0, 1), repeat=len(links)):
        T = build(F, internal + [(a, b, bit) for (a, b), bit in zip(links, bits)])
        if classify_surface(T) == want:
            break
    else:
        raise UnsupportedSurface(f"no connection gluing realises {want.name}")
    conn_slots = [a for a, _ in links]
    conn_edges = tuple(T.slot_edge[t][i] for t, i in conn_slots)
    forbid = []
    for (a, b) in links:
        for t, i in (a, b):
            kind = kinds[max(k for k, off in enumerate(offsets) if off <= t)]
            if kind != "proj_1p":
                forbid.append((t, i))
    B = _first_branching(T, forbid)
    return ChainBuild(T, B, conn_edges, tuple(zip(kinds, offsets)))


# -- distinguished triangulations ------------------------------------------------

SURFACE_NAMES = {"S2": (True, 0), "T2": (True, 1), "P2": (False, 1), "K": (False, 2)}


def parse_surface(name) -> tuple:
    """``S2``, ``T2``, ``P2``, ``K``, ``Sg<g>`` or ``N<r>`` -> (orientable, g)."""
    if isinstance(name, SurfaceClass):
        return name.orientable, name.genus_or_crosscaps
    if isinstance(name, tuple):
        return name
    if name in SURFACE_NAMES:
        return SURFACE_NAMES[name]
    m = re.fullmatch(r"(Sg|N)(\d+)", name)
    if not m:
        raise UnsupportedSurface(f"unknown surface {name!r}")
    return m.group(1) == "Sg", int(m.group(2))


def min_vertices(orientable, g):
    chi = 2 - 2 * g if orientable else 2 - g
    return max(1, chi + 1)


def _refine(B, t, corner, times):
    """Repeated 1->3 moves on triangle ``t``; the new vertex is made the
    smallest, so every spoke points away from it."""
    for _ in range(times):
        B = step(B, Stellar13(t, (0, 0, 0), corner)).state
    return B


def distinguished_branched(surface, n) -> Built:
    orientable, g = parse_surface(surface)
    n_s = min_vertices(orientable, g)
    if n < n_s:
        raise BadVertexCount(f"{surface} needs at least {n_s} vertices, got {n}")
    if orientable and g == 0:
        B = _refine(sphere3().branching, 0, 2, n - 3)
        return Built(B.owner, B)
    if (orientable, g) in ((True, 1), (False, 2)):
        base = torus1() if orientable else klein_quad()
        # the diagonal a-c is slot 1 of triangle 0
        B = _refine(base.branching, 0, 1, n - 1)
        return Built(B.owner, B)
    if (orientable, g) == (False, 1):
        B = projective2().branching
        if n >= 3:
            T = B.owner
            # internal edge between corners 0 and 2 of triangle 0
            e = T.slot_edge[0][1]
            B = step(B, BubblePlus(e, (0, 0))).state
            # new triangle on the first side; its edge towards the new vertex
            B = _refine(B, 2, 1, n - 3)
        return Built(B.owner, B)
    cb = chain_surface(orientable, g)
    B = cb.branching
    if n > 1:
        off = dict((k, o) for k, o in reversed(cb.bricks))["torus_1p"]
        t, i = brick("torus_1p").connections[0]
        B = _refine(B, t + off, i, n - 1)
    T = B.owner
    conn = tuple(e for e in range(T.E) if _is_connection(cb, T, e))
    return Built(T, B, conn)


def _is_connection(cb, T, e):
    # connection slots keep their position under the 1->3 refinements
    slots = {cb.triangulation.edges[c].a for c in cb.connections}
    return T.edges[e].a in slots


def distinguished(surface, n) -> Triangulation:
    return distinguished_branched(surface, n).triangulation


def trapped_free_variant(built: Built) -> Built:
    """Flip every connection edge that borders a trapped edge's triangle."""
    B = built.branching
    T = B.owner
    conns = list(built.connections)
    for e in list(conns):
        tr = {T.edges[x].a[0] for x in trapped_edges(T)}
        edge = T.edges[e]
        if edge.a[0] in tr or edge.b[0] in tr:
            c = bflip_choices(B, e)[0]
            r = step(B, BFlip(e, c))
            B, T = r.state, r.state.owner
    return Built(T, B, ())


def random_instance(seed, surface, n, walk_length, avoid_trapped=True) -> Built:
    """A seeded random walk of b-flips from the distinguished instance.

    With ``avoid_trapped`` a start carrying trapped edges is first replaced by
    its trapped-free variant; a walk of length 0 returns the start untouched.
    """
    rng = random.Random(seed)
    start = distinguished_branched(surface, n)
    if walk_length == 0:
        return start
    if avoid_trapped and trapped_edges(start.triangulation):
        start = trapped_free_variant(start)
    B = start.branching
    for _ in range(walk_length):
        T = B.owner
        edges = [e.id for e in T.edges if not e.trapped]
        rng.shuffle(edges)
        for e in edges:
            options = bflip_choices(B, e)
            c = rng.choice(options)
            nxt = step(B, BFlip(e, c)).state
            if avoid_trapped and trapped_edges(nxt.owner):
                continue
            B = nxt
            break
    return Built(B.owner, B)
