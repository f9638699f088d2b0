"""Branchings: edge orientations induced by a local order on every triangle.

An orientation assignment is a tuple of bits, one per edge id.  Bit ``0``
means the edge runs from the low to the high endpoint of its primary slot;
seen from the secondary slot the direction is XORed with the gluing bit.
"""
from __future__ import annotations

import itertools
from functools import cached_property
from typing import NamedTuple

from .complex_core import SLOT_ENDS, SLOT_SENSE, Triangulation
from .errors import DifferentOwner, NotABranching, NotAmbiguous, NotOrientable

# Out-degree of corners 0, 1, 2 given slot directions (d0, d1, d2).
_OUT = {}
# Local order (v0, v1, v2) for acyclic direction triples.
_ORDER = {}
for _d in itertools.product((0, 1), repeat=3):
    d0, d1, d2 = _d
    out = ((d1 == 0) + (d2 == 0), (d2 == 1) + (d0 == 0), (d0 == 1) + (d1 == 1))
    _OUT[_d] = out
    if sorted(out) == [0, 1, 2]:
        _ORDER[_d] = (out.index(2), out.index(1), out.index(0))


def triangle_is_acyclic(dirs):
    return tuple(dirs) in _ORDER


def dirs_for_order(order):
    """Slot directions of a triangle whose corners are ordered ``order``."""
    rank = {c: k for k, c in enumerate(order)}
    return tuple(0 if rank[lo] < rank[hi] else 1 for lo, hi in SLOT_ENDS)


def is_branching(T: Triangulation, orientation) -> bool:
    """True iff no triangle boundary is an oriented cycle."""
    if len(orientation) != T.E:
        return False
    tw, se = T.slot_twist, T.slot_edge
    for t in range(T.F):
        d = tuple(orientation[se[t][i]] ^ tw[t][i] for i in range(3))
        if d not in _ORDER:
            return False
    return True


class Branching:
    """A valid branching on a fixed triangulation ``owner``."""

    __slots__ = ("owner", "orient", "__dict__")

    def __init__(self, owner: Triangulation, orient, check=True):
        self.owner = owner
        self.orient = tuple(int(x) for x in orient)
        if check and not is_branching(owner, self.orient):
            raise NotABranching("some triangle boundary is an oriented cycle")

    def __eq__(self, other):
        return isinstance(other, Branching) and self.owner == other.owner and self.orient == other.orient

    def __hash__(self):
        return hash((self.owner, self.orient))

    def __repr__(self):
        return f"Branching({''.join(map(str, self.orient))} on {self.owner!r})"

    def slot_dir(self, t, i):
        T = self.owner
        return self.orient[T.slot_edge[t][i]] ^ T.slot_twist[t][i]

    def slot_head(self, t, i):
        """Corner of ``t`` at the head of the edge carried by slot ``i``."""
        return SLOT_ENDS[i][1 - self.slot_dir(t, i)]

    def dirs(self, t):
        return tuple(self.slot_dir(t, i) for i in range(3))

    @cached_property
    def orders(self):
        """Per-triangle local orders ``(v0, v1, v2)`` as corner indices."""
        return tuple(_ORDER[self.dirs(t)] for t in range(self.owner.F))

    def head_label(self, e):
        t, i = self.owner.edges[e].a
        return self.owner.labels[t][self.slot_head(t, i)]

    def tail_label(self, e):
        t, i = self.owner.edges[e].a
        lo, hi = SLOT_ENDS[i]
        return self.owner.labels[t][lo if self.slot_head(t, i) == hi else hi]


def from_vertex_order(T: Triangulation, order) -> Branching:
    """Branching induced by a total order on vertex labels (lowest first)."""
    rank = {v: k for k, v in enumerate(order)}
    orient = []
    for e in T.edges:
        a, b = T.edge_endpoints(e.id)
        if a == b:
            raise NotABranching("a loop edge cannot be oriented by a vertex order")
        orient.append(0 if rank[a] < rank[b] else 1)
    return Branching(T, orient)


def from_local_orders(T: Triangulation, orders) -> Branching:
    """Branching from per-triangle corner orders; inconsistent data raises."""
    orient = [None] * T.E
    for t, order in enumerate(orders):
        d = dirs_for_order(order)
        for i in range(3):
            e = T.slot_edge[t][i]
            bit = d[i] ^ T.slot_twist[t][i]
            if orient[e] is None:
                orient[e] = bit
            elif orient[e] != bit:
                raise NotABranching(f"local orders disagree on edge {e}")
    return Branching(T, orient)


def iter_branchings(T: Triangulation, forbid_long=()):
    """Yield branchings of ``T`` by backtracking over edge ids.

    A triangle is checked as soon as the last of its edges gets a value.
    ``forbid_long`` lists slots that must not carry their triangle's long edge.
    """
    E = T.E
    se, tw = T.slot_edge, T.slot_twist
    banned = {}
    for t, i in forbid_long:
        banned.setdefault(t, set()).add(i)
    closes = [[] for _ in range(E)]
    for t in range(T.F):
        closes[max(se[t])].append(t)
    orient = [0] * E

    def ok(k):
        for t in closes[k]:
            d = (orient[se[t][0]] ^ tw[t][0], orient[se[t][1]] ^ tw[t][1], orient[se[t][2]] ^ tw[t][2])
            order = _ORDER.get(d)
            if order is None or order[1] in banned.get(t, ()):
                return False
        return True

    def rec(k):
        if k == E:
            yield Branching(T, orient, check=False)
            return
        for bit in (0, 1):
            orient[k] = bit
            if ok(k):
                yield from rec(k + 1)

    yield from rec(0)


def enumerate_branchings(T: Triangulation) -> list:
    return list(iter_branchings(T))


def local_order(B: Branching, t):
    return B.orders[t]


def one_labelled_corner(B: Branching, t):
    return B.orders[t][1]


def one_corner_counts(B: Branching) -> dict:
    """Vertex label -> number of 1-labelled corners at it."""
    T = B.owner
    counts = {v: 0 for v in T.vertices}
    for t in range(T.F):
        counts[T.labels[t][B.orders[t][1]]] += 1
    return counts


def d_b(B: Branching, v) -> int:
    return one_corner_counts(B)[v] // 2


def i_b(B: Branching, v) -> int:
    return 1 - d_b(B, v)


def d_vector(B: Branching) -> dict:
    return {v: c // 2 for v, c in one_corner_counts(B).items()}


def total_inversion(B: Branching) -> Branching:
    return Branching(B.owner, tuple(1 - x for x in B.orient), check=False)


def is_ambiguous(B: Branching, e) -> bool:
    """Reversing ``e`` keeps a branching; only the triangles on ``e`` are checked."""
    T = B.owner
    edge = T.edges[e]
    orient = list(B.orient)
    orient[e] ^= 1
    for t in {edge.a[0], edge.b[0]}:
        d = tuple(orient[T.slot_edge[t][i]] ^ T.slot_twist[t][i] for i in range(3))
        if d not in _ORDER:
            return False
    return True


def ambiguous_edges(B: Branching) -> frozenset:
    return frozenset(e for e in range(B.owner.E) if is_ambiguous(B, e))


def is_long_edge(B: Branching, t, i) -> bool:
    """Slot ``i`` of ``t`` carries the edge joining the extreme corners v0, v2."""
    return B.orders[t][1] == i


def invert_edge(B: Branching, e) -> Branching:
    if not is_ambiguous(B, e):
        raise NotAmbiguous(f"edge {e} is not ambiguous")
    orient = list(B.orient)
    orient[e] ^= 1
    return Branching(B.owner, orient, check=False)


def delta(B: Branching, B2: Branching) -> frozenset:
    if B.owner != B2.owner:
        raise DifferentOwner("branchings live on different triangulations")
    return frozenset(e for e, (x, y) in enumerate(zip(B.orient, B2.orient)) if x != y)


# -- signs on oriented surfaces -----------------------------------------------

def _parity(order):
    inv = sum(1 for a, b in itertools.combinations(order, 2) if a > b)
    return -1 if inv % 2 else 1


def triangle_signs(B: Branching, global_orientation=None) -> tuple:
    """Sign of each triangle: +1 iff v0 -> v1 -> v2 agrees with the orientation.

    ``global_orientation`` is a coherent per-triangle sign vector; the default
    makes triangle 0 positive in its corner order.
    """
    o = global_orientation if global_orientation is not None else B.owner.orientation
    if o is None:
        raise NotOrientable("triangle signs need an oriented surface")
    return tuple(o[t] * _parity(B.orders[t]) for t in range(B.owner.F))


class SignPartition(NamedTuple):
    plus: frozenset
    minus: frozenset


def epsilon_pm(B: Branching, global_orientation=None):
    s = triangle_signs(B, global_orientation)
    eps = (s.count(1), s.count(-1))
    assert eps[0] == eps[1], f"epsilon_+ != epsilon_-: {eps}"
    return eps


def s_plus_minus(B: Branching, global_orientation=None) -> SignPartition:
    s = triangle_signs(B, global_orientation)
    return SignPartition(frozenset(t for t, x in enumerate(s) if x > 0), frozenset(t for t, x in enumerate(s) if x < 0))


def boundary_chain(B: Branching, triangles, global_orientation=None) -> dict:
    """Boundary of the 2-chain ``sum o_t * t`` over ``triangles``.

    Coefficients are expressed against the b-orientation of each edge and zero
    entries are dropped.
    """
    T = B.owner
    o = global_orientation if global_orientation is not None else T.orientation
    if o is None:
        raise NotOrientable("boundary chains need an oriented surface")
    chain = {}
    for t in triangles:
        for i in range(3):
            e = T.slot_edge[t][i]
            # boundary walks slot i low -> high iff SLOT_SENSE[i] * o[t] > 0;
            # the edge runs low -> high on this slot iff slot_dir == 0
            along = 1 if B.slot_dir(t, i) == 0 else -1
            chain[e] = chain.get(e, 0) + o[t] * SLOT_SENSE[i] * along
    return {e: c for e, c in chain.items() if c}


def boundary_of_s_plus(B: Branching, global_orientation=None) -> dict:
    return boundary_chain(B, s_plus_minus(B, global_orientation).plus, global_orientation)
