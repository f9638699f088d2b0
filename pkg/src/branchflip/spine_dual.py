"""The dual train track of a branched triangulation and its switching cycles.

Switches are triangles and branches are edges.  At each switch the large
branch is the one dual to the long edge v0 v2.  A switching cycle assigns a
rational weight to every branch with ``z(large) = z(small1) + z(small2)`` at
every switch.  All arithmetic is exact (:class:`fractions.Fraction`).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .branching import Branching, one_corner_counts
from .complex_core import SLOT_ENDS, SLOT_SENSE, corner_image
from .errors import InconsistentTransport, NotACycle
from .moves import BFlip, step


@dataclass(frozen=True)
class TrainTrack:
    n_branches: int
    switches: tuple  # per switch: (large, small, small) branch ids
    loops: frozenset  # branches with both ends at one switch
    oriented: tuple | None  # per branch: switch the oriented branch points into

    @property
    def n_switches(self):
        return len(self.switches)

    def equations(self):
        """One row per switch: +1 on the large branch, -1 on each small one."""
        rows = []
        for large, s1, s2 in self.switches:
            row = [Fraction(0)] * self.n_branches
            row[large] += 1
            row[s1] -= 1
            row[s2] -= 1
            rows.append(row)
        return rows

    def is_cycle(self, z):
        return all(sum(c * w for c, w in zip(row, z)) == 0 for row in self.equations())


def dual_spine(B: Branching) -> TrainTrack:
    T = B.owner
    switches = []
    for t in range(T.F):
        v1 = B.orders[t][1]
        s1, s2 = (i for i in range(3) if i != v1)
        se = T.slot_edge[t]
        switches.append((se[v1], se[s1], se[s2]))
    loops = frozenset(e.id for e in T.edges if e.trapped)
    oriented = None
    o = T.orientation
    if o is not None:
        # the oriented branch crosses its edge from left to right, so that
        # (edge, branch) is a positive frame
        into = []
        for e in T.edges:
            t, i = e.a
            along = 1 if B.slot_dir(t, i) == 0 else -1
            into.append(t if o[t] * SLOT_SENSE[i] * along > 0 else e.b[0])
        oriented = tuple(into)
    return TrainTrack(T.E, tuple(switches), loops, oriented)


# -- exact linear algebra --------------------------------------------------------

def rref(rows, ncols):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((k for k in range(r, len(m)) if m[k][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for k in range(len(m)):
            if k != r and m[k][c] != 0:
                f = m[k][c]
                m[k] = [a - f * b for a, b in zip(m[k], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows, ncols):
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def rank(vectors, ncols):
    return len(rref(vectors, ncols)[1]) if vectors else 0


def cycle_space_basis(track: TrainTrack) -> list:
    return nullspace(track.equations(), track.n_branches)


def cycle_dimension(track: TrainTrack) -> int:
    return len(cycle_space_basis(track))


class Cone(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def in_cone(track: TrainTrack, z) -> Cone:
    z = [Fraction(x) for x in z]
    if len(z) != track.n_branches or not track.is_cycle(z):
        raise NotACycle("weights violate a switching condition")
    if all(x > 0 for x in z):
        return Cone.INTERIOR
    if all(x >= 0 for x in z):
        return Cone.BOUNDARY
    return Cone.OUTSIDE


# -- Fourier-Motzkin -------------------------------------------------------------

def _fm_eliminate(ineqs, var):
    """Eliminate ``var`` from inequalities ``a . x >= b`` given as (a, b)."""
    pos, neg, rest = [], [], []
    for a, b in ineqs:
        (pos if a[var] > 0 else neg if a[var] < 0 else rest).append((a, b))
    out = list(rest)
    for ap, bp in pos:
        for an, bn in neg:
            lp, ln = -an[var], ap[var]
            a = tuple(lp * x + ln * y for x, y in zip(ap, an))
            out.append((a, lp * bp + ln * bn))
    seen, uniq = set(), []
    for a, b in out:
        g = max((abs(x) for x in a), default=0)
        key = (tuple(x / g for x in a), b / g) if g else (a, b)
        if key not in seen:
            seen.add(key)
            uniq.append((a, b))
    return uniq


def fm_feasible(ineqs, nvars):
    """Feasibility of ``a . x >= b`` by Fourier-Motzkin, with a witness."""
    stages = [ineqs]
    for v in range(nvars):
        stages.append(_fm_eliminate(stages[-1], v))
    if any(b > 0 for _, b in stages[-1]):
        return None
    x = [Fraction(0)] * nvars
    for v in reversed(range(nvars)):
        lo, hi = None, None
        for a, b in stages[v]:
            rest = sum(a[k] * x[k] for k in range(v + 1, nvars))
            if a[v] > 0:
                bound = (b - rest) / a[v]
                lo = bound if lo is None else max(lo, bound)
            elif a[v] < 0:
                bound = (b - rest) / a[v]
                hi = bound if hi is None else min(hi, bound)
        x[v] = lo if lo is not None else hi if hi is not None else Fraction(0)
    return x


class Positivity(NamedTuple):
    exists: bool
    witness: list | None


def positive_cycle_exists(track: TrainTrack) -> Positivity:
    """Is there a switching cycle with every weight >= 1 (equivalently > 0)?"""
    basis = cycle_space_basis(track)
    k = len(basis)
    if k == 0:
        return Positivity(False, None)
    ineqs = [(tuple(Fraction(v[e]) for v in basis), Fraction(1)) for e in range(track.n_branches)]
    lam = fm_feasible(ineqs, k)
    if lam is None:
        return Positivity(False, None)
    z = [sum(l * v[e] for l, v in zip(lam, basis)) for e in range(track.n_branches)]
    assert track.is_cycle(z) and all(w >= 1 for w in z)
    return Positivity(True, z)


# -- transport -----------------------------------------------------------------

def transport_cycle(B: Branching, e, choice, z):
    """Carry the cycle ``z`` across the b-flip of ``e``.

    Persistent branches keep their weights; the new diagonal's weight is read
    off the switching condition at one new switch and checked at the other.
    """
    T = B.owner
    r = step(B, BFlip(e, choice))
    B2 = r.state
    T2 = B2.owner
    d = r.inverse.edge
    w = [None] * T2.E
    for ed in T.edges:
        if ed.id == e:
            continue
        (nt, ns), _ = r.slot_map[ed.a]
        w[T2.slot_edge[nt][ns]] = Fraction(z[ed.id])
    track = dual_spine(B2)
    t1, t2 = T2.edges[d].a[0], T2.edges[d].b[0]

    def residual(t, wd):
        large, s1, s2 = track.switches[t]
        val = lambda x: wd if x == d else w[x]
        return val(large) - val(s1) - val(s2)

    # residual is affine in the diagonal weight
    r0 = residual(t1, Fraction(0))
    slope = residual(t1, Fraction(1)) - r0
    if slope == 0:
        raise InconsistentTransport("new diagonal does not enter its switching condition")
    w[d] = -r0 / slope
    if residual(t2, w[d]) != 0:
        raise InconsistentTransport(f"switching condition fails at the second new switch after flipping edge {e}")
    return w, B2


# -- vertex links ----------------------------------------------------------------

class LinkCorner(NamedTuple):
    triangle: int
    corner: int
    one_labelled: bool
    sign: int  # b-orientation against a local orientation of the star


def vertex_link(B: Branching, v) -> list:
    """Corners around ``v`` in cyclic order, walking across the slots at ``v``."""
    T = B.owner
    start = min(T.corners_at[v])
    t, c = start
    exit_slot = min(s for s in range(3) if s != c)
    local = 1
    seq = []
    seen = set()
    while (t, c) not in seen:
        seen.add((t, c))
        order = B.orders[t]
        par = 1 if order in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
        seq.append(LinkCorner(t, c, order[1] == c, local * par))
        u, j, bit = T.glue[t][exit_slot]
        local = -local * SLOT_SENSE[exit_slot] * SLOT_SENSE[j] * (-1 if bit else 1)
        c = corner_image(exit_slot, j, bit, c)
        exit_slot = 3 - c - j
        t = u
    return seq


def bicolor_link(B: Branching, v) -> list:
    """Arcs between consecutive 1-labelled corners, coloured alternately.

    Returns ``(color, corners)`` pairs, ``2 d_b(v)`` of them; empty when no
    corner at ``v`` is 1-labelled.
    """
    seq = vertex_link(B, v)
    marks = [k for k, lc in enumerate(seq) if lc.one_labelled]
    if not marks:
        return []
    assert len(marks) % 2 == 0, "odd number of 1-labelled corners"
    arcs = []
    for n, k in enumerate(marks):
        nxt = marks[(n + 1) % len(marks)]
        span = seq[k:nxt] if nxt > k else seq[k:] + seq[:nxt]
        arcs.append(("black" if n % 2 == 0 else "white", span))
    return arcs
