"""The move calculus on naked and branched triangulations.

Every move is a frozen dataclass.  :func:`step` applies one move and returns
the new state together with the inverse move and the slot map (old slot ->
new slot plus corner map), which other modules use to carry orientations and
weights across the move.

Layout conventions keep ids stable where it is cheap to do so: flipping the
same diagonal twice restores the exact gluing table, and a 1->3 (or 0->2)
move undone by its 3->1 (or 2->0) inverse restores it as well.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Union

from .branching import Branching, is_branching
from .complex_core import (
    SLOT_ENDS,
    SLOT_SENSE,
    Triangulation,
    canonical_key,
    corner_image,
    find_nutshells,
    find_triangular_stars,
    gluing_bit,
)
from .errors import BadNutshell, BadStar, IllegalChoice, MoveError, NotAmbiguous, ReplayError, TrappedEdge


# -- moves ---------------------------------------------------------------------

@dataclass(frozen=True)
class NakedFlip:
    edge: int


@dataclass(frozen=True)
class BFlip:
    """Flip ``edge``; ``choice`` 0 orients the new diagonal from the corner
    opposite the edge in its primary triangle towards the other apex."""
    edge: int
    choice: int


@dataclass(frozen=True)
class InvertEdge:
    edge: int


@dataclass(frozen=True)
class BubblePlus:
    """Open ``edge`` into a nutshell with a fresh central vertex.

    ``choice = (hx, hy)``: bit 1 points the new edge from the low (resp. high)
    endpoint of the edge's primary slot towards the new vertex.
    """
    edge: int
    choice: tuple = (1, 1)
    label: int | None = None


@dataclass(frozen=True)
class BubbleMinus:
    center: int


@dataclass(frozen=True)
class Stellar13:
    """Cone ``triangle`` to a fresh vertex.

    ``choice[k]`` is 1 when the spoke to corner ``k`` points at the new vertex.
    The new vertex takes the place of ``corner`` in the original triangle id.
    """
    triangle: int
    choice: tuple = (1, 1, 1)
    corner: int = 0
    label: int | None = None


@dataclass(frozen=True)
class Stellar31:
    center: int


Move = Union[NakedFlip, BFlip, InvertEdge, BubblePlus, BubbleMinus, Stellar13, Stellar31]
MOVE_TYPES = {cls.__name__: cls for cls in (NakedFlip, BFlip, InvertEdge, BubblePlus, BubbleMinus, Stellar13, Stellar31)}


def move_to_json(m) -> dict:
    d = {"type": type(m).__name__}
    for k, v in asdict(m).items():
        if v is None:
            continue
        d[k] = list(v) if isinstance(v, tuple) else v
    return d


def move_from_json(d) -> Move:
    d = dict(d)
    cls = MOVE_TYPES[d.pop("type")]
    if "choice" in d and isinstance(d["choice"], list):
        d["choice"] = tuple(d["choice"])
    return cls(**d)


@dataclass
class MoveLog:
    initial_key: str
    moves: list = field(default_factory=list)

    def __len__(self):
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    def to_json(self):
        return {"initial_key": self.initial_key, "moves": [move_to_json(m) for m in self.moves]}

    @classmethod
    def from_json(cls, d):
        return cls(d["initial_key"], [move_from_json(x) for x in d["moves"]])


class FlipClass(enum.Enum):
    NON_AMBIGUOUS = "non-ambiguous"
    FORCED_AMBIGUOUS = "forced-ambiguous"
    # not forced, inverse forced: the reverse of a forced ambiguous flip
    INVERSE_FORCED = "inverse-forced"
    BUMP = "bump"

    @property
    def forced(self):
        return self in (FlipClass.NON_AMBIGUOUS, FlipClass.FORCED_AMBIGUOUS)

    @property
    def sliding(self):
        return self is not FlipClass.BUMP


class StepResult(NamedTuple):
    state: object
    inverse: object
    slot_map: dict  # old slot -> (new slot, {old corner: new corner})


# -- surgery -------------------------------------------------------------------

def _surgery(T: Triangulation, keep, outer, internal, new_labels):
    """Assemble a new gluing table.

    ``keep`` maps old triangle ids to new ones for triangles that survive
    untouched.  ``outer`` maps old slots of rebuilt triangles to
    ``(new slot, corner map)``.  ``internal`` lists new gluings given directly
    in new coordinates.  Returns the new triangulation and the full slot map.
    """
    slot_map = {}
    for t, nt in keep.items():
        for i in range(3):
            lo, hi = SLOT_ENDS[i]
            slot_map[(t, i)] = ((nt, i), {lo: lo, hi: hi})
    slot_map.update(outer)
    F = len(new_labels)
    glue = [[None] * 3 for _ in range(F)]
    for (t, i), ((nt, ns), cmap) in slot_map.items():
        u, j, bit = T.glue[t][i]
        if (u, j) not in slot_map:
            continue
        (nu, nj), cmap2 = slot_map[(u, j)]
        inv = {v: k for k, v in cmap.items()}
        old_lo = inv[SLOT_ENDS[ns][0]]
        image = cmap2[corner_image(i, j, bit, old_lo)]
        glue[nt][ns] = (nu, nj, gluing_bit(ns, nj, image))
    for (a, s), (b, r), bit in internal:
        glue[a][s] = (b, r, bit)
        glue[b][r] = (a, s, bit)
    return Triangulation(glue, new_labels), slot_map


def _transport_orient(B: Branching, T_new: Triangulation, slot_map, heads=None):
    """Carry edge directions across a slot map; ``heads`` fixes new edges by
    naming the head corner on one of their new slots."""
    back = {ns: (os, cmap) for os, (ns, cmap) in slot_map.items()}
    heads = heads or {}
    orient = []
    for e in T_new.edges:
        bit = None
        for slot in (e.a, e.b):
            nt, ns = slot
            if slot in heads:
                h = heads[slot]
            elif slot in back:
                (t, i), cmap = back[slot]
                h = cmap[B.slot_head(t, i)]
            else:
                continue
            d = 0 if h == SLOT_ENDS[ns][1] else 1
            bit = d ^ T_new.slot_twist[nt][ns]
            break
        if bit is None:
            raise MoveError(f"no orientation available for new edge {e.id}")
        orient.append(bit)
    return orient


def transport_orientation(T_old: Triangulation, o_old, T_new: Triangulation, slot_map):
    """The coherent orientation of ``T_new`` agreeing with ``o_old`` on every
    surviving slot."""
    for (t, i), ((nt, ns), cmap) in slot_map.items():
        lo, hi = SLOT_ENDS[i]
        sgn = 1 if cmap[lo] < cmap[hi] else -1
        o = T_new.coherent_orientation(nt, o_old[t] * SLOT_SENSE[i] * SLOT_SENSE[ns] * sgn)
        return o
    raise MoveError("empty slot map")


def _renumber(F, removed):
    keep, k = {}, 0
    for t in range(F):
        if t not in removed:
            keep[t] = k
            k += 1
    return keep


def fresh_label(T: Triangulation):
    return max(T.vertices) + 1


# -- flips ---------------------------------------------------------------------

def _flip_surgery(T: Triangulation, e):
    edge = T.edges[e]
    if edge.trapped:
        raise TrappedEdge(f"edge {e} is trapped and cannot be flipped")
    (t1, i1), (t2, i2), bit = edge.a, edge.b, edge.bit
    lo1, hi1 = SLOT_ENDS[i1]
    x2, y2 = corner_image(i1, i2, bit, lo1), corner_image(i1, i2, bit, hi1)
    L = T.labels
    LP, LX, LY, LR = L[t1][i1], L[t1][lo1], L[t1][hi1], L[t2][i2]
    labels = [list(r) for r in L]
    labels[t1][lo1], labels[t1][i1], labels[t1][hi1] = LP, LX, LR
    labels[t2][x2], labels[t2][i2], labels[t2][y2] = LP, LY, LR
    keep = {t: t for t in range(T.F) if t not in (t1, t2)}
    outer = {
        (t1, hi1): ((t1, hi1), {i1: lo1, lo1: i1}),  # P-X stays
        (t2, y2): ((t1, lo1), {i2: hi1, x2: i1}),  # R-X moves into t1
        (t2, x2): ((t2, x2), {i2: y2, y2: i2}),  # R-Y stays
        (t1, lo1): ((t2, y2), {i1: x2, hi1: i2}),  # P-Y moves into t2
    }
    internal = [((t1, i1), (t2, i2), bit)]
    T_new, slot_map = _surgery(T, keep, outer, internal, labels)
    return T_new, slot_map, (t1, i1)


def flip_naked(T: Triangulation, e) -> Triangulation:
    return _flip_surgery(T, e)[0]


def bflip_choices(B: Branching, e) -> list:
    """Legal orientations of the new diagonal, as ``choice`` values."""
    T_new, slot_map, (t1, i1) = _flip_surgery(B.owner, e)
    out = []
    for c in (0, 1):
        heads = {(t1, i1): SLOT_ENDS[i1][1 - c]}
        orient = _transport_orient(B, T_new, slot_map, heads)
        if is_branching(T_new, orient):
            out.append(c)
    return out


def _bflip(B: Branching, e, choice):
    T_new, slot_map, (t1, i1) = _flip_surgery(B.owner, e)
    heads = {(t1, i1): SLOT_ENDS[i1][1 - choice]}
    orient = _transport_orient(B, T_new, slot_map, heads)
    if not is_branching(T_new, orient):
        raise IllegalChoice(f"choice {choice} does not enhance the flip of edge {e}")
    B_new = Branching(T_new, orient, check=False)
    inverse = BFlip(T_new.slot_edge[t1][i1], B.orient[e])
    return B_new, inverse, slot_map


def bflip(B: Branching, e, choice) -> Branching:
    return _bflip(B, e, choice)[0]


def enumerate_bflips(B: Branching, e) -> list:
    return [bflip(B, e, c) for c in bflip_choices(B, e)]


def classify_bflip(B: Branching, e, choice) -> FlipClass:
    forced = len(bflip_choices(B, e)) == 1
    B_new, inverse, _ = _bflip(B, e, choice)
    inverse_forced = len(bflip_choices(B_new, inverse.edge)) == 1
    if forced and inverse_forced:
        return FlipClass.NON_AMBIGUOUS
    if forced:
        return FlipClass.FORCED_AMBIGUOUS
    if inverse_forced:
        return FlipClass.INVERSE_FORCED
    return FlipClass.BUMP


def two_flip_inversion(B: Branching, e) -> list:
    """Two b-flips whose composite reverses the untrapped ambiguous edge ``e``."""
    if B.owner.edges[e].trapped:
        raise TrappedEdge(f"edge {e} is trapped")
    from .branching import is_ambiguous

    if not is_ambiguous(B, e):
        raise NotAmbiguous(f"edge {e} is not ambiguous")
    c = bflip_choices(B, e)[0]
    first = BFlip(e, c)
    B1, inv, _ = _bflip(B, e, c)
    second = BFlip(inv.edge, 1 - B.orient[e])
    return [first, second]


# -- bubbles ---------------------------------------------------------------------

def _bubble_plus(T: Triangulation, e, label):
    edge = T.edges[e]
    (t1, i1), (t2, i2), bit = edge.a, edge.b, edge.bit
    lo1, hi1 = SLOT_ENDS[i1]
    F = T.F
    M = fresh_label(T) if label is None else label
    if M in T.vertices:
        raise MoveError(f"label {M} is already in use")
    LX, LY = T.labels[t1][lo1], T.labels[t1][hi1]
    labels = [list(r) for r in T.labels] + [[LX, LY, M], [LX, LY, M]]
    U, W = F, F + 1
    keep = {t: t for t in range(F)}
    x2 = corner_image(i1, i2, bit, lo1)
    internal = [
        ((U, 2), (t1, i1), 0),
        ((W, 2), (t2, i2), gluing_bit(2, i2, x2)),
        ((U, 0), (W, 0), 0),
        ((U, 1), (W, 1), 0),
    ]
    # slots (t1,i1) and (t2,i2) are re-glued to the nutshell
    T_new, slot_map = _surgery(T, keep, {}, internal, labels)
    return T_new, slot_map, M


def _nutshell_at(T: Triangulation, center):
    for n in find_nutshells(T):
        if n.center == center:
            return n
    raise MoveError(f"no nutshell with central vertex {center}")


def _bubble_minus(T: Triangulation, center):
    n = _nutshell_at(T, center)
    (U, W), (cu, cw) = n.triangles, n.corners
    a, ja, ba = T.glue[U][cu]
    b, jb, bb = T.glue[W][cw]
    keep = _renumber(T.F, {U, W})
    labels = [T.labels[t] for t in keep]

    def to_w(x):
        s = 3 - x - cu
        _, js, bs = T.glue[U][s]
        return corner_image(s, js, bs, x)

    la = SLOT_ENDS[ja][0]
    xu = corner_image(ja, cu, ba, la)
    image = corner_image(cw, jb, bb, to_w(xu))
    internal = [((keep[a], ja), (keep[b], jb), gluing_bit(ja, jb, image))]
    T_new, slot_map = _surgery(T, keep, {}, internal, labels)
    return T_new, slot_map, n, to_w


def nutshell_is_good(B: Branching, n) -> bool:
    """False when the two boundary edges form an oriented circle."""
    T = B.owner
    (U, W), (cu, cw) = n.triangles, n.corners
    hu = B.slot_head(U, cu)
    s = 3 - hu - cu
    _, js, bs = T.glue[U][s]
    return corner_image(s, js, bs, hu) == B.slot_head(W, cw)


def bubble_plus(B: Branching, e, choice=(1, 1), label=None) -> Branching:
    return step(B, BubblePlus(e, tuple(choice), label)).state


def bubble_minus(B: Branching, nutshell) -> Branching:
    center = nutshell.center if hasattr(nutshell, "center") else nutshell
    return step(B, BubbleMinus(center)).state


# -- stellar moves ------------------------------------------------------------------

def _stellar13(T: Triangulation, t, corner, label):
    F = T.F
    N = fresh_label(T) if label is None else label
    if N in T.vertices:
        raise MoveError(f"label {N} is already in use")
    others = [k for k in range(3) if k != corner]
    tri = {corner: t, others[0]: F, others[1]: F + 1}
    labels = [list(r) for r in T.labels] + [None, None]
    for k in range(3):
        row = list(T.labels[t])
        row[k] = N
        labels[tri[k]] = row
    keep = {u: u for u in range(F) if u != t}
    outer = {(t, k): ((tri[k], k), {c: c for c in SLOT_ENDS[k]}) for k in range(3)}
    internal = []
    for k in range(3):
        for m in range(k + 1, 3):
            c = 3 - k - m
            lo = SLOT_ENDS[m][0]
            image = m if lo == k else c
            internal.append(((tri[k], m), (tri[m], k), gluing_bit(m, k, image)))
    T_new, slot_map = _surgery(T, keep, outer, internal, labels)
    return T_new, slot_map, tri, N


def _star_at(T: Triangulation, center):
    for s in find_triangular_stars(T):
        if s.center == center:
            return s
    raise MoveError(f"no triangular star with center {center}")


def _stellar31(T: Triangulation, center):
    star = _star_at(T, center)
    where = dict(zip(star.triangles, star.corners))
    base = star.triangles[0]
    p = where[base]
    q, r = SLOT_ENDS[p]
    sides = {}
    for opp, kept in ((r, q), (q, r)):
        # slot ``opp`` of the base is the spoke towards corner ``kept``
        u, j, bit = T.glue[base][opp]
        cu = where[u]
        ku = corner_image(opp, j, bit, kept)
        wu = 3 - cu - ku
        sides[opp] = (u, cu, ku, wu)
    removed = {sides[r][0], sides[q][0]}
    full = _renumber(T.F, removed)
    nb = full[base]
    keep = {t: nt for t, nt in full.items() if t != base}
    u, cu, ku, wu = sides[r]
    row = list(T.labels[base])
    row[p] = T.labels[u][wu]
    labels = [row if t == base else T.labels[t] for t in full]
    outer = {(base, p): ((nb, p), {q: q, r: r})}
    for opp, kept in ((r, q), (q, r)):
        u, cu, ku, wu = sides[opp]
        outer[(u, cu)] = ((nb, opp), {ku: kept, wu: p})
    T_new, slot_map = _surgery(T, keep, outer, [], labels)
    return T_new, slot_map, star, sides, nb


def star_is_good(B: Branching, star) -> bool:
    """False when the three outer edges form an oriented circle."""
    T_new, slot_map, *_ = _stellar31(B.owner, star.center)
    return is_branching(T_new, _transport_orient(B, T_new, slot_map))


def stellar_13(B: Branching, t, choice=(1, 1, 1), corner=0, label=None) -> Branching:
    return step(B, Stellar13(t, tuple(choice), corner, label)).state


def stellar_31(B: Branching, star) -> Branching:
    center = star.center if hasattr(star, "center") else star
    return step(B, Stellar31(center)).state


# -- dispatch ------------------------------------------------------------------------

def step(state, m) -> StepResult:
    """Apply one move to a :class:`Triangulation` or :class:`Branching`."""
    branched = isinstance(state, Branching)
    T = state.owner if branched else state
    if isinstance(m, (NakedFlip, BFlip)):
        if branched:
            if isinstance(m, NakedFlip):
                raise MoveError("a branched state needs a BFlip with an explicit choice")
            B_new, inverse, slot_map = _bflip(state, m.edge, m.choice)
            return StepResult(B_new, inverse, slot_map)
        T_new, slot_map, (t1, i1) = _flip_surgery(T, m.edge)
        return StepResult(T_new, NakedFlip(T_new.slot_edge[t1][i1]), slot_map)
    if isinstance(m, InvertEdge):
        ident = {(t, i): ((t, i), {c: c for c in SLOT_ENDS[i]}) for t in range(T.F) for i in range(3)}
        if not branched:
            return StepResult(T, m, ident)
        from .branching import invert_edge

        return StepResult(invert_edge(state, m.edge), m, ident)
    if isinstance(m, BubblePlus):
        T_new, slot_map, M = _bubble_plus(T, m.edge, m.label)
        inverse = BubbleMinus(M)
        if not branched:
            return StepResult(T_new, inverse, slot_map)
        F = T.F
        hx, hy = m.choice
        # U = F has corners (X, Y, M): slot 1 is X-M, slot 0 is Y-M
        heads = {(F, 1): 2 if hx else 0, (F, 0): 2 if hy else 1}
        orient = _transport_orient(state, T_new, slot_map, heads)
        if not is_branching(T_new, orient):
            raise IllegalChoice(f"bubble choice {m.choice} creates an oriented cycle")
        return StepResult(Branching(T_new, orient, check=False), inverse, slot_map)
    if isinstance(m, BubbleMinus):
        T_new, slot_map, n, to_w = _bubble_minus(T, m.center)
        inverse = _bubble_plus_inverse(state if branched else None, T, T_new, n, to_w, slot_map, m.center)
        if not branched:
            return StepResult(T_new, inverse, slot_map)
        if not nutshell_is_good(state, n):
            raise BadNutshell(f"nutshell at {m.center} is bad: its boundary is an oriented circle")
        orient = _transport_orient(state, T_new, slot_map)
        return StepResult(Branching(T_new, orient), inverse, slot_map)
    if isinstance(m, Stellar13):
        if len(m.choice) != 3:
            raise IllegalChoice("a 1->3 move needs three spoke bits")
        T_new, slot_map, tri, N = _stellar13(T, m.triangle, m.corner, m.label)
        inverse = Stellar31(N)
        if not branched:
            return StepResult(T_new, inverse, slot_map)
        heads = {}
        for k in range(3):
            for mm in range(k + 1, 3):
                c = 3 - k - mm
                heads[(tri[k], mm)] = k if m.choice[c] else c
        orient = _transport_orient(state, T_new, slot_map, heads)
        if not is_branching(T_new, orient):
            raise IllegalChoice(f"1->3 choice {m.choice} creates an oriented cycle")
        return StepResult(Branching(T_new, orient, check=False), inverse, slot_map)
    if isinstance(m, Stellar31):
        T_new, slot_map, star, sides, nb = _stellar31(T, m.center)
        base = star.triangles[0]
        p = dict(zip(star.triangles, star.corners))[base]
        if branched:
            orient = _transport_orient(state, T_new, slot_map)
            if not is_branching(T_new, orient):
                raise BadStar(f"star at {m.center} is bad: its boundary is an oriented circle")
            choice = [0, 0, 0]
            q, r = SLOT_ENDS[p]
            choice[q] = int(state.slot_head(base, r) == p)
            choice[r] = int(state.slot_head(base, q) == p)
            u, cu, ku, wu = sides[r]
            choice[p] = int(state.slot_head(u, ku) == cu)
            inverse = Stellar13(nb, tuple(choice), p, m.center)
            return StepResult(Branching(T_new, orient, check=False), inverse, slot_map)
        return StepResult(T_new, Stellar13(nb, (1, 1, 1), p, m.center), slot_map)
    raise MoveError(f"unknown move {m!r}")


def _bubble_plus_inverse(B, T, T_new, n, to_w, slot_map, center):
    """The 0->2 move that re-creates nutshell ``n`` on the merged edge."""
    (U, W), (cu, cw) = n.triangles, n.corners
    a, ja, ba = T.glue[U][cu]
    ns, _ = slot_map[(a, ja)]
    e = T_new.slot_edge[ns[0]][ns[1]]
    prim = T_new.edges[e].a
    if prim == ns:
        x_u = corner_image(ja, cu, ba, SLOT_ENDS[ja][0])
    else:
        b, jb, bb = T.glue[W][cw]
        x_w = corner_image(jb, cw, bb, SLOT_ENDS[jb][0])
        # back to U through the internal gluings
        x_u = next(x for x in range(3) if x != cu and to_w(x) == x_w)
    y_u = 3 - cu - x_u
    if B is None:
        return BubblePlus(e, (1, 1), center)
    hx = int(B.slot_head(U, 3 - x_u - cu) == cu)
    hy = int(B.slot_head(U, 3 - y_u - cu) == cu)
    return BubblePlus(e, (hx, hy), center)


# -- logs -----------------------------------------------------------------------------

def apply(state, m):
    return step(state, m).state


def replay(initial, log) -> object:
    moves = log.moves if isinstance(log, MoveLog) else list(log)
    state = initial
    for k, m in enumerate(moves):
        try:
            state = step(state, m).state
        except Exception as exc:  # re-raised with the failing step attached
            raise ReplayError(k, exc) from exc
    return state


def inverse_log(initial, moves) -> list:
    """Moves undoing ``moves`` (applied to ``initial``), in application order."""
    state, inverses = initial, []
    for m in moves:
        r = step(state, m)
        inverses.append(r.inverse)
        state = r.state
    return inverses[::-1]


def state_key(state) -> str:
    if isinstance(state, Branching):
        return canonical_key(state.owner, True, state.orders).hex()
    return canonical_key(state, True).hex()
