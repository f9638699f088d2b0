"""Connecting branchings: inversion graphs, the paired delta-reduction
connector, complete transit through 1->3 moves, trapped-edge removal and a
bounded b-flip census.

Every algorithm returns a :class:`TransitReport` whose log is replayed before
it is handed back, so a report with ``success`` set is its own certificate.
"""
from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import networkx as nx

from .branching import (
    _ORDER,
    Branching,
    delta,
    enumerate_branchings,
    is_ambiguous,
    total_inversion,
)
from .complex_core import Triangulation, trapped_edges
from .errors import (
    BudgetExhausted,
    IterationGuardExceeded,
    NotConnected,
    NotOrientable,
    TrappedEdgesPresent,
)
from .moves import (
    BFlip,
    InvertEdge,
    MoveLog,
    Stellar13,
    _bflip,
    bflip_choices,
    inverse_log,
    replay,
    state_key,
    step,
)

TAGS = (
    "trapped removal",
    "ambiguous inversion",
    "(1)good flip",
    "(2)good flip",
    "terminal move",
    "star inversion",
    "final inversion",
    "bump 1->3",
    "inverse 3->1",
)
# milestones at which the delta trace must strictly drop
DECREASING = frozenset({"ambiguous inversion", "(1)good flip", "(2)good flip", "final inversion"})


@dataclass
class Step:
    move: object
    lemma_tag: str
    delta_size: int | None


@dataclass
class TransitReport:
    success: bool
    log: MoveLog
    steps: list = field(default_factory=list)
    endpoint_key: str | None = None
    symmetrized: bool = False
    delta_trace: list = field(default_factory=list)  # (tag, |delta|) per paired step
    reachable: int | None = None
    notes: list = field(default_factory=list)
    endpoint: object = None  # final state, not serialized

    def to_json(self):
        from .moves import move_to_json

        return {
            "success": self.success,
            "symmetrized": self.symmetrized,
            "initial_key": self.log.initial_key,
            "steps": [
                {"move": move_to_json(s.move), "lemma_tag": s.lemma_tag, "delta_size": s.delta_size}
                for s in self.steps
            ],
            "endpoint_key": self.endpoint_key,
            "notes": list(self.notes),
        }


def _workers():
    try:
        return max(1, int(os.environ.get("BRANCHFLIP_THREADS", "1")))
    except ValueError:
        return 1


def _certify(report: TransitReport, source, target):
    """Replay the log and check it lands on ``target``."""
    end = replay(source, report.log)
    report.endpoint = end
    report.endpoint_key = state_key(end)
    if end != target:
        raise AssertionError("transit log does not replay to its target")
    return report


# -- inversion graphs -------------------------------------------------------------

def _inversion_neighbours(B: Branching, untrapped_only=True):
    T = B.owner
    for e in range(T.E):
        if untrapped_only and T.edges[e].trapped:
            continue
        if is_ambiguous(B, e):
            o = list(B.orient)
            o[e] ^= 1
            yield e, tuple(o)


def inversion_graph(T: Triangulation, untrapped_only=True) -> nx.Graph:
    """Branchings of ``T`` joined when they differ by one ambiguous-edge inversion."""
    G = nx.Graph()
    branchings = enumerate_branchings(T)
    G.add_nodes_from(B.orient for B in branchings)
    for B in branchings:
        for e, o in _inversion_neighbours(B, untrapped_only):
            G.add_edge(B.orient, o, edge=e)
    return G


def components(T: Triangulation, symmetrized=False, untrapped_only=True, graph=None) -> list:
    """Connected components as sorted lists of orientation tuples.

    In symmetrized mode a branching and its total inversion count as one node.
    """
    G = graph if graph is not None else inversion_graph(T, untrapped_only)
    if symmetrized:
        G = G.copy()
        for o in list(G.nodes):
            G.add_edge(o, tuple(1 - x for x in o))
    parts = [sorted(c) for c in nx.connected_components(G)]
    return sorted(parts)


def _inversion_path(B: Branching, target_orient):
    """BFS over untrapped ambiguous inversions; (path of edges, reached count)."""
    T = B.owner
    start = B.orient
    parent = {start: None}
    queue = deque([start])
    while queue:
        o = queue.popleft()
        if o == target_orient:
            path = []
            while parent[o] is not None:
                prev, e = parent[o]
                path.append(e)
                o = prev
            return path[::-1], len(parent)
        cur = Branching(T, o, check=False)
        for e, nxt in _inversion_neighbours(cur):
            if nxt not in parent:
                parent[nxt] = (o, e)
                queue.append(nxt)
    return None, len(parent)


def connect_by_inversions(B: Branching, B2: Branching, allow_symmetrized=True, allow_trapped=False) -> TransitReport:
    """Shortest chain of untrapped ambiguous inversions from ``B`` to ``B2``.

    When no raw chain exists and ``allow_symmetrized`` is set, the search is
    retried towards the total inversion of ``B2``.  Triangulations with
    trapped edges are refused unless ``allow_trapped`` is set; trapped edges
    are then simply never inverted.
    """
    delta(B, B2)  # owner check
    T = B.owner
    if trapped_edges(T) and not allow_trapped:
        raise TrappedEdgesPresent(f"edges {sorted(trapped_edges(T))} are trapped")
    path, reached = _inversion_path(B, B2.orient)
    target, sym = B2, False
    if path is None and allow_symmetrized:
        target, sym = total_inversion(B2), True
        path, reached = _inversion_path(B, target.orient)
    if path is None:
        raise NotConnected(f"target not reachable by inversions; {reached} branchings reachable")
    report = TransitReport(True, MoveLog(state_key(B)), symmetrized=sym, reachable=reached)
    cur = B
    for e in path:
        m = InvertEdge(e)
        cur = step(cur, m).state
        d = len(delta(cur, target))
        report.log.moves.append(m)
        report.steps.append(Step(m, "ambiguous inversion", d))
        report.delta_trace.append(("ambiguous inversion", d))
    return _certify(report, B, target)


# -- trapped edges --------------------------------------------------------------

def _loop_attachment(T: Triangulation):
    """For the least trapped edge: the edge attaching its loop to the rest."""
    e = min(trapped_edges(T))
    t, i = T.edges[e].a
    j = T.edges[e].b[1]
    return T.slot_edge[t][3 - i - j]


def remove_trapped(B: Branching) -> TransitReport:
    """Flip the edge attaching each spine loop until no trapped edge is left."""
    report = TransitReport(True, MoveLog(state_key(B)))
    cur = B
    while trapped_edges(cur.owner):
        before = len(trapped_edges(cur.owner))
        f = _loop_attachment(cur.owner)
        m = BFlip(f, bflip_choices(cur, f)[0])
        cur = step(cur, m).state
        after = len(trapped_edges(cur.owner))
        if after >= before:
            raise AssertionError(f"flipping edge {f} did not reduce the trapped edges ({before} -> {after})")
        report.log.moves.append(m)
        report.steps.append(Step(m, "trapped removal", None))
    report.endpoint = replay(B, report.log)
    report.endpoint_key = state_key(report.endpoint)
    report.notes.append(f"endpoint has {cur.owner.F} triangles and no trapped edge")
    return report


# -- paired connector ---------------------------------------------------------------

def _ambiguous_in(B: Branching, t, e):
    """Reversing ``e`` keeps triangle ``t`` acyclic."""
    T = B.owner
    d = tuple(B.orient[T.slot_edge[t][i]] ^ (T.slot_edge[t][i] == e) ^ T.slot_twist[t][i] for i in range(3))
    return d in _ORDER


class _Pair:
    """Two branchings on one naked triangulation plus their move logs."""

    def __init__(self, L: Branching, R: Branching):
        self.L, self.R = L, R
        self.log_l, self.log_r = [], []
        self.tags_l, self.tags_r = [], []
        self.trace = []

    @property
    def T(self):
        return self.L.owner

    def delta(self):
        return delta(self.L, self.R)

    def invert(self, side, e, tag):
        m = InvertEdge(e)
        if side == "L":
            self.L = step(self.L, m).state
            self.log_l.append(m)
            self.tags_l.append((tag, len(self.delta())))
        else:
            self.R = step(self.R, m).state
            self.log_r.append(m)
            self.tags_r.append((tag, len(self.delta())))

    def flip(self, e, cl, cr, tag):
        self.L = _bflip(self.L, e, cl)[0]
        self.R = _bflip(self.R, e, cr)[0]
        d = len(self.delta())
        self.log_l.append(BFlip(e, cl))
        self.log_r.append(BFlip(e, cr))
        self.tags_l.append((tag, d))
        self.tags_r.append((tag, d))

    def record(self, tag):
        self.trace.append((tag, len(self.delta())))


def _flip_outcomes(L, R, e):
    """(new |delta|, cl, cr, creates_trapped) for every joint enhancement."""
    out = []
    T = L.owner
    if T.edges[e].trapped:
        return out
    for cl in bflip_choices(L, e):
        L2 = _bflip(L, e, cl)[0]
        trapped = bool(trapped_edges(L2.owner))
        for cr in bflip_choices(R, e):
            R2 = _bflip(R, e, cr)[0]
            out.append((len(delta(L2, R2)), cl, cr, trapped))
    return out


def classify_disoriented(L: Branching, R: Branching, e) -> str:
    """Case label of a disoriented edge: "(1)good", "(1)bad", "(2)good",
    "(2)bad", or "ambiguous" when ``e`` can simply be inverted on one side."""
    if e not in delta(L, R):
        raise ValueError(f"edge {e} is not disoriented")
    if is_ambiguous(L, e) or is_ambiguous(R, e):
        return "ambiguous"
    T = L.owner
    t1, t2 = T.edges[e].a[0], T.edges[e].b[0]
    d = delta(L, R)
    case1 = False
    for ta, tb in ((t1, t2), (t2, t1)):
        if not _ambiguous_in(L, ta, e) and not _ambiguous_in(R, ta, e):
            case1 = True
            k = sum(1 for x in T.slot_edge[tb] if x != e and x in d)
            if k == 2 and _ambiguous_in(L, tb, e):
                return "(1)bad"
    n = len(d)
    good = any(nd < n and not trapped for nd, _, _, trapped in _flip_outcomes(L, R, e))
    if case1:
        return "(1)good"
    return "(2)good" if good else "(2)bad"


def _progress(p: _Pair):
    """Apply one delta-decreasing move if available; returns its tag or None."""
    d = sorted(p.delta())
    for e in d:
        if p.T.edges[e].trapped:
            continue
        if is_ambiguous(p.L, e):
            p.invert("L", e, "ambiguous inversion")
            return "ambiguous inversion"
        if is_ambiguous(p.R, e):
            p.invert("R", e, "ambiguous inversion")
            return "ambiguous inversion"
    n = len(d)
    for e in d:
        kind = classify_disoriented(p.L, p.R, e)
        if kind not in ("(1)good", "(2)good"):
            continue
        best = min(
            ((nd, cl, cr) for nd, cl, cr, trapped in _flip_outcomes(p.L, p.R, e) if nd < n and not trapped),
            default=None,
        )
        if best is None:
            # the case analysis promised a decrease; treat the edge as bad
            continue
        tag = kind + " flip"
        p.flip(e, best[1], best[2], tag)
        return tag
    return None


def _has_progress(L, R):
    d = sorted(delta(L, R))
    T = L.owner
    for e in d:
        if not T.edges[e].trapped and (is_ambiguous(L, e) or is_ambiguous(R, e)):
            return True
    n = len(d)
    for e in d:
        if any(nd < n and not trapped for nd, _, _, trapped in _flip_outcomes(L, R, e)):
            return True
    return False


def _neutral_moves(L, R, with_flips):
    """Moves keeping |delta|: joint inversions, then joint flips."""
    T = L.owner
    d = delta(L, R)
    for f in range(T.E):
        if f in d or T.edges[f].trapped:
            continue
        if is_ambiguous(L, f) and is_ambiguous(R, f):
            yield ("inv", f), step(L, InvertEdge(f)).state, step(R, InvertEdge(f)).state
    if not with_flips:
        return
    n = len(d)
    for f in range(T.E):
        for nd, cl, cr, trapped in _flip_outcomes(L, R, f):
            if nd == n and not trapped:
                yield ("flip", f, cl, cr), _bflip(L, f, cl)[0], _bflip(R, f, cr)[0]


def _neutral_search(p: _Pair, budget):
    """BFS over delta-preserving joint moves to a state allowing progress."""
    for with_flips in (False, True):
        start = (p.L, p.R)
        parent = {(p.T, p.L.orient, p.R.orient): None}
        queue = deque([start])
        while queue and len(parent) < budget:
            L, R = queue.popleft()
            key = (L.owner, L.orient, R.orient)
            if _has_progress(L, R) and parent[key] is not None:
                path = []
                while parent[key] is not None:
                    prev, mv = parent[key]
                    path.append(mv)
                    key = prev
                return path[::-1]
            for mv, L2, R2 in _neutral_moves(L, R, with_flips):
                k2 = (L2.owner, L2.orient, R2.orient)
                if k2 not in parent:
                    parent[k2] = (key, mv)
                    queue.append((L2, R2))
    return None


def _dump(p: _Pair, B, B2, reason):
    return {
        "reason": reason,
        "source": {"gluing": B.owner.gluing_list(), "orient": list(B.orient)},
        "target_orient": list(B2.orient),
        "current_gluing": p.T.gluing_list(),
        "current_labels": [list(r) for r in p.T.labels],
        "left_orient": list(p.L.orient),
        "right_orient": list(p.R.orient),
        "delta": sorted(p.delta()),
        "trace": list(p.trace),
    }


def strategy_b_connect(B: Branching, B2: Branching, search_budget=20000) -> TransitReport:
    """Connect two branchings on one oriented naked triangulation.

    Both sides receive the same naked flips with their own enhancements,
    plus inversions; the two logs meet in the middle and the right-hand log
    is reversed onto the left.
    """
    delta(B, B2)
    if not B.owner.orientable:
        raise NotOrientable("the paired connector works on oriented surfaces")
    p = _Pair(B, B2)
    guard = 50 * B.owner.E * (len(p.delta()) + 1)
    iterations = 0

    def tick():
        nonlocal iterations
        iterations += 1
        if iterations > guard:
            raise IterationGuardExceeded(f"no delta = 0 after {guard} steps", _dump(p, B, B2, "guard"))

    p.record("start")
    # initial assumptions: no trapped edges
    while trapped_edges(p.T):
        before = len(trapped_edges(p.T))
        f = _loop_attachment(p.T)
        n = len(p.delta())
        options = sorted((nd, cl, cr) for nd, cl, cr, _ in _flip_outcomes(p.L, p.R, f))
        _, cl, cr = options[0]
        p.flip(f, cl, cr, "trapped removal")
        assert len(trapped_edges(p.T)) < before
        p.record("trapped removal")
        tick()
    while p.delta():
        tag = _progress(p)
        if tag is not None:
            p.record(tag)
            tick()
            continue
        path = _neutral_search(p, search_budget)
        if path is None:
            raise IterationGuardExceeded("no delta-preserving route to a progress move", _dump(p, B, B2, "search"))
        for mv in path:
            if mv[0] == "inv":
                p.invert("L", mv[1], "star inversion")
                p.invert("R", mv[1], "star inversion")
                p.record("star inversion")
            else:
                _, f, cl, cr = mv
                p.flip(f, cl, cr, "terminal move")
                p.record("terminal move")
            tick()
        tag = _progress(p)
        if tag == "ambiguous inversion":
            # relabel: this inversion closes a star search
            side_tags = p.tags_l if p.log_l and p.tags_l[-1][0] == tag else p.tags_r
            side_tags[-1] = ("final inversion", side_tags[-1][1])
            tag = "final inversion"
        p.record(tag)
        tick()
    assert p.L == p.R
    back = inverse_log(B2, p.log_r)
    report = TransitReport(True, MoveLog(state_key(B), p.log_l + back), delta_trace=p.trace)
    for m, (tag, d) in zip(p.log_l, p.tags_l):
        report.steps.append(Step(m, tag, d))
    for m, (tag, d) in zip(back, reversed(p.tags_r)):
        report.steps.append(Step(m, tag + " (target side)", d))
    return _certify(report, B, B2)


# -- complete transit -------------------------------------------------------------

def complete_transit(B: Branching, B2: Branching) -> TransitReport:
    """Refine every triangle with an inward 1->3 move, invert the disoriented
    edges (now ambiguous everywhere), and undo the refinement on the target
    side."""
    d = delta(B, B2)
    report = TransitReport(True, MoveLog(state_key(B)))
    if not d:
        report.endpoint_key = state_key(B)
        return report
    T = B.owner
    F = T.F
    moves = [Stellar13(t, (1, 1, 1), 0) for t in range(F)]
    pos = {e.id: e.a for e in T.edges}
    L, R = B, B2
    for m in moves:
        rl = step(L, m)
        L, R = rl.state, step(R, m).state
        pos = {e: rl.slot_map[s][0] for e, s in pos.items()}
        report.log.moves.append(m)
        report.steps.append(Step(m, "bump 1->3", len(delta(L, R))))
    assert L.owner.V == T.V + F
    for e in sorted(d):
        t, i = pos[e]
        f = L.owner.slot_edge[t][i]
        if L.owner.edges[f].trapped or not is_ambiguous(L, f) or not is_ambiguous(R, f):
            raise AssertionError(f"edge {e} is not untrapped and ambiguous after refinement")
        m = InvertEdge(f)
        L = step(L, m).state
        report.log.moves.append(m)
        report.steps.append(Step(m, "ambiguous inversion", len(delta(L, R))))
    assert L == R
    for m in inverse_log(B2, moves):
        report.log.moves.append(m)
        report.steps.append(Step(m, "inverse 3->1", 0))
    _certify(report, B, B2)
    return report


# -- census ---------------------------------------------------------------------

@dataclass
class Census:
    explored: int
    components: list  # lists of seed indices
    seed_keys: list
    edges: list = field(default_factory=list)  # (key, key) pairs when kept
    frontier_sizes: list = field(default_factory=list)

    def connected(self, i, j):
        return any(i in c and j in c for c in self.components)


def _bflip_neighbours(B: Branching):
    T = B.owner
    out = []
    for e in range(T.E):
        if T.edges[e].trapped:
            continue
        for c in bflip_choices(B, e):
            out.append(_bflip(B, e, c)[0])
    return out


def bounded_bflip_census(seeds, node_budget, triangle_budget=None, keep_graph=False, workers=None) -> Census:
    """Breadth-first search over b-flip classes (fixed vertex labels) from
    ``seeds``; reports which seeds share a component.

    b-flips keep the triangle count, so ``triangle_budget`` only screens the
    seeds.  Frontiers are expanded in parallel but merged in order, so the
    result does not depend on the worker count.
    """
    seeds = list(seeds)
    if node_budget <= 0:
        raise BudgetExhausted("node budget is zero", {"explored": 0, "frontier": len(seeds)})
    if triangle_budget is not None:
        for s in seeds:
            if s.owner.F > triangle_budget:
                raise BudgetExhausted("seed exceeds the triangle budget", {"triangles": s.owner.F})
    workers = workers or _workers()
    keys = [state_key(s) for s in seeds]
    comp_of = {}
    explored = 0
    edges = []
    sizes = []
    for i, s in enumerate(seeds):
        if keys[i] in comp_of:
            continue
        cid = i
        comp_of[keys[i]] = cid
        explored += 1
        frontier = [s]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while frontier:
                sizes.append(len(frontier))
                nxt = []
                for B, neigh in zip(frontier, pool.map(_bflip_neighbours, frontier)):
                    kb = state_key(B) if keep_graph else None
                    for N in neigh:
                        k = state_key(N)
                        if keep_graph and kb < k:
                            edges.append((kb, k))
                        if k in comp_of:
                            continue
                        comp_of[k] = cid
                        explored += 1
                        if explored > node_budget:
                            raise BudgetExhausted(
                                f"node budget {node_budget} exhausted",
                                {"explored": explored, "frontier": len(frontier), "levels": len(sizes)},
                            )
                        nxt.append(N)
                frontier = nxt
    # seeds reached from earlier seeds join those components
    merged = {}
    for i, k in enumerate(keys):
        merged.setdefault(comp_of[k], set()).add(i)
    comps = sorted(sorted(c) for c in merged.values())
    return Census(explored, comps, keys, sorted(set(edges)), sizes)
