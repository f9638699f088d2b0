import pytest
from hypothesis import given, settings, strategies as st

from branchflip.branching import (
    Branching,
    boundary_of_s_plus,
    d_vector,
    delta,
    enumerate_branchings,
    invert_edge,
    is_ambiguous,
    triangle_signs,
)
from branchflip.builders import distinguished_branched, klein_bigons, sphere3, torus1
from branchflip.complex_core import find_nutshells, find_triangular_stars
from branchflip.errors import BadNutshell, BadStar, IllegalChoice, ReplayError, TrappedEdge
from branchflip.moves import (
    BFlip,
    BubbleMinus,
    BubblePlus,
    FlipClass,
    InvertEdge,
    MoveLog,
    NakedFlip,
    Stellar13,
    Stellar31,
    bflip_choices,
    classify_bflip,
    flip_naked,
    inverse_log,
    move_from_json,
    move_to_json,
    replay,
    state_key,
    step,
    transport_orientation,
    two_flip_inversion,
)

from conftest import corpus, random_corpus
from oracles import is_branching as oracle_is_branching

ALL = corpus()
STATES = [b.branching for _, b in ALL] + [b.branching for _, b in random_corpus(10)]


def _moves_for(B):
    """A sample of every legal move kind on ``B``."""
    T = B.owner
    out = []
    for e in range(T.E):
        if not T.edges[e].trapped:
            out += [BFlip(e, c) for c in bflip_choices(B, e)]
        if is_ambiguous(B, e):
            out.append(InvertEdge(e))
    for e in range(min(T.E, 3)):
        for ch in ((0, 0), (0, 1), (1, 0), (1, 1)):
            out.append(BubblePlus(e, ch))
    for t in range(min(T.F, 2)):
        for corner in range(3):
            out.append(Stellar13(t, (1, 1, 1), corner))
            out.append(Stellar13(t, (0, 0, 0), corner))
    return out


@pytest.mark.parametrize("B", STATES, ids=range(len(STATES)))
def test_every_move_has_an_exact_inverse(B):
    for m in _moves_for(B):
        try:
            r = step(B, m)
        except IllegalChoice:
            continue
        assert oracle_is_branching(r.state.owner, r.state.orient)
        back = step(r.state, r.inverse).state
        assert back == B, m


@pytest.mark.parametrize("B", STATES, ids=range(len(STATES)))
def test_naked_flip_is_an_involution(B):
    T = B.owner
    for e in range(T.E):
        if T.edges[e].trapped:
            with pytest.raises(TrappedEdge):
                flip_naked(T, e)
            continue
        r = step(T, NakedFlip(e))
        assert step(r.state, r.inverse).state == T


def test_every_flip_admits_an_enhancement():
    for B in STATES:
        for e in range(B.owner.E):
            if not B.owner.edges[e].trapped:
                assert bflip_choices(B, e)


def test_illegal_choice_rejected():
    for B in STATES:
        for e in range(B.owner.E):
            if B.owner.edges[e].trapped:
                continue
            ch = bflip_choices(B, e)
            if len(ch) == 1:
                with pytest.raises(IllegalChoice):
                    step(B, BFlip(e, 1 - ch[0]))
                return
    pytest.fail("no forced flip in the corpus")


@pytest.mark.parametrize("B", STATES, ids=range(len(STATES)))
def test_two_flip_inversion(B):
    T = B.owner
    for e in range(T.E):
        if T.edges[e].trapped or not is_ambiguous(B, e):
            continue
        moves = two_flip_inversion(B, e)
        assert len(moves) == 2 and all(isinstance(m, BFlip) for m in moves)
        assert replay(B, moves) == invert_edge(B, e)


def _fold_fixes_corner(T, e):
    """True when the two sides of the trapped edge are glued fixing their common corner."""
    ends = ((1, 2), (0, 2), (0, 1))
    (t, i), (_, j) = T.edges[e].a, T.edges[e].b
    bit = T.glue[t][i][2]
    k = 3 - i - j
    m = dict(zip(ends[i], ends[j] if bit == 0 else ends[j][::-1]))
    return m[k] == k


def _trapped_samples():
    from branchflip.builders import random_instance

    out = []
    for seed in range(60):
        for s, n in (("S2", 3), ("T2", 1), ("T2", 2), ("K", 1), ("P2", 2)):
            T = random_instance(seed, s, n, 30, avoid_trapped=False).triangulation
            if any(e.trapped for e in T.edges):
                out.append(T)
    return out + [klein_bigons().triangulation]


def _trapped_samples_branched():
    from branchflip.builders import random_instance

    out = [klein_bigons().branching, distinguished_branched("N3", 1).branching,
           distinguished_branched("N5", 1).branching]
    for seed in range(30):
        b = random_instance(seed, "T2", 2, 30, avoid_trapped=False)
        if any(e.trapped for e in b.triangulation.edges):
            out.append(b.branching)
    return out


def test_trapped_edge_ambiguity_dichotomy():
    # fold-type trapped edges are ambiguous in every branching, Moebius-type in none
    seen = set()
    for T in _trapped_samples():
        bs = enumerate_branchings(T)
        for e in range(T.E):
            if not T.edges[e].trapped:
                continue
            fold = _fold_fixes_corner(T, e)
            assert all(is_ambiguous(B, e) == fold for B in bs)
            if T.orientable:
                assert fold
            seen.add((T.orientable, fold))
            if fold:
                with pytest.raises(TrappedEdge):
                    two_flip_inversion(bs[0], e)
    assert seen == {(True, True), (False, True), (False, False)}


def _flip_data(B, e, c):
    r = step(B, BFlip(e, c))
    return r.state, r.slot_map, r.inverse


@pytest.mark.parametrize("B", STATES, ids=range(len(STATES)))
def test_sliding_flips_preserve_d_vector(B):
    T = B.owner
    for e in range(T.E):
        if T.edges[e].trapped:
            continue
        for c in bflip_choices(B, e):
            if classify_bflip(B, e, c).sliding:
                assert d_vector(step(B, BFlip(e, c)).state) == d_vector(B)


def test_some_bump_flip_changes_d_vector():
    changed = 0
    for B in STATES:
        T = B.owner
        for e in range(T.E):
            if T.edges[e].trapped:
                continue
            for c in bflip_choices(B, e):
                if classify_bflip(B, e, c) is FlipClass.BUMP:
                    changed += d_vector(step(B, BFlip(e, c)).state) != d_vector(B)
    assert changed > 0


def test_non_ambiguous_flips_preserve_sign_regions():
    checked = 0
    for B in STATES:
        if B.owner.orientable:
            checked += _check_sign_regions(B)
    assert checked > 0


def _check_sign_regions(B):
    T = B.owner
    o = T.orientation
    signs = triangle_signs(B, o)
    checked = 0
    for e in range(T.E):
        if T.edges[e].trapped:
            continue
        for c in bflip_choices(B, e):
            if classify_bflip(B, e, c) is not FlipClass.NON_AMBIGUOUS:
                continue
            B2, slot_map, inv = _flip_data(B, e, c)
            o2 = transport_orientation(T, o, B2.owner, slot_map)
            s2 = triangle_signs(B2, o2)
            t1, t2 = T.edges[e].a[0], T.edges[e].b[0]
            # the quadrilateral lies inside one sign region before and after
            assert signs[t1] == signs[t2] == s2[t1] == s2[t2]
            assert s2 == signs
            d1, d2 = boundary_of_s_plus(B, o), boundary_of_s_plus(B2, o2)
            mapped = {}
            for old, coef in d1.items():
                nt, ns = slot_map[T.edges[old].a][0]
                mapped[B2.owner.slot_edge[nt][ns]] = coef
            assert d1.get(e, 0) == 0 and d2.get(inv.edge, 0) == 0
            assert {k: v for k, v in mapped.items() if v} == {k: v for k, v in d2.items() if v}
            checked += 1
    return checked


def test_move_json_round_trip():
    ms = [NakedFlip(1), BFlip(2, 1), InvertEdge(0), BubblePlus(3, (0, 1), 7), BubbleMinus(5),
          Stellar13(1, (1, 0, 1), 2, 9), Stellar31(4)]
    for m in ms:
        assert move_from_json(move_to_json(m)) == m
    log = MoveLog("ab", ms)
    assert MoveLog.from_json(log.to_json()) == log


def test_replay_reports_failing_step():
    B = sphere3().branching
    with pytest.raises(ReplayError) as exc:
        replay(B, [InvertEdge(0), BFlip(99, 0)])
    assert exc.value.step == 1


def test_inverse_log_undoes_a_walk():
    B = distinguished_branched("T2", 2).branching
    moves = [Stellar13(0), BFlip(1, bflip_choices(B, 1)[0])]
    cur = replay(B, moves[:1])
    moves[1] = BFlip(1, bflip_choices(cur, 1)[0])
    end = replay(B, moves)
    assert replay(end, inverse_log(B, moves)) == B


def test_state_key_depends_on_branching():
    bs = enumerate_branchings(sphere3().triangulation)
    assert len({state_key(B) for B in bs}) == len(bs)


# -- nutshells and stars: full local census ----------------------------------------

def _bubbled():
    out = []
    for B in (sphere3().branching, torus1().branching, distinguished_branched("S2", 4).branching):
        r = step(B, BubblePlus(0, (1, 1)))
        out.append(r.state.owner)
    return out


def _starred():
    out = []
    for B in (sphere3().branching, torus1().branching, distinguished_branched("K", 1).branching):
        out.append(step(B, Stellar13(0)).state.owner)
    out.append(distinguished_branched("S2", 4).triangulation)
    return out


def _is_pit_or_source(B, v):
    T = B.owner
    ends = []
    for e in T.edges:
        a, b = T.edge_endpoints(e.id)
        if v in (a, b) and a != b:
            ends.append(B.head_label(e.id) == v)
    return all(ends) or not any(ends)


def _boundary_is_oriented_circle(B, tris, corners):
    T = B.owner
    heads = []
    for t, c in zip(tris, corners):
        # the side opposite the center
        h = B.slot_head(t, c)
        lo, hi = [x for x in range(3) if x != c]
        heads.append((T.labels[t][lo], T.labels[t][hi], T.labels[t][h]))
    outs = {}
    for a, b, h in heads:
        tail = a if h == b else b
        outs[tail] = outs.get(tail, 0) + 1
    return all(v == 1 for v in outs.values()) and len(outs) == len(heads)


def test_nutshell_census():
    from branchflip.moves import nutshell_is_good

    seen_bad = seen_good = 0
    for T in _bubbled():
        for n in find_nutshells(T):
            by_boundary = {}
            for B in enumerate_branchings(T):
                good = nutshell_is_good(B, n)
                if good:
                    seen_good += 1
                    step(B, BubbleMinus(n.center))
                    key = tuple(B.orient[e] for e in range(T.E) if n.center not in T.edge_endpoints(e))
                    by_boundary.setdefault(key, []).append(B)
                else:
                    seen_bad += 1
                    assert _is_pit_or_source(B, n.center)
                    with pytest.raises(BadNutshell):
                        step(B, BubbleMinus(n.center))
            internal = [e for e in range(T.E) if n.center in T.edge_endpoints(e)]
            for group in by_boundary.values():
                for B in group:
                    for B2 in group:
                        assert delta(B, B2) <= set(internal)
                        assert _inversion_distance(B, B2, internal) <= 2
    assert seen_bad and seen_good


def _inversion_distance(B, B2, allowed):
    from collections import deque

    T = B.owner
    dist = {B.orient: 0}
    q = deque([B])
    while q:
        cur = q.popleft()
        if cur.orient == B2.orient:
            return dist[cur.orient]
        for e in allowed:
            if not T.edges[e].trapped and is_ambiguous(cur, e):
                nxt = invert_edge(cur, e)
                if nxt.orient not in dist:
                    dist[nxt.orient] = dist[cur.orient] + 1
                    q.append(nxt)
    return float("inf")


def test_star_census():
    from branchflip.moves import star_is_good

    seen_bad = seen_good = 0
    for T in _starred():
        for s in find_triangular_stars(T):
            internal = [e for e in range(T.E) if s.center in T.edge_endpoints(e)]
            by_boundary = {}
            for B in enumerate_branchings(T):
                if star_is_good(B, s):
                    seen_good += 1
                    back = step(B, Stellar31(s.center))
                    assert state_key(step(back.state, back.inverse).state) == state_key(B)
                    key = tuple(B.orient[e] for e in range(T.E) if e not in internal)
                    by_boundary.setdefault(key, []).append(B)
                else:
                    seen_bad += 1
                    assert _is_pit_or_source(B, s.center)
                    with pytest.raises(BadStar):
                        step(B, Stellar31(s.center))
            for group in by_boundary.values():
                for B2 in group:
                    assert _inversion_distance(group[0], B2, internal) < float("inf")
    assert seen_bad and seen_good


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(STATES), st.data())
def test_random_walks_replay(B, data):
    moves = []
    cur = B
    for _ in range(data.draw(st.integers(0, 8))):
        T = cur.owner
        edges = [e for e in range(T.E) if not T.edges[e].trapped]
        e = data.draw(st.sampled_from(edges))
        c = data.draw(st.sampled_from(bflip_choices(cur, e)))
        m = BFlip(e, c)
        cur = step(cur, m).state
        moves.append(m)
    assert replay(B, moves) == cur
    assert replay(cur, inverse_log(B, moves)) == B
    assert cur.owner.euler == B.owner.euler and cur.owner.V == B.owner.V
