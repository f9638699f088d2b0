from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from branchflip.branching import d_b, enumerate_branchings
from branchflip.builders import distinguished_branched, klein_bigons, sphere3, torus1
from branchflip.errors import NotACycle
from branchflip.moves import bflip_choices
from branchflip.spine_dual import (
    Cone,
    cycle_dimension,
    cycle_space_basis,
    dual_spine,
    fm_feasible,
    in_cone,
    positive_cycle_exists,
    rank,
    transport_cycle,
    vertex_link,
    bicolor_link,
)

from conftest import corpus, random_corpus
import oracles

ALL = corpus()
STATES = [b.branching for _, b in ALL] + [b.branching for _, b in random_corpus(12)]


def _sample(T, k=8):
    bs = enumerate_branchings(T)
    return bs if len(bs) <= k else random.Random(T.F).sample(bs, k)


def test_track_shape():
    for B in STATES:
        T = B.owner
        tr = dual_spine(B)
        assert tr.n_switches == T.F and tr.n_branches == T.E
        for t, (large, s1, s2) in enumerate(tr.switches):
            assert large == T.slot_edge[t][B.orders[t][1]]
            assert sorted((large, s1, s2)) == sorted(T.slot_edge[t])
        # a branch meets exactly two switch ends
        ends = [x for sw in tr.switches for x in sw]
        assert all(ends.count(e) == 2 for e in range(T.E))
        assert tr.loops == frozenset(e.id for e in T.edges if e.trapped)
        assert (tr.oriented is not None) == T.orientable


def test_theta_graph():
    tr = dual_spine(sphere3().branching)
    assert (tr.n_switches, tr.n_branches, tr.loops) == (2, 3, frozenset())


def test_dimension_matches_numpy_oracle():
    for B in STATES:
        T = B.owner
        for b in _sample(T):
            tr = dual_spine(b)
            assert cycle_dimension(tr) == oracles.cycle_dimension(T, b.orders)


def test_dimension_formula():
    for B in STATES:
        T = B.owner
        for b in _sample(T):
            dim = cycle_dimension(dual_spine(b))
            if T.orientable:
                assert dim == 1 - T.euler + T.V
            else:
                # no transverse orientation: the switch equations are independent
                assert dim == T.V - T.euler == T.E - T.F


def test_small_dimensions():
    assert {cycle_dimension(dual_spine(b)) for b in enumerate_branchings(torus1().triangulation)} == {2}
    assert {cycle_dimension(dual_spine(b)) for b in enumerate_branchings(sphere3().triangulation)} == {2}


def test_basis_vectors_are_cycles_and_independent():
    for B in STATES[:10]:
        tr = dual_spine(B)
        basis = cycle_space_basis(tr)
        assert all(tr.is_cycle(v) for v in basis)
        assert rank(basis, tr.n_branches) == len(basis)


def test_positivity_agrees_with_lp():
    for B in STATES:
        for b in _sample(B.owner, 4):
            tr = dual_spine(b)
            p = positive_cycle_exists(tr)
            assert p.exists == oracles.positive_cycle_lp(b.owner, b.orders)
            if p.exists:
                assert tr.is_cycle(p.witness) and min(p.witness) >= 1
                assert in_cone(tr, p.witness) is Cone.INTERIOR
                assert in_cone(tr, [3 * x for x in p.witness]) is Cone.INTERIOR


def test_loop_branch_forces_zero_small_weight():
    from branchflip.builders import random_instance

    T = random_instance(0, "P2", 2, 30, avoid_trapped=False).triangulation
    hit = 0
    for B in enumerate_branchings(T):
        tr = dual_spine(B)
        for large, s1, s2 in tr.switches:
            if large in (s1, s2):
                # z(e) = z(e) + z(e') forces z(e') = 0
                other = s2 if large == s1 else s1
                assert all(v[other] == 0 for v in cycle_space_basis(tr))
                assert not positive_cycle_exists(tr).exists
                hit += 1
    assert hit


def test_small_loops_do_not_block_positivity():
    tr = dual_spine(klein_bigons().branching)
    assert tr.loops and positive_cycle_exists(tr).exists


def test_in_cone():
    tr = dual_spine(torus1().branching)
    assert in_cone(tr, [0] * tr.n_branches) is Cone.BOUNDARY
    basis = cycle_space_basis(tr)
    mixed = [v for v in basis if min(v) < 0 < max(v)]
    for v in mixed:
        assert in_cone(tr, v) is Cone.OUTSIDE
    with pytest.raises(NotACycle):
        in_cone(tr, [1] + [0] * (tr.n_branches - 1))


def test_fm_small_systems():
    F = Fraction
    assert fm_feasible([((F(1), F(0)), F(1)), ((F(-1), F(0)), F(-2))], 2) is not None
    assert fm_feasible([((F(1),), F(3)), ((F(-1),), F(-2))], 1) is None


def _flips(B):
    T = B.owner
    for e in range(T.E):
        if not T.edges[e].trapped:
            for c in bflip_choices(B, e):
                yield e, c


@pytest.mark.parametrize("B", STATES, ids=range(len(STATES)))
def test_transport_round_trip_on_a_basis(B):
    from branchflip.moves import BFlip, step

    tr = dual_spine(B)
    basis = cycle_space_basis(tr)
    for e, c in _flips(B):
        r = step(B, BFlip(e, c))
        inv = r.inverse
        moved = []
        for z in basis:
            w, B2 = transport_cycle(B, e, c, z)
            assert dual_spine(B2).is_cycle(w)
            for old in B.owner.edges:
                if old.id != e:
                    (nt, ns), _ = r.slot_map[old.a]
                    assert w[B2.owner.slot_edge[nt][ns]] == z[old.id]
            back, B3 = transport_cycle(B2, inv.edge, inv.choice, w)
            assert B3 == B and back == list(z)
            moved.append(w)
        assert rank(moved, B.owner.E) == len(basis)


def test_transport_is_linear():
    B = distinguished_branched("T2", 2).branching
    basis = cycle_space_basis(dual_spine(B))
    e, c = next(_flips(B))
    a, b = basis[0], basis[-1]
    combo = [2 * x - y for x, y in zip(a, b)]
    wa, _ = transport_cycle(B, e, c, a)
    wb, _ = transport_cycle(B, e, c, b)
    wc, _ = transport_cycle(B, e, c, combo)
    assert wc == [2 * x - y for x, y in zip(wa, wb)]


@pytest.mark.parametrize("B", STATES, ids=range(len(STATES)))
def test_link_counts_and_bicoloring(B):
    T = B.owner
    for v in T.vertices:
        link = vertex_link(B, v)
        assert sorted((lc.triangle, lc.corner) for lc in link) == sorted(T.corners_at[v])
        ones = sum(lc.one_labelled for lc in link)
        assert ones == 2 * d_b(B, v)
        arcs = bicolor_link(B, v)
        assert len(arcs) == ones
        if arcs:
            colors = [c for c, _ in arcs]
            assert all(colors[k] != colors[(k + 1) % len(colors)] for k in range(len(colors)))
            assert sum(len(span) for _, span in arcs) == len(link)


def test_one_labelled_corners_switch_edge_direction():
    # at a 1-labelled corner one side enters v and the other leaves it; at the
    # other corners both sides point the same way, so walking around v the
    # in/out status flips exactly at the 1-labelled corners
    for B in STATES:
        for v in B.owner.vertices:
            for lc in vertex_link(B, v):
                into = [B.slot_head(lc.triangle, s) == lc.corner for s in range(3) if s != lc.corner]
                assert (into[0] != into[1]) == lc.one_labelled


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(STATES), st.integers(1, 5))
def test_witness_scaling(B, k):
    tr = dual_spine(B)
    p = positive_cycle_exists(tr)
    if p.exists:
        assert in_cone(tr, [k * x for x in p.witness]) is Cone.INTERIOR
