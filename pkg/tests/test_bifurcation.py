import pytest

from polysep.bifurcation import (
    AdmissiblePath,
    HChain,
    admissible_paths,
    apply_event,
    build_hgraph,
    can_form,
    decompose_rank_k,
    enumerate_rank1,
    feasibility,
    validate_union,
)
from polysep.diskmodel import Equilibrium, decompose
from polysep.polynomial import CENTER, MULTIPLE, SINK, SOURCE
from polysep.tracing import SeparatrixGraph


def edge(hg, src, dst, sign=None):
    for e in hg.edges:
        if e.src == src and e.dst == dst and (sign is None or e.sign == sign):
            return e
    raise AssertionError(f"no edge {src} -> {dst}")


# ---------------------------------------------------------------------------
# H-graph structure
# ---------------------------------------------------------------------------

def test_hgraph_edges_seven(model_hgraph_seven):
    hg = build_hgraph(model_hgraph_seven)
    # the sepal chain s_{5,6}, s_{7,0}, s_{1,2} runs one way only
    assert hg.has_edge((5, 6), (1, 2))
    assert hg.has_edge((5, 6), (7, 0))
    assert hg.has_edge((7, 0), (1, 2))
    assert not hg.has_edge((1, 2), (5, 6))
    # the four-homoclinic cylinder allows wrap-around in both directions
    assert hg.has_edge((7, 0), (17, 12))
    assert hg.has_edge((17, 12), (7, 0))
    # the small two-homoclinic cylinder too
    assert hg.has_edge((17, 12), (13, 16))
    assert hg.has_edge((13, 16), (17, 12))


def test_hgraph_trivial(model_d2_two_centers):
    hg = build_hgraph(model_d2_two_centers)
    assert len(hg.vertices) == 1 and hg.edges == ()


def test_hchain_of_length_two(model_one_strip_three_cylinders):
    # {s_{7,6}, s_{5,4}} is an H-chain of length 2 on the strip's upper run
    chain = can_form(model_one_strip_three_cylinders, (7, 6), (5, 4))
    assert chain is not None and chain.members == ((7, 6), (5, 4))
    assert chain.itinerary == (-1,)
    hg = build_hgraph(model_one_strip_three_cylinders)
    assert hg.has_edge((7, 6), (5, 4))


def test_can_form_simultaneous(model_simultaneous):
    chain = can_form(model_simultaneous, (5, 4), (13, 12))
    assert chain is not None
    assert chain.members == ((5, 4), (3, 8), (9, 0), (13, 12))
    assert chain.itinerary == (-1, 1, -1)


def test_can_form_same_returns_none(model_simultaneous):
    assert can_form(model_simultaneous, (5, 4), (5, 4)) is None


def test_can_form_disconnected(model_d2_two_centers):
    # degree 4, two pocket homoclinics on opposite sides of a double point
    graph = SeparatrixGraph(4, ((1, 2, 1.0), (5, 4, 1.0)), {0: 0, 3: 0})
    m = decompose(graph)
    assert can_form(m, (1, 2), (5, 4)) is None


# ---------------------------------------------------------------------------
# feasibility systems
# ---------------------------------------------------------------------------

def test_feasibility_long_itinerary():
    # itinerary +,+,+,-,-,+ over a 7-chain: partial sums 1..3 negative,
    # 4..5 positive, 6 negative, total zero
    members = ((1, 4), (5, 8), (9, 12), (13, 20), (19, 16), (15, 24), (25, 26))
    chain = HChain(15, members)
    assert chain.itinerary == (1, 1, 1, -1, -1, 1)
    [(system, witness)] = feasibility(chain)
    assert system.rel == ("<", "<", "<", ">", ">", "<", "=")
    for i, row in enumerate(system.lhs[:-1]):
        assert row == tuple(1.0 if t <= i else 0.0 for t in range(7))
    assert system.check(witness, margin=1e-12)


def test_feasibility_single():
    chain = HChain(3, ((1, 0),))
    cases = feasibility(chain)
    assert len(cases) == 2
    rels = sorted(sys_.rel[0] for sys_, _ in cases)
    assert rels == ["<", ">"]


def test_feasibility_pair():
    chain = HChain(4, ((1, 4), (5, 0)))
    assert chain.itinerary == (1,)
    [(system, witness)] = feasibility(chain)
    assert system.rel == ("<", "=")
    assert witness[0] < 0 < witness[1] and witness[0] + witness[1] == 0


# ---------------------------------------------------------------------------
# rank-1 enumeration
# ---------------------------------------------------------------------------

def test_break_one_two_events(model_break_one):
    m = model_break_one
    events = enumerate_rank1(m)
    assert len(events) == 2
    assert all(ev.broken == ((1, 0),) and ev.formed == () for ev in events)
    assert sorted(ev.sign for ev in events) == [-1, 1]
    center_idx = next(i for i, e in enumerate(m.equilibria) if e.kind == CENTER)
    for ev in events:
        if ev.sign > 0:
            # H+: s_0 lands at the zone above (the cylinder -> center becomes
            # a source), s_1 at the strip's omega (the sink)
            assert ev.landing_j == center_idx and ev.landing_k == 1
        else:
            assert ev.landing_j == 0 and ev.landing_k == center_idx


def test_pair_forms_new_homoclinic(model_double_point_two_centers):
    m = model_double_point_two_centers
    events = enumerate_rank1(m)
    joins = [ev for ev in events if ev.formed]
    assert len(joins) == 1
    ev = joins[0]
    assert ev.broken == ((1, 0), (5, 4)) and ev.formed == ((1, 4),)
    assert ev.sign == 1  # the upper-run step forces Im(tau_1) > 0
    centers = m.cylinder_centers()
    # s_0 lands at the first cylinder's center, s_5 at the second's
    assert ev.landing_j == centers[((1, 0),)]
    assert ev.landing_k == centers[((5, 4),)]
    assert all(e.rank == 1 for e in events)


def test_three_break_two_form(model_chain_break_three):
    events = enumerate_rank1(model_chain_break_three)
    match = [
        ev for ev in events
        if set(ev.broken) == {(1, 2), (7, 12), (9, 8)} and set(ev.formed) == {(1, 12), (7, 8)}
    ]
    assert len(match) == 1
    ev = match[0]
    assert ev.sign == -1
    centers = model_chain_break_three.cylinder_centers()
    assert ev.landing_j == centers[((1, 2),)]
    assert ev.landing_k == centers[((9, 8),)]


def test_enumeration_includes_all_single_edges(model_hgraph_seven):
    hg = build_hgraph(model_hgraph_seven)
    events = enumerate_rank1(model_hgraph_seven, hg)
    formed_pairs = {ev.formed[0] for ev in events if len(ev.broken) == 2}
    for e in hg.edges:
        assert (e.src[0], e.dst[1]) in formed_pairs
    assert all(ev.rank == 1 for ev in events)


def test_formed_satisfy_can_form(model_chain_break_three):
    m = model_chain_break_three
    for ev in enumerate_rank1(m):
        for i, f in enumerate(ev.formed):
            chain = can_form(m, ev.broken[i], ev.broken[i + 1])
            assert chain is not None


# ---------------------------------------------------------------------------
# apply_event
# ---------------------------------------------------------------------------

def test_apply_break_one(model_break_one):
    m = model_break_one
    center_idx = next(i for i, e in enumerate(m.equilibria) if e.kind == CENTER)
    for ev in enumerate_rank1(m):
        out = apply_event(m, ev)
        assert out.counts.h == 0 and out.counts.s == 2
        assert out.dim == m.dim + 1
        if ev.sign < 0:
            # the former center becomes a sink receiving s_1
            assert out.landing[1] == center_idx
            assert out.equilibria[center_idx].kind == SINK
            assert out.landing[0] == 0
        else:
            assert out.landing[0] == center_idx
            assert out.equilibria[center_idx].kind == SOURCE
            assert out.landing[1] == 1


def test_apply_pair_join(model_double_point_two_centers):
    m = model_double_point_two_centers
    ev = next(e for e in enumerate_rank1(m) if e.formed)
    out = apply_event(m, ev)
    assert set(out.homoclinics) == {(1, 4)}
    assert out.counts.h == 1 and out.counts.mstar == 1 and out.counts.N == 3
    # s_0 lands backward at a former center (now source), s_5 forward (sink)
    assert out.equilibria[out.landing[0]].kind == SOURCE
    assert out.equilibria[out.landing[5]].kind == SINK


def test_apply_preserves_center_of_cut_cylinder(model_chain_break_three):
    m = model_chain_break_three
    centers = m.cylinder_centers()
    wheel_center = centers[((7, 12), (11, 10), (9, 8))]
    ev = next(
        e for e in enumerate_rank1(m)
        if set(e.broken) == {(1, 2), (7, 12), (9, 8)}
    )
    out = apply_event(m, ev)
    assert set(out.homoclinics) == {(3, 4), (5, 6), (11, 10), (1, 12), (7, 8)}
    # the wheel cylinder survives as the pocket of the formed (7,8)
    assert out.cylinder_centers()[((7, 8),)] == wheel_center
    # the inserted strip carries both formed homoclinics on its boundary
    strip = next(z for z in out.zones if z.kind == "strip")
    boundary = set(strip.lower.homoclinics) | set(strip.upper.homoclinics)
    assert {(1, 12), (7, 8)} <= boundary


# ---------------------------------------------------------------------------
# union graphs
# ---------------------------------------------------------------------------

def test_union_accept_disjoint(model_hgraph_seven):
    m = model_hgraph_seven
    hg = build_hgraph(m)
    p1 = AdmissiblePath((edge(hg, (5, 6), (7, 0)),))
    p2 = AdmissiblePath((edge(hg, (17, 12), (9, 8)),))
    ok, reason = validate_union(m, [p1, p2])
    assert ok and reason is None


def test_union_shared_end_rejected(model_hgraph_seven):
    m = model_hgraph_seven
    hg = build_hgraph(m)
    p1 = AdmissiblePath((edge(hg, (5, 6), (7, 0)),))
    p2 = AdmissiblePath((edge(hg, (17, 12), (7, 0)),))
    ok, reason = validate_union(m, [p1, p2])
    assert not ok and reason == "shared-end"


def test_union_direction_conflict(model_hgraph_seven):
    m = model_hgraph_seven
    hg = build_hgraph(m)
    p1 = AdmissiblePath((edge(hg, (5, 6), (7, 0)), edge(hg, (7, 0), (17, 12))))
    p2 = AdmissiblePath((edge(hg, (9, 8), (7, 0)), edge(hg, (7, 0), (1, 2))))
    ok, reason = validate_union(m, [p1, p2])
    assert not ok and reason == "direction-conflict"


def test_union_two_edges_one_component_inadmissible(model_hgraph_seven):
    m = model_hgraph_seven
    hg = build_hgraph(m)
    p = AdmissiblePath((edge(hg, (5, 6), (7, 0)), edge(hg, (7, 0), (1, 2))))
    ok, reason = validate_union(m, [p])
    assert not ok and reason == "inadmissible-path"


def test_admissible_paths_respect_components(model_hgraph_seven):
    m = model_hgraph_seven
    for p in admissible_paths(m):
        comps = [m.component[e.zone_index] for e in p.edges]
        assert len(set(comps)) == len(comps)


# ---------------------------------------------------------------------------
# rank-k decomposition
# ---------------------------------------------------------------------------

def test_rank1_decomposition_is_single_event(model_double_point_two_centers):
    m = model_double_point_two_centers
    ev = next(e for e in enumerate_rank1(m) if e.formed)
    target = apply_event(m, ev)
    seq = decompose_rank_k(m, target)
    assert len(seq) == 1 and seq[0].key() == ev.key()


def test_rank2_simultaneous_decomposes(model_simultaneous):
    m = model_simultaneous
    centers = m.cylinder_centers()
    c_a = centers[((5, 4),)]
    c_c = centers[((13, 12),)]
    eqs = list(m.equilibria)
    eqs[c_a] = Equilibrium(1, SOURCE)
    eqs[c_c] = Equilibrium(1, SINK)
    landing = dict(m.landing)
    landing.update({8: 2, 9: 5, 4: c_a, 13: c_c})
    graph = SeparatrixGraph(
        8, ((3, 0, 1.0), (5, 12, 1.0)), dict(sorted(landing.items()))
    )
    target = decompose(graph, tuple(eqs))
    seq = decompose_rank_k(m, target)
    assert len(seq) == 2
    # verify the composition really lands on the target
    out = apply_event(apply_event(m, seq[0]), seq[1])
    assert out.key() == target.key()
    broken_total = set(seq[0].broken) | set(seq[1].broken)
    assert broken_total == {(3, 8), (5, 4), (9, 0), (13, 12)}


def test_rank_k_precondition(model_simultaneous):
    m = model_simultaneous
    with pytest.raises(ValueError):
        decompose_rank_k(m, m)
