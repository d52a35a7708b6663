import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import assemble, complete_instance, random_instance
from netmatch.core import make_instance, qualified_set, truthful_reports, with_report
from netmatch.fixtures import TABLE4_LS_SEED
from netmatch.generators import gen_prefs
from netmatch.mechanisms import (
    MechanismError,
    ls,
    run_mechanism,
    run_to_json,
    shortest_path_ordering,
    swc,
    swn,
    ttc,
)
from netmatch.metrics import avg_ascension


def line(prefs, initial=(0,)):
    n = len(prefs)
    nbrs = [set() for _ in range(n)]
    for i in range(n - 1):
        nbrs[i].add(i + 1)
        nbrs[i + 1].add(i)
    return make_instance(prefs, nbrs, initial)


def star(prefs, center=0):
    n = len(prefs)
    nbrs = [set() for _ in range(n)]
    for i in range(n):
        if i != center:
            nbrs[center].add(i)
            nbrs[i].add(center)
    return make_instance(prefs, nbrs, {center})


# --- ordering ----------------------------------------------------------------


def test_ordering_table4_layers_and_frozen_seed(table4):
    reports = truthful_reports(table4)
    expected_dist = {0: 0, 1: 1, 2: 2, 3: 2, 4: 3, 5: 3, 6: 3, 8: 3, 7: 4}
    for seed in range(12):
        order = shortest_path_ordering(table4, reports, seed)
        assert sorted(order) == list(range(9))
        dists = [expected_dist[a] for a in order]
        assert dists == sorted(dists)
    assert shortest_path_ordering(table4, reports, TABLE4_LS_SEED) == (
        0, 1, 2, 3, 4, 5, 6, 8, 7,
    )


def test_ordering_line_has_no_ties():
    inst = line([tuple(range(3))] * 3)
    for seed in range(25):
        assert shortest_path_ordering(inst, truthful_reports(inst), seed) == (0, 1, 2)


def test_ordering_star_tiebreak_covers_all_leaf_orders():
    inst = star([tuple(range(4))] * 4)
    seen = set()
    for seed in range(200):
        order = shortest_path_ordering(inst, truthful_reports(inst), seed)
        assert order[0] == 0
        seen.add(order[1:])
    assert seen == set(itertools.permutations((1, 2, 3)))


def test_ordering_covers_only_qualified(fig1):
    reports = with_report(truthful_reports(fig1), 1, fig1.types[1].pref, {0})
    assert shortest_path_ordering(fig1, reports, 0) == (0, 1)


# --- ttc ----------------------------------------------------------------------


def test_ttc_fig1_trades_outside_edges(fig1):
    assert ttc(fig1, truthful_reports(fig1)) == (2, 1, 0)


def test_ttc_identity_when_everyone_loves_own_item():
    prefs = [(i,) + tuple(j for j in range(4) if j != i) for i in range(4)]
    inst = line(prefs)
    assert ttc(inst, truthful_reports(inst)) == (0, 1, 2, 3)


def test_ttc_equals_ls_on_complete_graph_with_table4_prefs(table4):
    prefs = [t.pref for t in table4.types]
    nbrs = [set(range(9)) - {i} for i in range(9)]
    inst = make_instance(prefs, nbrs, {0})
    reports = truthful_reports(inst)
    expected = ttc(inst, reports)
    for seed in range(6):
        assert ls(inst, reports, seed).allocation == expected


def test_ttc_ignores_unqualified_agents(fig1):
    reports = with_report(truthful_reports(fig1), 1, fig1.types[1].pref, {0})
    assert ttc(fig1, reports) == (1, 0, 2)


# --- swn ------------------------------------------------------------------------


def test_swn_fig2_only_central_swap(fig2):
    assert swn(fig2, truthful_reports(fig2)) == (0, 1, 3, 2, 4, 5)


def test_swn_equals_ttc_on_complete_graph():
    for trial in range(20):
        inst = complete_instance(trial, 6)
        reports = truthful_reports(inst)
        assert swn(inst, reports) == ttc(inst, reports)


def test_swn_two_agents_swap():
    inst = make_instance([(1, 0), (0, 1)], [{1}, {0}], {0})
    assert swn(inst, truthful_reports(inst)) == (1, 0)


# --- swc ------------------------------------------------------------------------


def test_swc_fig2_only_central_swap(fig2):
    assert swc(fig2, truthful_reports(fig2)) == (0, 1, 3, 2, 4, 5)


def test_swc_fig2_rooted_at_end_same_outcome(fig2):
    from netmatch.core import Instance

    rerooted = Instance(fig2.n, fig2.types, frozenset({0}))
    assert swc(rerooted, truthful_reports(rerooted)) == (0, 1, 3, 2, 4, 5)


def test_swc_descendant_pointing_enables_three_cycle():
    # Root wants the grandchild's item; the chain cooperates: root points two
    # levels down, and the cycle closes back through the middle agent.
    inst = line([(2, 0, 1), (0, 1, 2), (1, 2, 0)])
    assert swc(inst, truthful_reports(inst)) == (2, 0, 1)


def test_swc_grandchild_cannot_point_at_root():
    # Mutual root/grandchild desire is not enough: the grandchild's pointing
    # set stops at her neighbors and descendants, so everyone self-matches.
    inst = line([(2, 0, 1), (1, 0, 2), (0, 2, 1)])
    assert swc(inst, truthful_reports(inst)) == (0, 1, 2)


def test_swc_rejects_non_tree():
    prefs = [tuple(range(3))] * 3
    nbrs = [{1, 2}, {0, 2}, {0, 1}]
    inst = make_instance(prefs, nbrs, {0})
    with pytest.raises(MechanismError, match="rooted tree"):
        swc(inst, truthful_reports(inst))


def test_swc_rejects_multiple_roots(fig2):
    from netmatch.core import Instance

    two_roots = Instance(fig2.n, fig2.types, frozenset({0, 2}))
    with pytest.raises(MechanismError, match="rooted tree"):
        swc(two_roots, truthful_reports(two_roots))


# --- ls -------------------------------------------------------------------------


def test_ls_table4_full_trace(table4):
    result = ls(table4, truthful_reports(table4), TABLE4_LS_SEED)
    assert result.allocation == (1, 2, 0, 4, 5, 3, 7, 8, 6)
    assert [rt.cycles for rt in result.rounds] == [[(3, 4, 5), (0, 1, 2)], [(6, 7, 8)]]
    assert result.rounds[0].shared == (6, 7, 8)
    assert result.rounds[0].neighbors_after_share == {
        6: (7, 8),
        7: (6, 8),
        8: (6, 7),
    }
    assert result.rounds[1].shared == ()


def test_ls_fig2_chains_through_sharing(fig2):
    result = ls(fig2, truthful_reports(fig2), 0)
    assert result.allocation == (5, 4, 3, 2, 1, 0)
    assert [rt.cycles for rt in result.rounds] == [[(2, 3)], [(1, 4)], [(0, 5)]]
    assert [rt.shared for rt in result.rounds] == [(1, 4), (0, 5), ()]


def test_ls_single_agent():
    inst = make_instance([(0,)], [set()], {0})
    assert ls(inst, truthful_reports(inst), 3).allocation == (0,)


def test_ls_unqualified_keep_items(fig1):
    reports = with_report(truthful_reports(fig1), 1, fig1.types[1].pref, {0})
    result = ls(fig1, reports, 0)
    assert result.allocation[2] == 2
    assert result.allocation == (1, 0, 2)


def test_ls_seed_independent_without_ties(fig2):
    reports = truthful_reports(fig2)
    allocations = {ls(fig2, reports, seed).allocation for seed in range(10)}
    assert len(allocations) == 1


def test_ls_precomputed_ordering_matches(table4):
    reports = truthful_reports(table4)
    order = shortest_path_ordering(table4, reports, TABLE4_LS_SEED)
    direct = ls(table4, reports, TABLE4_LS_SEED)
    via_order = ls(table4, reports, TABLE4_LS_SEED, ordering=order)
    assert direct.allocation == via_order.allocation


@given(st.integers(0, 10_000), st.integers(0, 7))
@settings(max_examples=120, deadline=None)
def test_ls_allocation_invariants_random(trial, seed):
    inst, _ = random_instance(trial, n_max=12)
    reports = truthful_reports(inst)
    result = ls(inst, reports, seed)
    alloc = result.allocation
    assert sorted(alloc) == list(range(inst.n))  # injective
    q = qualified_set(inst, reports)
    for i in range(inst.n):
        if i not in q:
            assert alloc[i] == i
    popped = [a for rt in result.rounds for cyc in rt.cycles for a in cyc]
    assert len(popped) == len(set(popped)) == len(q)  # O(n) pops, each once


@given(st.integers(0, 10_000))
@settings(max_examples=100, deadline=None)
def test_all_mechanisms_individually_rational_random(trial):
    from helpers import is_tree

    inst, family = random_instance(trial, n_max=10)
    reports = truthful_reports(inst)
    allocations = {
        "ttc": ttc(inst, reports),
        "swn": swn(inst, reports),
        "ls": ls(inst, reports, trial % 5).allocation,
    }
    if family == "tree" and is_tree([t.neighbors for t in inst.types]):
        allocations["swc"] = swc(inst, reports)
    for alloc in allocations.values():
        assert avg_ascension(inst, alloc) >= 0
        for i in range(inst.n):
            pref = inst.types[i].pref
            assert pref.index(alloc[i]) <= pref.index(i)


@given(st.integers(0, 10_000), st.integers(2, 8), st.integers(0, 5))
@settings(max_examples=100, deadline=None)
def test_ls_equals_ttc_on_complete_report_graphs(trial, n, seed):
    inst = complete_instance(trial, n)
    reports = truthful_reports(inst)
    assert ls(inst, reports, seed).allocation == ttc(inst, reports)


def test_pointing_set_nesting_at_start(table4):
    # Before any trade: neighbor-only choices are contained in the LS
    # stack-opening choice set, which is contained in the TTC choice set.
    reports = truthful_reports(table4)
    q = qualified_set(table4, reports)
    opener = shortest_path_ordering(table4, reports, 0)[0]
    for i in sorted(q):
        swn_set = ({i} | set(reports[i].neighbors)) & q
        ls_set = (set(reports[i].neighbors) & q) | {opener, i}
        ttc_set = set(q)
        assert swn_set <= ls_set <= ttc_set


# --- dispatcher / json ----------------------------------------------------------


def test_run_mechanism_records_rounds_only_for_ls(fig1):
    assert run_mechanism("ttc", fig1).rounds is None
    assert run_mechanism("ls", fig1, seed=1).rounds is not None


def test_run_to_json_is_one_based(fig1):
    payload = run_to_json(run_mechanism("ls", fig1, seed=0))
    assert payload["allocation"] == {"1": 2, "2": 1, "3": 3}
    assert payload["rounds"][0]["cycles"] == [[1, 2]]
