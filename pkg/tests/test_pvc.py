import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from instances import instances, profiles, random_instance
from pvcore.flow import INF, min_cut
from pvcore.profile import AlternativeDistribution, Profile, two_bloc, uniform_distribution
from pvcore.pvc import (
    blocking_slack,
    build_blocking_network,
    classic_pvc,
    critical_epsilon,
    critical_epsilon_integer,
    critical_epsilons,
    epsilon_pvc,
    is_valid_witness,
    max_blocking_slack,
    veto_function,
)

ONE_BALLOT = Profile(((0, 1),))
OPPOSED = Profile(((0, 1), (1, 0)))
U2 = uniform_distribution(2)


def _hard_pair(eps=Fraction(1, 10)):
    half = Fraction(1, 2)
    return OPPOSED, AlternativeDistribution((half + eps, half - eps))


def test_top_choice_has_zero():
    assert critical_epsilon(ONE_BALLOT, U2, 0).value == 0
    assert max_blocking_slack(ONE_BALLOT, U2, 0).value == 0


def test_single_voter_bottom_choice():
    res = max_blocking_slack(ONE_BALLOT, U2, 1)
    assert res.value == Fraction(1, 2)
    assert res.witness.coalition == {0} and res.witness.blocking_set == {0}
    flow = critical_epsilon(ONE_BALLOT, U2, 1)
    assert flow.value == Fraction(1, 2)
    assert is_valid_witness(ONE_BALLOT, U2, 1, flow.witness)
    # unscaled integer network: (2*1*2 - 1 - 0)/2 - 1
    assert critical_epsilon_integer(ONE_BALLOT, 1) == Fraction(1, 2)


def test_common_last_alternative():
    p = Profile(((0, 1, 2), (1, 0, 2), (0, 1, 2)))
    u = uniform_distribution(3)
    res = max_blocking_slack(p, u, 2)
    assert res.value == Fraction(2, 3)
    assert res.witness.coalition == {0, 1, 2} and res.witness.blocking_set == {0, 1}
    assert critical_epsilon(p, u, 2).value == Fraction(2, 3)


def test_opposed_ballots_all_zero():
    assert [r.value for r in critical_epsilons(OPPOSED, U2)] == [0, 0]
    assert [max_blocking_slack(OPPOSED, U2, a).value for a in (0, 1)] == [0, 0]


def test_network_shape_for_top_and_bottom():
    p = Profile(((0, 1, 2), (0, 2, 1)))
    net, _ = build_blocking_network(p, uniform_distribution(3), 0)
    inf_edges = [(u, v) for u, v, c in net.edges if c == INF]
    assert len(inf_edges) == p.n * (p.m - 1)
    p = Profile(((1, 2, 0), (2, 1, 0)))
    net, _ = build_blocking_network(p, uniform_distribution(3), 0)
    assert not [e for e in net.edges if e[2] == INF]


def test_network_single_voter_bottom():
    net, groups = build_blocking_network(ONE_BALLOT, U2, 1)
    assert groups == [[0]]
    caps = {(u, v): c for u, v, c in net.edges}
    assert caps[(0, 1)] == 1
    assert caps[(2, net.sink)] == Fraction(1, 2)
    assert INF not in caps.values()
    assert min_cut(net)[0] == 0


def test_hard_pair_network_cut():
    p, d = _hard_pair()
    net, _ = build_blocking_network(p, d, 1)
    assert min_cut(net)[0] == Fraction(1, 2)


def test_hard_pair_critical_values():
    p, d = _hard_pair()
    assert critical_epsilon(p, d, 0).value == 0
    assert critical_epsilon(p, d, 1).value == Fraction(1, 10)
    for eps in (Fraction(0), Fraction(1, 20), Fraction(99, 1000)):
        assert epsilon_pvc(p, d, eps) == {0}


def test_hard_pair_boundary_is_inclusive():
    # blocking needs strict excess, so at eps equal to the gap a_2 is no longer blocked
    p, d = _hard_pair()
    assert epsilon_pvc(p, d, Fraction(1, 10)) == {0, 1}


def test_epsilon_pvc_edges():
    assert epsilon_pvc(ONE_BALLOT, U2, 0) == {0}
    assert epsilon_pvc(ONE_BALLOT, U2, 1) == {0, 1}
    assert epsilon_pvc(ONE_BALLOT, U2, 5) == {0, 1}
    with pytest.raises(ValueError):
        epsilon_pvc(ONE_BALLOT, U2, -1)


@pytest.mark.parametrize("x, n, m, expected", [(1, 3, 3, 0), (2, 4, 6, 2), (5, 5, 7, 6), (2, 2, 2, 1), (1, 2, 2, 0)])
def test_veto_function(x, n, m, expected):
    assert veto_function(x, n, m) == expected


def test_veto_function_range():
    with pytest.raises(ValueError):
        veto_function(0, 3, 3)


def test_classic_pvc_examples():
    assert classic_pvc(ONE_BALLOT) == {0}
    assert classic_pvc(OPPOSED) == {0, 1}


@settings(max_examples=150)
@given(instances(max_n=7, max_m=6))
def test_flow_equals_brute_force(inst):
    p, d = inst
    for a in range(p.m):
        flow = critical_epsilon(p, d, a)
        brute = max_blocking_slack(p, d, a)
        assert flow.value == brute.value
        if flow.value > 0:
            assert is_valid_witness(p, d, a, flow.witness)
            assert flow.witness.slack == flow.value
        else:
            assert flow.witness is None


@given(instances(max_n=6, max_m=6))
def test_merged_and_unmerged_networks_agree(inst):
    p, d = inst
    for a in range(p.m):
        merged, _ = build_blocking_network(p, d, a, merge=True)
        plain, _ = build_blocking_network(p, d, a, merge=False)
        assert min_cut(merged)[0] == min_cut(plain)[0]


@given(profiles(max_n=6, max_m=6))
def test_classic_matches_uniform_zero(p):
    assert classic_pvc(p) == epsilon_pvc(p, uniform_distribution(p.m), 0)


def test_classic_pvc_set_side_enumeration():
    # many voters, few alternatives: the alternative-subset branch is taken
    rng = random.Random(2)
    for _ in range(20):
        p, _ = random_instance(rng, n_range=(17, 24), m_range=(2, 5))
        assert classic_pvc(p) == epsilon_pvc(p, uniform_distribution(p.m), 0)


@given(instances(max_n=6, max_m=6))
def test_critical_values_in_unit_interval_and_core_nonempty(inst):
    p, d = inst
    values = [r.value for r in critical_epsilons(p, d)]
    assert all(0 <= v <= 1 for v in values)
    assert 0 in values


def test_slack_of_witness():
    p, d = _hard_pair()
    assert blocking_slack(p, d, {0}, {0}) == Fraction(1, 10)


def test_brute_force_cap():
    p = two_bloc(17, 3, Fraction(1, 2))
    with pytest.raises(ValueError):
        max_blocking_slack(p, uniform_distribution(3), 0)


def test_bad_alternative():
    with pytest.raises(ValueError):
        critical_epsilon(ONE_BALLOT, U2, 2)
    with pytest.raises(ValueError):
        critical_epsilon(ONE_BALLOT, uniform_distribution(3), 0)
