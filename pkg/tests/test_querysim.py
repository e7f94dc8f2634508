import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import instances, profiles
from pvcore.profile import AlternativeDistribution, Profile, two_bloc, uniform_distribution
from pvcore.pvc import critical_epsilon, epsilon_pvc
from pvcore.querysim import (
    OracleEnvironment,
    compute_tau,
    containment_sample_size,
    find_epsilon_pvc_element,
    lower_bound_fixture,
    min_via_pairwise,
    mode_of_samples,
    sample_instance,
)

ABC = Profile(((0, 1, 2),))


class AuditedEnvironment:
    """Exposes only the query interface; any other attribute access fails the test."""

    # the trace is the public query ledger, not hidden state
    _allowed = {"generative_query", "min_query", "pairwise_query", "n_voters", "trace"}

    def __init__(self, env):
        object.__setattr__(self, "_env", env)

    def __getattribute__(self, name):
        if name in AuditedEnvironment._allowed:
            return getattr(object.__getattribute__(self, "_env"), name)
        raise AssertionError(f"algorithm touched hidden attribute {name!r}")


def test_point_mass_sampling():
    d = AlternativeDistribution((0, 1, 0))
    env = OracleEnvironment(ABC, d, seed=0)
    assert {env.generative_query() for _ in range(200)} == {1}
    assert env.trace.generative == 200


def test_trailing_zero_weight_is_never_drawn():
    env = OracleEnvironment(ABC, AlternativeDistribution(("1/3", "2/3", 0)), seed=1)
    assert 2 not in {env.generative_query() for _ in range(5000)}


def test_sampling_frequency():
    gap = Fraction(1, 10)
    d = AlternativeDistribution((Fraction(1, 2) + gap, Fraction(1, 2) - gap))
    env = OracleEnvironment(Profile(((0, 1),)), d, seed=42)
    k = 100_000
    hits = sum(env.generative_query() == 0 for _ in range(k))
    p = 0.6
    assert abs(hits - k * p) <= 4 * math.sqrt(k * p * (1 - p))


def test_min_query():
    env = OracleEnvironment(ABC, uniform_distribution(3))
    assert env.min_query(0, [1]) == 1
    assert env.min_query(0, [0, 2]) == 2
    assert env.min_query(0, [1, 1]) == 1
    assert env.trace.min_queries == 3
    with pytest.raises(ValueError):
        env.min_query(0, [])


def test_pairwise_query():
    env = OracleEnvironment(Profile(((0, 1),)), uniform_distribution(2))
    assert env.pairwise_query(0, 0, 1) == 0
    assert env.pairwise_query(0, 1, 0) == 0
    with pytest.raises(ValueError):
        env.pairwise_query(0, 1, 1)
    assert env.pairwise_query(0, 1, 1, allow_copies=True) == 1
    assert env.trace.pairwise == 3


@given(profiles(max_n=3, max_m=6), st.data())
def test_pairwise_is_consistent_with_hidden_order(p, data):
    env = OracleEnvironment(p, uniform_distribution(p.m))
    i = data.draw(st.integers(0, p.n - 1))
    a, b, c = data.draw(st.permutations(range(p.m)))[:3] if p.m >= 3 else (0, 1, 0)
    assert env.pairwise_query(i, a, b) == (a if p.prefers(i, a, b) else b)
    if p.m >= 3 and env.pairwise_query(i, a, b) == a and env.pairwise_query(i, b, c) == b:
        assert env.pairwise_query(i, a, c) == a


@pytest.mark.parametrize("size, cost", [(1, 0), (5, 4)])
def test_min_via_pairwise_cost(size, cost):
    p = Profile((tuple(range(6)),))
    env = OracleEnvironment(p, uniform_distribution(6))
    assert min_via_pairwise(env, 0, list(range(size))) == size - 1
    assert env.trace.pairwise == cost


def test_min_via_pairwise_matches_min_query():
    rng = random.Random(3)
    p = two_bloc(10, 7, Fraction(1, 2), seed=1, phi=0.8)
    env = OracleEnvironment(p, uniform_distribution(7))
    for _ in range(1000):
        i = rng.randrange(p.n)
        xs = [rng.randrange(7) for _ in range(rng.randint(1, 9))]
        assert min_via_pairwise(env, i, xs) == env.min_query(i, xs)


def test_tau_values():
    assert compute_tau(Fraction(1, 2), Fraction(1, 2)) == 233
    assert compute_tau("1/5", "1/10") == 2237
    # float evaluation as an independent check
    eps, delta = 0.1, 0.05
    c = 32 / (eps**2 * delta)
    assert abs(compute_tau("1/10", "1/20") - math.ceil(8 / eps**2 * math.log(c * math.log(c)))) <= 1


def test_tau_monotone():
    grid = [Fraction(k, 20) for k in range(1, 20)]
    for eps_lo, eps_hi in zip(grid, grid[1:]):
        for delta in grid[:6]:
            assert compute_tau(eps_lo, delta) >= compute_tau(eps_hi, delta)
            assert compute_tau(delta, eps_lo) >= compute_tau(delta, eps_hi)


def test_tau_validation():
    with pytest.raises(ValueError):
        compute_tau(0, Fraction(1, 2))
    with pytest.raises(ValueError):
        compute_tau(Fraction(1, 2), 1)


def test_point_mass_survivor():
    p = two_bloc(6, 4, Fraction(1, 2))
    env = OracleEnvironment(p, AlternativeDistribution((0, 0, 1, 0)), seed=0)
    res = find_epsilon_pvc_element(env, Fraction(1, 2), Fraction(1, 2), seed=0)
    assert res.survivor == 2


def test_min_mode_budget():
    env = OracleEnvironment(two_bloc(4, 5, Fraction(1, 2)), uniform_distribution(5), seed=0)
    res = find_epsilon_pvc_element(env, Fraction(1, 2), Fraction(1, 2), "min", seed=0)
    assert (res.trace.generative, res.trace.min_queries, res.trace.pairwise) == (233, 232, 0)
    assert len(res.samples) == 233 and len(res.voters) == 232


def test_search_uses_only_the_query_interface():
    p = two_bloc(5, 6, Fraction(2, 5), seed=2, phi=0.6)
    for mode in ("min", "pairwise"):
        env = OracleEnvironment(p, uniform_distribution(6), seed=3)
        res = find_epsilon_pvc_element(AuditedEnvironment(env), Fraction(1, 2), Fraction(1, 2), mode, seed=4)
        assert res.survivor in range(6)


@settings(max_examples=25, deadline=None)
@given(instances(max_n=5, max_m=5), st.integers(0, 10_000))
def test_modes_agree(inst, seed):
    p, d = inst
    a = find_epsilon_pvc_element(OracleEnvironment(p, d, seed), Fraction(1, 2), Fraction(1, 2), "min", seed)
    b = find_epsilon_pvc_element(OracleEnvironment(p, d, seed), Fraction(1, 2), Fraction(1, 2), "pairwise", seed)
    assert a.survivor == b.survivor
    assert a.samples == b.samples
    assert a.trace.generative == b.trace.generative


@settings(max_examples=40, deadline=None)
@given(instances(max_n=5, max_m=5), st.integers(0, 10_000))
def test_survivor_in_sub_instance_pvc(inst, seed):
    p, d = inst
    res = find_epsilon_pvc_element(OracleEnvironment(p, d, seed), Fraction(1, 2), Fraction(1, 2), seed=seed)
    sub, sub_d, alts = sample_instance(p, res.samples, res.voters)
    assert epsilon_pvc(sub, sub_d, 0) >= {alts.index(res.survivor)}


def test_failure_rate_within_delta():
    p = two_bloc(30, 6, Fraction(1, 2), seed=5, phi=0.7)
    d = AlternativeDistribution(tuple(Fraction(w, 21) for w in range(1, 7)))
    eps, delta, runs = Fraction(1, 2), Fraction(1, 4), 200
    crit = {a: critical_epsilon(p, d, a).value for a in range(6)}
    fails = sum(
        crit[find_epsilon_pvc_element(OracleEnvironment(p, d, r), eps, delta, seed=r).survivor] > eps
        for r in range(runs)
    )
    bound = float(delta) + 3 * math.sqrt(float(delta * (1 - delta)) / runs)
    assert fails / runs <= bound


def test_sample_instance_multiset_weights():
    p = Profile(((0, 1, 2), (2, 1, 0)))
    sub, d, alts = sample_instance(p, [2, 0, 2, 2], [1, 1, 0])
    assert alts == [0, 2]
    assert d.weights == (Fraction(1, 4), Fraction(3, 4))
    assert sub.rankings == ((1, 0), (1, 0), (0, 1))


def test_fixture_cores_below_gap():
    eps = Fraction(1, 10)
    for kind in ("weights", "population"):
        e1, e2 = lower_bound_fixture(kind, eps)
        for env, expected in ((e1, {0}), (e2, {1})):
            p, d = env.reveal()
            assert epsilon_pvc(p, d, eps - Fraction(1, 1000)) == expected
            assert critical_epsilon(p, d, 1 - min(expected)).value == eps


def test_fixture_symmetry():
    e1, e2 = lower_bound_fixture("weights", Fraction(1, 5))
    p1, d1 = e1.reveal()
    p2, d2 = e2.reveal()
    assert d1.weights == d2.weights[::-1]
    assert epsilon_pvc(p1, d1, 0) == {0} and epsilon_pvc(p2, d2, 0) == {1}
    n1, _ = lower_bound_fixture("population", Fraction(1, 10))
    assert n1.n_voters == 5
    with pytest.raises(ValueError):
        lower_bound_fixture("other", Fraction(1, 10))


def test_identify_versus_generate():
    eps, delta, runs = Fraction(1, 10), Fraction(1, 10), 400
    k = containment_sample_size(eps, delta)
    assert k == 24
    mode_wrong = contained = 0
    for r in range(runs):
        e1, e2 = lower_bound_fixture("weights", eps, seed=r)
        env = e1 if r % 2 == 0 else e2
        target = 0 if env is e1 else 1
        mode_wrong += mode_of_samples(env, int(1 / eps)) != target
        p, d = env.reveal()
        core = epsilon_pvc(p, d, 0)
        contained += any(env.generative_query() in core for _ in range(k))
    sigma = math.sqrt(float(delta * (1 - delta)) / runs)
    # the naive identifier errs well above delta; containment holds at rate >= 1 - delta
    assert mode_wrong / runs > float(delta) + 3 * sigma
    assert contained / runs >= 1 - float(delta) - 3 * sigma


def test_audit_wrapper_blocks_hidden_state():
    env = AuditedEnvironment(OracleEnvironment(ABC, uniform_distribution(3)))
    for name in ("_profile", "_distribution", "reveal"):
        with pytest.raises(AssertionError):
            getattr(env, name)
