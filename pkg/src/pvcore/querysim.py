"""Query-access model: generative, min and pairwise oracles, and the sampling search.

Algorithms only see an :class:`OracleEnvironment` through its query methods
and the population size. Every query is charged to the environment's
:class:`QueryTrace`.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .profile import AlternativeDistribution, Profile, two_bloc, uniform_distribution


@dataclass
class QueryTrace:
    generative: int = 0
    min_queries: int = 0
    pairwise: int = 0

    def copy(self) -> "QueryTrace":
        return QueryTrace(self.generative, self.min_queries, self.pairwise)

    def to_json(self) -> dict:
        return {"generative": self.generative, "min": self.min_queries, "pairwise": self.pairwise}


class OracleEnvironment:
    """Hidden profile and distribution behind counted queries. Not thread-safe."""

    def __init__(self, profile: Profile, distribution: AlternativeDistribution, seed=None):
        distribution.check_matches(profile)
        self._profile = profile
        self._distribution = distribution
        self._rng = random.Random(seed)
        self._cum = list(itertools.accumulate(float(w) for w in distribution.weights))
        self._last_positive = max(a for a, w in enumerate(distribution.weights) if w > 0)
        self.trace = QueryTrace()

    @property
    def n_voters(self) -> int:
        return self._profile.n

    def generative_query(self) -> int:
        self.trace.generative += 1
        k = bisect.bisect_right(self._cum, self._rng.random() * self._cum[-1])
        # float round-off can run past the end; fall back to the last positive weight
        return min(k, self._last_positive)

    def min_query(self, voter: int, alternatives: Iterable[int]) -> int:
        """Least-liked element of a (multi)set of alternatives."""
        alts = list(alternatives)
        if not alts:
            raise ValueError("min-query needs a nonempty set")
        self.trace.min_queries += 1
        return max(alts, key=self._profile.positions[voter].__getitem__)

    def pairwise_query(self, voter: int, a: int, b: int, allow_copies: bool = False) -> int:
        """The preferred alternative of ``a`` and ``b``.

        ``a == b`` is an error unless ``allow_copies`` marks them as two draws of
        the same statement, which are interchangeable; ``a`` is returned then.
        """
        if a == b and not allow_copies:
            raise ValueError("pairwise query needs two different alternatives")
        self.trace.pairwise += 1
        if a == b:
            return a
        return a if self._profile.prefers(voter, a, b) else b

    def reveal(self) -> tuple[Profile, AlternativeDistribution]:
        """Hidden instance, for judging results only."""
        return self._profile, self._distribution


def min_via_pairwise(env, voter: int, alternatives: Sequence[int]) -> int:
    """Linear scan keeping the loser of each comparison; ``len - 1`` queries."""
    if not alternatives:
        raise ValueError("need a nonempty set")
    it = iter(alternatives)
    worst = next(it)
    for b in it:
        preferred = env.pairwise_query(voter, worst, b, allow_copies=True)
        worst = b if preferred == worst else worst
    return worst


def compute_tau(eps, delta) -> int:
    """Sample size ``ceil(8/eps^2 * ln(c * ln c))`` with ``c = 32/(eps^2 delta)``."""
    eps, delta = Fraction(eps), Fraction(delta)
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    with mpmath.workdps(60):
        e = mpmath.mpf(eps.numerator) / eps.denominator
        dl = mpmath.mpf(delta.numerator) / delta.denominator
        c = 32 / (e**2 * dl)
        tau = 8 / e**2 * mpmath.log(c * mpmath.log(c))
        return int(mpmath.ceil(tau))


@dataclass
class SearchResult:
    survivor: int
    trace: QueryTrace
    samples: list[int] = field(repr=False)
    voters: list[int] = field(repr=False)


def find_epsilon_pvc_element(env, eps, delta, query_mode: str = "min", seed=None) -> SearchResult:
    """Sample ``tau`` alternatives, then let ``tau - 1`` random voters veto one each.

    Voters are drawn uniformly with replacement. In ``pairwise`` mode each
    veto is found by :func:`min_via_pairwise` over the full multiset, so a
    round on ``k`` remaining draws costs ``k - 1`` pairwise queries.
    """
    if query_mode not in ("min", "pairwise"):
        raise ValueError(f"unknown query mode {query_mode!r}")
    if env.n_voters < 1:
        raise ValueError("environment has no voters")
    tau = compute_tau(eps, delta)
    rng = random.Random(seed)
    samples = [env.generative_query() for _ in range(tau)]
    pool = Counter(samples)
    voters = []
    for _ in range(tau - 1):
        voter = rng.randrange(env.n_voters)
        voters.append(voter)
        if query_mode == "min":
            worst = env.min_query(voter, list(pool))
        else:
            worst = min_via_pairwise(env, voter, list(pool.elements()))
        pool[worst] -= 1
        if pool[worst] == 0:
            del pool[worst]
    (survivor,) = pool
    return SearchResult(survivor, env.trace.copy(), samples, voters)


def sample_instance(
    profile: Profile, samples: Sequence[int], voters: Sequence[int]
) -> tuple[Profile, AlternativeDistribution, list[int]]:
    """The sampled sub-instance: drawn voters (repeats kept) over the distinct
    drawn alternatives, weighted by draw frequency.

    Returns the restricted profile, the empirical distribution and the map from
    local ids back to original alternatives.
    """
    counts = Counter(samples)
    alts = sorted(counts)
    sub = profile.restrict(list(voters), alts)
    dist = AlternativeDistribution(tuple(Fraction(counts[a], len(samples)) for a in alts))
    return sub, dist, alts


def lower_bound_fixture(kind: str, eps, seed=None) -> tuple[OracleEnvironment, OracleEnvironment]:
    """Two hard-to-distinguish instances over alternatives ``a_1 = 0``, ``a_2 = 1``.

    ``weights``: two opposed voters, weights ``(1/2 + eps, 1/2 - eps)`` against
    ``(1/2 - eps, 1/2 + eps)``. ``population``: uniform weights, a ``1/2 + eps``
    share of voters ranks ``a_1`` first in the first population and ``a_2``
    first in the second.
    """
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    half = Fraction(1, 2)
    if kind == "weights":
        voters = two_bloc(2, 2, half)
        d1 = AlternativeDistribution((half + eps, half - eps))
        d2 = AlternativeDistribution((half - eps, half + eps))
        return OracleEnvironment(voters, d1, seed), OracleEnvironment(voters, d2, seed)
    if kind == "population":
        share = half + eps
        n = share.denominator
        n1 = two_bloc(n, 2, share)
        n2 = two_bloc(n, 2, share, rankings=((1, 0), (0, 1)))
        u = uniform_distribution(2)
        return OracleEnvironment(n1, u, seed), OracleEnvironment(n2, u, seed)
    raise ValueError(f"unknown fixture {kind!r}")


def mode_of_samples(env, k: int) -> int:
    """Naive identifier: the most frequent of ``k`` generative draws (lowest id on ties)."""
    counts = Counter(env.generative_query() for _ in range(k))
    best = max(counts.values())
    return min(a for a, c in counts.items() if c == best)


def containment_sample_size(eps, delta) -> int:
    return math.ceil(math.log(1 / float(delta)) / float(eps))
