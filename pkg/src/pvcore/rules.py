"""Single-winner voting rules.

The veto family (sequential veto, gamma-veto, veto by consumption) lands in
the proportional veto core; Borda, Plurality, IRV, Schulze and a seeded random
pick serve as comparison rules. Every tie is broken towards the lowest
alternative id and noted in the trace.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .profile import AlternativeDistribution, Profile


@dataclass(frozen=True)
class RuleOutcome:
    winner: int
    rule: str
    trace: tuple = ()

    def to_json(self, trace: bool = False) -> dict:
        out = {"winner": self.winner, "rule": self.rule}
        if trace:
            out["trace"] = [list(map(_jsonable, step)) for step in self.trace]
        return out


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    return x


@dataclass
class CapacityState:
    """Remaining capacity per alternative during a gamma-veto run."""

    capacity: dict[int, Fraction]
    remaining: list[int]
    removed: list[int] = field(default_factory=list)

    def tracked_mass(self) -> Fraction:
        return sum((self.capacity[a] for a in self.remaining), Fraction(0))


def _argmax_lowest(scores: Sequence) -> tuple[int, bool]:
    best = max(scores)
    winners = [a for a, s in enumerate(scores) if s == best]
    return winners[0], len(winners) > 1


# ---------------------------------------------------------------------------
# Veto family


def vote_by_veto(p: Profile, voter_order: Sequence[int]) -> RuleOutcome:
    """Each listed voter in turn strikes their least-liked remaining alternative."""
    if len(voter_order) != p.m - 1:
        raise ValueError(f"need {p.m - 1} vetoes for {p.m} alternatives, got {len(voter_order)}")
    remaining = set(range(p.m))
    trace = []
    for i in voter_order:
        pos = p.positions[i]
        worst = max(remaining, key=pos.__getitem__)
        remaining.remove(worst)
        trace.append(("veto", i, worst))
    (winner,) = remaining
    return RuleOutcome(winner, "veto", tuple(trace))


def run_gamma_veto(
    p: Profile, d: AlternativeDistribution, eps, voter_order: Sequence[int]
) -> CapacityState:
    """Weighted sequential veto where each voter removes ``(1 - eps)/n`` of mass.

    A voter takes the shortest bottom segment of their ranking (among the
    remaining alternatives) whose remaining capacity reaches the quota, removes
    everything in it but its top element, and charges that top element the rest
    of the quota, removing it too if that exhausts it. Zero-weight alternatives
    cost nothing.
    """
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    d.check_matches(p)
    if sorted(voter_order) != list(range(p.n)):
        raise ValueError("voter_order must be a permutation of the voters")
    gamma = (1 - eps) / p.n
    state = CapacityState({a: d.weights[a] for a in range(p.m)}, list(range(p.m)))
    if gamma == 0:
        return state
    for i in voter_order:
        alive = set(state.remaining)
        bottom_up = [a for a in reversed(p.rankings[i]) if a in alive]
        taken = Fraction(0)
        segment = []
        for a in bottom_up:
            segment.append(a)
            if taken + state.capacity[a] >= gamma:
                break
            taken += state.capacity[a]
        top = segment[-1]
        for a in segment[:-1]:
            state.capacity[a] = Fraction(0)
            state.remaining.remove(a)
            state.removed.append(a)
        need = gamma - taken
        if state.capacity[top] <= need:
            state.capacity[top] = Fraction(0)
            state.remaining.remove(top)
            state.removed.append(top)
        else:
            state.capacity[top] -= need
    return state


def vote_by_gamma_veto(
    p: Profile, d: AlternativeDistribution, eps, voter_order: Sequence[int]
) -> frozenset[int]:
    return frozenset(run_gamma_veto(p, d, eps, voter_order).remaining)


def veto_by_consumption(p: Profile) -> RuleOutcome:
    """Simultaneous consumption: each voter eats their worst remaining alternative.

    All alternatives start with capacity 1 and every voter eats at rate 1.
    Events are exact: the next exhaustion time is computed in rationals. The
    alternatives exhausted at the final event are the co-winners; the lowest
    id wins. Trace steps are ``(time, exhausted, consumed_total)``.
    """
    cap = {a: Fraction(1) for a in range(p.m)}
    now = Fraction(0)
    eaten = Fraction(0)
    trace = []
    while True:
        rate: dict[int, int] = {}
        for i in range(p.n):
            pos = p.positions[i]
            worst = max(cap, key=pos.__getitem__)
            rate[worst] = rate.get(worst, 0) + 1
        dt = min(cap[a] / r for a, r in rate.items())
        now += dt
        gone = set()
        for a, r in rate.items():
            cap[a] -= r * dt
            eaten += r * dt
            if cap[a] == 0:
                gone.add(a)
        trace.append((now, frozenset(gone), eaten))
        if len(gone) == len(cap):
            winners = sorted(gone)
            if len(winners) > 1:
                trace.append(("tie-break", frozenset(winners), winners[0]))
            return RuleOutcome(winners[0], "vbc", tuple(trace))
        for a in gone:
            del cap[a]


# ---------------------------------------------------------------------------
# Comparison rules


def borda(p: Profile) -> RuleOutcome:
    scores = [0] * p.m
    for r in p.rankings:
        for k, a in enumerate(r):
            scores[a] += p.m - 1 - k
    winner, tied = _argmax_lowest(scores)
    trace = (("scores", tuple(scores)),) + ((("tie-break", winner),) if tied else ())
    return RuleOutcome(winner, "borda", trace)


def plurality(p: Profile) -> RuleOutcome:
    scores = [0] * p.m
    for r in p.rankings:
        scores[r[0]] += 1
    winner, tied = _argmax_lowest(scores)
    trace = (("scores", tuple(scores)),) + ((("tie-break", winner),) if tied else ())
    return RuleOutcome(winner, "plurality", trace)


def irv(p: Profile) -> RuleOutcome:
    """Drop the alternative with fewest first places (lowest id on ties) until one is left."""
    remaining = set(range(p.m))
    trace = []
    while len(remaining) > 1:
        tally = {a: 0 for a in remaining}
        for r in p.rankings:
            tally[next(a for a in r if a in remaining)] += 1
        low = min(tally.values())
        losers = sorted(a for a in remaining if tally[a] == low)
        out = losers[0]
        trace.append(("eliminate", out, low) + (("tie-break",) if len(losers) > 1 else ()))
        remaining.remove(out)
    (winner,) = remaining
    return RuleOutcome(winner, "irv", tuple(trace))


def pairwise_matrix(p: Profile) -> list[list[int]]:
    """``d[x][y]`` is the number of voters ranking ``x`` above ``y``."""
    m = p.m
    d = [[0] * m for _ in range(m)]
    for r in p.rankings:
        for k, x in enumerate(r):
            row = d[x]
            for y in r[k + 1:]:
                row[y] += 1
    return d


def schulze_strengths(p: Profile) -> list[list[int]]:
    """Widest-path strengths with winning votes as the strength of a direct win."""
    d = pairwise_matrix(p)
    m = p.m
    s = [[d[x][y] if x != y and d[x][y] > d[y][x] else 0 for y in range(m)] for x in range(m)]
    for k in range(m):
        sk = s[k]
        for x in range(m):
            if x == k:
                continue
            sxk = s[x][k]
            if sxk == 0:
                continue
            sx = s[x]
            for y in range(m):
                if y != x and y != k:
                    w = sxk if sxk < sk[y] else sk[y]
                    if w > sx[y]:
                        sx[y] = w
    return s


def schulze(p: Profile) -> RuleOutcome:
    s = schulze_strengths(p)
    m = p.m
    unbeaten = [x for x in range(m) if all(s[x][y] >= s[y][x] for y in range(m) if y != x)]
    trace = (("tie-break", tuple(unbeaten)),) if len(unbeaten) > 1 else ()
    return RuleOutcome(unbeaten[0], "schulze", trace)


def random_winner(p: Profile, seed) -> RuleOutcome:
    return RuleOutcome(random.Random(seed).randrange(p.m), "random")


RULES = ("vbc", "borda", "schulze", "irv", "plurality", "random")


def run_rule(name: str, p: Profile, seed=None, voter_order: Optional[Sequence[int]] = None) -> RuleOutcome:
    """Run a rule by name. ``veto`` cycles through the voters unless an order is given."""
    if name == "vbc":
        return veto_by_consumption(p)
    if name == "borda":
        return borda(p)
    if name == "schulze":
        return schulze(p)
    if name == "irv":
        return irv(p)
    if name == "plurality":
        return plurality(p)
    if name == "random":
        return random_winner(p, seed)
    if name == "veto":
        if voter_order is None:
            voter_order = [k % p.n for k in range(p.m - 1)]
        return vote_by_veto(p, voter_order)
    raise ValueError(f"unknown rule {name!r}")
