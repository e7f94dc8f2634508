"""Blocking slack, critical epsilon and the (epsilon-)proportional veto core.

An alternative ``a`` is eps-blocked by a coalition ``T`` when some set ``S`` of
alternatives, each ranked above ``a`` by every voter in ``T``, has
``weight(S) > 1 - |T|/n + eps``. The critical epsilon of ``a`` is the largest
slack ``weight(S) + |T|/n - 1`` over all such pairs, clamped at 0.

Two independent routes compute it: :func:`max_blocking_slack` enumerates
coalitions, :func:`critical_epsilon` solves a min-cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .flow import INF, FlowNetwork, min_cut
from .profile import AlternativeDistribution, Profile

BRUTE_FORCE_CAP = 16


@dataclass(frozen=True)
class BlockingWitness:
    coalition: frozenset[int]
    blocking_set: frozenset[int]
    slack: Fraction

    def to_json(self) -> dict:
        return {
            "coalition": sorted(self.coalition),
            "blocking_set": sorted(self.blocking_set),
            "slack": str(self.slack),
        }


@dataclass(frozen=True)
class CriticalEpsilonResult:
    alternative: int
    value: Fraction
    witness: Optional[BlockingWitness]
    method: str

    def to_json(self, witness: bool = True) -> dict:
        out = {"alt": self.alternative, "critical_epsilon": str(self.value)}
        if witness:
            out["witness"] = None if self.witness is None else self.witness.to_json()
        return out


def _check_alt(p: Profile, a: int) -> None:
    if not 0 <= a < p.m:
        raise ValueError(f"alternative {a} out of range 0..{p.m - 1}")


def blocking_slack(p: Profile, d: AlternativeDistribution, coalition, blocking_set) -> Fraction:
    return d.measure(blocking_set) + Fraction(len(coalition), p.n) - 1


def is_valid_witness(p: Profile, d: AlternativeDistribution, a: int, w: BlockingWitness) -> bool:
    """Re-check a witness from scratch: preference condition and slack arithmetic."""
    if a in w.blocking_set or not w.coalition:
        return False
    for i in w.coalition:
        if any(not p.prefers(i, b, a) for b in w.blocking_set):
            return False
    return w.slack == blocking_slack(p, d, w.coalition, w.blocking_set)


def max_blocking_slack(
    p: Profile, d: AlternativeDistribution, a: int, cap: int = BRUTE_FORCE_CAP
) -> CriticalEpsilonResult:
    """Enumerate every nonempty coalition and its maximal common upper set."""
    _check_alt(p, a)
    d.check_matches(p)
    if p.n > cap:
        raise ValueError(f"n={p.n} exceeds brute-force cap {cap}; use critical_epsilon")
    n, m = p.n, p.m
    uppers = []
    for i in range(n):
        mask = 0
        for b in p.upper_set(i, a):
            mask |= 1 << b
        uppers.append(mask)
    full = (1 << m) - 1
    common = [full] * (1 << n)
    best, best_pair = Fraction(0), None
    for t in range(1, 1 << n):
        low = t & -t
        common[t] = common[t ^ low] & uppers[low.bit_length() - 1]
        s_mask = common[t]
        size = bin(t).count("1")
        weight = sum(
            (d.weights[b] for b in range(m) if s_mask >> b & 1), Fraction(0)
        )
        slack = weight + Fraction(size, n) - 1
        if slack > best:
            best, best_pair = slack, (t, s_mask)
    witness = None
    if best_pair is not None:
        t, s_mask = best_pair
        witness = BlockingWitness(
            frozenset(i for i in range(n) if t >> i & 1),
            frozenset(b for b in range(m) if s_mask >> b & 1),
            best,
        )
    return CriticalEpsilonResult(a, best, witness, "brute-force")


def build_blocking_network(
    p: Profile, d: AlternativeDistribution, a: int, merge: bool = False
) -> tuple[FlowNetwork, list[list[int]]]:
    """Min-cut network for challenging ``a`` in normalized units.

    Node 0 is the source, then one node per voter group, then one node per
    alternative, then the sink. Source to voter has capacity 1/n, alternative
    ``j != a`` to sink has capacity ``weight_j``, and voter ``i`` to ``j`` is
    uncuttable exactly when ``i`` ranks ``a`` above ``j``.

    With ``merge=True`` voters sharing the same upper set of ``a`` become one
    node of capacity ``count/n``; this leaves every cut value unchanged.
    Returns the network and, per voter node, the voter ids it stands for.
    """
    _check_alt(p, a)
    d.check_matches(p)
    n, m = p.n, p.m
    if merge:
        index: dict[frozenset, int] = {}
        groups: list[list[int]] = []
        for i in range(n):
            key = p.upper_set(i, a)
            if key not in index:
                index[key] = len(groups)
                groups.append([])
            groups[index[key]].append(i)
    else:
        groups = [[i] for i in range(n)]
    g = len(groups)
    sink = g + m + 1
    net = FlowNetwork(sink + 1, 0, sink)
    net.labels = ["source"] + [f"voter{grp[0]}" for grp in groups]
    net.labels += [f"alt{j}" for j in range(m)] + ["sink"]
    for k, grp in enumerate(groups):
        net.add_edge(0, 1 + k, Fraction(len(grp), n))
    for j in range(m):
        if j != a:
            net.add_edge(1 + g + j, sink, d.weights[j])
    for k, grp in enumerate(groups):
        pos = p.positions[grp[0]]
        for j in range(m):
            if j != a and pos[a] < pos[j]:
                net.add_edge(1 + k, 1 + g + j, INF)
    return net, groups


def critical_epsilon(p: Profile, d: AlternativeDistribution, a: int) -> CriticalEpsilonResult:
    """Critical epsilon of ``a`` as ``max(0, 1 - weight_a - mincut)``.

    The witness is read off the residual source side: reachable voters form
    the coalition, unreachable alternatives the blocking set.
    """
    net, groups = build_blocking_network(p, d, a, merge=True)
    cut, side = min_cut(net)
    value = 1 - d.weights[a] - cut
    if value <= 0:
        return CriticalEpsilonResult(a, Fraction(0), None, "flow")
    g = len(groups)
    coalition = frozenset(i for k, grp in enumerate(groups) if 1 + k in side for i in grp)
    blocking = frozenset(j for j in range(p.m) if j != a and 1 + g + j not in side)
    witness = BlockingWitness(coalition, blocking, blocking_slack(p, d, coalition, blocking))
    return CriticalEpsilonResult(a, value, witness, "flow")


def critical_epsilon_integer(p: Profile, a: int) -> Fraction:
    """Uniform-weight critical epsilon from the unscaled integer network.

    Voter edges carry capacity ``m``, alternative edges ``n``; with ``K`` the
    min cut the result is ``(2nm - n - K)/(nm) - 1`` clamped at 0.
    """
    _check_alt(p, a)
    n, m = p.n, p.m
    sink = n + m + 1
    net = FlowNetwork(sink + 1, 0, sink)
    for i in range(n):
        net.add_edge(0, 1 + i, m)
        pos = p.positions[i]
        for j in range(m):
            if j != a and pos[a] < pos[j]:
                net.add_edge(1 + i, 1 + n + j, INF)
    for j in range(m):
        if j != a:
            net.add_edge(1 + n + j, sink, n)
    k, _ = min_cut(net)
    return max(Fraction(0), Fraction(2 * n * m - n, n * m) - k / (n * m) - 1)


def critical_epsilons(p: Profile, d: AlternativeDistribution) -> list[CriticalEpsilonResult]:
    return [critical_epsilon(p, d, a) for a in range(p.m)]


def epsilon_pvc(p: Profile, d: AlternativeDistribution, eps) -> frozenset[int]:
    """Alternatives whose critical epsilon is at most ``eps`` (blocking is strict)."""
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return frozenset(r.alternative for r in critical_epsilons(p, d) if r.value <= eps)


def veto_function(x: int, n: int, m: int) -> int:
    """Number of alternatives a coalition of ``x`` out of ``n`` voters may veto."""
    if not 1 <= x <= n:
        raise ValueError(f"coalition size {x} outside 1..{n}")
    return math.ceil(Fraction(x * m, n) - 1)


def classic_pvc(p: Profile, cap: int = BRUTE_FORCE_CAP) -> frozenset[int]:
    """Finite proportional veto core by the veto-function definition.

    ``a`` is vetoed when some coalition ``T`` shares an upper set ``S`` of ``a``
    with ``|S| >= m - f(|T|)``. Enumerates coalitions, or alternative sets
    when that side is smaller; raises if both exceed ``cap``.
    """
    n, m = p.n, p.m
    by_coalition = n <= cap and (n <= m - 1 or m - 1 > cap)
    if not by_coalition and m - 1 > cap:
        raise ValueError(f"n={n} and m={m} both exceed the enumeration cap {cap}")
    f = [None] + [veto_function(x, n, m) for x in range(1, n + 1)]
    core = set()
    for a in range(m):
        uppers = []
        for i in range(n):
            mask = 0
            for b in p.upper_set(i, a):
                mask |= 1 << b
            uppers.append(mask)
        if by_coalition:
            vetoed = _vetoed_by_coalitions(uppers, n, m, f)
        else:
            vetoed = _vetoed_by_sets(uppers, a, n, m, f)
        if not vetoed:
            core.add(a)
    return frozenset(core)


def _vetoed_by_coalitions(uppers, n, m, f) -> bool:
    common = [(1 << m) - 1] * (1 << n)
    for t in range(1, 1 << n):
        low = t & -t
        common[t] = common[t ^ low] & uppers[low.bit_length() - 1]
        if bin(common[t]).count("1") >= m - f[bin(t).count("1")]:
            return True
    return False


def _vetoed_by_sets(uppers, a, n, m, f) -> bool:
    others = [b for b in range(m) if b != a]
    for bits in range(1, 1 << len(others)):
        s_mask = 0
        for k, b in enumerate(others):
            if bits >> k & 1:
                s_mask |= 1 << b
        t = sum(1 for u in uppers if u & s_mask == s_mask)
        if t and bin(s_mask).count("1") >= m - f[t]:
            return True
    return False

