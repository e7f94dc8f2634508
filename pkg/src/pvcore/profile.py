"""Preference profiles, exact alternative distributions and synthetic generators.

Alternatives are dense integer ids ``0..m-1``. Every weight and utility is a
:class:`fractions.Fraction`; decimal strings are read as exact decimal
fractions so that boundary comparisons in the blocking condition stay exact.
"""

from __future__ import annotations

import csv
import io
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence


class ProfileError(ValueError):
    """Raised for malformed ballots, distributions or utility files."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _check_permutation(ranking: Sequence[int], m: int, line: Optional[int] = None) -> None:
    seen = set()
    for alt in ranking:
        if not 0 <= alt < m:
            raise ProfileError(f"alternative {alt} out of range 0..{m - 1}", line)
        if alt in seen:
            raise ProfileError(f"duplicate alternative {alt}", line)
        seen.add(alt)
    if len(seen) != m:
        missing = sorted(set(range(m)) - seen)
        raise ProfileError(f"missing alternative(s) {missing}", line)


@dataclass(frozen=True)
class Profile:
    """``n`` voters, each a strict ranking (best first) of alternatives ``0..m-1``."""

    rankings: tuple[tuple[int, ...], ...]
    names: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        rankings = tuple(tuple(int(a) for a in r) for r in self.rankings)
        object.__setattr__(self, "rankings", rankings)
        if not rankings:
            raise ProfileError("profile needs at least one voter")
        m = len(rankings[0])
        if m < 1:
            raise ProfileError("profile needs at least one alternative")
        for r in rankings:
            _check_permutation(r, m)
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != m:
                raise ProfileError(f"{len(names)} names for {m} alternatives")
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return len(self.rankings)

    @property
    def m(self) -> int:
        return len(self.rankings[0])

    @cached_property
    def positions(self) -> tuple[tuple[int, ...], ...]:
        """``positions[i][a]`` is the rank of ``a`` for voter ``i`` (0 = best)."""
        out = []
        for r in self.rankings:
            pos = [0] * len(r)
            for k, a in enumerate(r):
                pos[a] = k
            out.append(tuple(pos))
        return tuple(out)

    def prefers(self, voter: int, a: int, b: int) -> bool:
        """True when ``voter`` ranks ``a`` strictly above ``b``."""
        pos = self.positions[voter]
        return pos[a] < pos[b]

    def upper_set(self, voter: int, a: int) -> frozenset[int]:
        """Alternatives that ``voter`` ranks strictly above ``a``."""
        r = self.rankings[voter]
        return frozenset(r[: self.positions[voter][a]])

    def restrict(self, voters: Sequence[int], alts: Sequence[int]) -> "Profile":
        """Sub-profile on the given voters and alternatives.

        Alternative ``alts[j]`` becomes id ``j``; each voter's relative order is kept.
        Voter ids may repeat.
        """
        relabel = {a: j for j, a in enumerate(alts)}
        if len(relabel) != len(alts):
            raise ProfileError("alternative indices must be distinct")
        rankings = []
        for i in voters:
            rankings.append(tuple(relabel[a] for a in self.rankings[i] if a in relabel))
        names = None if self.names is None else tuple(self.names[a] for a in alts)
        return Profile(tuple(rankings), names)

    def ballot_counts(self) -> Counter:
        return Counter(self.rankings)


@dataclass(frozen=True)
class AlternativeDistribution:
    """Exact probability weights over alternatives ``0..m-1``."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if not weights:
            raise ProfileError("distribution needs at least one alternative")
        if any(w < 0 for w in weights):
            raise ProfileError("weights must be nonnegative")
        if sum(weights) != 1:
            raise ProfileError(f"weights sum to {sum(weights)}, not 1")

    @property
    def m(self) -> int:
        return len(self.weights)

    def __getitem__(self, a: int) -> Fraction:
        return self.weights[a]

    def measure(self, alts) -> Fraction:
        """Total weight of a set of alternatives."""
        return sum((self.weights[a] for a in alts), Fraction(0))

    def check_matches(self, profile: Profile) -> None:
        if self.m != profile.m:
            raise ProfileError(
                f"distribution has {self.m} weights but profile has {profile.m} alternatives"
            )


@dataclass(frozen=True)
class UtilityProfile:
    """Per-voter utilities in [0, 1]; each voter's row sums to exactly 1."""

    utilities: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(u) for u in row) for row in self.utilities)
        object.__setattr__(self, "utilities", rows)
        if not rows or not rows[0]:
            raise ProfileError("utility profile must be nonempty")
        m = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != m:
                raise ProfileError(f"voter {i} has {len(row)} utilities, expected {m}")
            if any(u < 0 or u > 1 for u in row):
                raise ProfileError(f"voter {i} has a utility outside [0, 1]")
            if sum(row) != 1:
                raise ProfileError(f"voter {i} utilities sum to {sum(row)}, not 1")

    @property
    def n(self) -> int:
        return len(self.utilities)

    @property
    def m(self) -> int:
        return len(self.utilities[0])


@dataclass(frozen=True)
class SubsampleMap:
    voter_indices: tuple[int, ...]
    alt_indices: tuple[int, ...]
    seed: Optional[int]


# ---------------------------------------------------------------------------
# Distributions


def uniform_distribution(m: int) -> AlternativeDistribution:
    if m < 1:
        raise ValueError("uniform distribution needs m >= 1")
    return AlternativeDistribution((Fraction(1, m),) * m)


def btl_distribution(u: UtilityProfile) -> AlternativeDistribution:
    """Average of the voters' utility rows: weight of ``j`` is ``sum_i u[i][j] / n``."""
    n = u.n
    return AlternativeDistribution(
        tuple(sum(row[j] for row in u.utilities) / n for j in range(u.m))
    )


# ---------------------------------------------------------------------------
# Parsing and serialization


def parse_profile(text: str) -> Profile:
    """Parse the strict-order ballot format.

    Lines starting with ``#`` are comments. Each data line reads
    ``COUNT: id,id,...,id`` and is expanded into ``COUNT`` identical voters.
    The number of alternatives is taken from the first data line.
    """
    rankings: list[tuple[int, ...]] = []
    m = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise ProfileError(f"expected 'COUNT: ballot', got {line!r}", lineno)
        try:
            count = int(head.strip())
        except ValueError:
            raise ProfileError(f"bad count {head.strip()!r}", lineno) from None
        if count < 1:
            raise ProfileError(f"count must be positive, got {count}", lineno)
        try:
            ballot = tuple(int(tok) for tok in tail.split(","))
        except ValueError:
            raise ProfileError(f"bad ballot {tail.strip()!r}", lineno) from None
        if m is None:
            m = len(ballot)
        _check_permutation(ballot, m, lineno)
        rankings.extend([ballot] * count)
    if not rankings:
        raise ProfileError("no ballots found")
    return Profile(tuple(rankings))


def serialize_profile(p: Profile) -> str:
    """Inverse of :func:`parse_profile`; identical ballots are merged in first-seen order."""
    lines = [f"# voters: {p.n}", f"# alternatives: {p.m}"]
    for ballot, count in p.ballot_counts().items():
        lines.append(f"{count}: " + ",".join(map(str, ballot)))
    return "\n".join(lines) + "\n"


def parse_weight(token: str) -> Fraction:
    token = token.strip()
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ProfileError(f"bad weight {token!r}") from None


def parse_distribution(text: str) -> AlternativeDistribution:
    """One rational (``1/3``) or decimal (``0.25``) weight per line."""
    weights = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            weights.append(parse_weight(line))
        except ProfileError as exc:
            raise ProfileError(str(exc), lineno) from None
    return AlternativeDistribution(tuple(weights))


def serialize_distribution(d: AlternativeDistribution) -> str:
    return "".join(f"{w}\n" for w in d.weights)


def parse_utilities(text: str) -> UtilityProfile:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c for c in row if c.strip()]
        if not cells or cells[0].lstrip().startswith("#"):
            continue
        try:
            rows.append(tuple(parse_weight(c) for c in cells))
        except ProfileError as exc:
            raise ProfileError(str(exc), lineno) from None
    return UtilityProfile(tuple(rows))


def read_profile(path) -> Profile:
    with open(path, encoding="utf-8") as fh:
        return parse_profile(fh.read())


def read_distribution(path) -> AlternativeDistribution:
    with open(path, encoding="utf-8") as fh:
        return parse_distribution(fh.read())


def read_utilities(path) -> UtilityProfile:
    with open(path, encoding="utf-8") as fh:
        return parse_utilities(fh.read())


# ---------------------------------------------------------------------------
# Subsampling and synthetic profiles


def subsample(p: Profile, k_voters: int, k_alts: int, seed) -> tuple[Profile, SubsampleMap]:
    """Restrict ``p`` to a random set of voters and alternatives (sorted ids)."""
    if not 1 <= k_voters <= p.n:
        raise ValueError(f"k_voters={k_voters} outside 1..{p.n}")
    if not 1 <= k_alts <= p.m:
        raise ValueError(f"k_alts={k_alts} outside 1..{p.m}")
    rng = random.Random(seed)
    voters = tuple(sorted(rng.sample(range(p.n), k_voters)))
    alts = tuple(sorted(rng.sample(range(p.m), k_alts)))
    return p.restrict(voters, alts), SubsampleMap(voters, alts, seed)


def impartial_culture(n: int, m: int, seed) -> Profile:
    rng = random.Random(seed)
    rankings = []
    for _ in range(n):
        r = list(range(m))
        rng.shuffle(r)
        rankings.append(tuple(r))
    return Profile(tuple(rankings))


def _mallows_ranking(rng: random.Random, phi: float, reference: Sequence[int]) -> tuple[int, ...]:
    # repeated insertion: item k goes to slot j with weight phi**(k - j)
    out: list[int] = []
    for k, alt in enumerate(reference):
        if phi == 0:
            slot = k
        else:
            weights = [phi ** (k - j) for j in range(k + 1)]
            slot = rng.choices(range(k + 1), weights=weights)[0]
        out.insert(slot, alt)
    return tuple(out)


def mallows(n: int, m: int, phi, seed, reference: Optional[Sequence[int]] = None) -> Profile:
    """Mallows model around ``reference`` (identity by default), 0 <= phi <= 1."""
    phi = float(phi)
    if not 0 <= phi <= 1:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")
    reference = tuple(range(m)) if reference is None else tuple(reference)
    _check_permutation(reference, m)
    rng = random.Random(seed)
    return Profile(tuple(_mallows_ranking(rng, phi, reference) for _ in range(n)))


def _resolve_reference(ref, m: int, rng: random.Random) -> tuple[int, ...]:
    if ref is None or ref == "identity":
        return tuple(range(m))
    if ref == "reverse":
        return tuple(reversed(range(m)))
    if ref == "random":
        r = list(range(m))
        rng.shuffle(r)
        return tuple(r)
    ref = tuple(int(a) for a in ref)
    _check_permutation(ref, m)
    return ref


def mallows_mixture(n: int, m: int, components: Sequence, seed=None) -> Profile:
    """Voters split across ``(share, reference, phi)`` Mallows components.

    Component sizes are ``round(share * n)`` except the last, which takes the
    remainder; voters are listed component by component. A reference may be
    a ranking or one of ``"identity"``, ``"reverse"``, ``"random"`` (drawn
    from the seed).
    """
    if not components:
        raise ValueError("need at least one component")
    shares = [Fraction(c[0]) for c in components]
    if any(s < 0 for s in shares) or sum(shares) != 1:
        raise ValueError(f"component shares must be nonnegative and sum to 1, got {shares}")
    phis = [float(c[2]) for c in components]
    if any(not 0 <= phi <= 1 for phi in phis):
        raise ValueError(f"phi must lie in [0, 1], got {phis}")
    rng = random.Random(seed)
    refs = [_resolve_reference(c[1], m, rng) for c in components]
    sizes = [math.floor(s * n + Fraction(1, 2)) for s in shares[:-1]]
    sizes.append(n - sum(sizes))
    if sizes[-1] < 0:
        raise ValueError("component shares overflow the voter count")
    ballots = []
    for size, ref, phi in zip(sizes, refs, phis):
        ballots.extend(_mallows_ranking(rng, phi, ref) for _ in range(size))
    return Profile(tuple(ballots))


def two_bloc(
    n: int,
    m: int,
    fraction,
    rankings: Optional[Sequence[Sequence[int]]] = None,
    seed=None,
    phi=0,
) -> Profile:
    """Two voter blocs; the first holds ``round(fraction * n)`` voters.

    Each bloc voter is a Mallows draw with dispersion ``phi`` around the bloc's
    ranking, so ``phi=0`` gives exactly the bloc rankings. Default bloc
    rankings are the identity and its reverse.
    """
    fraction = Fraction(fraction)
    if not 0 <= fraction <= 1:
        raise ValueError(f"bloc fraction must lie in [0, 1], got {fraction}")
    if rankings is None:
        rankings = ("identity", "reverse")
    if len(rankings) != 2:
        raise ValueError("two-bloc model needs exactly two bloc rankings")
    return mallows_mixture(
        n, m, [(fraction, rankings[0], phi), (1 - fraction, rankings[1], phi)], seed
    )


def generate_synthetic(model: str, n: int, m: int, seed, **params) -> Profile:
    """Dispatch on ``model`` in {"impartial-culture", "mallows", "two-bloc", "mixture"}."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    if model == "impartial-culture":
        if params:
            raise ValueError(f"impartial culture takes no parameters, got {sorted(params)}")
        return impartial_culture(n, m, seed)
    if model == "mallows":
        return mallows(n, m, params.pop("phi"), seed, **params)
    if model == "two-bloc":
        return two_bloc(n, m, params.pop("fraction"), seed=seed, **params)
    if model == "mixture":
        return mallows_mixture(n, m, params.pop("components"), seed, **params)
    raise ValueError(f"unknown model {model!r}")
