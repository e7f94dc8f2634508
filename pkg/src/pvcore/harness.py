"""Replicated subsampling experiments, insertion evaluation and aggregation.

Each replication fixes a full profile (a ballot file, or a fresh synthetic
draw), then draws ``subsamples_per_replication`` voter/alternative subsets.
Every rule runs on the small profile; its winner is mapped back and scored
by its critical epsilon on the full profile.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .profile import (
    AlternativeDistribution,
    Profile,
    ProfileError,
    btl_distribution,
    generate_synthetic,
    read_distribution,
    read_profile,
    read_utilities,
    subsample,
    uniform_distribution,
)
from .pvc import CriticalEpsilonResult, critical_epsilon, max_blocking_slack
from .rules import RULES, run_rule

AUDIT_MAX_VOTERS = 12
DEFAULT_CDF_GRID = tuple(Fraction(k, 100) for k in range(21)) + (
    Fraction(1, 4),
    Fraction(1, 2),
    Fraction(3, 4),
    Fraction(1),
)


@dataclass
class ExperimentConfig:
    """``profile`` is a ballot-file path or a synthetic spec such as
    ``{"model": "two-bloc", "n": 100, "m": 100, "fraction": "1/2", "phi": 0.85}``.
    ``distribution`` is ``"uniform"``, a weight-file path or ``"btl:<utility csv>"``.
    """

    profile: Union[str, dict]
    distribution: str = "uniform"
    sub_voters: int = 20
    sub_alts: int = 20
    replications: int = 10
    subsamples_per_replication: int = 4
    rules: Sequence[str] = RULES
    seed: int = 0
    insertions: Sequence[str] = ()
    audit: bool = False
    workers: int = 1
    base_dir: Optional[str] = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.subsamples_per_replication < 1:
            raise ValueError("subsamples_per_replication must be at least 1")
        for rule in self.rules:
            if rule not in RULES and rule != "veto":
                raise ValueError(f"unknown rule {rule!r}")

    def path(self, name: str) -> str:
        if self.base_dir is None or os.path.isabs(name):
            return name
        return os.path.join(self.base_dir, name)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[str] = None) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        data = dict(data)
        data.setdefault("base_dir", base_dir)
        for key in ("rules", "insertions"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return ExperimentConfig.from_dict(data, base_dir=str(Path(path).parent))


@dataclass(frozen=True)
class EvaluationRecord:
    replication: int
    subsample: int
    rule: str
    winner: int
    critical_epsilon: Fraction
    trace: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        out = asdict(self)
        out["critical_epsilon"] = str(self.critical_epsilon)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EvaluationRecord":
        return cls(
            int(data["replication"]),
            int(data["subsample"]),
            str(data["rule"]),
            int(data["winner"]),
            Fraction(data["critical_epsilon"]),
            dict(data.get("trace") or {}),
        )

    def sort_key(self):
        return (self.replication, self.subsample, self.rule)


@dataclass(frozen=True)
class InsertedStatement:
    """A new statement placed at ``positions[i]`` (0 = top) in voter ``i``'s ranking."""

    label: str
    positions: tuple[int, ...]


def parse_insertion(text: str) -> InsertedStatement:
    """First data line is the label, then one ``voter_id,position`` line per voter."""
    label = None
    positions: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if label is None:
            label = line
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ProfileError(f"expected 'voter_id,position', got {line!r}", lineno)
        try:
            voter, pos = int(parts[0]), int(parts[1])
        except ValueError:
            raise ProfileError(f"bad insertion line {line!r}", lineno) from None
        if voter in positions:
            raise ProfileError(f"voter {voter} listed twice", lineno)
        positions[voter] = pos
    if label is None:
        raise ProfileError("insertion file is empty")
    n = len(positions)
    if sorted(positions) != list(range(n)):
        raise ProfileError("insertion file must list voters 0..n-1 exactly once")
    return InsertedStatement(label, tuple(positions[i] for i in range(n)))


def read_insertion(path) -> InsertedStatement:
    with open(path, encoding="utf-8") as fh:
        return parse_insertion(fh.read())


def insert_statement(
    p: Profile, d: AlternativeDistribution, ins: InsertedStatement
) -> tuple[Profile, AlternativeDistribution]:
    """Extended instance with the statement as alternative ``m`` carrying weight 0."""
    d.check_matches(p)
    if len(ins.positions) != p.n:
        raise ValueError(f"insertion covers {len(ins.positions)} voters, profile has {p.n}")
    m = p.m
    rankings = []
    for r, pos in zip(p.rankings, ins.positions):
        if not 0 <= pos <= m:
            raise ValueError(f"insertion position {pos} outside 0..{m}")
        rankings.append(r[:pos] + (m,) + r[pos:])
    return Profile(tuple(rankings)), AlternativeDistribution(d.weights + (Fraction(0),))


def evaluate_insertion(
    p: Profile, d: AlternativeDistribution, ins: InsertedStatement
) -> CriticalEpsilonResult:
    ext, ext_d = insert_statement(p, d, ins)
    return critical_epsilon(ext, ext_d, p.m)


# ---------------------------------------------------------------------------
# Experiment loop


def derive_seed(master: int, *keys: int) -> int:
    """Independent per-task seed from the master seed and task coordinates."""
    return int(np.random.SeedSequence([master, *keys]).generate_state(1)[0])


def _rule_key(rule: str) -> int:
    return zlib.crc32(rule.encode())


def resolve_distribution(spec: str, m: int, cfg: Optional[ExperimentConfig] = None) -> AlternativeDistribution:
    locate = cfg.path if cfg is not None else (lambda s: s)
    if spec == "uniform":
        return uniform_distribution(m)
    if spec.startswith("btl:"):
        d = btl_distribution(read_utilities(locate(spec[4:])))
    else:
        d = read_distribution(locate(spec))
    if d.m != m:
        raise ProfileError(f"distribution has {d.m} weights but profile has {m} alternatives")
    return d


def replication_profile(cfg: ExperimentConfig, replication: int) -> Profile:
    if isinstance(cfg.profile, str):
        return read_profile(cfg.path(cfg.profile))
    spec = dict(cfg.profile)
    model, n, m = spec.pop("model"), spec.pop("n"), spec.pop("m")
    return generate_synthetic(model, n, m, derive_seed(cfg.seed, 0, replication), **spec)


def run_replication(cfg: ExperimentConfig, replication: int) -> list[EvaluationRecord]:
    p = replication_profile(cfg, replication)
    if cfg.sub_voters > p.n or cfg.sub_alts > p.m:
        raise ValueError(
            f"subsample {cfg.sub_voters}x{cfg.sub_alts} exceeds profile {p.n}x{p.m}"
        )
    d = resolve_distribution(cfg.distribution, p.m, cfg)
    cache: dict[int, Fraction] = {}

    def score(a: int) -> Fraction:
        if a not in cache:
            value = critical_epsilon(p, d, a).value
            if cfg.audit and p.n <= AUDIT_MAX_VOTERS:
                check = max_blocking_slack(p, d, a).value
                if check != value:
                    raise RuntimeError(f"audit mismatch for alternative {a}: {value} != {check}")
            cache[a] = value
        return cache[a]

    records = []
    for s in range(cfg.subsamples_per_replication):
        sub, mapping = subsample(p, cfg.sub_voters, cfg.sub_alts, derive_seed(cfg.seed, 1, replication, s))
        for rule in cfg.rules:
            outcome = run_rule(rule, sub, seed=derive_seed(cfg.seed, 2, replication, s, _rule_key(rule)))
            winner = mapping.alt_indices[outcome.winner]
            trace = {"local_winner": outcome.winner, "steps": len(outcome.trace)}
            records.append(EvaluationRecord(replication, s, rule, winner, score(winner), trace))
    for path in cfg.insertions:
        ins = read_insertion(cfg.path(path))
        result = evaluate_insertion(p, d, ins)
        records.append(
            EvaluationRecord(replication, -1, f"insert:{ins.label}", p.m, result.value, {})
        )
    return records


def run_experiment(cfg: ExperimentConfig) -> list[EvaluationRecord]:
    """All records, sorted by (replication, subsample, rule).

    Subsample ``-1`` marks insertion records, which use the full profile.
    """
    reps = range(cfg.replications)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(run_replication, [cfg] * len(reps), reps))
    else:
        chunks = [run_replication(cfg, r) for r in reps]
    records = [rec for chunk in chunks for rec in chunk]
    return sorted(records, key=EvaluationRecord.sort_key)


# ---------------------------------------------------------------------------
# Aggregation


@dataclass(frozen=True)
class RuleSummary:
    rule: str
    count: int
    mean: Fraction
    p99: Fraction
    frac_lt_001: Fraction
    cdf: tuple[tuple[Fraction, Fraction], ...]


def nearest_rank(values: Sequence[Fraction], q: Fraction) -> Fraction:
    ordered = sorted(values)
    rank = max(1, math.ceil(q * len(ordered)))
    return ordered[rank - 1]


def _rule_order(rule: str):
    return (RULES.index(rule) if rule in RULES else len(RULES), rule)


def aggregate(records: Sequence[EvaluationRecord], grid=DEFAULT_CDF_GRID) -> list[RuleSummary]:
    """Per rule: mean, nearest-rank P99, share below 0.01 and CDF at ``grid``."""
    if not records:
        raise ValueError("no records to aggregate")
    by_rule: dict[str, list[Fraction]] = {}
    for rec in records:
        by_rule.setdefault(rec.rule, []).append(rec.critical_epsilon)
    out = []
    for rule in sorted(by_rule, key=_rule_order):
        vals = by_rule[rule]
        k = len(vals)
        cdf = tuple((Fraction(e), Fraction(sum(v <= e for v in vals), k)) for e in grid)
        out.append(
            RuleSummary(
                rule,
                k,
                sum(vals, Fraction(0)) / k,
                nearest_rank(vals, Fraction(99, 100)),
                Fraction(sum(v < Fraction(1, 100) for v in vals), k),
                cdf,
            )
        )
    return out


def summary_rows(summaries: Sequence[RuleSummary]) -> list[dict]:
    return [
        {
            "rule": s.rule,
            "mean": float(s.mean),
            "p99": float(s.p99),
            "frac_lt_0.01": float(s.frac_lt_001),
        }
        for s in summaries
    ]


def cdf_rows(summaries: Sequence[RuleSummary]) -> list[dict]:
    return [
        {"rule": s.rule, "epsilon": float(e), "cumulative_fraction": float(f)}
        for s in summaries
        for e, f in s.cdf
    ]


def to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def records_jsonl(records: Sequence[EvaluationRecord]) -> str:
    return "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in records)


def read_records(path) -> list[EvaluationRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(EvaluationRecord.from_json(json.loads(line)))
    return out


def write_outputs(records: Sequence[EvaluationRecord], out_dir, grid=DEFAULT_CDF_GRID) -> list[RuleSummary]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = aggregate(records, grid)
    (out / "records.jsonl").write_text(records_jsonl(records), encoding="utf-8")
    (out / "summary.csv").write_text(to_csv(summary_rows(summaries)), encoding="utf-8")
    (out / "cdf.csv").write_text(to_csv(cdf_rows(summaries)), encoding="utf-8")
    return summaries
