"""Seeded random instances, inequality-chain checks, fuzzing and the printed-form audit."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from . import formulas as fm
from .bounds import (
    SLACK_ATOL,
    Ladder,
    Profile,
    evaluate_ladder,
    holds,
    slack_tol,
)
from .exponents import BRANCHES, HolderParams, Side
from .formulas import Source
from .gramcore import Instance
from .serialize import instance_from_dict, instance_to_dict, params_from_dict, params_to_dict

TIGHTNESS_FLOOR = SLACK_ATOL
QUANTILES = (0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0)
MAX_VIOLATION_SAMPLES = 50


class Distribution(enum.Enum):
    UNIT_DISK_UNIFORM = "unit_disk"
    GAUSSIAN = "gaussian"
    SPARSE = "sparse"


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    instances: int = 10_000
    n_range: Tuple[int, int] = (1, 8)
    d_range: Tuple[int, int] = (1, 8)
    distribution: Distribution = Distribution.UNIT_DISK_UNIFORM
    sparse_density: float = 0.3
    pq_samples: int = 5
    include_gram_direct: bool = False

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.instances < 0:
            raise ValueError("instances must be >= 0")
        for name, (lo, hi) in (("n_range", self.n_range), ("d_range", self.d_range)):
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must satisfy 1 <= lo <= hi, got {(lo, hi)}")
        if self.pq_samples < 1:
            raise ValueError("pq_samples must be >= 1 (p = 2 is always included)")
        if not 0 < self.sparse_density <= 1:
            raise ValueError("sparse_density must lie in (0, 1]")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["distribution"] = self.distribution.value
        d["n_range"] = list(self.n_range)
        d["d_range"] = list(self.d_range)
        return d


def draw_entries(rng: np.random.Generator, config: FuzzConfig, shape) -> np.ndarray:
    if config.distribution is Distribution.GAUSSIAN:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    radius = np.sqrt(rng.random(shape))
    angle = rng.random(shape) * 2.0 * math.pi
    z = radius * np.exp(1j * angle)
    if config.distribution is Distribution.SPARSE:
        z = np.where(rng.random(shape) < config.sparse_density, z, 0.0)
    return z


def random_instance(config: FuzzConfig, index: int) -> Instance:
    """Instance number ``index`` of the stream; a pure function of ``(config, index)``."""
    rng = np.random.default_rng([config.seed, index])
    n = int(rng.integers(config.n_range[0], config.n_range[1] + 1))
    gram_direct = config.include_gram_direct and rng.random() < 0.5
    if gram_direct:
        h = draw_entries(rng, config, (n, n))
        h = (h + h.conj().T) / 2
        proj = draw_entries(rng, config, n)
        norm_x_sq = float(rng.exponential())
        c = draw_entries(rng, config, n)
        return Instance.from_gram_data(h, proj, norm_x_sq, c)
    d = int(rng.integers(config.d_range[0], config.d_range[1] + 1))
    ys = draw_entries(rng, config, (n, d))
    x = draw_entries(rng, config, d)
    c = draw_entries(rng, config, n)
    return Instance.from_coordinates_data(x, list(ys), c)


def _log_uniform_exponent(rng: np.random.Generator) -> float:
    return 1.0 + 10.0 ** rng.uniform(-2.0, 2.0)


def sample_params(config: FuzzConfig, index: int) -> List[HolderParams]:
    """``pq_samples`` parameter sets for instance ``index``; the first always has ``p = 2``."""
    rng = np.random.default_rng([config.seed, index, 1])
    out = []
    for k in range(config.pq_samples):
        p = 2.0 if k == 0 else _log_uniform_exponent(rng)
        out.append(HolderParams.make(p, _log_uniform_exponent(rng), _log_uniform_exponent(rng)))
    return out


# -- chain checks -------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    lhs_value: float
    rhs_value: float
    slack: float
    passed: bool


def _check(name: str, lhs: float, rhs: float) -> Check:
    return Check(name, lhs, rhs, rhs - lhs, holds(lhs, rhs))


@dataclass(frozen=True)
class ChainReport:
    instance_id: int
    params: Dict[str, float]
    checks: Tuple[Check, ...]

    @property
    def min_slack(self) -> float:
        return min((c.slack for c in self.checks), default=math.inf)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]


def _side_links(inst: Instance, params: HolderParams) -> List[Check]:
    """Each majorant of the two Hölder factors against the factor itself."""
    prof = Profile.of(inst.c.conj(), inst.gram)
    pq = params.pq
    out = []
    for side_terms, t, label in ((fm.P_SIDE_TERMS, pq.p, "p"), (fm.Q_SIDE_TERMS, pq.q, "q")):
        lw = prof.log_wpow(t)
        root = 0.0 if lw == -math.inf else math.exp(lw / t)
        for sel in Side:
            val = prof.evaluate(fm.side_compiled(side_terms is fm.P_SIDE_TERMS, sel), params)
            out.append(_check(f"lemma21: W({label})^(1/{label}) <= factor_{label}[{sel.value}]", root, val))
    return out


def chain_checks(inst: Instance, params: HolderParams, ladder: Optional[Ladder] = None) -> List[Check]:
    """Every inequality link for one instance and parameter set.

    Links that relate ``x`` to the family (Schwarz step, left-hand sides built from
    ``(x, y_i)``) are only meaningful when the data comes from actual vectors and
    are skipped for Gram-direct instances.
    """
    lad = ladder if ladder is not None else evaluate_ladder(inst, params)
    v = lad.as_dict()
    consistent = inst.from_coordinates
    branches = [b.index for b in BRANCHES if f"thm41_branch{b.index}" in v]
    checks: List[Check] = []
    if inst.c is not None:
        checks.append(_check("lemma21: expansion <= M", v["lemma21_lhs"], v["double_sum_M"]))
        checks.append(_check("lemma21: M <= holder", v["double_sum_M"], v["lemma21_first"]))
        for k in branches:
            checks.append(_check(f"lemma21: holder <= branch{k}", v["lemma21_first"], v[f"lemma21_branch{k}"]))
        checks.extend(_side_links(inst, params))
        if consistent:
            checks.append(_check("thm31: lhs <= |x|^2 * expansion", v["thm31_lhs"],
                                 inst.proj.norm_x_sq * v["lemma21_lhs"]))
            checks.append(_check("thm31: lhs <= middle", v["thm31_lhs"], v["thm31_middle"]))
            checks.append(_check("pecaric_11: lhs <= b1", v["thm31_lhs"], v["pecaric_11a"]))
        for k in branches:
            checks.append(_check(f"thm31: middle <= branch{k}", v["thm31_middle"], v[f"thm31_branch{k}"]))
        checks.append(_check("pecaric_11: b1 <= b2", v["pecaric_11a"], v["pecaric_11b"]))
    if consistent:
        checks.append(_check("pecaric_12: lhs <= b1", v["pecaric_12_lhs"], v["pecaric_12a"]))
        checks.append(_check("bombieri_13: lhs <= bound", v["thm41_lhs"], v["bombieri_13"]))
        if "bessel_14" in v:
            checks.append(_check("bessel_14: lhs <= |x|^2", v["thm41_lhs"], v["bessel_14"]))
        checks.append(_check("thm41: lhs <= middle", v["thm41_lhs"], v["thm41_middle"]))
        checks.append(_check("remark: ratio <= bound", v["remark_lhs"], v["remark_bound"]))
    checks.append(_check("pecaric_12: b1 <= b2", v["pecaric_12a"], v["pecaric_12b"]))
    for k in branches:
        checks.append(_check(f"thm41: middle <= branch{k}", v["thm41_middle"], v[f"thm41_branch{k}"]))
    return checks


def check_chain(inst: Instance, params: HolderParams, instance_id: int = 0) -> ChainReport:
    return ChainReport(instance_id, params_to_dict(params), tuple(chain_checks(inst, params)))


# -- fuzzing ------------------------------------------------------------------


def _tightness(value: float, lhs: float) -> float:
    return value / max(lhs, TIGHTNESS_FLOOR)


def _quantiles(values: List[float]) -> Dict[str, float]:
    arr = np.asarray(values, dtype=float)
    return {f"q{int(round(100 * q)):03d}": float(np.quantile(arr, q)) for q in QUANTILES}


@dataclass
class FuzzSummary:
    config: FuzzConfig
    param_sets: int = 0
    total_checks: int = 0
    violations: int = 0
    violation_samples: List[dict] = field(default_factory=list)
    link_min_slack: Dict[str, float] = field(default_factory=dict)
    link_min_rel_slack: Dict[str, float] = field(default_factory=dict)
    tightness: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "kind": "fuzz_summary",
            "config": self.config.as_dict(),
            "param_sets": self.param_sets,
            "total_checks": self.total_checks,
            "violations": self.violations,
            "violation_samples": self.violation_samples,
            "link_min_slack": dict(sorted(self.link_min_slack.items())),
            "link_min_rel_slack": dict(sorted(self.link_min_rel_slack.items())),
            "tightness": dict(sorted(self.tightness.items())),
        }


def iter_cases(config: FuzzConfig) -> Iterable[Tuple[int, Instance, HolderParams]]:
    for index in range(config.instances):
        inst = random_instance(config, index)
        for params in sample_params(config, index):
            yield index, inst, params


def fuzz(config: FuzzConfig) -> FuzzSummary:
    """Run every chain check over the seeded stream and aggregate the results."""
    summary = FuzzSummary(config)
    tight: Dict[str, List[float]] = defaultdict(list)
    min_slack: Dict[str, float] = {}
    min_rel: Dict[str, float] = {}
    for index, inst, params in iter_cases(config):
        ladder = evaluate_ladder(inst, params)
        checks = chain_checks(inst, params, ladder)
        summary.param_sets += 1
        summary.total_checks += len(checks)
        for chk in checks:
            rel = chk.slack / max(abs(chk.rhs_value), TIGHTNESS_FLOOR)
            if chk.name not in min_slack or chk.slack < min_slack[chk.name]:
                min_slack[chk.name] = chk.slack
            if chk.name not in min_rel or rel < min_rel[chk.name]:
                min_rel[chk.name] = rel
            if not chk.passed:
                summary.violations += 1
                if len(summary.violation_samples) < MAX_VIOLATION_SAMPLES:
                    summary.violation_samples.append({
                        "index": index, "check": chk.name, "lhs": chk.lhs_value, "rhs": chk.rhs_value,
                        "tolerance": slack_tol(chk.rhs_value), "params": params_to_dict(params),
                        "instance": instance_to_dict(inst),
                    })
        if inst.from_coordinates:
            for b in ladder.bounds:
                if b.bounds is not None and b.bounds in ladder.lhs and ladder.lhs[b.bounds] > TIGHTNESS_FLOOR:
                    tight[b.name].append(_tightness(b.value, ladder.lhs[b.bounds]))
    summary.link_min_slack = min_slack
    summary.link_min_rel_slack = min_rel
    summary.tightness = {name: _quantiles(vals) for name, vals in tight.items()}
    return summary


# -- printed-form audit -------------------------------------------------------


def _middles(ladder: Ladder) -> Dict[Source, float]:
    return {Source.LEMMA21: ladder.value("lemma21_first"), Source.THM31: ladder.value("thm31_middle"),
            Source.THM41: ladder.value("thm41_middle")}


def _coeffs(inst: Instance, source: Source):
    if source is Source.LEMMA21:
        return inst.c.conj()
    if source is Source.THM31:
        return inst.c
    return inst.proj.proj


def audit_values(inst: Instance, params: HolderParams, source: Source, branch_id: int) -> Dict[str, float]:
    """Printed, derived and middle values for one (source, branch) on one instance."""
    branch = BRANCHES[branch_id - 1]
    prof = Profile.of(_coeffs(inst, source), inst.gram, inst.proj.norm_x_sq)
    ladder = evaluate_ladder(inst, params)
    return {
        "printed": prof.evaluate(fm.printed(branch_id, source), params),
        "derived": prof.evaluate(fm.derived(branch, source), params),
        "middle": _middles(ladder)[source],
    }


@dataclass
class AuditRow:
    source: str
    branch: int
    printed_formula: str
    derived_formula: str
    symbolic_match: bool
    evaluated: int = 0
    holds: int = 0
    violations: int = 0
    bitwise_equal: int = 0
    worst_margin: float = math.inf
    worst: Optional[dict] = None


@dataclass
class AuditReport:
    config: FuzzConfig
    rows: List[AuditRow]

    def row(self, source: Source, branch_id: int) -> AuditRow:
        for r in self.rows:
            if r.source == Source(source).value and r.branch == branch_id:
                return r
        raise KeyError((source, branch_id))

    def counterexamples(self) -> List[dict]:
        return [r.worst for r in self.rows if r.worst is not None and r.violations > 0]

    def as_dict(self) -> dict:
        rows = []
        for r in self.rows:
            d = asdict(r)
            if d["worst_margin"] == math.inf:
                d["worst_margin"] = None
            rows.append(d)
        return {"kind": "audit_report", "config": self.config.as_dict(), "rows": rows}


def counterexample_record(inst: Instance, params: HolderParams, source: Source, branch_id: int, index: int,
                          values: Dict[str, float]) -> dict:
    """A replayable instance document with the audit finding attached."""
    doc = instance_to_dict(inst)
    doc["params"] = params_to_dict(params)
    doc["audit"] = {"source": source.value, "branch": branch_id, "index": index,
                    "printed": values["printed"], "derived": values["derived"], "middle": values["middle"]}
    return doc


def replay_counterexample(doc: dict) -> Dict[str, float]:
    """Recompute printed / derived / middle values from a counterexample document."""
    inst = instance_from_dict(doc)
    params = params_from_dict(doc["params"])
    meta = doc["audit"]
    return audit_values(inst, params, Source(meta["source"]), int(meta["branch"]))


def audit_printed_forms(config: FuzzConfig) -> AuditReport:
    """Test every typeset branch formula against the expression it claims to bound."""
    rows: Dict[Tuple[Source, int], AuditRow] = {}
    for src in Source:
        for b in BRANCHES:
            pf, df = fm.printed(b.index, src), fm.derived(b, src)
            rows[(src, b.index)] = AuditRow(src.value, b.index, fm.render(pf), fm.render(df), pf == df)
    profiles_for = (Source.LEMMA21, Source.THM31, Source.THM41)
    for index, inst, params in iter_cases(config):
        ladder = evaluate_ladder(inst, params)
        middles = _middles(ladder)
        for src in profiles_for:
            prof = Profile.of(_coeffs(inst, src), inst.gram, inst.proj.norm_x_sq)
            middle = middles[src]
            for b in BRANCHES:
                row = rows[(src, b.index)]
                printed = prof.evaluate(fm.printed_compiled(b.index, src), params)
                derived = prof.evaluate(fm.derived_compiled(b, src), params)
                row.evaluated += 1
                if printed == derived:
                    row.bitwise_equal += 1
                if holds(middle, printed):
                    row.holds += 1
                else:
                    row.violations += 1
                margin = (printed - middle) / max(middle, TIGHTNESS_FLOOR)
                if margin < row.worst_margin:
                    row.worst_margin = margin
                    row.worst = counterexample_record(inst, params, src, b.index, index,
                                                      {"printed": printed, "derived": derived, "middle": middle})
    for row in rows.values():
        if row.worst is not None:
            replay = replay_counterexample(row.worst)
            meta = row.worst["audit"]
            meta["replay_verified"] = all(
                math.isclose(replay[k], meta[k], rel_tol=1e-12, abs_tol=0.0) or replay[k] == meta[k]
                for k in ("printed", "derived", "middle"))
    return AuditReport(config, list(rows.values()))


__all__ = [
    "Distribution", "FuzzConfig", "draw_entries", "random_instance", "sample_params", "Check", "ChainReport",
    "chain_checks", "check_chain", "FuzzSummary", "fuzz", "AuditRow", "AuditReport", "audit_printed_forms",
    "audit_values", "counterexample_record", "replay_counterexample",
]
