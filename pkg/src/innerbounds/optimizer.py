"""Choose the Hölder exponents (and branch) that make a bound family smallest.

Every branch is a product of a p-side factor depending on ``(p, alpha)`` and a
q-side factor depending on ``(p, gamma)``.  For fixed ``p`` the two secondary
exponents therefore decouple, so each branch is minimized as a one-dimensional
profile ``p -> min_alpha f_p(p, alpha) * min_gamma f_q(p, gamma)``.  Every
one-dimensional search is a grid scan followed by golden-section refinement in
log-coordinates inside the bracket around the grid minimum.

All comparisons happen on logarithms; the reported value is recomputed by the
bounds module at the chosen parameters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import formulas as fm
from .bounds import (BoundError, BoundValue, Profile, _exp, _log, bombieri_bound, lhs_pecaric, log_sum_pow,
                     norm_squared_expansion)
from .exponents import BRANCHES, P_MIN, BranchSelector, HolderParams, Side, conjugate, require
from .formulas import Source
from .gramcore import Instance

GRID_LO, GRID_HI = P_MIN, 100.0
ANCHOR = 2.0
TIE_RTOL = 1e-13
SKIP_FLAG_FRACTION = 0.01
TIGHTNESS_FLOOR = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class OptimError(ValueError):
    """Invalid optimizer configuration or an instance that lacks what the target needs."""


class Target(enum.Enum):
    LEMMA21_FIRST = "lemma21_first"
    BRANCH_1 = "branch_1"
    BRANCH_2 = "branch_2"
    BRANCH_3 = "branch_3"
    BRANCH_4 = "branch_4"
    BRANCH_5 = "branch_5"
    BRANCH_6 = "branch_6"
    BRANCH_7 = "branch_7"
    BRANCH_8 = "branch_8"
    BRANCH_9 = "branch_9"
    THM31 = "thm31"
    THM41 = "thm41"
    REMARK = "remark"

    @property
    def branch(self) -> Optional[BranchSelector]:
        if self.value.startswith("branch_"):
            return BranchSelector.from_index(int(self.value[-1]))
        return None

    @property
    def source(self) -> Optional[Source]:
        if self is Target.THM31:
            return Source.THM31
        if self is Target.THM41:
            return Source.THM41
        if self is Target.REMARK:
            return None
        return Source.LEMMA21

    @property
    def needs_c(self) -> bool:
        return self.source in (Source.LEMMA21, Source.THM31)


class Scope(enum.Enum):
    SINGLE_BRANCH = "single_branch"
    BEST_OF_ALL = "best_of_all"


def log_grid(points: int, lo: float = GRID_LO, hi: float = GRID_HI) -> Tuple[float, ...]:
    if points < 1:
        raise OptimError("a grid needs at least one point")
    if points == 1:
        return (ANCHOR,)
    xs = np.exp(np.linspace(math.log(lo), math.log(hi), points))
    xs[0], xs[-1] = lo, hi  # exp(log(x)) need not round-trip
    return tuple(float(v) for v in xs)


@dataclass(frozen=True)
class OptimConfig:
    """Search settings.

    With ``SINGLE_BRANCH`` the objective is the single expression the target names
    (the Hölder middle term for ``THM31``/``THM41``, branch k for ``BRANCH_k``).
    With ``BEST_OF_ALL`` it is the smallest of the nine branches of the target's
    family; ``LEMMA21_FIRST`` and ``BRANCH_k`` both use the coefficient-level family.
    """

    p_grid: Tuple[float, ...] = field(default_factory=lambda: log_grid(40))
    secondary_grid: Tuple[float, ...] = field(default_factory=lambda: log_grid(20))
    refine_iters: int = 32
    target: Target = Target.THM31
    objective_scope: Scope = Scope.BEST_OF_ALL

    def __post_init__(self):
        for name in ("p_grid", "secondary_grid"):
            grid = tuple(float(v) for v in getattr(self, name))
            if not grid:
                raise OptimError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise OptimError(f"{name} must be strictly increasing")
            bad = [v for v in grid if not (math.isfinite(v) and GRID_LO <= v <= GRID_HI)]
            if bad:
                raise OptimError(f"{name} entry {bad[0]!r} outside [{GRID_LO}, {GRID_HI}]")
            object.__setattr__(self, name, grid)
        if int(self.refine_iters) != self.refine_iters or self.refine_iters < 0:
            raise OptimError(f"refine_iters must be a nonnegative integer, got {self.refine_iters!r}")
        object.__setattr__(self, "target", Target(self.target))
        object.__setattr__(self, "objective_scope", Scope(self.objective_scope))

    def as_dict(self) -> dict:
        return {"p_grid": list(self.p_grid), "secondary_grid": list(self.secondary_grid),
                "refine_iters": self.refine_iters, "target": self.target.value,
                "objective_scope": self.objective_scope.value}


@dataclass(frozen=True)
class OptimResult:
    best_value: float
    best_params: HolderParams
    best_branch: Optional[BranchSelector]
    evaluations: int
    lhs: float
    tightness: float
    skipped: int = 0
    baseline_value: float = math.nan  # same target at p = q = 2 (alpha = gamma = 2 where used)
    target: Target = Target.THM31
    scope: Scope = Scope.BEST_OF_ALL

    @property
    def skipped_fraction(self) -> float:
        return self.skipped / self.evaluations if self.evaluations else 0.0

    @property
    def flagged(self) -> bool:
        return self.skipped_fraction > SKIP_FLAG_FRACTION

    def as_dict(self) -> dict:
        return {
            "target": self.target.value,
            "scope": self.scope.value,
            "best_value": self.best_value,
            "best_params": self.best_params.as_dict(),
            "best_branch": None if self.best_branch is None else self.best_branch.index,
            "evaluations": self.evaluations,
            "skipped": self.skipped,
            "skipped_fraction": self.skipped_fraction,
            "flagged": self.flagged,
            "lhs": self.lhs,
            "tightness": self.tightness,
            "baseline_value": self.baseline_value,
        }


# -- one-dimensional search ---------------------------------------------------


class _Counter:
    __slots__ = ("evals", "skipped")

    def __init__(self):
        self.evals = 0
        self.skipped = 0

    def call(self, fn: Callable[[float], float], x: float) -> float:
        self.evals += 1
        try:
            v = fn(x)
        except (OverflowError, ValueError, ZeroDivisionError):
            v = math.nan
        if math.isnan(v) or v == math.inf:
            self.skipped += 1
            return math.inf
        return v


def _pick(points: Dict[float, float]) -> Tuple[float, float]:
    """Smallest value; near-ties go to the anchor, then to the smallest coordinate."""
    vmin = min(points.values())
    if vmin == math.inf:
        return ANCHOR, math.inf
    if vmin == -math.inf:
        close = [x for x, v in points.items() if v == -math.inf]
    else:
        close = [x for x, v in points.items() if v - vmin <= TIE_RTOL * max(1.0, abs(vmin)) or v <= vmin]
    x = ANCHOR if ANCHOR in close else min(close)
    return x, points[x]


def search_1d(fn: Callable[[float], float], grid: Sequence[float], iters: int, counter: _Counter
              ) -> Tuple[float, float]:
    """Minimize ``fn`` (a log-value) over ``grid`` plus the anchor, then refine by golden section."""
    points: Dict[float, float] = {ANCHOR: counter.call(fn, ANCHOR)}
    for x in grid:
        if x not in points:
            points[x] = counter.call(fn, x)
    nodes = sorted(points)
    vals = [points[x] for x in nodes]
    i = min(range(len(nodes)), key=lambda k: (vals[k], nodes[k]))
    def at(logx: float) -> float:
        x = math.exp(logx)
        if x not in points:
            points[x] = counter.call(fn, x)
        return points[x]

    if len(nodes) > 1 and iters > 0 and math.isfinite(vals[i]):
        a = math.log(nodes[max(i - 1, 0)])
        b = math.log(nodes[min(i + 1, len(nodes) - 1)])
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc, fd = at(c), at(d)
        for _ in range(iters - 2):
            if fc <= fd:
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = at(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = at(d)
    return _pick(points)


# -- objectives in log space --------------------------------------------------


class _Sides:
    """Log of the p-side and q-side majorants for one coefficient profile, secondaries minimized."""

    def __init__(self, prof: Profile, config: OptimConfig, counter: _Counter):
        self.prof = prof
        self.config = config
        self.counter = counter
        self.la = _log(max(prof.a))
        self.lS = _log(prof.gram.total_abs_sum)
        self.lR = _log(max(prof.r))
        self._memo: Dict[tuple, Tuple[float, Optional[float]]] = {}

    def _dh(self, t: float, sec: float) -> float:
        # (sum a^(sec*t))^(1/(sec*t)) * (sum r^conj(sec))^(1/(conj(sec)*t))
        s = conjugate(sec)
        return self.prof.log_apow(sec * t) / (sec * t) + self.prof.log_rpow(s) / (s * t)

    def side(self, sel: Side, t: float, p_side: bool) -> Tuple[float, Optional[float]]:
        """Log-value of the side factor at exponent ``t`` (p or q) and the secondary chosen."""
        key = (sel, t, p_side)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if sel is Side.MAX_ALL:
            out = (self.la + self.lS / t, None)
        elif sel is Side.MAX_ROW:
            out = ((self.prof.log_apow(t) + self.lR) / t, None)
        else:
            sec, v = search_1d(lambda s: self._dh(t, s), self.config.secondary_grid, self.config.refine_iters,
                               self.counter)
            out = (v, sec)
        self._memo[key] = out
        return out

    def branch(self, b: BranchSelector, p: float) -> Tuple[float, Optional[float], Optional[float]]:
        q = conjugate(p)
        lp, alpha = self.side(b.p_side, p, True)
        lq, gamma = self.side(b.q_side, q, False)
        self.counter.evals += 1
        return lp + lq, alpha, gamma


def _coefficients(inst: Instance, target: Target) -> np.ndarray:
    if target.needs_c:
        if inst.c is None:
            raise OptimError(f"target {target.value} needs coefficients: field 'c' is missing")
        return np.abs(inst.c)
    return np.abs(inst.proj.proj)


def _target_lhs(inst: Instance, target: Target) -> float:
    src = target.source
    if src is Source.LEMMA21:
        return norm_squared_expansion(inst.c.conj(), inst.gram)
    if src is Source.THM31:
        return lhs_pecaric(inst.proj, inst.c)
    if src is Source.THM41:
        return bombieri_bound(inst.proj, inst.gram)[0]
    return math.fsum(float(v) ** 2 for v in np.abs(inst.proj.proj)) ** 2


def _params_for(p: float, b: Optional[BranchSelector], alpha: Optional[float], gamma: Optional[float]) -> HolderParams:
    if b is None:
        return HolderParams.make(p)
    return HolderParams.make(p, alpha if b.needs_ab else None, gamma if b.needs_gd else None)


def target_value(inst: Instance, target: Target, params: HolderParams, branch: Optional[BranchSelector]) -> float:
    """The bound the target names at ``params``; ``branch=None`` means the non-branch expression."""
    target = Target(target)
    a = _coefficients(inst, target)
    prof = Profile(a.tolist(), inst.gram, inst.proj.norm_x_sq)
    src = target.source
    if branch is not None:
        if src is None:
            raise OptimError("the remark target has no branches")
        require(params, branch)
        return prof.evaluate(fm.derived_compiled(branch, src), params)
    pq = params.pq
    if src is None:
        return _exp(_log(inst.proj.norm_x_sq) + _log(inst.gram.max_row_sum)
                    + log_sum_pow(prof.a, pq.p) / pq.p + log_sum_pow(prof.a, pq.q) / pq.q)
    holder = prof.log_holder(pq)
    if src is Source.LEMMA21:
        return _exp(holder)
    if src is Source.THM31:
        return _exp(_log(inst.proj.norm_x_sq) + holder)
    return _exp(0.5 * (_log(inst.proj.norm_x_sq) + holder))


def _branches(config: OptimConfig) -> List[Optional[BranchSelector]]:
    t = config.target
    if config.objective_scope is Scope.BEST_OF_ALL and t is not Target.REMARK:
        return list(BRANCHES)
    if t.branch is not None:
        return [t.branch]
    return [None]


def _baseline(inst: Instance, config: OptimConfig) -> float:
    p2 = HolderParams.make(ANCHOR, ANCHOR, ANCHOR)
    vals = [target_value(inst, config.target, p2 if b is not None else HolderParams.make(ANCHOR), b)
            for b in _branches(config)]
    return min(vals)


def optimize(inst: Instance, config: OptimConfig = OptimConfig()) -> OptimResult:
    """Grid scan plus golden-section refinement over p (and alpha, gamma where a branch uses them)."""
    target = config.target
    a = _coefficients(inst, target)
    prof = Profile(a.tolist(), inst.gram, inst.proj.norm_x_sq)
    counter = _Counter()
    sides = _Sides(prof, config, counter)

    best: Optional[Tuple[float, int, float, Optional[BranchSelector], Optional[float], Optional[float]]] = None
    for b in _branches(config):
        if b is None:
            if target.source is None:
                fn = lambda p: log_sum_pow(prof.a, p) / p + log_sum_pow(prof.a, conjugate(p)) / conjugate(p)
            else:
                fn = lambda p: prof.log_holder(HolderParams.make(p).pq)
            p, v = search_1d(fn, config.p_grid, config.refine_iters, counter)
            alpha = gamma = None
        else:
            p, v = search_1d(lambda x: sides.branch(b, x)[0], config.p_grid, config.refine_iters, counter)
            _, alpha, gamma = sides.branch(b, p)
            counter.evals -= 1  # lookup of an already evaluated point
        if v == math.inf:
            continue
        idx = 0 if b is None else b.index
        if best is None or v < best[0] - TIE_RTOL * max(1.0, abs(best[0])):
            best = (v, idx, p, b, alpha, gamma)
    if best is None:
        raise OptimError("every evaluated parameter point overflowed")
    _, _, p, b, alpha, gamma = best
    params = _params_for(p, b, alpha, gamma)
    value = target_value(inst, target, params, b)
    lhs = _target_lhs(inst, target)
    return OptimResult(value, params, b, counter.evals, lhs, value / max(lhs, TIGHTNESS_FLOOR), counter.skipped,
                       _baseline(inst, config), target, config.objective_scope)


def best_branch(inst: Instance, params: HolderParams) -> Tuple[BranchSelector, BoundValue]:
    """Smallest derived coefficient-level bound over the nine branches; near-ties go to the lowest index."""
    if inst.c is None:
        raise BoundError("best_branch needs coefficients: field 'c' is missing")
    for b in BRANCHES:
        require(params, b)
    prof = Profile.of(inst.c, inst.gram, inst.proj.norm_x_sq)
    vals = [prof.evaluate(fm.derived_compiled(b, Source.THM31), params) for b in BRANCHES]
    vmin = min(vals)
    k = next(i for i, v in enumerate(vals) if v <= vmin * (1.0 + TIE_RTOL) or v <= vmin)
    b = BRANCHES[k]
    return b, BoundValue(f"thm31_branch{b.index}", vals[k], params.for_branch(b), bounds="thm31_lhs",
                         branch=b.index)


# -- dense-grid cross-check ---------------------------------------------------


def _lse(logs: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(logs, axis=axis, keepdims=True)
    finite = np.isfinite(m)
    shift = np.where(finite, m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(logs - shift), axis=axis, keepdims=True)) + shift
    return np.squeeze(np.where(finite, out, -np.inf), axis=axis)


def _log_power_sums(values: np.ndarray, t: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """log sum_i w_i v_i**t for every t (any shape); zero entries are dropped."""
    pos = values > 0
    if not pos.any():
        return np.full(t.shape, -np.inf)
    lv = np.log(values[pos])
    lw = np.zeros_like(lv) if weights is None else np.log(weights[pos])
    return _lse(t[..., None] * lv + lw)


@dataclass(frozen=True)
class DenseResult:
    value: float  # after local polishing of the best grid cell
    scan_value: float  # best value on the grid itself
    p: float
    alpha: Optional[float]
    gamma: Optional[float]
    branch: Optional[int]


def _bracket(grid: np.ndarray, k: int) -> Tuple[float, float]:
    return math.log(grid[max(k - 1, 0)]), math.log(grid[min(k + 1, len(grid) - 1)])


def _brent(fn: Callable[[float], float], lo: float, hi: float, x0: float, f0: float) -> Tuple[float, float]:
    """Bounded Brent minimization of ``fn`` over log-coordinate ``[lo, hi]``; never worse than ``(x0, f0)``."""
    if hi <= lo:
        return x0, f0
    res = minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-11, "maxiter": 200})
    if np.isfinite(res.fun) and res.fun < f0:
        return float(res.x), float(res.fun)
    return x0, f0


class _DenseFamily:
    """Vectorized log-objectives for the cross-check, written directly with numpy."""

    def __init__(self, a: np.ndarray, r: np.ndarray, total: float, grid: np.ndarray):
        self.a, self.r, self.grid = a, r, grid
        with np.errstate(divide="ignore"):
            self.la, self.lS, self.lR = np.log(a.max()), np.log(total), np.log(r.max())

    def dh(self, t: float, sec: np.ndarray) -> np.ndarray:
        sc = sec / (sec - 1.0)
        return _log_power_sums(self.a, sec * t) / (sec * t) + _log_power_sums(self.r, sc) / (sc * t)

    def side(self, sel: Side, t: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        if sel is Side.MAX_ALL:
            return self.la + self.lS / t, None
        if sel is Side.MAX_ROW:
            return (_log_power_sums(self.a, t) + self.lR) / t, None
        m = np.stack([self.dh(float(x), self.grid) for x in t])
        j = np.argmin(m, axis=1)
        return m[np.arange(len(t)), j], self.grid[j]

    def side_polished(self, sel: Side, t: float) -> Tuple[float, Optional[float]]:
        v, sec = self.side(sel, np.array([t]))
        if sec is None:
            return float(v[0]), None
        k = int(np.searchsorted(self.grid, sec[0]))
        lo, hi = _bracket(self.grid, k)
        x, fx = _brent(lambda ls: float(self.dh(t, np.array([math.exp(ls)]))[0]), lo, hi,
                       math.log(float(sec[0])), float(v[0]))
        return fx, math.exp(x)

    def middle(self, t: np.ndarray, weighted: bool) -> np.ndarray:
        w = self.r if weighted else None
        u = t / (t - 1.0)
        return _log_power_sums(self.a, t, w) / t + _log_power_sums(self.a, u, w) / u


def dense_scan(inst: Instance, target: Target = Target.THM31, scope: Scope = Scope.BEST_OF_ALL,
               points: int = 400, polish: bool = True) -> DenseResult:
    """Exhaustive vectorized scan on ``points`` log-spaced values of p (and of alpha, gamma).

    Written directly with numpy and scipy, independent of the search above, as a
    cross-check for :func:`optimize`.  The grid alone resolves an interior optimum
    only to roughly the square of the grid spacing, so the best cell is then
    polished with bounded Brent minimization (``value``); ``scan_value`` keeps the
    unpolished grid minimum.
    """
    target = Target(target)
    a = _coefficients(inst, target).astype(float)
    r = np.asarray(inst.gram.abs_row_sums, dtype=float)
    grid = np.array(log_grid(points))
    fam = _DenseFamily(a, r, float(inst.gram.total_abs_sum), grid)
    with np.errstate(divide="ignore"):
        lnx, lR = np.log(float(inst.proj.norm_x_sq)), fam.lR
    src = target.source

    def finish(logv: float) -> float:
        if src is Source.THM31:
            logv = logv + lnx
        elif src is None:
            logv = logv + lnx + lR
        elif src is Source.THM41:
            logv = 0.5 * (logv + lnx)
        return float(np.exp(logv))

    use_branches = scope is Scope.BEST_OF_ALL and src is not None
    if not use_branches and target.branch is None:
        weighted = src is not None
        obj = fam.middle(grid, weighted)
        k = int(np.argmin(obj))
        scan = float(obj[k])
        x, fx = math.log(grid[k]), scan
        if polish:
            lo, hi = _bracket(grid, k)
            x, fx = _brent(lambda lp: float(fam.middle(np.array([math.exp(lp)]), weighted)[0]), lo, hi, x, fx)
        return DenseResult(finish(fx), finish(scan), math.exp(x), None, None, None)

    conj_grid = grid / (grid - 1.0)
    side_p = {s: fam.side(s, grid) for s in Side}
    side_q = {s: fam.side(s, conj_grid) for s in Side}
    chosen = list(BRANCHES) if use_branches else [target.branch]
    scans = []
    for b in chosen:
        obj = side_p[b.p_side][0] + side_q[b.q_side][0]
        k = int(np.argmin(obj))
        scans.append((float(obj[k]), k, b))
    scan_best = min(s[0] for s in scans)
    best = None
    for scan, k, b in scans:
        # polishing gains far less than this margin, so other branches cannot overtake
        if polish and scan > scan_best + 1e-2 * max(1.0, abs(scan_best)):
            continue

        def obj1(lp: float, b=b) -> float:
            p = math.exp(lp)
            return fam.side_polished(b.p_side, p)[0] + fam.side_polished(b.q_side, p / (p - 1.0))[0]

        x, fx = math.log(grid[k]), scan
        if polish:
            fx = obj1(x)
            lo, hi = _bracket(grid, k)
            x, fx = _brent(obj1, lo, hi, x, fx)
        p = math.exp(x)
        alpha = fam.side_polished(b.p_side, p)[1] if polish else (
            None if side_p[b.p_side][1] is None else float(side_p[b.p_side][1][k]))
        gamma = fam.side_polished(b.q_side, p / (p - 1.0))[1] if polish else (
            None if side_q[b.q_side][1] is None else float(side_q[b.q_side][1][k]))
        if best is None or fx < best[0]:
            best = (fx, p, alpha, gamma, b.index)
    return DenseResult(finish(best[0]), finish(scan_best), best[1], best[2], best[3], best[4])
