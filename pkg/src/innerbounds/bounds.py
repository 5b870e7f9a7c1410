"""Evaluation of the Pečarić / Bombieri / Bessel bound hierarchy.

Coefficient vectors (``alphas``, ``c``, ``proj``) are complex array-likes of length
``n``; Gram data comes from :mod:`innerbounds.gramcore`.  Branch bounds are
evaluated in log space with max-scaled power sums, so large exponents
(``alpha * p`` up to ~10^4) do not overflow before the final ``exp``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import formulas as fm
from .exponents import (
    BRANCHES,
    BranchSelector,
    ConjugatePair,
    ExponentError,
    HolderParams,
    Side,
    require,
)
from .formulas import Atom, Source
from .gramcore import GramData, Instance, ProjectionData

SLACK_RTOL = 1e-9
SLACK_ATOL = 1e-12
ORTHONORMAL_TOL = 1e-10


class BoundError(ValueError):
    """Raised when inputs are inconsistent (length mismatch, corrupted Gram data)."""


class Form(enum.Enum):
    DERIVED = "derived"
    PRINTED = "printed"


@dataclass(frozen=True)
class BoundValue:
    name: str
    value: float
    params: Optional[HolderParams] = None
    form: Form = Form.DERIVED
    branch: Optional[int] = None
    bounds: Optional[str] = None  # key of the left-hand side this value majorizes


@dataclass(frozen=True)
class BoundChain:
    lhs: float
    middle: Optional[float]
    branches: Tuple[BoundValue, ...] = ()
    classical: Tuple[BoundValue, ...] = ()


def slack_tol(bound: float) -> float:
    return max(SLACK_ATOL, SLACK_RTOL * abs(bound))


def holds(lhs: float, bound: float) -> bool:
    """One-sided check ``bound >= lhs - tol``."""
    return bound >= lhs - slack_tol(bound)


def _abs_list(coeffs, n: Optional[int] = None) -> List[float]:
    arr = np.asarray(coeffs, dtype=complex).ravel()
    if n is not None and arr.shape[0] != n:
        raise BoundError(f"coefficient vector has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise BoundError("coefficient vector has a non-finite entry")
    return np.abs(arr).tolist()


def log_sum_pow(values: Sequence[float], t: float, weights: Optional[Sequence[float]] = None) -> float:
    """``log(sum_i values_i**t * weights_i)``, scaled by the max to avoid overflow; -inf for a zero sum."""
    m = max(values)
    if m == 0.0:
        return -math.inf
    if weights is None:
        s = math.fsum((v / m) ** t for v in values)
    else:
        s = math.fsum((v / m) ** t * w for v, w in zip(values, weights))
    if s == 0.0:
        return -math.inf
    return t * math.log(m) + math.log(s)


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


class Profile:
    """Absolute values of one coefficient vector against one Gram matrix, with cached logs."""

    __slots__ = ("a", "r", "gram", "norm_x_sq", "_cache", "_atoms_for", "_atoms")

    def __init__(self, abs_coeffs: Sequence[float], gram: GramData, norm_x_sq: float = 1.0):
        if len(abs_coeffs) != gram.n:
            raise BoundError(f"coefficient vector has length {len(abs_coeffs)}, expected {gram.n}")
        self.a = list(abs_coeffs)
        self.r = gram.abs_row_sums.tolist()
        self.gram = gram
        self.norm_x_sq = float(norm_x_sq)
        self._cache: Dict[tuple, float] = {}
        self._atoms_for: Optional[HolderParams] = None
        self._atoms: Dict[Atom, float] = {}

    @classmethod
    def of(cls, coeffs, gram: GramData, norm_x_sq: float = 1.0) -> "Profile":
        return cls(_abs_list(coeffs, gram.n), gram, norm_x_sq)

    def _cached(self, key, fn) -> float:
        try:
            return self._cache[key]
        except KeyError:
            val = self._cache[key] = fn()
            return val

    def log_apow(self, t: float) -> float:
        return self._cached(("a", t), lambda: log_sum_pow(self.a, t))

    def log_rpow(self, t: float) -> float:
        return self._cached(("r", t), lambda: log_sum_pow(self.r, t))

    def log_wpow(self, t: float) -> float:
        """log of the weighted power sum ``sum_i a_i**t r_i``."""
        return self._cached(("w", t), lambda: log_sum_pow(self.a, t, self.r))

    def log_atom(self, atom: Atom, params: HolderParams) -> float:
        return self._atom_logs(params)[atom]

    def _atom_logs(self, params: HolderParams) -> Dict[Atom, float]:
        if self._atoms_for is params:
            return self._atoms
        pq = params.pq
        out = {
            Atom.AMAX: self._cached("amax", lambda: _log(max(self.a))),
            Atom.S: self._cached("S", lambda: _log(self.gram.total_abs_sum)),
            Atom.R: self._cached("R", lambda: _log(max(self.r))),
            Atom.NORM: _log(self.norm_x_sq),
            Atom.APOW_P: self.log_apow(pq.p),
            Atom.APOW_Q: self.log_apow(pq.q),
        }
        if params.ab is not None:
            out[Atom.APOW_AP] = self.log_apow(params.ab.p * pq.p)
            out[Atom.RPOW_BETA] = self.log_rpow(params.ab.q)
        if params.gd is not None:
            out[Atom.APOW_GQ] = self.log_apow(params.gd.p * pq.q)
            out[Atom.RPOW_DELTA] = self.log_rpow(params.gd.q)
        self._atoms_for, self._atoms = params, out
        return out

    def evaluate(self, f, params: HolderParams) -> float:
        """Value of ``prod atom**exponent``; zero as soon as one atom vanishes."""
        cf = f if isinstance(f, fm.Compiled) else fm.compile_formula(f)
        if (cf.uses_a and params.ab is None) or (cf.uses_g and params.gd is None):
            raise ExponentError("formula needs a secondary conjugate pair that was not supplied")
        atoms = self._atom_logs(params)
        logs = []
        for (atom, _), e in zip(cf.terms, cf.exponents_for(params)):
            la = atoms[atom]
            if la == -math.inf:
                return 0.0
            logs.append(e * la)
        return math.exp(math.fsum(logs))

    def log_holder(self, pq: ConjugatePair) -> float:
        return self.log_wpow(pq.p) / pq.p + self.log_wpow(pq.q) / pq.q


# -- coefficient-level quantities ---------------------------------------------


def norm_squared_expansion(alphas, gram: GramData) -> float:
    """``sum_ij alpha_i conj(alpha_j) G_ij``; equals ``||sum alpha_i z_i||^2`` for a true Gram matrix."""
    a = np.asarray(alphas, dtype=complex).ravel()
    if a.shape[0] != gram.n:
        raise BoundError(f"alphas has length {a.shape[0]}, expected {gram.n}")
    terms = (np.outer(a, a.conj()) * gram.g).ravel()
    re = math.fsum(terms.real.tolist())
    im = math.fsum(terms.imag.tolist())
    m = double_sum_M(a, gram)
    if abs(im) > SLACK_RTOL * m:
        raise BoundError(f"quadratic form has imaginary residue {im:.3e} (M = {m:.3e}); Gram data is not Hermitian")
    return re


def double_sum_M(alphas, gram: GramData) -> float:
    """``M = sum_ij |alpha_i| |alpha_j| |G_ij|``."""
    a = np.array(_abs_list(alphas, gram.n))
    return math.fsum((np.outer(a, a) * gram.abs_g).ravel().tolist())


def weighted_power_sum(abs_alphas, t: float, r) -> float:
    """``sum_i |alpha_i|**t * r_i`` with ``0**t = 0``."""
    if not t > 0:
        raise ExponentError(f"power must be positive, got {t}")
    a = [float(v) for v in abs_alphas]
    w = [float(v) for v in r]
    if len(a) != len(w):
        raise BoundError(f"length mismatch: {len(a)} coefficients, {len(w)} row sums")
    if any(v < 0 or not math.isfinite(v) for v in a + w):
        raise BoundError("weighted_power_sum needs finite nonnegative inputs")
    return math.fsum(x ** t * y for x, y in zip(a, w) if x > 0.0)


def holder_bound(alphas, gram: GramData, pq: ConjugatePair) -> float:
    """First Hölder bound ``W(p)**(1/p) * W(q)**(1/q)`` with ``W(t) = sum_i |alpha_i|**t r_i``."""
    return _exp(Profile.of(alphas, gram).log_holder(pq))


def _exp(x: float) -> float:
    return 0.0 if x == -math.inf else math.exp(x)


def _side_value(alphas, gram, params, sel: Side, terms) -> float:
    probe = BranchSelector(sel, Side.MAX_ROW) if terms is fm.P_SIDE_TERMS else BranchSelector(Side.MAX_ROW, sel)
    require(params, probe)
    return Profile.of(alphas, gram).evaluate(fm.formula(terms[sel]), params)


def factor_p(alphas, gram: GramData, params: HolderParams, sel: Side) -> float:
    """Majorant of ``W(p)**(1/p)`` chosen by ``sel``."""
    return _side_value(alphas, gram, params, sel, fm.P_SIDE_TERMS)


def factor_q(alphas, gram: GramData, params: HolderParams, sel: Side) -> float:
    """Majorant of ``W(q)**(1/q)`` chosen by ``sel``."""
    return _side_value(alphas, gram, params, sel, fm.Q_SIDE_TERMS)


def branch_bound(alphas, gram: GramData, params: HolderParams, branch: BranchSelector) -> BoundValue:
    require(params, branch)
    value = Profile.of(alphas, gram).evaluate(fm.derived(branch), params)
    return BoundValue(f"lemma21_branch{branch.index}", value, params.for_branch(branch), Form.DERIVED,
                      branch.index, "lemma21_lhs")


_SOURCE_LHS = {Source.LEMMA21: "lemma21_lhs", Source.THM31: "thm31_lhs", Source.THM41: "thm41_lhs"}


def printed_form_value(source: Source, branch_id: int, coeffs, gram: GramData, params: HolderParams,
                       norm_x_sq: float = 1.0) -> BoundValue:
    """Evaluate a branch exactly as typeset.

    ``coeffs`` are the alphas for ``LEMMA21``, the ``c`` for ``THM31`` and the
    projections ``(x, y_i)`` for ``THM41``; only their moduli matter.
    """
    source = Source(source)
    branch = BranchSelector.from_index(branch_id)
    require(params, branch)
    value = Profile.of(coeffs, gram, norm_x_sq).evaluate(fm.printed(branch_id, source), params)
    return BoundValue(f"{source.value}_branch{branch_id}_printed", value, params.for_branch(branch),
                      Form.PRINTED, branch_id, _SOURCE_LHS[source])


# -- classical inequalities ---------------------------------------------------


def lhs_pecaric(proj: ProjectionData, c) -> float:
    """``|sum_i c_i (x, y_i)|^2``."""
    cv = np.asarray(c, dtype=complex).ravel()
    if cv.shape[0] != proj.n:
        raise BoundError(f"c has length {cv.shape[0]}, expected {proj.n}")
    terms = cv * proj.proj
    s = complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))
    return s.real * s.real + s.imag * s.imag


def pecaric_bound(proj: ProjectionData, c, gram: GramData) -> Tuple[float, float]:
    a = _abs_list(c, gram.n)
    r = gram.abs_row_sums.tolist()
    sq = [v * v for v in a]
    b1 = proj.norm_x_sq * math.fsum(s * w for s, w in zip(sq, r))
    b2 = proj.norm_x_sq * math.fsum(sq) * gram.max_row_sum
    return b1, b2


def _sum_sq(proj: ProjectionData) -> float:
    return math.fsum((np.abs(proj.proj) ** 2).tolist())


def pecaric_self(proj: ProjectionData, gram: GramData) -> Tuple[float, float, float]:
    """The case ``c_i = conj((x, y_i))``: returns ``(lhs, b1, b2)``."""
    s2 = _sum_sq(proj)
    b1, b2 = pecaric_bound(proj, proj.proj.conj(), gram)
    return s2 * s2, b1, b2


def bombieri_bound(proj: ProjectionData, gram: GramData) -> Tuple[float, float]:
    return _sum_sq(proj), proj.norm_x_sq * gram.max_row_sum


def is_orthonormal(gram: GramData, tol: float = ORTHONORMAL_TOL) -> bool:
    return bool(np.max(np.abs(gram.g - np.eye(gram.n))) <= tol)


def remark_ratio(proj: ProjectionData, gram: GramData, pq: ConjugatePair) -> Tuple[float, float]:
    """``(sum |(x,y_i)|^2)^2 / (||proj||_p ||proj||_q)`` against ``||x||^2 max_i r_i``."""
    u = np.abs(proj.proj).tolist()
    bound = proj.norm_x_sq * gram.max_row_sum
    lp, lq = log_sum_pow(u, pq.p), log_sum_pow(u, pq.q)
    if lp == -math.inf:
        return 0.0, bound
    return _exp(2.0 * log_sum_pow(u, 2.0) - lp / pq.p - lq / pq.q), bound


# -- chains with the vector x -------------------------------------------------


def _branches_for(params: HolderParams, branch: Optional[BranchSelector]) -> List[BranchSelector]:
    if branch is not None:
        require(params, branch)
        return [branch]
    return [b for b in BRANCHES
            if (params.ab is not None or not b.needs_ab) and (params.gd is not None or not b.needs_gd)]


def theorem31_bound(proj: ProjectionData, c, gram: GramData, params: HolderParams,
                    branch: Optional[BranchSelector] = None) -> BoundChain:
    prof = Profile.of(c, gram, proj.norm_x_sq)
    middle = proj.norm_x_sq * _exp(prof.log_holder(params.pq))
    values = tuple(
        BoundValue(f"thm31_branch{b.index}", prof.evaluate(fm.derived_compiled(b, Source.THM31), params),
                   params.for_branch(b), Form.DERIVED, b.index, "thm31_lhs")
        for b in _branches_for(params, branch)
    )
    b1, b2 = pecaric_bound(proj, c, gram)
    classical = (BoundValue("pecaric_11a", b1, bounds="thm31_lhs"), BoundValue("pecaric_11b", b2, bounds="thm31_lhs"))
    return BoundChain(lhs_pecaric(proj, c), middle, values, classical)


def theorem41_bound(proj: ProjectionData, gram: GramData, params: HolderParams,
                    branch: Optional[BranchSelector] = None) -> BoundChain:
    prof = Profile.of(proj.proj, gram, proj.norm_x_sq)
    middle = _exp(0.5 * (_log(proj.norm_x_sq) + prof.log_holder(params.pq)))
    values = tuple(
        BoundValue(f"thm41_branch{b.index}", prof.evaluate(fm.derived_compiled(b, Source.THM41), params),
                   params.for_branch(b), Form.DERIVED, b.index, "thm41_lhs")
        for b in _branches_for(params, branch)
    )
    lhs, bomb = bombieri_bound(proj, gram)
    return BoundChain(lhs, middle, values, (BoundValue("bombieri_13", bomb, bounds="thm41_lhs"),))


# -- everything at once -------------------------------------------------------


@dataclass
class Ladder:
    """All left-hand sides and bound values for one instance and one parameter set."""

    params: HolderParams
    lhs: Dict[str, float]
    bounds: List[BoundValue] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def value(self, name: str) -> float:
        for b in self.bounds:
            if b.name == name:
                return b.value
        if name in self.lhs:
            return self.lhs[name]
        raise KeyError(name)

    def as_dict(self) -> Dict[str, float]:
        out = dict(self.lhs)
        out.update((b.name, b.value) for b in self.bounds)
        return out


def evaluate_ladder(inst: Instance, params: HolderParams, printed: bool = False) -> Ladder:
    """Evaluate every left-hand side and every bound the instance admits.

    Coefficient-level quantities use ``alpha = conj(c)``.  Without ``c`` only the
    bounds that depend on ``x`` alone (Bombieri type and the ratio bound) are evaluated.
    """
    gram, proj = inst.gram, inst.proj
    pq = params.pq
    branches = _branches_for(params, None)
    lhs: Dict[str, float] = {}
    out: List[BoundValue] = []
    notes: List[str] = []

    if inst.c is not None:
        alphas = inst.c.conj()
        prof_c = Profile.of(alphas, gram, proj.norm_x_sq)
        lhs["lemma21_lhs"] = norm_squared_expansion(alphas, gram)
        lhs["double_sum_M"] = double_sum_M(alphas, gram)
        lhs["thm31_lhs"] = lhs_pecaric(proj, inst.c)
        holder = _exp(prof_c.log_holder(pq))
        out.append(BoundValue("lemma21_first", holder, HolderParams(pq), Form.DERIVED, None, "lemma21_lhs"))
        for b in branches:
            bp = params.for_branch(b)
            out.append(BoundValue(f"lemma21_branch{b.index}", prof_c.evaluate(fm.derived_compiled(b), params), bp,
                                  Form.DERIVED, b.index, "lemma21_lhs"))
            if printed:
                out.append(BoundValue(f"lemma21_branch{b.index}_printed",
                                      prof_c.evaluate(fm.printed_compiled(b.index, Source.LEMMA21), params), bp,
                                      Form.PRINTED, b.index, "lemma21_lhs"))
        b1, b2 = pecaric_bound(proj, inst.c, gram)
        out.append(BoundValue("pecaric_11a", b1, bounds="thm31_lhs"))
        out.append(BoundValue("pecaric_11b", b2, bounds="thm31_lhs"))
        out.append(BoundValue("thm31_middle", proj.norm_x_sq * holder, HolderParams(pq), Form.DERIVED, None,
                              "thm31_lhs"))
        for b in branches:
            bp = params.for_branch(b)
            out.append(BoundValue(f"thm31_branch{b.index}", prof_c.evaluate(fm.derived_compiled(b, Source.THM31), params),
                                  bp, Form.DERIVED, b.index, "thm31_lhs"))
            if printed:
                out.append(BoundValue(f"thm31_branch{b.index}_printed",
                                      prof_c.evaluate(fm.printed_compiled(b.index, Source.THM31), params), bp,
                                      Form.PRINTED, b.index, "thm31_lhs"))
    else:
        notes.append("no coefficients c supplied: coefficient-level, Pecaric-with-c and thm31 entries omitted")

    s12, p12a, p12b = pecaric_self(proj, gram)
    lhs["pecaric_12_lhs"] = s12
    out.append(BoundValue("pecaric_12a", p12a, bounds="pecaric_12_lhs"))
    out.append(BoundValue("pecaric_12b", p12b, bounds="pecaric_12_lhs"))

    bl, bb = bombieri_bound(proj, gram)
    lhs["thm41_lhs"] = bl
    out.append(BoundValue("bombieri_13", bb, bounds="thm41_lhs"))
    if is_orthonormal(gram):
        out.append(BoundValue("bessel_14", proj.norm_x_sq, bounds="thm41_lhs"))
    else:
        notes.append("family is not orthonormal: the Bessel equality bound does not apply")

    prof_x = Profile.of(proj.proj, gram, proj.norm_x_sq)
    out.append(BoundValue("thm41_middle", _exp(0.5 * (_log(proj.norm_x_sq) + prof_x.log_holder(pq))),
                          HolderParams(pq), Form.DERIVED, None, "thm41_lhs"))
    for b in branches:
        bp = params.for_branch(b)
        out.append(BoundValue(f"thm41_branch{b.index}", prof_x.evaluate(fm.derived_compiled(b, Source.THM41), params), bp,
                              Form.DERIVED, b.index, "thm41_lhs"))
        if printed:
            out.append(BoundValue(f"thm41_branch{b.index}_printed",
                                  prof_x.evaluate(fm.printed_compiled(b.index, Source.THM41), params), bp,
                                  Form.PRINTED, b.index, "thm41_lhs"))

    ratio, rbound = remark_ratio(proj, gram, pq)
    lhs["remark_lhs"] = ratio
    out.append(BoundValue("remark_bound", rbound, HolderParams(pq), Form.DERIVED, None, "remark_lhs"))
    return Ladder(params, lhs, out, notes)
