"""Hölder conjugate exponents, parameter sets and the nine-branch selector."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import List, Optional

P_MIN = 1.01
P_MAX = 101.0  # == conjugate(P_MIN), so the domain is closed under p <-> q
CONJ_ATOL = 1e-12
_DOMAIN_RTOL = 1e-12


class ExponentError(ValueError):
    """Raised for exponents outside the admissible domain or inconsistent parameter sets."""


def conjugate(p: float) -> float:
    """Return the Hölder conjugate ``q = p / (p - 1)`` of ``p > 1``."""
    p = float(p)
    if not math.isfinite(p) or p <= 1.0:
        raise ExponentError(f"conjugate exponent needs finite p > 1, got {p}")
    return p / (p - 1.0)


def in_domain(t: float) -> bool:
    return math.isfinite(t) and P_MIN * (1 - _DOMAIN_RTOL) <= t <= P_MAX * (1 + _DOMAIN_RTOL)


@dataclass(frozen=True)
class ConjugatePair:
    p: float
    q: float

    @classmethod
    def from_p(cls, p: float) -> "ConjugatePair":
        return cls(float(p), conjugate(p))

    def problems(self, label: str = "pq") -> List[str]:
        out = []
        for name, t in ((f"{label}.first", self.p), (f"{label}.second", self.q)):
            if not in_domain(t):
                out.append(f"{name}={t!r} outside [{P_MIN}, {P_MAX}]")
        if not out and abs(1.0 / self.p + 1.0 / self.q - 1.0) > CONJ_ATOL:
            out.append(f"{label}: 1/{self.p!r} + 1/{self.q!r} != 1")
        return out

    def swapped(self) -> "ConjugatePair":
        return ConjugatePair(self.q, self.p)


class Side(enum.Enum):
    """How one Hölder factor is majorized."""

    MAX_ALL = "max_all"
    DOUBLE_HOLDER = "double_holder"
    MAX_ROW = "max_row"


_SIDES = (Side.MAX_ALL, Side.DOUBLE_HOLDER, Side.MAX_ROW)


@dataclass(frozen=True)
class BranchSelector:
    p_side: Side
    q_side: Side

    @functools.cached_property
    def index(self) -> int:
        """Position 1..9 in the printed listing (p-side major, q-side minor)."""
        return 3 * _SIDES.index(self.p_side) + _SIDES.index(self.q_side) + 1

    @classmethod
    def from_index(cls, k: int) -> "BranchSelector":
        if not 1 <= int(k) <= 9:
            raise ExponentError(f"branch index must be in 1..9, got {k}")
        k = int(k) - 1
        return cls(_SIDES[k // 3], _SIDES[k % 3])

    @property
    def needs_ab(self) -> bool:
        return self.p_side is Side.DOUBLE_HOLDER

    @property
    def needs_gd(self) -> bool:
        return self.q_side is Side.DOUBLE_HOLDER

    def __str__(self) -> str:
        return f"branch{self.index}({self.p_side.value},{self.q_side.value})"


BRANCHES = tuple(BranchSelector.from_index(k) for k in range(1, 10))


@dataclass(frozen=True)
class HolderParams:
    """Primary pair ``(p, q)`` plus optional secondary pairs ``(alpha, beta)`` and ``(gamma, delta)``."""

    pq: ConjugatePair
    ab: Optional[ConjugatePair] = None
    gd: Optional[ConjugatePair] = None

    @classmethod
    def make(cls, p: float = 2.0, alpha: Optional[float] = None, gamma: Optional[float] = None) -> "HolderParams":
        return cls(
            ConjugatePair.from_p(p),
            None if alpha is None else ConjugatePair.from_p(alpha),
            None if gamma is None else ConjugatePair.from_p(gamma),
        )

    def for_branch(self, branch: BranchSelector) -> "HolderParams":
        """Drop the secondary pairs the branch does not use."""
        return HolderParams(self.pq, self.ab if branch.needs_ab else None, self.gd if branch.needs_gd else None)

    def as_dict(self) -> dict:
        out = {"p": self.pq.p, "q": self.pq.q}
        if self.ab is not None:
            out.update(alpha=self.ab.p, beta=self.ab.q)
        if self.gd is not None:
            out.update(gamma=self.gd.p, delta=self.gd.q)
        return out


def validate(params: HolderParams, branch: BranchSelector, strict: bool = True) -> List[str]:
    """Return every problem with ``params`` for ``branch``; an empty list means ok.

    With ``strict`` a secondary pair that the branch does not use is also reported.
    """
    errors = list(params.pq.problems("pq"))
    for label, pair, needed in (("ab", params.ab, branch.needs_ab), ("gd", params.gd, branch.needs_gd)):
        if pair is None:
            if needed:
                errors.append(f"{label} required by {branch}")
        else:
            errors.extend(pair.problems(label))
            if strict and not needed:
                errors.append(f"{label} supplied but unused by {branch}")
    return errors


def require(params: HolderParams, branch: BranchSelector) -> None:
    errors = validate(params, branch, strict=False)
    if errors:
        raise ExponentError("; ".join(errors))
