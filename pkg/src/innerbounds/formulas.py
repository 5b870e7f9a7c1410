"""Branch formulas as products of powers of a few atomic quantities.

Every branch bound has the shape ``prod_k atom_k ** e_k`` where the atoms are

* ``amax``  max_i |a_i|
* ``apow``  sum_i |a_i| ** t   (t one of p, q, alpha*p, gamma*q)
* ``S``     sum_ij |G_ij|
* ``R``     max_i r_i
* ``rpow``  sum_i r_i ** t     (t one of beta, delta)
* ``norm``  ||x||^2

and each exponent is a polynomial in ``u = 1/p``, ``a = 1/alpha``, ``g = 1/gamma``
(``1/q = 1 - u`` and so on).  Keeping exponents symbolic makes two formulas that
are algebraically identical compare equal and evaluate to the same bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Tuple

from .exponents import BRANCHES, BranchSelector, Side

Monomial = Tuple[int, int, int]  # powers of (u, a, g)


@dataclass(frozen=True)
class Poly:
    terms: Tuple[Tuple[Monomial, Fraction], ...]

    @staticmethod
    def of(mapping: Dict[Monomial, Fraction]) -> "Poly":
        return Poly(tuple(sorted((m, c) for m, c in mapping.items() if c != 0)))

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms:
            out[m] = out.get(m, Fraction(0)) + c
        return Poly.of(out)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly.of({m: c * Fraction(other) for m, c in self.terms})
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Poly.of(out)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.terms)

    def evaluate(self, u: float, a: float, g: float) -> float:
        return math.fsum(float(c) * u ** m[0] * a ** m[1] * g ** m[2] for m, c in self.terms)

    def __str__(self) -> str:
        names = ("1/p", "1/alpha", "1/gamma")
        parts = []
        for m, c in self.terms:
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, m) if k)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts) or "0"


ONE = Poly.of({(0, 0, 0): Fraction(1)})
HALF = ONE * Fraction(1, 2)
U = Poly.of({(1, 0, 0): Fraction(1)})
A = Poly.of({(0, 1, 0): Fraction(1)})
G = Poly.of({(0, 0, 1): Fraction(1)})
Q = ONE + U * -1  # 1/q
B = ONE + A * -1  # 1/beta
D = ONE + G * -1  # 1/delta


class Atom(enum.Enum):
    AMAX = "amax"
    APOW_P = "apow_p"
    APOW_Q = "apow_q"
    APOW_AP = "apow_alpha_p"
    APOW_GQ = "apow_gamma_q"
    S = "S"
    R = "R"
    RPOW_BETA = "rpow_beta"
    RPOW_DELTA = "rpow_delta"
    NORM = "norm"


Formula = Tuple[Tuple[Atom, Poly], ...]


def formula(terms: Iterable[Tuple[Atom, Poly]]) -> Formula:
    """Merge repeated atoms, drop zero exponents, sort into canonical order."""
    merged: Dict[Atom, Poly] = {}
    for atom, e in terms:
        merged[atom] = merged[atom] + e if atom in merged else e
    return tuple(sorted(((k, v) for k, v in merged.items() if v), key=lambda kv: kv[0].value))


def scaled(f: Formula, factor) -> Formula:
    return formula((atom, e * factor) for atom, e in f)


def render(f: Formula) -> str:
    return " * ".join(f"{atom.value}^({e})" for atom, e in f)


P_SIDE_TERMS = {
    Side.MAX_ALL: ((Atom.AMAX, ONE), (Atom.S, U)),
    Side.DOUBLE_HOLDER: ((Atom.APOW_AP, A * U), (Atom.RPOW_BETA, B * U)),
    Side.MAX_ROW: ((Atom.APOW_P, U), (Atom.R, U)),
}
Q_SIDE_TERMS = {
    Side.MAX_ALL: ((Atom.AMAX, ONE), (Atom.S, Q)),
    Side.DOUBLE_HOLDER: ((Atom.APOW_GQ, G * Q), (Atom.RPOW_DELTA, D * Q)),
    Side.MAX_ROW: ((Atom.APOW_Q, Q), (Atom.R, Q)),
}


class Source(enum.Enum):
    LEMMA21 = "lemma21"
    THM31 = "thm31"
    THM41 = "thm41"


@lru_cache(maxsize=None)
def derived(branch: BranchSelector, source: Source = Source.LEMMA21) -> Formula:
    """Branch formula obtained by multiplying the p-side and q-side majorants."""
    base = formula(P_SIDE_TERMS[branch.p_side] + Q_SIDE_TERMS[branch.q_side])
    if source is Source.LEMMA21:
        return base
    with_norm = formula(base + ((Atom.NORM, ONE),))
    return with_norm if source is Source.THM31 else scaled(with_norm, Fraction(1, 2))


def _lemma_printed(k: int, thm31: bool) -> Formula:
    # literal transcription of the nine displayed cases; thm31 differs only in case 4
    am, ap, aq, aap, agq = Atom.AMAX, Atom.APOW_P, Atom.APOW_Q, Atom.APOW_AP, Atom.APOW_GQ
    rb, rd = Atom.RPOW_BETA, Atom.RPOW_DELTA
    table = {
        1: ((am, ONE * 2), (Atom.S, ONE)),
        2: ((am, ONE), (agq, G * Q), (Atom.S, U), (rd, D * Q)),
        3: ((am, ONE), (aq, Q), (Atom.S, U), (Atom.R, Q)),
        4: ((am, ONE), (aap, A * U), (Atom.S, Q), (rb, B * (U if thm31 else Q))),
        5: ((aap, A * U), (agq, G * Q), (rb, U * B), (rd, D * Q)),
        6: ((aq, Q), (aap, A * U), (Atom.R, Q), (rb, U * B)),
        7: ((am, ONE), (ap, U), (Atom.R, U), (Atom.S, Q)),
        8: ((ap, U), (agq, G * Q), (Atom.R, U), (rd, D * Q)),
        9: ((ap, U), (aq, Q), (Atom.R, ONE)),
    }
    terms = table[k]
    if thm31:
        terms = terms + ((Atom.NORM, ONE),)
    return formula(terms)


def _thm41_printed(k: int) -> Formula:
    am, ap, aq, aap, agq = Atom.AMAX, Atom.APOW_P, Atom.APOW_Q, Atom.APOW_AP, Atom.APOW_GQ
    rb, rd = Atom.RPOW_BETA, Atom.RPOW_DELTA
    h = Fraction(1, 2)
    table = {
        1: ((am, ONE), (Atom.S, HALF)),
        2: ((am, HALF), (agq, G * Q * h), (Atom.S, U * h), (rd, D * Q * h)),
        3: ((am, HALF), (aq, Q * h), (Atom.S, U * h), (Atom.R, Q * h)),
        4: ((am, HALF), (aap, A * B * h), (Atom.S, Q * h), (rb, U * B)),
        5: ((aap, A * U * h), (agq, G * Q * h), (rb, U * B * h), (rd, D * Q * h)),
        6: ((aq, Q * h), (aap, A * U * h), (Atom.R, U * h), (rb, U * B * h)),
        7: ((am, HALF), (ap, U * h), (Atom.R, U * h), (Atom.S, Q * h)),
        8: ((ap, U * h), (agq, G * Q * h), (Atom.R, U * h), (rd, D * Q * h)),
        9: ((ap, U * h), (aq, Q * h), (Atom.R, HALF)),
    }
    return formula(table[k] + ((Atom.NORM, HALF),))


@lru_cache(maxsize=None)
def printed(branch_id: int, source: Source) -> Formula:
    """The branch formula exactly as typeset, suspect exponents included."""
    if not 1 <= branch_id <= 9:
        raise ValueError(f"branch id must be in 1..9, got {branch_id}")
    if source is Source.THM41:
        return _thm41_printed(branch_id)
    return _lemma_printed(branch_id, source is Source.THM31)


def discrepancies() -> Dict[Tuple[Source, int], bool]:
    """Map (source, branch id) to True where printed and derived differ symbolically."""
    return {
        (src, b.index): printed(b.index, src) != derived(b, src)
        for src in Source
        for b in BRANCHES
    }


def needs(f: Formula) -> Tuple[bool, bool]:
    """Whether evaluating ``f`` requires the (alpha, beta) and (gamma, delta) pairs."""
    atoms = {atom for atom, _ in f}
    monos = [m for _, e in f for m, _ in e.terms]
    uses_a = any(m[1] for m in monos) or bool(atoms & {Atom.APOW_AP, Atom.RPOW_BETA})
    uses_g = any(m[2] for m in monos) or bool(atoms & {Atom.APOW_GQ, Atom.RPOW_DELTA})
    return uses_a, uses_g


@dataclass(frozen=True, eq=False)
class Compiled:
    """A formula with float coefficients, ready for repeated evaluation."""

    source: Formula
    terms: Tuple[Tuple[Atom, Tuple[Tuple[float, int, int, int], ...]], ...]
    uses_a: bool
    uses_g: bool

    def exponents_for(self, params) -> Tuple[float, ...]:
        # single-slot memo, swapped atomically so concurrent readers never see a torn pair
        last = self.__dict__.get("_last")
        if last is not None and last[0] is params:
            return last[1]
        u = 1.0 / params.pq.p
        a = 1.0 / params.ab.p if params.ab is not None else 0.0
        g = 1.0 / params.gd.p if params.gd is not None else 0.0
        exps = self.exponents(u, a, g)
        self.__dict__["_last"] = (params, exps)
        return exps

    def exponents(self, u: float, a: float, g: float) -> Tuple[float, ...]:
        return tuple(
            math.fsum(c * u ** i * a ** j * g ** k for c, i, j, k in poly) if len(poly) > 1
            else poly[0][0] * u ** poly[0][1] * a ** poly[0][2] * g ** poly[0][3]
            for _, poly in self.terms
        )


_COMPILED: Dict[Formula, Compiled] = {}


def compile_formula(f: Formula) -> Compiled:
    try:
        return _COMPILED[f]
    except KeyError:
        uses_a, uses_g = needs(f)
        terms = tuple((atom, tuple((float(c), *m) for m, c in e.terms)) for atom, e in f)
        out = _COMPILED[f] = Compiled(f, terms, uses_a, uses_g)
        return out


@lru_cache(maxsize=None)
def derived_compiled(branch: BranchSelector, source: Source = Source.LEMMA21) -> Compiled:
    return compile_formula(derived(branch, source))


@lru_cache(maxsize=None)
def printed_compiled(branch_id: int, source: Source) -> Compiled:
    return compile_formula(printed(branch_id, source))


@lru_cache(maxsize=None)
def side_compiled(p_side: bool, sel: Side) -> Compiled:
    return compile_formula(formula((P_SIDE_TERMS if p_side else Q_SIDE_TERMS)[sel]))
