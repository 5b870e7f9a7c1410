"""Vector families, Gram matrices and the absolute-sum quantities every bound uses.

The inner product is linear in the first argument and conjugate-linear in the
second, ``(u, v) = sum_k u_k * conj(v_k)``.  With that convention
``sum_i c_i (x, y_i) = (x, sum_i conj(c_i) y_i)`` holds verbatim.

All real sums go through :func:`math.fsum` (exactly rounded), so the row sums
``r_i = sum_j |G_ij|`` and the total ``S = sum_i r_i`` are trustworthy near
equality cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

HERMITIAN_RTOL = 1e-9


class GramError(ValueError):
    """Raised for malformed vectors, families or Gram matrices."""


def _as_complex_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise GramError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GramError(f"{name} has a non-finite entry")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def csum(values) -> complex:
    """Exactly rounded sum of complex numbers (real and imaginary parts separately)."""
    vals = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def inner_product(u, v) -> complex:
    """Return ``sum_k u_k * conj(v_k)``."""
    a = _as_complex_vector(u, "u")
    b = _as_complex_vector(v, "v")
    if a.shape != b.shape:
        raise GramError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    # exact sums of the rounded real products, so swapping u and v conjugates the result exactly
    ar, ai, br, bi = a.real, a.imag, b.real, b.imag
    re = math.fsum(np.concatenate((ar * br, ai * bi)).tolist())
    im = math.fsum(np.concatenate((ai * br, -(ar * bi))).tolist())
    return complex(re, im)


@dataclass(frozen=True)
class VectorFamily:
    """``n`` complex coordinate vectors of common dimension ``d`` (rows of ``vectors``)."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=complex)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise GramError("a family is a list of equal-length coordinate vectors")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GramError(f"family needs n >= 1 and d >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise GramError("family has a non-finite entry")
        object.__setattr__(self, "vectors", _frozen(arr))

    @classmethod
    def from_vectors(cls, vectors: Sequence) -> "VectorFamily":
        rows = [np.asarray(v, dtype=complex) for v in vectors]
        if not rows:
            raise GramError("family needs n >= 1 and d >= 1, got no vectors")
        dims = {r.shape for r in rows}
        if len(dims) != 1:
            raise GramError(f"all vectors must share one dimension, got {sorted(d[0] for d in dims)}")
        return cls(np.vstack(rows))

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class GramData:
    """Hermitian matrix ``G_ij = (y_i, y_j)`` with its absolute row sums and total."""

    g: np.ndarray
    abs_row_sums: np.ndarray
    total_abs_sum: float
    abs_g: np.ndarray = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def max_row_sum(self) -> float:
        return float(np.max(self.abs_row_sums))

    @classmethod
    def _build(cls, g: np.ndarray) -> "GramData":
        abs_g = np.abs(g)
        rows = np.array([math.fsum(row) for row in abs_g.tolist()], dtype=float)
        total = math.fsum(rows.tolist())
        return cls(_frozen(g), _frozen(rows), total, _frozen(abs_g))


def gram_matrix(family: VectorFamily) -> GramData:
    y = family.vectors
    n = family.n
    g = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                g[i, i] = inner_product(y[i], y[i]).real
            else:
                gij = inner_product(y[i], y[j])
                g[i, j] = gij
                g[j, i] = gij.conjugate()
    return GramData._build(g)


def gram_from_matrix(g) -> GramData:
    """Build :class:`GramData` from an explicit matrix.

    The input is accepted when its Hermitian deviation ``max |G - G^H|`` is at most
    ``1e-9`` times ``max |G|``; it is then replaced by ``(G + G^H) / 2``.  No
    positive-semidefiniteness check is made: the bounds only consume ``|G_ij|``.
    """
    arr = np.asarray(g, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise GramError(f"Gram matrix must be square and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GramError("Gram matrix has a non-finite entry")
    dev = np.abs(arr - arr.conj().T)
    scale = float(np.max(np.abs(arr)))
    worst = float(np.max(dev))
    if worst > HERMITIAN_RTOL * scale:
        i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise GramError(
            f"Gram matrix is not Hermitian: |G[{i}][{j}] - conj(G[{j}][{i}])| = {worst:.3e} "
            f"exceeds {HERMITIAN_RTOL:g} relative"
        )
    sym = (arr + arr.conj().T) / 2
    # the diagonal of a Hermitian matrix is real; drop the rounding residue
    sym[np.diag_indices_from(sym)] = sym.diagonal().real
    return GramData._build(sym)


@dataclass(frozen=True)
class ProjectionData:
    """The inner products ``(x, y_i)`` and ``||x||^2`` for a fixed vector ``x``."""

    proj: np.ndarray
    norm_x_sq: float

    def __post_init__(self):
        proj = _as_complex_vector(self.proj, "proj")
        norm = float(self.norm_x_sq)
        if not math.isfinite(norm) or norm < 0:
            raise GramError(f"norm_x_sq must be finite and nonnegative, got {norm}")
        object.__setattr__(self, "proj", _frozen(proj))
        object.__setattr__(self, "norm_x_sq", norm)

    @property
    def n(self) -> int:
        return self.proj.shape[0]


def projection_data(x, family: VectorFamily) -> ProjectionData:
    xv = _as_complex_vector(x, "x")
    if xv.shape[0] != family.d:
        raise GramError(f"x has dimension {xv.shape[0]}, family has dimension {family.d}")
    proj = [inner_product(xv, y) for y in family.vectors]
    return ProjectionData(np.array(proj, dtype=complex), inner_product(xv, xv).real)


@dataclass(frozen=True)
class Instance:
    """One problem instance: Gram data, projections of ``x`` and coefficients ``c``.

    ``x`` and ``family`` are kept when the instance was built from coordinates;
    Gram-direct instances carry only the derived data.
    """

    gram: GramData
    proj: ProjectionData
    c: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None
    family: Optional[VectorFamily] = None

    def __post_init__(self):
        if self.proj.n != self.gram.n:
            raise GramError(f"proj has length {self.proj.n}, Gram matrix is {self.gram.n}x{self.gram.n}")
        if self.c is not None:
            c = _as_complex_vector(self.c, "c")
            if c.shape[0] != self.gram.n:
                raise GramError(f"c has length {c.shape[0]}, expected {self.gram.n}")
            object.__setattr__(self, "c", _frozen(c))
        if self.x is not None:
            object.__setattr__(self, "x", _frozen(_as_complex_vector(self.x, "x")))

    @property
    def n(self) -> int:
        return self.gram.n

    @property
    def from_coordinates(self) -> bool:
        return self.family is not None

    @classmethod
    def from_coordinates_data(cls, x, ys, c=None) -> "Instance":
        family = ys if isinstance(ys, VectorFamily) else VectorFamily.from_vectors(ys)
        return cls(gram_matrix(family), projection_data(x, family), c, np.asarray(x, dtype=complex), family)

    @classmethod
    def from_gram_data(cls, gram, proj, norm_x_sq: float, c=None) -> "Instance":
        gd = gram if isinstance(gram, GramData) else gram_from_matrix(gram)
        return cls(gd, ProjectionData(np.asarray(proj, dtype=complex), norm_x_sq), c)

    def with_c(self, c) -> "Instance":
        return Instance(self.gram, self.proj, c, self.x, self.family)
