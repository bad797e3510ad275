r"""Singular values, Schatten norms and the inequalities used with them.

.. math::
   \|T\|_{S^p} = \Big(\sum_n \lambda_n^p\Big)^{1/p}, \qquad 0 < p < \infty,

where :math:`\lambda_n` are the singular values of :math:`T`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExponentError, NonOrthonormalError, WindowMismatchError

__all__ = [
    "SingularSpectrum",
    "delta_exponent",
    "coefficient_decay_exponent",
    "singular_values",
    "schatten_norm",
    "basis_image_sum",
    "entry_bound",
    "TriangleReport",
    "triangle_check",
    "ZERO_CUTOFF",
]

#: Singular values below ``ZERO_CUTOFF * sigma_max`` count as exact zeros.
ZERO_CUTOFF = 1e-13


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 0 or not np.isfinite(p):
        raise ExponentError(f"p must be a positive finite number, got {p}")
    return p


def delta_exponent(p: float) -> float:
    """``max(0, 1/2 - 1/p)``: the loss when passing from l2 to lp."""
    p = _check_p(p)
    return max(0.0, 0.5 - 1.0 / p)


def coefficient_decay_exponent(m: int) -> float:
    """Decay rate in ``m = log2(|J|/|I|)``: ``|m|`` for ``m <= 0``, ``m/2`` otherwise."""
    return float(-m) if m <= 0 else m / 2


def _as_array(M) -> np.ndarray:
    M = getattr(M, "matrix", M)
    return np.asarray(M, dtype=float)


@dataclass(frozen=True)
class SingularSpectrum:
    """Nonincreasing, nonnegative singular values of a ``rows x cols`` matrix."""

    values: np.ndarray
    rows: int
    cols: int

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def max(self) -> float:
        return float(self.values[0]) if len(self.values) else 0.0


def singular_values(M) -> SingularSpectrum:
    """Singular values by LAPACK's bidiagonalisation SVD.

    Values below :data:`ZERO_CUTOFF` times the largest are set to zero so that
    small-``p`` sums are not dominated by roundoff.
    """
    if isinstance(M, SingularSpectrum):
        return M
    A = _as_array(M)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    rows, cols = A.shape
    if min(rows, cols) == 0:
        return SingularSpectrum(np.zeros(0), rows, cols)
    s = np.linalg.svd(A, compute_uv=False)
    s = np.sort(np.abs(s))[::-1]
    if s[0] > 0:
        s[s < ZERO_CUTOFF * s[0]] = 0.0
    return SingularSpectrum(s, rows, cols)


def _lp(values: np.ndarray, p: float) -> float:
    values = np.abs(np.asarray(values, dtype=float))
    values = values[values > 0]
    if values.size == 0:
        return 0.0
    # scale first: avoids overflow/underflow of values**p for large p
    top = values.max()
    return float(top * np.sum((values / top) ** p) ** (1.0 / p))


def schatten_norm(M, p: float) -> float:
    """``(sum_n lambda_n^p)^(1/p)`` over the singular values of ``M``."""
    p = _check_p(p)
    return _lp(singular_values(M).values, p)


def _orthonormal_columns(basis) -> np.ndarray:
    if isinstance(basis, (list, tuple)):
        cols = [b.vector() if hasattr(b, "vector") else np.asarray(b, dtype=float) for b in basis]
        E = np.column_stack(cols)
    else:
        E = np.asarray(basis, dtype=float)
    gram = E.T @ E
    if not np.allclose(gram, np.eye(gram.shape[0]), rtol=0, atol=1e-10):
        raise NonOrthonormalError("basis is not orthonormal to 1e-10")
    return E


def basis_image_sum(M, p: float, basis) -> float:
    """``(sum_n ||M e_n||^p)^(1/p)`` for an orthonormal basis ``{e_n}``.

    ``basis`` is a matrix whose columns are the basis vectors, or a sequence
    of vectors / step functions.  The Schatten norm is the infimum of this
    quantity over bases when ``p <= 2`` and the supremum when ``p >= 2``.
    """
    p = _check_p(p)
    A = _as_array(M)
    E = _orthonormal_columns(basis)
    if E.shape[0] != A.shape[1]:
        raise WindowMismatchError(f"basis dimension {E.shape[0]} != {A.shape[1]} columns")
    images = np.linalg.norm(A @ E, axis=0)
    return _lp(images, p)


def entry_bound(M, p: float) -> float:
    """``(mn)^delta(p) (sum |a_ij|^p)^(1/p)``, an upper bound for ``||M||_{S^p}``."""
    p = _check_p(p)
    A = _as_array(M)
    m, n = A.shape
    return float((m * n) ** delta_exponent(p)) * _lp(A.ravel(), p)


@dataclass(frozen=True)
class TriangleReport:
    p: float
    lhs: float
    rhs: float
    quasi: bool
    holds: bool


def triangle_check(A, B, p: float, slack: float = 1e-9) -> TriangleReport:
    """Triangle inequality for ``p >= 1``; the ``p``-th power version for ``p < 1``."""
    p = _check_p(p)
    A, B = _as_array(A), _as_array(B)
    if A.shape != B.shape:
        raise WindowMismatchError(f"shapes {A.shape} and {B.shape} differ")
    quasi = p < 1
    if quasi:
        lhs = schatten_norm(A + B, p) ** p
        rhs = schatten_norm(A, p) ** p + schatten_norm(B, p) ** p
    else:
        lhs = schatten_norm(A + B, p)
        rhs = schatten_norm(A, p) + schatten_norm(B, p)
    holds = lhs <= rhs * (1 + slack)
    return TriangleReport(p, lhs, rhs, quasi, bool(holds))
