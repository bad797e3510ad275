"""Paraproduct symbols and the Besov/BMO norms computed from them.

A symbol is stored either as a function (a :class:`StepFunction`) or as its
rescaled Haar coefficients ``alpha(R) = |R|^-1/2 <f, h_R>`` with ``h_R`` the
all-cancellative tensor Haar function.

Difference norms of step functions diverge near the diagonal, so both
difference quadratures drop the region ``|x_j - y_j| < cutoff``.  Cell pairs
are integrated in closed form against ``|x - y|^-2``; both variables range
over the window.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from types import MappingProxyType
from typing import Sequence

import numpy as np

from .dyadic_grid import DyadicInterval, DyadicRectangle, Grid, Window
from .errors import CutoffTooSmallError, ExponentError, ResolutionError, WindowMismatchError
from .haar_system import StepFunction, haar_values, tensor_haar

__all__ = [
    "SymbolCoefficients",
    "lp_norm",
    "coefficients_of",
    "besov_dyadic_norm",
    "pair_kernel_weights",
    "difference_besov_norm_1d",
    "difference_besov_norm_2d",
    "difference_lag_sums_2d",
    "bmo_dyadic_diagnostic",
    "piecewise_linear_symbol",
]


def _as_rect(key) -> DyadicRectangle:
    if isinstance(key, DyadicRectangle):
        return key
    if isinstance(key, DyadicInterval):
        return DyadicRectangle.of(key)
    return DyadicRectangle(tuple(key))


class SymbolCoefficients(Mapping):
    """Finitely supported map ``R -> alpha(R)`` over dyadic rectangles.

    Keys may be given as intervals (one parameter) or rectangles; they are
    stored as rectangles.  Missing rectangles read as zero.
    """

    def __init__(self, values: Mapping | None = None, n: int | None = None):
        data = {}
        for key, v in (values or {}).items():
            data[_as_rect(key)] = float(v)
        dims = {R.n for R in data}
        if n is None:
            if len(dims) > 1:
                raise ValueError("rectangles of mixed dimension")
            n = dims.pop() if dims else 1
        elif dims and dims != {n}:
            raise ValueError(f"rectangles do not all have {n} axes")
        self._data = MappingProxyType(data)
        self.n = n

    def __getitem__(self, key) -> float:
        return self._data.get(_as_rect(key), 0.0)

    def __contains__(self, key) -> bool:
        return _as_rect(key) in self._data

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return f"SymbolCoefficients(n={self.n}, support={len(self)})"

    def values_array(self) -> np.ndarray:
        return np.array(list(self._data.values()), dtype=float)

    def restrict(self, keep) -> "SymbolCoefficients":
        """Sub-symbol on the rectangles for which ``keep(R)`` is true."""
        return SymbolCoefficients({R: v for R, v in self._data.items() if keep(R)}, n=self.n)

    def scaled(self, c: float) -> "SymbolCoefficients":
        return SymbolCoefficients({R: c * v for R, v in self._data.items()}, n=self.n)


def _check_p(p, minimum=0.0, strict=True) -> float:
    p = float(p)
    ok = p > minimum if strict else p >= minimum
    if not ok or not math.isfinite(p):
        raise ExponentError(f"invalid exponent p={p}")
    return p


def lp_norm(alpha, p: float) -> float:
    """``(sum_R |alpha(R)|^p)^(1/p)``; zero for an empty symbol."""
    p = _check_p(p)
    a = alpha.values_array() if isinstance(alpha, SymbolCoefficients) else np.asarray(alpha, float)
    a = np.abs(a[a != 0])
    if a.size == 0:
        return 0.0
    top = a.max()
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def _grids_for(f: StepFunction, grids) -> tuple[Grid, ...]:
    if grids is None:
        grids = (Grid.G0,) * f.n
    elif isinstance(grids, (int, Grid)):
        grids = (Grid(grids),) * f.n
    grids = tuple(Grid(g) for g in grids)
    if len(grids) != f.n:
        raise WindowMismatchError(f"{len(grids)} grids for a {f.n}-parameter symbol")
    for g, w in zip(grids, f.windows):
        if g == Grid.G1 and not w.shifted:
            raise WindowMismatchError("the shifted grid needs a window with shifted=True")
    return grids


def coefficients_of(f: StepFunction, grids=None) -> SymbolCoefficients:
    """``alpha(R) = |R|^-1/2 <f, h_R>`` for every window rectangle, one inner product each."""
    grids = _grids_for(f, grids)
    axes = [w.haar_intervals(g) for w, g in zip(f.windows, grids)]
    out = {}
    for combo in itertools.product(*axes):
        R = DyadicRectangle(combo)
        h = tensor_haar(R, (0,) * f.n, f.windows)
        out[R] = f.inner(h) / math.sqrt(R.measure)
    return SymbolCoefficients(out, n=f.n)


def _analysis_matrix(window: Window, grid: Grid) -> tuple[np.ndarray, list[DyadicInterval]]:
    """Rows give ``|I|^-1/2 <., h0_I>`` on cell values."""
    intervals = window.haar_intervals(grid)
    cw = float(window.cell_width)
    A = np.array([haar_values(I, 0, window) * cw / math.sqrt(I.length) for I in intervals])
    return A.reshape(len(intervals), window.n_cells), intervals


def _coefficient_array(f: StepFunction, grids, normalized=True) -> np.ndarray:
    out = f.values
    for axis, (w, g) in enumerate(zip(f.windows, grids)):
        A, intervals = _analysis_matrix(w, g)
        if not normalized:
            A = A * np.sqrt([float(I.length) for I in intervals])[:, None]
        out = np.moveaxis(np.tensordot(A, out, axes=([1], [axis])), 0, axis)
    return out


def besov_dyadic_norm(f: StepFunction, p: float, grids=None) -> float:
    """``[sum_R (|R|^-1/2 |<f, h_R>|)^p]^(1/p)`` over window rectangles of ``grids``."""
    p = _check_p(p)
    grids = _grids_for(f, grids)
    return lp_norm(_coefficient_array(f, grids).ravel(), p)


def pair_kernel_weights(n_cells: int, h: float, cutoff: float) -> np.ndarray:
    """``w[q] = integral over x in C_{a+q}, y in C_a, x - y >= cutoff of (x-y)^-2``.

    ``C_a`` are consecutive cells of width ``h``; ``w[0] = 0``.  The offset
    ``t = x - y`` has the triangular density ``h - |t - q h|`` on
    ``((q-1) h, (q+1) h)``, integrated exactly on each linear piece.
    """
    if cutoff < h * (1 - 1e-12):
        raise CutoffTooSmallError(f"cutoff {cutoff} is below the cell width {h}")

    def piece(a, b, lo, hi):
        # integral of (a + b t) / t^2 over [lo, hi]
        if hi <= lo:
            return 0.0
        return a * (1.0 / lo - 1.0 / hi) + b * math.log(hi / lo)

    w = np.zeros(n_cells)
    for q in range(1, n_cells):
        w[q] = (piece(-(q - 1) * h, 1.0, max(cutoff, (q - 1) * h), q * h)
                + piece((q + 1) * h, -1.0, max(cutoff, q * h), (q + 1) * h))
    return w


def difference_besov_norm_1d(f: StepFunction, p: float, cutoff: float | None = None) -> float:
    """``(iint_{|x-y| >= cutoff} |f(x) - f(y)|^p |x-y|^-2)^(1/p)`` over the window."""
    p = _check_p(p, 1.0, strict=False)
    if f.n != 1:
        raise WindowMismatchError("expected a one-parameter symbol")
    w = f.windows[0]
    h = float(w.cell_width)
    if cutoff is None:
        cutoff = 2.0**-w.K
    weights = pair_kernel_weights(w.n_cells, h, cutoff)
    v = f.values
    total = 0.0
    for q in np.nonzero(weights)[0]:
        total += weights[q] * float(np.sum(np.abs(v[q:] - v[:-q]) ** p))
    return (2.0 * total) ** (1.0 / p)


def difference_lag_sums_2d(f: StepFunction, ps: Sequence[float]) -> dict[float, np.ndarray]:
    """``S_p[q1, q2] = sum_{a, c} |double difference at lags (q1, q2)|^p``.

    The double difference is ``f(a+q1, c+q2) - f(a, c+q2) - f(a+q1, c) + f(a, c)``.
    Computing these once lets several cutoffs share the expensive part.
    """
    if f.n != 2:
        raise WindowMismatchError("expected a two-parameter symbol")
    F = f.values
    n1, n2 = F.shape
    out = {float(p): np.zeros((n1, n2)) for p in ps}
    for q1 in range(1, n1):
        G = F[q1:, :] - F[:-q1, :]
        if not np.any(G):
            continue
        for q2 in range(1, n2):
            D = np.abs(G[:, q2:] - G[:, :-q2])
            for p, S in out.items():
                S[q1, q2] = np.sum(D) if p == 1.0 else np.sum(D**p)
    return out


def difference_besov_norm_2d(f: StepFunction, p: float, cutoff=None,
                             lag_sums: dict | None = None) -> float:
    """Product difference norm with kernel ``prod_j |x_j - y_j|^-2``.

    ``cutoff`` is a scalar or one value per axis (default ``2^-K`` per axis).
    """
    p = _check_p(p, 1.0, strict=False)
    if f.n != 2:
        raise WindowMismatchError("expected a two-parameter symbol")
    if cutoff is None:
        cutoff = [2.0**-w.K for w in f.windows]
    elif np.isscalar(cutoff):
        cutoff = [float(cutoff)] * 2
    W = [pair_kernel_weights(w.n_cells, float(w.cell_width), c) for w, c in zip(f.windows, cutoff)]
    if lag_sums is None or float(p) not in lag_sums:
        lag_sums = difference_lag_sums_2d(f, [p])
    S = lag_sums[float(p)]
    total = float(W[0] @ S @ W[1])
    return (4.0 * total) ** (1.0 / p)


def bmo_dyadic_diagnostic(f: StepFunction, grids=None) -> float:
    """``sup_U [|U|^-1 sum_{R in U} |<f, h_R>|^2]^(1/2)`` over window rectangles ``U``.

    For one parameter this is the dyadic BMO norm at this truncation.  With
    several parameters the supremum over open sets is replaced by single
    rectangles, which gives a lower bound for product BMO.
    """
    grids = _grids_for(f, grids)
    energy = _coefficient_array(f, grids, normalized=False) ** 2
    containment = []
    measures = []
    for w, g in zip(f.windows, grids):
        intervals = w.haar_intervals(g)
        C = np.array([[1.0 if U.contains(I) else 0.0 for I in intervals] for U in intervals])
        containment.append(C)
        measures.append(np.array([float(U.length) for U in intervals]))
    S = energy
    for axis, C in enumerate(containment):
        S = np.moveaxis(np.tensordot(C, S, axes=([1], [axis])), 0, axis)
    U_measure = measures[0]
    for m in measures[1:]:
        U_measure = np.multiply.outer(U_measure, m)
    return float(math.sqrt(np.max(S / U_measure))) if S.size else 0.0


def piecewise_linear_symbol(knots, windows, support=None) -> StepFunction:
    """Sample a (multi)linear interpolant of ``knots`` at the fine-cell midpoints.

    ``knots`` is an array with one axis per window; axis ``j`` holds the
    values at equally spaced nodes spanning ``support[j] = (a, b)`` (default:
    the whole window).  The interpolant is zero outside the support.
    """
    knots = np.asarray(knots, dtype=float)
    windows = tuple(windows) if not isinstance(windows, Window) else (windows,)
    if knots.ndim != len(windows):
        raise WindowMismatchError("knots and windows disagree in dimension")
    if support is None:
        support = [(0, w.width) for w in windows]
    # per-axis interpolation matrices: cells x knots
    mats = []
    for w, (a, b), nk in zip(windows, support, knots.shape):
        if nk < 2:
            raise ResolutionError("need at least two knots per axis")
        x = (np.arange(w.n_cells) + 0.5) * float(w.cell_width)
        t = (x - a) / (b - a) * (nk - 1)
        M = np.zeros((w.n_cells, nk))
        inside = (x >= a) & (x < b)
        i0 = np.clip(np.floor(t).astype(int), 0, nk - 2)
        frac = t - i0
        rows = np.nonzero(inside)[0]
        M[rows, i0[rows]] = 1 - frac[rows]
        M[rows, i0[rows] + 1] = frac[rows]
        mats.append(M)
    values = knots
    for axis, M in enumerate(mats):
        values = np.moveaxis(np.tensordot(M, values, axes=([1], [axis])), 0, axis)
    return StepFunction(windows, values)
