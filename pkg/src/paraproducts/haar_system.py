"""Step functions and the Haar system on a truncated window.

Every function lives on the fine cells of one :class:`Window` per axis and is
stored as a dense array of cell values.  The coordinates used for operators
are *L2-orthonormal*: a step function ``f`` corresponds to the vector
``values * sqrt(cell_measure)``, so Euclidean inner products of vectors equal
L2 inner products of functions.

Conventions: ``h0`` is the cancellative Haar function ``|I|^-1/2 (-1_{I-} +
1_{I+})`` and ``h1`` the normalised indicator ``|I|^-1/2 1_I``.  Pattern bits
select between them, ``0`` for ``h0`` and ``1`` for ``h1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .dyadic_grid import DyadicInterval, DyadicRectangle, Grid, Window
from .errors import NotNestedError, ResolutionError, WindowMismatchError

__all__ = [
    "StepFunction",
    "HaarIndex",
    "ExpansionTerm",
    "haar0",
    "haar1",
    "tensor_haar",
    "haar_vector",
    "tensor_vector",
    "nu",
    "expand_indicator",
    "synthesize",
    "isotropic_basis",
    "product_basis",
]


def _as_windows(windows) -> tuple[Window, ...]:
    if isinstance(windows, Window):
        return (windows,)
    return tuple(windows)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Piecewise-constant function on the fine cells of ``windows``.

    ``values`` has one axis per window; axis ``j`` has ``windows[j].n_cells``
    entries.
    """

    windows: tuple[Window, ...]
    values: np.ndarray

    def __post_init__(self):
        windows = _as_windows(self.windows)
        values = np.array(self.values, dtype=float)
        shape = tuple(w.n_cells for w in windows)
        if values.shape != shape:
            raise WindowMismatchError(f"values of shape {values.shape} do not fit {shape}")
        values.flags.writeable = False
        object.__setattr__(self, "windows", windows)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.windows)

    @property
    def exact_cell_measure(self) -> Fraction:
        return reduce(lambda a, w: a * w.cell_width, self.windows, Fraction(1))

    @property
    def cell_measure(self) -> float:
        return float(self.exact_cell_measure)

    @classmethod
    def zeros(cls, windows) -> "StepFunction":
        windows = _as_windows(windows)
        return cls(windows, np.zeros(tuple(w.n_cells for w in windows)))

    @classmethod
    def from_vector(cls, windows, vector) -> "StepFunction":
        """Inverse of :meth:`vector`."""
        windows = _as_windows(windows)
        shape = tuple(w.n_cells for w in windows)
        measure = float(reduce(lambda a, w: a * w.cell_width, windows, Fraction(1)))
        return cls(windows, np.asarray(vector, dtype=float).reshape(shape) / math.sqrt(measure))

    def vector(self) -> np.ndarray:
        """L2-orthonormal coordinates (row-major over cells)."""
        return self.values.ravel() * math.sqrt(self.cell_measure)

    def _check(self, other: "StepFunction"):
        if self.windows != other.windows:
            raise WindowMismatchError(f"{self.windows} != {other.windows}")

    def inner(self, other: "StepFunction") -> float:
        self._check(other)
        return float(np.sum(self.values * other.values) * self.cell_measure)

    def norm(self) -> float:
        return math.sqrt(self.inner(self))

    def integral(self) -> float:
        return float(np.sum(self.values) * self.cell_measure)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        self._check(other)
        return StepFunction(self.windows, self.values + other.values)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        self._check(other)
        return StepFunction(self.windows, self.values - other.values)

    def __mul__(self, c: float) -> "StepFunction":
        return StepFunction(self.windows, self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "StepFunction":
        return self * -1.0


@dataclass(frozen=True)
class HaarIndex:
    """A rectangle together with a pattern choosing ``h0``/``h1`` per axis."""

    rect: DyadicRectangle
    pattern: tuple[int, ...]

    def __post_init__(self):
        if isinstance(self.rect, DyadicInterval):
            object.__setattr__(self, "rect", DyadicRectangle.of(self.rect))
        pattern = tuple(int(b) for b in self.pattern)
        if len(pattern) != self.rect.n or any(b not in (0, 1) for b in pattern):
            raise ValueError(f"pattern {self.pattern} does not match {self.rect}")
        object.__setattr__(self, "pattern", pattern)


@dataclass(frozen=True)
class ExpansionTerm:
    """One term ``coefficient * h^pattern_target`` of an indicator expansion.

    ``pattern`` is 0 for a Haar term and 1 for the mean term carried by the
    top interval of the expansion.
    """

    target: DyadicInterval
    pattern: int
    coefficient: float
    sign: int


def haar_values(I: DyadicInterval, pattern: int, window: Window) -> np.ndarray:
    """Cell values of ``h0_I`` (pattern 0) or ``h1_I`` (pattern 1)."""
    start, stop = window.cell_range(I)
    out = np.zeros(window.n_cells)
    amp = 1.0 / math.sqrt(I.length)
    if pattern == 1:
        out[start:stop] = amp
        return out
    if I.level >= window.K:
        raise ResolutionError(f"{I} is a finest cell; h0 needs one more level")
    mid = (start + stop) // 2
    out[start:mid] = -amp
    out[mid:stop] = amp
    return out


def haar_vector(I: DyadicInterval, pattern: int, window: Window) -> np.ndarray:
    return haar_values(I, pattern, window) * math.sqrt(window.cell_width)


def tensor_vector(R, pattern: Sequence[int], windows) -> np.ndarray:
    """Orthonormal coordinates of ``h^pattern_R``; axis 0 varies slowest."""
    windows = _as_windows(windows)
    R = R if isinstance(R, DyadicRectangle) else DyadicRectangle.of(R)
    if not (len(R) == len(pattern) == len(windows)):
        raise WindowMismatchError("rectangle, pattern and windows disagree in dimension")
    return reduce(np.kron, [haar_vector(I, e, w) for I, e, w in zip(R, pattern, windows)])


def haar0(I: DyadicInterval, window: Window) -> StepFunction:
    return StepFunction((window,), haar_values(I, 0, window))


def haar1(I: DyadicInterval, window: Window) -> StepFunction:
    return StepFunction((window,), haar_values(I, 1, window))


def tensor_haar(R, pattern: Sequence[int], windows) -> StepFunction:
    """Pointwise product of the axis factors ``h^{pattern[j]}_{R_j}``."""
    windows = _as_windows(windows)
    R = R if isinstance(R, DyadicRectangle) else DyadicRectangle.of(R)
    factors = [haar_values(I, e, w) for I, e, w in zip(R, pattern, windows)]
    return StepFunction(windows, reduce(np.multiply.outer, factors))


def nu(I: DyadicInterval, J: DyadicInterval) -> int:
    """Sign of ``h0_J`` on ``I``: +1 if ``I`` is in the right half of ``J``."""
    return 1 if I.is_right_half_of(J) else -1


def expand_indicator(I: DyadicInterval, U: DyadicInterval) -> list[ExpansionTerm]:
    """Expand ``h1_I`` over ``h0_J`` for ``I < J <= U`` plus the mean term on ``U``.

    The coefficient of ``h0_J`` is ``nu(I, J) sqrt(|I|/|J|)``.  On a bounded
    universe the constant part survives as ``sqrt(|I|/|U|) h1_U``.
    """
    if I.grid != U.grid or not U.strictly_contains(I):
        raise NotNestedError(f"{I} is not strictly inside {U}")
    terms = []
    J = I
    while J.level > U.level:
        J = J.parent()
        s = nu(I, J)
        terms.append(ExpansionTerm(J, 0, s * 2.0 ** (-(I.level - J.level) / 2), s))
    terms.append(ExpansionTerm(U, 1, 2.0 ** (-(I.level - U.level) / 2), 1))
    return terms


def synthesize(terms: Sequence[ExpansionTerm], window: Window) -> StepFunction:
    values = np.zeros(window.n_cells)
    for t in terms:
        values += t.coefficient * haar_values(t.target, t.pattern, window)
    return StepFunction((window,), values)


def isotropic_basis(windows, grid: Grid = Grid.G0) -> list[HaarIndex]:
    """Cubes with patterns in ``{0,1}^n`` minus all-ones, plus ``h1`` of the top cubes.

    Every axis must share one ``K``.  This is an orthonormal basis of the step
    functions at resolution ``K``.
    """
    windows = _as_windows(windows)
    K = windows[0].K
    if any(w.K != K for w in windows):
        raise WindowMismatchError("isotropic basis needs a common K")
    n = len(windows)
    patterns = [e for e in itertools.product((0, 1), repeat=n) if any(b == 0 for b in e)]
    out = []
    for k in range(K):
        for axes in itertools.product(*[w.intervals(k, grid) for w in windows]):
            R = DyadicRectangle(axes)
            out.extend(HaarIndex(R, e) for e in patterns)
    for axes in itertools.product(*[w.intervals(0, grid) for w in windows]):
        out.append(HaarIndex(DyadicRectangle(axes), (1,) * n))
    return out


def product_basis(windows, grid: Grid = Grid.G0) -> list[HaarIndex]:
    """Tensor product of the one-axis bases ``{h0_I} + {h1 of top intervals}``."""
    windows = _as_windows(windows)
    per_axis = []
    for w in windows:
        ax = [(I, 0) for I in w.haar_intervals(grid)]
        ax += [(I, 1) for I in w.intervals(0, grid)]
        per_axis.append(ax)
    return [HaarIndex(DyadicRectangle(tuple(I for I, _ in combo)), tuple(e for _, e in combo))
            for combo in itertools.product(*per_axis)]


def basis_matrix(indices: Sequence[HaarIndex], windows) -> np.ndarray:
    """Rows are the orthonormal coordinates of the indexed functions."""
    windows = _as_windows(windows)
    if not indices:
        return np.zeros((0, math.prod(w.n_cells for w in windows)))
    return np.array([tensor_vector(ix.rect, ix.pattern, windows) for ix in indices])
