"""Dyadic intervals and rectangles on a truncated window.

Two grids are available.  ``Grid.G0`` is the standard dyadic system
``[j 2^-k, (j+1) 2^-k)``; ``Grid.G1`` is its one-third shift, whose level-k
intervals are the G0 intervals translated by ``(-1)^k 2^-k / 3``.  All
endpoints are exact :class:`fractions.Fraction` values, so containment and
measure checks never round.

Levels count refinements: an interval of level ``k`` has length ``2^-k``.
A :class:`Window` fixes the working interval ``[0, width)`` and the finest
level ``K``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    LevelOverflowError,
    ParaproductError,
    ParentOutOfWindowError,
    ResolutionError,
    WindowClippedError,
)

__all__ = [
    "Grid",
    "DyadicInterval",
    "DyadicRectangle",
    "Window",
    "grid_shift",
    "children",
    "m_fold_children",
    "scale_separated_family",
    "covering_interval",
    "dilate",
]


class Grid(enum.IntEnum):
    G0 = 0
    G1 = 1


def grid_shift(grid: Grid, level: int) -> Fraction:
    """Offset of the level-``level`` intervals of ``grid`` relative to G0."""
    if grid == Grid.G0:
        return Fraction(0)
    return Fraction((-1) ** level, 3 * 2**level)


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval ``[j 2^-k + shift, (j+1) 2^-k + shift)`` of one grid."""

    grid: Grid
    level: int
    position: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")
        object.__setattr__(self, "grid", Grid(self.grid))

    @classmethod
    def at(cls, left, level: int, grid: Grid = Grid.G0) -> "DyadicInterval":
        """The interval of ``grid`` at ``level`` whose left endpoint is ``left``."""
        t = (Fraction(left) - grid_shift(grid, level)) * 2**level
        if t.denominator != 1:
            raise ResolutionError(f"{left} is not a level-{level} endpoint of {grid.name}")
        return cls(grid, level, int(t))

    @property
    def length(self) -> Fraction:
        return Fraction(1, 2**self.level)

    @property
    def left(self) -> Fraction:
        return self.position * self.length + grid_shift(self.grid, self.level)

    @property
    def right(self) -> Fraction:
        return self.left + self.length

    @property
    def center(self) -> Fraction:
        return self.left + self.length / 2

    def contains(self, other: "DyadicInterval") -> bool:
        return self.left <= other.left and other.right <= self.right

    def strictly_contains(self, other: "DyadicInterval") -> bool:
        return self.contains(other) and self.level < other.level

    def halves(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        """Left and right halves, without any window check."""
        k = self.level + 1
        return (DyadicInterval.at(self.left, k, self.grid),
                DyadicInterval.at(self.center, k, self.grid))

    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise ParentOutOfWindowError(f"{self} has no parent at level >= 0")
        k = self.level - 1
        t = (self.left - grid_shift(self.grid, k)) * 2**k
        return DyadicInterval(self.grid, k, math.floor(t))

    def ancestor(self, level: int) -> "DyadicInterval":
        out = self
        while out.level > level:
            out = out.parent()
        return out

    def is_right_half_of(self, other: "DyadicInterval") -> bool:
        """True when ``self`` lies in the right half of ``other``."""
        return self.left >= other.center

    def __repr__(self):
        return f"{self.grid.name}[{self.left}, {self.right})"


@dataclass(frozen=True, order=True)
class DyadicRectangle:
    """Product of dyadic intervals, one per parameter."""

    axes: tuple[DyadicInterval, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))

    @classmethod
    def of(cls, *intervals: DyadicInterval) -> "DyadicRectangle":
        return cls(tuple(intervals))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def measure(self) -> Fraction:
        out = Fraction(1)
        for ax in self.axes:
            out *= ax.length
        return out

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(ax.level for ax in self.axes)

    def contains(self, other: "DyadicRectangle") -> bool:
        return all(a.contains(b) for a, b in zip(self.axes, other.axes))

    def __getitem__(self, j: int) -> DyadicInterval:
        return self.axes[j]

    def __iter__(self):
        return iter(self.axes)

    def __len__(self):
        return len(self.axes)

    def __repr__(self):
        return " x ".join(repr(a) for a in self.axes)


@dataclass(frozen=True)
class Window:
    """Working interval ``[0, width)`` resolved down to level ``K``.

    Fine cells have width ``2^-K``, or ``2^-K / 3`` when ``shifted`` is set so
    that intervals of the one-third-shifted grid are unions of cells.
    """

    K: int
    width: int = 1
    shifted: bool = False

    def __post_init__(self):
        if self.K < 0 or self.width < 1:
            raise ValueError(f"invalid window K={self.K}, width={self.width}")

    @property
    def cells_per_unit(self) -> int:
        return (3 if self.shifted else 1) * 2**self.K

    @property
    def n_cells(self) -> int:
        return self.width * self.cells_per_unit

    @property
    def cell_width(self) -> Fraction:
        return Fraction(1, self.cells_per_unit)

    @property
    def denominator(self) -> int:
        """Common denominator of every admissible endpoint."""
        return 3 * 2**self.K

    def contains(self, I: DyadicInterval) -> bool:
        return I.level <= self.K and 0 <= I.left and I.right <= self.width

    def intervals(self, level: int, grid: Grid = Grid.G0) -> list[DyadicInterval]:
        """All intervals of ``grid`` at ``level`` lying inside the window."""
        if not 0 <= level <= self.K:
            raise LevelOverflowError(f"level {level} outside 0..{self.K}")
        s = grid_shift(grid, level)
        scale = 2**level
        lo = math.ceil(-s * scale)
        hi = math.floor((self.width - s) * scale) - 1
        return [DyadicInterval(grid, level, j) for j in range(lo, hi + 1)]

    def all_intervals(self, grid: Grid = Grid.G0,
                      levels: Iterable[int] | None = None) -> list[DyadicInterval]:
        if levels is None:
            levels = range(self.K + 1)
        return [I for k in levels for I in self.intervals(k, grid)]

    def haar_intervals(self, grid: Grid = Grid.G0) -> list[DyadicInterval]:
        """Intervals that carry a Haar function at this resolution (level < K)."""
        return self.all_intervals(grid, range(self.K))

    def cell_range(self, I: DyadicInterval) -> tuple[int, int]:
        """Half-open range of fine-cell indices covered by ``I``."""
        if not self.contains(I):
            raise WindowClippedError(f"{I} is not inside {self}")
        start = I.left / self.cell_width
        stop = I.right / self.cell_width
        if start.denominator != 1 or stop.denominator != 1:
            raise ResolutionError(f"{I} is not a union of cells of {self}")
        return int(start), int(stop)


def children(I: DyadicInterval, window: Window) -> tuple[DyadicInterval, DyadicInterval]:
    """Left and right halves of ``I``; both lie in the same grid one level down."""
    if I.level >= window.K:
        raise LevelOverflowError(f"{I} is already at the finest level {window.K}")
    return I.halves()


def m_fold_children(J: DyadicInterval, m: int, window: Window) -> list[DyadicInterval]:
    """The ``2^m`` subintervals of ``J`` whose length is ``2^-m |J|``, left to right."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if J.level + m > window.K:
        raise LevelOverflowError(f"{J} has no level {J.level + m} descendants in {window}")
    k = J.level + m
    first = DyadicInterval.at(J.left, k, J.grid)
    return [DyadicInterval(J.grid, k, first.position + i) for i in range(2**m)]


def scale_separated_family(ell: int, a: int, offset_class: int, window: Window,
                           grid: Grid = Grid.G0,
                           levels: Sequence[int] | None = None) -> list[DyadicInterval]:
    """One of the ``2 ell`` subcollections with scales separated by ``ell``.

    ``offset_class = 2 r + s`` selects the levels ``k = a + r (mod ell)`` and the
    positions of parity ``s``.  Members then satisfy ``I +- 2|I|`` in the family
    (when inside the window) and ``I +- |I|`` not in it.  For fixed ``a`` the
    ``2 ell`` classes partition the window intervals; the two classes sharing
    ``r`` partition the intervals at levels ``= a + r (mod ell)``.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    if not 0 <= offset_class < 2 * ell:
        raise ValueError(f"offset_class must lie in [0, {2 * ell}), got {offset_class}")
    r, parity = divmod(offset_class, 2)
    residue = (a + r) % ell
    if levels is None:
        levels = range(window.K + 1)
    out = []
    for k in levels:
        if k % ell != residue:
            continue
        out.extend(I for I in window.intervals(k, grid) if I.position % 2 == parity)
    return out


def dilate(left: Fraction, right: Fraction, factor) -> tuple[Fraction, Fraction]:
    """Concentric dilate of ``[left, right)`` by ``factor``."""
    c = (left + right) / 2
    half = (right - left) * Fraction(factor) / 2
    return c - half, c + half


def covering_interval(left, right, window: Window, dilation=8) -> DyadicInterval:
    """Smallest ``Q`` in G0 or G1 with ``[left, right) <= Q <= dilation * [left, right)``.

    The dilate is concentric.  A factor of 4 is not always attainable with the
    one-third shift: ``[65/64, 397/384)`` has no such ``Q``.  The default 8 is
    attained for every interval (the worst observed factor is about 6.6).
    """
    left, right = Fraction(left), Fraction(right)
    d = window.denominator
    if (left * d).denominator != 1 or (right * d).denominator != 1:
        raise ResolutionError(f"endpoints must have denominator dividing {d}")
    length = right - left
    if length < Fraction(4, 2**window.K):
        raise ResolutionError(f"interval shorter than 2^-(K-2) = {Fraction(4, 2**window.K)}")
    if left < 0 or right > window.width:
        raise WindowClippedError(f"[{left}, {right}) is not inside the window")
    lo, hi = dilate(left, right, dilation)
    # |I| <= |Q| <= dilation |I|; finest level first
    k_fine = min(window.K, math.floor(-math.log2(length)) + 1)
    for k in range(k_fine, -1, -1):
        size = Fraction(1, 2**k)
        if size < length:
            continue
        if size > dilation * length:
            break
        for grid in (Grid.G0, Grid.G1):
            j = math.floor((left - grid_shift(grid, k)) * 2**k)
            Q = DyadicInterval(grid, k, j)
            if Q.right >= right and lo <= Q.left and Q.right <= hi and window.contains(Q):
                return Q
    if lo < 0 or hi > window.width:
        raise WindowClippedError(f"{dilation}x dilate of [{left}, {right}) is clipped by the window")
    raise ParaproductError(f"no covering interval for [{left}, {right}) within a {dilation}x dilate")
