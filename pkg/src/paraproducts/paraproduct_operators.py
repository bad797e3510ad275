"""Haar paraproducts and their decompositions as dense matrices.

Operators act on the L2-orthonormal cell coordinates of :mod:`.haar_system`.
The rank-one operator ``phi (x) psi`` maps ``f`` to ``<f, phi> psi``, so its
matrix is ``psi phi^T``: the first factor is read on the input side and the
second factor is written on the output side.

The paraproduct with patterns ``eps``/``delta`` is::

    T f = sum_R alpha(R) <f, h^eps_R> h^delta_R

and is admissible when no coordinate has ``eps[j] == delta[j] == 1``.

Every normalised indicator can be traded for the Haar functions of its
ancestors (:func:`.haar_system.expand_indicator`).  Doing this on each
indicator coordinate splits ``T`` into pieces ``A_m`` indexed by the depth
vector ``m``, plus a remainder collecting every term that used the mean of a
top-level interval.  On the whole line the remainder would vanish; in a
bounded window it does not, so it is assembled term by term rather than by
subtraction.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Sequence

import numpy as np

from .dyadic_grid import DyadicInterval, DyadicRectangle, Window, m_fold_children
from .errors import (
    InadmissiblePatternError,
    LevelOverflowError,
    NonOrthonormalError,
    ParentOutOfWindowError,
    WindowMismatchError,
)
from .haar_system import HaarIndex, StepFunction, basis_matrix, haar_vector, nu
from .symbols_besov import SymbolCoefficients

__all__ = [
    "OperatorMatrix",
    "SignTable",
    "rank_one_sum",
    "haar_paraproduct",
    "h_mJ",
    "s_m_operator",
    "Decomposition",
    "decompose",
    "a_m_operator",
    "a_m_blocks",
    "projection",
    "t1_lower_operator",
    "t11_lower_operator",
    "VARIANTS",
]

#: Named two-parameter patterns for :func:`a_m_operator`.
VARIANTS = {
    "indicator-both": ((1, 1), (0, 0)),
    "mixed": ((1, 0), (0, 1)),
}


def _as_windows(windows) -> tuple[Window, ...]:
    return (windows,) if isinstance(windows, Window) else tuple(windows)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Immutable dense matrix of an operator between step-function spaces.

    ``meta`` records how the operator was built (patterns, depth, ...).
    """

    matrix: np.ndarray
    windows: tuple[Window, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        windows = _as_windows(self.windows)
        M = np.array(self.matrix, dtype=float)
        N = math.prod(w.n_cells for w in windows)
        if M.shape != (N, N):
            raise WindowMismatchError(f"matrix shape {M.shape} does not fit {N} cells")
        M.flags.writeable = False
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "windows", windows)
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def T(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.T, self.windows, {**self.meta, "transposed": True})

    def apply(self, f: StepFunction) -> StepFunction:
        if f.windows != self.windows:
            raise WindowMismatchError(f"{f.windows} != {self.windows}")
        return StepFunction.from_vector(self.windows, self.matrix @ f.vector())

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.windows != self.windows:
            raise WindowMismatchError(f"{other.windows} != {self.windows}")
        return OperatorMatrix(self.matrix + other.matrix, self.windows)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self + other * -1.0

    def __mul__(self, c: float) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix * c, self.windows, self.meta)

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.windows != self.windows:
            raise WindowMismatchError(f"{other.windows} != {self.windows}")
        return OperatorMatrix(self.matrix @ other.matrix, self.windows)


class SignTable:
    """``nu(R, S)``: product over axes of +1 (right half) / -1 (left half)."""

    def __init__(self):
        self._cache: dict = {}

    def __call__(self, R, S) -> int:
        key = (R, S)
        if key not in self._cache:
            if isinstance(R, DyadicInterval):
                self._cache[key] = nu(R, S)
            else:
                self._cache[key] = math.prod(nu(a, b) for a, b in zip(R, S))
        return self._cache[key]

    __getitem__ = lambda self, key: self(*key)  # noqa: E731


@lru_cache(maxsize=None)
def _vec(I: DyadicInterval, pattern: int, window: Window) -> np.ndarray:
    v = haar_vector(I, pattern, window)
    v.flags.writeable = False
    return v


def _kron(vectors) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.kron(out, v)
    return out


def _assemble(coefs, outs, ins, N: int) -> np.ndarray:
    if not coefs:
        return np.zeros((N, N))
    U = np.array(outs)
    V = np.array(ins)
    return (U.T * np.asarray(coefs)) @ V


def rank_one_sum(terms: Iterable[tuple], windows=None, meta=None) -> OperatorMatrix:
    """Matrix of ``f -> sum coef <f, v> u`` for terms ``(coef, u, v)``."""
    terms = list(terms)
    if windows is None:
        if not terms:
            raise WindowMismatchError("an empty sum needs explicit windows")
        windows = terms[0][1].windows
    windows = _as_windows(windows)
    N = math.prod(w.n_cells for w in windows)
    coefs, outs, ins = [], [], []
    for c, u, v in terms:
        if u.windows != windows or v.windows != windows:
            raise WindowMismatchError("terms live on different windows")
        coefs.append(float(c))
        outs.append(u.vector())
        ins.append(v.vector())
    return OperatorMatrix(_assemble(coefs, outs, ins, N), windows, meta or {})


def _check_pattern(eps, delta, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    eps = tuple(int(b) for b in eps)
    delta = tuple(int(b) for b in delta)
    if len(eps) != n or len(delta) != n:
        raise WindowMismatchError(f"patterns {eps}, {delta} do not have {n} entries")
    if any(b not in (0, 1) for b in eps + delta):
        raise InadmissiblePatternError(f"patterns must be bit vectors: {eps}, {delta}")
    if any(e == d == 1 for e, d in zip(eps, delta)):
        raise InadmissiblePatternError(f"eps={eps}, delta={delta} share an indicator coordinate")
    return eps, delta


def _support(alpha: SymbolCoefficients) -> list[tuple[DyadicRectangle, float]]:
    return sorted((R, v) for R, v in alpha.items() if v != 0.0)


def haar_paraproduct(alpha: SymbolCoefficients, eps, delta, windows) -> OperatorMatrix:
    """``sum_R alpha(R) h^eps_R (x) h^delta_R`` (input ``h^eps``, output ``h^delta``)."""
    windows = _as_windows(windows)
    n = len(windows)
    if alpha.n != n:
        raise WindowMismatchError(f"{alpha.n}-parameter symbol on {n} windows")
    eps, delta = _check_pattern(eps, delta, n)
    coefs, outs, ins = [], [], []
    for R, a in _support(alpha):
        coefs.append(a)
        outs.append(_kron([_vec(I, d, w) for I, d, w in zip(R, delta, windows)]))
        ins.append(_kron([_vec(I, e, w) for I, e, w in zip(R, eps, windows)]))
    N = math.prod(w.n_cells for w in windows)
    return OperatorMatrix(_assemble(coefs, outs, ins, N), windows,
                          {"kind": "paraproduct", "eps": eps, "delta": delta})


def h_mJ(alpha: SymbolCoefficients, m: int, J: DyadicInterval, window: Window,
         signs: SignTable | None = None) -> StepFunction:
    """``sum_{I in D(m, J)} nu(I, J) alpha(I) h0_I`` as a step function."""
    signs = signs or SignTable()
    values = np.zeros(window.n_cells)
    for I in m_fold_children(J, m, window):
        a = alpha[I]
        if a != 0.0:
            values += signs(I, J) * a * _vec(I, 0, window)
    return StepFunction.from_vector((window,), values)


def s_m_operator(alpha: SymbolCoefficients, m: int, window: Window) -> OperatorMatrix:
    """``S_m = sum_J h0_J (x) H_{m,J}``: reads ``h0_J``, writes ``H_{m,J}``."""
    if alpha.n != 1:
        raise WindowMismatchError("S_m is defined for one-parameter symbols")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    signs = SignTable()
    grids = sorted({R[0].grid for R, _ in _support(alpha)})
    coefs, outs, ins = [], [], []
    for grid in grids:
        for k in range(0, window.K - m):
            for J in window.intervals(k, grid):
                H = h_mJ(alpha, m, J, window, signs)
                v = H.vector()
                if np.any(v):
                    coefs.append(1.0)
                    outs.append(v)
                    ins.append(_vec(J, 0, window))
    return OperatorMatrix(_assemble(coefs, outs, ins, window.n_cells), (window,),
                          {"kind": "S_m", "m": m})


@dataclass(frozen=True)
class _Option:
    """One way to write ``h1_I``: a Haar term on ``J`` (depth ``m``) or the top mean."""

    target: DyadicInterval
    pattern: int
    depth: int
    coefficient: float  # excludes 2^(-depth/2) for Haar terms


def _indicator_options(I: DyadicInterval, window: Window) -> list[_Option]:
    out = []
    J = I
    while J.level > 0:
        J = J.parent()
        if not window.contains(J):
            raise ParentOutOfWindowError(f"ancestor {J} of {I} leaves the window")
        out.append(_Option(J, 0, I.level - J.level, float(nu(I, J))))
    out.append(_Option(J, 1, 0, 2.0 ** (-I.level / 2)))
    return out


@dataclass(frozen=True)
class Decomposition:
    """``T = sum_m 2^(-|m|/2) pieces[m] + remainder``.

    ``m`` has one entry per coordinate; coordinates without an indicator stay 0.
    """

    pieces: dict
    remainder: OperatorMatrix
    eps: tuple[int, ...]
    delta: tuple[int, ...]

    def reconstruct(self) -> OperatorMatrix:
        total = self.remainder.matrix.copy()
        for m, A in self.pieces.items():
            total += 2.0 ** (-sum(m) / 2) * A.matrix
        return OperatorMatrix(total, self.remainder.windows, {"kind": "reconstruction"})


def _expansion_terms(alpha: SymbolCoefficients, eps, delta, windows):
    """Yield ``(R, m, is_mean, coef, out_factors, in_factors)`` for every expanded term.

    ``coef`` includes ``alpha(R)`` and the signs; for mean terms it also
    carries the full ``2^(-depth/2)`` factors so the remainder is exact.
    """
    n = len(windows)
    expand = [e == 1 or d == 1 for e, d in zip(eps, delta)]
    for R, a in _support(alpha):
        choices = [_indicator_options(I, w) if ex else [None]
                   for I, w, ex in zip(R, windows, expand)]
        for combo in itertools.product(*choices):
            m = tuple(o.depth if o is not None else 0 for o in combo)
            is_mean = any(o is not None and o.pattern == 1 for o in combo)
            coef = a
            for o in combo:
                if o is not None:
                    coef *= o.coefficient
            if is_mean:
                coef *= 2.0 ** (-sum(m) / 2)
            out_f, in_f = [], []
            for j in range(n):
                base = (R[j], 0)
                o = combo[j]
                swapped = (o.target, o.pattern) if o is not None else base
                out_f.append(swapped if delta[j] == 1 else (R[j], delta[j]))
                in_f.append(swapped if eps[j] == 1 else (R[j], eps[j]))
            yield R, m, is_mean, coef, tuple(out_f), tuple(in_f)


def decompose(alpha: SymbolCoefficients, eps, delta, windows) -> Decomposition:
    """Split ``haar_paraproduct(alpha, eps, delta)`` by indicator-expansion depth."""
    windows = _as_windows(windows)
    n = len(windows)
    if alpha.n != n:
        raise WindowMismatchError(f"{alpha.n}-parameter symbol on {n} windows")
    eps, delta = _check_pattern(eps, delta, n)
    N = math.prod(w.n_cells for w in windows)
    acc = defaultdict(lambda: ([], [], []))
    for _, m, is_mean, coef, out_f, in_f in _expansion_terms(alpha, eps, delta, windows):
        key = "rem" if is_mean else m
        c, o, i = acc[key]
        c.append(coef)
        o.append(_kron([_vec(I, e, w) for (I, e), w in zip(out_f, windows)]))
        i.append(_kron([_vec(I, e, w) for (I, e), w in zip(in_f, windows)]))
    pieces = {}
    for key in sorted(k for k in acc if k != "rem"):
        pieces[key] = OperatorMatrix(_assemble(*acc[key], N), windows,
                                     {"kind": "A_m", "m": key, "eps": eps, "delta": delta})
    rem = acc.get("rem", ([], [], []))
    remainder = OperatorMatrix(_assemble(*rem, N), windows,
                               {"kind": "mean-remainder", "eps": eps, "delta": delta})
    return Decomposition(pieces, remainder, eps, delta)


def _variant(variant: str):
    try:
        return VARIANTS[variant]
    except KeyError:
        raise InadmissiblePatternError(f"unknown variant {variant!r}; use one of {sorted(VARIANTS)}")


def a_m_operator(alpha: SymbolCoefficients, m: Sequence[int], variant: str,
                 windows) -> OperatorMatrix:
    """Two-parameter piece ``A_m`` of the chosen pattern (``m_j >= 1``)."""
    windows = _as_windows(windows)
    if alpha.n != 2 or len(windows) != 2:
        raise WindowMismatchError("A_m is defined for two-parameter symbols")
    m = tuple(int(x) for x in m)
    if len(m) != 2 or min(m) < 1:
        raise ValueError(f"m must be a pair of integers >= 1, got {m}")
    eps, delta = _variant(variant)
    dec = decompose(alpha, eps, delta, windows)
    N = math.prod(w.n_cells for w in windows)
    return dec.pieces.get(m, OperatorMatrix(np.zeros((N, N)), windows, {"kind": "A_m", "m": m}))


@dataclass(frozen=True)
class Block:
    """Coefficient matrix of ``A_m`` between two orthonormal families.

    ``rows``/``cols`` list the output/input Haar factors; ``support`` the
    rectangles ``R`` whose coefficients fill the block.
    """

    top: tuple
    rows: list
    cols: list
    matrix: np.ndarray
    support: list


def a_m_blocks(alpha: SymbolCoefficients, m: Sequence[int], eps, delta, windows) -> list[Block]:
    """Split ``A_m`` into its orthogonal blocks ``A_{m,S}``.

    ``S`` has ``J_j`` (the ancestor reached at depth ``m_j``) on expanded
    coordinates and ``R_j`` elsewhere.  Blocks act on disjoint orthonormal
    families, so ``||A_m||_p^p = sum_S ||A_{m,S}||_p^p``.
    """
    windows = _as_windows(windows)
    eps, delta = _check_pattern(eps, delta, len(windows))
    m = tuple(int(x) for x in m)
    groups = defaultdict(dict)
    for R, mm, is_mean, coef, out_f, in_f in _expansion_terms(alpha, eps, delta, windows):
        if is_mean or mm != m:
            continue
        top = tuple(R[j].ancestor(R[j].level - mm[j]) for j in range(len(R)))
        groups[top][(out_f, in_f)] = (coef, R)
    blocks = []
    for top in sorted(groups):
        entries = groups[top]
        rows = sorted({k[0] for k in entries})
        cols = sorted({k[1] for k in entries})
        ri = {r: i for i, r in enumerate(rows)}
        ci = {c: i for i, c in enumerate(cols)}
        B = np.zeros((len(rows), len(cols)))
        support = []
        for (o, i), (c, R) in entries.items():
            B[ri[o], ci[i]] += c
            support.append(R)
        blocks.append(Block(top, rows, cols, B, sorted(support)))
    return blocks


def projection(indices: Sequence[HaarIndex], windows) -> OperatorMatrix:
    """Orthogonal projection onto the span of ``indices``."""
    windows = _as_windows(windows)
    N = math.prod(w.n_cells for w in windows)
    E = basis_matrix(list(indices), windows)
    if len(E):
        gram = E @ E.T
        if not np.allclose(gram, np.eye(len(E)), rtol=0, atol=1e-10):
            raise NonOrthonormalError("projection indices are not orthonormal")
    P = E.T @ E if len(E) else np.zeros((N, N))
    return OperatorMatrix(P, windows, {"kind": "projection", "rank": len(E)})


def _parent_in(I: DyadicInterval, window: Window) -> DyadicInterval:
    P = I.parent()
    if not window.contains(P):
        raise ParentOutOfWindowError(f"parent of {I} leaves the window")
    return P


def t1_lower_operator(alpha: SymbolCoefficients, family: Iterable[DyadicInterval],
                      window: Window) -> OperatorMatrix:
    """``sum_{I in family} nu(I, I') alpha(I) h0_{I'} (x) h0_I`` with ``I'`` the parent.

    Reads ``h0`` of the parents, writes ``h0_I``.
    """
    coefs, outs, ins = [], [], []
    for I in sorted(set(family)):
        P = _parent_in(I, window)
        a = alpha[I]
        if a == 0.0:
            continue
        coefs.append(nu(I, P) * a)
        outs.append(_vec(I, 0, window))
        ins.append(_vec(P, 0, window))
    return OperatorMatrix(_assemble(coefs, outs, ins, window.n_cells), (window,),
                          {"kind": "T1"})


def t11_lower_operator(alpha: SymbolCoefficients, family1, family2, windows) -> OperatorMatrix:
    """Two-parameter main term for the mixed pattern.

    ``sum nu(R, R') alpha(R)`` reading ``h0_{R1'} x h0_{R2}`` and writing
    ``h0_{R1} x h0_{R2'}``, over ``R1`` in ``family1`` and ``R2`` in ``family2``.
    """
    w1, w2 = _as_windows(windows)
    coefs, outs, ins = [], [], []
    for R1 in sorted(set(family1)):
        P1 = _parent_in(R1, w1)
        for R2 in sorted(set(family2)):
            P2 = _parent_in(R2, w2)
            a = alpha[DyadicRectangle((R1, R2))]
            if a == 0.0:
                continue
            coefs.append(nu(R1, P1) * nu(R2, P2) * a)
            outs.append(np.kron(_vec(R1, 0, w1), _vec(P2, 0, w2)))
            ins.append(np.kron(_vec(P1, 0, w1), _vec(R2, 0, w2)))
    N = w1.n_cells * w2.n_cells
    return OperatorMatrix(_assemble(coefs, outs, ins, N), (w1, w2), {"kind": "T11"})


def check_levels(alpha: SymbolCoefficients, windows) -> None:
    """Raise if ``alpha`` charges a rectangle that has no Haar function in ``windows``."""
    windows = _as_windows(windows)
    for R in alpha:
        for I, w in zip(R, windows):
            if I.level >= w.K:
                raise LevelOverflowError(f"{I} is at the finest level of {w}")
