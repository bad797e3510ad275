import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from paraproducts.dyadic_grid import DyadicInterval, DyadicRectangle, Grid, Window
from paraproducts.errors import NotNestedError, ResolutionError, WindowMismatchError
from paraproducts.haar_system import (
    HaarIndex,
    StepFunction,
    basis_matrix,
    expand_indicator,
    haar0,
    haar1,
    isotropic_basis,
    nu,
    product_basis,
    synthesize,
    tensor_haar,
    tensor_vector,
)

G0 = Grid.G0


def I(k, j, grid=G0):
    return DyadicInterval(grid, k, j)


def test_haar0_unit_interval_values():
    assert haar0(I(0, 0), Window(1)).values.tolist() == [-1.0, 1.0]


def test_haar0_finest_cell_rejected():
    with pytest.raises(ResolutionError):
        haar0(I(2, 1), Window(2))


@pytest.mark.parametrize("grid,w", [(G0, Window(4)), (Grid.G1, Window(4, 3, shifted=True))])
def test_haar0_orthonormal_and_mean_zero(grid, w):
    fs = [haar0(J, w) for J in w.haar_intervals(grid)]
    gram = np.array([[f.inner(g) for g in fs] for f in fs])
    assert np.abs(gram - np.eye(len(fs))).max() < 1e-14
    assert all(abs(f.integral()) < 1e-15 for f in fs)


def test_haar1_values_and_norm():
    f = haar1(I(1, 0), Window(1))
    assert f.values == pytest.approx([math.sqrt(2), 0.0], abs=1e-15)
    assert f.norm() == pytest.approx(1.0, abs=1e-15)


def test_haar1_orthogonal_to_haar0_same_interval():
    w = Window(3)
    for J in w.haar_intervals():
        assert haar1(J, w).inner(haar0(J, w)) == 0.0
        assert haar1(J, w).norm() == pytest.approx(1.0, abs=1e-14)


def test_tensor_haar_sign_pattern():
    w = Window(1)
    R = DyadicRectangle.of(I(0, 0), I(0, 0))
    assert tensor_haar(R, (0, 0), (w, w)).values.tolist() == [[1.0, -1.0], [-1.0, 1.0]]


def test_tensor_haar_indicator_constant():
    w = Window(2)
    R = DyadicRectangle.of(I(1, 1), I(0, 0))
    f = tensor_haar(R, (1, 1), (w, w))
    assert np.allclose(f.values[2:, :], 1 / math.sqrt(float(R.measure)))
    assert np.all(f.values[:2, :] == 0)
    assert f.norm() == pytest.approx(1.0, abs=1e-14)


def test_tensor_vector_matches_tensor_haar():
    w1, w2 = Window(2), Window(3)
    R = DyadicRectangle.of(I(1, 0), I(2, 3))
    for e in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        assert np.allclose(tensor_vector(R, e, (w1, w2)), tensor_haar(R, e, (w1, w2)).vector())


@pytest.mark.parametrize("windows", [(Window(5),), (Window(3), Window(3)), (Window(2),) * 3])
def test_isotropic_basis_orthonormal_and_complete(windows):
    B = basis_matrix(isotropic_basis(windows), windows)
    N = math.prod(w.n_cells for w in windows)
    assert B.shape == (N, N)
    assert np.abs(B @ B.T - np.eye(N)).max() < 1e-14


@pytest.mark.parametrize("windows", [(Window(3), Window(2)), (Window(2), Window(2), Window(2))])
def test_product_basis_round_trip(windows):
    B = basis_matrix(product_basis(windows), windows)
    N = math.prod(w.n_cells for w in windows)
    assert np.abs(B @ B.T - np.eye(N)).max() < 1e-14
    rng = np.random.default_rng(3)
    f = StepFunction(windows, rng.standard_normal(tuple(w.n_cells for w in windows)))
    coef = B @ f.vector()
    back = StepFunction.from_vector(windows, B.T @ coef)
    assert np.abs(back.values - f.values).max() < 1e-12


def test_mixed_level_patterns_are_not_orthonormal():
    # all rectangles with every pattern in E_n overcount: h1 of a rectangle
    # overlaps h0 factors of coarser rectangles on the same axis
    w = Window(2)
    a = tensor_vector(DyadicRectangle.of(I(1, 0), I(0, 0)), (1, 0), (w, w))
    b = tensor_vector(DyadicRectangle.of(I(0, 0), I(0, 0)), (0, 0), (w, w))
    assert abs(a @ b) > 0.1


def test_inner_product_exact_for_dyadic_values():
    w = Window(3)
    rng = np.random.default_rng(0)
    a = rng.integers(-8, 9, 8) / 4
    b = rng.integers(-8, 9, 8) / 8
    exact = sum(F(x) * F(y) for x, y in zip(a, b)) * w.cell_width
    assert StepFunction((w,), a).inner(StepFunction((w,), b)) == float(exact)


def test_window_mismatch():
    with pytest.raises(WindowMismatchError):
        haar0(I(0, 0), Window(2)).inner(haar0(I(0, 0), Window(3)))
    with pytest.raises(WindowMismatchError):
        StepFunction((Window(2),), np.zeros(3))


@given(arrays(np.float64, 16, elements=st.floats(-1e3, 1e3)), st.floats(-10, 10))
def test_step_function_vector_round_trip(values, c):
    w = Window(4)
    f = StepFunction((w,), values)
    g = StepFunction.from_vector((w,), f.vector())
    assert np.allclose(g.values, f.values, rtol=1e-14, atol=1e-12)
    assert np.allclose((c * f).values, c * values)


# -- indicator expansion ------------------------------------------------------

def test_expand_quarter_interval():
    terms = expand_indicator(I(2, 0), I(0, 0))
    got = {(t.target, t.pattern): t.coefficient for t in terms}
    assert got[(I(1, 0), 0)] == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    assert got[(I(0, 0), 0)] == pytest.approx(-0.5, abs=1e-15)
    assert got[(I(0, 0), 1)] == pytest.approx(0.5, abs=1e-15)
    w = Window(2)
    assert np.abs(synthesize(terms, w).values - haar1(I(2, 0), w).values).max() < 1e-15


def test_expand_right_half():
    terms = expand_indicator(I(1, 1), I(0, 0))
    assert [(t.target, t.pattern, t.sign) for t in terms] == [(I(0, 0), 0, 1), (I(0, 0), 1, 1)]
    assert all(t.coefficient == pytest.approx(1 / math.sqrt(2), abs=1e-15) for t in terms)


def test_expand_not_nested():
    with pytest.raises(NotNestedError):
        expand_indicator(I(1, 0), I(1, 1))
    with pytest.raises(NotNestedError):
        expand_indicator(I(0, 0), I(0, 0))
    with pytest.raises(NotNestedError):
        expand_indicator(I(2, 1, Grid.G1), I(0, 0))


@pytest.mark.parametrize("grid,w", [(G0, Window(5)), (Grid.G1, Window(5, 3, shifted=True))])
def test_expand_reconstruction_all_pairs(grid, w):
    for U in w.haar_intervals(grid):
        for k in range(U.level + 1, w.K + 1):
            for J in w.intervals(k, grid):
                if not U.strictly_contains(J):
                    continue
                terms = expand_indicator(J, U)
                haar_terms = [t for t in terms if t.pattern == 0]
                assert len(haar_terms) == J.level - U.level
                for t in haar_terms:
                    assert abs(t.coefficient) == pytest.approx(math.sqrt(J.length / t.target.length))
                    assert t.sign == (1 if J.left >= t.target.center else -1) == nu(J, t.target)
                    assert math.copysign(1, t.coefficient) == t.sign
                err = np.abs(synthesize(terms, w).values - haar1(J, w).values).max()
                assert err < 1e-13


def test_haar_index_wraps_interval():
    ix = HaarIndex(I(1, 0), (0,))
    assert isinstance(ix.rect, DyadicRectangle)
    with pytest.raises(ValueError):
        HaarIndex(I(1, 0), (2,))
