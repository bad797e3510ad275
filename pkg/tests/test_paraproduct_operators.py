import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraproducts.dyadic_grid import DyadicInterval, DyadicRectangle, Grid, Window, scale_separated_family
from paraproducts.errors import (
    InadmissiblePatternError,
    LevelOverflowError,
    NonOrthonormalError,
    ParentOutOfWindowError,
    WindowMismatchError,
)
from paraproducts.haar_system import HaarIndex, StepFunction, haar0, haar1, nu, product_basis, tensor_haar
from paraproducts.paraproduct_operators import (
    OperatorMatrix,
    SignTable,
    a_m_blocks,
    a_m_operator,
    check_levels,
    decompose,
    h_mJ,
    haar_paraproduct,
    projection,
    rank_one_sum,
    s_m_operator,
    t1_lower_operator,
    t11_lower_operator,
)
from paraproducts.schatten import delta_exponent, schatten_norm, singular_values
from paraproducts.symbols_besov import SymbolCoefficients, lp_norm

G0 = Grid.G0
PS = (0.5, 1.0, 2.0, 4.0)
seeds = st.integers(0, 2**32 - 1)


def I(k, j, grid=G0):
    return DyadicInterval(grid, k, j)


def random_alpha_1d(rng, window, grids=(G0,)):
    return SymbolCoefficients({J: rng.uniform(-1, 1) for g in grids for J in window.haar_intervals(g)})


def random_alpha(rng, windows):
    axes = [w.haar_intervals() for w in windows]
    return SymbolCoefficients({DyadicRectangle(R): rng.uniform(-1, 1) for R in itertools.product(*axes)},
                              n=len(windows))


def orthogonal_projection(rng, N):
    q, _ = np.linalg.qr(rng.standard_normal((N, N)))
    Q = q[:, : rng.integers(0, N + 1)]
    return Q @ Q.T


# -- rank-one sums ------------------------------------------------------------

def test_rank_one_single_term():
    w = Window(3)
    u, v = haar0(I(0, 0), w), haar0(I(1, 1), w)
    T = rank_one_sum([(1.0, u, v)])
    s = singular_values(T).values
    assert s[0] == pytest.approx(1.0, abs=1e-14) and np.all(s[1:] == 0)
    # f -> <f, v> u
    assert np.allclose(T.apply(v).values, u.values)
    assert np.allclose(T.apply(u).values, 0)


def test_rank_one_empty_and_cancelling():
    w = Window(2)
    assert not np.any(rank_one_sum([], (w,)).matrix)
    u, v = haar0(I(0, 0), w), haar1(I(1, 0), w)
    assert not np.any(rank_one_sum([(1.0, u, v), (-1.0, u, v)]).matrix)
    with pytest.raises(WindowMismatchError):
        rank_one_sum([])


def test_rank_one_window_mismatch():
    with pytest.raises(WindowMismatchError):
        rank_one_sum([(1.0, haar0(I(0, 0), Window(2)), haar0(I(0, 0), Window(3)))])


def test_operator_matrix_is_immutable():
    w = Window(2)
    T = rank_one_sum([(2.0, haar0(I(0, 0), w), haar0(I(0, 0), w))])
    with pytest.raises(ValueError):
        T.matrix[0, 0] = 1.0
    with pytest.raises(TypeError):
        T.meta["x"] = 1
    with pytest.raises(WindowMismatchError):
        OperatorMatrix(np.zeros((3, 3)), (w,))
    assert np.allclose((T - T).matrix, 0) and np.allclose((T @ T.T).matrix, (2 * T).matrix @ T.matrix.T / 2)


# -- paraproducts -------------------------------------------------------------

def test_paraproduct_singleton():
    w = Window(3)
    T = haar_paraproduct(SymbolCoefficients({I(0, 0): 1.0}), (1,), (0,), w)
    for p in PS:
        assert schatten_norm(T, p) == pytest.approx(1.0, rel=1e-14)
    assert np.linalg.matrix_rank(T.matrix) == 1


def test_paraproduct_two_term_gram_oracle():
    w = Window(3)
    T = haar_paraproduct(SymbolCoefficients({I(0, 0): 1.0, I(1, 0): 1.0}), (1,), (0,), w)
    # the output side is orthonormal, so the singular values are the square roots of
    # the eigenvalues of the Gram matrix [[1, g], [g, 1]] with g = <h1_[0,1), h1_[0,1/2)>
    g = haar1(I(0, 0), w).inner(haar1(I(1, 0), w))
    assert g == pytest.approx(1 / math.sqrt(2))
    s = singular_values(T).values[:2]
    assert s == pytest.approx([math.sqrt(1 + g), math.sqrt(1 - g)], abs=1e-12)
    assert s == pytest.approx([1.30656, 0.54120], abs=1e-5)


@pytest.mark.parametrize("windows", [(Window(4),), (Window(2), Window(2)), (Window(4, 3, True),)])
def test_paraproduct_orthonormal_case(windows):
    rng = np.random.default_rng(0)
    if len(windows) == 1:
        alpha = random_alpha_1d(rng, windows[0], (G0, Grid.G1) if windows[0].shifted else (G0,))
        alpha = alpha.restrict(lambda R: R[0].grid == G0)
    else:
        alpha = random_alpha(rng, windows)
    T = haar_paraproduct(alpha, (0,) * len(windows), (0,) * len(windows), windows)
    s = singular_values(T).values
    expect = np.sort(np.abs(alpha.values_array()))[::-1]
    assert np.abs(s[: len(expect)] - expect).max() < 1e-10
    for p in PS:
        assert schatten_norm(T, p) == pytest.approx(lp_norm(alpha, p), rel=1e-10)


@pytest.mark.parametrize("eps,delta", [((1,), (1,)), ((1, 0), (1, 1)), ((2,), (0,))])
def test_inadmissible_pattern(eps, delta):
    windows = (Window(2),) * len(eps)
    alpha = SymbolCoefficients({}, n=len(eps))
    with pytest.raises(InadmissiblePatternError):
        haar_paraproduct(alpha, eps, delta, windows)


def test_paraproduct_input_and_output_sides():
    w = Window(3)
    J = I(1, 1)
    T = haar_paraproduct(SymbolCoefficients({J: 3.0}), (1,), (0,), w)
    out = T.apply(haar1(J, w))
    assert np.allclose(out.values, 3.0 * haar0(J, w).values)
    assert np.allclose(T.apply(haar0(J, w)).values, 0)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from(PS))
def test_transpose_symmetry(seed, p):
    rng = np.random.default_rng(seed)
    w = Window(4)
    T = haar_paraproduct(random_alpha_1d(rng, w), (1,), (0,), w)
    assert schatten_norm(T.T, p) == pytest.approx(schatten_norm(T, p), rel=1e-10)
    assert np.array_equal(T.T.matrix, haar_paraproduct(random_alpha_1d(np.random.default_rng(seed), w),
                                                       (0,), (1,), w).matrix)


# -- H_{m,J} and S_m ----------------------------------------------------------

def test_h_mJ_all_ones():
    w = Window(3)
    alpha = SymbolCoefficients({J: 1.0 for J in w.haar_intervals()})
    H = h_mJ(alpha, 1, I(0, 0), w)
    expect = -haar0(I(1, 0), w).values + haar0(I(1, 1), w).values
    assert np.allclose(H.values, expect)
    assert H.norm() == pytest.approx(math.sqrt(2))


def test_h_mJ_off_support_and_overflow():
    w = Window(3)
    H = h_mJ(SymbolCoefficients({I(2, 3): 1.0}), 1, I(1, 0), w)
    assert not np.any(H.values)
    with pytest.raises(LevelOverflowError):
        h_mJ(SymbolCoefficients({}), 3, I(1, 0), w)


@given(seeds, st.integers(1, 3))
def test_h_mJ_parseval(seed, m):
    w = Window(5)
    alpha = random_alpha_1d(np.random.default_rng(seed), w)
    for J in w.intervals(1):
        H = h_mJ(alpha, m, J, w)
        kids = [K for K in w.intervals(1 + m) if J.strictly_contains(K)]
        assert H.norm() == pytest.approx(math.sqrt(sum(alpha[K] ** 2 for K in kids)), rel=1e-12)


def test_sign_table():
    signs = SignTable()
    assert signs(I(1, 1), I(0, 0)) == 1 and signs(I(1, 0), I(0, 0)) == -1
    R = DyadicRectangle.of(I(1, 0), I(2, 3))
    S = DyadicRectangle.of(I(0, 0), I(1, 1))
    assert signs[R, S] == -1


@pytest.mark.parametrize("seed", range(3))
def test_s_m_reconstruction(seed):
    w = Window(5)
    alpha = random_alpha_1d(np.random.default_rng(seed), w)
    T = haar_paraproduct(alpha, (1,), (0,), w)
    dec = decompose(alpha, (1,), (0,), w)
    total = dec.remainder.matrix.copy()
    for m in range(1, w.K):
        S = s_m_operator(alpha, m, w)
        assert np.abs(S.matrix - dec.pieces[(m,)].matrix).max() < 1e-13
        total += 2.0 ** (-m / 2) * S.matrix
    assert np.abs(total - T.matrix).max() < 1e-12
    assert np.any(dec.remainder.matrix)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_s_m_norm_bound(seed):
    w = Window(5)
    alpha = random_alpha_1d(np.random.default_rng(seed), w)
    for m in range(1, w.K):
        S = s_m_operator(alpha, m, w)
        for p in PS:
            assert schatten_norm(S, p) <= 2 ** (delta_exponent(p) * m) * lp_norm(alpha, p) * (1 + 1e-9)


def test_s_m_singleton():
    w = Window(4)
    alpha = SymbolCoefficients({I(3, 5): -0.7})
    norms = {m: schatten_norm(s_m_operator(alpha, m, w), 1) for m in range(1, 4)}
    assert norms == pytest.approx({1: 0.7, 2: 0.7, 3: 0.7})
    for m in range(1, 4):
        assert np.linalg.matrix_rank(s_m_operator(alpha, m, w).matrix) == 1
    with pytest.raises(ValueError):
        s_m_operator(alpha, 0, w)


# -- multi-parameter decompositions ------------------------------------------

BIPARAMETER = [((1, 1), (0, 0)), ((0, 0), (1, 1)), ((1, 0), (0, 1)), ((0, 1), (1, 0)), ((0, 0), (0, 0))]


@pytest.mark.parametrize("eps,delta", BIPARAMETER)
def test_biparameter_reconstruction(eps, delta):
    ws = (Window(3), Window(3))
    alpha = random_alpha(np.random.default_rng(4), ws)
    T = haar_paraproduct(alpha, eps, delta, ws)
    assert np.abs(decompose(alpha, eps, delta, ws).reconstruct().matrix - T.matrix).max() < 1e-12


@pytest.mark.parametrize("variant", ["indicator-both", "mixed"])
def test_a_m_operator_matches_decomposition(variant):
    ws = (Window(3), Window(3))
    alpha = random_alpha(np.random.default_rng(5), ws)
    eps, delta = {"indicator-both": ((1, 1), (0, 0)), "mixed": ((1, 0), (0, 1))}[variant]
    dec = decompose(alpha, eps, delta, ws)
    total = dec.remainder.matrix.copy()
    for m in itertools.product(range(1, 3), repeat=2):
        total = total + 2.0 ** (-sum(m) / 2) * a_m_operator(alpha, m, variant, ws).matrix
    T = haar_paraproduct(alpha, eps, delta, ws)
    assert np.abs(total - T.matrix).max() < 1e-12
    with pytest.raises(ValueError):
        a_m_operator(alpha, (0, 1), variant, ws)
    with pytest.raises(InadmissiblePatternError):
        a_m_operator(alpha, (1, 1), "diagonal", ws)


def test_three_parameter_reconstruction():
    ws = (Window(2),) * 3
    alpha = random_alpha(np.random.default_rng(6), ws)
    for eps, delta in [((1, 1, 1), (0, 0, 0)), ((1, 0, 0), (0, 1, 0)), ((0, 1, 0), (1, 0, 1))]:
        T = haar_paraproduct(alpha, eps, delta, ws)
        assert np.abs(decompose(alpha, eps, delta, ws).reconstruct().matrix - T.matrix).max() < 1e-12


@pytest.mark.parametrize("eps,delta", [((1, 1), (0, 0)), ((1, 0), (0, 1))])
def test_a_m_blocks_bound_and_direct_sum(eps, delta):
    ws = (Window(3), Window(3))
    alpha = random_alpha(np.random.default_rng(7), ws)
    dec = decompose(alpha, eps, delta, ws)
    for m in [(1, 1), (1, 2), (2, 1), (2, 2)]:
        blocks = a_m_blocks(alpha, m, eps, delta, ws)
        for p in PS:
            total = 0.0
            for B in blocks:
                norm = schatten_norm(B.matrix, p)
                bound = len(B.support) ** delta_exponent(p) * lp_norm([alpha[R] for R in B.support], p)
                assert norm <= bound * (1 + 1e-9)
                total += norm**p
            assert total ** (1 / p) == pytest.approx(schatten_norm(dec.pieces[m], p), rel=1e-9)


# -- projections --------------------------------------------------------------

def test_projection_onto_all_haar_removes_mean():
    w = Window(4)
    P = projection([HaarIndex(J, (0,)) for J in w.haar_intervals()], w)
    f = StepFunction((w,), np.random.default_rng(0).standard_normal(16))
    assert np.allclose(P.apply(f).values, f.values - f.values.mean())


def test_projection_empty_is_zero():
    w = Window(2)
    assert not np.any(projection([], (w, w)).matrix)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_projection_axioms(seed):
    rng = np.random.default_rng(seed)
    ws = (Window(2), Window(2))
    basis = product_basis(ws)
    keep = [ix for ix in basis if rng.random() < 0.5]
    P = projection(keep, ws).matrix
    assert np.abs(P @ P - P).max() < 1e-12
    assert np.abs(P - P.T).max() < 1e-14
    assert np.linalg.norm(P, 2) <= 1 + 1e-12
    assert np.trace(P) == pytest.approx(len(keep))


def test_projection_rejects_non_orthonormal():
    w = Window(3)
    with pytest.raises(NonOrthonormalError):
        projection([HaarIndex(I(1, 0), (1,)), HaarIndex(I(0, 0), (0,))], w)


# -- lower-bound operators ----------------------------------------------------

def _proper(family):
    return [J for J in family if J.level >= 1]


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(1, 3), st.data())
def test_t1_exact_norm(seed, ell, data):
    w = Window(6)
    alpha = random_alpha_1d(np.random.default_rng(seed), w)
    fam = _proper(scale_separated_family(ell, 0, data.draw(st.integers(0, 2 * ell - 1)), w))
    fam = [J for J in fam if J.level < w.K]
    T1 = t1_lower_operator(alpha, fam, w)
    for p in PS:
        lhs = schatten_norm(T1, p) ** p
        rhs = sum(abs(alpha[J]) ** p for J in fam)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)


def test_t1_parents_are_orthonormal():
    w = Window(6)
    for ell in (1, 2, 3):
        for c in range(2 * ell):
            fam = [J for J in _proper(scale_separated_family(ell, 0, c, w)) if J.level < w.K]
            parents = [J.parent() for J in fam]
            assert len(set(parents)) == len(parents)
            V = np.array([haar0(P, w).vector() for P in parents])
            assert np.abs(V @ V.T - np.eye(len(V))).max() < 1e-12


def test_t1_singleton_and_parent_error():
    w = Window(4)
    J = I(2, 1)
    T1 = t1_lower_operator(SymbolCoefficients({J: -2.5}), [J], w)
    s = singular_values(T1).values
    assert s[0] == pytest.approx(2.5) and np.all(s[1:] == 0)
    # reads h0 of the parent, writes h0_J with the sign nu(J, parent)
    out = T1.apply(haar0(J.parent(), w))
    assert np.allclose(out.values, -2.5 * nu(J, J.parent()) * haar0(J, w).values)
    with pytest.raises(ParentOutOfWindowError):
        t1_lower_operator(SymbolCoefficients({I(0, 0): 1.0}), [I(0, 0)], w)


def test_t11_exact_norm():
    ws = (Window(4), Window(4))
    alpha = random_alpha(np.random.default_rng(8), ws)
    f1 = [J for J in _proper(scale_separated_family(1, 0, 0, ws[0])) if J.level < 4]
    f2 = [J for J in _proper(scale_separated_family(1, 0, 1, ws[1])) if J.level < 4]
    T = t11_lower_operator(alpha, f1, f2, ws)
    for p in PS:
        rhs = sum(abs(alpha[DyadicRectangle((a, b))]) ** p for a in f1 for b in f2)
        assert schatten_norm(T, p) ** p == pytest.approx(rhs, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from(PS), st.sampled_from([((1,), (0,)), ((0,), (1,)), ((0,), (0,))]))
def test_contraction_sandwich(seed, p, pattern):
    rng = np.random.default_rng(seed)
    w = Window(4)
    T = haar_paraproduct(random_alpha_1d(rng, w), *pattern, w).matrix
    P, Q = orthogonal_projection(rng, 16), orthogonal_projection(rng, 16)
    assert schatten_norm(Q @ T @ P, p) <= schatten_norm(T, p) * (1 + 1e-9)


def test_check_levels():
    w = Window(3)
    check_levels(SymbolCoefficients({I(2, 0): 1.0}), w)
    with pytest.raises(LevelOverflowError):
        check_levels(SymbolCoefficients({I(3, 0): 1.0}), w)


def test_tensor_haar_apply_matches_matrix():
    ws = (Window(2), Window(2))
    R = DyadicRectangle.of(I(0, 0), I(1, 1))
    T = haar_paraproduct(SymbolCoefficients({R: 2.0}), (1, 0), (0, 1), ws)
    out = T.apply(tensor_haar(R, (1, 0), ws))
    assert np.allclose(out.values, 2.0 * tensor_haar(R, (0, 1), ws).values)
