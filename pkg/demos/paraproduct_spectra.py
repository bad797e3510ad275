"""
Singular values of Haar paraproducts
====================================

Builds a few paraproducts on a truncated dyadic grid and compares their
Schatten norms with the l^p norm of the symbol.

Run with ``python demos/paraproduct_spectra.py``.
"""

# %%
# A random symbol: one coefficient per dyadic interval of [0, 1) above the
# finest level.  The generator is counter-based, so (seed, trial, K) pins it.
import numpy as np

from paraproducts import Window, haar_paraproduct, schatten_norm, singular_values
from paraproducts.experiments import generate_symbol, trial_rng
from paraproducts.symbols_besov import lp_norm

K = 6
w = Window(K)
alpha = generate_symbol("uniform", trial_rng(seed=0, trial=0, K=K), (w,))
print(f"{len(alpha)} coefficients, l^2 norm {lp_norm(alpha, 2):.4f}")

# %%
# With both sides cancellative the Haar functions are orthonormal on both
# sides, so the singular values are the coefficients themselves.
T00 = haar_paraproduct(alpha, (0,), (0,), w)
s = singular_values(T00).values
print("largest singular values:", np.round(s[:5], 4))
print("largest |alpha|:        ", np.round(np.sort(np.abs(alpha.values_array()))[::-1][:5], 4))

# %%
# Reading through the normalised indicators h^1 destroys orthogonality on the
# input side.  The Schatten norm is no longer the l^p norm, but stays within
# a modest factor of it.
T10 = haar_paraproduct(alpha, (1,), (0,), w)
print(f"\n{'p':>5} {'||T||_Sp':>10} {'||alpha||_p':>12} {'ratio':>7}")
for p in (0.5, 1, 2, 4):
    a, b = schatten_norm(T10, p), lp_norm(alpha, p)
    print(f"{p:>5} {a:>10.4f} {b:>12.4f} {a / b:>7.3f}")

# %%
# At p = 2 the ratio is exactly one: the Hilbert-Schmidt norm squares
# to sum |alpha|^2 ||h^1||^2 ||h^0||^2 because the output side is orthonormal.
print("\nHilbert-Schmidt check:", np.isclose(schatten_norm(T10, 2), lp_norm(alpha, 2)))

# %%
# Two parameters: the five admissible patterns never put an indicator on
# both sides of the same axis.
ws = (Window(4), Window(4))
beta = generate_symbol("uniform", trial_rng(0, 0, 4), ws)
for eps, delta in [((0, 0), (0, 0)), ((1, 1), (0, 0)), ((0, 0), (1, 1)), ((1, 0), (0, 1)), ((0, 1), (1, 0))]:
    T = haar_paraproduct(beta, eps, delta, ws)
    print(f"eps={eps} delta={delta}: S^1 / l^1 = {schatten_norm(T, 1) / lp_norm(beta, 1):.3f}")
