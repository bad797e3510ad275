"""
Splitting a paraproduct by indicator depth
==========================================

Each normalised indicator ``h^1_I`` is a signed sum of the Haar functions
of its ancestors plus one mean term.  Substituting that expansion splits
the paraproduct into pieces ``S_m`` (ancestor ``m`` levels up), weighted
by ``2^(-m/2)``, plus a remainder from the mean terms.
"""

# %%
import numpy as np

from paraproducts import Window, decompose, haar_paraproduct, s_m_operator, schatten_norm
from paraproducts.experiments import generate_symbol, trial_rng
from paraproducts.schatten import delta_exponent
from paraproducts.symbols_besov import lp_norm

K = 6
w = Window(K)
alpha = generate_symbol("uniform", trial_rng(1, 0, K), (w,))
T = haar_paraproduct(alpha, (1,), (0,), w)

# %%
# Rebuild T from the pieces and the explicit mean remainder.
dec = decompose(alpha, (1,), (0,), w)
rebuilt = dec.remainder.matrix + sum(2.0 ** (-m / 2) * s_m_operator(alpha, m, w).matrix for m in range(1, K))
print(f"max entry error of the reconstruction: {np.abs(rebuilt - T.matrix).max():.1e}")
print(f"S^2 norm of the mean remainder: {schatten_norm(dec.remainder, 2):.4f} "
      f"(of {schatten_norm(T, 2):.4f} in total)")

# %%
# Each S_m is bounded by 2^(delta(p) m) ||alpha||_p, so the weighted pieces
# decay geometrically and the series converges in S^p.
print(f"\n{'m':>3} {'C_m (p=1)':>10} {'C_m (p=4)':>10} {'||2^(-m/2) S_m||_S1':>20}")
for m in range(1, K):
    S = s_m_operator(alpha, m, w)
    c1 = schatten_norm(S, 1) / lp_norm(alpha, 1)
    c4 = schatten_norm(S, 4) / (2 ** (delta_exponent(4) * m) * lp_norm(alpha, 4))
    print(f"{m:>3} {c1:>10.3f} {c4:>10.3f} {2 ** (-m / 2) * schatten_norm(S, 1):>20.4f}")
