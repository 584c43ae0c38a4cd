# %% [markdown]
# # High-SNR power offset for K users per cell
#
# The e-chain started at 0 and at infinity brackets the stationary chain,
# so each order n gives a lower and an upper estimate of the offset
# L_inf (bits).  Both sides tighten as n grows and as K grows.

# %%
import numpy as np

from jacobi_capacity import Rayleigh, bound_ladder, stationary_offset
from jacobi_capacity.markov import ref_sqrt_bound

ray = Rayleigh()

# %%
lad = bound_ladder(ray, ray, K=2, orders=8, trials=100_000, seed=4)
for n, lo, hi in zip(lad.orders, lad.l_inf_lower_bits, lad.l_inf_upper_bits):
    print(f"n={n}: {lo:+.4f} <= L_inf <= {hi:+.4f}")
print("closed-form lower bound:", ref_sqrt_bound(2))

# %% [markdown]
# The stationary value from a long run of the chain lands inside the
# n = 8 bracket.

# %%
est, se = stationary_offset(ray, ray, K=2, burn_in=1000, samples=200_000, seed=7)
print(f"stationary L_inf = {-est / np.log(2):+.4f} +- {se / np.log(2):.4f} bits")

# %%
for K in (2, 3, 4, 6, 8, 10):
    lad = bound_ladder(ray, ray, K, [2], trials=50_000, seed=1)
    print(f"K={K:2d}: [{lad.l_inf_lower_bits[0]:+.4f}, {lad.l_inf_upper_bits[0]:+.4f}]"
          f"  ref {ref_sqrt_bound(K):+.4f}")
