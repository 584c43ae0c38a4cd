# %% [markdown]
# # Top Lyapunov exponent of the eigenvector recurrence
#
# At lambda = -1/P the growth rate of the 2x2 transfer product gives the
# capacity back: C = log P + gamma + E log|a| + E log|b|.

# %%
import math

from jacobi_capacity import Rayleigh, ScaledRayleigh, rate_tdma_rayleigh
from jacobi_capacity.lyapunov import lyapunov_estimate, lyapunov_upper_bound

ray = Rayleigh()
P = 10.0

# %%
g, se = lyapunov_estimate(ray, ray, -1 / P, M=50_000, reps=10, seed=1)
e_log = ray.moments().e_log_abs
print(f"gamma_hat = {g:.4f} +- {se:.4f}")
print("capacity via exponent:", math.log(P) + g + 2 * e_log)
print("exact Rayleigh rate:  ", rate_tdma_rayleigh(P))

# %% [markdown]
# Averaging log-norms of short products gives upper bounds that improve
# with the window length k.

# %%
for k in range(1, 6):
    v, vse = lyapunov_upper_bound(ray, ray, -1 / P, k, trials=50_000, seed=k)
    print(f"k={k}: {v:.4f} +- {vse:.4f}")

# %% [markdown]
# Near lambda = 0 the exponent tends to E log|b| - E log|a|; with the
# a-path attenuated by 1/2 that is log 2.

# %%
g0, _ = lyapunov_estimate(ScaledRayleigh(0.5), ray, -1e-6, M=100_000, reps=10, seed=5)
print(g0, math.log(2))
