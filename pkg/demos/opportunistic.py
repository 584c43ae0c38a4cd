# %% [markdown]
# # Opportunistic TDMA
#
# Serving the strongest of K users per cell turns the gains into maximum
# order statistics.  The high-SNR offset then improves roughly like
# log log K.

# %%
import math

from jacobi_capacity import MaxOrderStat, Rayleigh, high_snr_offset_tdma

ray = Rayleigh()

# %%
for K in (1, 2, 10, 100, 1000, 10_000):
    off = high_snr_offset_tdma(MaxOrderStat(ray, K), MaxOrderStat(ray, K))
    ref = math.log(math.log(K)) if K > 2 else float("nan")
    print(f"K={K:6d}: offset {off.offset_nats:+.4f} nats, L_inf {off.l_inf_db:+.3f} dB, log log K {ref:+.4f}")
