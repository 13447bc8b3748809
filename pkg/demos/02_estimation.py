"""
Reading coefficients off recorded worlds
========================================

A world is one draw of N outcome bits from the type weights. The
statistician counts zeros and reports c0_hat = sqrt(m0/N). Across seeds the
error in p_hat shrinks like sqrt(p q / N).
"""
import numpy as np

from pureqm import typeclass
from pureqm.estimation import CountRecord, estimate_coefficients

p = 0.36

world = typeclass.sample_world(1000, p, seed=7)
print("first 40 bits:", "".join(map(str, world.bits[:40])))
est = estimate_coefficients(CountRecord.from_bits(world.bits))
print(f"c0_hat = {est.c0_hat:.4f}  c1_hat = {est.c1_hat:.4f}  se(p_hat) = {est.standard_error:.4f}")

for N in (10**2, 10**3, 10**4, 10**5):
    p_hat = np.array([typeclass.sample_world(N, p, s).m0 / N for s in range(100)])
    rmse = np.sqrt(np.mean((p_hat - p) ** 2))
    print(f"N={N:>6}  rmse {rmse:.5f}  predicted {np.sqrt(p * (1 - p) / N):.5f}")
