"""
Testing an estimate
===================

Given a guess psi_hat, a controlled flip marks the component of the true
state orthogonal to the guess. With zero flags in N repetitions the
Clopper-Pearson bound on the flag probability is 1 - 0.05^(1/N).
"""
import numpy as np

from pureqm import estimation, hilbert, measurement

truth = hilbert.qubit("S", 0.6, 0.8)
for angle in (0.0, 0.05, 0.2, np.pi / 2):
    guess = hilbert.qubit("S", np.cos(np.arccos(0.6) + angle), np.sin(np.arccos(0.6) + angle))
    print(f"guess off by {angle:.3f} rad: flag probability {measurement.test_protocol(guess, truth):.6f}")

for N in (10, 100, 1000):
    print(f"N={N:>5}  no flags  95% upper bound {estimation.test_confidence(0, N, 0.95):.5f}")
print("3 flags in 100:", round(estimation.test_confidence(3, 100, 0.95), 5))
