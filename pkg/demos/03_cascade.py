"""
Two measurements in a row
=========================

A first apparatus A records S, then a second apparatus B records S with
coefficients that depend on the A branch. Joint counts of (A, B) recover all
six squared moduli, and reading A in the middle changes no expected count
by more than rounding.
"""
from pureqm import measurement
from pureqm.estimation import CascadeCounts, cascade_estimates

spec = measurement.CascadeSpec((0.6, 0.8), (0.6, 0.8), (0.8, 0.6))
pipe = measurement.cascade_evolve(spec)
for stage in ("in", "post-M1", "post-M2"):
    print(stage, pipe[stage].nonzero())

probs = measurement.branch_probabilities(spec)
print("P(A, B):", {k: round(float(q), 4) for k, q in zip(["00", "01", "10", "11"], probs)})

N = 10**4
est = cascade_estimates(CascadeCounts(*[N * q for q in probs]))
for k, v in est.as_dict().items():
    print(f"{k:>9} = {v:.4f}")

eq = measurement.intermediate_readout_equivalence(spec, N)
print(f"M0 = {eq.M0}, discrepancies {eq.discrepancy_0:.3f} and {eq.discrepancy_1:.3f} counts")
print("reversal error", pipe.reversal_error())
