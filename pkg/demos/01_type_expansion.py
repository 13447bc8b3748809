"""
Copies of a premeasured qubit, grouped by type
==============================================

N copies of c0|00> + c1|11> are expanded in the symmetric basis, where a
single coefficient per zero count m replaces 2^N amplitudes. The largest
coefficient sits at m = floor(N p) with p = |c0|^2, and the weight outside
a band around it falls off exponentially in N.
"""
import numpy as np

from pureqm import hilbert, typeclass

c0, c1 = 0.6, 0.8
p = abs(c0) ** 2

# two copies: the three type coefficients
td = typeclass.symmetric_expand(c0, c1, 2)
for m in (2, 1, 0):
    print(f"N=2  m={m}  coefficient {td.coefficients[m]:.6f}")

# brute force over 2^N basis vectors agrees with the grouped form
dense = typeclass.dense_oracle_expand(c0, c1, 12).type_sums()
sym = typeclass.symmetric_expand(c0, c1, 12).weight_squared
print("N=12 max |dense - symmetric| =", np.max(np.abs(dense - sym)))

# the dominant type approaches the Born value
born = hilbert.born_probability(hilbert.qubit("S", c0, c1), "S", 0)
for N in (10, 100, 10**4, 10**6):
    m = typeclass.dominant_type(N, p).m
    print(f"N={N:>8}  m*/N = {m / N:.6f}  born = {born:.6f}")

# weight outside p +- eps against the Chernoff bound, in log space
for N in (10**3, 10**4, 10**5, 10**6):
    lt = typeclass.log_tail_mass(N, p, 0.01)
    lb = typeclass.chernoff_log_bound(N, p, 0.01)
    print(f"N={N:>8}  log tail {lt:10.2f}  log bound {lb:10.2f}")
