"""
A stable detector out of reversible moves
=========================================

An atom emits a photon that a spin chain absorbs; the flipped spins then
wander through all C(L, L/2) balanced patterns before the photon comes back.
Every move is a basis permutation, yet the coarse label stays at 1 for the
whole wandering stretch.
"""
from scipy.sparse import identity

from pureqm import device

traj = device.run_cycle(6)
for cfg in traj.configs[:8]:
    print(cfg, "S_tot =", device.total_spin(cfg), "label", device.coarse_grain(cfg))
print("...")
print(traj.configs[-1])

print("checks:", device.verify_cycle(traj))
for L in (2, 4, 8, 12, 20, 40):
    print(f"L={L:>2}  stable steps {device.cycle_length(L) - 1}")

total = device.cycle_matrix(device.run_cycle(8))
print("composed L=8 matrix is a permutation:", (total.T @ total != identity(total.shape[0], dtype=int)).nnz == 0)
