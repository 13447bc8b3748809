"""A stable measurement device made of reversible permutation moves.

An excited atom emits a photon, an ``L``-site spin chain absorbs it by
flipping ``L/2`` spins, the flipped pattern wanders through every balanced
configuration one exchange at a time, and finally the chain re-emits the
photon and returns to all-up. Every move swaps two basis states, so the whole
history is a permutation of the basis and can be run backwards. Read through
the total spin, though, the device shows the same label for
``C(L, L/2) - 1`` consecutive steps.

The wandering order is the revolving-door combination Gray code: consecutive
``L/2``-subsets of down spins differ by one element leaving and one entering.
Sites are relabelled so the absorbed pattern starts at ``up, down, up, down, ...``.
Exchanged sites need not be adjacent.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.sparse import csr_array, identity

from .hilbert import ResourceLimitError, SubsystemLayout, UnitaryOp

GROUND, EXCITED = 0, 1
UP, DOWN = 1, 0
MAX_TRAJECTORY_L = 12
MAX_MATRIX_L = 8


@dataclass(frozen=True)
class ChainConfig:
    spins: tuple[int, ...]
    photon: int = 0
    atom: int = GROUND

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(int(s) for s in self.spins))
        L = len(self.spins)
        if L < 2 or L % 2:
            raise ValueError(f"chain length must be even and >= 2, got {L}")
        if any(s not in (UP, DOWN) for s in self.spins):
            raise ValueError("spins are 1 (up) or 0 (down)")
        downs = self.spins.count(DOWN)
        # one quantum of excitation: in the atom, the photon, or L/2 flipped spins
        if self.atom == EXCITED:
            ok = self.photon == 0 and downs == 0
        elif self.photon == 1:
            ok = downs == 0
        else:
            ok = downs == L // 2
        if not ok:
            raise ValueError(f"config {self} does not carry exactly one excitation")

    @property
    def L(self) -> int:
        return len(self.spins)

    def __str__(self):
        chain = "".join("u" if s == UP else "d" for s in self.spins)
        return f"{'e' if self.atom == EXCITED else 'g'}|{self.photon}|{chain}"


def total_spin(config: ChainConfig) -> float:
    return 0.5 * sum(1 if s == UP else -1 for s in config.spins)


def coarse_grain(config: ChainConfig) -> int:
    """0 when every spin is up, 1 otherwise."""
    return 0 if total_spin(config) == config.L / 2 else 1


@dataclass(frozen=True)
class Move:
    kind: str  # emission, absorption, exchange or reemission
    source: ChainConfig
    target: ChainConfig

    def inverse(self) -> "Move":
        return Move(self.kind, self.target, self.source)


@dataclass(frozen=True)
class DeviceTrajectory:
    L: int
    configs: tuple[ChainConfig, ...]
    moves: tuple[Move, ...]

    @property
    def steps(self) -> int:
        return len(self.moves)

    @property
    def absorbed(self) -> tuple[ChainConfig, ...]:
        """Configurations between absorption and re-emission."""
        return self.configs[2:-1]

    def coarse_labels(self) -> list[int]:
        return [coarse_grain(c) for c in self.configs]

    def reversed_moves(self) -> list[Move]:
        return [m.inverse() for m in reversed(self.moves)]


def _subset_gray(n: int, k: int) -> list[tuple[int, ...]]:
    """Revolving-door order of the k-subsets of range(n)."""

    @lru_cache(maxsize=None)
    def rec(n, k):
        if k == 0:
            return ((),)
        if k == n:
            return (tuple(range(n)),)
        return rec(n - 1, k) + tuple(s + (n - 1,) for s in reversed(rec(n - 1, k - 1)))

    return list(rec(n, k))


def exchange_schedule(L: int) -> list[tuple[int, ...]]:
    """Down-spin site sets in visiting order, starting from the alternating pattern."""
    k = L // 2
    odd = list(range(1, L, 2))
    even = list(range(0, L, 2))
    relabel = odd + even  # Gray element i sits at site relabel[i]
    return [tuple(sorted(relabel[i] for i in s)) for s in _subset_gray(L, k)]


def cycle_length(L: int) -> int:
    """Number of balanced configurations the chain passes through: C(L, L/2)."""
    if L < 2 or L % 2:
        raise ValueError(f"L must be even and >= 2, got {L}")
    return comb(L, L // 2)


def _check_trajectory_L(L):
    cycle_length(L)
    if L > MAX_TRAJECTORY_L:
        raise ResourceLimitError(f"trajectory has C({L},{L // 2}) configs; limit is L <= {MAX_TRAJECTORY_L}")


def run_cycle(L: int) -> DeviceTrajectory:
    _check_trajectory_L(L)
    all_up = (UP,) * L
    excited = ChainConfig(all_up, photon=0, atom=EXCITED)
    emitted = ChainConfig(all_up, photon=1)
    configs = [excited, emitted]
    for downs in exchange_schedule(L):
        spins = [UP] * L
        for site in downs:
            spins[site] = DOWN
        configs.append(ChainConfig(tuple(spins)))
    configs.append(emitted)
    kinds = ["emission", "absorption"] + ["exchange"] * (len(configs) - 4) + ["reemission"]
    moves = tuple(Move(k, a, b) for k, a, b in zip(kinds, configs, configs[1:]))
    return DeviceTrajectory(L, tuple(configs), moves)


def is_legal(move: Move) -> bool:
    a, b = move.source, move.target
    if move.kind == "emission":
        return a.atom == EXCITED and b.atom == GROUND and b.photon == 1 and a.spins == b.spins
    if move.kind in ("absorption", "reemission"):
        before, after = (a, b) if move.kind == "absorption" else (b, a)
        return before.photon == 1 and after.photon == 0 and before.atom == after.atom == GROUND
    if move.kind == "exchange":
        diff = [i for i, (x, y) in enumerate(zip(a.spins, b.spins)) if x != y]
        return (len(diff) == 2 and a.spins[diff[0]] != a.spins[diff[1]]
                and a.photon == b.photon == 0 and a.atom == b.atom == GROUND)
    return False


def apply_move(move: Move, config: ChainConfig) -> ChainConfig:
    """The move as a bijection: swaps its source and target, fixes the rest."""
    if config == move.source:
        return move.target
    if config == move.target:
        return move.source
    return config


def device_layout(L: int) -> SubsystemLayout:
    return SubsystemLayout((("atom", 2), ("photon", 2)) + tuple((f"s{i}", 2) for i in range(L)))


def basis_index(config: ChainConfig) -> int:
    idx = config.atom
    for digit in (config.photon,) + config.spins:
        idx = 2 * idx + digit
    return idx


def permutation_matrix(move: Move, sparse: bool = False):
    """Integer matrix of the move on the full atom (x) photon (x) chain basis.

    With ``sparse=True`` a ``scipy.sparse.csr_array``; products stay exact.
    """
    L = move.source.L
    if L > MAX_MATRIX_L:
        raise ResourceLimitError(f"move matrix has dimension 2^{L + 2}; limit is L <= {MAX_MATRIX_L}")
    dim = 4 << L
    perm = np.arange(dim)
    i, j = basis_index(move.source), basis_index(move.target)
    perm[i], perm[j] = j, i
    if sparse:
        return csr_array((np.ones(dim, dtype=np.int64), (perm, np.arange(dim))), shape=(dim, dim))
    m = np.zeros((dim, dim), dtype=np.int64)
    m[perm, np.arange(dim)] = 1
    return m


def cycle_matrix(traj: DeviceTrajectory, start: int = 0) -> csr_array:
    """Sparse integer product of the step matrices from ``moves[start]`` on."""
    dim = 4 << traj.L
    total = identity(dim, dtype=np.int64, format="csr")
    for move in traj.moves[start:]:
        total = permutation_matrix(move, sparse=True) @ total
    return csr_array(total)


def as_unitary(move: Move) -> UnitaryOp:
    if not is_legal(move):
        raise ValueError(f"illegal {move.kind} move {move.source} -> {move.target}")
    return UnitaryOp(device_layout(move.source.L).names, permutation_matrix(move))


def verify_cycle(traj: DeviceTrajectory) -> dict[str, bool]:
    """Check the trajectory invariants; each entry should be True."""
    L = traj.L
    absorbed = traj.absorbed
    state = traj.configs[0]
    for m in traj.moves:
        state = apply_move(m, state)
    back = state
    for m in traj.reversed_moves():
        back = apply_move(m, back)
    labels = [coarse_grain(c) for c in absorbed]
    return {
        "legal_moves": all(is_legal(m) for m in traj.moves),
        "visits_each_balanced_once": len(set(absorbed)) == len(absorbed) == cycle_length(L),
        "all_balanced_visited": len(set(absorbed)) == comb(L, L // 2),
        "no_repeat_before_close": len(set(traj.configs[:-1])) == len(traj.configs) - 1,
        "returns_to_photon_restored": traj.configs[-1] == traj.configs[1] and state == traj.configs[1],
        "coarse_label_constant": set(labels) == {1} and coarse_grain(traj.configs[1]) == 0,
        "reversible": back == traj.configs[0],
    }
