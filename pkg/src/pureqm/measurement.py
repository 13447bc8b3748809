"""Measurement scenarios written as explicit unitary pipelines.

No projection happens anywhere in this module. Each scenario starts from a
product state, applies a list of :class:`~pureqm.hilbert.UnitaryOp` stages,
and keeps both the intermediate states and the stages so that the whole
history can be rewound.

Register conventions:

* ``S`` system qubit, ``A``/``B`` apparatus qubits, ``E`` environment.
* Statistician memories ``F`` are qutrits: indices 0 and 1 are "saw 0" and
  "saw 1", index 2 is the blank memory ``|Omega>``.
* In the cat scenario ``C`` has ``L=0, D=1`` and the self-reference memory
  ``C'`` has ``Omega=0, alive=1``.
* Dice registers are 8-level: 0 is ``Omega``, 1..6 the faces, 7 unused.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import floor
from typing import Callable, Sequence

import numpy as np

from .hilbert import (
    TOL,
    ResourceLimitError,
    StateVector,
    SubsystemLayout,
    UnitaryOp,
    apply,
    basis_state,
    born_probability,
    complete_unitary,
    qubit,
    relative_state,
    schmidt_coefficients,
    tensor,
)

OMEGA = 2
MEMORY_DIM = 3
DICE_DIM = 8
DICE_FACES = 6
MAX_THROWS = 8


@dataclass(frozen=True)
class ScenarioState:
    stage: str
    state: StateVector


@dataclass(frozen=True)
class Pipeline:
    """A sequence of labelled unitary stages and the states they produce."""

    stages: tuple[ScenarioState, ...]
    ops: tuple[UnitaryOp, ...]

    @property
    def initial(self) -> StateVector:
        return self.stages[0].state

    @property
    def final(self) -> StateVector:
        return self.stages[-1].state

    def __getitem__(self, stage: str) -> StateVector:
        for s in self.stages:
            if s.stage == stage:
                return s.state
        raise KeyError(stage)

    def rewind(self) -> StateVector:
        """Apply the inverse stages in reverse order to the final state."""
        state = self.final
        for u in reversed(self.ops):
            state = apply(u.inverse(), state)
        return state

    def reversal_error(self) -> float:
        return float(np.max(np.abs(self.rewind().amplitudes - self.initial.amplitudes)))

    def norm_errors(self) -> list[float]:
        return [abs(s.state.norm - 1.0) for s in self.stages]


def run_pipeline(initial: StateVector, steps: Sequence[tuple[str, UnitaryOp]], first="in") -> Pipeline:
    stages = [ScenarioState(first, initial)]
    state = initial
    for label, u in steps:
        state = apply(u, state)
        stages.append(ScenarioState(label, state))
    return Pipeline(tuple(stages), tuple(u for _, u in steps))


def _controlled(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal unitary: ``blocks[k]`` acts when the control is ``k``."""
    d = sum(b.shape[0] for b in blocks)
    out = np.zeros((d, d), dtype=np.complex128)
    i = 0
    for b in blocks:
        n = b.shape[0]
        out[i:i + n, i:i + n] = b
        i += n
    return out


def copy_unitary(source: str, target: str, dim: int = 2) -> UnitaryOp:
    """``|a>|0> -> |a>|a>`` on two registers of equal dimension (modular add)."""
    d = dim
    m = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            m[a * d + (a + b) % d, a * d + b] = 1.0
    return UnitaryOp((source, target), m)


def _state_preparation(vec) -> np.ndarray:
    """A unitary whose first column is ``vec``."""
    return complete_unitary(np.asarray(vec, dtype=np.complex128))


# --- premeasurement with environment -------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnvironmentSpec:
    """Final environment states for the two apparatus readings."""

    f0: StateVector
    f1: StateVector

    def __post_init__(self):
        for f in (self.f0, self.f1):
            if f.layout.names != ("E",):
                raise ValueError("environment states must live on the single subsystem 'E'")
        if self.f0.layout != self.f1.layout:
            raise ValueError("f0 and f1 must share a layout")

    @property
    def overlap(self) -> complex:
        return self.f0.overlap(self.f1)

    @property
    def identical(self) -> bool:
        """f0 equals f1 up to a global phase."""
        return abs(abs(self.overlap) - 1.0) <= TOL

    @classmethod
    def same(cls, f: StateVector) -> "EnvironmentSpec":
        return cls(f, f)


@dataclass(frozen=True, eq=False)
class PremeasureResult:
    pipeline: Pipeline
    factorizes: bool
    system_apparatus: StateVector | None
    """The SA factor when the output is a product with E, else None."""
    environment: StateVector | None

    @property
    def state(self) -> StateVector:
        return self.pipeline.final


def premeasure(system: StateVector, env: EnvironmentSpec, error_angle: float = 0.0) -> PremeasureResult:
    """Couple ``S`` to a fresh apparatus ``A`` and environment ``E``.

    ``c0|0>_S + c1|1>_S`` becomes ``c0|0,0,f0> + c1|1,1,f1>``. A nonzero
    ``error_angle`` tilts the apparatus before the copy, which puts weight
    ``sin^2`` on the cross terms ``|0>_S|1>_A`` and ``|1>_S|0>_A``.
    """
    if system.layout.names != ("S",) or system.layout.dims != (2,):
        raise ValueError("system must be a single qubit named 'S'")
    de = env.f0.layout.dim
    initial = tensor([system, basis_state("A", 0), basis_state("E", 0, de)])
    steps = []
    if error_angle:
        c, s = np.cos(error_angle), np.sin(error_angle)
        steps.append(("tilt", UnitaryOp(("A",), [[c, -s], [s, c]])))
    steps.append(("copy", copy_unitary("S", "A")))
    env_op = _controlled([_state_preparation(env.f0.amplitudes), _state_preparation(env.f1.amplitudes)])
    steps.append(("out", UnitaryOp(("S", "E"), env_op)))
    pipe = run_pipeline(initial, steps)
    out = pipe.final
    sv = schmidt_coefficients(out, ["S", "A"])
    factorizes = bool(len(sv) < 2 or sv[1] <= 1e-9)
    sa = e = None
    if factorizes:
        mat = out.amplitudes.reshape(4, de)
        e_vec = np.linalg.svd(mat)[2][0]
        # fix the free phase so the E factor has a real positive overlap with f0 or f1
        ref = max((env.f0.amplitudes, env.f1.amplitudes), key=lambda f: abs(np.vdot(f, e_vec)))
        ov = np.vdot(ref, e_vec)
        e_vec = e_vec * (abs(ov) / ov if abs(ov) > TOL else 1.0)
        e = StateVector.normalized(SubsystemLayout.of(("E", de)), e_vec)
        sa = StateVector.normalized(SubsystemLayout.of(("S", 2), ("A", 2)), mat @ e.amplitudes.conj())
    return PremeasureResult(pipe, factorizes, sa, e)


# --- statistician readout ----------------------------------------------------------


def memory_register(name: str, value: int = OMEGA) -> StateVector:
    return basis_state(name, value, MEMORY_DIM)


def readout_unitary(register: str, memory: str) -> UnitaryOp:
    """``|a>|Omega> -> |a>|a>`` on a qubit register and a qutrit memory.

    Completed to a permutation: ``|a>|a> -> |a>|Omega>``, other states fixed.
    """
    perm = np.arange(2 * MEMORY_DIM)
    for a in (0, 1):
        blank, seen = a * MEMORY_DIM + OMEGA, a * MEMORY_DIM + a
        perm[blank], perm[seen] = seen, blank
    m = np.zeros((2 * MEMORY_DIM, 2 * MEMORY_DIM))
    m[perm, np.arange(2 * MEMORY_DIM)] = 1.0
    return UnitaryOp((register, memory), m)


class ReadoutError(ValueError):
    pass


def readout(state: StateVector, registers: Sequence[str] | None = None,
            memory: StateVector | None = None) -> Pipeline:
    """The statistician reads every apparatus register into a fresh memory.

    ``registers`` defaults to every subsystem whose name starts with ``A``.
    Register ``A<k>`` is copied into memory ``F<k>``. A supplied ``memory``
    must be the blank state on exactly those memories; anything else is a
    :class:`ReadoutError`.
    """
    if registers is None:
        registers = [n for n in state.names if n.startswith("A")]
    registers = list(registers)
    if not registers:
        raise ValueError("no apparatus registers to read")
    mem_names = ["F" + r[1:] for r in registers]
    blank = tensor([memory_register(n) for n in mem_names])
    if memory is None:
        memory = blank
    elif memory.layout != blank.layout or abs(abs(memory.overlap(blank)) - 1.0) > TOL:
        raise ReadoutError("statistician memory must start blank (|Omega> on every F register)")
    initial = tensor([state, memory])
    steps = [(f"read {r}", readout_unitary(r, f)) for r, f in zip(registers, mem_names)]
    return run_pipeline(initial, steps)


# --- cascaded measurement ------------------------------------------------------------


def _normalized_pair(c, what):
    c = (complex(c[0]), complex(c[1]))
    if abs(abs(c[0]) ** 2 + abs(c[1]) ** 2 - 1.0) > TOL:
        raise ValueError(f"{what} coefficients {c} are not normalized")
    return c


@dataclass(frozen=True)
class CascadeSpec:
    """Coefficients of the two stages of a cascaded measurement.

    ``first`` is ``(c0, c1)`` for ``S`` itself. ``after0`` / ``after1`` are the
    second-stage pairs ``(c0', c1')`` and ``(c0'', c1'')`` used when the first
    apparatus ``A`` registered 0 or 1.
    """

    first: tuple[complex, complex]
    after0: tuple[complex, complex]
    after1: tuple[complex, complex]

    def __post_init__(self):
        object.__setattr__(self, "first", _normalized_pair(self.first, "first-stage"))
        object.__setattr__(self, "after0", _normalized_pair(self.after0, "second-stage (A=0)"))
        object.__setattr__(self, "after1", _normalized_pair(self.after1, "second-stage (A=1)"))

    def second_stage(self, a: int) -> tuple[complex, complex]:
        return self.after0 if a == 0 else self.after1

    @classmethod
    def random(cls, rng: np.random.Generator) -> "CascadeSpec":
        def pair():
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            v /= np.linalg.norm(v)
            return (v[0], v[1])
        return cls(pair(), pair(), pair())


def cascade_evolve(spec: CascadeSpec,
                   second_stage: Callable[[int], tuple[complex, complex]] | None = None) -> Pipeline:
    """Run ``M1`` (S->A) then ``M2`` (S->B) on ``(c0|0>+c1|1>)_S |0>_A |0>_B``.

    ``M2`` is conditioned on the reading in ``A``: with ``A = a`` it sends
    ``|a>_S|0>_B`` to ``d0|0,0> + d1|1,1>`` with ``(d0, d1) = second_stage(a)``.
    A single ``U_SB (x) I_A`` cannot do this for arbitrary ``c'`` and ``c''``
    since the two images need not be orthogonal, so the coupling acts on
    ``S, A, B`` together. ``second_stage`` defaults to ``spec.second_stage``;
    passing a different callable gives an adaptive second measurement.
    """
    second_stage = second_stage or spec.second_stage
    c0, c1 = spec.first
    initial = tensor([qubit("S", c0, c1), basis_state("A", 0), basis_state("B", 0)])
    m1 = copy_unitary("S", "A")
    blocks = []
    for a in (0, 1):
        d0, d1 = _normalized_pair(second_stage(a), f"second-stage (A={a})")
        image = np.array([d0, 0, 0, d1])  # over |s b> = 00, 01, 10, 11
        start = np.zeros(4)
        start[2 * a] = 1.0  # |a>_S |0>_B
        # map the start vector to the image: W_img W_start^dagger
        w_start = complete_unitary(start)
        w_img = complete_unitary(image)
        blocks.append(w_img @ w_start.conj().T)
    m2 = UnitaryOp(("A", "S", "B"), _controlled(blocks))
    return run_pipeline(initial, [("post-M1", m1), ("post-M2", m2)])


def branch_probabilities(spec: CascadeSpec) -> tuple[float, float, float, float]:
    """Squared moduli of the four branches, ordered (A,B) = 00, 01, 10, 11."""
    (c0, c1), (d0, d1), (e0, e1) = spec.first, spec.after0, spec.after1
    return (abs(c0 * d0) ** 2, abs(c0 * d1) ** 2, abs(c1 * e0) ** 2, abs(c1 * e1) ** 2)


def _round_half_up(x: float) -> int:
    return int(floor(x + 0.5))


@dataclass(frozen=True)
class ReadoutEquivalence:
    """Expected counts with and without an intermediate readout of ``A``.

    ``M0`` is the number of zeros expected in ``A`` over ``N`` runs, taken as
    ``round(N |c0|^2)``, i.e. ``M0 = N |c0|^2`` up to rounding, not the
    other way round.
    """

    N: int
    expected_m00: float
    expected_m01: float
    M0: int
    expected_m0_given_0: float
    expected_m1_given_0: float

    @property
    def discrepancy_0(self) -> float:
        return abs(self.expected_m00 - self.expected_m0_given_0)

    @property
    def discrepancy_1(self) -> float:
        return abs(self.expected_m01 - self.expected_m1_given_0)

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancy_0, self.discrepancy_1)


def intermediate_readout_equivalence(spec: CascadeSpec, N: int) -> ReadoutEquivalence:
    if N < 1:
        raise ValueError("N must be at least 1")
    p00, p01, _, _ = branch_probabilities(spec)
    p0 = abs(spec.first[0]) ** 2
    d0, d1 = (abs(c) ** 2 for c in spec.after0)
    M0 = _round_half_up(N * p0)
    return ReadoutEquivalence(N, N * p00, N * p01, M0, M0 * d0, M0 * d1)


# --- testing an estimate -----------------------------------------------------------------


def orthogonal_complement(psi: StateVector) -> StateVector:
    """``conj(c1)|0> - conj(c0)|1>`` for ``psi = c0|0> + c1|1>``."""
    c0, c1 = psi.amplitudes
    return StateVector(psi.layout, np.array([np.conj(c1), -np.conj(c0)]))


def testing_unitary(psi_hat: StateVector) -> UnitaryOp:
    """``|psi_hat>|0> -> |psi_hat>|0>`` and ``|psi_hat_perp>|0> -> |psi_hat_perp>|1>``.

    A NOT on ``A`` controlled by ``S`` in the ``{psi_hat, psi_hat_perp}`` basis.
    """
    h = psi_hat.amplitudes
    hp = orthogonal_complement(psi_hat).amplitudes
    proj = np.outer(h, h.conj())
    proj_perp = np.outer(hp, hp.conj())
    x = np.array([[0, 1], [1, 0]])
    return UnitaryOp(("S", "A"), np.kron(proj, np.eye(2)) + np.kron(proj_perp, x))


def test_protocol(psi_hat: StateVector, psi_true: StateVector) -> float:
    """Weight of the flag ``A = 1`` after testing ``psi_true`` against ``psi_hat``.

    Equals ``|<psi_hat_perp|psi_true>|^2``; zero when the estimate is right.
    """
    for psi in (psi_hat, psi_true):
        if psi.layout.dims != (2,):
            raise ValueError("test_protocol works on single qubits")
    psi_hat = psi_hat.renamed({psi_hat.names[0]: "S"})
    psi_true = psi_true.renamed({psi_true.names[0]: "S"})
    out = apply(testing_unitary(psi_hat), tensor([psi_true, basis_state("A", 0)]))
    return born_probability(out, "A", 1)




# --- relative-state scenarios ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CatResult:
    pipeline: Pipeline
    given_alive: StateVector
    given_omega: StateVector

    @property
    def final(self) -> StateVector:
        return self.pipeline.final


CAT_ALIVE, CAT_DEAD = 0, 1
MEMO_OMEGA, MEMO_ALIVE = 0, 1


def cat_scenario() -> CatResult:
    """Cat with a memory that records "I am alive" only on the alive branch."""
    s = 1 / np.sqrt(2)
    initial = tensor([qubit("C", s, s), basis_state("C'", MEMO_OMEGA)])
    # flip the memory when C = L; fixes |D>|Omega>
    x = np.array([[0, 1], [1, 0]])
    self_ref = UnitaryOp(("C", "C'"), _controlled([x, np.eye(2)]))
    pipe = run_pipeline(initial, [("out", self_ref)])
    return CatResult(
        pipe,
        relative_state(pipe.final, "C'", MEMO_ALIVE),
        relative_state(pipe.final, "C'", MEMO_OMEGA),
    )


def throw_unitary(register: str) -> UnitaryOp:
    """Householder reflection sending ``|Omega>`` to the uniform face superposition.

    Level 7 is left untouched.
    """
    u = np.zeros(DICE_DIM)
    u[1:1 + DICE_FACES] = 1 / np.sqrt(DICE_FACES)
    v = -u
    v[0] += 1.0  # e0 - u, with |v|^2 = 2
    h = np.eye(DICE_DIM) - np.outer(v, v)
    return UnitaryOp((register,), h)


@dataclass(frozen=True, eq=False)
class DiceRecord:
    throws: int
    pipeline: Pipeline
    branch_count: int
    expected_amplitude: float
    max_amplitude_error: float
    unused_level_weight: float


def dice_scenario(throws: int, registers: int | None = None) -> DiceRecord:
    """Sequential dice throws recorded in ``registers`` memories ``D1, D2, ...``.

    ``registers`` defaults to ``max(throws, 3)`` so the first three throws
    follow the ``|Omega Omega Omega> -> ...`` sequence.
    """
    if throws < 0:
        raise ValueError("throws must be nonnegative")
    if throws > MAX_THROWS:
        raise ResourceLimitError(f"at most {MAX_THROWS} throws (8^throws amplitudes)")
    registers = max(throws, 3) if registers is None else registers
    if registers < throws:
        raise ValueError("need one register per throw")
    if registers > MAX_THROWS:
        raise ResourceLimitError(f"at most {MAX_THROWS} registers")
    names = [f"D{k}" for k in range(1, registers + 1)]
    initial = tensor([basis_state(n, 0, DICE_DIM) for n in names])
    pipe = run_pipeline(initial, [(f"throw {k + 1}", throw_unitary(names[k])) for k in range(throws)])
    amps = pipe.final.tensor()
    expected = DICE_FACES ** (-throws / 2)
    faces = amps[tuple([slice(1, 1 + DICE_FACES)] * throws + [0] * (registers - throws))]
    support = np.abs(amps) > 1e-12
    err = float(np.max(np.abs(faces - expected)))
    used = amps[(slice(0, DICE_DIM - 1),) * registers]
    unused = float(np.sum(np.abs(amps) ** 2) - np.sum(np.abs(used) ** 2))
    return DiceRecord(throws, pipe, int(np.count_nonzero(support)), expected, err, unused)
