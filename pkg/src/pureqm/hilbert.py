"""Finite-dimensional tensor-product state vectors.

Everything downstream is built from three objects: a :class:`SubsystemLayout`
naming the tensor factors, a normalized :class:`StateVector` over that layout,
and a :class:`UnitaryOp` acting on a subset of the factors.

Basis ordering: the first-listed subsystem is the most significant digit of
the flat amplitude index, so ``amplitudes.reshape(layout.dims)`` indexes as
``psi[i_first, ..., i_last]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import null_space

TOL = 1e-12


class LayoutConflictError(ValueError):
    """Two factors of a tensor product share a subsystem name."""


class NonUnitaryError(ValueError):
    pass


class UndefinedRelativeStateError(ValueError):
    """The conditioned component has zero norm, so no relative state exists."""


class ResourceLimitError(RuntimeError):
    """A dense representation would exceed a memory guard."""


@dataclass(frozen=True)
class SubsystemLayout:
    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(n), int(d)) for n, d in self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        names = [n for n, _ in subs]
        if len(set(names)) != len(names):
            raise LayoutConflictError(f"duplicate subsystem names in {names}")
        for n, d in subs:
            if d < 2:
                raise ValueError(f"subsystem {n!r} has dimension {d} < 2")

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "SubsystemLayout":
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    def __len__(self):
        return len(self.subsystems)

    def __contains__(self, name):
        return name in self.names

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown subsystem {name!r}; layout has {self.names}") from None

    def dim_of(self, name: str) -> int:
        return self.dims[self.axis(name)]

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.subsystems + other.subsystems)

    def without(self, names: Iterable[str]) -> "SubsystemLayout":
        drop = set(names)
        return SubsystemLayout(tuple(s for s in self.subsystems if s[0] not in drop))

    def renamed(self, mapping: Mapping[str, str]) -> "SubsystemLayout":
        return SubsystemLayout(tuple((mapping.get(n, n), d) for n, d in self.subsystems))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit vector over a :class:`SubsystemLayout`.

    Construction fails unless the amplitude array matches the layout and has
    Euclidean norm 1 within ``TOL``.
    """

    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != self.layout.dim:
            raise ValueError(
                f"{amps.size} amplitudes for a layout of total dimension {self.layout.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL:
            raise ValueError(f"state vector norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, layout: SubsystemLayout, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(layout, amps / norm)

    @property
    def names(self):
        return self.layout.names

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amplitudes.reshape(self.layout.dims)

    def amplitude(self, **indices: int) -> complex:
        """Amplitude at a joint basis state given as ``name=index`` keywords."""
        missing = set(self.layout.names) - set(indices)
        if missing:
            raise KeyError(f"missing indices for {sorted(missing)}")
        return complex(self.tensor()[tuple(indices[n] for n in self.layout.names)])

    def overlap(self, other: "StateVector") -> complex:
        """Inner product <self|other>; layouts must agree."""
        if self.layout != other.layout:
            raise ValueError("layouts differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def allclose(self, other: "StateVector", atol: float = TOL) -> bool:
        return self.layout == other.layout and bool(
            np.max(np.abs(self.amplitudes - other.amplitudes), initial=0.0) <= atol
        )

    def renamed(self, mapping: Mapping[str, str]) -> "StateVector":
        return StateVector(self.layout.renamed(mapping), self.amplitudes)

    def permuted(self, order: Sequence[str]) -> "StateVector":
        """Same vector with the subsystems reordered."""
        if sorted(order) != sorted(self.layout.names):
            raise ValueError(f"{order} is not a reordering of {self.layout.names}")
        axes = [self.layout.axis(n) for n in order]
        layout = SubsystemLayout(tuple(self.layout.subsystems[a] for a in axes))
        return StateVector(layout, np.transpose(self.tensor(), axes).ravel())

    def nonzero(self, atol: float = TOL) -> dict[tuple[int, ...], complex]:
        """Map from joint basis index tuples to amplitudes above ``atol``."""
        t = self.tensor()
        return {tuple(int(i) for i in idx): complex(t[idx]) for idx in zip(*np.nonzero(np.abs(t) > atol))}

    def to_json(self) -> dict:
        return {
            "layout": [[n, d] for n, d in self.layout.subsystems],
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "StateVector":
        layout = SubsystemLayout(tuple((n, d) for n, d in doc["layout"]))
        amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
        return cls(layout, amps)

    def __repr__(self):
        terms = []
        for idx, a in self.nonzero(1e-9).items():
            terms.append(f"({a.real:+.4g}{a.imag:+.4g}j)|{','.join(map(str, idx))}>")
        return f"StateVector[{','.join(self.layout.names)}]: " + " ".join(terms[:16]) + (
            " ..." if len(terms) > 16 else ""
        )


def basis_state(name: str, index: int, dim: int = 2) -> StateVector:
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dimension {dim}")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(SubsystemLayout(((name, dim),)), amps)


def qubit(name: str, c0: complex, c1: complex) -> StateVector:
    """``c0|0> + c1|1>`` on a single two-level subsystem."""
    return StateVector(SubsystemLayout(((name, 2),)), np.array([c0, c1], dtype=np.complex128))


def tensor(states: Sequence[StateVector]) -> StateVector:
    """Tensor product, layouts concatenated in the given order."""
    states = list(states)
    if not states:
        raise ValueError("tensor of an empty list")
    layout = states[0].layout
    amps = states[0].amplitudes
    for s in states[1:]:
        layout = layout.concat(s.layout)
        amps = np.kron(amps, s.amplitudes)
    return StateVector(layout, amps)


def repeat(state: StateVector, copies: int) -> StateVector:
    """``state`` tensored with itself ``copies`` times.

    Copy ``k`` (1-based) has every subsystem name suffixed with ``k``, so a
    layout ``(S, A)`` becomes ``(S1, A1, S2, A2, ...)``.
    """
    if copies < 1:
        raise ValueError("need at least one copy")
    return tensor([state.renamed({n: f"{n}{k}" for n in state.names}) for k in range(1, copies + 1)])


class UnitaryOp:
    """A unitary matrix acting on the named target subsystems.

    The matrix is indexed over the product basis of the targets, in the order
    given, with the same most-significant-first convention as states.
    """

    def __init__(self, targets: Sequence[str], matrix, *, check: bool = True):
        self.targets = tuple(targets)
        if len(set(self.targets)) != len(self.targets):
            raise LayoutConflictError(f"repeated target in {self.targets}")
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"unitary must be square, got shape {m.shape}")
        if check:
            err = unitarity_error(m)
            if err > TOL:
                raise NonUnitaryError(f"max |U^H U - I| = {err:.3e} exceeds {TOL}")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> "UnitaryOp":
        return UnitaryOp(self.targets, self.matrix.conj().T, check=False)

    def __matmul__(self, other: "UnitaryOp") -> "UnitaryOp":
        """Composition on identical targets: ``(self @ other)`` applies ``other`` first."""
        if self.targets != other.targets:
            raise ValueError("composition needs identical targets")
        return UnitaryOp(self.targets, self.matrix @ other.matrix, check=False)

    def __repr__(self):
        return f"UnitaryOp(targets={self.targets}, dim={self.dim})"


def unitarity_error(matrix) -> float:
    m = np.asarray(matrix)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def apply(u: UnitaryOp, state: StateVector) -> StateVector:
    layout = state.layout
    axes = [layout.axis(t) for t in u.targets]
    tdims = [layout.dims[a] for a in axes]
    if prod(tdims) != u.dim:
        raise ValueError(f"unitary of dimension {u.dim} does not fit targets {u.targets} with dims {tdims}")
    psi = state.tensor()
    rest = [a for a in range(len(layout)) if a not in axes]
    moved = np.transpose(psi, axes + rest).reshape(u.dim, -1)
    out = (u.matrix @ moved).reshape([layout.dims[a] for a in axes + rest])
    out = np.transpose(out, np.argsort(axes + rest))
    return StateVector(layout, out.ravel())


def apply_all(ops: Iterable[UnitaryOp], state: StateVector) -> StateVector:
    for u in ops:
        state = apply(u, state)
    return state


def born_probability(state: StateVector, subsystem: str, j: int) -> float:
    """Squared norm of the component with ``subsystem`` in basis state ``j``.

    This is the textbook statistical functional. Nothing in the unitary
    machinery calls it; it exists so that results derived from type counting
    can be compared against it.
    """
    axis = state.layout.axis(subsystem)
    d = state.layout.dims[axis]
    if not 0 <= j < d:
        raise ValueError(f"basis index {j} out of range for {subsystem!r} of dimension {d}")
    comp = np.take(state.tensor(), j, axis=axis)
    return float(np.vdot(comp, comp).real)


def _component(state: StateVector, conditioning: Sequence[str], alpha: Sequence[int]):
    layout = state.layout
    axes = [layout.axis(n) for n in conditioning]
    for n, a, ax in zip(conditioning, alpha, axes):
        if not 0 <= a < layout.dims[ax]:
            raise ValueError(f"basis index {a} out of range for {n!r}")
    index = [slice(None)] * len(layout)
    for ax, a in zip(axes, alpha):
        index[ax] = a
    return state.tensor()[tuple(index)], layout.without(conditioning)


def relative_state(state: StateVector, conditioning, alpha) -> StateVector:
    """Normalized component of ``state`` with ``conditioning`` fixed at ``alpha``.

    ``conditioning`` is a subsystem name or a sequence of names; ``alpha`` is
    the matching basis index or tuple of indices. The result lives on the
    remaining subsystems, in their original order.
    """
    if isinstance(conditioning, str):
        conditioning, alpha = (conditioning,), (alpha,)
    conditioning = tuple(conditioning)
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(conditioning) != len(alpha):
        raise ValueError("one basis index per conditioning subsystem")
    comp, rest = _component(state, conditioning, alpha)
    if len(rest) == 0:
        raise ValueError("conditioning on every subsystem leaves nothing to describe")
    norm = np.linalg.norm(comp)
    if norm <= TOL:
        raise UndefinedRelativeStateError(
            f"component {dict(zip(conditioning, alpha))} has norm {norm:.3e}"
        )
    return StateVector(rest, comp.ravel() / norm)


def component_norm(state: StateVector, conditioning, alpha) -> float:
    """``||u_alpha||``, the norm of the unnormalized conditioned component."""
    if isinstance(conditioning, str):
        conditioning, alpha = (conditioning,), (alpha,)
    comp, _ = _component(state, tuple(conditioning), tuple(np.atleast_1d(alpha)))
    return float(np.linalg.norm(comp))


def schmidt_coefficients(state: StateVector, part: Sequence[str]) -> np.ndarray:
    """Singular values of the bipartition ``part`` | rest (descending)."""
    others = [n for n in state.names if n not in part]
    t = state.permuted(list(part) + others).amplitudes
    rows = prod(state.layout.dim_of(n) for n in part)
    return np.linalg.svd(t.reshape(rows, -1), compute_uv=False)


def complete_unitary(columns) -> np.ndarray:
    """Unitary whose leading columns are the given orthonormal vectors.

    The remaining columns span the orthogonal complement.
    """
    cols = np.asarray(columns, dtype=np.complex128)
    if cols.ndim == 1:
        cols = cols[:, None]
    k = cols.shape[1]
    if np.max(np.abs(cols.conj().T @ cols - np.eye(k))) > TOL:
        raise ValueError("columns are not orthonormal")
    return np.hstack([cols, null_space(cols.conj().T)])
