"""Register layouts, pure states, density operators and cq-ensembles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from mlqcc.errors import DimensionMismatch, InvalidState, UnknownRegister
from mlqcc.qim.linalg import (
    as_matrix,
    embed_operator,
    hermitian_residual,
    partial_trace_matrix,
    reduced_from_vector,
)

STATE_ATOL = 1e-10


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named tensor factors.

    >>> RegisterLayout([("A", 2), ("B", 3)]).dim
    6
    """

    factors: tuple[tuple[str, int], ...]

    def __init__(self, factors: Iterable[tuple[str, int]] = ()):
        facs = tuple((str(n), int(d)) for n, d in factors)
        names = [n for n, _ in facs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        for n, d in facs:
            if d < 1:
                raise ValueError(f"register {n!r} has non-positive dimension {d}")
        object.__setattr__(self, "factors", facs)

    @classmethod
    def of(cls, **dims: int) -> "RegisterLayout":
        return cls(dims.items())

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims)) if self.factors else 1

    def __len__(self) -> int:
        return len(self.factors)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownRegister(name, self.names) from None

    def indices(self, names: Iterable[str]) -> list[int]:
        """Indices of ``names`` in layout order (duplicates removed)."""
        idx = {self.index(n) for n in names}
        return sorted(idx)

    def dim_of(self, names: Iterable[str]) -> int:
        return int(np.prod([self.dims[i] for i in self.indices(names)]))

    def sub(self, names: Iterable[str]) -> "RegisterLayout":
        return RegisterLayout(self.factors[i] for i in self.indices(names))

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.factors + other.factors)


def _check_names(layout: RegisterLayout, names: Iterable[str]) -> list[int]:
    return layout.indices(names)


@dataclass(frozen=True, eq=False)
class PureState:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amp.shape[0] != self.layout.dim:
            raise DimensionMismatch(
                f"{amp.shape[0]} amplitudes for layout of dimension {self.layout.dim}"
            )
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > STATE_ATOL:
            raise InvalidState(f"state norm {norm!r} is not 1")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def basis(cls, layout: RegisterLayout, index: int = 0) -> "PureState":
        amp = np.zeros(layout.dim, dtype=np.complex128)
        amp[index] = 1.0
        return cls(layout, amp)

    @classmethod
    def normalized(cls, layout: RegisterLayout, amplitudes) -> "PureState":
        amp = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(layout, amp / np.linalg.norm(amp))

    def density(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.layout, np.outer(a, a.conj()), check=False)

    def overlap(self, other: "PureState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def reduced(self, keep: Iterable[str]) -> "DensityOperator":
        idx = _check_names(self.layout, keep)
        m = reduced_from_vector(self.amplitudes, self.layout.dims, idx)
        return DensityOperator(self.layout.sub(keep), m, check=False)

    def apply(self, op, targets: Sequence[str] | None = None) -> "PureState":
        op = as_matrix(op, square=True)
        if targets is not None:
            op = embed_operator(op, self.layout.dims, [self.layout.index(t) for t in targets])
        return PureState(self.layout, op @ self.amplitudes)

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(self.layout.concat(other.layout), np.kron(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, PSD, unit-trace operator on a register layout."""

    layout: RegisterLayout
    matrix: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True)
        if m.shape[0] != self.layout.dim:
            raise DimensionMismatch(f"matrix of size {m.shape[0]} for layout dimension {self.layout.dim}")
        if self.check:
            if hermitian_residual(m) > STATE_ATOL:
                raise InvalidState("density operator is not Hermitian")
            tr = np.trace(m).real
            if abs(tr - 1.0) > STATE_ATOL:
                raise InvalidState(f"density operator has trace {tr!r}")
            w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
            if w.size and w[0] < -STATE_ATOL:
                raise InvalidState(f"density operator has eigenvalue {w[0]!r}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityOperator":
        return state.density()

    @classmethod
    def maximally_mixed(cls, layout: RegisterLayout) -> "DensityOperator":
        return cls(layout, np.eye(layout.dim) / layout.dim, check=False)

    def reduced(self, keep: Iterable[str]) -> "DensityOperator":
        idx = _check_names(self.layout, keep)
        m = partial_trace_matrix(self.matrix, self.layout.dims, idx)
        return DensityOperator(self.layout.sub(keep), m, check=False)

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        return DensityOperator(self.layout.concat(other.layout), np.kron(self.matrix, other.matrix), check=False)

    def conjugate(self, op, targets: Sequence[str] | None = None) -> "DensityOperator":
        op = as_matrix(op, square=True)
        if targets is not None:
            op = embed_operator(op, self.layout.dims, [self.layout.index(t) for t in targets])
        return DensityOperator(self.layout, op @ self.matrix @ op.conj().T, check=False)


def as_density(state) -> DensityOperator:
    if isinstance(state, DensityOperator):
        return state
    if isinstance(state, PureState):
        return state.density()
    raise TypeError(f"expected PureState or DensityOperator, got {type(state).__name__}")


@dataclass(frozen=True, eq=False)
class CqEnsemble:
    """Probability-weighted quantum states indexed by classical labels.

    ``labels`` is an integer array of shape (n, len(coords)); row j holds the
    classical coordinates of state j. ``states`` is (n, d) for pure states or
    (n, d, d) for density matrices, all on ``layout``.
    """

    coords: tuple[str, ...]
    labels: np.ndarray
    probs: np.ndarray
    layout: RegisterLayout
    states: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(len(self.probs), len(self.coords))
        probs = np.asarray(self.probs, dtype=float)
        states = np.asarray(self.states, dtype=np.complex128)
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidState(f"ensemble probabilities must be non-negative and sum to 1 (sum={probs.sum()!r})")
        if states.shape[0] != probs.shape[0] or states.shape[1] != self.layout.dim:
            raise DimensionMismatch(f"states of shape {states.shape} for {len(probs)} labels on dimension {self.layout.dim}")
        if states.ndim not in (2, 3):
            raise DimensionMismatch("states must be vectors or matrices")
        if len(set(self.coords)) != len(self.coords) or set(self.coords) & set(self.layout.names):
            raise ValueError("classical coordinate names must be unique and distinct from register names")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "coords", tuple(self.coords))

    @classmethod
    def from_states(cls, coords: Sequence[str], items: Sequence[tuple[Sequence[int], float, object]]) -> "CqEnsemble":
        """Build from ``(label, probability, PureState | DensityOperator)`` triples."""
        if not items:
            raise ValueError("empty ensemble")
        layout = items[0][2].layout
        pure = all(isinstance(s, PureState) for _, _, s in items)
        if pure:
            states = np.stack([s.amplitudes for _, _, s in items])
        else:
            states = np.stack([as_density(s).matrix for _, _, s in items])
        for _, _, s in items:
            if s.layout != layout:
                raise DimensionMismatch("all ensemble states must share one layout")
        return cls(tuple(coords), np.array([list(l) for l, _, _ in items]), np.array([p for _, p, _ in items]), layout, states)

    @property
    def is_pure(self) -> bool:
        return self.states.ndim == 2

    def __len__(self) -> int:
        return len(self.probs)

    def coord_index(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise UnknownRegister(name, self.coords) from None

    def alphabet(self, name: str) -> int:
        col = self.labels[:, self.coord_index(name)]
        return int(col.max()) + 1 if len(col) else 1

    def state(self, j: int):
        if self.is_pure:
            return PureState(self.layout, self.states[j])
        return DensityOperator(self.layout, self.states[j], check=False)

    def restrict(self, mask) -> "CqEnsemble":
        """Condition on the labels selected by ``mask`` (renormalized)."""
        mask = np.asarray(mask, dtype=bool)
        p = self.probs[mask]
        total = p.sum()
        if total <= 0:
            raise InvalidState("conditioning on a zero-probability event")
        return CqEnsemble(self.coords, self.labels[mask], p / total, self.layout, self.states[mask])

    def with_coordinate(self, name: str, values) -> "CqEnsemble":
        values = np.asarray(values, dtype=np.int64).reshape(-1, 1)
        return CqEnsemble(self.coords + (name,), np.hstack([self.labels, values]), self.probs, self.layout, self.states)

    def drop_zero(self) -> "CqEnsemble":
        return self.restrict(self.probs > 0)
