"""Quantum one-time pad: key-indexed Pauli layers X^a Z^b on each qubit."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mlqcc.errors import DimensionMismatch, KeyLengthMismatch
from mlqcc.qim import DensityOperator, PureState, RegisterLayout
from mlqcc.qim.linalg import embed_operator

X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z = np.diag([1.0, -1.0]).astype(np.complex128)


@dataclass(frozen=True)
class QotpKey:
    """Key bits s_1..s_2q; qubit j gets X^{s_{2j-1}} Z^{s_{2j}}."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) % 2 or any(b not in (0, 1) for b in bits):
            raise KeyLengthMismatch(f"a key needs an even number of 0/1 bits, got {bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_int(cls, value: int, nbits: int) -> "QotpKey":
        """Key whose bits are the binary expansion of ``value``, most significant first."""
        return cls(tuple((int(value) >> (nbits - 1 - j)) & 1 for j in range(nbits)))

    @classmethod
    def zeros(cls, width: int) -> "QotpKey":
        return cls((0,) * (2 * width))

    @property
    def width(self) -> int:
        return len(self.bits) // 2


def qubit_width(dims: Sequence[int]) -> int:
    """Number of qubits in registers whose dimensions are powers of two."""
    total = 0
    for d in dims:
        q = int(round(math.log2(d)))
        if 2 ** q != d:
            raise DimensionMismatch(f"register dimension {d} is not a power of two")
        total += q
    return total


def qotp_operator(key: QotpKey) -> np.ndarray:
    op = np.ones((1, 1), dtype=np.complex128)
    for j in range(key.width):
        a, b = key.bits[2 * j], key.bits[2 * j + 1]
        op = np.kron(op, np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b))
    return op


def block_operator(layout: RegisterLayout, block: Sequence[str], key: QotpKey | None, *, inverse: bool = False) -> np.ndarray:
    """E_key (or its inverse) on the ``block`` registers, lifted to ``layout``.

    Block qubits are ordered by layout position; ``key=None`` means identity.
    """
    names = [n for n in layout.names if n in set(block)]
    width = qubit_width([layout.dim_of([n]) for n in names])
    if key is None:
        return np.eye(layout.dim, dtype=np.complex128)
    if key.width != width:
        raise KeyLengthMismatch(f"key of {len(key.bits)} bits for a {width}-qubit block")
    op = qotp_operator(key)
    if inverse:
        op = op.conj().T
    return embed_operator(op, layout.dims, [layout.index(n) for n in names])


def qotp_apply(state, key: QotpKey, block: Sequence[str]):
    """Encrypt ``block`` of a PureState or DensityOperator with ``key``."""
    op = block_operator(state.layout, block, key)
    if isinstance(state, PureState):
        return PureState(state.layout, op @ state.amplitudes)
    if isinstance(state, DensityOperator):
        return DensityOperator(state.layout, op @ state.matrix @ op.conj().T, check=False)
    raise TypeError(f"expected PureState or DensityOperator, got {type(state).__name__}")


def twirl_average(rho: np.ndarray) -> np.ndarray:
    """(1/4^q) sum over all keys of E_s rho E_s^dagger for a 2^q-dimensional rho."""
    rho = np.asarray(rho, dtype=np.complex128)
    q = qubit_width([rho.shape[0]])
    acc = np.zeros_like(rho)
    for bits in itertools.product((0, 1), repeat=2 * q):
        e = qotp_operator(QotpKey(bits))
        acc += e @ rho @ e.conj().T
    return acc / 4 ** q
