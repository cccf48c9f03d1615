"""Seeded random protocols and small built-in protocols used by tests and the CLI."""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from mlqcc.protocol import ALICE, BOB, CoinModel, OutputStage, ProtocolSpec, Round, expected_sender
from mlqcc.qim import DensityOperator, PureState, RegisterLayout

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    if d == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return np.asarray(unitary_group.rvs(d, random_state=rng), dtype=np.complex128).reshape(d, d)


def random_pure_state(rng: np.random.Generator, layout: RegisterLayout) -> PureState:
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return PureState.normalized(layout, v)


def random_density(rng: np.random.Generator, layout: RegisterLayout, rank: int | None = None) -> DensityOperator:
    d = layout.dim
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    m = g @ g.conj().T
    return DensityOperator(layout, m / np.trace(m).real)


def spawn(seed: int, n: int) -> list[np.random.Generator]:
    """n independent generators derived from one 64-bit seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def random_memoryless_protocol(rng: np.random.Generator, k: int | None = None) -> ProtocolSpec:
    """Single-qubit memoryless protocol with a Haar unitary per (round, sender input)."""
    if k is None:
        k = int(rng.choice([3, 5, 7]))
    rounds = [Round(expected_sender(i), {v: haar_unitary(rng, 2) for v in (0, 1)}) for i in range(1, k + 1)]
    return ProtocolSpec(RegisterLayout([("M", 2)]), tuple(rounds), "M", name=f"random-k{k}")


def near_identity_unitary(rng: np.random.Generator, d: int, scale: float) -> np.ndarray:
    """exp(-i scale H) for a random Hermitian H of unit operator norm."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + g.conj().T) / 2
    return expm(-1j * scale * h / np.linalg.norm(h, 2))


def near_identity_protocol(rng: np.random.Generator, k: int | None = None, scale: float = 0.3) -> ProtocolSpec:
    """Like random_memoryless_protocol, but input 1 only nudges the message.

    Input 0 applies the identity, so per-round information stays small and
    the low-information regime of the audit is exercised.
    """
    if k is None:
        k = int(rng.choice([3, 5, 7]))
    rounds = [Round(expected_sender(i), {0: I2, 1: near_identity_unitary(rng, 2, scale)}) for i in range(1, k + 1)]
    return ProtocolSpec(RegisterLayout([("M", 2)]), tuple(rounds), "M", name=f"near-identity-k{k}")


def random_oneshot_protocol(rng: np.random.Generator, k: int | None = None, coin_bits: int = 1) -> ProtocolSpec:
    """Single-qubit memoryless protocol where round i reads only its own fresh coin segment."""
    if k is None:
        k = int(rng.choice([1, 3, 5]))
    coins = CoinModel.one_shot([coin_bits] * k)
    rounds = []
    for i in range(1, k + 1):
        fam = {(v, c): haar_unitary(rng, 2) for v in (0, 1) for c in range(2 ** coin_bits)}
        rounds.append(Round(expected_sender(i), fam, reads=(f"r{i}",)))
    return ProtocolSpec(RegisterLayout([("M", 2)]), tuple(rounds), "M", coin_model=coins, name=f"random-oneshot-k{k}")


def memoryless_corpus(seed: int, n: int) -> list[ProtocolSpec]:
    return [random_memoryless_protocol(g) for g in spawn(seed, n)]


def near_identity_corpus(seed: int, n: int, scale: float = 0.3) -> list[ProtocolSpec]:
    return [near_identity_protocol(g, scale=scale) for g in spawn(seed, n)]


def oneshot_corpus(seed: int, n: int, max_k: int = 5) -> list[ProtocolSpec]:
    ks = [k for k in (1, 3, 5) if k <= max_k]
    return [random_oneshot_protocol(g, int(g.choice(ks))) for g in spawn(seed, n)]


def send_x_and() -> ProtocolSpec:
    """Alice sends |x>; Bob copies it into his output qubit O when y = 1."""
    return ProtocolSpec(
        registers=RegisterLayout([("M", 2), ("O", 2)]),
        rounds=(Round(ALICE, {0: I2, 1: X}, acts_on=("M",), sends=("M",)),),
        output_register="O",
        holders={"M": ALICE, "O": BOB},
        output_stage=OutputStage({0: np.eye(4), 1: CNOT}, acts_on=("M", "O")),
        name="send-x-and",
    )


def alice_sends_x() -> ProtocolSpec:
    """One round: Alice writes x into M and sends it; Bob outputs M."""
    return ProtocolSpec(RegisterLayout([("M", 2)]), (Round(ALICE, {0: I2, 1: X}),), "M", name="alice-sends-x")


def constant_output(k: int = 1) -> ProtocolSpec:
    """Input-independent: every round applies the identity; Bob always outputs 0."""
    rounds = tuple(Round(expected_sender(i), {0: I2, 1: I2}) for i in range(1, k + 1))
    return ProtocolSpec(RegisterLayout([("M", 2)]), rounds, "M", name=f"constant-k{k}")


def input_independent(rng: np.random.Generator, k: int = 3) -> ProtocolSpec:
    """Random unitaries that ignore the sender's input."""
    rounds = []
    for i in range(1, k + 1):
        u = haar_unitary(rng, 2)
        rounds.append(Round(expected_sender(i), {0: u, 1: u}))
    return ProtocolSpec(RegisterLayout([("M", 2)]), tuple(rounds), "M", name=f"input-independent-k{k}")
