"""The k = 4r - 1 round single-qubit reflection protocol for AND."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mlqcc.protocol import ALICE, BOB, ProtocolSpec, Round, expected_sender, simulate
from mlqcc.qim import RegisterLayout

I2 = np.eye(2, dtype=np.complex128)
Z = np.diag([1.0, -1.0]).astype(np.complex128)


def and_truth(x: int, y: int) -> int:
    return int(x and y)


@dataclass(frozen=True)
class AndParams:
    """Parameters of the reflection protocol: theta = pi / (8r), k = 4r - 1."""

    r: int

    def __post_init__(self):
        if isinstance(self.r, bool) or int(self.r) != self.r or self.r < 1:
            raise ValueError(f"r must be a positive integer, got {self.r!r}")
        object.__setattr__(self, "r", int(self.r))

    @classmethod
    def from_r(cls, r: int) -> "AndParams":
        return cls(r)

    @property
    def theta(self) -> float:
        return np.pi / (8 * self.r)

    @property
    def k(self) -> int:
        return 4 * self.r - 1

    @property
    def u_v(self) -> np.ndarray:
        """Reflection with U|0> = cos2t|0> + sin2t|1>, U|1> = sin2t|0> - cos2t|1>."""
        c, s = np.cos(2 * self.theta), np.sin(2 * self.theta)
        return np.array([[c, s], [s, -c]], dtype=np.complex128)

    @property
    def z(self) -> np.ndarray:
        return Z.copy()


def build_and_protocol(r: int) -> ProtocolSpec:
    """Alice reflects C with U_v when x = 1, Bob applies Z when y = 1; Bob measures C."""
    prm = AndParams.from_r(r)
    rounds = []
    for i in range(1, prm.k + 1):
        if expected_sender(i) == ALICE:
            rounds.append(Round(ALICE, {0: I2, 1: prm.u_v}))
        else:
            rounds.append(Round(BOB, {0: I2, 1: Z}))
    return ProtocolSpec(
        registers=RegisterLayout([("C", 2)]),
        rounds=tuple(rounds),
        output_register="C",
        holders={"C": ALICE},
        name=f"and-r{prm.r}",
    )


def expected_error(r: int) -> dict[tuple[int, int], float]:
    """Simulated Pr[output != x AND y] for each of the four inputs."""
    t = simulate(build_and_protocol(r))
    return {(x, y): float(max(0.0, 1.0 - t.output_distribution(x, y)[and_truth(x, y)])) for x in (0, 1) for y in (0, 1)}


__all__ = ["AndParams", "and_truth", "build_and_protocol", "expected_error"]
