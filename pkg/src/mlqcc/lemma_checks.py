"""Randomized checks of the entropy, distance and fidelity inequalities.

Each check draws ``trials`` instances from its own generator (spawned from
one seed) and records the worst margin: the smallest ``rhs - lhs`` for
inequalities, or ``tol - |lhs - rhs|`` for identities. A check passes when
every margin is non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from mlqcc.audit import concavity_margin, entropy_lemma_sides
from mlqcc.corpus import haar_unitary, random_density, random_pure_state, spawn
from mlqcc.qim import (
    CqEnsemble,
    DensityOperator,
    PureState,
    RegisterLayout,
    binary_entropy,
    classical_conditional_mi,
    conditional_mi,
    fidelity,
    mutual_information,
    trace_distance,
    uhlmann_unitary,
    von_neumann_entropy,
)
from mlqcc.qim.linalg import embed_operator
from mlqcc.reports import render_csv

SLACK = 1e-9
UHLMANN_TOL = 1e-8
MSG = RegisterLayout([("M", 2)])


def _encoding(psi0, psi1) -> CqEnsemble:
    """Uniform X with message |psi_x> (pure or mixed)."""
    return CqEnsemble.from_states(("x",), [((0,), 0.5, psi0), ((1,), 0.5, psi1)])


def _random_msg_layout(rng) -> RegisterLayout:
    return RegisterLayout([("M", int(rng.choice([2, 3, 4])))])


def pure_pinsker_gap(rng) -> float:
    """|I(X:M) - h2((1 - |<psi0|psi1>|)/2)| for a random pure encoding."""
    lay = _random_msg_layout(rng)
    p0, p1 = random_pure_state(rng, lay), random_pure_state(rng, lay)
    lhs = classical_conditional_mi(_encoding(p0, p1), ["x"], ["M"])
    rhs = binary_entropy((1 - abs(p0.overlap(p1))) / 2)
    return abs(lhs - rhs)


def _pure_pinsker(rng):
    return SLACK - pure_pinsker_gap(rng)


def _corollary3(rng):
    lay = _random_msg_layout(rng)
    p0, p1 = random_pure_state(rng, lay), random_pure_state(rng, lay)
    mi = classical_conditional_mi(_encoding(p0, p1), ["x"], ["M"])
    d = trace_distance(p0.density(), p1.density())
    return mi - binary_entropy(min(0.5, d * d / 4)) + SLACK


def _pinsker_fidelity(rng):
    lay = _random_msg_layout(rng)
    r0, r1 = random_density(rng, lay), random_density(rng, lay)
    mi = classical_conditional_mi(_encoding(r0, r1), ["x"], ["M"])
    return mi - (1 - fidelity(r0, r1)) + SLACK


def _povm(rng):
    lay = _random_msg_layout(rng)
    r0, r1 = random_density(rng, lay), random_density(rng, lay)
    u = haar_unitary(rng, lay.dim)
    e = (u * rng.random(lay.dim)) @ u.conj().T
    p = np.real(np.trace(e @ r0.matrix))
    q = np.real(np.trace(e @ r1.matrix))
    gap = 0.5 * (abs(p - q) + abs((1 - p) - (1 - q)))
    return trace_distance(r0, r1) - gap + SLACK


def uhlmann_gap(rng, dim_b: int | None = None) -> float:
    """|overlap achieved by the Uhlmann unitary - fidelity of the reduced states|."""
    db = dim_b or int(rng.choice([2, 4]))
    lay = RegisterLayout([("A", 2), ("B", db)])
    p0, p1 = random_pure_state(rng, lay), random_pure_state(rng, lay)
    v = uhlmann_unitary(p0, p1, ["A"])
    achieved = abs(p0.overlap(p1.apply(v, ["A"])))
    return abs(achieved - fidelity(p0.reduced(["B"]), p1.reduced(["B"])))


def _uhlmann(rng):
    return UHLMANN_TOL - uhlmann_gap(rng)


def _purification_lemma(rng):
    lay = RegisterLayout([("A", 2), ("B", 2)])
    p0, p1 = random_pure_state(rng, lay), random_pure_state(rng, lay)
    before = classical_conditional_mi(_encoding(p0, p1), ["x"], ["B"])
    v = uhlmann_unitary(p0, p1, ["A"])
    after = classical_conditional_mi(_encoding(p0, p1.apply(v, ["A"])), ["x"], ["A", "B"])
    return binary_entropy(min(1.0, before / 2)) - after + SLACK


def _entropy_lemma(rng):
    n = int(rng.integers(1, 65))
    xs = rng.random(n) * (rng.random(n) < rng.random())
    lhs, rhs = entropy_lemma_sides(xs)
    return rhs - lhs + SLACK


def _unitary_invariance(rng):
    lay = _random_msg_layout(rng)
    r0, r1 = random_density(rng, lay), random_density(rng, lay)
    u = haar_unitary(rng, lay.dim)
    s0 = DensityOperator(lay, u @ r0.matrix @ u.conj().T)
    s1 = DensityOperator(lay, u @ r1.matrix @ u.conj().T)
    err = max(abs(trace_distance(r0, r1) - trace_distance(s0, s1)), abs(fidelity(r0, r1) - fidelity(s0, s1)))
    return SLACK - err


def _schmidt_symmetry(rng):
    lay = RegisterLayout([("A", int(rng.integers(2, 5))), ("B", int(rng.integers(2, 5)))])
    psi = random_pure_state(rng, lay)
    return SLACK - abs(von_neumann_entropy(psi.reduced(["A"])) - von_neumann_entropy(psi.reduced(["B"])))


def _ancilla_neutrality(rng):
    lay = RegisterLayout([("A", 2), ("B", 3)])
    rho = random_density(rng, lay)
    anc = PureState.basis(RegisterLayout([("E", 2)])).apply(haar_unitary(rng, 2)).density()
    joint = rho.tensor(anc)
    return SLACK - abs(mutual_information(rho, ["A"], ["B"]) - mutual_information(joint, ["A"], ["B", "E"]))


def _strong_subadditivity(rng):
    lay = RegisterLayout([("A", 2), ("B", 2), ("C", 2)])
    rho = random_density(rng, lay)
    return conditional_mi(rho, ["A"], ["B"], ["C"]) + SLACK


def _h2_lower_bound(rng):
    x = rng.random() or 1.0
    return binary_entropy(x) - x * np.log2(1 / x) + SLACK


CHECKS: dict[str, Callable[[np.random.Generator], float]] = {
    "pure_pinsker": _pure_pinsker,
    "improved_pure_bound": _corollary3,
    "mi_fidelity": _pinsker_fidelity,
    "povm_bound": _povm,
    "uhlmann": _uhlmann,
    "purification_lemma": _purification_lemma,
    "entropy_lemma": _entropy_lemma,
    "unitary_invariance": _unitary_invariance,
    "schmidt_symmetry": _schmidt_symmetry,
    "ancilla_neutrality": _ancilla_neutrality,
    "strong_subadditivity": _strong_subadditivity,
    "h2_lower_bound": _h2_lower_bound,
}


@dataclass(frozen=True)
class LemmaResult:
    name: str
    trials: int
    passed: int
    worst_margin: float


@dataclass(frozen=True)
class LemmaReport:
    seed: int
    trials: int
    results: tuple[LemmaResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(r.passed == r.trials for r in self.results)

    def to_csv(self) -> str:
        rows = [(r.name, r.trials, r.passed, r.worst_margin) for r in self.results]
        return render_csv(
            ["lemma", "trials", "passed", "worst_margin"],
            rows,
            comments=[f"mlqcc lemmas seed={self.seed} trials={self.trials}"],
        )


def run_lemma_suite(trials: int, seed: int) -> LemmaReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    gens = spawn(seed, len(CHECKS))
    results = []
    for (name, fn), rng in zip(CHECKS.items(), gens):
        margins = np.array([fn(rng) for _ in range(trials)])
        results.append(LemmaResult(name, trials, int(np.sum(margins >= 0)), float(margins.min())))
    cm = concavity_margin(20)
    results.append(LemmaResult("concavity_grid", 400, 400 if cm >= -SLACK else 0, cm + SLACK))
    return LemmaReport(seed, trials, tuple(results))
