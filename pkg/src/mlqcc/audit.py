"""Round-by-round certification of the log(k)/k lower-bound chain for AND.

For a memoryless, coin-free, binary-input protocol with k (odd) rounds the
audit records, per round i,

* a_i: I(M_i:X|Y=0) (odd) or I(M_i:Y|X=0) (even) under the uniform
  distribution on {(0,0), (0,1), (1,0)};
* b_i: distance between the round-i states of (1,0) and (0,0) (odd) or of
  (0,1) and (0,0) (even);
* delta_i: distance between the round-i states of (0,1) and (1,1) (odd) or
  of (1,0) and (1,1) (even);

and checks the inequalities linking them to the error and to CIC0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mlqcc.and_protocol import and_truth
from mlqcc.cic import cic0_terms
from mlqcc.errors import PreconditionError, RequiresBinaryInputs, RequiresMemoryless
from mlqcc.protocol import ALICE, ProtocolSpec, simulate, u0
from mlqcc.qim import binary_entropy, binary_entropy_inv
from mlqcc.reports import NOT_APPLICABLE, render_csv

SLACK = 1e-9
CLAIM3_THRESHOLD = 0.4


@dataclass(frozen=True, eq=False)
class LowerBoundAudit:
    """Quantities of the lower-bound chain for one protocol.

    Attributes:
        epsilon: worst-case error over the two inputs compared by delta_k,
            (0,1) and (1,1). The remaining variants are reported alongside.
        epsilon_10_11: worst-case error over (1,0) and (1,1).
        epsilon_dist: distributional error under the 1/3-uniform distribution.
        epsilon_worst: worst-case error over all four inputs.
        output_gap: (|p0-q0| + |p1-q1|) / 2 between the output distributions
            of (0,1) and (1,1).
    """

    k: int
    epsilon: float
    epsilon_10_11: float
    epsilon_dist: float
    epsilon_worst: float
    a: np.ndarray
    b: np.ndarray
    delta: np.ndarray
    cic0: float
    cic: float
    output_gap: float
    name: str = ""
    claims: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v is NOT_APPLICABLE or bool(v) for v in self.claims.values())

    def to_csv(self, comments=()) -> str:
        rows = [(i + 1, self.a[i], self.b[i], self.delta[i]) for i in range(self.k)]
        for key, val in self.claims.items():
            rows.append((key, "NotApplicable" if val is NOT_APPLICABLE else bool(val), "", ""))
        for key in ("epsilon", "epsilon_10_11", "epsilon_dist", "epsilon_worst", "cic0", "cic", "output_gap"):
            rows.append((key, float(getattr(self, key)), "", ""))
        for key, val in self.bounds.items():
            rows.append((key, float(val), "", ""))
        return render_csv(["i", "a_i", "b_i", "delta_i"], rows, comments)


def _dist(u: np.ndarray, v: np.ndarray) -> float:
    ov = abs(np.vdot(u, v))
    return float(math.sqrt(max(0.0, 1.0 - min(1.0, ov * ov))))


def audit(p: ProtocolSpec, *, tol: float = SLACK) -> LowerBoundAudit:
    """Compute a, b, delta and error variants, then run every check."""
    if not p.memoryless:
        raise RequiresMemoryless("the audit applies to memoryless protocols only")
    if not p.binary_inputs:
        raise RequiresBinaryInputs(f"protocol has input alphabets {p.input_sizes}")
    if p.coin_model.total_bits:
        raise PreconditionError("the audit applies to coin-free protocols")
    if p.k % 2 == 0:
        raise PreconditionError(f"the audit needs Alice to send last (odd k), got k={p.k}")
    t = simulate(p, u0())
    k = p.k

    def psi(i, x, y):
        return t.states[i, np.flatnonzero(t.select(x, y))[0]]

    a = np.array([term.bits for term in cic0_terms(t)])
    b = np.zeros(k)
    delta = np.zeros(k)
    for i in range(1, k + 1):
        if t.plans[i - 1].sender == ALICE:
            b[i - 1] = _dist(psi(i, 1, 0), psi(i, 0, 0))
            delta[i - 1] = _dist(psi(i, 0, 1), psi(i, 1, 1))
        else:
            b[i - 1] = _dist(psi(i, 0, 1), psi(i, 0, 0))
            delta[i - 1] = _dist(psi(i, 1, 0), psi(i, 1, 1))

    err = {}
    for x in (0, 1):
        for y in (0, 1):
            out = t.output_distribution(x, y)
            want = and_truth(x, y)
            err[(x, y)] = max(0.0, 1.0 - float(out[want]) if want < len(out) else 1.0)
    mu = u0()
    p01 = t.output_distribution(0, 1)
    p11 = t.output_distribution(1, 1)
    gap = 0.5 * float(np.abs(p01 - p11).sum())
    c0 = float(a.sum())
    aud = LowerBoundAudit(
        k=k,
        epsilon=max(err[(0, 1)], err[(1, 1)]),
        epsilon_10_11=max(err[(1, 0)], err[(1, 1)]),
        epsilon_dist=sum(mu(x, y) * e for (x, y), e in err.items()),
        epsilon_worst=max(err.values()),
        a=a,
        b=b,
        delta=delta,
        cic0=c0,
        cic=2.0 * c0 / 3.0,
        output_gap=gap,
        name=p.name,
    )
    aud.claims.update(
        claim1=check_claim1(aud, tol),
        claim2=check_claim2(aud, tol),
        claim3=check_claim3(aud, tol),
        povm=bool(aud.delta[-1] >= gap - tol),
        proposition=check_proposition(aud, tol),
    )
    aud.bounds.update(proposition_bounds(aud))
    aud.bounds.update({f"chain_{key}": float(v) for key, v in proposition_chain(aud, tol).items()})
    return aud


def check_claim1(aud: LowerBoundAudit, tol: float = SLACK) -> bool:
    """delta_k >= 1 - 2 epsilon."""
    return bool(aud.delta[-1] >= 1.0 - 2.0 * aud.epsilon - tol)


def check_claim2(aud: LowerBoundAudit, tol: float = SLACK) -> bool:
    """delta_k <= 2 sum b, and delta_i <= b_{i-1} + b_i + delta_{i-1} for every round."""
    if aud.delta[-1] > 2.0 * aud.b.sum() + tol:
        return False
    prev_b = prev_d = 0.0
    for bi, di in zip(aud.b, aud.delta):
        if di > prev_b + bi + prev_d + tol:
            return False
        prev_b, prev_d = bi, di
    return True


def _f(x):
    return 2.0 * np.sqrt(binary_entropy_inv(np.clip(x, 0.0, 1.0)))


def check_claim3(aud: LowerBoundAudit, tol: float = SLACK):
    """sum b <= 2k sqrt(h^-1(CIC0 / k)) when every a_i <= 0.4, else NOT_APPLICABLE.

    The per-round bound b_i <= 2 sqrt(h^-1(a_i)) is part of the check.
    """
    if np.any(aud.a > CLAIM3_THRESHOLD):
        return NOT_APPLICABLE
    if np.any(aud.b > _f(aud.a) + tol):
        return False
    return bool(aud.b.sum() <= aud.k * _f(aud.a.sum() / aud.k) + tol)


def proposition_bounds(aud: LowerBoundAudit) -> dict[str, float]:
    """The two displayed lower bounds, with (1 - 2 eps) floored at zero."""
    k = aud.k
    m = max(0.0, 1.0 - 2.0 * aud.epsilon) ** 2 * math.log2(k)
    return {"bound_cic0": m / (8 * k), "bound_cic": m / (12 * k)}


def check_proposition(aud: LowerBoundAudit, tol: float = SLACK) -> bool:
    bd = proposition_bounds(aud)
    return bool(aud.cic0 >= bd["bound_cic0"] - tol and aud.cic >= bd["bound_cic"] - tol)


def proposition_chain(aud: LowerBoundAudit, tol: float = SLACK) -> dict[str, float | bool]:
    """Every link of the chain (1 - 2 eps) <= delta_k <= 2 sum b <= 4k sqrt(h^-1(CIC0/k)).

    Also reports the looser displayed form (1 - 2 eps)/2 <= 2k sqrt(...) and the
    entropy step CIC0/k >= h2((1 - 2 eps)^2 / (16 k^2)). Links that depend on
    the 0.4 hypothesis may fail when it does not hold; they are reported, not
    asserted.
    """
    k = aud.k
    lhs = 1.0 - 2.0 * aud.epsilon
    root = 2.0 * k * _f(aud.cic0 / k)
    two_b = 2.0 * aud.b.sum()
    x = min(0.5, max(0.0, lhs) ** 2 / (16 * k * k))
    h_step = float(binary_entropy(x))
    return {
        "one_minus_2eps": lhs,
        "delta_k": float(aud.delta[-1]),
        "two_sum_b": two_b,
        "four_k_root": root,
        "h2_step_rhs": h_step,
        "holds_claim1_link": bool(lhs <= aud.delta[-1] + tol),
        "holds_claim2_link": bool(aud.delta[-1] <= two_b + tol),
        "holds_claim3_link": bool(two_b <= root + tol),
        "holds_tight_chain": bool(lhs <= root + tol),
        "holds_displayed_half": bool(0.5 * lhs <= 0.5 * root + tol),
        "holds_h2_step": bool(aud.cic0 / k >= h_step - tol),
    }


def concavity_margin(points_per_axis: int = 20, hi: float = CLAIM3_THRESHOLD) -> float:
    """min over the grid of f((x+y)/2) - (f(x)+f(y))/2 for f = 2 sqrt(h^-1)."""
    g = np.linspace(0.0, hi, points_per_axis)
    x, y = np.meshgrid(g, g)
    return float(np.min(_f((x + y) / 2) - (_f(x) + _f(y)) / 2))


def check_concavity(points_per_axis: int = 20, tol: float = SLACK) -> bool:
    """Midpoint concavity of 2 sqrt(h^-1(x)) on a points_per_axis^2 grid of [0, 0.4]^2."""
    return concavity_margin(points_per_axis) >= -tol


def entropy_lemma_sides(xs) -> tuple[float, float]:
    """(sum h2(x_i), 3 S |log2(2n/S)|) with S = sum x_i; both 0 when S = 0."""
    xs = np.asarray(xs, dtype=float).reshape(-1)
    s = float(xs.sum())
    lhs = float(np.sum(binary_entropy(xs))) if xs.size else 0.0
    if s <= 0.0:
        return lhs, 0.0
    return lhs, 3.0 * s * abs(math.log2(2 * xs.size / s))


def check_entropy_lemma(xs, tol: float = SLACK) -> bool:
    lhs, rhs = entropy_lemma_sides(xs)
    return lhs <= rhs + tol
