"""Information-cost functionals of simulated protocols.

Odd rounds contribute I(M_i : X | Y, receiver coins, B_i) and even rounds the
mirror image, where M_i are the registers sent in round i and B_i the
registers the receiver holds besides them. CIC0 restricts to the receiver's
input being 0 under the distribution uniform on {(0,0), (0,1), (1,0)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from mlqcc.errors import RequiresBinaryInputs, RequiresMemoryless, StateBlowup
from mlqcc.protocol import (
    ALICE,
    DEFAULT_CAP,
    InputDistribution,
    ProtocolSpec,
    RoundPlan,
    Transcript,
    qcc,
    simulate,
    u0,
)
from mlqcc.qim import classical_conditional_mi, conditional_mi, embed_classical
from mlqcc.reports import render_csv

QIL_EMBED_CAP = 1024


class RoundTerm(NamedTuple):
    round: int
    sender: str
    bits: float


@dataclass(frozen=True)
class CicLedger:
    terms: tuple[RoundTerm, ...]
    cic: float
    cic0: float
    qil: float
    qcc: float

    def to_csv(self) -> str:
        rows = [(t.round, t.sender, t.bits) for t in self.terms]
        rows += [("cic", "", self.cic), ("cic0", "", self.cic0), ("qil", "", self.qil), ("qcc", "", self.qcc)]
        return render_csv(["round", "sender", "term_bits"], rows)


def _inputs(sender: str) -> tuple[str, str]:
    """(sender's input coordinate, receiver's input coordinate)."""
    return ("x", "y") if sender == ALICE else ("y", "x")


def _receiver_coins(t: Transcript, pl: RoundPlan) -> list[str]:
    return [s.name for s in t.spec.coin_model.owned_by(pl.receiver)]


def round_term(t: Transcript, i: int, *, mask=None) -> float:
    """I(M_i : sender input | receiver input, receiver coins, B_i) for round i (1-based)."""
    pl = t.plans[i - 1]
    own, other = _inputs(pl.sender)
    ens = t.ensemble(i, mask=mask)
    return classical_conditional_mi(
        ens, pl.sends, [own], cond=[other] + _receiver_coins(t, pl), quantum_cond=pl.receiver_private
    )


def round_terms(t: Transcript, *, mask=None) -> tuple[RoundTerm, ...]:
    return tuple(RoundTerm(pl.index, pl.sender, round_term(t, pl.index, mask=mask)) for pl in t.plans)


def _require_binary_memoryless(p: ProtocolSpec) -> None:
    if not p.binary_inputs:
        raise RequiresBinaryInputs(f"protocol has input alphabets {p.input_sizes}")
    if not p.memoryless:
        raise RequiresMemoryless("protocol is not declared memoryless")


def cic0_terms(p: ProtocolSpec | Transcript, *, cap: int = DEFAULT_CAP) -> tuple[RoundTerm, ...]:
    """a_i = I(M_i:X|Y=0) on odd rounds and I(M_i:Y|X=0) on even rounds."""
    spec = p.spec if isinstance(p, Transcript) else p
    _require_binary_memoryless(spec)
    t = p if isinstance(p, Transcript) and p.mu.is_close(u0()) else simulate(spec, u0(), cap=cap)
    out = []
    for pl in t.plans:
        _, other = _inputs(pl.sender)
        mask = t.select(**{other: 0})
        out.append(RoundTerm(pl.index, pl.sender, round_term(t, pl.index, mask=mask)))
    return tuple(out)


def cic0(p: ProtocolSpec | Transcript, *, cap: int = DEFAULT_CAP) -> float:
    return float(sum(term.bits for term in cic0_terms(p, cap=cap)))


def qil(p: ProtocolSpec | Transcript, mu: InputDistribution | None = None, *, cap: int = DEFAULT_CAP) -> float:
    """Sum over rounds of I(sender input : M_i B_i | receiver input).

    The receiver's coins count as part of B_i. Each term is evaluated on the
    full density operator with the classical coordinates embedded as
    registers, independently of the block-wise route used by :func:`cic`.
    """
    t = p if isinstance(p, Transcript) else simulate(p, mu, cap=cap)
    total = 0.0
    for pl in t.plans:
        own, other = _inputs(pl.sender)
        coins = _receiver_coins(t, pl)
        quantum = list(pl.sends) + list(pl.receiver_private)
        ens = t.ensemble(pl.index)
        dim = t.layout.dim_of(quantum) * math.prod(ens.alphabet(c) for c in [own, other] + coins)
        if dim > QIL_EMBED_CAP:
            raise StateBlowup(dim, QIL_EMBED_CAP, what="embedded cq dimension")
        rho = embed_classical(ens, [own, other] + coins, quantum, prefix="#")
        total += conditional_mi(rho, ["#" + own], quantum + ["#" + c for c in coins], ["#" + other])
    return float(total)


def cic(
    p: ProtocolSpec,
    mu: InputDistribution | None = None,
    *,
    cap: int = DEFAULT_CAP,
    with_qil: bool = True,
) -> CicLedger:
    """Per-round ledger with totals; cic0 is NaN unless inputs are binary and the protocol memoryless."""
    t = simulate(p, mu, cap=cap)
    terms = round_terms(t)
    try:
        c0 = cic0(t, cap=cap)
    except (RequiresBinaryInputs, RequiresMemoryless):
        c0 = float("nan")
    q = qil(t) if with_qil else float("nan")
    return CicLedger(terms, float(sum(x.bits for x in terms)), c0, q, qcc(p))


def ledger_from_transcript(t: Transcript, *, with_qil: bool = True) -> CicLedger:
    terms = round_terms(t)
    try:
        c0 = cic0(t)
    except (RequiresBinaryInputs, RequiresMemoryless):
        c0 = float("nan")
    return CicLedger(terms, float(sum(x.bits for x in terms)), c0, qil(t) if with_qil else float("nan"), qcc(t.spec))


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def output_information(p: ProtocolSpec | Transcript, mu: InputDistribution | None = None) -> float:
    """Classical I(output : X | Y) from the joint table mu(x, y) Pr[o | x, y]."""
    t = p if isinstance(p, Transcript) else simulate(p, mu)
    mu = mu or t.mu
    nx, ny = t.spec.input_sizes
    joint = np.array([[mu(x, y) * t.output_distribution(x, y) for y in range(ny)] for x in range(nx)])
    h = _entropy_bits
    return h(joint.sum(axis=2)) + h(joint.sum(axis=0)) - h(joint) - h(joint.sum(axis=(0, 2)))
