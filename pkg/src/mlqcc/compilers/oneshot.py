"""One-shot coin removal: quantize the coins and compensate before sending.

Each coin segment becomes a quantum register prepared in sum_r sqrt(p_r)|r>.
Rounds apply the base unitaries coherently controlled by those registers, then
the sender applies an input-controlled Uhlmann unitary V^v on the coin
registers used so far (V^0 = I), chosen so that the two states the receiver
must not distinguish overlap as much as their message marginals allow.
Everything is sent every round, so the result is coin-free and memoryless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mlqcc.audit import check_entropy_lemma, entropy_lemma_sides
from mlqcc.cic import cic as cic_ledger
from mlqcc.cic import cic0_terms
from mlqcc.errors import InvalidProtocol, NotOneShot, RequiresBinaryInputs, RequiresMemoryless, StateBlowup
from mlqcc.protocol import (
    ALICE,
    DEFAULT_CAP,
    CoinModel,
    InputDistribution,
    OutputStage,
    ProtocolSpec,
    Round,
    plan,
    simulate,
    u0,
    validate,
)
from mlqcc.qim import PureState, RegisterLayout, binary_entropy, classical_conditional_mi, fidelity, uhlmann_unitary
from mlqcc.qim.linalg import embed_operator
from mlqcc.reports import NOT_APPLICABLE, Certificate, certificates_csv

COIN_PREFIX = "coin_"


@dataclass(frozen=True, eq=False)
class RoundCompensation:
    """Compensation of one round: V^v on ``act_on`` (V^0 is the identity)."""

    round: int
    sender: str
    act_on: tuple[str, ...]
    v: tuple[np.ndarray, ...]
    overlap: float
    fidelity: float


@dataclass(frozen=True, eq=False)
class CompensationPlan:
    rounds: tuple[RoundCompensation, ...]


@dataclass(frozen=True, eq=False)
class OneShotCompiled:
    base: ProtocolSpec
    spec: ProtocolSpec
    plan: CompensationPlan
    coin_registers: dict


def _prep_unitary(amplitudes: np.ndarray) -> np.ndarray:
    """Householder reflection sending |0> to the given real unit vector."""
    d = len(amplitudes)
    e0 = np.zeros(d)
    e0[0] = 1.0
    v = e0 - amplitudes
    nv = float(v @ v)
    if nv < 1e-30:
        return np.eye(d, dtype=np.complex128)
    return (np.eye(d) - 2.0 * np.outer(v, v) / nv).astype(np.complex128)


def _check_one_shot(p: ProtocolSpec) -> None:
    seen: dict[str, int] = {}
    stages = [(i, r.reads) for i, r in enumerate(p.rounds, start=1)]
    if p.output_stage is not None:
        stages.append((p.k + 1, p.output_stage.reads))
    for i, reads in stages:
        for r in reads:
            if r in seen:
                raise NotOneShot(f"coin segment {r!r} is read in rounds {seen[r]} and {i}")
            seen[r] = i


def _controlled(layout: RegisterLayout, family: dict, value: int, reads, coin_regs: dict, acts_on) -> np.ndarray:
    """sum_c |c><c| on the read coin registers (x) U[(value, c)] on ``acts_on``, full space."""
    regs = [coin_regs[r] for r in reads if r in coin_regs]
    dims = list(layout.dims)
    targets = [layout.index(n) for n in acts_on]
    if not regs:
        return embed_operator(family[(value, 0)], dims, targets)
    cidx = [layout.index(n) for n in regs]
    cdims = [dims[j] for j in cidx]
    dc = int(np.prod(cdims))
    da = layout.dim_of(acts_on) if acts_on else 1
    block = np.zeros((dc * da, dc * da), dtype=np.complex128)
    for c in range(dc):
        u = family[(value, c)] if acts_on else np.eye(1)
        block[c * da:(c + 1) * da, c * da:(c + 1) * da] = u
    return embed_operator(block, dims, cidx + targets)


def compile_oneshot(base: ProtocolSpec, *, cap: int = DEFAULT_CAP) -> OneShotCompiled:
    """Coin-free memoryless protocol with the same output behaviour as ``base``."""
    _check_one_shot(base)
    violations = validate(base)
    if violations:
        raise InvalidProtocol(violations)
    if not base.memoryless:
        raise RequiresMemoryless("the one-shot compiler takes memoryless protocols")
    if not base.binary_inputs:
        raise RequiresBinaryInputs(f"protocol has input alphabets {base.input_sizes}")

    segs = [s for s in base.coin_model.segments if s.bits > 0]
    coin_regs = {s.name: COIN_PREFIX + s.name for s in segs}
    layout = RegisterLayout([(coin_regs[s.name], s.size) for s in segs]).concat(base.registers)
    if layout.dim > cap:
        raise StateBlowup(layout.dim, cap)
    holders = dict(base.holders)
    holders.update({r: ALICE for r in coin_regs.values()})
    dims = list(layout.dims)

    prep = np.eye(1, dtype=np.complex128)
    for s in segs:
        prep = np.kron(prep, _prep_unitary(np.sqrt(s.distribution())))
    prep_full = embed_operator(prep, dims, [layout.index(coin_regs[s.name]) for s in segs]) if segs else np.eye(layout.dim)

    inputs = [(x, y) for x in (0, 1) for y in (0, 1)]
    states = np.zeros((4, layout.dim), dtype=np.complex128)
    states[:, 0] = 1.0
    base_plans = plan(base)
    used: list[str] = []
    comps = []
    rounds = []
    held_alice = tuple(n for n in layout.names if holders[n] == ALICE)
    for i, (rnd, pl) in enumerate(zip(base.rounds, base_plans), start=1):
        col = 0 if pl.sender == ALICE else 1
        ops = []
        for v in (0, 1):
            op = _controlled(layout, rnd.unitaries, v, rnd.reads, coin_regs, pl.acts_on)
            ops.append(op @ prep_full if i == 1 else op)
        states = np.stack([states[j] @ ops[inp[col]].T for j, inp in enumerate(inputs)])
        used += [coin_regs[r] for r in rnd.reads if r in coin_regs and coin_regs[r] not in used]
        act_on = tuple(n for n in layout.names if n in used)
        v1 = np.eye(layout.dim_of(act_on) if act_on else 1, dtype=np.complex128)
        overlap = fid = float("nan")
        if act_on:
            a, b = ((0, 0), (1, 0)) if pl.sender == ALICE else ((0, 0), (0, 1))
            phi0 = PureState(layout, states[inputs.index(a)])
            phi1 = PureState(layout, states[inputs.index(b)])
            v1 = uhlmann_unitary(phi0, phi1, act_on)
            full_v = embed_operator(v1, dims, [layout.index(n) for n in act_on])
            overlap = abs(np.vdot(phi0.amplitudes, full_v @ phi1.amplitudes))
            msg = base.registers.names
            fid = fidelity(phi0.reduced(msg), phi1.reduced(msg))
            states = np.stack([full_v @ s if inputs[j][col] == 1 else s for j, s in enumerate(states)])
            ops[1] = full_v @ ops[1]
        comps.append(RoundCompensation(i, pl.sender, act_on, (np.eye(len(v1), dtype=np.complex128), v1), overlap, fid))
        held = held_alice if i == 1 else layout.names
        idx = [layout.index(n) for n in held]
        rest = [j for j in range(len(dims)) if j not in idx]
        fam = {}
        for v in (0, 1):
            fam[v] = _restrict(ops[v], dims, idx, rest)
        rounds.append(Round(pl.sender, fam, acts_on=held))

    out_stage = None
    if base.output_stage is not None:
        st = base.output_stage
        fam = {}
        out_acts = st.acts_on if st.acts_on is not None else tuple(n for n in base.registers.names)
        for y in (0, 1):
            fam[y] = _controlled(layout, st.unitaries, y, st.reads, coin_regs, out_acts)
        out_stage = OutputStage(fam, acts_on=layout.names)

    spec = ProtocolSpec(
        registers=layout,
        rounds=tuple(rounds),
        output_register=base.output_register,
        holders=holders,
        coin_model=CoinModel(),
        output_stage=out_stage,
        memoryless=True,
        input_sizes=base.input_sizes,
        name=f"oneshot({base.name})" if base.name else "oneshot",
    )
    return OneShotCompiled(base, spec, CompensationPlan(tuple(comps)), coin_regs)


def _restrict(op: np.ndarray, dims, idx, rest) -> np.ndarray:
    """Extract A from op = A (x) I_rest (up to register permutation)."""
    n = len(dims)
    order = idx + rest
    d_in = int(np.prod([dims[j] for j in idx]))
    d_rest = int(np.prod([dims[j] for j in rest])) if rest else 1
    t = op.reshape(dims + dims).transpose(order + [n + j for j in order]).reshape(d_in, d_rest, d_in, d_rest)
    return t[:, 0, :, 0].copy()


@dataclass(frozen=True)
class OneShotReport:
    certificates: tuple[Certificate, ...]
    x: tuple[float, ...]
    compiled_terms: tuple[float, ...]
    cic_base: float
    cic_compiled: float
    cic0_compiled: float

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.certificates)

    def to_csv(self, comments=()) -> str:
        return certificates_csv(self.certificates, comments)


def base_message_terms(base: ProtocolSpec) -> tuple[float, ...]:
    """x_i = I(M_i : sender input | receiver input = 0) with the coins averaged out."""
    t = simulate(base, u0(), max_coin_bits=max(12, base.coin_model.total_bits))
    out = []
    for pl in t.plans:
        own, other = ("x", "y") if pl.sender == ALICE else ("y", "x")
        ens = t.ensemble(pl.index, mask=t.select(**{other: 0}))
        out.append(classical_conditional_mi(ens, pl.sends, [own]))
    return tuple(out)


def verify_oneshot(
    base: ProtocolSpec,
    compiled: OneShotCompiled,
    mu: InputDistribution | None = None,
    *,
    tol: float = 1e-9,
    tv_tol: float = 1e-9,
    uhlmann_tol: float = 1e-8,
) -> OneShotReport:
    """Output preservation, per-round h2 bounds and the entropy-lemma bound."""
    mu = mu or u0()
    bt = simulate(base, mu, max_coin_bits=max(12, base.coin_model.total_bits))
    ct = simulate(compiled.spec, mu)
    certs = []
    tv = 0.0
    for x in (0, 1):
        for y in (0, 1):
            tv = max(tv, 0.5 * float(np.abs(bt.output_distribution(x, y) - ct.output_distribution(x, y)).sum()))
    certs.append(Certificate("output_tv", tv, tv_tol, tv <= tv_tol))
    for rc in compiled.plan.rounds:
        if rc.act_on:
            gap = abs(rc.overlap - rc.fidelity)
            certs.append(Certificate(f"uhlmann_round_{rc.round}", gap, uhlmann_tol, gap <= uhlmann_tol))

    applicable = mu.is_close(u0())
    xs = base_message_terms(base)
    comp_terms = tuple(t.bits for t in cic0_terms(compiled.spec))
    h = [float(binary_entropy(min(1.0, max(0.0, xi / 2)))) for xi in xs]
    for i, (ai, hi) in enumerate(zip(comp_terms, h), start=1):
        ok = (ai <= hi + tol) if applicable else NOT_APPLICABLE
        certs.append(Certificate(f"h2_round_{i}", ai, hi, ok))
    c0 = float(sum(comp_terms))
    c = cic_ledger(compiled.spec, u0(), with_qil=False).cic
    cb = cic_ledger(base, u0(), with_qil=False).cic
    sum_h = float(sum(h))
    halves = [xi / 2 for xi in xs]
    _, rhs = entropy_lemma_sides(halves)
    if applicable:
        certs.append(Certificate("cic0_vs_sum_h2", c0, sum_h, c0 <= sum_h + tol))
        certs.append(Certificate("cic_vs_sum_h2", c, sum_h, c <= sum_h + tol))
        certs.append(Certificate("sum_h2_vs_entropy_lemma", sum_h, rhs, check_entropy_lemma(halves, tol)))
        certs.append(Certificate("cic_vs_entropy_lemma", c, rhs, c <= rhs + tol))
    else:
        for name, m, b in (("cic0_vs_sum_h2", c0, sum_h), ("cic_vs_sum_h2", c, sum_h), ("sum_h2_vs_entropy_lemma", sum_h, rhs), ("cic_vs_entropy_lemma", c, rhs)):
            certs.append(Certificate(name, m, b, NOT_APPLICABLE))
    return OneShotReport(tuple(certs), xs, comp_terms, cb, c, c0)
