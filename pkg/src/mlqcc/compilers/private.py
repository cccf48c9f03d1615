"""Privacy compiler: run the base protocol under one-time-pad encryption.

Every round decrypts the previous block with the sender's guess of the
other party's key, applies the base unitary and re-encrypts with a fresh key.
Bob then encrypts everything with s_B and hands it to Alice; after the key
check Alice encrypts everything except the output qubit with s_A and returns
it, and Bob strips his own pad from the output qubit.

The compiled object is an ordinary private-coin protocol that executes the
matched-keys branch of the key check unconditionally. Mismatched keys lead to
a restart in the construction; that branch only exchanges classical bits
independent of the other party's input, so it is accounted for analytically
rather than executed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mlqcc.cic import RoundTerm, output_information, round_term
from mlqcc.compilers.qotp import QotpKey, block_operator, qubit_width
from mlqcc.errors import DimensionMismatch, InvalidProtocol, PreconditionError, StateBlowup, UnsupportedOutput
from mlqcc.protocol import (
    ALICE,
    BOB,
    CoinMode,
    CoinModel,
    CoinSegment,
    InputDistribution,
    OutputStage,
    ProtocolSpec,
    Round,
    _walk,
    simulate,
    validate,
)
from mlqcc.qim import RegisterLayout, classical_conditional_mi
from mlqcc.qim.linalg import embed_operator, partial_trace_matrix
from mlqcc.reports import Certificate, certificates_csv

WIDTH_CAP = 5
MAX_KEY_BITS = 12
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class PrivateCompiled:
    """Compiled protocol plus the bookkeeping of the construction.

    Attributes:
        base: base protocol after optional output-copy preprocessing.
        original: protocol as given.
        blocks: registers encrypted by round-j keys, j = 1..k.
        t_bits: length of t_A^j and t_B^j.
        s_b_bits, s_a_bits: lengths of Bob's and Alice's final pads.
        spec: the compiled private-coin protocol (k + 2 rounds).
        preprocessed: whether an output copy register was added.
        restart: how mismatched keys are handled.
    """

    base: ProtocolSpec
    original: ProtocolSpec
    blocks: tuple[tuple[str, ...], ...]
    t_bits: tuple[int, ...]
    s_b_bits: int
    s_a_bits: int
    spec: ProtocolSpec
    preprocessed: bool
    restart: str = "analyzed"

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def total_key_bits(self) -> int:
        return self.spec.coin_model.total_bits

    def t_name(self, party: str, j: int) -> str:
        return f"t{'A' if party == ALICE else 'B'}{j}"


def _bits_of(value: int, nbits: int) -> QotpKey:
    return QotpKey.from_int(value, nbits)


def _output_is_diagonal(p: ProtocolSpec, tol: float = 1e-12) -> bool:
    t = simulate(p)
    layout = p.registers
    oi = layout.index(p.output_register)
    for psi in t.final:
        m = partial_trace_matrix(np.outer(psi, psi.conj()), layout.dims, [oi])
        if np.max(np.abs(m - np.diag(np.diag(m)))) > tol:
            return False
    return True


def _with_output_copy(p: ProtocolSpec) -> ProtocolSpec:
    """Append a CNOT from the output qubit into a fresh Bob register that stays behind."""
    copy = f"{p.output_register}_copy"
    layout = p.registers.concat(RegisterLayout([(copy, 2)]))
    _, out_acts, _ = _walk(p)
    base_acts = p.registers.sub(tuple(out_acts) + (p.output_register,)).names
    acts = base_acts + (copy,)
    sub = layout.sub(acts)
    cnot = embed_operator(CNOT, sub.dims, [sub.index(p.output_register), sub.index(copy)])
    old_sub = p.registers.sub(base_acts)
    if p.output_stage is not None:
        old = {key: embed_operator(u, old_sub.dims, [old_sub.index(n) for n in out_acts]) for key, u in p.output_stage.unitaries.items()}
    else:
        old = {(y, 0): np.eye(old_sub.dim) for y in range(p.input_sizes[1])}
    fam = {}
    for key, u in old.items():
        fam[key] = cnot @ np.kron(u, np.eye(2))
    holders = dict(p.holders)
    holders[copy] = BOB
    return ProtocolSpec(
        registers=layout,
        rounds=p.rounds,
        output_register=p.output_register,
        holders=holders,
        output_stage=OutputStage(fam, acts_on=acts, reads=p.output_stage.reads if p.output_stage else ()),
        memoryless=False,
        input_sizes=p.input_sizes,
        name=p.name,
    )


def compile_private(
    base: ProtocolSpec,
    *,
    width_cap: int = WIDTH_CAP,
    max_key_bits: int = MAX_KEY_BITS,
) -> PrivateCompiled:
    """Build the encrypted protocol for a coin-free base whose output is one qubit."""
    violations = validate(base)
    if violations:
        raise InvalidProtocol(violations)
    if base.coin_model.total_bits:
        raise PreconditionError("the privacy compiler takes a coin-free base protocol")
    if base.k % 2 == 0:
        raise PreconditionError(f"the base must end with an Alice round (odd k), got k={base.k}")
    if base.registers.dim_of([base.output_register]) != 2:
        raise UnsupportedOutput(f"output register {base.output_register!r} is not a single qubit")
    if base.output_stage is not None and base.output_stage.reads:
        raise PreconditionError("the base output stage may not read coins")
    try:
        qubit_width(base.registers.dims)
    except DimensionMismatch as exc:
        raise UnsupportedOutput(f"registers must be qubit blocks: {exc}") from None

    original = base
    preprocessed = False
    if not _output_is_diagonal(base):
        base = _with_output_copy(base)
        preprocessed = True
    layout = base.registers
    everything = layout.names
    width = qubit_width(layout.dims)
    if width > width_cap:
        raise StateBlowup(width, width_cap, what="block width (qubits)")

    k = base.k
    plans, out_acts, _ = _walk(base)
    alice0 = tuple(n for n in everything if base.holders[n] == ALICE)
    blocks = (alice0,) + (everything,) * (k - 1)
    t_bits = tuple(2 * qubit_width([layout.dim_of([n]) for n in b]) for b in blocks)
    s_b_bits = 2 * width
    s_a_bits = 2 * (width - 1)
    total = 2 * sum(t_bits) + s_b_bits + s_a_bits
    if total > max_key_bits:
        raise StateBlowup(total, max_key_bits, what="key bits")

    def tn(party, j):
        return f"t{'A' if party == ALICE else 'B'}{j}"

    segs = []
    for j, b in enumerate(t_bits, start=1):
        segs.append(CoinSegment(tn(ALICE, j), ALICE, b))
        segs.append(CoinSegment(tn(BOB, j), BOB, b))
    segs.append(CoinSegment("sB", BOB, s_b_bits))
    segs.append(CoinSegment("sA", ALICE, s_a_bits))

    def lifted(sub: RegisterLayout, u: np.ndarray, targets) -> np.ndarray:
        return embed_operator(u, sub.dims, [sub.index(n) for n in targets])

    rounds = []
    for j, (rnd, pl) in enumerate(zip(base.rounds, plans), start=1):
        acts = blocks[j - 1] if j == 1 else everything
        sub = layout.sub(acts)
        reads = ((tn(pl.sender, j - 1),) if j > 1 else ()) + (tn(pl.sender, j),)
        prev_bits = t_bits[j - 2] if j > 1 else 0
        fam = {}
        for v in range(base.input_size(pl.sender)):
            core = lifted(sub, rnd.unitary(v), pl.acts_on) if pl.acts_on else np.eye(sub.dim)
            for c in range(2 ** (prev_bits + t_bits[j - 1])):
                prev, fresh = c >> t_bits[j - 1], c & (2 ** t_bits[j - 1] - 1)
                dec = block_operator(sub, blocks[j - 2], _bits_of(prev, prev_bits), inverse=True) if j > 1 else np.eye(sub.dim)
                enc = block_operator(sub, blocks[j - 1], _bits_of(fresh, t_bits[j - 1]))
                fam[(v, c)] = enc @ core @ dec
        rounds.append(Round(pl.sender, fam, acts_on=acts, sends=acts, reads=reads))

    # round k+1: Bob undoes t_B^k, runs the output unitary, pads everything with s_B
    fam = {}
    for y in range(base.input_sizes[1]):
        if base.output_stage is not None:
            core = lifted(layout, base.output_stage.unitaries[(y, 0)], out_acts)
        else:
            core = np.eye(layout.dim)
        for c in range(2 ** (t_bits[-1] + s_b_bits)):
            prev, fresh = c >> s_b_bits, c & (2 ** s_b_bits - 1)
            dec = block_operator(layout, blocks[-1], _bits_of(prev, t_bits[-1]), inverse=True)
            enc = block_operator(layout, everything, _bits_of(fresh, s_b_bits))
            fam[(y, c)] = enc @ core @ dec
    rounds.append(Round(BOB, fam, reads=(tn(BOB, k), "sB")))

    # round k+2 (matched keys): Alice pads everything but the output qubit with s_A
    rest = tuple(n for n in everything if n != base.output_register)
    fam = {}
    for c in range(2 ** s_a_bits):
        enc = block_operator(layout, rest, _bits_of(c, s_a_bits))
        for x in range(base.input_sizes[0]):
            fam[(x, c)] = enc
    rounds.append(Round(ALICE, fam, reads=("sA",)))

    # output: Bob removes the s_B pad from the output qubit
    q = qubit_width([layout.dim_of([n]) for n in everything[: layout.index(base.output_register)]])
    fam = {}
    for y in range(base.input_sizes[1]):
        for c in range(2 ** s_b_bits):
            bits = _bits_of(c, s_b_bits).bits
            fam[(y, c)] = block_operator(RegisterLayout([("o", 2)]), ["o"], QotpKey(bits[2 * q: 2 * q + 2]), inverse=True)
    out_stage = OutputStage(fam, acts_on=(base.output_register,), reads=("sB",))

    spec = ProtocolSpec(
        registers=layout,
        rounds=tuple(rounds),
        output_register=base.output_register,
        holders=base.holders,
        coin_model=CoinModel(CoinMode.PRIVATE, tuple(segs)),
        output_stage=out_stage,
        memoryless=True,
        input_sizes=base.input_sizes,
        name=f"private({base.name})" if base.name else "private",
    )
    return PrivateCompiled(base, original, blocks, t_bits, s_b_bits, s_a_bits, spec, preprocessed)


@dataclass(frozen=True)
class PrivateReport:
    certificates: tuple[Certificate, ...]
    terms: tuple[RoundTerm, ...]
    total_cic: float
    output_information: float

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.certificates)

    def to_csv(self, comments=()) -> str:
        return certificates_csv(self.certificates, comments)


def _fresh_average(t, i: int, fresh: str, keep: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """Average over the ``fresh`` coin of the round-i states reduced to ``keep``.

    Returns (group ids, stacked averaged density matrices per group).
    """
    layout = t.layout
    cols = [j for j, c in enumerate(t.coords) if c != fresh]
    _, gid = np.unique(t.labels[:, cols], axis=0, return_inverse=True)
    gid = gid.reshape(-1)
    dims = list(layout.dims)
    n = len(dims)
    order = keep + [j for j in range(n) if j not in keep]
    dk = int(np.prod([dims[j] for j in keep]))
    psi = t.states[i].reshape([-1] + dims).transpose([0] + [j + 1 for j in order]).reshape(len(gid), dk, -1)
    rho = np.einsum("lij,lkj->lik", psi, psi.conj())
    w = t.spec.coin_model.segment(fresh).distribution()[t.labels[:, t.coords.index(fresh)]]
    acc = np.zeros((gid.max() + 1, dk, dk), dtype=np.complex128)
    np.add.at(acc, gid, rho * w[:, None, None])
    return gid, acc


def verify_private(
    c: PrivateCompiled,
    mu: InputDistribution | None = None,
    *,
    tol: float = 1e-9,
    output_tol: float = 1e-12,
    cap_qubits: int = WIDTH_CAP,
) -> PrivateReport:
    """Certify privacy of every round and exactness of the matched branch."""
    layout = c.spec.registers
    width = qubit_width(layout.dims)
    if width > cap_qubits:
        raise StateBlowup(width, cap_qubits, what="block width (qubits)")
    t = simulate(c.spec, mu, max_coin_bits=c.total_key_bits)
    mu = t.mu
    k = c.k
    certs: list[Certificate] = []
    terms: list[RoundTerm] = []

    for i in range(1, k + 2):
        pl = t.plans[i - 1]
        fresh = c.t_name(pl.sender, i) if i <= k else "sB"
        keep = layout.indices(pl.sends)
        _, avg = _fresh_average(t, i, fresh, keep)
        d = avg.shape[1]
        dev = float(np.max(np.abs(avg - np.eye(d) / d)))
        certs.append(Certificate(f"twirl_round_{i}", dev, tol, dev <= tol))
        term = round_term(t, i)
        terms.append(RoundTerm(i, pl.sender, term))
        certs.append(Certificate(f"term_round_{i}", term, tol, term <= tol))

    # round k+2: averaged over s_A the state is maximally mixed apart from the output qubit
    ti = k + 2
    keep = list(range(len(layout)))
    _, avg = _fresh_average(t, ti, "sA", keep)
    oi = layout.index(c.spec.output_register)
    d_rest = layout.dim // 2
    dev = 0.0
    for m in avg:
        ro = partial_trace_matrix(m, layout.dims, [oi])
        target = embed_operator(ro, layout.dims, [oi]) / d_rest
        dev = max(dev, float(np.max(np.abs(m - target))))
    certs.append(Certificate(f"product_form_round_{ti}", dev, tol, dev <= tol))

    t_a = [c.t_name(ALICE, j) for j in range(1, k + 1)]
    t_b = [c.t_name(BOB, j) for j in range(1, k + 1)]
    ta_cols = [t.coords.index(n) for n in t_a]
    tb_cols = [t.coords.index(n) for n in t_b]
    matched = np.all(t.labels[:, ta_cols] == t.labels[:, tb_cols], axis=1)

    ens = t.ensemble(k + 1)
    tb_term = classical_conditional_mi(ens, t_b, ["y"], cond=["x"] + t_a + ["sA"], quantum_cond=layout.names)
    certs.append(Certificate("term_tB_to_alice", tb_term, tol, tb_term <= tol))
    full_match = matched[t.probs > 0].astype(np.int64)
    ens_m = ens.with_coordinate("match", full_match)
    match_term = classical_conditional_mi(ens_m, ["match"], ["x"], cond=["y"] + t_b + ["sB"])
    certs.append(Certificate("term_match_to_bob", match_term, tol, match_term <= tol))

    out_term = round_term(t, ti, mask=matched)
    terms.append(RoundTerm(ti, ALICE, out_term))
    total = float(sum(x.bits for x in terms) + tb_term + match_term)

    base_t = simulate(c.original, mu)
    diff = 0.0
    nx, ny = c.spec.input_sizes
    for x in range(nx):
        for y in range(ny):
            sel = t.select(x, y) & matched
            w = t.coin_probs[sel]
            got = (w[:, None] * t.output_probs[sel]).sum(axis=0) / w.sum()
            diff = max(diff, float(np.max(np.abs(got - base_t.output_distribution(x, y)))))
    certs.append(Certificate("matched_output_max_abs_diff", diff, output_tol, diff <= output_tol))

    info = output_information(base_t, mu)
    certs.append(Certificate("total_cic_minus_output_information", abs(total - info), tol, abs(total - info) <= tol))
    certs.append(Certificate("total_cic", total, info, abs(total - info) <= tol))
    return PrivateReport(tuple(certs), tuple(terms), total, info)
