"""Two-party round-based quantum protocols with classical inputs and coins.

A protocol is a list of rounds. In round i the sender (Alice on odd rounds,
Bob on even rounds) applies a unitary chosen by its classical input and the
coin segments it reads, then hands some registers to the other party. The
simulator evolves |0...0> once per classical label (x, y, coin values),
enumerating coins exhaustively.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from mlqcc.errors import InvalidProtocol, StateBlowup
from mlqcc.qim import CqEnsemble, PureState, RegisterLayout
from mlqcc.qim.linalg import embed_operator, is_unitary

ALICE = "alice"
BOB = "bob"
PARTIES = (ALICE, BOB)
DEFAULT_CAP = 256
MAX_COIN_BITS = 12


def other_party(party: str) -> str:
    return BOB if party == ALICE else ALICE


def expected_sender(i: int) -> str:
    """Sender of (1-based) round i."""
    return ALICE if i % 2 == 1 else BOB


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """Joint distribution mu(x, y) over finite input alphabets."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2:
            raise ValueError("input distribution must be a 2-D table mu[x, y]")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"input distribution must be non-negative and sum to 1 (sum={p.sum()!r})")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, nx: int = 2, ny: int = 2) -> "InputDistribution":
        return cls(np.full((nx, ny), 1.0 / (nx * ny)))

    @property
    def nx(self) -> int:
        return self.probs.shape[0]

    @property
    def ny(self) -> int:
        return self.probs.shape[1]

    def __call__(self, x: int, y: int) -> float:
        return float(self.probs[x, y])

    def marginal_x(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def marginal_y(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def is_close(self, other: "InputDistribution", atol: float = 1e-12) -> bool:
        return self.probs.shape == other.probs.shape and bool(np.allclose(self.probs, other.probs, atol=atol, rtol=0))


def u0() -> InputDistribution:
    """Uniform distribution on {(0,0), (0,1), (1,0)}."""
    return InputDistribution(np.array([[1.0, 1.0], [1.0, 0.0]]) / 3.0)


class CoinMode(str, enum.Enum):
    NONE = "none"
    PRIVATE = "private"
    ONESHOT = "oneshot"


@dataclass(frozen=True)
class CoinSegment:
    """A block of private coin bits owned by one party."""

    name: str
    owner: str
    bits: int
    probs: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.owner not in PARTIES:
            raise ValueError(f"coin segment {self.name!r} has unknown owner {self.owner!r}")
        if self.bits < 0:
            raise ValueError(f"coin segment {self.name!r} has negative length")
        if self.probs is not None:
            p = tuple(float(v) for v in self.probs)
            if len(p) != 2 ** self.bits or min(p) < 0 or abs(sum(p) - 1.0) > 1e-12:
                raise ValueError(f"coin segment {self.name!r}: probs must be a distribution over {2 ** self.bits} values")
            object.__setattr__(self, "probs", p)

    @property
    def size(self) -> int:
        return 2 ** self.bits

    def distribution(self) -> np.ndarray:
        if self.probs is None:
            return np.full(self.size, 1.0 / self.size)
        return np.array(self.probs)


@dataclass(frozen=True)
class CoinModel:
    mode: CoinMode = CoinMode.NONE
    segments: tuple[CoinSegment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mode", CoinMode(self.mode))
        object.__setattr__(self, "segments", tuple(self.segments))
        names = [s.name for s in self.segments]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coin segment names {names}")
        if self.mode is CoinMode.NONE and self.total_bits:
            raise ValueError("coin mode 'none' cannot carry coin bits")

    @classmethod
    def one_shot(cls, bits_per_round: Sequence[int]) -> "CoinModel":
        """One segment ``r<i>`` per round, owned by that round's sender."""
        segs = tuple(CoinSegment(f"r{i}", expected_sender(i), b) for i, b in enumerate(bits_per_round, start=1))
        return cls(CoinMode.ONESHOT, segs)

    @property
    def total_bits(self) -> int:
        return sum(s.bits for s in self.segments)

    def segment(self, name: str) -> CoinSegment:
        for s in self.segments:
            if s.name == name:
                return s
        raise KeyError(name)

    def owned_by(self, party: str) -> tuple[CoinSegment, ...]:
        return tuple(s for s in self.segments if s.owner == party)


def _normalize_family(unitaries: Mapping) -> dict[tuple[int, int], np.ndarray]:
    fam = {}
    for key, mat in unitaries.items():
        if isinstance(key, (int, np.integer)):
            key = (int(key), 0)
        else:
            key = tuple(int(k) for k in key)
            if len(key) == 1:
                key = (key[0], 0)
        m = np.array(mat, dtype=np.complex128)
        m.setflags(write=False)
        fam[key] = m
    return fam


@dataclass(frozen=True, eq=False)
class Round:
    """One communication round.

    ``unitaries`` maps (sender input value, coin value) to a matrix acting on
    ``acts_on``. The coin value concatenates the read segments, first segment
    most significant. ``acts_on``/``sends`` default to everything the sender
    holds.
    """

    sender: str
    unitaries: Mapping[tuple[int, int], np.ndarray]
    acts_on: tuple[str, ...] | None = None
    sends: tuple[str, ...] | None = None
    reads: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "unitaries", _normalize_family(self.unitaries))
        for attr in ("acts_on", "sends"):
            v = getattr(self, attr)
            if v is not None:
                object.__setattr__(self, attr, tuple(v))
        object.__setattr__(self, "reads", tuple(self.reads))

    def unitary(self, value: int, coin: int = 0) -> np.ndarray:
        return self.unitaries[(value, coin)]


@dataclass(frozen=True, eq=False)
class OutputStage:
    """Bob's final unitary U_{k+1}, keyed by (y, coin value), before measuring."""

    unitaries: Mapping[tuple[int, int], np.ndarray]
    acts_on: tuple[str, ...] | None = None
    reads: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "unitaries", _normalize_family(self.unitaries))
        if self.acts_on is not None:
            object.__setattr__(self, "acts_on", tuple(self.acts_on))
        object.__setattr__(self, "reads", tuple(self.reads))


@dataclass(frozen=True, eq=False)
class ProtocolSpec:
    registers: RegisterLayout
    rounds: tuple[Round, ...]
    output_register: str
    holders: Mapping[str, str] | None = None
    coin_model: CoinModel = field(default_factory=CoinModel)
    output_stage: OutputStage | None = None
    memoryless: bool = True
    input_sizes: tuple[int, int] = (2, 2)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))
        holders = {n: ALICE for n in self.registers.names}
        holders.update(dict(self.holders or {}))
        object.__setattr__(self, "holders", holders)
        object.__setattr__(self, "input_sizes", tuple(int(v) for v in self.input_sizes))

    @property
    def k(self) -> int:
        return len(self.rounds)

    def input_size(self, party: str) -> int:
        return self.input_sizes[0] if party == ALICE else self.input_sizes[1]

    @property
    def binary_inputs(self) -> bool:
        return self.input_sizes == (2, 2)


class Violation(NamedTuple):
    kind: str
    round: int | None
    detail: str = ""

    def __str__(self) -> str:
        where = "" if self.round is None else str(self.round)
        return f"{self.kind}({where})" + (f": {self.detail}" if self.detail else "")


class RoundPlan(NamedTuple):
    index: int
    sender: str
    receiver: str
    acts_on: tuple[str, ...]
    sends: tuple[str, ...]
    receiver_private: tuple[str, ...]
    sender_kept: tuple[str, ...]


def _ordered(layout: RegisterLayout, names: Iterable[str]) -> tuple[str, ...]:
    s = set(names)
    return tuple(n for n in layout.names if n in s)


def _read_bits(p: ProtocolSpec, reads: Sequence[str]) -> int:
    return sum(p.coin_model.segment(r).bits for r in reads)


def _check_family(p, fam, n_inputs, reads, dim, where, out: list[Violation]):
    try:
        ncoins = 2 ** _read_bits(p, reads)
    except KeyError:
        return
    for v in range(n_inputs):
        for c in range(ncoins):
            m = fam.get((v, c))
            if m is None:
                out.append(Violation("MissingUnitary", where, f"no unitary for input {v}, coin {c}"))
                continue
            if m.shape != (dim, dim):
                out.append(Violation("DimensionMismatch", where, f"unitary ({v},{c}) has shape {m.shape}, expected {(dim, dim)}"))
            elif not np.all(np.isfinite(m)) or not is_unitary(m, atol=1e-9):
                out.append(Violation("NonUnitary", where, f"unitary ({v},{c}) is not unitary"))
    extra = [key for key in fam if not (0 <= key[0] < n_inputs and 0 <= key[1] < ncoins)]
    for key in extra:
        out.append(Violation("UnexpectedUnitary", where, f"key {key} outside the input/coin range"))


def _walk(p: ProtocolSpec) -> tuple[list[RoundPlan], tuple[str, ...], list[Violation]]:
    """Resolve register movement round by round, collecting violations."""
    out: list[Violation] = []
    layout = p.registers
    holders = dict(p.holders)
    for name, party in holders.items():
        if name not in layout:
            out.append(Violation("UnknownRegister", None, f"holder given for unknown register {name!r}"))
        if party not in PARTIES:
            out.append(Violation("UnknownParty", None, f"register {name!r} held by {party!r}"))
    touched: set[str] = set()
    plans: list[RoundPlan] = []
    seg_names = {s.name: s for s in p.coin_model.segments}
    reads_count: dict[str, int] = {}

    def check_reads(reads, party, where):
        for r in reads:
            seg = seg_names.get(r)
            if seg is None:
                out.append(Violation("UnknownSegment", where, f"reads unknown coin segment {r!r}"))
                continue
            if seg.owner != party:
                out.append(Violation("ForeignCoin", where, f"{party} reads {seg.owner}'s segment {r!r}"))
            reads_count[r] = reads_count.get(r, 0) + 1
            if p.coin_model.mode is CoinMode.ONESHOT and reads_count[r] > 1:
                out.append(Violation("NotOneShot", where, f"segment {r!r} read more than once"))
        if reads and p.coin_model.mode is CoinMode.NONE:
            out.append(Violation("CoinModeMismatch", where, "reads coins under coin mode 'none'"))

    for i, rnd in enumerate(p.rounds, start=1):
        sender = rnd.sender
        if sender not in PARTIES:
            out.append(Violation("UnknownParty", i, f"sender {sender!r}"))
            sender = expected_sender(i)
        if sender != expected_sender(i):
            out.append(Violation("AlternationBroken", i, f"expected {expected_sender(i)} to send"))
        receiver = other_party(sender)
        held = {n for n, h in holders.items() if h == sender and n in layout}
        unknown = [n for n in (rnd.acts_on or ()) + (rnd.sends or ()) if n not in layout]
        for n in unknown:
            out.append(Violation("UnknownRegister", i, f"register {n!r}"))
        acts_on = _ordered(layout, held if rnd.acts_on is None else [n for n in rnd.acts_on if n in layout])
        sends = _ordered(layout, held if rnd.sends is None else [n for n in rnd.sends if n in layout])
        not_held = (set(acts_on) | set(sends)) - held
        if not_held:
            out.append(Violation("NotHeld", i, f"{sender} does not hold {sorted(not_held)}"))
        # the family is defined on acts_on in the caller's order; require layout order
        if rnd.acts_on is not None and tuple(rnd.acts_on) != acts_on and not unknown:
            out.append(Violation("RegisterOrder", i, "acts_on must list registers in layout order"))
        check_reads(rnd.reads, sender, i)
        _check_family(p, rnd.unitaries, p.input_size(sender), rnd.reads, layout.dim_of(acts_on) if acts_on else 1, i, out)
        receiver_held = {n for n, h in holders.items() if h == receiver}
        if p.memoryless:
            kept = held - set(sends)
            if kept:
                out.append(Violation("NotMemoryless", i, f"{sender} keeps {sorted(kept)}"))
            dirty = receiver_held & touched
            if dirty:
                out.append(Violation("NotMemoryless", i, f"{receiver} holds used registers {sorted(dirty)}"))
        touched |= set(acts_on)
        for n in sends:
            holders[n] = receiver
        plans.append(
            RoundPlan(
                index=i,
                sender=sender,
                receiver=receiver,
                acts_on=acts_on,
                sends=sends,
                receiver_private=_ordered(layout, {n for n, h in holders.items() if h == receiver} - set(sends)),
                sender_kept=_ordered(layout, {n for n, h in holders.items() if h == sender}),
            )
        )
    bob_final = _ordered(layout, {n for n, h in holders.items() if h == BOB})
    out_acts: tuple[str, ...] = ()
    if p.output_stage is not None:
        st = p.output_stage
        out_acts = bob_final if st.acts_on is None else _ordered(layout, [n for n in st.acts_on if n in layout])
        missing = set(out_acts) - set(bob_final)
        if missing:
            out.append(Violation("NotHeld", p.k + 1, f"output stage acts on {sorted(missing)} not held by bob"))
        check_reads(st.reads, BOB, p.k + 1)
        _check_family(p, st.unitaries, p.input_size(BOB), st.reads, layout.dim_of(out_acts) if out_acts else 1, p.k + 1, out)
    if p.output_register not in layout:
        out.append(Violation("UnknownRegister", None, f"output register {p.output_register!r}"))
    elif p.output_register not in bob_final:
        out.append(Violation("OutputNotHeld", None, f"bob does not hold {p.output_register!r} at the end"))
    return plans, out_acts, out


def plan(p: ProtocolSpec) -> list[RoundPlan]:
    return _walk(p)[0]


def validate(p: ProtocolSpec) -> list[Violation]:
    """Every model violation of ``p``; empty iff the protocol is well formed."""
    return _walk(p)[2]


def qcc(p: ProtocolSpec) -> float:
    """Total qubits communicated: sum over rounds of log2 dim of the sent registers."""
    return float(sum(np.log2(p.registers.dim_of(r.sends)) if r.sends else 0.0 for r in plan(p)))


def _coin_value(labels: np.ndarray, cols: Sequence[int], bits: Sequence[int]) -> np.ndarray:
    val = np.zeros(labels.shape[0], dtype=np.int64)
    for c, b in zip(cols, bits):
        val = (val << b) | labels[:, c]
    return val


@dataclass(frozen=True, eq=False)
class Transcript:
    """Per-label pure states after every round of a simulated protocol.

    ``states[i]`` holds the states just after round i has been sent
    (``states[0]`` is the all-zero start); ``final`` is the state after Bob's
    output stage. Rows of ``labels`` are (x, y, coin segment values...).
    """

    spec: ProtocolSpec
    mu: InputDistribution
    coords: tuple[str, ...]
    labels: np.ndarray
    probs: np.ndarray
    coin_probs: np.ndarray
    states: np.ndarray
    final: np.ndarray
    plans: tuple[RoundPlan, ...]
    output_probs: np.ndarray

    @property
    def layout(self) -> RegisterLayout:
        return self.spec.registers

    @property
    def k(self) -> int:
        return self.spec.k

    def select(self, x: int | None = None, y: int | None = None, **coins: int) -> np.ndarray:
        mask = np.ones(len(self.probs), dtype=bool)
        if x is not None:
            mask &= self.labels[:, 0] == x
        if y is not None:
            mask &= self.labels[:, 1] == y
        for name, v in coins.items():
            mask &= self.labels[:, self.coords.index(name)] == v
        return mask

    def state(self, i: int, x: int, y: int, **coins: int) -> PureState:
        idx = np.flatnonzero(self.select(x, y, **coins))
        if len(idx) != 1:
            raise ValueError(f"label (x={x}, y={y}, {coins}) matches {len(idx)} branches; give every coin value")
        return PureState(self.layout, self.states[i, idx[0]])

    def ensemble(self, i: int | None = None, *, mask=None) -> CqEnsemble:
        """cq-ensemble after round i (``None`` = after the output stage)."""
        states = self.final if i is None else self.states[i]
        sel = self.probs > 0
        if mask is not None:
            sel &= np.asarray(mask, dtype=bool)
        p = self.probs[sel]
        return CqEnsemble(self.coords, self.labels[sel], p / p.sum(), self.layout, states[sel])

    def output_distribution(self, x: int, y: int) -> np.ndarray:
        sel = self.select(x, y)
        w = self.coin_probs[sel]
        return (w[:, None] * self.output_probs[sel]).sum(axis=0) / w.sum()


def simulate(
    p: ProtocolSpec,
    mu: InputDistribution | None = None,
    *,
    cap: int = DEFAULT_CAP,
    max_coin_bits: int = MAX_COIN_BITS,
) -> Transcript:
    violations = validate(p)
    if violations:
        raise InvalidProtocol(violations)
    layout = p.registers
    if layout.dim > cap:
        raise StateBlowup(layout.dim, cap)
    bits = p.coin_model.total_bits
    if bits > max_coin_bits:
        raise StateBlowup(bits, max_coin_bits, what="coin bits")
    nx, ny = p.input_sizes
    mu = mu or InputDistribution.uniform(nx, ny)
    if mu.probs.shape != (nx, ny):
        raise ValueError(f"input distribution shape {mu.probs.shape} does not match alphabets {(nx, ny)}")
    segs = p.coin_model.segments
    coords = ("x", "y") + tuple(s.name for s in segs)
    ranges = [range(nx), range(ny)] + [range(s.size) for s in segs]
    labels = np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, len(coords))
    coin_probs = np.ones(len(labels))
    for j, s in enumerate(segs, start=2):
        coin_probs *= s.distribution()[labels[:, j]]
    probs = mu.probs[labels[:, 0], labels[:, 1]] * coin_probs

    plans, out_acts, _ = _walk(p)
    dims = list(layout.dims)
    n = len(labels)
    cur = np.zeros((n, layout.dim), dtype=np.complex128)
    cur[:, 0] = 1.0
    history = [cur.copy()]

    def apply(fam, party, acts_on, reads, cur):
        col = 0 if party == ALICE else 1
        cols = [coords.index(r) for r in reads]
        rbits = [p.coin_model.segment(r).bits for r in reads]
        ncoins = 2 ** sum(rbits)
        key = labels[:, col] * ncoins + _coin_value(labels, cols, rbits)
        targets = [layout.index(r) for r in acts_on]
        out = np.empty_like(cur)
        for kval in np.unique(key):
            sel = key == kval
            u = fam[(int(kval // ncoins), int(kval % ncoins))]
            full = embed_operator(u, dims, targets)
            out[sel] = cur[sel] @ full.T
        return out

    for rnd, pl in zip(p.rounds, plans):
        cur = apply(rnd.unitaries, pl.sender, pl.acts_on, rnd.reads, cur)
        history.append(cur.copy())
    final = cur
    if p.output_stage is not None:
        final = apply(p.output_stage.unitaries, BOB, out_acts, p.output_stage.reads, cur)
    oi = layout.index(p.output_register)
    amp2 = np.abs(final.reshape([n] + dims)) ** 2
    axes = tuple(1 + j for j in range(len(dims)) if j != oi)
    output_probs = amp2.sum(axis=axes) if axes else amp2
    return Transcript(
        spec=p,
        mu=mu,
        coords=coords,
        labels=labels,
        probs=probs,
        coin_probs=coin_probs,
        states=np.stack(history),
        final=final,
        plans=tuple(plans),
        output_probs=output_probs.reshape(n, -1),
    )


def _transcript(p, mu=None) -> Transcript:
    return p if isinstance(p, Transcript) else simulate(p, mu)


def output_distribution(p: ProtocolSpec | Transcript, x: int, y: int) -> np.ndarray:
    """Born-rule distribution of Bob's output on input (x, y), coins averaged."""
    return _transcript(p).output_distribution(x, y)


def _truth(f) -> Callable[[int, int], int]:
    if callable(f):
        return f
    table = np.asarray(f)
    return lambda x, y: int(table[x, y])


def error_probability(p: ProtocolSpec | Transcript, f, mu: InputDistribution | None = None) -> tuple[float, float]:
    """(distributional error under mu, worst-case error over all inputs)."""
    t = _transcript(p, mu)
    mu = mu or t.mu
    f = _truth(f)
    nx, ny = t.spec.input_sizes
    dist = 0.0
    worst = 0.0
    for x in range(nx):
        for y in range(ny):
            out = t.output_distribution(x, y)
            want = f(x, y)
            err = 1.0 - (out[want] if 0 <= want < len(out) else 0.0)
            err = max(0.0, float(err))
            dist += mu(x, y) * err
            worst = max(worst, err)
    return dist, worst


def same_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    """True when the unit vectors a and b differ by a global phase."""
    return abs(abs(np.vdot(a, b)) - 1.0) <= atol
