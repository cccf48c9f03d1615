import itertools

import numpy as np
import pytest

from mlqcc.and_protocol import build_and_protocol
from mlqcc.cic import cic
from mlqcc.compilers import (
    QotpKey,
    block_operator,
    compile_oneshot,
    compile_private,
    qotp_apply,
    qotp_operator,
    twirl_average,
    verify_oneshot,
    verify_private,
)
from mlqcc.compilers.qotp import qubit_width
from mlqcc.corpus import (
    alice_sends_x,
    constant_output,
    oneshot_corpus,
    random_density,
    random_oneshot_protocol,
    send_x_and,
    spawn,
)
from mlqcc.errors import DimensionMismatch, KeyLengthMismatch, NotOneShot, PreconditionError, StateBlowup
from mlqcc.protocol import CoinModel, CoinSegment, CoinMode, InputDistribution, ProtocolSpec, Round, simulate, u0, validate
from mlqcc.qim import PureState, RegisterLayout

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class TestQotp:
    def test_key_bits_msb_first(self):
        assert QotpKey.from_int(0b1001, 4).bits == (1, 0, 0, 1)

    def test_single_qubit_paulis(self):
        assert np.allclose(qotp_operator(QotpKey((1, 0))), [[0, 1], [1, 0]])
        assert np.allclose(qotp_operator(QotpKey((0, 1))), np.diag([1, -1]))

    def test_every_key_is_unitary_and_inverse_undoes_it(self):
        lay = RegisterLayout([("A", 2), ("B", 4)])
        for v in range(2**6):
            key = QotpKey.from_int(v, 6)
            op = block_operator(lay, ["A", "B"], key)
            inv = block_operator(lay, ["A", "B"], key, inverse=True)
            assert np.allclose(inv @ op, np.eye(8))

    def test_key_length_mismatch(self):
        lay = RegisterLayout([("A", 2)])
        with pytest.raises(KeyLengthMismatch):
            block_operator(lay, ["A"], QotpKey((0, 1, 0, 1)))

    def test_width_requires_qubits(self):
        assert qubit_width([2, 4, 8]) == 6
        with pytest.raises(DimensionMismatch):
            qubit_width([3])

    def test_twirl_of_random_state(self, rng):
        for width in (1, 2, 3):
            lay = RegisterLayout([(f"q{j}", 2) for j in range(width)])
            rho = random_density(rng, lay).matrix
            assert np.allclose(twirl_average(rho), np.eye(2**width) / 2**width, atol=1e-12)

    def test_apply_to_pure_state(self):
        lay = RegisterLayout([("A", 2)])
        psi = qotp_apply(PureState.basis(lay), QotpKey((1, 1)), ["A"])
        assert np.allclose(np.abs(psi.amplitudes), [0, 1])


def hadamard_output() -> ProtocolSpec:
    """Alice applies H when x = 1, so the output register is not diagonal."""
    return ProtocolSpec(RegisterLayout([("M", 2)]), (Round("alice", {0: np.eye(2), 1: H}),), "M", name="hadamard")


@pytest.fixture(scope="module")
def compiled():
    return compile_private(send_x_and())


class TestPrivate:
    def test_key_lengths(self, compiled):
        assert compiled.t_bits == (2,)
        assert compiled.s_b_bits == 4
        assert compiled.s_a_bits == 2
        assert compiled.total_key_bits == 10
        assert compiled.k == 1
        assert len(compiled.spec.rounds) == 3

    def test_compiled_spec_is_valid(self, compiled):
        assert validate(compiled.spec) == []
        assert compiled.spec.coin_model.mode == CoinMode.PRIVATE

    @pytest.mark.parametrize("mu", [u0(), InputDistribution.uniform()], ids=["u0", "uniform"])
    def test_verify(self, compiled, mu):
        rep = verify_private(compiled, mu)
        assert rep.passed
        assert rep.total_cic == pytest.approx(rep.output_information, abs=1e-9)

    def test_matched_branch_output_equals_base(self, compiled):
        # Mismatched keys are the restart branch; only tA1 == tB1 runs to completion.
        t = simulate(compiled.spec, InputDistribution.uniform(), max_coin_bits=compiled.total_key_bits)
        base = simulate(send_x_and(), InputDistribution.uniform())
        matched = t.labels[:, t.coords.index("tA1")] == t.labels[:, t.coords.index("tB1")]
        for x, y in itertools.product((0, 1), repeat=2):
            sel = t.select(x, y) & matched
            w = t.coin_probs[sel] / t.coin_probs[sel].sum()
            got = w @ t.output_probs[sel]
            assert np.allclose(got, base.output_distribution(x, y), atol=1e-12)

    def test_alice_sends_x_reveals_x(self):
        rep = verify_private(compile_private(alice_sends_x()), InputDistribution.uniform())
        assert rep.passed
        assert rep.total_cic == pytest.approx(1.0, abs=1e-9)

    def test_non_diagonal_output_is_copied(self):
        c = compile_private(hadamard_output())
        assert c.preprocessed
        assert "M_copy" in c.spec.registers
        assert verify_private(c, InputDistribution.uniform()).passed

    def test_rejects_coins(self):
        with pytest.raises(PreconditionError):
            compile_private(random_oneshot_protocol(spawn(2, 1)[0], 3))

    def test_key_budget(self):
        with pytest.raises(StateBlowup) as exc:
            compile_private(build_and_protocol(1))
        assert exc.value.measured == 14

    def test_csv_header(self, compiled):
        lines = verify_private(compiled, u0()).to_csv(["seed=1"]).splitlines()
        assert lines[:2] == ["# seed=1", "certificate,measured,bound,pass"]


class TestOneShot:
    def test_coin_registers_replace_classical_coins(self):
        base = random_oneshot_protocol(spawn(8, 1)[0], 3)
        c = compile_oneshot(base)
        assert c.spec.coin_model.total_bits == 0
        assert set(c.coin_registers.values()) == {"coin_r1", "coin_r2", "coin_r3"}
        assert validate(c.spec) == []

    def test_output_preserved(self):
        base = random_oneshot_protocol(spawn(9, 1)[0], 5)
        c = compile_oneshot(base)
        bt, ct = simulate(base), simulate(c.spec)
        for x, y in itertools.product((0, 1), repeat=2):
            assert np.allclose(bt.output_distribution(x, y), ct.output_distribution(x, y), atol=1e-9)

    def test_uhlmann_overlaps_match_fidelity(self):
        c = compile_oneshot(random_oneshot_protocol(spawn(10, 1)[0], 3))
        for rc in c.plan.rounds:
            assert rc.overlap == pytest.approx(rc.fidelity, abs=1e-8)

    def test_small_corpus_certifies(self):
        for base in oneshot_corpus(99, 10):
            assert verify_oneshot(base, compile_oneshot(base)).passed

    def test_coin_free_protocol_unchanged_cost(self):
        base = build_and_protocol(1)
        c = compile_oneshot(base)
        assert cic(c.spec, u0(), with_qil=False).cic == pytest.approx(cic(base, u0(), with_qil=False).cic, abs=1e-9)

    def test_bounds_not_applicable_off_u0(self):
        base = random_oneshot_protocol(spawn(11, 1)[0], 3)
        rep = verify_oneshot(base, compile_oneshot(base), InputDistribution.uniform())
        names = {c.name: c for c in rep.certificates}
        assert names["output_tv"].passed
        assert not isinstance(names["cic_vs_entropy_lemma"].passed, bool)

    def test_reused_coin_rejected(self):
        coins = CoinModel(CoinMode.ONESHOT, (CoinSegment("r1", "alice", 1),))
        fam = {(v, c): np.eye(2) for v in (0, 1) for c in (0, 1)}
        rounds = (
            Round("alice", fam, reads=("r1",)),
            Round("bob", {0: np.eye(2), 1: np.eye(2)}),
            Round("alice", fam, reads=("r1",)),
        )
        p = ProtocolSpec(RegisterLayout([("M", 2)]), rounds, "M", coin_model=coins)
        with pytest.raises(NotOneShot):
            compile_oneshot(p)
