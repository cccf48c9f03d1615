import math

import numpy as np
import pytest

from mlqcc.and_protocol import build_and_protocol
from mlqcc.cic import cic, cic0, cic0_terms, output_information, qil, round_terms
from mlqcc.corpus import alice_sends_x, constant_output, input_independent, memoryless_corpus, send_x_and, spawn
from mlqcc.errors import RequiresBinaryInputs
from mlqcc.protocol import InputDistribution, ProtocolSpec, Round, simulate, u0
from mlqcc.qim import RegisterLayout


def h2(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_alice_sends_x_uniform():
    led = cic(alice_sends_x(), InputDistribution.uniform())
    assert led.cic == pytest.approx(1.0, abs=1e-12)
    assert led.qcc == 1


def test_alice_sends_x_under_u0():
    # H(X|Y) under u0: y=0 (prob 2/3) leaves x uniform, y=1 fixes x=0.
    led = cic(alice_sends_x(), u0())
    assert led.cic == pytest.approx(2 / 3, abs=1e-12)
    assert led.cic0 == pytest.approx(1.0, abs=1e-12)


def test_constant_and_input_independent_are_free():
    assert cic(constant_output(3), u0()).cic == pytest.approx(0.0, abs=1e-12)
    led = cic(input_independent(spawn(5, 1)[0]), InputDistribution.uniform())
    assert led.cic == pytest.approx(0.0, abs=1e-12)


def test_and_r1_round_terms_by_hand():
    # Round 1 sends |0> or cos(pi/4)|0> + sin(pi/4)|1>; later rounds carry no new information under u0.
    terms = [t.bits for t in round_terms(simulate(build_and_protocol(1), u0()))]
    first = 2 / 3 * h2(math.sin(math.pi / 8) ** 2)
    assert terms == pytest.approx([first, 0.0, 0.0], abs=1e-12)


def test_cic0_terms_condition_on_receiver_zero():
    terms = cic0_terms(alice_sends_x())
    assert [t.sender for t in terms] == ["alice"]
    assert terms[0].bits == pytest.approx(1.0)


def test_qil_matches_cic_on_memoryless_corpus():
    for p in memoryless_corpus(42, 10):
        for mu in (u0(), InputDistribution.uniform()):
            assert qil(p, mu) == pytest.approx(cic(p, mu, with_qil=False).cic, abs=1e-9)


def test_cic_at_least_output_information():
    for p in memoryless_corpus(43, 10) + [send_x_and()]:
        mu = InputDistribution.uniform()
        assert cic(p, mu, with_qil=False).cic >= output_information(p, mu) - 1e-9


def test_output_information_send_x():
    assert output_information(send_x_and(), InputDistribution.uniform()) == pytest.approx(0.5)
    assert output_information(send_x_and(), u0()) == pytest.approx(0.0, abs=1e-12)


def test_cic0_requires_binary_inputs():
    p = ProtocolSpec(RegisterLayout([("M", 3)]), (Round("alice", {v: np.eye(3) for v in range(3)}),), "M", input_sizes=(3, 2))
    with pytest.raises(RequiresBinaryInputs):
        cic0(p)


def test_ledger_csv_layout():
    text = cic(build_and_protocol(1), u0()).to_csv()
    lines = text.splitlines()
    assert lines[0] == "round,sender,term_bits"
    assert lines[1].startswith("1,alice,")
    assert [ln.split(",")[0] for ln in lines[-4:]] == ["cic", "cic0", "qil", "qcc"]
    assert "\r" not in text
