import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mlqcc.and_protocol import build_and_protocol
from mlqcc.audit import (
    CLAIM3_THRESHOLD,
    audit,
    check_entropy_lemma,
    concavity_margin,
    entropy_lemma_sides,
    proposition_chain,
)
from mlqcc.corpus import alice_sends_x, constant_output, near_identity_corpus, random_oneshot_protocol, spawn
from mlqcc.errors import PreconditionError, RequiresBinaryInputs, RequiresMemoryless
from mlqcc.protocol import OutputStage, ProtocolSpec, Round
from mlqcc.qim import RegisterLayout
from mlqcc.reports import NOT_APPLICABLE


@pytest.fixture(scope="module")
def and_audits():
    return {r: audit(build_and_protocol(r)) for r in range(1, 9)}


def test_and_claims_pass(and_audits):
    for r, aud in and_audits.items():
        assert aud.passed, r
        assert aud.epsilon <= 1e-12


def test_claim3_not_applicable_for_single_reflection(and_audits):
    aud = and_audits[1]
    assert aud.a[0] > CLAIM3_THRESHOLD
    assert aud.claims["claim3"] is NOT_APPLICABLE


@pytest.mark.parametrize("r", [1, 2, 4])
def test_first_round_distance(and_audits, r):
    # b_1 = D(|0>, U|0>) with overlap cos(2 theta); the final pair (0,1), (1,1) is orthogonal.
    aud = and_audits[r]
    assert aud.b[0] == pytest.approx(math.sin(math.pi / (4 * r)), abs=1e-12)
    assert aud.delta[-1] == pytest.approx(1.0, abs=1e-12)


def test_cic_is_two_thirds_cic0(and_audits):
    for aud in and_audits.values():
        assert aud.cic == pytest.approx(2 / 3 * aud.cic0)


def test_tight_and_displayed_forms_agree(and_audits):
    for aud in and_audits.values():
        chain = proposition_chain(aud)
        assert chain["holds_tight_chain"] == chain["holds_displayed_half"]
        assert chain["holds_claim1_link"] and chain["holds_claim2_link"]


def test_near_identity_corpus_exercises_claim3():
    auds = [audit(p) for p in near_identity_corpus(11, 40, scale=0.2)]
    assert all(a.passed for a in auds)
    assert all(a.claims["claim3"] is True for a in auds)


def test_error_variants_differ():
    # Output x is wrong only on (1,0), which the (0,1)/(1,1) pair never sees.
    aud = audit(alice_sends_x())
    assert aud.epsilon == 0.0
    assert aud.epsilon_10_11 == pytest.approx(1.0)
    assert aud.epsilon_worst == pytest.approx(1.0)
    assert aud.epsilon_dist == pytest.approx(1 / 3)
    assert aud.claims["claim1"] is True


def test_constant_protocol_has_zero_information():
    aud = audit(constant_output(3))
    assert aud.cic0 == pytest.approx(0.0, abs=1e-12)
    assert aud.passed


def test_preconditions():
    with pytest.raises(PreconditionError):
        audit(random_oneshot_protocol(spawn(1, 1)[0], 3))
    with pytest.raises(PreconditionError):
        audit(constant_output(2))
    p = ProtocolSpec(RegisterLayout([("M", 3)]), (Round("alice", {v: np.eye(3) for v in range(3)}),), "M", input_sizes=(3, 2))
    with pytest.raises(RequiresBinaryInputs):
        audit(p)
    q = ProtocolSpec(RegisterLayout([("M", 2)]), (Round("alice", {0: np.eye(2), 1: np.eye(2)}),), "M", memoryless=False)
    with pytest.raises(RequiresMemoryless):
        audit(q)


def test_to_csv_rows(and_audits):
    lines = and_audits[2].to_csv(["seed=0"]).splitlines()
    assert lines[0] == "# seed=0"
    assert lines[1] == "i,a_i,b_i,delta_i"
    assert lines[2].startswith("1,")
    assert "claim3,1,," in lines


def test_concavity_margin_nonnegative():
    assert concavity_margin(20) >= -1e-12


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 64), elements=st.floats(0.0, 1.0)))
def test_entropy_lemma_property(xs):
    assert check_entropy_lemma(xs, 1e-9)


def test_entropy_lemma_edge_cases():
    assert entropy_lemma_sides(np.zeros(5)) == (0.0, 0.0)
    lhs, rhs = entropy_lemma_sides([0.5])
    assert lhs == pytest.approx(1.0)
    assert rhs == pytest.approx(3.0)


def test_claim1_uses_the_pair_delta_compares():
    # Output y with an x-independent state: error 0 on (1,0) and (1,1) yet delta_k = 0,
    # so epsilon must be taken over (0,1) and (1,1) for the claim to hold.
    x_gate = np.array([[0, 1], [1, 0]])
    p = ProtocolSpec(
        RegisterLayout([("M", 2)]),
        (Round("alice", {0: np.eye(2), 1: np.eye(2)}),),
        "M",
        output_stage=OutputStage({0: np.eye(2), 1: x_gate}),
    )
    aud = audit(p)
    assert aud.epsilon_10_11 == pytest.approx(0.0, abs=1e-12)
    assert aud.delta[-1] == pytest.approx(0.0, abs=1e-12)
    assert aud.epsilon == pytest.approx(1.0)
    assert aud.claims["claim1"] is True
