import json

import numpy as np
import pytest

from mlqcc import protocol_io
from mlqcc.and_protocol import build_and_protocol
from mlqcc.compilers import compile_oneshot, compile_private
from mlqcc.corpus import random_oneshot_protocol, send_x_and, spawn
from mlqcc.errors import ProtocolParseError
from mlqcc.protocol import simulate, validate


@pytest.mark.parametrize(
    "make",
    [lambda: build_and_protocol(2), send_x_and, lambda: random_oneshot_protocol(spawn(1, 1)[0], 3)],
    ids=["and2", "send-x", "oneshot"],
)
def test_roundtrip_is_byte_identical(make):
    p = make()
    text = protocol_io.dumps(p)
    assert protocol_io.dumps(protocol_io.loads(text)) == text
    assert text.endswith("\n")


def test_roundtrip_preserves_behaviour(tmp_path):
    p = compile_private(send_x_and()).spec
    path = tmp_path / "p.json"
    protocol_io.dump(p, path)
    q = protocol_io.load(path)
    assert validate(q) == []
    a = simulate(p, max_coin_bits=12)
    b = simulate(q, max_coin_bits=12)
    assert np.array_equal(a.output_probs, b.output_probs)


def test_compiled_oneshot_serializes():
    c = compile_oneshot(random_oneshot_protocol(spawn(2, 1)[0], 3))
    q = protocol_io.loads(protocol_io.dumps(c.spec))
    assert q.registers == c.spec.registers


def test_nested_rows_accepted():
    doc = protocol_io.to_json(send_x_and())
    doc["rounds"][0]["unitaries"]["1"] = [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
    p = protocol_io.from_json(doc)
    assert np.allclose(p.rounds[0].unitary(1), [[0, 1], [1, 0]])


def test_bad_json_reports_position():
    with pytest.raises(ProtocolParseError) as exc:
        protocol_io.loads("{")
    assert exc.value.path.startswith("$ (line 1")


def test_error_path_points_at_field():
    doc = protocol_io.to_json(send_x_and())
    doc["rounds"][0]["unitaries"]["1"][3] = "oops"
    with pytest.raises(ProtocolParseError) as exc:
        protocol_io.from_json(doc)
    assert exc.value.path.startswith('rounds[0].unitaries["1"]')


def test_wrong_type():
    with pytest.raises(ProtocolParseError) as exc:
        protocol_io.loads(json.dumps({"registers": 1}))
    assert exc.value.path == "registers"


def test_wrong_shape_caught_by_validation():
    doc = protocol_io.to_json(send_x_and())
    doc["rounds"][0]["unitaries"]["1"] = [[1, 0]]
    kinds = {v.kind for v in validate(protocol_io.from_json(doc))}
    assert "DimensionMismatch" in kinds
