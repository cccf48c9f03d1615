"""JSON protocol files.

Layout::

    {"name": "...", "registers": [{"name": "C", "dim": 2, "holder": "alice"}],
     "rounds": [{"sender": "alice", "unitaries": {"0": M, "1": M}, "reads": []}],
     "coin_model": {"mode": "none", "segments": []},
     "output_register": "C", "memoryless": true, "input_sizes": [2, 2],
     "output_stage": {"unitaries": {"0,0": M}, "acts_on": ["C"], "reads": []}}

A matrix M is a row-major list of [re, im] pairs (nested rows are accepted
on input). Unitary keys are "<input>" or "<input>,<coin>".
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from mlqcc.errors import ProtocolParseError
from mlqcc.protocol import PARTIES, CoinMode, CoinModel, CoinSegment, OutputStage, ProtocolSpec, Round
from mlqcc.qim import RegisterLayout


def _matrix_to_json(m: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=np.complex128).reshape(-1)]


def _family_to_json(fam) -> dict:
    return {f"{v},{c}" if c else f"{v}": _matrix_to_json(m) for (v, c), m in sorted(fam.items())}


def to_json(p: ProtocolSpec) -> dict:
    doc = {
        "name": p.name,
        "registers": [{"name": n, "dim": d, "holder": p.holders[n]} for n, d in p.registers.factors],
        "rounds": [],
        "coin_model": {
            "mode": p.coin_model.mode.value,
            "segments": [
                {"name": s.name, "owner": s.owner, "bits": s.bits, **({"probs": list(s.probs)} if s.probs is not None else {})}
                for s in p.coin_model.segments
            ],
        },
        "output_register": p.output_register,
        "memoryless": p.memoryless,
        "input_sizes": list(p.input_sizes),
    }
    for r in p.rounds:
        entry = {"sender": r.sender, "unitaries": _family_to_json(r.unitaries)}
        if r.acts_on is not None:
            entry["acts_on"] = list(r.acts_on)
        if r.sends is not None:
            entry["sends"] = list(r.sends)
        if r.reads:
            entry["reads"] = list(r.reads)
        doc["rounds"].append(entry)
    if p.output_stage is not None:
        st = {"unitaries": _family_to_json(p.output_stage.unitaries)}
        if p.output_stage.acts_on is not None:
            st["acts_on"] = list(p.output_stage.acts_on)
        if p.output_stage.reads:
            st["reads"] = list(p.output_stage.reads)
        doc["output_stage"] = st
    return doc


def dumps(p: ProtocolSpec) -> str:
    return json.dumps(to_json(p), indent=1) + "\n"


def dump(p: ProtocolSpec, path: str | Path) -> None:
    Path(path).write_bytes(dumps(p).encode("utf-8"))


# --- parsing ----------------------------------------------------------------


def _fail(path: str, msg: str):
    raise ProtocolParseError(path, msg)


def _get(obj: dict, key: str, path: str, kind=None, default=...):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if key not in obj:
        if default is not ...:
            return default
        _fail(f"{path}.{key}" if path else key, "missing required field")
    val = obj[key]
    sub = f"{path}.{key}" if path else key
    if kind is not None and not isinstance(val, kind) or (kind in (int, (int,)) and isinstance(val, bool)):
        _fail(sub, f"expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
    return val


def _name_list(val, path: str) -> tuple[str, ...]:
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        _fail(path, "expected a list of register or segment names")
    return tuple(val)


def _complex(entry, path: str) -> complex:
    if (
        not isinstance(entry, list)
        or len(entry) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
    ):
        _fail(path, "expected a [re, im] pair of numbers")
    re, im = float(entry[0]), float(entry[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        _fail(path, "non-finite matrix entry")
    return complex(re, im)


def _matrix(val, path: str) -> np.ndarray:
    if not isinstance(val, list) or not val:
        _fail(path, "expected a non-empty matrix")
    nested = all(isinstance(row, list) and row and isinstance(row[0], list) for row in val)
    if nested:
        n = len(val)
        rows = []
        for i, row in enumerate(val):
            if len(row) != n:
                _fail(f"{path}[{i}]", f"row has {len(row)} entries, expected {n}")
            rows.append([_complex(e, f"{path}[{i}][{j}]") for j, e in enumerate(row)])
        return np.array(rows, dtype=np.complex128)
    entries = [_complex(e, f"{path}[{j}]") for j, e in enumerate(val)]
    n = math.isqrt(len(entries))
    if n * n != len(entries):
        _fail(path, f"{len(entries)} entries do not form a square matrix")
    return np.array(entries, dtype=np.complex128).reshape(n, n)


def _family(val, path: str) -> dict:
    if not isinstance(val, dict) or not val:
        _fail(path, "expected a non-empty object of unitaries")
    fam = {}
    for key, mat in val.items():
        sub = f'{path}["{key}"]'
        parts = key.split(",")
        try:
            nums = tuple(int(s.strip()) for s in parts)
        except ValueError:
            _fail(sub, "key must be '<input>' or '<input>,<coin>'")
        if len(nums) not in (1, 2) or min(nums) < 0:
            _fail(sub, "key must be '<input>' or '<input>,<coin>' with non-negative integers")
        nums = nums if len(nums) == 2 else (nums[0], 0)
        if nums in fam:
            _fail(sub, f"duplicate key {nums}")
        fam[nums] = _matrix(mat, sub)
    return fam


def from_json(doc) -> ProtocolSpec:
    """Build a ProtocolSpec; malformed input raises ProtocolParseError naming the path."""
    if not isinstance(doc, dict):
        _fail("$", "top level must be an object")
    regs = _get(doc, "registers", "", list)
    factors, holders = [], {}
    for i, r in enumerate(regs):
        path = f"registers[{i}]"
        name = _get(r, "name", path, str)
        dim = _get(r, "dim", path, int)
        if dim < 1:
            _fail(f"{path}.dim", "dimension must be positive")
        if name in holders:
            _fail(f"{path}.name", f"duplicate register {name!r}")
        holder = _get(r, "holder", path, str, default="alice")
        if holder not in PARTIES:
            _fail(f"{path}.holder", f"unknown party {holder!r}")
        factors.append((name, dim))
        holders[name] = holder

    cm = _get(doc, "coin_model", "", dict, default={"mode": "none", "segments": []})
    mode = _get(cm, "mode", "coin_model", str, default="none")
    try:
        mode = CoinMode(mode)
    except ValueError:
        _fail("coin_model.mode", f"unknown coin mode {mode!r}")
    segs = []
    for i, s in enumerate(_get(cm, "segments", "coin_model", list, default=[])):
        path = f"coin_model.segments[{i}]"
        probs = _get(s, "probs", path, list, default=None)
        try:
            segs.append(CoinSegment(_get(s, "name", path, str), _get(s, "owner", path, str), _get(s, "bits", path, int), probs))
        except (TypeError, ValueError) as exc:
            _fail(path, str(exc))
    try:
        coin_model = CoinModel(mode, tuple(segs))
    except ValueError as exc:
        _fail("coin_model", str(exc))

    rounds = []
    for i, r in enumerate(_get(doc, "rounds", "", list)):
        path = f"rounds[{i}]"
        sender = _get(r, "sender", path, str)
        if sender not in PARTIES:
            _fail(f"{path}.sender", f"unknown party {sender!r}")
        fam = _family(_get(r, "unitaries", path), f"{path}.unitaries")
        acts = r.get("acts_on") if isinstance(r, dict) else None
        sends = r.get("sends") if isinstance(r, dict) else None
        rounds.append(
            Round(
                sender,
                fam,
                acts_on=None if acts is None else _name_list(acts, f"{path}.acts_on"),
                sends=None if sends is None else _name_list(sends, f"{path}.sends"),
                reads=_name_list(r.get("reads", []), f"{path}.reads"),
            )
        )
    stage = None
    if doc.get("output_stage") is not None:
        st = _get(doc, "output_stage", "", dict)
        acts = st.get("acts_on")
        stage = OutputStage(
            _family(_get(st, "unitaries", "output_stage"), "output_stage.unitaries"),
            acts_on=None if acts is None else _name_list(acts, "output_stage.acts_on"),
            reads=_name_list(st.get("reads", []), "output_stage.reads"),
        )
    sizes = _get(doc, "input_sizes", "", list, default=[2, 2])
    if len(sizes) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in sizes):
        _fail("input_sizes", "expected two positive integers")
    try:
        layout = RegisterLayout(factors)
    except ValueError as exc:
        _fail("registers", str(exc))
    return ProtocolSpec(
        registers=layout,
        rounds=tuple(rounds),
        output_register=_get(doc, "output_register", "", str),
        holders=holders,
        coin_model=coin_model,
        output_stage=stage,
        memoryless=_get(doc, "memoryless", "", bool, default=True),
        input_sizes=tuple(sizes),
        name=_get(doc, "name", "", str, default=""),
    )


def loads(text: str) -> ProtocolSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolParseError(f"$ (line {exc.lineno}, column {exc.colno})", exc.msg) from None
    return from_json(doc)


def load(path: str | Path) -> ProtocolSpec:
    return loads(Path(path).read_text(encoding="utf-8"))
