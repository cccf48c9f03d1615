"""Deterministic CSV rendering shared by ledgers, audits and the CLI."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence


class _NotApplicable:
    """Marker for a check whose hypothesis does not hold."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "NotApplicable"

    def __bool__(self) -> bool:
        raise TypeError("NotApplicable has no truth value; compare with `is NOT_APPLICABLE`")


NOT_APPLICABLE = _NotApplicable()


class Certificate(NamedTuple):
    """One verified inequality: ``measured`` compared with ``bound``."""

    name: str
    measured: float
    bound: float
    passed: object

    @property
    def ok(self) -> bool:
        return self.passed is NOT_APPLICABLE or bool(self.passed)


def certificates_csv(certs: Iterable[Certificate], comments: Sequence[str] = ()) -> str:
    return render_csv(["certificate", "measured", "bound", "pass"], [tuple(c) for c in certs], comments)


def fmt(value) -> str:
    """Render a cell: floats with 17 significant digits, bools as 0/1."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return "%.17g" % value
    if hasattr(value, "item"):
        return fmt(value.item())
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    """CSV text with LF line endings; ``comments`` become leading ``# `` lines."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(text: str, path: str | Path | None) -> str:
    if path is not None:
        Path(path).write_bytes(text.encode("utf-8"))
    return text
