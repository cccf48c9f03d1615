"""Command-line entry point: ``mlqcc <subcommand> [options]``.

Exit codes: 0 success, 1 a claim or certificate failed, 2 usage, parse or
precondition error.
"""

from __future__ import annotations

import argparse
import math
import sys

from mlqcc import protocol_io
from mlqcc.and_protocol import and_truth, build_and_protocol
from mlqcc.audit import audit
from mlqcc.cic import cic, ledger_from_transcript
from mlqcc.compilers.oneshot import compile_oneshot, verify_oneshot
from mlqcc.compilers.private import compile_private, verify_private
from mlqcc.corpus import random_oneshot_protocol, send_x_and, spawn
from mlqcc.errors import MlqccError
from mlqcc.lemma_checks import run_lemma_suite
from mlqcc.protocol import DEFAULT_CAP, InputDistribution, error_probability, simulate, u0
from mlqcc.reports import render_csv, write_text

MAX_SEED = 2**64 - 1


def _positive_float(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _cap(text: str) -> int:
    v = int(text)
    if not 1 <= v <= DEFAULT_CAP:
        raise argparse.ArgumentTypeError(f"cap must be between 1 and {DEFAULT_CAP}")
    return v


def _distribution(name: str) -> InputDistribution:
    return u0() if name == "u0" else InputDistribution.uniform()


def _header(args, extra: str = "") -> list[str]:
    line = f"mlqcc {args.command} seed={args.seed} tol={args.tol!r}"
    return [line + (f" {extra}" if extra else "")]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_text(text, out)


def _load_input(spec: str, args):
    if spec == "builtin:send-x-and":
        return send_x_and()
    if spec.startswith("builtin:random-oneshot"):
        parts = spec.split(":")
        k = int(parts[2]) if len(parts) > 2 else 3
        return random_oneshot_protocol(spawn(args.seed, 1)[0], k)
    if spec.startswith("builtin:and:"):
        return build_and_protocol(int(spec.split(":")[2]))
    return protocol_io.load(spec)


def cmd_and_sweep(args) -> int:
    if not 1 <= args.r_min <= args.r_max <= 8:
        raise _Usage("need 1 <= --r-min <= --r-max <= 8")
    rows = []
    for r in range(args.r_min, args.r_max + 1):
        led = cic(build_and_protocol(r), u0(), cap=args.cap, with_qil=False)
        k = 4 * r - 1
        rows.append((r, k, led.qcc, led.cic, led.cic0, math.log2(k) / (12 * k), k * led.cic / math.log2(k)))
    header = ["r", "k", "qcc", "cic", "cic0", "lower_bound", "k_cic_over_log2k"]
    _emit(render_csv(header, rows, _header(args, f"r={args.r_min}..{args.r_max} mu=u0")), args.out)
    return 0


def cmd_audit(args) -> int:
    if (args.protocol is None) == (args.and_r is None):
        raise _Usage("give exactly one of PROTOCOL or --and R")
    p = build_and_protocol(args.and_r) if args.and_r is not None else _load_input(args.protocol, args)
    aud = audit(p, tol=args.tol)
    _emit(aud.to_csv(_header(args, f"protocol={p.name or args.protocol}")), args.out)
    return 0 if aud.passed else 1


def cmd_compile(args) -> int:
    base = _load_input(args.input, args)
    mu = _distribution(args.mu)
    if args.private:
        c = compile_private(base)
        report = verify_private(c, mu, tol=args.tol)
        spec = c.spec
    else:
        c = compile_oneshot(base, cap=args.cap)
        report = verify_oneshot(base, c, mu, tol=args.tol)
        spec = c.spec
    if args.protocol_out:
        protocol_io.dump(spec, args.protocol_out)
    mode = "private" if args.private else "oneshot"
    _emit(report.to_csv(_header(args, f"compiler={mode} input={args.input} mu={args.mu}")), args.out)
    return 0 if report.passed else 1


def cmd_lemmas(args) -> int:
    if args.trials < 1:
        raise _Usage("--trials must be at least 1")
    rep = run_lemma_suite(args.trials, args.seed)
    _emit(rep.to_csv(), args.out)
    return 0 if rep.all_passed else 1


def cmd_simulate(args) -> int:
    p = _load_input(args.protocol, args)
    mu = _distribution(args.mu)
    t = simulate(p, mu, cap=args.cap)
    rows = []
    nx, ny = p.input_sizes
    for x in range(nx):
        for y in range(ny):
            for o, prob in enumerate(t.output_distribution(x, y)):
                rows.append((x, y, o, float(prob)))
    text = render_csv(["x", "y", "output", "probability"], rows, _header(args, f"protocol={p.name or args.protocol} mu={args.mu}"))
    if p.binary_inputs:
        dist, worst = error_probability(t, and_truth, mu)
        text += f"# and_error distributional={dist!r} worst_case={worst!r}\n"
    _emit(text, args.out)
    if args.ledger:
        write_text(ledger_from_transcript(t).to_csv(), args.ledger)
    return 0


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=1e-9, help="numerical slack for checks (default 1e-9)")
    common.add_argument("--seed", type=_seed, default=0, help="64-bit seed for random inputs (default 0)")
    common.add_argument("--cap", type=_cap, default=DEFAULT_CAP, help="state dimension cap (default 256)")
    common.add_argument("--out", default=None, help="output CSV path (default stdout)")

    parser = argparse.ArgumentParser(prog="mlqcc", description="Memoryless quantum protocol verification lab.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("and-sweep", parents=[common], help="CIC of the reflection AND protocol for a range of r")
    p.add_argument("--r-min", type=int, default=1)
    p.add_argument("--r-max", type=int, default=8)
    p.set_defaults(func=cmd_and_sweep)

    p = sub.add_parser("audit", parents=[common], help="certify the lower-bound chain on a protocol")
    p.add_argument("protocol", nargs="?", help="protocol JSON file or builtin:and:R")
    p.add_argument("--and", dest="and_r", type=int, help="audit the reflection AND protocol with this r")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("compile", parents=[common], help="run a compiler and verify its guarantees")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--private", action="store_true", help="one-time-pad privacy compiler")
    mode.add_argument("--oneshot", action="store_true", help="one-shot coin removal compiler")
    p.add_argument("input", help="protocol JSON, builtin:send-x-and or builtin:random-oneshot:K")
    p.add_argument("--mu", choices=["u0", "uniform"], default="u0")
    p.add_argument("--protocol-out", help="write the compiled protocol JSON here")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("lemmas", parents=[common], help="randomized inequality checks")
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("simulate", parents=[common], help="output distribution of a protocol")
    p.add_argument("protocol", help="protocol JSON file or builtin:...")
    p.add_argument("--mu", choices=["u0", "uniform"], default="uniform")
    p.add_argument("--ledger", help="also write the CIC ledger CSV here")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"mlqcc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except MlqccError as exc:
        print(f"mlqcc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mlqcc {args.command}: IoError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
