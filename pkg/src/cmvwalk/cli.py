"""Batch command-line front door.

Subcommands:

    model      emit the coefficient (or coin) table a spec describes
    evolve     emit the wavepacket amplitudes per (site, step)
    moments    emit moments and normalized slopes along a time grid
    exponents  same pipeline, named for the exponent summary it prints
    verify     run the self-check suites and emit a JSON report

Exit codes: 0 success, 1 verification failure, 2 input/validation error,
3 resource/feasibility error.  CSV is UTF-8 with a header row and floats
printed with shortest round-trip precision, so identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from ._accel import BACKEND
from .dynamics import TimeAverage, abel_averages, iterate_states, moment
from .errors import PreconditionError, ResourceLimitError, SchemaError
from .modelspec import ModelHandle, load_model
from .qwalk import walk_site_marginal
from .sparse import coin_sequence
from .verify import SUITES, run_suite

_EVOLVE_ROW_CAP = 20_000_000


def _fmt(x) -> str:
    return repr(float(x))


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_csv(path, header, rows):
    stream, owned = _open_out(path)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    finally:
        if owned:
            stream.close()


def _parse_times(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] != "geometric":
        raise ValueError(
            f"times must look like geometric:lo:hi:count, got {spec!r}"
        )
    lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
    if not (1.0 < lo < hi) or count < 2:
        raise ValueError(
            "times need 1 < lo < hi and at least two points "
            f"(got lo={lo}, hi={hi}, count={count})"
        )
    return np.geomspace(lo, hi, count)


def _parse_p_list(spec: str) -> list[float]:
    items = [s for s in spec.split(",") if s.strip()]
    if not items:
        raise ValueError("at least one moment power is required")
    ps = [float(s) for s in items]
    if any(p <= 0 for p in ps):
        raise ValueError(f"moment powers must be positive, got {ps}")
    return ps


def cmd_model(args) -> int:
    handle = load_model(args.spec)
    if args.emit == "alphas":
        alphas, rhos = handle.sequence.window(args.n)
        rows = [
            (n, _fmt(alphas[n].real), _fmt(alphas[n].imag), _fmt(rhos[n]))
            for n in range(args.n)
        ]
        _write_csv(args.out, ("n", "alpha_re", "alpha_im", "rho"), rows)
        return 0
    if not handle.is_walk:
        raise SchemaError("--emit coins needs a walk model", "model")
    coin_map = handle.coins or {}
    rule_r = {}
    if handle.sparse is not None:
        coins = coin_sequence(handle.sparse)
        rule_r = dict(zip(coins.sites, coins.reflectivities))
    rows = []
    header = ("site", "r") + tuple(
        f"c{i}{j}_{part}" for i in (1, 2) for j in (1, 2) for part in ("re", "im")
    )
    for site in range(1, args.n + 1):
        c = coin_map.get(site, np.eye(2, dtype=np.complex128))
        if site in rule_r:
            r_val = _fmt(rule_r[site])
        elif np.all(c.imag == 0) and c[0, 0] == c[1, 1]:
            r_val = _fmt(c[0, 0].real)
        else:
            r_val = ""
        rows.append(
            (site, r_val)
            + tuple(
                _fmt(part)
                for entry in (c[0, 0], c[0, 1], c[1, 0], c[1, 1])
                for part in (entry.real, entry.imag)
            )
        )
    _write_csv(args.out, header, rows)
    return 0


def cmd_evolve(args) -> int:
    handle = load_model(args.spec)
    if args.tmax < 0:
        raise ValueError(f"--tmax must be nonnegative, got {args.tmax}")
    approx_rows = (args.tmax + 1) * (args.tmax + 2)
    if approx_rows > _EVOLVE_ROW_CAP:
        feasible = int(math.isqrt(_EVOLVE_ROW_CAP)) - 1
        raise ResourceLimitError(
            f"t_max={args.tmax} would emit ~{approx_rows} rows "
            f"(cap {_EVOLVE_ROW_CAP}); t_max={feasible} is feasible",
            feasible_t_max=feasible,
        )

    def rows():
        for t, state in iterate_states(handle.sequence, args.tmax):
            amp = state.amplitudes
            for n in range(state.frontier + 1):
                a = amp[n]
                yield (
                    n,
                    t,
                    _fmt(a.real),
                    _fmt(a.imag),
                    _fmt(a.real * a.real + a.imag * a.imag),
                )

    _write_csv(args.out, ("n", "t", "re", "im", "prob"), rows())
    return 0


def cmd_moments(args) -> int:
    handle = load_model(args.spec)
    ps = _parse_p_list(args.p)
    times = _parse_times(args.times)
    averages = abel_averages(handle.sequence, list(times))
    if handle.is_walk:
        averages = [
            TimeAverage(ta.T, walk_site_marginal(ta.atilde), ta.tail_bound)
            for ta in averages
        ]
    logs = np.log(times)
    mid = 0.5 * (logs[0] + logs[-1])
    mask = logs >= mid
    rows = []
    per_p = []
    for p in ps:
        moments = np.array([moment(ta, p) for ta in averages])
        slopes = np.log(moments) / (p * logs)
        for T, m, s in zip(times, moments, slopes):
            rows.append((_fmt(T), _fmt(p), _fmt(m), _fmt(s)))
        entry = {
            "p": p,
            "beta_minus_proxy": float(np.min(slopes[mask])),
            "beta_plus_proxy": float(np.max(slopes[mask])),
            "theory_beta_minus": (
                (p + 1.0) / (p + 1.0 / handle.eta)
                if handle.eta is not None
                else None
            ),
        }
        per_p.append(entry)
    _write_csv(args.out, ("T", "p", "moment", "slope"), rows)
    summary = {
        "model": handle.kind,
        "position_observable": "walk-site" if handle.is_walk else "operator-site",
        "p": ps,
        "times": [float(T) for T in times],
        "window": [float(math.exp(mid)), float(times[-1])],
        "per_p": per_p,
        "backend": BACKEND,
    }
    text = json.dumps(summary, indent=2)
    if args.summary and args.summary != "-":
        Path(args.summary).write_text(text + "\n")
    elif args.out and args.out != "-":
        print(text)
    else:
        print(text, file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    extra = load_model(args.spec).sequence if args.spec else None
    checks, report = run_suite(
        args.suite, seed=args.seed, extra_model=extra, threads=args.threads
    )
    text = json.dumps(report, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n")
    print(text)
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmvwalk",
        description="Half-line CMV operators, sparse-barrier transport, "
        "and coined quantum walks.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("CMVWALK_THREADS", "1")),
        help="parallelism for circle-quadrature nodes (default: "
        "CMVWALK_THREADS or 1); results are bitwise independent of it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="emit the coefficient or coin table")
    p.add_argument("spec", help="model JSON file, or - for stdin")
    p.add_argument("--emit", choices=("alphas", "coins"), default="alphas")
    p.add_argument("--n", type=int, default=16, help="rows to emit")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("evolve", help="emit amplitudes per (site, step)")
    p.add_argument("spec")
    p.add_argument("--tmax", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evolve)

    for name in ("moments", "exponents"):
        p = sub.add_parser(
            name, help="moments and slopes along a geometric time grid"
        )
        p.add_argument("spec")
        p.add_argument("--p", required=True, help="comma-separated powers")
        p.add_argument("--times", required=True, help="geometric:lo:hi:count")
        p.add_argument("--out", default=None, help="CSV path (default stdout)")
        p.add_argument(
            "--summary",
            default=None,
            help="JSON summary path (default: stdout when --out is a file, "
            "else stderr)",
        )
        p.set_defaults(func=cmd_moments)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--spec", default=None, help="extra model for the battery")
    p.add_argument("--report", default=None, help="also write the JSON here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"cmvwalk: invalid model spec: {exc}", file=sys.stderr)
        return 2
    except (PreconditionError, ValueError) as exc:
        print(f"cmvwalk: invalid input: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"cmvwalk: resource limit: {exc}", file=sys.stderr)
        return 3
    except OverflowError as exc:
        print(f"cmvwalk: range error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
