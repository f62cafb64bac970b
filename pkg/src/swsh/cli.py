"""Batch front door.

Subcommands: coeffs, eigen, wavefunc, excited, verify, oracle.
Exit codes: 0 success, 1 configuration or validation error,
2 verification failure (an invariant broke).

Outputs are byte-reproducible: JSON keys are sorted, rationals are
'p/q' strings and every float is rendered with 17 significant digits.
Beta sweeps ('start:stop:count') are dispatched to a thread pool capped
by the SWSH_SEED_THREADS environment variable; rows are emitted in
sweep order regardless of completion order.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .algebra import as_rational
from .eigenfunction import ground_state, normalized, wavefunction_rows
from .errors import DomainError, SwshError, VerificationError
from .oracle import _loglog_slope, assemble, default_lmax, lowest_eigenvalues
from .series import build_series
from .shape_invariance import (
    excited_energy,
    flow_report,
    parameter_flow,
    printed_flow_comparisons,
)
from .verify import run_verification

WAVEFUNC_POINTS = 64


def fmt(x) -> str:
    return format(float(x), ".17g")


def _stringify_floats(obj):
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, dict):
        return {k: _stringify_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify_floats(v) for v in obj]
    return obj


def emit_json(payload: dict) -> str:
    body = dict(payload)
    body.setdefault("schema", 1)
    return json.dumps(_stringify_floats(body), sort_keys=True, indent=2) + "\n"


def emit_csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) if isinstance(x, float) else str(x) for x in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunConfig:
    command: str
    m: Fraction
    order: int
    betas: tuple[float, ...]
    level: int
    lmax: int
    out: str | None
    format: str
    eigvecs: bool = False


def parse_beta(text: str) -> tuple[float, ...]:
    """Scalar '0.1' or inclusive sweep 'start:stop:count'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"sweep must be start:stop:count, got {text!r}")
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
        if count < 1:
            raise DomainError(f"sweep count must be >= 1, got {count}")
        if count == 1:
            return (start,)
        step = (stop - start) / (count - 1)
        return tuple(start + i * step for i in range(count))
    return (float(text),)


def worker_count() -> int:
    env = os.environ.get("SWSH_SEED_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise DomainError(f"SWSH_SEED_THREADS must be an integer, got {env!r}") from exc
    return min(4, os.cpu_count() or 1)


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; 2 is reserved for
    # verification failures, so convert to a DomainError instead
    def error(self, message):
        raise DomainError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="swsh", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("coeffs", "exact coefficient table as JSON"),
        ("eigen", "series vs oracle eigenvalue comparison over a beta sweep"),
        ("wavefunc", "ground wavefunction samples as CSV"),
        ("excited", "parameter flow report and excited-energy coefficients"),
        ("verify", "run the full invariant suite and report pass/fail"),
        ("oracle", "raw oracle eigenvalue table"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--m", required=True, help="azimuthal index, e.g. 1/2")
        cmd.add_argument("--order", type=int, default=8, help="series truncation order")
        cmd.add_argument("--beta", default="0.1", help="scalar or start:stop:count sweep")
        cmd.add_argument("--level", type=int, default=1, help="excited level / level count")
        cmd.add_argument("--lmax", type=int, default=None,
                         help="oracle basis truncation (default max(32, 4*level))")
        cmd.add_argument("--out", default=None, help="output path (default stdout)")
        cmd.add_argument("--format", choices=("json", "csv"), default=None)
        if name == "oracle":
            cmd.add_argument("--eigvecs", action="store_true",
                             help="dump eigenvectors, one column per level")
    return parser


def config_from_args(args) -> RunConfig:
    if args.order < 0:
        raise DomainError(f"--order must be >= 0, got {args.order}")
    if args.level < 0:
        raise DomainError(f"--level must be >= 0, got {args.level}")
    default_format = {"coeffs": "json", "eigen": "csv", "wavefunc": "csv",
                      "excited": "json", "verify": "json", "oracle": "csv"}
    lmax = args.lmax if args.lmax is not None else default_lmax(max(1, args.level))
    if lmax < 4:
        raise DomainError(f"--lmax must be >= 4, got {lmax}")
    return RunConfig(
        command=args.command,
        m=as_rational(args.m),
        order=args.order,
        betas=parse_beta(args.beta),
        level=args.level,
        lmax=lmax,
        out=args.out,
        format=args.format or default_format[args.command],
        eigvecs=getattr(args, "eigvecs", False),
    )


def cmd_coeffs(cfg: RunConfig) -> tuple[int, str]:
    series = build_series(cfg.m, cfg.order)
    if cfg.format == "csv":
        rows = [[n, e] for n, e in enumerate(series.to_table()["energy"])]
        return 0, emit_csv(["order", "energy"], rows)
    payload = series.to_table()
    if cfg.order >= 2:
        from .verify import printed_order2_energy
        from .algebra import format_rational

        payload["notices"] = [{
            "class": "PAPER-DIVERGENCE",
            "quantity": "order-2 energy coefficient",
            "printed": format_rational(printed_order2_energy(cfg.m)),
            "computed": format_rational(series.energy[2]),
        }]
    return 0, emit_json(payload)


def cmd_eigen(cfg: RunConfig) -> tuple[int, str]:
    series = build_series(cfg.m, cfg.order)

    def one(beta: float):
        e_series = float(series.energy_sum(beta))
        e_oracle = float(
            lowest_eigenvalues(assemble(cfg.m, beta, cfg.lmax), 1, tol=1e-12).eigenvalues[0]
        )
        return e_series, e_oracle

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(one, cfg.betas))
    diffs = [(b, abs(s - o)) for b, (s, o) in zip(cfg.betas, results)]
    slope = _loglog_slope(diffs)
    slope_text = fmt(slope) if slope is not None else ""
    rows = [[float(b), s, o, abs(s - o), slope_text]
            for b, (s, o) in zip(cfg.betas, results)]
    if cfg.format == "json":
        return 0, emit_json({"m": str(cfg.m), "order": cfg.order, "rows": [
            {"beta": r[0], "e_series": r[1], "e_oracle": r[2], "abs_diff": r[3]}
            for r in rows
        ], "fitted_order": slope})
    return 0, emit_csv(["beta", "E_series", "E_oracle", "abs_diff", "fitted_order"], rows)


def cmd_wavefunc(cfg: RunConfig) -> tuple[int, str]:
    if len(cfg.betas) != 1:
        raise DomainError("wavefunc needs a scalar --beta")
    series = build_series(cfg.m, cfg.order)
    state = normalized(ground_state(series, cfg.betas[0]))
    lo, hi = 0.05, math.pi - 0.05
    grid = [lo + (hi - lo) * (i + 1) / (WAVEFUNC_POINTS + 1) for i in range(WAVEFUNC_POINTS)]
    rows = wavefunction_rows(state, grid)
    if cfg.format == "json":
        return 0, emit_json({"m": str(cfg.m), "order": cfg.order,
                             "beta": cfg.betas[0], "rows": rows})
    return 0, emit_csv(["theta", "psi0", "theta0", "residual"],
                       [[r["theta"], r["psi0"], r["theta0"], r["residual"]] for r in rows])


def cmd_excited(cfg: RunConfig) -> tuple[int, str]:
    series, steps = parameter_flow(cfg.m, cfg.level, cfg.order)
    energy_rows = []
    for level in range(cfg.level + 1):
        coeffs = excited_energy(cfg.m, level, cfg.order, series=series)
        for n, c in enumerate(coeffs):
            energy_rows.append([level, n, str(c)])
    if cfg.format == "csv":
        return 0, emit_csv(["level", "order", "coefficient"], energy_rows)
    payload = flow_report(steps, series)
    payload["energy"] = [{"level": r[0], "order": r[1], "coefficient": r[2]}
                         for r in energy_rows]
    if steps:
        payload["printed_form_comparisons"] = printed_flow_comparisons(steps[0], series)
    return 0, emit_json(payload)


def cmd_verify(cfg: RunConfig) -> tuple[int, str]:
    report = run_verification(cfg.m, cfg.order, cfg.lmax)
    code = 0 if report["status"] == "pass" else 2
    report["exit_code"] = code
    return code, emit_json(report)


def cmd_oracle(cfg: RunConfig) -> tuple[int, str]:
    levels = max(1, cfg.level)
    if cfg.eigvecs and len(cfg.betas) != 1:
        raise DomainError("--eigvecs needs a scalar --beta")

    def one(beta: float):
        return lowest_eigenvalues(assemble(cfg.m, beta, cfg.lmax), levels,
                                  tol=1e-12, want_vectors=cfg.eigvecs)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(one, cfg.betas))
    rows = []
    for beta, res in zip(cfg.betas, results):
        for level, value in enumerate(res.eigenvalues):
            rows.append([float(beta), level, float(value)])
    if cfg.format == "json":
        payload = {"m": str(cfg.m), "lmax": cfg.lmax, "rows": [
            {"beta": r[0], "level": r[1], "eigenvalue": r[2]} for r in rows]}
        if cfg.eigvecs:
            payload["eigenvectors"] = [[float(x) for x in vec]
                                       for vec in results[0].eigenvectors]
        return 0, emit_json(payload)
    text = emit_csv(["beta", "level", "eigenvalue"], rows)
    if cfg.eigvecs:
        vecs = results[0].eigenvectors
        header = ["index"] + [f"level_{k}" for k in range(levels)]
        vec_rows = [[i] + [float(v[i]) for v in vecs] for i in range(len(vecs[0]))]
        text += "\n" + emit_csv(header, vec_rows)
    return 0, text


COMMANDS = {
    "coeffs": cmd_coeffs,
    "eigen": cmd_eigen,
    "wavefunc": cmd_wavefunc,
    "excited": cmd_excited,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
        code, text = COMMANDS[cfg.command](cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except VerificationError as exc:
        print(f"verification failure: {exc}\ndetails: {exc.details}", file=sys.stderr)
        return 2
    except SwshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
