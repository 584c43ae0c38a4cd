"""Command-line front end: ``jacobi-capacity <command> [options]``.

Exit codes: 0 success, 1 a self-test check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import closedform as cf
from . import lyapunov as ly
from . import markov as mk
from .fading import parse_model
from .logdet import CSV_FIELDS as CAPACITY_FIELDS
from .logdet import capacity_mc

TDMA_OFFSET_FIELDS = ("dist_a", "dist_b", "offset_nats", "Linf_bits", "Linf_dB")
FIGURE_USERS = (2, 3, 4, 6, 8, 10)


class ConfigError(ValueError):
    pass


def _default_seed() -> int:
    env = os.environ.get("JACOBI_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"JACOBI_SEED must be an integer, got {env!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _powers(args) -> list[float]:
    if args.snr_db is not None and args.power is not None:
        raise ConfigError("give either --power or --snr-db, not both")
    if args.snr_db is not None:
        return [10 ** (db / 10) for db in args.snr_db]
    powers = args.power if args.power is not None else [1.0, 10.0, 100.0]
    if any(p < 0 for p in powers):
        raise ConfigError("powers must be non-negative")
    return powers


def render(rows: list[dict], fields, fmt: str, header: str | None = None) -> str:
    """CSV (optionally preceded by a ``# header`` line) or a JSON array."""
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _seeded(rows: list[dict], seed: int, fmt: str) -> list[dict]:
    # JSON rows carry the seed even where the CSV schema records it in the header
    return [dict(r, seed=seed) for r in rows] if fmt == "json" else rows


def cmd_capacity(args) -> int:
    a, b = parse_model(args.dist_a), parse_model(args.dist_b)
    rows = [capacity_mc(a, b, args.M, args.K, P, args.protocol, args.trials, args.seed,
                        workers=args.threads).row() for P in _powers(args)]
    _emit(render(rows, CAPACITY_FIELDS, args.format), args.output)
    return 0


def cmd_bounds(args) -> int:
    a, b = parse_model(args.dist_a), parse_model(args.dist_b)
    lad = mk.bound_ladder(a, b, args.K, args.n_max, args.trials, args.seed, workers=args.threads)
    rows = _seeded(lad.rows(), args.seed, args.format)
    _emit(render(rows, mk.LADDER_CSV_FIELDS, args.format, f"bounds seed={args.seed}"), args.output)
    return 0


def cmd_tdma_offset(args) -> int:
    off = mk.high_snr_offset_tdma(parse_model(args.dist_a), parse_model(args.dist_b))
    rows = [{"dist_a": args.dist_a, "dist_b": args.dist_b, "offset_nats": off.offset_nats,
             "Linf_bits": off.l_inf_bits, "Linf_dB": off.l_inf_db}]
    _emit(render(rows, TDMA_OFFSET_FIELDS, args.format), args.output)
    return 0


def cmd_closed_form(args) -> int:
    rows = cf.closed_form_rows(_powers(args), args.K, complex(args.m1), args.m2)
    _emit(render(rows, cf.CSV_FIELDS, args.format), args.output)
    return 0


def cmd_lyapunov(args) -> int:
    a, b = parse_model(args.dist_a), parse_model(args.dist_b)
    lams = args.lam if args.lam is not None else [-0.1]
    if any(not lam < 0 for lam in lams):
        raise ConfigError("lambda values must be negative")
    rows = []
    if args.k_max:
        for lam in lams:
            for k in range(1, args.k_max + 1):
                v, se = ly.lyapunov_upper_bound(a, b, lam, k, args.trials, args.seed, K=args.K)
                rows.append({"lambda": lam, "k": k, "trials": args.trials, "upper_bound": v, "se": se})
        fields = ly.BOUND_CSV_FIELDS
    else:
        for lam in lams:
            g, se = ly.lyapunov_estimate(a, b, lam, args.M, args.reps, args.seed, K=args.K)
            rows.append({"lambda": lam, "M": args.M, "reps": args.reps, "gamma_hat": g, "se": se})
        fields = ly.CSV_FIELDS
    rows = _seeded(rows, args.seed, args.format)
    _emit(render(rows, fields, args.format, f"lyapunov seed={args.seed}"), args.output)
    return 0


def cmd_figures(args) -> int:
    """Bound ladder versus order for one K, and order-2 bounds versus K."""
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    a, b = parse_model(args.dist_a), parse_model(args.dist_b)
    ext = "json" if args.format == "json" else "csv"
    lad = mk.bound_ladder(a, b, args.K, args.n_max, args.trials, args.seed, workers=args.threads)
    (outdir / f"ladder_K{args.K}.{ext}").write_text(
        render(_seeded(lad.rows(), args.seed, args.format), mk.LADDER_CSV_FIELDS, args.format,
               f"figures ladder K={args.K} seed={args.seed}"))
    rows = []
    for K in FIGURE_USERS:
        rows += mk.bound_ladder(a, b, K, [2], args.trials, args.seed, workers=args.threads).rows()
    (outdir / f"users_n2.{ext}").write_text(
        render(_seeded(rows, args.seed, args.format), mk.LADDER_CSV_FIELDS, args.format,
               f"figures users n=2 seed={args.seed}"))
    return 0


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    results = run_all(print, timing=args.timings)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jacobi-capacity", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: $JACOBI_SEED or 0)")
    common.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")

    models = argparse.ArgumentParser(add_help=False)
    models.add_argument("--dist-a", default="rayleigh")
    models.add_argument("--dist-b", default="rayleigh")

    power = argparse.ArgumentParser(add_help=False)
    power.add_argument("--power", type=_float_list, default=None, help="linear per-cell powers, comma separated")
    power.add_argument("--snr-db", type=_float_list, default=None, help="per-cell SNRs in dB")

    c = sub.add_parser("capacity", parents=[common, models, power], help="Monte Carlo per-cell sum-rate")
    c.add_argument("-M", type=int, default=1000)
    c.add_argument("-K", type=int, default=1)
    c.add_argument("--protocol", choices=("TDMA", "WB"), default="WB")
    c.add_argument("--trials", type=int, default=1000)
    c.set_defaults(func=cmd_capacity)

    c = sub.add_parser("bounds", parents=[common, models], help="high-SNR offset bound ladder")
    c.add_argument("-K", type=int, default=2)
    c.add_argument("--n-max", type=int, default=8)
    c.add_argument("--trials", type=int, default=100_000)
    c.set_defaults(func=cmd_bounds)

    c = sub.add_parser("tdma-offset", parents=[common, models], help="exact K=1 high-SNR offset")
    c.set_defaults(func=cmd_tdma_offset)

    c = sub.add_parser("closed-form", parents=[common, power], help="reference rate curves")
    c.add_argument("-K", type=int, default=1)
    c.add_argument("--m1", type=complex, default=0j)
    c.add_argument("--m2", type=float, default=1.0)
    c.set_defaults(func=cmd_closed_form)

    c = sub.add_parser("lyapunov", parents=[common, models], help="top Lyapunov exponent or its upper bounds")
    c.add_argument("--lambda", dest="lam", type=_float_list, default=None)
    c.add_argument("-M", type=int, default=10_000)
    c.add_argument("-K", type=int, default=1)
    c.add_argument("--reps", type=int, default=20)
    c.add_argument("--k-max", type=int, default=0, help="emit upper bounds for k = 1..k-max instead")
    c.add_argument("--trials", type=int, default=100_000)
    c.set_defaults(func=cmd_lyapunov)

    c = sub.add_parser("figures", parents=[common, models], help="bound-ladder figure datasets")
    c.add_argument("-K", type=int, default=2)
    c.add_argument("--n-max", type=int, default=8)
    c.add_argument("--trials", type=int, default=100_000)
    c.add_argument("--outdir", default="figures")
    c.set_defaults(func=cmd_figures)

    c = sub.add_parser("selftest", help="run the acceptance checks")
    c.add_argument("--timings", action="store_true", help="append wall time per check (breaks byte-reproducibility)")
    c.set_defaults(func=cmd_selftest)
    return p


def _validate(args) -> None:
    for name in ("M", "K", "trials", "n_max", "reps"):
        val = getattr(args, name, None)
        if val is not None and val < 1:
            raise ConfigError(f"--{name.replace('_', '-')} must be >= 1")
    if getattr(args, "threads", 1) < 0:
        raise ConfigError("--threads must be >= 0")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        _validate(args)
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"jacobi-capacity: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
