"""Command-line interface.

Exit codes: 0 success (or check PASS), 2 check FAIL, 1 any error,
including usage errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import secrets
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .errors import NoiseCheckError
from .io_formats import (
    parse_curve_csv,
    parse_dataset,
    parse_embeddings,
    to_json,
    write_curve_csv,
    write_dataset,
    write_embeddings,
    write_report_csv,
    write_svg_chart,
)
from .meta_stability import ExperimentConfig, k_sweep_curves, stability_experiment
from .sanity_check import EpsilonGrid, run_check
from .stats_core import roughness
from .synthetic import PRESETS, SyntheticSpec, generate
from .vector_space import NoiseShape, Purpose, SeedSpec

log = logging.getLogger("noisecheck")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
SEED_ENV = "NOISECHECK_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _seed(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{SEED_ENV}: {exc}") from None
    seed = secrets.randbits(63)
    print(f"seed: {seed} (drawn; pass --seed {seed} to reproduce)", file=sys.stderr)
    return seed


def _n_pairs(args) -> int | None:
    if getattr(args, "preset", None):
        return PRESETS[args.preset]
    return getattr(args, "pairs", None)


def _write(path: str | os.PathLike, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _add_synthetic_args(p: argparse.ArgumentParser, required: bool) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--pairs", type=int, help="number of synthetic pairs (>= 2)")
    g.add_argument("--preset", choices=sorted(PRESETS), help="synthetic size preset: " +
                   ", ".join(f"{k}={v}" for k, v in PRESETS.items()))
    p.add_argument("--dim", type=int, default=100, help="vector dimension (default 100)")


def _add_noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps-max", type=float, default=3.0, help="largest noise magnitude (default 3.0)")
    p.add_argument("--eps-steps", type=int, default=31, help="grid levels including 0 (default 31)")
    p.add_argument("--shape", choices=[s.value for s in NoiseShape], default=NoiseShape.PER_COORDINATE.value)
    p.add_argument("--tolerance", type=float, default=0.0, help="allowed rise between levels (default 0)")
    p.add_argument("--seed", type=_seed, default=None,
                   help=f"master seed; falls back to ${SEED_ENV}, else one is drawn and printed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisecheck", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic dataset and its embeddings")
    _add_synthetic_args(p, required=True)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--out", required=True, help="dataset TSV path")
    p.add_argument("--emb", required=True, help="embedding text file path")

    p = sub.add_parser("check", help="run the sanity check on one dataset")
    _add_synthetic_args(p, required=False)
    p.add_argument("--dataset", help="dataset file (word_a word_b score)")
    p.add_argument("--emb", help="embeddings in word2vec text format (with --dataset)")
    p.add_argument("--delimiter", choices=["whitespace", "tab", "comma"], default="whitespace")
    p.add_argument("-k", "--k", type=int, default=5, help="noise samples per level (default 5)")
    _add_noise_args(p)
    p.add_argument("--curve-out", help="curve CSV path")
    p.add_argument("--svg-out", help="SVG chart path")
    p.add_argument("--json-out", help="verdict JSON path")

    p = sub.add_parser("meta", help="pass-rate experiment over dataset sizes and k")
    p.add_argument("--sizes", type=_int_list, default=[30, 65, 3000])
    p.add_argument("--ks", type=_int_list, default=[5, 10, 50, 250, 500])
    p.add_argument("--reps", type=int, default=100, help="repetitions per cell (default 100)")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--fixed-dataset", action="store_true", help="reuse one dataset per size")
    _add_noise_args(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes; outputs do not depend on it")
    p.add_argument("--out", help="report CSV path")
    p.add_argument("--json", dest="json_out", help="report JSON path")
    p.add_argument("--runs-out", help="per-repetition audit JSON path")

    p = sub.add_parser("sweep", help="one curve per k over a single synthetic dataset")
    _add_synthetic_args(p, required=True)
    p.add_argument("--ks", type=_int_list, default=[5, 10, 50, 250, 500])
    _add_noise_args(p)
    p.add_argument("--out-dir", help="directory for one curve CSV per k")
    p.add_argument("--svg-out", help="SVG chart path")

    p = sub.add_parser("plot", help="draw curve CSVs into one SVG")
    p.add_argument("curves", nargs="*", help="curve CSV files")
    p.add_argument("--out", required=True, help="SVG path")
    p.add_argument("--title", default="")
    return parser


def _grid(args) -> EpsilonGrid:
    if args.eps_steps < 2 or not args.eps_max > 0:
        raise UsageError("--eps-max must be > 0 and --eps-steps >= 2")
    return EpsilonGrid.linear(args.eps_max, args.eps_steps)


def _provenance(args, seed: int, **extra: Any) -> dict[str, Any]:
    prov: dict[str, Any] = {"tool": f"noisecheck {__version__}", "command": args.command, "seed": seed}
    for name in ("eps_max", "eps_steps", "shape", "tolerance", "dim", "k"):
        if hasattr(args, name):
            prov[name] = getattr(args, name)
    prov.update(extra)
    return prov


def cmd_generate(args) -> int:
    n = _n_pairs(args)
    if n is None or n < 2:
        raise UsageError("--pairs must be at least 2")
    if args.dim < 1:
        raise UsageError("--dim must be at least 1")
    seed = _resolve_seed(args)
    ds, table = generate(SyntheticSpec(n, args.dim, SeedSpec(seed, Purpose.DATASET)))
    _write(args.out, write_dataset(ds))
    _write(args.emb, write_embeddings(table))
    print(f"generated n={n} d={args.dim} seed={seed}: {args.out}, {args.emb}")
    return EXIT_OK


def cmd_check(args) -> int:
    n = _n_pairs(args)
    if (n is None) == (args.dataset is None):
        raise UsageError("give exactly one of --pairs/--preset or --dataset")
    if args.k < 1:
        raise UsageError("-k must be at least 1")
    grid = _grid(args)
    seed = _resolve_seed(args)
    if args.dataset is not None:
        if args.emb is None:
            raise UsageError("--dataset needs --emb")
        with open(args.dataset, encoding="utf-8") as fh:
            ds = parse_dataset(fh, args.delimiter, name=args.dataset, label=Path(args.dataset).stem)
        with open(args.emb, encoding="utf-8") as fh:
            table = parse_embeddings(fh, name=args.emb)
        source = {"dataset": args.dataset, "embeddings": args.emb}
    else:
        if n < 2:
            raise UsageError("--pairs must be at least 2")
        ds, table = generate(SyntheticSpec(n, args.dim, SeedSpec(seed, Purpose.DATASET)))
        source = {"n_pairs": n}
    verdict = run_check(ds, table, grid, args.k, NoiseShape(args.shape), args.tolerance,
                        SeedSpec(seed, Purpose.NOISE))
    prov = _provenance(args, seed, **source)
    if args.curve_out:
        _write(args.curve_out, write_curve_csv(verdict.curve, prov))
    if args.svg_out:
        comment = "; ".join(f"{k}={v}" for k, v in prov.items())
        _write(args.svg_out, write_svg_chart([verdict.curve], comment=comment))
    if args.json_out:
        _write(args.json_out, to_json(verdict))
    if verdict.passed:
        print(f"PASS ({len(ds)} pairs, k={args.k}, seed={seed})")
        return EXIT_OK
    i = verdict.first_violation
    pts = verdict.curve.points
    print(f"FAIL at epsilon={verdict.violation_epsilon:g} (level {i}): "
          f"mean rho rose from {pts[i - 1].mean_rho:.6f} to {pts[i].mean_rho:.6f} "
          f"({len(ds)} pairs, k={args.k}, seed={seed})")
    return EXIT_FAIL


def cmd_meta(args) -> int:
    if args.reps < 1 or args.jobs < 1:
        raise UsageError("--reps and --jobs must be at least 1")
    if min(args.sizes) < 2 or min(args.ks) < 1:
        raise UsageError("sizes must be >= 2 and ks >= 1")
    grid = _grid(args)
    seed = _resolve_seed(args)
    cfg = ExperimentConfig(grid, NoiseShape(args.shape), args.tolerance, args.dim, args.fixed_dataset)
    report = stability_experiment(args.sizes, args.ks, args.reps, cfg, seed, jobs=args.jobs)
    prov = _provenance(args, seed, sizes=",".join(map(str, args.sizes)),
                       ks=",".join(map(str, args.ks)), reps=args.reps,
                       fixed_dataset=args.fixed_dataset)
    if args.out:
        _write(args.out, write_report_csv(report, prov))
    if args.json_out:
        _write(args.json_out, to_json(report))
    if args.runs_out:
        _write(args.runs_out, to_json(report, include_runs=True))
    print(f"{'n':>6} {'k':>5} {'pass_rate':>10} {'stderr':>8} {'roughness':>10}")
    for c in report.cells:
        print(f"{c.n_pairs:>6} {c.k:>5} {c.pass_rate:>10.3f} {c.pass_rate_stderr:>8.3f} {c.mean_roughness:>10.5f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    n = _n_pairs(args)
    if n is None or n < 2:
        raise UsageError("--pairs must be at least 2")
    if min(args.ks) < 1:
        raise UsageError("ks must be >= 1")
    grid = _grid(args)
    seed = _resolve_seed(args)
    cfg = ExperimentConfig(grid, NoiseShape(args.shape), args.tolerance, args.dim)
    curves = k_sweep_curves(n, args.ks, cfg, seed)
    prov = _provenance(args, seed, n_pairs=n)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for k, c in zip(args.ks, curves):
            _write(out / f"k{k}.csv", write_curve_csv(c, {**prov, "k": k}))
    if args.svg_out:
        _write(args.svg_out, write_svg_chart(curves, title=f"n={n}"))
    for k, c in zip(args.ks, curves):
        print(f"k={k:>4}  roughness={roughness(c.means):.5f}  tail rho={c.means[-1]:.4f}")
    return EXIT_OK


def cmd_plot(args) -> int:
    if not args.curves:
        raise UsageError("plot needs at least one curve CSV")
    curves = []
    for path in args.curves:
        with open(path, encoding="utf-8") as fh:
            curves.append(parse_curve_csv(fh, name=path, label=Path(path).stem))
    _write(args.out, write_svg_chart(curves, title=args.title))
    print(f"wrote {args.out} ({len(curves)} curve(s))")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "check": cmd_check,
    "meta": cmd_meta,
    "sweep": cmd_sweep,
    "plot": cmd_plot,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"noisecheck: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (NoiseCheckError, OSError) as exc:
        print(f"noisecheck: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
