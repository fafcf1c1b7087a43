"""Command line entry point: ``genspace <experiment|metrics|visualize|validate>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .errors import AlignmentError, GenspaceError, NoCompletedRuns
from .harness import (METHODS, aggregate_runs, load_config, load_corpus, prepare_run,
                      run_experiment, run_method)
from .metrics import compute_bcs
from .reports import (emit_csv, emit_svg_scatter, read_bcs_csv, read_points_csv,
                      write_bcs_csv, write_correlation_csv, write_points_csv)
from .validation import build_pair_table, correlation_report

log = logging.getLogger("genspace")

IO_ERROR_EXIT = 22


def write_figures(reports, summary, out: Path) -> None:
    from . import plotting

    for r in reports:
        if r.failed or not r.points:
            continue
        title = f"{r.method} run {r.run_index}"
        if r.correlation is not None:
            title += f" (average BC correlation {r.correlation.average_rho:.3f})"
        emit_svg_scatter(r.points, title, out / f"scatter_{r.method}_{r.run_index}.svg")
        plotting.scatter_figure(r.points, title, out / f"scatter_{r.method}_{r.run_index}.png",
                                r.extremal)
    if summary is not None and summary.rows:
        plotting.summary_figure(summary, out / "summary.png")
    if any(r.training is not None for r in reports):
        plotting.training_figure(reports, out / "training.png")


def _config_with_overrides(args):
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config.base_seed = args.seed
    if getattr(args, "output", None):
        config.output_dir = args.output
    return config


def cmd_experiment(args) -> int:
    config = _config_with_overrides(args)
    reports = run_experiment(config)
    summary = aggregate_runs(reports, config.include_failed_as_zero, skip_empty=True)
    out = Path(config.output_dir)
    emit_csv(reports, summary, out)
    if config.figures:
        write_figures(reports, summary, out)
    for row in summary.rows:
        print(f"{row.method:<10} {row.bc:<5} rho={row.mean_rho:+.4f} ± {row.std_rho:.4f} "
              f"p={row.mean_p:.3g}{'*' if row.star else ''}  "
              f"({row.completed} runs, {row.failed} failed)")
    failed = sum(1 for r in reports if r.failed)
    print(f"{len(reports)} run reports ({failed} failed) written to {out}")
    if not summary.rows:
        raise NoCompletedRuns("no method completed any run")
    return 0


def cmd_metrics(args) -> int:
    path = Path(args.level)
    text = path.read_text(encoding="utf-8")
    if args.domain == "boxoban":
        levels = corpus_mod.parse_boxoban(text, corpus_mod.load_alphabet(args.alphabet),
                                          source=str(path))
    else:
        tiles = corpus_mod.load_mario_tiles(args.alphabet)
        raw = corpus_mod.parse_mario(text, tiles.raw, level_id=path.stem, source=str(path))
        levels = [corpus_mod.condense_tiles(raw, tiles.mapping, tiles.condensed)]
    for lvl in levels:
        bcs = compute_bcs(lvl, args.domain)
        prefix = f"{lvl.id}: " if len(levels) > 1 else ""
        print(prefix + " ".join(f"{name}={value:g}" for name, value in bcs.values))
    return 0


def cmd_visualize(args) -> int:
    config = _config_with_overrides(args)
    config.methods = [args.method]
    pools = load_corpus(config)
    data = prepare_run(config, pools, args.run)
    report = run_method(config, args.method, data, args.run)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_bcs_csv(data.test_ids, data.test_bcs, out / f"bcs_{args.method}_{args.run}.csv")
    if report.failed:
        print(f"run failed: {report.failed}", file=sys.stderr)
        return 1
    write_points_csv(report.points, out / f"points_{args.method}_{args.run}.csv")
    write_correlation_csv(report.correlation, out / f"correlation_{args.method}_{args.run}.csv")
    write_figures([report], None, out)
    for bc, rho, p in report.correlation.per_bc:
        print(f"{bc:<5} rho={rho:+.4f} p={p:.3g}")
    print(f"average BC correlation {report.correlation.average_rho:.4f}")
    c, f = report.extremal.closest, report.extremal.farthest
    print(f"closest pair  {c[0]} {c[1]} d={c[2]:.4g}")
    print(f"farthest pair {f[0]} {f[1]} d={f[2]:.4g}")
    return 0


def cmd_validate(args) -> int:
    points = read_points_csv(args.points)
    ids, bcs = read_bcs_csv(args.bcs)
    by_id = dict(zip(ids, bcs))
    missing = [p.level_id for p in points if p.level_id not in by_id]
    if missing:
        raise AlignmentError(f"{len(missing)} points have no BC row, e.g. {missing[0]!r}")
    aligned = [by_id[p.level_id] for p in points]
    report = correlation_report(build_pair_table(points, aligned))
    if args.output:
        write_correlation_csv(report, args.output)
    print("bc,rho,p")
    for bc, rho, p in report.per_bc:
        print(f"{bc},{rho!r},{p!r}")
    print(f"# average_rho={report.average_rho!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genspace",
        description="Visualise level generator output spaces via CNN embeddings + PCA.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("experiment", help="multi-run experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--output", help="override output_dir")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("metrics", help="print the BCs of a level file")
    p.add_argument("--domain", required=True, choices=["boxoban", "mario"])
    p.add_argument("--level", required=True)
    p.add_argument("--alphabet", help="alphabet / tile-mapping JSON")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("visualize", help="single run of one method: points, BCs, plots")
    p.add_argument("--method", required=True, choices=list(METHODS))
    p.add_argument("--config", required=True)
    p.add_argument("--run", type=int, default=0, help="run index (seed offset)")
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--output", help="override output_dir")
    p.set_defaults(func=cmd_visualize)

    p = sub.add_parser("validate", help="correlation report for precomputed points")
    p.add_argument("--points", required=True, help="CSV level_id,generator,pc1,pc2")
    p.add_argument("--bcs", required=True, help="CSV level_id,<bc>,...")
    p.add_argument("--output", help="write bc,rho,p CSV here")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GenspaceError as exc:
        print(f"genspace: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"genspace: error: {exc}", file=sys.stderr)
        return IO_ERROR_EXIT


if __name__ == "__main__":
    sys.exit(main())
