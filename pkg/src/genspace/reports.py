"""CSV and SVG outputs."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .compression import ProjectedPoint
from .harness import RunReport, SummaryRow, SummaryTable
from .metrics import BCVector

RUNS_HEADER = ["run_index", "method", "bc", "rho", "p", "failed"]
SUMMARY_HEADER = ["method", "bc", "mean_rho", "std_rho", "mean_p", "std_p", "star",
                  "completed", "failed"]
POINTS_HEADER = ["level_id", "generator", "pc1", "pc2"]
EXTREMAL_HEADER = ["run_index", "method", "kind", "id_a", "id_b", "distance"]
TRAINING_HEADER = ["run_index", "method", "epoch", "loss", "seconds"]

# Tableau-10 plus two extras; cycles after 12 generators
PALETTE = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
           "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1f77b4", "#8c564b"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _writer(path: Path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_points_csv(points: Sequence[ProjectedPoint], path: str | Path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(POINTS_HEADER)
        for p in points:
            w.writerow([p.level_id, p.generator, _fmt(p.pc1), _fmt(p.pc2)])


def read_points_csv(path: str | Path) -> list[ProjectedPoint]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [ProjectedPoint(r["level_id"], float(r["pc1"]), float(r["pc2"]),
                               r.get("generator") or "")
                for r in csv.DictReader(fh)]


def write_bcs_csv(ids: Sequence[str], bcs: Sequence[BCVector], path: str | Path) -> None:
    names = list(bcs[0].names) if bcs else []
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["level_id"] + names)
        for lid, b in zip(ids, bcs):
            w.writerow([lid] + [_fmt(v) for v in b.as_array()])


def read_bcs_csv(path: str | Path, domain: str = "") -> tuple[list[str], list[BCVector]]:
    """Level ids and BC vectors; every column except level_id/generator is a BC."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        names = [c for c in reader.fieldnames or [] if c not in ("level_id", "generator")]
        ids, vecs = [], []
        for r in reader:
            ids.append(r["level_id"])
            vecs.append(BCVector(domain, tuple((n, float(r[n])) for n in names)))
    return ids, vecs


def emit_csv(reports: Sequence[RunReport], summary: SummaryTable | None,
             output_dir: str | Path) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    fh, w = _writer(out / "runs.csv")
    with fh:
        w.writerow(RUNS_HEADER)
        for r in reports:
            if r.failed:
                for bc in r.bc_names:
                    w.writerow([r.run_index, r.method, bc, "", "", 1])
            else:
                for bc, rho, p in r.correlation.per_bc:
                    w.writerow([r.run_index, r.method, bc, _fmt(rho), _fmt(p), 0])
    written.append(out / "runs.csv")

    write_summary_csv(summary, out / "summary.csv")
    written.append(out / "summary.csv")

    fh, w = _writer(out / "extremal.csv")
    with fh:
        w.writerow(EXTREMAL_HEADER)
        for r in reports:
            if r.extremal is None or r.failed:
                continue
            for kind, (a, b, d) in (("closest", r.extremal.closest),
                                    ("farthest", r.extremal.farthest)):
                w.writerow([r.run_index, r.method, kind, a, b, _fmt(d)])
    written.append(out / "extremal.csv")

    fh, w = _writer(out / "training.csv")
    with fh:
        w.writerow(TRAINING_HEADER)
        for r in reports:
            if r.training is None:
                continue
            for epoch, (loss, secs) in enumerate(zip(r.training.losses, r.training.seconds), 1):
                w.writerow([r.run_index, r.method, epoch, _fmt(loss), f"{secs:.3f}"])
    written.append(out / "training.csv")

    for r in reports:
        if r.points and not r.failed:
            path = out / f"points_{r.method}_{r.run_index}.csv"
            write_points_csv(r.points, path)
            written.append(path)
    return written


def write_summary_csv(summary: SummaryTable | None, path: str | Path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(SUMMARY_HEADER)
        for row in (summary.rows if summary else []):
            w.writerow([row.method, row.bc, _fmt(row.mean_rho), _fmt(row.std_rho),
                        _fmt(row.mean_p), _fmt(row.std_p), "*" if row.star else "",
                        row.completed, row.failed])


def read_summary_csv(path: str | Path) -> SummaryTable:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [SummaryRow(r["method"], r["bc"], float(r["mean_rho"]), float(r["std_rho"]),
                           float(r["mean_p"]), float(r["std_p"]), r["star"] == "*",
                           int(r["completed"]), int(r["failed"]))
                for r in csv.DictReader(fh)]
    return SummaryTable(rows)


def write_correlation_csv(report, path: str | Path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["bc", "rho", "p"])
        for bc, rho, p in report.per_bc:
            w.writerow([bc, _fmt(rho), _fmt(p)])


def generator_colors(generators: Sequence[str]) -> dict[str, str]:
    labels = sorted(set(generators))
    return {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(labels)}


def _axis_range(values):
    lo, hi = min(values), max(values)
    span = hi - lo
    if span == 0:
        return lo - 1.0, hi + 1.0
    return lo - 0.05 * span, hi + 0.05 * span


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def emit_svg_scatter(points: Sequence[ProjectedPoint], title: str, path: str | Path,
                     width: int = 720, height: int = 520) -> Path:
    """Standalone SVG scatter plot, one circle per point, coloured by generator."""
    if not points:
        raise ValueError("cannot plot an empty point set")
    colors = generator_colors([p.generator for p in points])
    left, right, top, bottom = 70, 170, 40, 60
    pw, ph = width - left - right, height - top - bottom
    x0, x1 = _axis_range([p.pc1 for p in points])
    y0, y1 = _axis_range([p.pc2 for p in points])

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.2f}" y="{top - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<g class="axes" stroke="black" stroke-width="1">'
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/></g>',
    ]
    tick_text = []
    for v in _ticks(x0, x1):
        tick_text.append(f'<line x1="{sx(v):.2f}" y1="{top + ph}" x2="{sx(v):.2f}" '
                         f'y2="{top + ph + 5}" stroke="black"/>')
        tick_text.append(f'<text x="{sx(v):.2f}" y="{top + ph + 18}" text-anchor="middle">'
                         f'{v:.3g}</text>')
    for v in _ticks(y0, y1):
        tick_text.append(f'<line x1="{left - 5}" y1="{sy(v):.2f}" x2="{left}" '
                         f'y2="{sy(v):.2f}" stroke="black"/>')
        tick_text.append(f'<text x="{left - 8}" y="{sy(v) + 4:.2f}" text-anchor="end">'
                         f'{v:.3g}</text>')
    out.append('<g class="ticks" font-family="sans-serif" font-size="11">'
               + "".join(tick_text) + "</g>")
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 15}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13">PC1</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {top + ph / 2:.2f})">PC2</text>')
    out.append('<g class="points" fill-opacity="0.75">')
    for p in points:
        out.append(f'<circle cx="{sx(p.pc1):.2f}" cy="{sy(p.pc2):.2f}" r="4" '
                   f'fill="{colors[p.generator]}"><title>{escape(p.level_id)}</title></circle>')
    out.append("</g>")
    out.append('<g class="legend" font-family="sans-serif" font-size="12">')
    for k, (gen, color) in enumerate(colors.items()):
        y = top + 10 + 20 * k
        out.append(f'<g class="legend-entry"><rect x="{left + pw + 20}" y="{y - 9}" width="12" '
                   f'height="12" fill="{color}"/><text x="{left + pw + 38}" y="{y + 2}">'
                   f'{escape(gen or "(unlabelled)")}</text></g>')
    out.append("</g>")
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path

