"""Human-readable summaries of metric and attack reports."""
from __future__ import annotations

from pathlib import Path
from typing import List
from xml.sax.saxutils import escape

from .io import ReportEnvelope, atomic_write
from .metrics import METRICS


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def metric_table(metrics: dict) -> List[str]:
    summary = metrics.get("summary", {})
    head = f"{'metric':<22}{'min':>6}{'p5':>6}{'p25':>6}{'p50':>6}{'p75':>6}{'p95':>6}{'max':>7}{'mean':>9}"
    lines = [head, "-" * len(head)]
    for name in METRICS:
        s = summary.get(name)
        if not s:
            continue
        q = s["quantiles"]
        lines.append(
            f"{name:<22}{_fmt(s['min']):>6}{_fmt(q['5']):>6}{_fmt(q['25']):>6}"
            f"{_fmt(q['50']):>6}{_fmt(q['75']):>6}{_fmt(q['95']):>6}{_fmt(s['max']):>7}"
            f"{_fmt(s['mean']):>9}")
    return lines


def render_text(env: ReportEnvelope) -> str:
    lines = [f"geokanon {env.kind} report (tool {env.tool_version})"]
    if env.metrics is not None:
        m = env.metrics
        cfg = m.get("config", {})
        method = (cfg.get("method") or {}).get("descriptor", "none")
        lines.append(f"records: {cfg.get('n_records')}  universe: {cfg.get('universe_size')}  "
                     f"method: {method}")
        lines.append("")
        lines += metric_table(m)
        check = env.metrics.get("threshold_check")
        if check:
            lines.append("")
            shown = env.metrics.get("threshold")
            label = f"minimum-k check (k >= {shown})" if shown is not None else "minimum-k check"
            lines.append(label + ":")
            for name, ok in check.items():
                lines.append(f"  {name:<22}{'pass' if ok else 'FAIL'}")
        for note in m.get("notes", []):
            lines.append(f"note: {note}")
        for w in m.get("warnings", []):
            lines.append(f"warning: {w}")
    if env.attack is not None:
        a = env.attack
        agg = a.get("aggregate", {})
        lines.append(f"scenario {a.get('scenario')}  strategy {a.get('strategy')}")
        for key in ("queries", "scored", "structural_misses", "correct_count",
                    "unique_correct_count", "success_rate", "overall_success_rate",
                    "mean_candidate_set_size", "predicted_rate", "no_candidate_count"):
            lines.append(f"  {key:<26}{_fmt(agg.get(key))}")
        if a.get("total_cost") is not None:
            lines.append(f"  {'total_cost':<26}{_fmt(a['total_cost'])}")
        for w in a.get("warnings", []):
            lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def histogram_svg(name: str, histogram: dict, width: int = 480, height: int = 240) -> str:
    """Bar chart of a ``{k: count}`` histogram as standalone SVG."""
    items = sorted((int(k), int(v)) for k, v in histogram.items())
    pad, top = 40, 24
    inner_w, inner_h = width - 2 * pad, height - pad - top
    peak = max((v for _, v in items), default=1) or 1
    bar = inner_w / max(1, len(items))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13">{escape(name)}</text>',
        f'<line x1="{pad}" y1="{top + inner_h}" x2="{pad + inner_w}" y2="{top + inner_h}" '
        'stroke="black"/>',
    ]
    for i, (k, v) in enumerate(items):
        h = inner_h * v / peak
        x = pad + i * bar
        parts.append(f'<rect x="{x + 1:.1f}" y="{top + inner_h - h:.1f}" width="{max(bar - 2, 1):.1f}" '
                     f'height="{h:.1f}" fill="#4a78a8"><title>k={k}: {v}</title></rect>')
        if len(items) <= 30 or i % max(1, len(items) // 15) == 0:
            parts.append(f'<text x="{x + bar / 2:.1f}" y="{top + inner_h + 14}" '
                         f'text-anchor="middle" font-family="sans-serif" font-size="10">{k}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_histograms(env: ReportEnvelope, directory) -> List[Path]:
    if env.metrics is None:
        return []
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, s in env.metrics.get("summary", {}).items():
        path = directory / f"{name}.svg"
        svg = histogram_svg(name, s.get("histogram", {}))
        atomic_write(path, lambda fh, svg=svg: fh.write(svg), newline="")
        out.append(path)
    return out
