"""Report artifacts: delimited summaries, trace files, and acceptance plots.

The summary CSV uses UTF-8, LF line endings, '.' decimal separators, and 10
significant digits.  The acceptance plot is written twice: as a
self-contained SVG built here (one polyline per sampler, every marker carries
its value in a <title> element, no external resources), and as a PNG rendered
with matplotlib for quick viewing.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

SUMMARY_HEADER = (
    "grid_value,sampler,avg_accept,se,accept_per_draw,"
    "decision_mpmc_frac,decision_sve_frac,seed_count"
)
SUMMARY_COMMENT = (
    "# avg_accept: per-iteration mean of min(acceptance ratio, 1), averaged across seeds"
)

_SAMPLER_COLORS = {
    "MH": "#7f7f7f",
    "PMC": "#9467bd",
    "MPMC": "#1f77b4",
    "SVE": "#2ca02c",
    "MABMC": "#d62728",
}


def _fmt10(value: float) -> str:
    return format(value, ".10g")


def _fmt17(value: float) -> str:
    return format(value, ".17g")


def _fmt_theta(theta) -> str:
    if isinstance(theta, float):
        return _fmt17(theta)
    return str(theta)


def write_trace_csv(trace, path) -> None:
    """Per-iteration chain record, one row per iteration."""
    lines = [
        "iteration,theta_before,theta_proposed,decision,log_ratio,"
        "accept_prob,accepted,sampler_calls"
    ]
    for r in trace.records:
        lines.append(
            f"{r.iteration},{_fmt_theta(r.theta_before)},{_fmt_theta(r.theta_proposed)},"
            f"{r.decision or ''},{_fmt17(r.log_ratio)},{_fmt17(r.accept_prob)},"
            f"{int(r.accepted)},{r.sampler_calls}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_summary_csv(summary, path) -> None:
    """One row per (grid point, sampler); empty fields where undefined."""
    lines = [SUMMARY_COMMENT, SUMMARY_HEADER]
    for row in summary.rows:
        per_draw = "" if row.accept_per_draw is None else _fmt10(row.accept_per_draw)
        frac_m = "" if row.decision_mpmc_frac is None else _fmt10(row.decision_mpmc_frac)
        frac_s = "" if row.decision_sve_frac is None else _fmt10(row.decision_sve_frac)
        lines.append(
            f"{_fmt10(row.grid_value)},{row.sampler},{_fmt10(row.avg_accept)},"
            f"{_fmt10(row.se)},{per_draw},{frac_m},{frac_s},{row.seed_count}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _axis_range(values, pad_fraction=0.08, fallback_pad=0.05):
    lo, hi = min(values), max(values)
    if hi - lo <= 0:
        return lo - fallback_pad, hi + fallback_pad
    pad = (hi - lo) * pad_fraction
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, count: int = 5):
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def emit_plot_svg(summary, path) -> None:
    """Self-contained SVG of average acceptance vs grid value.

    One polyline per sampler (markers only when the grid has a single point);
    labeled axes and a legend; every marker embeds its numeric value, printed
    with the same precision as the summary CSV.
    """
    samplers = []
    for row in summary.rows:
        if row.sampler not in samplers:
            samplers.append(row.sampler)
    if not summary.rows:
        raise ValueError("cannot plot an empty summary")

    width, height = 640.0, 440.0
    left, right, top, bottom = 72.0, 24.0, 40.0, 58.0
    plot_w, plot_h = width - left - right, height - top - bottom

    xs = sorted({row.grid_value for row in summary.rows})
    x_lo, x_hi = _axis_range(xs, fallback_pad=0.5)
    y_lo, y_hi = _axis_range([row.avg_accept for row in summary.rows])

    def sx(v: float) -> float:
        return left + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return top + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        f'<rect x="0" y="0" width="{width:g}" height="{height:g}" fill="white"/>',
        f'<text x="{width / 2:.2f}" y="22" font-family="sans-serif" font-size="15" '
        f'text-anchor="middle">{escape(summary.experiment)}: average acceptance probability</text>',
    ]

    # axes
    x_axis_y = top + plot_h
    parts.append(
        f'<line x1="{left:.2f}" y1="{x_axis_y:.2f}" x2="{left + plot_w:.2f}" '
        f'y2="{x_axis_y:.2f}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{left:.2f}" y1="{top:.2f}" x2="{left:.2f}" y2="{x_axis_y:.2f}" '
        'stroke="black" stroke-width="1"/>'
    )
    for tick in _ticks(x_lo, x_hi):
        x = sx(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{x_axis_y:.2f}" x2="{x:.2f}" y2="{x_axis_y + 5:.2f}" '
            'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{x_axis_y + 20:.2f}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{format(tick, ".4g")}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        y = sy(tick)
        parts.append(
            f'<line x1="{left - 5:.2f}" y1="{y:.2f}" x2="{left:.2f}" y2="{y:.2f}" '
            'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 9:.2f}" y="{y + 4:.2f}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{format(tick, ".4g")}</text>'
        )
    x_label = summary.grid_label or "grid value"
    parts.append(
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 14:.2f}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="20" y="{top + plot_h / 2:.2f}" font-family="sans-serif" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 20 {top + plot_h / 2:.2f})">'
        "average acceptance probability</text>"
    )

    for sampler in samplers:
        color = _SAMPLER_COLORS.get(sampler, "#000000")
        rows = sorted(
            (r for r in summary.rows if r.sampler == sampler), key=lambda r: r.grid_value
        )
        if len(rows) >= 2:
            points = " ".join(f"{sx(r.grid_value):.2f},{sy(r.avg_accept):.2f}" for r in rows)
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>'
            )
        for r in rows:
            parts.append(
                f'<circle cx="{sx(r.grid_value):.2f}" cy="{sy(r.avg_accept):.2f}" r="3.5" '
                f'fill="{color}"><title>{escape(sampler)} {escape(x_label)}='
                f"{_fmt10(r.grid_value)} avg_accept={_fmt10(r.avg_accept)}</title></circle>"
            )

    legend_x = left + plot_w - 110
    legend_y = top + 10
    for i, sampler in enumerate(samplers):
        color = _SAMPLER_COLORS.get(sampler, "#000000")
        y = legend_y + 18 * i
        parts.append(
            f'<line x1="{legend_x:.2f}" y1="{y:.2f}" x2="{legend_x + 26:.2f}" y2="{y:.2f}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{legend_x + 32:.2f}" y="{y + 4:.2f}" font-family="sans-serif" '
            f'font-size="12">{escape(sampler)}</text>'
        )

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def emit_plot_png(summary, path) -> None:
    """Matplotlib rendering of the same acceptance curves."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    samplers = []
    for row in summary.rows:
        if row.sampler not in samplers:
            samplers.append(row.sampler)
    for sampler in samplers:
        rows = sorted(
            (r for r in summary.rows if r.sampler == sampler), key=lambda r: r.grid_value
        )
        xs = [r.grid_value for r in rows]
        ys = [r.avg_accept for r in rows]
        errs = [r.se for r in rows]
        color = _SAMPLER_COLORS.get(sampler)
        if any(e > 0 for e in errs):
            ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3, label=sampler, color=color)
        else:
            ax.plot(xs, ys, marker="o", label=sampler, color=color)
    ax.set_xlabel(summary.grid_label or "grid value")
    ax.set_ylabel("average acceptance probability")
    ax.set_title(f"{summary.experiment}: average acceptance probability")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
