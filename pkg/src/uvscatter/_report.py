"""Deterministic CSV and SVG emission for the command-line front end.

CSV rows follow RFC 4180 (CRLF line ends, '.' decimal separator) with
floats printed to 17 significant digits, so identical runs produce
byte-identical files.  SVG plots are rendered from the already-computed
rows with a pinned hash salt and no timestamp metadata, which keeps them
byte-stable too.
"""

from __future__ import annotations

import csv
import io
import sys
from typing import Optional

__all__ = ["format_cell", "render_svg", "write_csv"]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Optional[str], header, rows) -> None:
    """Write rows to ``path`` or stdout; every cell goes through format_cell."""
    if path is None:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])
        sys.stdout.write(buffer.getvalue())
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])


def _numeric(cell) -> Optional[float]:
    if isinstance(cell, (int, float)) and not isinstance(cell, bool):
        return float(cell)
    return None


def _grouped_series(rows, x_index, y_index, label_indices):
    """Split rows into {label: ([x], [y])} keeping row order, skipping rows
    whose x or y cell is not numeric."""
    groups = {}
    for row in rows:
        x, y = _numeric(row[x_index]), _numeric(row[y_index])
        if x is None or y is None:
            continue
        label = " ".join(str(row[i]) for i in label_indices if str(row[i]))
        groups.setdefault(label or "value", ([], []))
        groups[label or "value"][0].append(x)
        groups[label or "value"][1].append(y)
    return groups


def render_svg(path: str, kind: str, header, rows, salt: str) -> None:
    """Render one figure for the given table kind to ``path``.

    ``kind`` is the subcommand name; tables without a natural plot
    (channel constants, penalties) render a simple bar chart.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": salt, "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        if kind in ("ber-sweep", "mc"):
            groups = _grouped_series(rows, header.index("snr_db"),
                                     header.index("error_rate"),
                                     (header.index("scheme"), header.index("method")))
            for label in sorted(groups):
                xs, ys = groups[label]
                ax.semilogy(xs, ys, marker="o", label=label)
            ax.set_xlabel("mean SNR (dB)")
            ax.set_ylabel("error rate")
        elif kind == "pdf":
            groups = _grouped_series(rows, header.index("i_n"),
                                     header.index("density"),
                                     (header.index("method"),))
            for label in sorted(groups):
                xs, ys = groups[label]
                ax.loglog(xs, ys, marker=".", label=label)
            ax.set_xlabel("normalized irradiance")
            ax.set_ylabel("probability density")
        elif kind == "geom-sweep":
            groups = _grouped_series(
                rows, header.index("theta_r_deg"), header.index("ber"),
                (header.index("scheme"), header.index("alpha1")),
            )
            for label in sorted(groups):
                xs, ys = groups[label]
                ax.semilogy(xs, ys, marker="o", label=label)
            ax.set_xlabel("receiver elevation (deg)")
            ax.set_ylabel("bit error rate")
        else:
            labels = [str(row[0]) for row in rows]
            values = [(_numeric(row[2]) or 0.0) for row in rows]
            ax.bar(range(len(rows)), values)
            ax.set_xticks(range(len(rows)))
            ax.set_xticklabels(labels, rotation=30, ha="right")
            ax.set_ylabel(header[2] if len(header) > 2 else "value")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
        ax.set_title(salt)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
