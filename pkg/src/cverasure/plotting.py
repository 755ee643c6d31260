"""Line charts of CLI tables, written as self-contained SVG files."""

from __future__ import annotations

import csv
import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class EmptyTableError(ValueError):
    pass


def read_table(text: str) -> tuple[list[str], list[list[float]]]:
    """Parse CLI CSV text: '#' lines are skipped, the first row is the header.

    Non-numeric columns are dropped.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2:
        raise EmptyTableError("table has no data rows")
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    keep = []
    for j, name in enumerate(header):
        try:
            [float(r[j]) for r in body]
        except (ValueError, IndexError):
            continue
        keep.append(j)
    if len(keep) < 2:
        raise EmptyTableError("need an x column and at least one numeric series")
    return [header[j] for j in keep], [[float(r[j]) for j in keep] for r in body]


def render_svg(header: Sequence[str], rows: Sequence[Sequence[float]], title: str = "") -> str:
    """First column on x, one polyline per remaining column."""
    if not rows:
        raise EmptyTableError("table has no data rows")
    prev_salt = plt.rcParams["svg.hashsalt"]
    plt.rcParams["svg.hashsalt"] = "cverasure"
    try:
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        xs = [r[0] for r in rows]
        for j, name in enumerate(header[1:], start=1):
            ax.plot(xs, [r[j] for r in rows], marker=".", label=name)
        ax.set_xlabel(header[0])
        if title:
            ax.set_title(title)
        ax.legend(fontsize="small")
        ax.grid(alpha=0.3)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    finally:
        plt.rcParams["svg.hashsalt"] = prev_salt
    return buf.getvalue()


def csv_to_svg(csv_text: str, title: str = "") -> str:
    header, rows = read_table(csv_text)
    return render_svg(header, rows, title)
