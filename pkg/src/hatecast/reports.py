"""Plain-text rendering of the TSV report tables."""

from __future__ import annotations


def render_aligned(tsv_text: str) -> str:
    rows = [line.split("\t") for line in tsv_text.strip().splitlines() if line]
    if not rows:
        return ""
    widths = [0] * max(len(r) for r in rows)
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = []
    for k, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(row))))
    return "\n".join(lines) + "\n"
