"""Statistics tables: TSV by default, LaTeX array rows on request."""

from __future__ import annotations

import math
from typing import Sequence

# distribution buckets of output sizes: 0:2, 3:4, 5:8, 9:16, ...
def bucket_of(n: int) -> int:
    if n <= 2:
        return 0
    return max(0, math.ceil(math.log2(n)) - 1)


def bucket_label(k: int) -> str:
    if k == 0:
        return "0:2"
    return f"{2 ** k + 1}:{2 ** (k + 1)}"


def fmt(v) -> str:
    if isinstance(v, float):
        if v != v:
            return "nan"
        return f"{v:.2f}"
    return str(v)


def pct(num: float, den: float) -> str:
    return f"{100.0 * num / den:.1f}%" if den else "-"


def geo_mean(values: Sequence[int]) -> float:
    """Geometric mean with zero sizes counted as 1."""
    if not values:
        return float("nan")
    return math.exp(sum(math.log(max(v, 1)) for v in values) / len(values))


def render(header: Sequence[str], rows: Sequence[Sequence], latex: bool = False) -> str:
    if latex:
        cols = "|" + "|".join("r" for _ in header) + "|"
        out = [f"\\begin{{array}}{{{cols}}}\\hline",
               " & ".join(header) + " \\\\\\hline"]
        for r in rows:
            out.append(" & ".join(fmt(v).replace("%", "\\%") for v in r) + " \\\\")
        out.append("\\hline\n\\end{array}")
        return "\n".join(out) + "\n"
    lines = ["\t".join(header)]
    lines.extend("\t".join(fmt(v) for v in r) for r in rows)
    return "\n".join(lines) + "\n"
