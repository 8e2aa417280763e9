"""Degree-distribution tail fit for generated topologies.

The check is deliberately tail-only: the growth model is expected to show
deviations among the many low-degree nodes, so the regression runs over
degrees at or above the median. Fewer than three distinct tail degrees
cannot anchor a line and come back flagged degenerate instead of fitted.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .series import AnalysisError


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float | None  # magnitude of the CCDF log-log slope
    r_squared: float | None
    tail_points: int
    degenerate: bool


def graph_degrees(graph) -> list[int]:
    """Degree sequence from a networkx-style graph or a plain iterable."""
    if hasattr(graph, "degree"):
        return [int(d) for _, d in graph.degree()]
    return [int(d) for d in graph]


def degree_ccdf(degrees: Iterable[int]) -> list[tuple[int, float]]:
    """(degree, fraction of nodes with degree >= that) for observed degrees."""
    counts = Counter(int(d) for d in degrees)
    n = sum(counts.values())
    if n == 0:
        raise AnalysisError("empty degree sequence")
    points = []
    above = n
    for deg in sorted(counts):
        points.append((deg, above / n))
        above -= counts[deg]
    return points


def degree_powerlaw_fit(graph, min_nodes: int = 50) -> PowerLawFit:
    degrees = graph_degrees(graph)
    if len(degrees) < min_nodes:
        raise AnalysisError(
            f"need at least {min_nodes} nodes for a degree fit, got {len(degrees)}")
    if min(degrees) == max(degrees):
        raise AnalysisError("all node degrees equal: nothing to fit")

    median = float(np.median(degrees))
    tail = [(d, f) for d, f in degree_ccdf(degrees) if d >= median and d > 0]
    if len(tail) < 3:
        return PowerLawFit(exponent=None, r_squared=None,
                           tail_points=len(tail), degenerate=True)

    x = np.log10([d for d, _ in tail])
    y = np.log10([f for _, f in tail])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(exponent=float(abs(slope)), r_squared=r2,
                       tail_points=len(tail), degenerate=False)
