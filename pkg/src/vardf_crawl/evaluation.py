"""Query-level precision, recall and F-measure.

S counts queries that brought at least one new document, U queries that
returned only documents already seen, N queries that returned nothing.
P = S/(S+U), R = S/(S+N). Metrics whose denominator is zero are None.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable

from .greedy import Classification, QueryOutcome


def tally(outcomes: Iterable[QueryOutcome]) -> tuple[int, int, int]:
    s = u = n = 0
    for outcome in outcomes:
        if outcome.classification is Classification.SUCCESSFUL:
            s += 1
        elif outcome.classification is Classification.UNSUCCESSFUL:
            u += 1
        else:
            n += 1
    return s, u, n


@dataclass(frozen=True)
class MetricsReport:
    s: int
    u: int
    n: int
    precision: float | None
    recall: float | None
    f_measure: float | None
    alpha: float = 1.0

    @property
    def total(self) -> int:
        return self.s + self.u + self.n

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "u": self.u,
            "n": self.n,
            "precision": sig6(self.precision),
            "recall": sig6(self.recall),
            "f_measure": sig6(self.f_measure),
            "alpha": sig6(self.alpha),
        }

    def table(self) -> str:
        rows = [
            ("successful (S)", str(self.s)),
            ("unsuccessful (U)", str(self.u)),
            ("no results (N)", str(self.n)),
            ("precision", format_percent(self.precision)),
            ("recall", format_percent(self.recall)),
            (f"F (alpha={self.alpha:g})", format_percent(self.f_measure)),
        ]
        width = max(len(label) for label, _ in rows)
        return "\n".join(f"{label:<{width}}  {value}" for label, value in rows)

    def summary_line(self) -> str:
        return (
            f"P={format_percent(self.precision)}, "
            f"R={format_percent(self.recall)}, "
            f"F={format_percent(self.f_measure)}"
        )


def compute_metrics(s: int, u: int, n: int, alpha: float = 1.0) -> MetricsReport:
    if min(s, u, n) < 0:
        raise ValueError("counts must be non-negative")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    precision = s / (s + u) if s + u else None
    recall = s / (s + n) if s + n else None
    f_measure = None
    if precision is not None and recall is not None:
        denom = alpha * precision + recall
        # P = R = 0 is a defined, totally failed run; F is bounded by max(P, R) = 0
        f_measure = (1 + alpha) * precision * recall / denom if denom else 0.0
    return MetricsReport(s, u, n, precision, recall, f_measure, alpha)


def evaluate(outcomes: Iterable[QueryOutcome], alpha: float = 1.0) -> MetricsReport:
    return compute_metrics(*tally(outcomes), alpha=alpha)


def round_percent(value: float, places: int = 1) -> Decimal:
    """``value`` as a percentage rounded half-up to ``places`` decimals."""
    quantum = Decimal(1).scaleb(-places)
    return (Decimal(repr(value)) * 100).quantize(quantum, rounding=ROUND_HALF_UP)


def format_percent(value: float | None, places: int = 1) -> str:
    if value is None:
        return "n/a"
    return f"{round_percent(value, places)}%"


def sig6(value: float | None) -> float | None:
    if value is None:
        return None
    return float(f"{value:.6g}")
