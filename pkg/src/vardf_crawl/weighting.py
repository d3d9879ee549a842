"""Variable document frequency (VarDF) term weights.

A position's weight is the number of indexed documents divided by the number
of distinct terms seen at that position, so sparse positions such as titles
weigh more than paragraphs. A term's weight sums, over the positions where it
occurs, position weight times the term's document frequency there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Position
from .term_index import TermStatisticsIndex


@dataclass(frozen=True)
class TermWeight:
    term: str
    weight: float
    breakdown: dict[Position, float] = field(default_factory=dict)


def varwt(index: TermStatisticsIndex, position: Position) -> float:
    distinct = index.distinct_terms_count(position)
    if distinct == 0:
        return 0.0
    return index.doc_count / distinct


def vardf(index: TermStatisticsIndex, term: str) -> TermWeight:
    entry = index.entries.get(term)
    if entry is None:
        return TermWeight(term, 0.0, {})
    breakdown = {}
    # iterate in enum order so the float sum is reproducible
    for position in Position:
        stats = entry.per_position.get(position)
        if stats:
            breakdown[position] = varwt(index, position) * len(stats.doc_ids)
    return TermWeight(term, sum(breakdown.values()), breakdown)


def rank_terms(index: TermStatisticsIndex, exclude=frozenset()) -> list[TermWeight]:
    """Every indexed term not in ``exclude``, heaviest first, ties by term."""
    weights = [vardf(index, term) for term in index.entries if term not in exclude]
    weights.sort(key=lambda w: (-w.weight, w.term))
    return weights
