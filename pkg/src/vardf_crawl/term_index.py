"""Term statistics index over the documents retrieved so far.

For every term and position the index records which documents contain the
term there and the summed within-document frequency. It also caches how many
distinct terms occur at each position, the denominator of the position weight.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .corpus import ParsedDocument, Position


class FormatError(ValueError):
    """Serialized index does not have the expected shape."""


@dataclass
class PositionStats:
    doc_ids: set[str] = field(default_factory=set)
    total_frequency: int = 0


@dataclass
class IndexEntry:
    term: str
    per_position: dict[Position, PositionStats] = field(default_factory=dict)


class TermStatisticsIndex:
    def __init__(self) -> None:
        self.entries: dict[str, IndexEntry] = {}
        self.indexed_docs: set[str] = set()
        self.distinct_terms_at: Counter[Position] = Counter()

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: object) -> bool:
        return term in self.entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TermStatisticsIndex):
            return NotImplemented
        return (
            self.entries == other.entries
            and self.indexed_docs == other.indexed_docs
            and +self.distinct_terms_at == +other.distinct_terms_at
        )

    def __repr__(self) -> str:
        return f"TermStatisticsIndex(docs={len(self.indexed_docs)}, terms={len(self.entries)})"

    @property
    def doc_count(self) -> int:
        return len(self.indexed_docs)

    def add_document(self, parsed: ParsedDocument) -> bool:
        """Fold ``parsed`` into the index. Returns False if it was already indexed."""
        if parsed.doc_id in self.indexed_docs:
            return False
        self.indexed_docs.add(parsed.doc_id)
        for term, position, frequency in parsed.occurrences:
            entry = self.entries.get(term)
            if entry is None:
                entry = self.entries[term] = IndexEntry(term)
            stats = entry.per_position.get(position)
            if stats is None:
                stats = entry.per_position[position] = PositionStats()
                self.distinct_terms_at[position] += 1
            stats.doc_ids.add(parsed.doc_id)
            stats.total_frequency += frequency
        return True

    def df(self, term: str, position: Position) -> int:
        entry = self.entries.get(term)
        if entry is None or position not in entry.per_position:
            return 0
        return len(entry.per_position[position].doc_ids)

    def distinct_terms_count(self, position: Position) -> int:
        return self.distinct_terms_at[position]

    def recount_distinct_terms(self) -> Counter[Position]:
        """Recompute distinct-term counts from the entries (consistency check)."""
        counts: Counter[Position] = Counter()
        for entry in self.entries.values():
            counts.update(entry.per_position.keys())
        return counts

    def terms(self) -> set[str]:
        return set(self.entries)

    # serialization

    def to_dict(self) -> dict:
        return {
            "docs": sorted(self.indexed_docs),
            "terms": {
                term: {
                    position.value: {"docs": sorted(stats.doc_ids), "freq": stats.total_frequency}
                    for position, stats in entry.per_position.items()
                }
                for term, entry in self.entries.items()
            },
        }

    def serialize(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False).encode("utf-8")

    @classmethod
    def deserialize(cls, data: bytes | str) -> TermStatisticsIndex:
        try:
            obj = json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise FormatError(f"not valid JSON: {exc}") from exc
        return cls.from_dict(obj)

    @classmethod
    def from_dict(cls, obj: object) -> TermStatisticsIndex:
        if not isinstance(obj, dict) or set(obj) != {"docs", "terms"}:
            raise FormatError("expected an object with exactly 'docs' and 'terms'")
        docs, terms = obj["docs"], obj["terms"]
        if not isinstance(docs, list) or not all(isinstance(d, str) for d in docs):
            raise FormatError("'docs' must be a list of strings")
        if not isinstance(terms, dict):
            raise FormatError("'terms' must be an object")

        index = cls()
        index.indexed_docs = set(docs)
        for term, positions in terms.items():
            if not isinstance(positions, dict) or not positions:
                raise FormatError(f"term {term!r}: expected a non-empty object of positions")
            entry = IndexEntry(term)
            for name, stats in positions.items():
                try:
                    position = Position(name)
                except ValueError:
                    raise FormatError(f"term {term!r}: unknown position {name!r}") from None
                if not isinstance(stats, dict) or set(stats) != {"docs", "freq"}:
                    raise FormatError(f"term {term!r}/{name}: expected 'docs' and 'freq'")
                doc_ids, freq = stats["docs"], stats["freq"]
                if not isinstance(doc_ids, list) or not doc_ids or not all(isinstance(d, str) for d in doc_ids):
                    raise FormatError(f"term {term!r}/{name}: 'docs' must be a non-empty list of strings")
                if not isinstance(freq, int) or isinstance(freq, bool) or freq < len(doc_ids):
                    raise FormatError(f"term {term!r}/{name}: 'freq' must be an integer >= len(docs)")
                if not set(doc_ids) <= index.indexed_docs:
                    raise FormatError(f"term {term!r}/{name}: references unindexed documents")
                entry.per_position[position] = PositionStats(set(doc_ids), freq)
                index.distinct_terms_at[position] += 1
            index.entries[term] = entry
        return index


def build_index(documents) -> TermStatisticsIndex:
    index = TermStatisticsIndex()
    for parsed in documents:
        index.add_document(parsed)
    return index
