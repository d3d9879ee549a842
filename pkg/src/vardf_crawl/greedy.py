"""Greedy query composition against a keyword search interface.

The crawl starts from a domain seed term. Every later query is the
highest-weighted term (VarDF) that has not been issued yet, recomputed over the
documents retrieved so far after every query.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Protocol

from .corpus import StopWordList, parse_document, tokenize
from .term_index import TermStatisticsIndex
from .weighting import rank_terms

logger = logging.getLogger(__name__)


class EmptySeed(ValueError):
    """The domain seed normalizes to no term at all."""


class PoolExhausted(RuntimeError):
    """No unissued candidate term is left."""


class SearchFailure(RuntimeError):
    """The search interface could not answer a query."""


class SearchInterface(Protocol):
    def search(self, term: str) -> set[str]:
        """Doc ids matching ``term``."""

    def fetch(self, doc_ids: Iterable[str]) -> dict[str, bytes]:
        """Raw documents for ``doc_ids``."""


class Classification(str, Enum):
    SUCCESSFUL = "successful"
    UNSUCCESSFUL = "unsuccessful"
    NO_RESULTS = "no_results"

    @classmethod
    def of(cls, docs_returned: int, fresh_docs: int) -> Classification:
        if docs_returned == 0:
            return cls.NO_RESULTS
        return cls.SUCCESSFUL if fresh_docs else cls.UNSUCCESSFUL


@dataclass(frozen=True)
class QueryOutcome:
    term: str
    docs_returned: int
    fresh_docs: int
    classification: Classification
    issued_at: int

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "docs_returned": self.docs_returned,
            "fresh_docs": self.fresh_docs,
            "classification": self.classification.value,
            "issued_at": self.issued_at,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> QueryOutcome:
        return cls(
            term=obj["term"],
            docs_returned=int(obj["docs_returned"]),
            fresh_docs=int(obj["fresh_docs"]),
            classification=Classification(obj["classification"]),
            issued_at=int(obj["issued_at"]),
        )


def outcomes_to_jsonl(outcomes: Iterable[QueryOutcome]) -> str:
    return "".join(json.dumps(o.to_dict()) + "\n" for o in outcomes)


def outcomes_from_jsonl(text: str) -> list[QueryOutcome]:
    return [QueryOutcome.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class CrawlLimits:
    max_queries: int = 1000
    db_size_hint: int | None = None
    resource_budget: float | None = None  # wall-clock seconds

    def __post_init__(self):
        if self.max_queries < 1:
            raise ValueError("max_queries must be >= 1")


@dataclass
class CrawlState:
    index: TermStatisticsIndex = field(default_factory=TermStatisticsIndex)
    issued_queries: list[QueryOutcome] = field(default_factory=list)
    candidate_pool: set[str] = field(default_factory=set)
    retrieved_docs: set[str] = field(default_factory=set)
    staged_seed: str | None = None
    stoplist: StopWordList = field(default_factory=StopWordList.default, repr=False)
    stop_reason: str | None = None

    @property
    def coverage(self) -> int:
        return len(self.retrieved_docs)

    @property
    def issued_terms(self) -> list[str]:
        return [o.term for o in self.issued_queries]

    def has_next(self) -> bool:
        return self.staged_seed is not None or bool(self.candidate_pool)


def init_state(domain_seed: str, stoplist: StopWordList | None = None) -> CrawlState:
    tokens = tokenize(domain_seed)
    if not tokens:
        raise EmptySeed(f"seed {domain_seed!r} contains no term")
    if len(tokens) > 1:
        raise ValueError(f"seed {domain_seed!r} must be a single term")
    return CrawlState(staged_seed=tokens[0], stoplist=stoplist or StopWordList.default())


def next_term(state: CrawlState) -> str:
    if state.staged_seed is not None:
        return state.staged_seed
    if not state.candidate_pool:
        raise PoolExhausted("candidate pool is empty")
    ranking = rank_terms(state.index, exclude=set(state.issued_terms))
    if not ranking:
        raise PoolExhausted("no ranked candidate left")
    top = ranking[0].term
    assert top in state.candidate_pool, top
    return top


def step(
    state: CrawlState,
    search: SearchInterface,
    on_document: Callable[[str, bytes], None] | None = None,
) -> QueryOutcome:
    """Issue the next query and fold its fresh results into ``state``.

    All I/O happens before the state is touched, so a SearchFailure leaves
    ``state`` exactly as it was.
    """
    term = next_term(state)
    hits = set(search.search(term))
    fresh = sorted(hits - state.retrieved_docs)
    raw_docs = search.fetch(fresh) if fresh else {}
    parsed = [parse_document(doc_id, raw_docs[doc_id], state.stoplist) for doc_id in fresh]

    if on_document is not None:
        for doc_id in fresh:
            on_document(doc_id, raw_docs[doc_id])

    for doc_id, doc in zip(fresh, parsed):
        state.retrieved_docs.add(doc_id)
        state.index.add_document(doc)
        state.candidate_pool |= doc.vocabulary

    outcome = QueryOutcome(
        term=term,
        docs_returned=len(hits),
        fresh_docs=len(fresh),
        classification=Classification.of(len(hits), len(fresh)),
        issued_at=len(state.issued_queries),
    )
    state.issued_queries.append(outcome)
    state.staged_seed = None
    state.candidate_pool -= set(state.issued_terms)
    logger.debug("query %d %r: %d hits, %d fresh", outcome.issued_at, term, len(hits), len(fresh))
    return outcome


def run(
    state: CrawlState,
    search: SearchInterface,
    limits: CrawlLimits = CrawlLimits(),
    on_document: Callable[[str, bytes], None] | None = None,
) -> CrawlState:
    """Step until the pool is empty, the known database size is covered,
    ``max_queries`` have been issued or the time budget is spent."""
    started = time.monotonic()
    while True:
        if not state.has_next():
            state.stop_reason = "pool_exhausted"
        elif limits.db_size_hint is not None and state.coverage >= limits.db_size_hint:
            state.stop_reason = "coverage_reached"
        elif len(state.issued_queries) >= limits.max_queries:
            state.stop_reason = "max_queries"
        elif limits.resource_budget is not None and time.monotonic() - started >= limits.resource_budget:
            state.stop_reason = "budget_exhausted"
        else:
            step(state, search, on_document)
            continue
        return state


def marginal_coverage(state: CrawlState, term: str, search: SearchInterface) -> int:
    """Number of documents ``term`` would add to the retrieved set."""
    return len(set(search.search(term)) - state.retrieved_docs)


def oracle_greedy_cover(corpus: Mapping[str, Iterable[str]], vocab: Iterable[str]) -> list[str]:
    """Exact greedy maximum-coverage query sequence with full corpus visibility.

    ``corpus`` maps doc id to the terms it is searchable by. Ties go to the
    lexicographically smaller term. Stops once no term adds a document.
    """
    postings: dict[str, set[str]] = {t: set() for t in vocab}
    for doc_id, terms in corpus.items():
        for t in terms:
            if t in postings:
                postings[t].add(doc_id)

    covered: set[str] = set()
    chosen: list[str] = []
    remaining = sorted(postings)
    while remaining:
        best, best_gain = None, 0
        for t in remaining:
            gain = len(postings[t] - covered)
            if gain > best_gain:
                best, best_gain = t, gain
        if best is None:
            break
        chosen.append(best)
        covered |= postings[best]
        remaining.remove(best)
    return chosen
