import itertools
import random

import pytest

from vardf_crawl import (
    Classification,
    CrawlLimits,
    EmptySeed,
    HiddenDatabase,
    PoolExhausted,
    SearchFailure,
    init_state,
    marginal_coverage,
    oracle_greedy_cover,
    run,
    step,
)
from vardf_crawl.greedy import outcomes_from_jsonl, outcomes_to_jsonl

from oracles import exact_greedy_cover, min_cover_length, reachable_docs
from synth import page, random_corpus


def db_from_terms(corpus: dict[str, set[str]]) -> HiddenDatabase:
    return HiddenDatabase.from_documents({d: page(sorted(ts)[:1], [], sorted(ts)) for d, ts in corpus.items()})


TINY = {"a": {"t1"}, "b": {"t1", "t2"}, "c": {"t2"}}


def test_init_state():
    state = init_state("information")
    assert state.staged_seed == "information"
    assert state.coverage == 0 and not state.candidate_pool and state.index.doc_count == 0
    assert init_state("Medicine ").staged_seed == "medicine"
    with pytest.raises(EmptySeed):
        init_state("")
    with pytest.raises(EmptySeed):
        init_state(" -- ")


def test_seed_step_on_empty_state():
    pages = {f"r{i:02d}": page(["information"], [], ["retrieval", f"topic{i}"]) for i in range(27)}
    pages.update({f"z{i}": page(["unrelated"], [], ["other"]) for i in range(3)})
    db = HiddenDatabase.from_documents(pages)
    state = init_state("information")
    outcome = step(state, db)
    assert outcome.term == "information"
    assert (outcome.docs_returned, outcome.fresh_docs) == (27, 27)
    assert outcome.classification is Classification.SUCCESSFUL
    assert outcome.issued_at == 0
    assert state.coverage == 27
    assert "information" not in state.candidate_pool
    assert {"retrieval", "topic0", "topic26"} <= state.candidate_pool
    assert state.staged_seed is None


def test_unsuccessful_and_no_results():
    db = db_from_terms({"a": {"x", "y"}})
    state = init_state("x")
    step(state, db)
    outcome = step(state, db)
    assert outcome.term == "y"
    assert outcome.classification is Classification.UNSUCCESSFUL
    assert state.coverage == 1

    state = init_state("missing")
    outcome = step(state, db)
    assert outcome.classification is Classification.NO_RESULTS
    assert outcome.docs_returned == 0 and state.coverage == 0
    assert not state.has_next()
    with pytest.raises(PoolExhausted):
        step(state, db)


def test_three_doc_corpus_against_oracle():
    db = db_from_terms(TINY)
    state = init_state("t1")
    step(state, db)
    assert state.coverage == 2
    outcome = step(state, db)
    assert outcome.term == "t2" and outcome.fresh_docs == 1
    assert state.coverage == 3

    # brute force over every query order: two queries are necessary and sufficient
    best = min(
        len(order[: i + 1])
        for order in itertools.permutations(["t1", "t2"])
        for i in range(len(order))
        if set().union(*({d for d, ts in TINY.items() if t in ts} for t in order[: i + 1])) == set(TINY)
    )
    assert best == 2 == len(state.issued_queries)


def test_marginal_coverage_does_not_mutate():
    corpus = {"d1": {"web"}, "d3": {"web"}, "d6": {"web"}, "d2": {"query"}}
    db = db_from_terms(corpus)
    state = init_state("query")
    assert marginal_coverage(state, "web", db) == 3
    assert marginal_coverage(state, "nothing", db) == 0
    state.retrieved_docs.add("d1")
    before = (set(state.retrieved_docs), set(state.candidate_pool), len(state.issued_queries))
    assert marginal_coverage(state, "web", db) == 2
    assert (set(state.retrieved_docs), set(state.candidate_pool), len(state.issued_queries)) == before


def test_run_max_queries():
    pages, _ = random_corpus(random.Random(1), 20, 15, connected=True)
    db = HiddenDatabase.from_documents(pages)
    state = run(init_state("w000"), db, CrawlLimits(max_queries=1))
    assert len(state.issued_queries) == 1
    assert state.stop_reason in ("max_queries", "pool_exhausted")


def test_run_stops_at_db_size():
    db = db_from_terms({f"d{i}": {"shared", f"own{i}"} for i in range(5)})
    state = run(init_state("shared"), db, CrawlLimits(db_size_hint=5))
    assert len(state.issued_queries) == 1
    assert state.coverage == 5
    assert state.stop_reason == "coverage_reached"


def test_run_budget():
    db = db_from_terms(TINY)
    state = run(init_state("t1"), db, CrawlLimits(resource_budget=0.0))
    assert state.issued_queries == [] and state.stop_reason == "budget_exhausted"


def test_run_reaches_full_coverage_on_fifty_docs():
    pages, terms = random_corpus(random.Random(50), 50, 80, connected=True)
    seed = sorted(terms["doc000"])[0]
    assert reachable_docs(terms, seed) == set(pages)
    state = run(init_state(seed), HiddenDatabase.from_documents(pages), CrawlLimits())
    assert state.coverage == 50
    assert state.stop_reason == "pool_exhausted"


def test_search_failure_leaves_state_untouched():
    class Broken:
        def search(self, term):
            raise SearchFailure("down")

        def fetch(self, ids):
            raise AssertionError

    state = init_state("web")
    with pytest.raises(SearchFailure):
        step(state, Broken())
    assert state.staged_seed == "web" and not state.issued_queries


def test_run_invariants_random():
    for seed in range(25):
        rng = random.Random(seed)
        pages, terms = random_corpus(rng, rng.randint(1, 25), rng.randint(1, 40))
        seed_term = rng.choice(sorted(set().union(*terms.values())))
        state = run(init_state(seed_term), HiddenDatabase.from_documents(pages), CrawlLimits())
        issued = state.issued_terms
        assert len(issued) == len(set(issued))
        assert sum(o.fresh_docs for o in state.issued_queries) == state.coverage
        assert state.retrieved_docs == reachable_docs(terms, seed_term)
        assert state.index.indexed_docs <= state.retrieved_docs
        assert not (set(issued) & state.candidate_pool)
        for o in state.issued_queries:
            assert o.fresh_docs <= o.docs_returned
            assert (o.classification is Classification.NO_RESULTS) == (o.docs_returned == 0)
            assert (o.classification is Classification.SUCCESSFUL) == (o.fresh_docs >= 1)


def test_outcomes_jsonl_round_trip():
    state = run(init_state("t1"), db_from_terms(TINY), CrawlLimits())
    text = outcomes_to_jsonl(state.issued_queries)
    assert text.splitlines()[0] == (
        '{"term": "t1", "docs_returned": 2, "fresh_docs": 2, "classification": "successful", "issued_at": 0}'
    )
    assert outcomes_from_jsonl(text) == state.issued_queries


def test_crawl_limits_validation():
    with pytest.raises(ValueError):
        CrawlLimits(max_queries=0)


class TestOracle:
    def test_tiny(self):
        assert oracle_greedy_cover(TINY, {"t1", "t2"}) == ["t1", "t2"]
        assert min_cover_length(TINY) == 2

    def test_single_doc(self):
        assert oracle_greedy_cover({"a": {"x", "y"}}, {"x", "y"}) == ["x"]

    def test_universal_term_first(self):
        corpus = {"a": {"all", "p"}, "b": {"all", "q"}, "c": {"all", "r", "p"}}
        assert oracle_greedy_cover(corpus, {"all", "p", "q", "r"}) == ["all"]

    def test_ties_ascending(self):
        assert oracle_greedy_cover({"a": {"zz"}, "b": {"aa"}}, {"zz", "aa"}) == ["aa", "zz"]

    def test_uncoverable_docs(self):
        assert oracle_greedy_cover({"a": {"x"}, "b": set()}, {"x"}) == ["x"]
        assert oracle_greedy_cover({}, set()) == []

    def test_matches_independent_greedy(self):
        for seed in range(40):
            rng = random.Random(seed)
            _, terms = random_corpus(rng, rng.randint(1, 12), rng.randint(1, 15))
            vocab = set().union(*terms.values())
            assert oracle_greedy_cover(terms, vocab) == exact_greedy_cover(terms)
