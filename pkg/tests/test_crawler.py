import random

import pytest
import requests

from vardf_crawl import (
    CrawlLimits,
    HiddenDatabase,
    NetworkError,
    NoFormFound,
    NotKeywordInterface,
    analyze_form,
    crawl,
    serve,
)
from vardf_crawl.crawler import HttpSearchInterface, get_with_retry, result_links
from vardf_crawl.hidden_db import SEARCH_PAGE

from conftest import FIXTURES
from synth import random_corpus

BOOK_FORM = (FIXTURES / "book_form.html").read_text()


@pytest.fixture(scope="module")
def corpus50():
    pages, terms = random_corpus(random.Random(2024), 50, 90, connected=True)
    return pages, sorted(terms["doc000"])[0]


def test_analyze_simulator_form():
    form = analyze_form(SEARCH_PAGE, "http://h:1/")
    assert form.keyword_based
    assert form.text_inputs == ("q",)
    assert form.other_inputs == 0
    assert (form.action_url, form.method) == ("http://h:1/search", "GET")


def test_analyze_book_form():
    form = analyze_form(BOOK_FORM)
    assert form.text_inputs == ("author", "title", "isbn", "publisher", "subject")
    assert not form.keyword_based


def test_no_form():
    with pytest.raises(NoFormFound):
        analyze_form("<html><body><p>nothing</p></body></html>")


@pytest.mark.parametrize(
    "html, keyword_based",
    [
        ('<form action="/s" method="post"><input name="kw"><input type="hidden" name="t" value="1"></form>', True),
        ('<form><input type="search" name="q"><button>go</button></form>', True),
        ('<form><textarea name="q"></textarea></form>', True),
        ('<form><input name="q"><select name="cat"><option>a</option></select></form>', False),
        ('<form><input name="q"><input type="checkbox" name="exact"></form>', False),
        ('<form><input type="submit"></form>', False),
    ],
)
def test_form_variants(html, keyword_based):
    assert analyze_form(html).keyword_based is keyword_based


def test_post_form_fields():
    form = analyze_form('<form action="/s" method="POST"><input name="kw"><input type="hidden" name="t" value="1"></form>',
                        "http://x/")
    assert form.method == "POST"
    assert form.hidden_fields == {"t": "1"}


def test_result_links():
    page = '<ol id="results"><li><a href="/doc/a%20b">a b</a></li><li><a href="/other">x</a></li></ol>'
    assert result_links(page, "http://h/search?q=x") == {"a b": "http://h/doc/a%20b"}


def test_crawl_over_http_stores_every_document(tmp_path, corpus50):
    pages, seed = corpus50
    db = HiddenDatabase.from_documents(pages)
    with serve(db) as handle:
        report = crawl(handle.url, seed, CrawlLimits(), tmp_path / "docs")
        for doc_id in ("doc000", "doc049"):
            assert (tmp_path / "docs" / f"{doc_id}.html").read_bytes() == requests.get(
                handle.url + f"doc/{doc_id}").content
    assert report.coverage == 50
    assert report.total_queries == len(report.outcomes)
    assert report.coverage == sum(o.fresh_docs for o in report.outcomes)
    stored = {p.stem: p.read_bytes() for p in (tmp_path / "docs").glob("*.html")}
    assert stored == {k: v.encode() for k, v in pages.items()}
    assert report.metrics.s == sum(o.fresh_docs > 0 for o in report.outcomes)


def test_crawl_single_query(corpus50):
    pages, seed = corpus50
    db = HiddenDatabase.from_documents(pages)
    with serve(db) as handle:
        report = crawl(handle.url, seed, CrawlLimits(max_queries=1))
    assert report.total_queries == 1
    assert report.coverage == len(db.search(seed))
    assert report.documents_dir is None


def test_transport_independence_and_determinism(corpus50):
    pages, seed = corpus50
    db = HiddenDatabase.from_documents(pages)
    limits = CrawlLimits(max_queries=25)
    local = crawl(db, seed, limits)
    with serve(db) as handle:
        remote = crawl(handle.url, seed, limits)
    assert local.outcomes_jsonl() == remote.outcomes_jsonl()
    assert crawl(db, seed, limits).to_json() == local.to_json()


def test_multi_attribute_form_rejected():
    with serve(HiddenDatabase(), form_page=BOOK_FORM) as handle:
        with pytest.raises(NotKeywordInterface):
            crawl(handle.url, "web")


def test_interface_constructor_rejects_multi_input_form():
    with pytest.raises(NotKeywordInterface):
        HttpSearchInterface(analyze_form(BOOK_FORM))


class FlakySession:
    """Fails the first ``failures`` requests, then answers 200."""

    def __init__(self, failures, status=None):
        self.failures = failures
        self.status = status
        self.calls = 0

    def request(self, method, url, **kwargs):
        self.calls += 1
        if self.calls <= self.failures:
            if self.status is None:
                raise requests.ConnectionError("refused")
            return self._response(self.status)
        return self._response(200)

    @staticmethod
    def _response(status):
        resp = requests.Response()
        resp.status_code = status
        resp._content = b"ok"
        return resp


@pytest.mark.parametrize("status", [None, 503])
def test_retry_recovers(status):
    session = FlakySession(3, status)
    assert get_with_retry(session, "http://x/", backoff=0.001).content == b"ok"
    assert session.calls == 4


def test_retry_gives_up():
    session = FlakySession(10)
    with pytest.raises(NetworkError):
        get_with_retry(session, "http://x/", backoff=0.001)
    assert session.calls == 4


def test_client_error_not_retried():
    session = FlakySession(10, status=404)
    with pytest.raises(NetworkError):
        get_with_retry(session, "http://x/", backoff=0.001)
    assert session.calls == 1


def test_network_error_keeps_partial_report(tmp_path):
    db = HiddenDatabase.from_documents({"a": "<p>x y</p>", "b": "<p>y z</p>", "c": "<p>z</p>"})

    class DiesAfterTwo:
        calls = 0

        def search(self, term):
            self.calls += 1
            if self.calls > 2:
                raise NetworkError("gone")
            return db.search(term)

        def fetch(self, ids):
            return db.fetch(ids)

    with pytest.raises(NetworkError) as info:
        crawl(DiesAfterTwo(), "x", CrawlLimits(), tmp_path)
    report = info.value.report
    assert report.total_queries == 2
    assert report.stop_reason == "network_error"
    assert report.coverage == len(list(tmp_path.glob("*.html")))


def test_unsafe_doc_id_not_written(tmp_path):
    db = HiddenDatabase.from_documents({"..": "<p>web</p>"})
    with pytest.raises(OSError):
        crawl(db, "web", CrawlLimits(), tmp_path / "out")
