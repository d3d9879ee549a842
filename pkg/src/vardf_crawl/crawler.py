"""End-to-end crawl of a keyword search interface.

The crawler downloads the form page, checks that it is a single-textbox
keyword interface, then runs greedy query composition against it, following
every result link and saving each new document to disk.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable
from urllib.parse import unquote, urljoin, urlsplit

import requests
from bs4 import BeautifulSoup

from .corpus import StopWordList
from .evaluation import MetricsReport, evaluate
from .greedy import (
    CrawlLimits,
    CrawlState,
    QueryOutcome,
    SearchFailure,
    SearchInterface,
    init_state,
    outcomes_to_jsonl,
    run,
)

logger = logging.getLogger(__name__)

RETRIES = 3
BACKOFF = 0.25

# controls that carry no user data
_SUBMIT_TYPES = {"submit", "button", "image", "reset"}
_TEXT_TYPES = {"text", "search"}


class NoFormFound(ValueError):
    pass


class NotKeywordInterface(ValueError):
    """The search form is not a single-textbox keyword interface."""


class NetworkError(SearchFailure):
    """HTTP failure that persisted through all retries.

    ``report`` holds the partial crawl report when raised from :func:`crawl`.
    """

    report: CrawlReport | None = None


@dataclass(frozen=True)
class FormDescriptor:
    action_url: str
    method: str
    text_inputs: tuple[str, ...]
    other_inputs: int
    hidden_fields: dict[str, str] = field(default_factory=dict)

    @property
    def keyword_based(self) -> bool:
        return len(self.text_inputs) == 1 and self.other_inputs == 0


def analyze_form(html: str | bytes, base_url: str = "") -> FormDescriptor:
    """Describe the first form on the page."""
    soup = BeautifulSoup(html, "html.parser")
    form = soup.find("form")
    if form is None:
        raise NoFormFound("page contains no form")

    text_inputs: list[str] = []
    hidden: dict[str, str] = {}
    other = 0
    for control in form.find_all(["input", "textarea", "select"]):
        if control.name == "input":
            kind = (control.get("type") or "text").strip().lower()
            if kind in _SUBMIT_TYPES:
                continue
            if kind == "hidden":
                if control.get("name"):
                    hidden[control["name"]] = control.get("value", "")
                continue
            if kind in _TEXT_TYPES:
                text_inputs.append(control.get("name", ""))
                continue
            other += 1
        elif control.name == "textarea":
            text_inputs.append(control.get("name", ""))
        else:
            other += 1

    method = (form.get("method") or "get").strip().upper()
    return FormDescriptor(
        action_url=urljoin(base_url, form.get("action") or ""),
        method="POST" if method == "POST" else "GET",
        text_inputs=tuple(text_inputs),
        other_inputs=other,
        hidden_fields=hidden,
    )


class HttpSearchInterface:
    """Keyword search through an HTML form, with result-link following."""

    def __init__(
        self,
        form: FormDescriptor,
        session: requests.Session | None = None,
        delay: float = 0.0,
        max_workers: int = 8,
        timeout: float = 10.0,
        retries: int = RETRIES,
        backoff: float = BACKOFF,
    ):
        if not form.keyword_based:
            raise NotKeywordInterface(f"form at {form.action_url} is not a single-textbox interface")
        self.form = form
        self.session = session or requests.Session()
        self.delay = delay
        self.max_workers = max_workers
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._doc_urls: dict[str, str] = {}
        self._searched = False

    def search(self, term: str) -> set[str]:
        if self._searched and self.delay:
            time.sleep(self.delay)
        self._searched = True
        fields = {**self.form.hidden_fields, self.form.text_inputs[0]: term}
        if self.form.method == "POST":
            resp = get_with_retry(self.session, self.form.action_url, method="POST", data=fields,
                                  timeout=self.timeout, retries=self.retries, backoff=self.backoff)
        else:
            resp = get_with_retry(self.session, self.form.action_url, params=fields,
                                  timeout=self.timeout, retries=self.retries, backoff=self.backoff)
        links = result_links(resp.text, resp.url)
        self._doc_urls.update(links)
        return set(links)

    def fetch(self, doc_ids: Iterable[str]) -> dict[str, bytes]:
        doc_ids = list(doc_ids)

        def download(doc_id: str) -> bytes:
            resp = get_with_retry(self.session, self._doc_urls[doc_id], timeout=self.timeout,
                                  retries=self.retries, backoff=self.backoff)
            return resp.content

        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            return dict(zip(doc_ids, pool.map(download, doc_ids)))


def result_links(page: str, page_url: str) -> dict[str, str]:
    """Map doc id to absolute URL for every anchor in the results list."""
    soup = BeautifulSoup(page, "html.parser")
    results = soup.find(id="results")
    if results is None:
        raise SearchFailure(f"no results list on {page_url}")
    links = {}
    for a in results.find_all("a", href=True):
        url = urljoin(page_url, a["href"])
        path = urlsplit(url).path
        if path.startswith("/doc/"):
            links[unquote(path[len("/doc/"):])] = url
    return links


def get_with_retry(
    session: requests.Session,
    url: str,
    method: str = "GET",
    retries: int = RETRIES,
    backoff: float = BACKOFF,
    **kwargs,
) -> requests.Response:
    """Request ``url``; connection errors and 5xx are retried, other non-200s are not."""
    last_error = None
    for attempt in range(retries + 1):
        if attempt:
            time.sleep(backoff)
        try:
            resp = session.request(method, url, **kwargs)
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_error = exc
            logger.warning("%s %s failed (attempt %d): %s", method, url, attempt + 1, exc)
            continue
        if resp.status_code >= 500:
            last_error = f"HTTP {resp.status_code}"
            logger.warning("%s %s returned %d (attempt %d)", method, url, resp.status_code, attempt + 1)
            continue
        if resp.status_code != 200:
            raise NetworkError(f"{method} {url}: HTTP {resp.status_code}")
        return resp
    raise NetworkError(f"{method} {url}: giving up after {retries + 1} attempts ({last_error})")


@dataclass
class CrawlReport:
    outcomes: list[QueryOutcome]
    coverage: int
    total_queries: int
    documents_dir: str | None
    metrics: MetricsReport
    stop_reason: str | None = None

    @classmethod
    def from_state(cls, state: CrawlState, documents_dir: str | os.PathLike | None = None,
                   alpha: float = 1.0) -> CrawlReport:
        return cls(
            outcomes=list(state.issued_queries),
            coverage=state.coverage,
            total_queries=len(state.issued_queries),
            documents_dir=None if documents_dir is None else str(documents_dir),
            metrics=evaluate(state.issued_queries, alpha),
            stop_reason=state.stop_reason,
        )

    def to_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "total_queries": self.total_queries,
            "stop_reason": self.stop_reason,
            "documents_dir": self.documents_dir,
            "metrics": self.metrics.to_dict(),
            "outcomes": [o.to_dict() for o in self.outcomes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def outcomes_jsonl(self) -> str:
        return outcomes_to_jsonl(self.outcomes)


def open_interface(url: str, session: requests.Session | None = None, delay: float = 0.0) -> HttpSearchInterface:
    """Download the form page at ``url`` and return a search client for it."""
    session = session or requests.Session()
    resp = get_with_retry(session, url, timeout=10.0)
    form = analyze_form(resp.text, resp.url)
    if not form.keyword_based:
        raise NotKeywordInterface(
            f"form at {url} has {len(form.text_inputs)} text inputs and "
            f"{form.other_inputs} other data inputs; need exactly one text box"
        )
    return HttpSearchInterface(form, session=session, delay=delay)


def crawl(
    interface: str | SearchInterface,
    domain_seed: str,
    limits: CrawlLimits = CrawlLimits(),
    out_dir: str | os.PathLike | None = None,
    stoplist: StopWordList | None = None,
    delay: float = 0.0,
    alpha: float = 1.0,
) -> CrawlReport:
    """Crawl a search interface given by base URL or as an in-process object."""
    search = open_interface(interface, delay=delay) if isinstance(interface, str) else interface
    state = init_state(domain_seed, stoplist)

    on_document = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        def on_document(doc_id: str, raw: bytes) -> None:
            if Path(doc_id).name != doc_id or doc_id in ("", ".", ".."):
                raise OSError(f"refusing to store document with unsafe id {doc_id!r}")
            (out_dir / f"{doc_id}.html").write_bytes(raw)

    try:
        run(state, search, limits, on_document)
    except NetworkError as exc:
        state.stop_reason = "network_error"
        exc.report = CrawlReport.from_state(state, out_dir, alpha)
        raise
    report = CrawlReport.from_state(state, out_dir, alpha)
    logger.info("crawl finished (%s): %d queries, %d documents", report.stop_reason,
                report.total_queries, report.coverage)
    return report
