"""A simulated hidden textual database behind a single keyword search box.

Documents are searchable by any term that occurs in them at a recognized
position. The same database answers in-process (``search``/``fetch``) and over
HTTP through :func:`serve`.
"""

from __future__ import annotations

import html
import logging
import os
import threading
from dataclasses import dataclass, field
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Iterable, Mapping
from urllib.parse import parse_qs, quote, unquote, urlsplit

from .corpus import (
    MalformedInput,
    ParsedDocument,
    StopWordList,
    load_corpus,
    normalize_term,
    parse_document,
)

logger = logging.getLogger(__name__)


class BindError(OSError):
    """The HTTP service could not bind its address."""


@dataclass
class HiddenDatabase:
    documents: dict[str, bytes] = field(default_factory=dict)
    search_index: dict[str, frozenset[str]] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.documents)

    @classmethod
    def from_documents(
        cls, documents: Mapping[str, bytes | str], stoplist: StopWordList | None = None
    ) -> HiddenDatabase:
        stoplist = stoplist or StopWordList.default()
        parsed = []
        for doc_id in sorted(documents):
            raw = documents[doc_id]
            if isinstance(raw, str):
                raw = raw.encode("utf-8")
            try:
                parsed.append((raw, parse_document(doc_id, raw, stoplist)))
            except MalformedInput as exc:
                logger.warning("skipping document %s: %s", doc_id, exc)
        return cls._assemble(parsed)

    @classmethod
    def _assemble(cls, docs: Iterable[tuple[bytes, ParsedDocument]]) -> HiddenDatabase:
        db = cls()
        postings: dict[str, set[str]] = {}
        for raw, parsed in docs:
            db.documents[parsed.doc_id] = raw
            for term in parsed.vocabulary:
                postings.setdefault(term, set()).add(parsed.doc_id)
        db.search_index = {t: frozenset(ids) for t, ids in postings.items()}
        return db

    def search(self, term: str) -> set[str]:
        normalized = normalize_term(term)
        if normalized is None:
            return set()
        return set(self.search_index.get(normalized, ()))

    def fetch(self, doc_ids: Iterable[str]) -> dict[str, bytes]:
        return {doc_id: self.documents[doc_id] for doc_id in doc_ids}


def build_database(directory: str | os.PathLike, stoplist: StopWordList | None = None) -> HiddenDatabase:
    db = HiddenDatabase._assemble((f.raw, f.parsed) for f in load_corpus(directory, stoplist))
    logger.info("built hidden database from %s: %d documents", directory, db.size)
    return db


SEARCH_PAGE = """<!DOCTYPE html>
<html>
<head><title>Document search</title></head>
<body>
<h1>Search the collection</h1>
<form action="/search" method="get">
<input type="text" name="q">
<input type="submit" value="Search">
</form>
</body>
</html>
"""


def render_results(query: str, doc_ids: Iterable[str]) -> str:
    items = "".join(
        f'<li><a href="/doc/{quote(doc_id, safe="")}">{html.escape(doc_id)}</a></li>\n'
        for doc_id in sorted(doc_ids)
    )
    return (
        "<!DOCTYPE html>\n<html>\n"
        f"<head><title>Results for {html.escape(query)}</title></head>\n<body>\n"
        f'<ol id="results">\n{items}</ol>\n'
        "</body>\n</html>\n"
    )


class _Handler(BaseHTTPRequestHandler):
    # set on the per-server subclass
    db: HiddenDatabase
    form_page: str

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/":
            self._send(HTTPStatus.OK, self.form_page.encode("utf-8"))
        elif url.path == "/search":
            query = parse_qs(url.query).get("q", [""])[0]
            page = render_results(query, self.db.search(query))
            self._send(HTTPStatus.OK, page.encode("utf-8"))
        elif url.path.startswith("/doc/"):
            doc_id = unquote(url.path[len("/doc/"):])
            body = self.db.documents.get(doc_id)
            if body is None:
                self._send(HTTPStatus.NOT_FOUND, b"not found", "text/plain")
            else:
                self._send(HTTPStatus.OK, body)
        else:
            self._send(HTTPStatus.NOT_FOUND, b"not found", "text/plain")

    def _send(self, status, body: bytes, content_type: str = "text/html; charset=utf-8"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, format, *args):
        logger.debug("%s %s", self.address_string(), format % args)


class ServiceHandle:
    """A running search service; stop it with :meth:`shutdown` or a ``with`` block."""

    def __init__(self, server: ThreadingHTTPServer):
        self._server = server
        self._thread = threading.Thread(
            target=server.serve_forever, kwargs={"poll_interval": 0.05}, name="hidden-db", daemon=True
        )
        self._thread.start()

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._server.server_address[:2]
        return host, port

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}/"

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join()

    def wait(self) -> None:
        self._thread.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


def serve(
    db: HiddenDatabase, host: str = "127.0.0.1", port: int = 0, form_page: str = SEARCH_PAGE
) -> ServiceHandle:
    """Serve ``db`` on ``host:port`` in a background thread (port 0 picks a free one).

    ``form_page`` replaces the page served at ``/``.
    """
    handler = type("HiddenDBHandler", (_Handler,), {"db": db, "form_page": form_page})
    try:
        server = ThreadingHTTPServer((host, port), handler)
    except OSError as exc:
        raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
    server.daemon_threads = True
    return ServiceHandle(server)


def parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must look like HOST:PORT, got {addr!r}")
    return host or "127.0.0.1", int(port)
