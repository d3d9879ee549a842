"""Positional tokenization of HTML documents.

A document is reduced to ``(term, position, frequency)`` occurrences, where the
position is the metadata location the term was found in (title, meta
keywords/description, headings, paragraphs, image alt text). Text anywhere
else in the page is ignored.
"""

from __future__ import annotations

import logging
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from html.parser import HTMLParser
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

logger = logging.getLogger(__name__)

STOPWORDS_ENV = "VARDF_STOPWORDS"

_TOKEN_RE = re.compile(r"[^\W_]+")


class MalformedInput(ValueError):
    """Raised when document bytes cannot be decoded as text."""


class Position(str, Enum):
    TITLE = "title"
    META_KEYWORDS = "meta_keywords"
    META_DESCRIPTION = "meta_description"
    HEADING = "heading"
    PARAGRAPH = "paragraph"
    ALT = "alt"


class Occurrence(NamedTuple):
    term: str
    position: Position
    frequency: int


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on every non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


def normalize_term(raw: str) -> str | None:
    """Return the single normalized term in ``raw``, or None if it has zero or several."""
    tokens = tokenize(raw)
    return tokens[0] if len(tokens) == 1 else None


@dataclass(frozen=True)
class StopWordList:
    words: frozenset[str] = frozenset()

    @classmethod
    def from_words(cls, words: Iterable[str]) -> StopWordList:
        normalized: set[str] = set()
        for word in words:
            normalized.update(tokenize(word))
        return cls(frozenset(normalized))

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> StopWordList:
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_words(_stopword_lines(text))

    @classmethod
    def default(cls) -> StopWordList:
        text = resources.files("vardf_crawl").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
        return cls.from_words(_stopword_lines(text))

    def __contains__(self, term: object) -> bool:
        return term in self.words

    def __len__(self) -> int:
        return len(self.words)


def _stopword_lines(text: str) -> Iterator[str]:
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def load_stopwords(path: str | os.PathLike | None = None) -> StopWordList:
    """Load a stop-word file, falling back to ``$VARDF_STOPWORDS`` and then the bundled list."""
    path = path or os.environ.get(STOPWORDS_ENV)
    if path:
        return StopWordList.from_file(path)
    return StopWordList.default()


def remove_stop_words(terms: Iterable[str], stoplist: StopWordList) -> list[str]:
    return [t for t in terms if t not in stoplist]


@dataclass(frozen=True)
class ParsedDocument:
    doc_id: str
    occurrences: frozenset[Occurrence] = frozenset()
    source_ref: str = ""

    @property
    def vocabulary(self) -> set[str]:
        return {occ.term for occ in self.occurrences}

    def frequency(self, term: str, position: Position) -> int:
        for occ in self.occurrences:
            if occ.term == term and occ.position is position:
                return occ.frequency
        return 0


_ELEMENT_POSITIONS = {
    "title": Position.TITLE,
    "h1": Position.HEADING,
    "h2": Position.HEADING,
    "h3": Position.HEADING,
    "h4": Position.HEADING,
    "h5": Position.HEADING,
    "h6": Position.HEADING,
    "p": Position.PARAGRAPH,
}
# Content of these elements is never document text, even inside a recognized element.
_OPAQUE = {"script", "style", "template", "noscript"}


class _PositionalExtractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.chunks: list[tuple[Position, str]] = []
        # innermost recognized (or opaque) element is last; None marks opaque
        self._open: list[tuple[str, Position | None]] = []

    def handle_starttag(self, tag, attrs):
        if tag == "meta":
            self._meta(dict(attrs))
        elif tag == "img":
            alt = dict(attrs).get("alt")
            if alt:
                self.chunks.append((Position.ALT, alt))
        elif tag in _ELEMENT_POSITIONS:
            self._open.append((tag, _ELEMENT_POSITIONS[tag]))
        elif tag in _OPAQUE:
            self._open.append((tag, None))

    def handle_startendtag(self, tag, attrs):
        # <p/> and friends open nothing
        if tag in _ELEMENT_POSITIONS or tag in _OPAQUE:
            return
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag):
        for i in range(len(self._open) - 1, -1, -1):
            if self._open[i][0] == tag:
                del self._open[i:]
                return

    def handle_data(self, data):
        if self._open and self._open[-1][1] is not None:
            self.chunks.append((self._open[-1][1], data))

    def _meta(self, attrs: dict[str, str | None]) -> None:
        name = (attrs.get("name") or "").strip().lower()
        content = attrs.get("content")
        if not content:
            return
        if name == "keywords":
            self.chunks.append((Position.META_KEYWORDS, content))
        elif name == "description":
            self.chunks.append((Position.META_DESCRIPTION, content))


def decode_html(raw: bytes | str) -> str:
    if isinstance(raw, str):
        return raw
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise MalformedInput(f"document is not valid UTF-8: {exc}") from exc


def parse_document(
    doc_id: str,
    html: bytes | str,
    stoplist: StopWordList | None = None,
    source_ref: str = "",
) -> ParsedDocument:
    """Decompose ``html`` into stop-word-filtered positional term occurrences.

    Tag soup is parsed best-effort. Text belongs to the innermost enclosing
    title/h1-h6/p element; meta keywords/description and img alt values are
    taken from their attributes.
    """
    if stoplist is None:
        stoplist = StopWordList.default()
    extractor = _PositionalExtractor()
    extractor.feed(decode_html(html))
    extractor.close()

    counts: Counter[tuple[str, Position]] = Counter()
    for position, text in extractor.chunks:
        for term in remove_stop_words(tokenize(text), stoplist):
            counts[term, position] += 1
    occurrences = frozenset(Occurrence(t, p, f) for (t, p), f in counts.items())
    return ParsedDocument(doc_id=doc_id, occurrences=occurrences, source_ref=source_ref)


@dataclass
class CorpusFile:
    doc_id: str
    raw: bytes
    parsed: ParsedDocument = field(repr=False)


def load_corpus(directory: str | os.PathLike, stoplist: StopWordList | None = None) -> list[CorpusFile]:
    """Read and parse every ``*.html`` file in ``directory``, sorted by doc id.

    Files that cannot be decoded are skipped with a warning.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(str(directory))
    if stoplist is None:
        stoplist = StopWordList.default()
    files = []
    for path in sorted(directory.glob("*.html")):
        raw = path.read_bytes()
        try:
            parsed = parse_document(path.stem, raw, stoplist, source_ref=str(path))
        except MalformedInput as exc:
            logger.warning("skipping %s: %s", path, exc)
            continue
        files.append(CorpusFile(path.stem, raw, parsed))
    return files
