"""Command line entry point: ``vardf-crawl``.

Subcommands: serve, crawl, evaluate, weights dump, index build.

Settings can also come from a flat ``key=value`` file given with ``--config``;
flags override the file, the file overrides defaults. The stop-word path falls
back to ``$VARDF_STOPWORDS``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .corpus import STOPWORDS_ENV, Position, load_corpus, load_stopwords
from .crawler import NetworkError, NoFormFound, NotKeywordInterface, crawl
from .evaluation import compute_metrics, evaluate
from .greedy import CrawlLimits, EmptySeed, outcomes_from_jsonl
from .hidden_db import BindError, build_database, parse_addr, serve
from .term_index import FormatError, TermStatisticsIndex, build_index
from .weighting import rank_terms

log = logging.getLogger("vardf_crawl")

DOMAIN_ERRORS = (NotKeywordInterface, NoFormFound, EmptySeed, NetworkError, FormatError, BindError)

# config-file key -> argparse dest
CONFIG_KEYS = {
    "corpus_dir": "corpus",
    "stopwords_path": "stopwords",
    "bind_addr": "addr",
    "seed_term": "seed",
    "max_queries": "max_queries",
    "db_size": "db_size",
    "output_dir": "out",
    "alpha": "alpha",
}
DEFAULTS = {
    "addr": "127.0.0.1:8000",
    "max_queries": 1000,
    "alpha": 1.0,
    "out": "crawl_output",
}
PATH_DESTS = (
    "corpus", "stopwords", "out", "report", "outcomes_jsonl", "outcomes_csv", "index", "outcomes", "output", "csv",
)
CONVERTERS = {"max_queries": int, "db_size": int, "alpha": float}


class UsageError(Exception):
    pass


@dataclass
class Config:
    corpus_dir: Path | None = None
    stopwords_path: Path | None = None
    bind_addr: str = DEFAULTS["addr"]
    seed_term: str | None = None
    max_queries: int = DEFAULTS["max_queries"]
    db_size: int | None = None
    output_dir: Path | None = None
    alpha: float = DEFAULTS["alpha"]


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: expected one of {sorted(CONFIG_KEYS)} as key=value")
        values[key] = value.strip()
    return values


def resolve_settings(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the config file, then defaults; resolve paths."""
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, dest in CONFIG_KEYS.items():
        if not hasattr(args, dest) or getattr(args, dest) is not None:
            continue
        if key in file_values:
            value = file_values[key]
            try:
                value = CONVERTERS.get(dest, str)(value)
            except ValueError:
                raise UsageError(f"config value for {key} is not valid: {value!r}") from None
            setattr(args, dest, value)
        elif dest in DEFAULTS:
            setattr(args, dest, DEFAULTS[dest])
    if hasattr(args, "stopwords") and args.stopwords is None:
        args.stopwords = os.environ.get(STOPWORDS_ENV)
    for dest in PATH_DESTS:
        value = getattr(args, dest, None)
        if value is not None:
            setattr(args, dest, Path(value).expanduser().resolve())
    return args


def config_from_args(args: argparse.Namespace) -> Config:
    return Config(
        corpus_dir=getattr(args, "corpus", None),
        stopwords_path=getattr(args, "stopwords", None),
        bind_addr=getattr(args, "addr", None) or DEFAULTS["addr"],
        seed_term=getattr(args, "seed", None),
        max_queries=getattr(args, "max_queries", None) or DEFAULTS["max_queries"],
        db_size=getattr(args, "db_size", None),
        output_dir=getattr(args, "out", None),
        alpha=getattr(args, "alpha", None) or DEFAULTS["alpha"],
    )


def _require(args, dest: str, flag: str) -> None:
    if getattr(args, dest, None) is None:
        raise UsageError(f"{args.command}: {flag} is required (flag or config file)")


# ------------------------------------------------------------------ commands


def cmd_serve(args) -> int:
    _require(args, "corpus", "--corpus")
    host, port = parse_addr(args.addr)
    db = build_database(args.corpus, load_stopwords(args.stopwords))
    handle = serve(db, host, port)
    print(f"serving {db.size} documents at {handle.url}", flush=True)
    try:
        handle.wait()
    except KeyboardInterrupt:
        pass
    finally:
        handle.shutdown()
    return 0


def cmd_crawl(args) -> int:
    _require(args, "seed", "--seed")
    if args.self_serve:
        _require(args, "corpus", "--corpus")
    elif args.url is None:
        raise UsageError("crawl: give --url or --self-serve --corpus DIR")

    stoplist = load_stopwords(args.stopwords)
    limits = CrawlLimits(max_queries=args.max_queries, db_size_hint=args.db_size, resource_budget=args.budget)

    handle = None
    url = args.url
    if args.self_serve:
        handle = serve(build_database(args.corpus, stoplist), "127.0.0.1", 0)
        url = handle.url
    try:
        report = crawl(url, args.seed, limits, args.out, stoplist, delay=args.delay, alpha=args.alpha)
    except NetworkError as exc:
        if exc.report is not None:
            _write_outputs(args, exc.report)
        raise
    finally:
        if handle is not None:
            handle.shutdown()

    _write_outputs(args, report)
    print(f"{report.total_queries} queries, {report.coverage} documents retrieved ({report.stop_reason})")
    print(report.metrics.table())
    return 0


def _write_outputs(args, report) -> None:
    if args.report:
        args.report.write_text(report.to_json(), encoding="utf-8")
    if args.outcomes_jsonl:
        args.outcomes_jsonl.write_text(report.outcomes_jsonl(), encoding="utf-8")
    if args.outcomes_csv:
        with open(args.outcomes_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["term", "docs_returned", "fresh_docs", "classification", "issued_at"])
            for o in report.outcomes:
                writer.writerow([o.term, o.docs_returned, o.fresh_docs, o.classification.value, o.issued_at])


def cmd_evaluate(args) -> int:
    counts = (args.s, args.u, args.n)
    if args.outcomes is not None:
        if any(c is not None for c in counts):
            raise UsageError("evaluate: use either --outcomes or --s/--u/--n")
        try:
            outcomes = outcomes_from_jsonl(args.outcomes.read_text(encoding="utf-8"))
        except (ValueError, KeyError) as exc:
            raise FormatError(f"{args.outcomes}: {exc}") from exc
        report = evaluate(outcomes, args.alpha)
    elif all(c is not None for c in counts):
        report = compute_metrics(*counts, alpha=args.alpha)
    else:
        raise UsageError("evaluate: give --outcomes FILE or all of --s, --u, --n")

    print(json.dumps(report.to_dict(), indent=2))
    print(report.table())
    print(report.summary_line())
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s", "u", "n", "precision", "recall", "f_measure", "alpha"])
            writer.writerow([report.s, report.u, report.n]
                            + ["n/a" if v is None else f"{v:.6g}" for v in
                               (report.precision, report.recall, report.f_measure)]
                            + [f"{report.alpha:g}"])
    return 0


def _load_index(args) -> TermStatisticsIndex:
    if args.index is not None:
        return TermStatisticsIndex.deserialize(args.index.read_bytes())
    if args.corpus is not None:
        files = load_corpus(args.corpus, load_stopwords(args.stopwords))
        return build_index(f.parsed for f in files)
    raise UsageError(f"{args.command}: give --index FILE or --corpus DIR")


def cmd_weights_dump(args) -> int:
    index = _load_index(args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["term", "weight"] + [p.value for p in Position])
    for w in rank_terms(index):
        writer.writerow([w.term, f"{w.weight:.6g}"] + [f"{w.breakdown.get(p, 0.0):.6g}" for p in Position])
    if args.output:
        Path(args.output).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_index_build(args) -> int:
    _require(args, "corpus", "--corpus")
    files = load_corpus(args.corpus, load_stopwords(args.stopwords))
    index = build_index(f.parsed for f in files)
    data = index.serialize()
    if args.output:
        Path(args.output).write_bytes(data)
        print(f"indexed {index.doc_count} documents, {len(index)} terms -> {args.output}")
    else:
        sys.stdout.write(data.decode("utf-8") + "\n")
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--stopwords", help=f"stop-word file (default: ${STOPWORDS_ENV} or bundled list)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="vardf-crawl",
        description="Crawl a keyword search interface with VarDF-ranked single-term queries.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("serve", parents=[common], help="serve a corpus behind a search form")
    p.add_argument("--corpus", help="directory of .html documents")
    p.add_argument("--addr", help="HOST:PORT to bind (default 127.0.0.1:8000)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("crawl", parents=[common], help="crawl a search interface")
    p.add_argument("--url", help="base URL of the search form page")
    p.add_argument("--self-serve", action="store_true", help="serve --corpus on an ephemeral port and crawl it")
    p.add_argument("--corpus", help="corpus directory for --self-serve")
    p.add_argument("--seed", help="domain term issued as the first query")
    p.add_argument("--max-queries", type=int)
    p.add_argument("--db-size", type=int, help="stop once this many documents are retrieved")
    p.add_argument("--budget", type=float, help="wall-clock budget in seconds")
    p.add_argument("--delay", type=float, default=0.0, help="pause between queries in seconds")
    p.add_argument("--out", help="directory for downloaded documents")
    p.add_argument("--report", help="write the crawl report as JSON")
    p.add_argument("--outcomes-jsonl", help="write the query log as JSON lines")
    p.add_argument("--outcomes-csv", help="write the query log as CSV")
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("evaluate", parents=[common], help="precision/recall/F of a query log")
    p.add_argument("--outcomes", help="query log as JSON lines")
    p.add_argument("--s", type=int, help="successful query count")
    p.add_argument("--u", type=int, help="unsuccessful query count")
    p.add_argument("--n", type=int, help="no-result query count")
    p.add_argument("--alpha", type=float)
    p.add_argument("--csv", help="also write the metrics as CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("weights", help="term weight tools")
    wsub = p.add_subparsers(dest="action", metavar="ACTION")
    w = wsub.add_parser("dump", parents=[common], help="ranked VarDF weights as CSV")
    w.add_argument("--index", help="serialized index (from `index build`)")
    w.add_argument("--corpus", help="build the index from this directory instead")
    w.add_argument("--output", "-o", help="CSV file (default stdout)")
    w.set_defaults(func=cmd_weights_dump)

    p = sub.add_parser("index", help="term statistics index tools")
    isub = p.add_subparsers(dest="action", metavar="ACTION")
    b = isub.add_parser("build", parents=[common], help="index a corpus directory")
    b.add_argument("--corpus", help="directory of .html documents")
    b.add_argument("--output", "-o", help="JSON file (default stdout)")
    b.set_defaults(func=cmd_index_build)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 2

    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    try:
        resolve_settings(args)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"vardf-crawl: error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"vardf-crawl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"vardf-crawl: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"vardf-crawl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
