"""Hidden-web crawling with positional document-frequency query selection."""

from .corpus import (
    MalformedInput,
    Occurrence,
    ParsedDocument,
    Position,
    StopWordList,
    load_corpus,
    load_stopwords,
    parse_document,
    remove_stop_words,
    tokenize,
)
from .crawler import (
    CrawlReport,
    FormDescriptor,
    HttpSearchInterface,
    NetworkError,
    NoFormFound,
    NotKeywordInterface,
    analyze_form,
    crawl,
)
from .evaluation import MetricsReport, compute_metrics, evaluate, tally
from .greedy import (
    Classification,
    CrawlLimits,
    CrawlState,
    EmptySeed,
    PoolExhausted,
    QueryOutcome,
    SearchFailure,
    init_state,
    marginal_coverage,
    oracle_greedy_cover,
    run,
    step,
)
from .hidden_db import BindError, HiddenDatabase, build_database, serve
from .term_index import FormatError, IndexEntry, TermStatisticsIndex, build_index
from .weighting import TermWeight, rank_terms, vardf, varwt

__version__ = "0.1.0"
