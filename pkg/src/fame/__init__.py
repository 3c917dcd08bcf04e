"""Link critical-event records to news coverage and analyze who reports what.

The pipeline has two phases: a date-window keyword filter over a
multilingual corpus, then an LLM yes/no check on each candidate pair.
On top of the links sit evaluation tools (precision/recall/F1 per
event, annotator agreement) and cross-country attention analytics
(coverage matrices, factor regression with forward model selection).
"""

from __future__ import annotations

from .corpus import Article, Corpus, load_corpus
from .errors import (
    ConfigError,
    CorpusError,
    EvalError,
    EventStoreError,
    FameError,
    LexiconError,
    LlmError,
    MatcherError,
    RegressionError,
    TransportError,
    UnknownCountryError,
)
from .events import (
    EventFingerprint,
    EventRecord,
    EventStore,
    check_fingerprint_collisions,
    filter_gtd_salience,
    load_events,
)
from .matcher import LinkSet, MatchScope, PatternAutomaton, phase_one, phase_one_batch

__version__ = "0.1.0"

__all__ = [
    "Article",
    "ConfigError",
    "Corpus",
    "CorpusError",
    "EvalError",
    "EventFingerprint",
    "EventRecord",
    "EventStore",
    "EventStoreError",
    "FameError",
    "LexiconError",
    "LinkSet",
    "LlmError",
    "MatchScope",
    "MatcherError",
    "PatternAutomaton",
    "RegressionError",
    "TransportError",
    "UnknownCountryError",
    "__version__",
    "check_fingerprint_collisions",
    "filter_gtd_salience",
    "load_corpus",
    "load_events",
    "phase_one",
    "phase_one_batch",
]
