"""Command-line pipeline: ingest → lexicon → match → filter → analyze.

Every subcommand reads plain files and writes plain JSONL/CSV/JSON, so
runs are diff-able and resumable at phase boundaries. Outputs carry a
provenance header (config hash + seed). Errors exit nonzero with one
machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from statistics import median

from . import attention, evalkit, llm
from .config import PipelineConfig, meta_comment, run_meta
from .corpus import Corpus, load_blocklist, load_corpus
from .errors import ConfigError, FameError
from .events import (
    EventStore,
    check_fingerprint_collisions,
    filter_gtd_salience,
    load_events,
    save_events,
)
from .lexicon import (
    Gazetteer,
    KeywordLexicon,
    apply_extra_keywords,
    build_class_set,
    build_location_set,
    expand_with_sampler,
    load_lexicon,
    save_lexicon,
)
from .matcher import LinkSet, MatchScope, PatternAutomaton, load_linkset, phase_one_batch, save_linkset

logger = logging.getLogger(__name__)


class _JsonLogFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True)


def _setup_logging(verbose: bool, log_json: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if log_json:
        handler.setFormatter(_JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


@dataclass
class FunnelReport:
    """Per-language article totals and per-event spread at each phase."""

    languages: dict[str, dict[str, object]] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"languages": self.languages}, indent=2, sort_keys=True)


def build_funnel(corpus: Corpus, links: LinkSet) -> FunnelReport:
    report = FunnelReport()
    for language in corpus.languages():
        lang_ids = set(corpus.language_ids(language))
        phase1_counts = [len(ids & lang_ids) for ids in links.phase1.values()]
        union1 = set().union(*links.phase1.values()) & lang_ids if links.phase1 else set()
        entry: dict[str, object] = {
            "total_articles": len(lang_ids),
            "phase1_total": len(union1),
            "phase1_median": float(median(phase1_counts)) if phase1_counts else 0.0,
            "phase1_max": max(phase1_counts, default=0),
        }
        if links.phase2_populated:
            phase2_counts = [len(ids & lang_ids) for ids in links.phase2.values()]
            union2 = set().union(*links.phase2.values()) & lang_ids if links.phase2 else set()
            entry["phase2_total"] = len(union2)
            entry["phase2_median"] = float(median(phase2_counts)) if phase2_counts else 0.0
            entry["phase2_max"] = max(phase2_counts, default=0)
        report.languages[language] = entry
    return report


# --------------------------------------------------------------------------
# Shared option plumbing


def _opt(args: argparse.Namespace, config: PipelineConfig | None, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if config is not None and key in config.values:
        return config.values[key]
    return default


def _require(args, config, key: str):
    value = _opt(args, config, key)
    if value is None:
        raise ConfigError(f"missing required option --{key.replace('_', '-')}")
    return value


def _split_csv(value) -> list[str] | None:
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [part.strip() for part in str(value).split(",") if part.strip()]


def _parse_scope(value: str) -> MatchScope:
    try:
        return MatchScope(value)
    except ValueError:
        raise ConfigError(f"unknown scope {value!r}") from None


def _parse_date(value) -> date:
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"invalid date {value!r}") from None


def _load_corpus_opts(args, config) -> Corpus:
    path = _require(args, config, "corpus")
    languages = _split_csv(_opt(args, config, "languages"))
    start = _opt(args, config, "date_start")
    end = _opt(args, config, "date_end")
    date_range = None
    if start is not None or end is not None:
        if start is None or end is None:
            raise ConfigError("date filtering needs both --date-start and --date-end")
        date_range = (_parse_date(start), _parse_date(end))
    blocklist_path = _opt(args, config, "blocklist")
    blocklist = load_blocklist(blocklist_path) if blocklist_path else None
    return load_corpus(
        path,
        languages=set(languages) if languages else None,
        date_range=date_range,
        blocklist=blocklist,
        on_malformed=str(_opt(args, config, "on_malformed", "skip")),
        jobs=int(_opt(args, config, "jobs", 1) or 1),
    )


def _make_client(args, config) -> llm.LlmClient:
    spec = str(_require(args, config, "client"))
    model = _opt(args, config, "model")
    if spec.startswith("mock:"):
        return llm.MockScriptClient(spec[len("mock:") :], model_id=str(model or "mock"))
    if spec == "http":
        endpoint = _require(args, config, "endpoint")
        if model is None:
            raise ConfigError("--client=http needs --model")
        return llm.HttpChatClient(endpoint=str(endpoint), model_id=str(model))
    raise ConfigError(f"unknown client spec {spec!r} (use mock:<script.jsonl> or http)")


def _wrap_meta_json(payload_json: str, meta: dict) -> str:
    obj = json.loads(payload_json)
    obj["_meta"] = meta
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True)


def _filter_links_language(links: LinkSet, corpus: Corpus, language: str | None) -> LinkSet:
    if language is None:
        return links
    allowed = set(corpus.language_ids(language))
    return LinkSet(
        phase1={k: v & allowed for k, v in links.phase1.items()},
        phase2={k: v & allowed for k, v in links.phase2.items()},
        evidence=links.evidence,
        collisions=links.collisions,
        phase2_populated=links.phase2_populated,
        meta=dict(links.meta),
    )


# --------------------------------------------------------------------------
# Subcommands


def _cmd_ingest(args, config, meta) -> int:
    mapping = None
    if _opt(args, config, "mapping"):
        mapping = {}
        for pair in _split_csv(_opt(args, config, "mapping")) or []:
            logical, _, actual = pair.partition("=")
            if not actual:
                raise ConfigError(f"bad --mapping entry {pair!r} (want logical=column)")
            mapping[logical.strip()] = actual.strip()
    store = load_events(
        _require(args, config, "events"),
        format=_opt(args, config, "format"),
        mapping=mapping,
        strict=bool(_opt(args, config, "strict", False)),
    )
    if _opt(args, config, "salience_filter", False):
        store = filter_gtd_salience(store)
    collisions = check_fingerprint_collisions(store)
    out = _opt(args, config, "out")
    if out:
        save_events(store, out)
    collisions_out = _opt(args, config, "collisions_out")
    if collisions_out:
        payload = dict(sorted(collisions.items()))
        payload["_meta"] = meta
        Path(collisions_out).write_text(
            json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n", "utf-8"
        )
    print(
        json.dumps(
            {
                "records": len(store),
                "rejected_rows": len(store.rejected),
                "fingerprint_collisions": len(collisions),
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_lexicon(args, config, meta) -> int:
    language = str(_opt(args, config, "language", "en"))
    lex = KeywordLexicon(language=language)
    classes = _split_csv(_opt(args, config, "classes"))
    if classes is None:
        classes = sorted(llm.load_class_info())
    countries = _split_csv(_opt(args, config, "countries")) or []
    gazetteer = Gazetteer.load(
        country_info=_opt(args, config, "gazetteer_countries"),
        admin1_path=_opt(args, config, "admin1"),
        cities_path=_opt(args, config, "cities"),
    )
    top_cities = int(_opt(args, config, "top_cities", 5000))
    for code in countries:
        resolved = gazetteer.countries.resolve(code)
        lex.location_sets[resolved] = build_location_set(resolved, gazetteer, top_cities)
    for cls in classes:
        lex.class_sets[cls] = build_class_set(cls, language)
    expand_spec = _opt(args, config, "expand_client")
    if expand_spec:
        client = llm.MockScriptClient(str(expand_spec)[len("mock:") :]) if str(
            expand_spec
        ).startswith("mock:") else None
        if client is None:
            raise ConfigError("--expand-client supports mock:<script.jsonl> only")
        sampler = llm.synonym_sampler(client)
        runs = int(_opt(args, config, "expand_runs", 8))
        threshold = _opt(args, config, "vote_threshold", 0.5)
        for cls in classes:
            accepted = expand_with_sampler(lex.class_sets[cls], sampler, runs, threshold)
            if accepted:
                logger.info("class %s: accepted %d sampled keywords", cls, len(accepted))
    extra = _opt(args, config, "extra_keywords")
    if extra:
        added = apply_extra_keywords(lex, extra)
        logger.info("merged %d extra keywords", added)
    lex.ensure_universe(classes, countries=[gazetteer.countries.resolve(c) for c in countries])
    out = _require(args, config, "out")
    save_lexicon(lex, out)
    print(
        json.dumps(
            {
                "language": language,
                "classes": len(lex.class_sets),
                "locations": len(lex.location_sets),
                "keywords": lex.total_keywords(),
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_match(args, config, meta) -> int:
    store = load_events(_require(args, config, "events"))
    corpus = _load_corpus_opts(args, config)
    lexicon = load_lexicon(_require(args, config, "lexicon"))
    automaton = PatternAutomaton.compile(lexicon)
    scope = _parse_scope(str(_opt(args, config, "scope", "title_plus_body")))
    links = phase_one_batch(
        store,
        corpus,
        automaton,
        scope=scope,
        window_days=int(_opt(args, config, "window_days", 7)),
        window_before_days=int(_opt(args, config, "window_before_days", 0)),
        jobs=int(_opt(args, config, "jobs", 1) or 1),
    )
    save_linkset(links, _require(args, config, "out"), meta=meta)
    union = set().union(*links.phase1.values()) if links.phase1 else set()
    print(
        json.dumps(
            {
                "events": len(store),
                "patterns": automaton.pattern_count,
                "phase1_total": len(union),
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_filter(args, config, meta) -> int:
    links = load_linkset(_require(args, config, "links"))
    corpus = _load_corpus_opts(args, config)
    store = load_events(_require(args, config, "events"))
    client = _make_client(args, config)
    template = llm.PromptTemplate(variant=str(_opt(args, config, "template", "simple")))
    cache_path = _opt(args, config, "cache")
    cache = llm.ReplayCache(cache_path) if cache_path else None
    rate_value = _opt(args, config, "rate")
    rate = llm.RateLimiter(float(rate_value)) if rate_value else None
    fingerprints = {record.id: record.fingerprint for record in store}
    out_links, verdicts = llm.phase_two(
        links,
        corpus,
        client,
        template,
        fingerprints,
        indeterminate=str(_opt(args, config, "indeterminate", "drop")),
        cache=cache,
        jobs=int(_opt(args, config, "jobs", 1) or 1),
        rate=rate,
    )
    save_linkset(out_links, _require(args, config, "out"), meta=meta)
    verdicts_out = _opt(args, config, "verdicts")
    if verdicts_out:
        llm.save_verdicts(verdicts, verdicts_out)
    kept = sum(len(v) for v in out_links.phase2.values())
    print(
        json.dumps(
            {"pairs": len(verdicts), "kept": kept, "client_calls": client.calls},
            sort_keys=True,
        )
    )
    return 0


def _cmd_evaluate(args, config, meta) -> int:
    labels_a = _opt(args, config, "labels_a")
    labels_b = _opt(args, config, "labels_b")
    if labels_a or labels_b:
        if not (labels_a and labels_b):
            raise ConfigError("agreement needs both --labels-a and --labels-b")
        a = evalkit.load_labels(labels_a)
        b = evalkit.load_labels(labels_b)
        percent, kappa = evalkit.agreement(a, b)
        print(json.dumps({"percent_agreement": percent, "kappa": kappa}, sort_keys=True))
        return 0
    links = load_linkset(_require(args, config, "links"))
    if _opt(args, config, "sample", False):
        store = load_events(_require(args, config, "events"))
        corpus = _load_corpus_opts(args, config)
        plan = evalkit.sample_for_annotation(
            store,
            links,
            corpus,
            per_class=int(_opt(args, config, "per_class", 3)),
            per_class_attack=int(_opt(args, config, "per_class_attack", 4)),
            min_p1=int(_opt(args, config, "min_p1", 30)),
            min_p2=int(_opt(args, config, "min_p2", 5)),
            cap=int(_opt(args, config, "cap", 150)),
            seed=int(_opt(args, config, "seed", 0) or 0),
        )
        out = _require(args, config, "out")
        Path(out).write_text(_wrap_meta_json(plan.to_json(), meta) + "\n", "utf-8")
        print(json.dumps({"classes": len(plan.per_class), "notes": plan.notes}, sort_keys=True))
        return 0
    gold = evalkit.load_labels(_require(args, config, "labels"), with_annotator=False)
    report = evalkit.score(
        links,
        gold,
        phase=str(_opt(args, config, "phase", "phase2")),
        strict=bool(_opt(args, config, "strict", False)),
    )
    report_out = _opt(args, config, "report")
    if report_out:
        Path(report_out).write_text(_wrap_meta_json(report.to_json(), meta) + "\n", "utf-8")
    csv_out = _opt(args, config, "csv")
    if csv_out:
        Path(csv_out).write_text(meta_comment(meta) + "\n" + report.to_csv(), "utf-8")
    print(report.format_table())
    return 0


def _cmd_rank(args, config, meta) -> int:
    links = load_linkset(_require(args, config, "links"))
    store = load_events(_require(args, config, "events"))
    phase = str(_opt(args, config, "phase", "phase2"))
    if phase == "phase2" and not links.phase2_populated:
        phase = "phase1"
        logger.info("phase2 not populated; ranking on phase1")
    ranking = attention.rank_events(links, store, k=int(_opt(args, config, "k", 10)), phase=phase)
    out = _opt(args, config, "out")
    if out:
        Path(out).write_text(meta_comment(meta) + "\n" + attention.ranking_to_csv(ranking), "utf-8")
    for row in ranking:
        deaths = ";".join("" if d is None else str(d) for d in row.deaths)
        print(f"{row.article_count:8d}  {row.fingerprint_key}  deaths={deaths}")
    return 0


def _cmd_coverage(args, config, meta) -> int:
    links = load_linkset(_require(args, config, "links"))
    store = load_events(_require(args, config, "events"))
    corpus = _load_corpus_opts(args, config)
    language = _opt(args, config, "language")
    links = _filter_links_language(links, corpus, str(language) if language else None)
    matrix = attention.coverage_matrix(
        links,
        store,
        corpus,
        min_event_countries=int(_opt(args, config, "min_event_countries", 10)),
        reporters=_split_csv(_opt(args, config, "reporters")),
        phase=str(_opt(args, config, "phase", "phase2")),
    )
    out = _require(args, config, "out")
    Path(out).write_text(meta_comment(meta) + "\n" + matrix.to_csv(), "utf-8")
    print(
        json.dumps(
            {
                "reporters": matrix.reporters,
                "event_countries": len(matrix.event_countries),
                "unknown_outlet_articles": matrix.unknown_outlet_articles,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_regress(args, config, meta) -> int:
    links = load_linkset(_require(args, config, "links"))
    store = load_events(_require(args, config, "events"))
    corpus = _load_corpus_opts(args, config)
    attrs = attention.CountryAttributes.load(_require(args, config, "attrs"))
    pair_attrs = attention.CountryPairAttributes.load(_require(args, config, "pair_attrs"))
    language = _opt(args, config, "language")
    links = _filter_links_language(links, corpus, str(language) if language else None)
    phase = str(_opt(args, config, "phase", "phase2"))
    if phase == "phase2" and not links.phase2_populated:
        phase = "phase1"
        logger.info("phase2 not populated; regressing on phase1 links")
    matrix = attention.coverage_matrix(
        links,
        store,
        corpus,
        min_event_countries=int(_opt(args, config, "min_event_countries", 10)),
        reporters=_split_csv(_opt(args, config, "reporters")),
        phase=phase,
    )
    if not matrix.reporters or not matrix.event_countries:
        raise ConfigError("coverage matrix is empty; nothing to regress")
    y = matrix.values()
    transform = str(_opt(args, config, "dv_transform", "raw"))
    if transform == "log1p":
        import numpy as np

        y = np.log1p(y)
    elif transform == "minmax":
        lo, hi = y.min(), y.max()
        y = (y - lo) / (hi - lo) if hi > lo else y * 0.0
    elif transform != "raw":
        raise ConfigError(f"unknown dv transform {transform!r}")
    deaths = attention.deaths_by_country(store)
    factors = attention.build_factors(
        matrix.pairs(),
        attrs,
        pair_attrs,
        deaths,
        allow_missing_pairs=bool(_opt(args, config, "allow_missing_pairs", False)),
    )
    processed = attention.preprocess(factors)
    result = attention.forward_aic(processed, y)
    report_out = _opt(args, config, "report")
    if report_out:
        Path(report_out).write_text(_wrap_meta_json(result.to_json(), meta) + "\n", "utf-8")
    table_out = _opt(args, config, "table")
    if table_out:
        Path(table_out).write_text(meta_comment(meta) + "\n" + result.format_table() + "\n", "utf-8")
    print(result.format_table())
    if len(result.selected) >= 2:
        idx = [processed.columns.index(name) for name in result.selected]
        vifs = attention.vif(processed.data[:, idx], columns=result.selected)
        print("VIF: " + ", ".join(f"{k}={v:.2f}" for k, v in vifs.items()))
    return 0


def _cmd_funnel(args, config, meta) -> int:
    corpus = _load_corpus_opts(args, config)
    links = load_linkset(_require(args, config, "links"))
    report = build_funnel(corpus, links)
    out = _opt(args, config, "out")
    if out:
        Path(out).write_text(_wrap_meta_json(report.to_json(), meta) + "\n", "utf-8")
    print(report.to_json())
    return 0


# --------------------------------------------------------------------------
# Parser


def _add_common(sub: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "events": dict(help="events CSV/JSONL"),
        "corpus": dict(help="corpus JSONL file or shard directory"),
        "links": dict(help="LinkSet JSONL"),
        "out": dict(help="output path"),
        "languages": dict(help="comma-separated language filter"),
        "date_start": dict(help="corpus date filter start (ISO)"),
        "date_end": dict(help="corpus date filter end (ISO)"),
        "blocklist": dict(help="hostname blocklist file"),
        "phase": dict(help="phase1 or phase2"),
    }
    for name in names:
        sub.add_argument(f"--{name.replace('_', '-')}", **flags.get(name, {}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fame",
        description="Link critical events to news coverage and analyze attention patterns",
    )
    parser.add_argument("--config", help="JSON or key=value config file")
    parser.add_argument("--jobs", type=int, help="worker threads (default 1)")
    parser.add_argument("--seed", type=int, help="seed recorded in outputs (default 0)")
    parser.add_argument("--log-json", action="store_true", help="JSON-line logs on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("ingest", help="load, validate, and index events")
    _add_common(sub, "events", "out")
    sub.add_argument("--format", choices=["csv", "jsonl"])
    sub.add_argument("--mapping", help="logical=column pairs, comma separated")
    sub.add_argument("--strict", action="store_const", const=True)
    sub.add_argument("--salience-filter", action="store_const", const=True,
                     help="apply the attack salience rule (>10 casualties or top 3 per country)")
    sub.add_argument("--collisions-out", help="write the fingerprint collision report JSON")

    sub = subs.add_parser("lexicon", help="build per-language keyword sets")
    _add_common(sub, "out")
    sub.add_argument("--language")
    sub.add_argument("--classes", help="comma-separated class list (default: packaged classes)")
    sub.add_argument("--countries", help="comma-separated country codes")
    sub.add_argument("--gazetteer-countries", help="country info CSV (default packaged)")
    sub.add_argument("--admin1", help="admin1 CSV: code,name")
    sub.add_argument("--cities", help="cities CSV: city,code,population")
    sub.add_argument("--top-cities", type=int)
    sub.add_argument("--extra-keywords", help="manual keyword JSON to merge")
    sub.add_argument("--expand-client", help="mock:<script.jsonl> synonym sampler")
    sub.add_argument("--expand-runs", type=int)
    sub.add_argument("--vote-threshold", type=float)

    sub = subs.add_parser("match", help="phase-1 keyword/date filtering")
    _add_common(sub, "events", "corpus", "out", "languages", "date_start", "date_end", "blocklist")
    sub.add_argument("--lexicon", help="lexicon JSON")
    sub.add_argument("--scope", choices=[s.value for s in MatchScope])
    sub.add_argument("--window-days", type=int)
    sub.add_argument("--window-before-days", type=int)

    sub = subs.add_parser("filter", help="phase-2 LLM question answering")
    _add_common(sub, "links", "corpus", "events", "out", "languages", "date_start", "date_end", "blocklist")
    sub.add_argument("--client", help="mock:<script.jsonl> or http")
    sub.add_argument("--model")
    sub.add_argument("--endpoint")
    sub.add_argument("--template", choices=list(llm.VARIANTS))
    sub.add_argument("--indeterminate", choices=["drop", "keep", "retry"])
    sub.add_argument("--cache", help="replay cache JSONL path")
    sub.add_argument("--rate", type=float, help="max requests per second")
    sub.add_argument("--verdicts", help="verdict log output path")

    sub = subs.add_parser("evaluate", help="score links, sample, or compute agreement")
    _add_common(sub, "links", "events", "corpus", "out", "languages", "phase")
    sub.add_argument("--labels", help="adjudicated labels CSV")
    sub.add_argument("--labels-a", help="annotator A labels CSV (agreement mode)")
    sub.add_argument("--labels-b", help="annotator B labels CSV (agreement mode)")
    sub.add_argument("--strict", action="store_const", const=True)
    sub.add_argument("--report", help="JSON report output path")
    sub.add_argument("--csv", help="per-event CSV output path")
    sub.add_argument("--sample", action="store_const", const=True, help="write an annotation plan")
    sub.add_argument("--per-class", type=int)
    sub.add_argument("--per-class-attack", type=int)
    sub.add_argument("--min-p1", type=int)
    sub.add_argument("--min-p2", type=int)
    sub.add_argument("--cap", type=int)

    sub = subs.add_parser("rank", help="top events by linked articles")
    _add_common(sub, "links", "events", "out", "phase")
    sub.add_argument("--k", type=int)

    sub = subs.add_parser("coverage", help="reporter-by-event-country coverage matrix")
    _add_common(sub, "links", "events", "corpus", "out", "languages", "phase")
    sub.add_argument("--language", help="restrict links to articles in this language")
    sub.add_argument("--min-event-countries", type=int)
    sub.add_argument("--reporters", help="explicit reporter country codes, comma separated")

    sub = subs.add_parser("regress", help="factor regression on coverage averages")
    _add_common(sub, "links", "events", "corpus", "languages", "phase")
    sub.add_argument("--attrs", help="country attributes CSV")
    sub.add_argument("--pair-attrs", help="country-pair attributes CSV")
    sub.add_argument("--language")
    sub.add_argument("--min-event-countries", type=int)
    sub.add_argument("--reporters")
    sub.add_argument("--dv-transform", choices=["raw", "log1p", "minmax"])
    sub.add_argument("--allow-missing-pairs", action="store_const", const=True)
    sub.add_argument("--report", help="JSON report output path")
    sub.add_argument("--table", help="text table output path")

    sub = subs.add_parser("funnel", help="per-language totals and per-event spread")
    _add_common(sub, "corpus", "links", "out", "languages", "date_start", "date_end", "blocklist")

    return parser


_HANDLERS = {
    "ingest": _cmd_ingest,
    "lexicon": _cmd_lexicon,
    "match": _cmd_match,
    "filter": _cmd_filter,
    "evaluate": _cmd_evaluate,
    "rank": _cmd_rank,
    "coverage": _cmd_coverage,
    "regress": _cmd_regress,
    "funnel": _cmd_funnel,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(bool(args.verbose), bool(args.log_json))
    try:
        config = PipelineConfig.load(args.config) if args.config else None
        if config is not None:
            config.validate_paths()
        seed = int(_opt(args, config, "seed", 0) or 0)
        meta = run_meta(config, seed)
        return _HANDLERS[args.command](args, config, meta)
    except FameError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n"
        )
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
