"""Heuristic event-to-article filter (phase 1).

For each event fingerprint the matcher takes the date-window slice of
the corpus and keeps articles whose scoped text contains at least one
location keyword and at least one class keyword. Keywords hit on whole
token sequences: text and patterns are case-folded, tokenized into
letter/digit runs, and a multi-word keyword must appear as contiguous
tokens. "mindia" therefore never hits "india".
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import timedelta
from enum import Enum
from pathlib import Path

from .corpus import Corpus, extract_head
from .errors import MatcherError
from .events import EventFingerprint, EventStore
from .lexicon import KeywordLexicon
from .text import fold_tokens

logger = logging.getLogger(__name__)

EVIDENCE_CAP = 32

Tag = tuple[str, str, str]  # (kind, key, keyword) with kind class|location


class MatchScope(Enum):
    title_only = "title_only"
    title_plus_head = "title_plus_head"
    title_plus_body = "title_plus_body"


class PatternAutomaton:
    """Multi-pattern token matcher compiled from one lexicon.

    Single-token keywords live in a token→tags table so a document scan
    is a set intersection; multi-token keywords are indexed by first
    token and verified positionally.
    """

    def __init__(self) -> None:
        self._single: dict[str, tuple[Tag, ...]] = {}
        self._multi: dict[str, tuple[tuple[tuple[str, ...], Tag], ...]] = {}
        self._single_keys: frozenset[str] = frozenset()
        self._multi_keys: frozenset[str] = frozenset()
        self.class_keys: frozenset[str] = frozenset()
        self.location_keys: frozenset[str] = frozenset()
        self.pattern_count = 0
        self.compile_seconds = 0.0

    @classmethod
    def compile(cls, lexicon: KeywordLexicon) -> "PatternAutomaton":
        started = time.perf_counter()
        auto = cls()
        single: dict[str, list[Tag]] = {}
        multi: dict[str, list[tuple[tuple[str, ...], Tag]]] = {}
        count = 0
        for kind, sets in (("class", lexicon.class_sets), ("location", lexicon.location_sets)):
            for key in sorted(sets):
                for keyword in sorted(sets[key].entries):
                    tokens = tuple(fold_tokens(keyword))
                    if not tokens:
                        continue
                    tag: Tag = (kind, key, keyword)
                    if len(tokens) == 1:
                        single.setdefault(tokens[0], []).append(tag)
                    else:
                        multi.setdefault(tokens[0], []).append((tokens[1:], tag))
                    count += 1
        if count == 0:
            raise MatcherError("cannot compile an empty lexicon")
        auto._single = {tok: tuple(tags) for tok, tags in single.items()}
        auto._multi = {tok: tuple(rest) for tok, rest in multi.items()}
        auto._single_keys = frozenset(auto._single)
        auto._multi_keys = frozenset(auto._multi)
        auto.class_keys = frozenset(lexicon.class_sets)
        auto.location_keys = frozenset(lexicon.location_sets)
        auto.pattern_count = count
        auto.compile_seconds = time.perf_counter() - started
        logger.debug("compiled %d patterns in %.3fs", count, auto.compile_seconds)
        return auto

    def scan_tokens(self, tokens: list[str]) -> set[Tag]:
        """All keyword hits in a folded token sequence."""
        hits: set[Tag] = set()
        token_set = set(tokens)
        for tok in token_set & self._single_keys:
            hits.update(self._single[tok])
        if token_set & self._multi_keys:
            n = len(tokens)
            for i, tok in enumerate(tokens):
                entries = self._multi.get(tok)
                if not entries:
                    continue
                for rest, tag in entries:
                    end = i + 1 + len(rest)
                    if end <= n and tuple(tokens[i + 1 : end]) == rest:
                        hits.add(tag)
        return hits

    def scan_text(self, text: str) -> set[Tag]:
        return self.scan_tokens(fold_tokens(text))


def scope_text(article, scope: MatchScope) -> str:
    """The text a scope exposes to keyword matching."""
    if scope is MatchScope.title_only:
        return article.title
    if scope is MatchScope.title_plus_head:
        head = extract_head(article)
        return head.title + " " + " ".join(head.lead_sentences)
    return article.title + " " + article.body


@dataclass
class LinkSet:
    """Per-event article links, by pipeline phase, with match evidence."""

    phase1: dict[str, set[str]] = field(default_factory=dict)
    phase2: dict[str, set[str]] = field(default_factory=dict)
    evidence: dict[str, dict[str, tuple[str, ...]]] = field(default_factory=dict)
    collisions: dict[str, tuple[str, ...]] = field(default_factory=dict)
    phase2_populated: bool = False
    meta: dict = field(default_factory=dict)

    def event_ids(self) -> list[str]:
        return list(self.phase1)

    def links_for(self, event_id: str, phase: str) -> set[str]:
        table = self.phase1 if phase == "phase1" else self.phase2
        return set(table.get(event_id, set()))

    def validate(self, corpus: Corpus | None = None) -> None:
        """Assert phase2 ⊆ phase1 (and ids ∈ corpus when given)."""
        for event_id, p2 in self.phase2.items():
            p1 = self.phase1.get(event_id, set())
            extra = p2 - p1
            if extra:
                raise MatcherError(
                    f"event {event_id}: phase2 not within phase1 ({sorted(extra)[:5]}...)"
                )
        if corpus is not None:
            for table in (self.phase1, self.phase2):
                for event_id, ids in table.items():
                    for aid in ids:
                        if aid not in corpus:
                            raise MatcherError(f"event {event_id}: unknown article {aid!r}")


def phase_one(
    event: EventFingerprint,
    corpus: Corpus,
    automaton: PatternAutomaton,
    scope: MatchScope = MatchScope.title_plus_body,
    window_days: int = 7,
    window_before_days: int = 0,
) -> tuple[set[str], dict[str, tuple[str, ...]]]:
    """Matched article ids for one fingerprint, with keyword evidence."""
    _require_keys(event, automaton)
    matched: set[str] = set()
    evidence: dict[str, tuple[str, ...]] = {}
    start = event.start_date - timedelta(days=window_before_days)
    end = event.start_date + timedelta(days=window_days)
    for aid in corpus.slice_ids(start, end):
        hits = automaton.scan_tokens(fold_tokens(scope_text(corpus.get(aid), scope)))
        kws = _event_evidence(hits, event)
        if kws is not None:
            matched.add(aid)
            evidence[aid] = kws
    return matched, evidence


def _require_keys(event: EventFingerprint, automaton: PatternAutomaton) -> None:
    if event.event_class not in automaton.class_keys:
        raise MatcherError(f"event class {event.event_class!r} missing from lexicon")
    if event.country not in automaton.location_keys:
        raise MatcherError(f"country {event.country!r} missing from lexicon")


def _event_evidence(hits: set[Tag], event: EventFingerprint) -> tuple[str, ...] | None:
    """Evidence keywords when both rules hit, else None."""
    class_kws = [kw for kind, key, kw in hits if kind == "class" and key == event.event_class]
    if not class_kws:
        return None
    loc_kws = [kw for kind, key, kw in hits if kind == "location" and key == event.country]
    if not loc_kws:
        return None
    return tuple(sorted(set(class_kws) | set(loc_kws))[:EVIDENCE_CAP])


def phase_one_batch(
    events: EventStore,
    corpus: Corpus,
    automaton: PatternAutomaton,
    scope: MatchScope = MatchScope.title_plus_body,
    window_days: int = 7,
    window_before_days: int = 0,
    jobs: int = 1,
) -> LinkSet:
    """phase_one over a whole store; identical to per-event calls.

    Records sharing a fingerprint are scanned once and the result is
    duplicated per record id and flagged as a collision. Article hit
    sets are cached, so overlapping windows never rescan an article.
    """
    for record in events:
        _require_keys(record.fingerprint, automaton)
    index = events.index
    fingerprints = list(index.items())
    hit_cache: dict[str, set[Tag]] = {}

    def article_hits(aid: str) -> set[Tag]:
        hits = hit_cache.get(aid)
        if hits is None:
            hits = automaton.scan_tokens(fold_tokens(scope_text(corpus.get(aid), scope)))
            hit_cache[aid] = hits
        return hits

    def solve(fp: EventFingerprint) -> tuple[list[str], dict[str, tuple[str, ...]]]:
        matched: list[str] = []
        evidence: dict[str, tuple[str, ...]] = {}
        start = fp.start_date - timedelta(days=window_before_days)
        end = fp.start_date + timedelta(days=window_days)
        for aid in corpus.slice_ids(start, end):
            kws = _event_evidence(article_hits(aid), fp)
            if kws is not None:
                matched.append(aid)
                evidence[aid] = kws
        return matched, evidence

    if jobs > 1 and len(fingerprints) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(solve, (fp for fp, _ in fingerprints)))
    else:
        solved = [solve(fp) for fp, _ in fingerprints]

    links = LinkSet()
    per_fp = {fp: result for (fp, _), result in zip(fingerprints, solved)}
    for record in events:
        matched, evidence = per_fp[record.fingerprint]
        links.phase1[record.id] = set(matched)
        links.evidence[record.id] = dict(evidence)
        siblings = index[record.fingerprint]
        if len(siblings) > 1:
            links.collisions[record.id] = tuple(siblings)
    return links


def save_linkset(links: LinkSet, path: str | Path, meta: dict | None = None) -> None:
    """Write one JSONL line per event per phase, deterministically.

    An optional `_meta` header line carries run provenance (config hash,
    seed). Article ids and evidence keys are sorted within each line.
    """
    header = dict(links.meta)
    if meta:
        header.update(meta)
    with Path(path).open("w", encoding="utf-8") as fh:
        if header:
            fh.write(json.dumps({"_meta": header}, sort_keys=True, separators=(",", ":")) + "\n")
        for event_id in links.phase1:
            obj = {
                "event_id": event_id,
                "phase": "phase1",
                "article_ids": sorted(links.phase1[event_id]),
                "evidence": {
                    aid: list(kws) for aid, kws in sorted(links.evidence.get(event_id, {}).items())
                },
            }
            if event_id in links.collisions:
                obj["collision"] = list(links.collisions[event_id])
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
        if links.phase2_populated:
            for event_id in links.phase1:
                obj = {
                    "event_id": event_id,
                    "phase": "phase2",
                    "article_ids": sorted(links.phase2.get(event_id, set())),
                }
                fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def load_linkset(path: str | Path) -> LinkSet:
    links = LinkSet()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MatcherError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if "_meta" in obj:
                links.meta.update(obj["_meta"])
                continue
            event_id = obj["event_id"]
            phase = obj["phase"]
            ids = set(obj.get("article_ids", []))
            if phase == "phase1":
                links.phase1[event_id] = ids
                links.evidence[event_id] = {
                    aid: tuple(kws) for aid, kws in (obj.get("evidence") or {}).items()
                }
                if obj.get("collision"):
                    links.collisions[event_id] = tuple(obj["collision"])
            elif phase == "phase2":
                links.phase2[event_id] = ids
                links.phase2_populated = True
                links.phase1.setdefault(event_id, set())
            else:
                raise MatcherError(f"{path}:{lineno}: unknown phase {phase!r}")
    links.validate()
    return links
