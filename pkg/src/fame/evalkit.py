"""Annotation sampling, agreement, and linking-quality scoring.

Scoring is per event: precision, recall, and F1 against adjudicated
labels, macro-averaged over events that have at least one gold-positive
article. Per-event extremes are part of every report because mean
scores can hide very weak events.
"""

from __future__ import annotations

import csv
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median

from .corpus import Corpus
from .errors import EvalError
from .events import EventStore
from .lexicon import KeywordLexicon
from .matcher import LinkSet, MatchScope, PatternAutomaton, phase_one_batch

logger = logging.getLogger(__name__)

LABELS = ("positive", "negative")

ELIGIBILITY_RULE = "events with at least one gold-positive article"


@dataclass(frozen=True)
class AnnotationLabel:
    event_id: str
    article_id: str
    label: str
    annotator: str = ""

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise EvalError(f"unknown label {self.label!r}")


def load_labels(path: str | Path, with_annotator: bool = True) -> list[AnnotationLabel]:
    """CSV `event_id, article_id, label[, annotator]`; duplicates fail."""
    labels: list[AnnotationLabel] = []
    seen: set[tuple[str, str, str]] = set()
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for rownum, row in enumerate(csv.DictReader(fh), 1):
            annotator = (row.get("annotator") or "").strip() if with_annotator else ""
            label = AnnotationLabel(
                event_id=row["event_id"].strip(),
                article_id=row["article_id"].strip(),
                label=row["label"].strip().lower(),
                annotator=annotator,
            )
            key = (label.event_id, label.article_id, label.annotator)
            if key in seen:
                raise EvalError(f"{path} row {rownum}: duplicate label for {key}")
            seen.add(key)
            labels.append(label)
    return labels


@dataclass
class SamplingPlan:
    """Events chosen per class, with the article list to annotate."""

    per_class: dict[str, list[tuple[str, list[str]]]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        obj = {
            "classes": {
                cls: [{"event_id": eid, "article_ids": aids} for eid, aids in entries]
                for cls, entries in sorted(self.per_class.items())
            },
            "notes": list(self.notes),
        }
        return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True)


def sample_for_annotation(
    events: EventStore,
    links: LinkSet,
    corpus: Corpus,
    per_class: int = 3,
    per_class_attack: int = 4,
    min_p1: int = 30,
    min_p2: int = 5,
    cap: int = 150,
    seed: int = 0,
) -> SamplingPlan:
    """Pick events per class and list their first `cap` phase-1 articles.

    An event is eligible when it has ≥ min_p1 phase-1 and ≥ min_p2
    phase-2 articles. Classes with more eligible events than the quota
    are sampled uniformly with the seed; otherwise all eligible events
    are taken. Article lists follow (publish_date, id) order.
    """
    if not links.phase2_populated:
        raise EvalError("sampling requires phase-2 links")
    eligible_by_class: dict[str, list[str]] = {}
    for record in events:
        p1 = links.phase1.get(record.id, set())
        p2 = links.phase2.get(record.id, set())
        if len(p1) >= min_p1 and len(p2) >= min_p2:
            eligible_by_class.setdefault(record.fingerprint.event_class, []).append(record.id)
    plan = SamplingPlan()
    rng = random.Random(seed)
    for cls in sorted({r.fingerprint.event_class for r in events}):
        eligible = sorted(eligible_by_class.get(cls, []))
        if not eligible:
            plan.per_class[cls] = []
            plan.notes.append(f"class {cls}: no eligible events")
            continue
        quota = per_class_attack if cls == "attack" else per_class
        chosen = sorted(rng.sample(eligible, quota)) if len(eligible) > quota else eligible
        entries = []
        for event_id in chosen:
            ordered = _order_articles(links.phase1[event_id], corpus)
            entries.append((event_id, ordered[:cap]))
        plan.per_class[cls] = entries
    return plan


def _order_articles(ids: set[str], corpus: Corpus) -> list[str]:
    return sorted(ids, key=lambda aid: (corpus.get(aid).publish_date, aid))


def agreement(a: list[AnnotationLabel], b: list[AnnotationLabel]) -> tuple[float, float]:
    """(percent agreement, Cohen's kappa) over the shared pair set."""
    map_a = {(l.event_id, l.article_id): l.label for l in a}
    map_b = {(l.event_id, l.article_id): l.label for l in b}
    if not map_a:
        raise EvalError("no labels to compare")
    if set(map_a) != set(map_b):
        raise EvalError("annotators cover different (event, article) pairs")
    n = len(map_a)
    agree = sum(1 for key, label in map_a.items() if map_b[key] == label)
    p_o = agree / n
    p_e = sum(
        (sum(1 for v in map_a.values() if v == label) / n)
        * (sum(1 for v in map_b.values() if v == label) / n)
        for label in LABELS
    )
    if p_e >= 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return p_o, kappa


@dataclass
class EventScore:
    event_id: str
    tp: int
    fp: int
    fn: int
    gold_positives: int
    precision: float | None
    recall: float | None
    f1: float | None
    eligible: bool


@dataclass
class EvalReport:
    phase: str
    rows: list[EventScore]
    macro_precision: float | None
    macro_recall: float | None
    macro_f1: float | None
    f1_of_macros: float | None
    excluded: list[str]
    na_events: list[str]
    unlabeled_predictions: int
    eligibility_rule: str = ELIGIBILITY_RULE

    def extremes(self) -> dict[str, tuple[float, float, float]]:
        """min/median/max per metric over eligible events."""
        out: dict[str, tuple[float, float, float]] = {}
        for name in ("precision", "recall", "f1"):
            values = [
                getattr(r, name)
                for r in self.rows
                if r.eligible and getattr(r, name) is not None
            ]
            if values:
                out[name] = (min(values), median(values), max(values))
        return out

    def to_json(self) -> str:
        obj = {
            "phase": self.phase,
            "eligibility_rule": self.eligibility_rule,
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
                "f1_of_macros": self.f1_of_macros,
            },
            "extremes": {k: list(v) for k, v in self.extremes().items()},
            "excluded_events": list(self.excluded),
            "na_events": list(self.na_events),
            "unlabeled_predictions": self.unlabeled_predictions,
            "events": [
                {
                    "event_id": r.event_id,
                    "tp": r.tp,
                    "fp": r.fp,
                    "fn": r.fn,
                    "gold_positives": r.gold_positives,
                    "precision": r.precision,
                    "recall": r.recall,
                    "f1": r.f1,
                    "eligible": r.eligible,
                }
                for r in self.rows
            ],
        }
        return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["event_id,tp,fp,fn,gold_positives,precision,recall,f1,eligible"]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        r.event_id,
                        str(r.tp),
                        str(r.fp),
                        str(r.fn),
                        str(r.gold_positives),
                        _fmt(r.precision),
                        _fmt(r.recall),
                        _fmt(r.f1),
                        "1" if r.eligible else "0",
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        """Metrics ×100, one row per event plus the macro line."""
        lines = [f"{'event':24} {'P':>6} {'R':>6} {'F1':>6}  TP/FP/FN"]
        for r in self.rows:
            mark = "" if r.eligible else "  (excluded)"
            lines.append(
                f"{r.event_id:24} {_pct(r.precision):>6} {_pct(r.recall):>6} "
                f"{_pct(r.f1):>6}  {r.tp}/{r.fp}/{r.fn}{mark}"
            )
        lines.append(
            f"{'macro':24} {_pct(self.macro_precision):>6} {_pct(self.macro_recall):>6} "
            f"{_pct(self.macro_f1):>6}"
        )
        return "\n".join(lines)


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.9f}"


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{100 * value:.1f}"


def score(
    predictions: LinkSet,
    gold: list[AnnotationLabel],
    phase: str = "phase2",
    strict: bool = False,
) -> EvalReport:
    """Confusion counts per event against adjudicated labels.

    Predictions without a gold label fail in strict mode, otherwise
    they are skipped and counted. Events never mentioned in the gold
    set are not scored.
    """
    if phase not in ("phase1", "phase2"):
        raise EvalError(f"unknown phase {phase!r}")
    gold_by_event: dict[str, dict[str, str]] = {}
    for label in gold:
        bucket = gold_by_event.setdefault(label.event_id, {})
        if label.article_id in bucket:
            raise EvalError(
                f"conflicting gold labels for ({label.event_id}, {label.article_id})"
            )
        bucket[label.article_id] = label.label
    rows: list[EventScore] = []
    excluded: list[str] = []
    na_events: list[str] = []
    unlabeled = 0
    for event_id in sorted(gold_by_event):
        labels = gold_by_event[event_id]
        predicted = predictions.links_for(event_id, phase)
        stray = {aid for aid in predicted if aid not in labels}
        if stray:
            if strict:
                raise EvalError(
                    f"event {event_id}: predictions lack gold labels: {sorted(stray)[:5]}"
                )
            unlabeled += len(stray)
            predicted -= stray
        positives = {aid for aid, lab in labels.items() if lab == "positive"}
        tp = len(predicted & positives)
        fp = len(predicted - positives)
        fn = len(positives - predicted)
        precision = tp / (tp + fp) if tp + fp else None
        recall = tp / (tp + fn) if tp + fn else None
        f1: float | None
        if precision is None or recall is None:
            f1 = None
        elif precision + recall == 0:
            f1 = 0.0
        else:
            f1 = 2 * precision * recall / (precision + recall)
        eligible = len(positives) > 0
        rows.append(
            EventScore(event_id, tp, fp, fn, len(positives), precision, recall, f1, eligible)
        )
        if not eligible:
            excluded.append(event_id)
        elif precision is None or f1 is None:
            na_events.append(event_id)
            logger.warning("event %s: precision undefined (no predictions); F1 recorded n/a", event_id)
    macro_p = _mean([r.precision for r in rows if r.eligible and r.precision is not None])
    macro_r = _mean([r.recall for r in rows if r.eligible and r.recall is not None])
    macro_f1 = _mean([r.f1 for r in rows if r.eligible and r.f1 is not None])
    if macro_p is not None and macro_r is not None and macro_p + macro_r > 0:
        f1_of_macros: float | None = 2 * macro_p * macro_r / (macro_p + macro_r)
    elif macro_p is not None and macro_r is not None:
        f1_of_macros = 0.0
    else:
        f1_of_macros = None
    if unlabeled:
        logger.warning("skipped %d predictions without gold labels", unlabeled)
    return EvalReport(
        phase=phase,
        rows=rows,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        f1_of_macros=f1_of_macros,
        excluded=excluded,
        na_events=na_events,
        unlabeled_predictions=unlabeled,
    )


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def keyword_baseline(
    events: EventStore,
    corpus: Corpus,
    baseline_lexicon: KeywordLexicon,
    scope: MatchScope,
    window_days: int = 7,
    window_before_days: int = 0,
    jobs: int = 1,
) -> LinkSet:
    """Phase-1 matching with a swapped lexicon; no phase 2."""
    automaton = PatternAutomaton.compile(baseline_lexicon)
    return phase_one_batch(
        events,
        corpus,
        automaton,
        scope=scope,
        window_days=window_days,
        window_before_days=window_before_days,
        jobs=jobs,
    )
