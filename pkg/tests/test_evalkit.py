from __future__ import annotations

import json
import random
from datetime import date, timedelta
from fractions import Fraction

import pytest

from fame.corpus import Article, Corpus
from fame.errors import EvalError
from fame.evalkit import (
    AnnotationLabel,
    agreement,
    keyword_baseline,
    load_labels,
    sample_for_annotation,
    score,
)
from fame.events import EventFingerprint, EventRecord, EventStore
from fame.matcher import LinkSet, MatchScope, PatternAutomaton, phase_one_batch

from conftest import DATA, make_lexicon
from oracles import oracle_confusion, oracle_kappa, oracle_macro, prf


def labels_from(pairs: list[tuple[str, str, str]], annotator: str = "") -> list[AnnotationLabel]:
    return [AnnotationLabel(e, a, lab, annotator) for e, a, lab in pairs]


def linkset(phase2: dict[str, set[str]]) -> LinkSet:
    phase1 = {eid: set(aids) for eid, aids in phase2.items()}
    return LinkSet(phase1=phase1, phase2={k: set(v) for k, v in phase2.items()}, phase2_populated=True)


class TestLabels:
    def test_label_validation(self):
        with pytest.raises(EvalError):
            AnnotationLabel("e1", "a1", "maybe")

    def test_load_fixture_labels(self):
        labels = load_labels(DATA / "labels.csv")
        assert labels
        assert {l.label for l in labels} == {"positive", "negative"}

    def test_duplicate_rows_rejected(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text(
            "event_id,article_id,label,annotator\n"
            "e1,a1,positive,ann1\n"
            "e1,a1,negative,ann1\n",
            "utf-8",
        )
        with pytest.raises(EvalError, match="row 2"):
            load_labels(path)

    def test_same_pair_different_annotators_allowed(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text(
            "event_id,article_id,label,annotator\n"
            "e1,a1,positive,ann1\n"
            "e1,a1,negative,ann2\n",
            "utf-8",
        )
        assert len(load_labels(path)) == 2
        # dropping the annotator column makes those rows collide
        with pytest.raises(EvalError):
            load_labels(path, with_annotator=False)

    def test_without_annotator_collapses_column(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text(
            "event_id,article_id,label,annotator\ne1,a1,positive,ann1\n", "utf-8"
        )
        (label,) = load_labels(path, with_annotator=False)
        assert label.annotator == ""


class TestScore:
    def test_nine_one_one(self):
        gold = labels_from(
            [("e1", f"a{i}", "positive") for i in range(10)]
            + [("e1", "b0", "negative")]
        )
        predicted = {f"a{i}" for i in range(9)} | {"b0"}
        report = score(linkset({"e1": predicted}), gold)
        (row,) = report.rows
        assert (row.tp, row.fp, row.fn) == (9, 1, 1)
        assert row.precision == row.recall == row.f1 == pytest.approx(0.9, abs=1e-12)

    def test_two_event_macro_aggregation_exact(self):
        gold_a = [("evA", f"a{i:03d}", "positive") for i in range(1000)]
        gold_b = [("evB", f"b{i:03d}", "positive") for i in range(864)] + [
            ("evB", f"bn{i:03d}", "negative") for i in range(136)
        ]
        pred_a = {f"a{i:03d}" for i in range(908)}
        pred_b = {f"b{i:03d}" for i in range(864)} | {f"bn{i:03d}" for i in range(136)}
        report = score(linkset({"evA": pred_a, "evB": pred_b}), labels_from(gold_a + gold_b))
        assert report.macro_precision == pytest.approx(0.932, abs=1e-9)
        assert report.macro_recall == pytest.approx(0.954, abs=1e-9)
        f1_a = Fraction(2 * 908, 1000 + 908)
        f1_b = Fraction(2 * 864, 1000 + 864)
        assert report.macro_f1 == pytest.approx(float((f1_a + f1_b) / 2), abs=1e-9)
        mp, mr = Fraction(233, 250), Fraction(477, 500)
        assert report.f1_of_macros == pytest.approx(float(2 * mp * mr / (mp + mr)), abs=1e-9)

    def test_precision_undefined_when_no_predictions(self):
        gold = labels_from([("e1", "a1", "positive"), ("e1", "a2", "positive")])
        report = score(linkset({"e1": set()}), gold)
        (row,) = report.rows
        assert row.precision is None
        assert row.recall == 0.0
        assert row.f1 is None
        assert report.na_events == ["e1"]
        assert report.macro_precision is None

    def test_zero_gold_positive_event_excluded_from_macro(self):
        gold = labels_from(
            [("e1", "a1", "positive"), ("e2", "b1", "negative"), ("e2", "b2", "negative")]
        )
        report = score(linkset({"e1": {"a1"}, "e2": {"b1"}}), gold)
        assert report.excluded == ["e2"]
        assert report.macro_precision == 1.0
        assert report.macro_recall == 1.0
        by_id = {r.event_id: r for r in report.rows}
        assert not by_id["e2"].eligible
        assert by_id["e2"].precision == 0.0

    def test_unlabeled_predictions_skip_or_strict(self):
        gold = labels_from([("e1", "a1", "positive")])
        links = linkset({"e1": {"a1", "ghost"}})
        report = score(links, gold)
        assert report.unlabeled_predictions == 1
        assert report.rows[0].fp == 0
        with pytest.raises(EvalError, match="ghost"):
            score(links, gold, strict=True)

    def test_conflicting_gold_rejected(self):
        gold = labels_from([("e1", "a1", "positive")]) + labels_from(
            [("e1", "a1", "negative")], annotator="ann2"
        )
        with pytest.raises(EvalError, match="conflicting"):
            score(linkset({"e1": {"a1"}}), gold)

    def test_gold_equal_predictor_scores_one(self):
        rng = random.Random(3)
        gold: list[AnnotationLabel] = []
        links: dict[str, set[str]] = {}
        for e in range(5):
            eid = f"e{e}"
            links[eid] = set()
            for a in range(rng.randint(1, 8)):
                lab = rng.choice(["positive", "negative"])
                gold.append(AnnotationLabel(eid, f"{eid}a{a}", lab))
                if lab == "positive":
                    links[eid].add(f"{eid}a{a}")
        report = score(linkset(links), gold)
        for row in report.rows:
            if row.eligible:
                assert row.precision == row.recall == row.f1 == 1.0

    def test_random_fixtures_match_confusion_oracle(self):
        rng = random.Random(11)
        for _ in range(20):
            gold: list[AnnotationLabel] = []
            links: dict[str, set[str]] = {}
            for e in range(5):
                eid = f"e{e}"
                pool = [f"{eid}x{i}" for i in range(rng.randint(0, 10))]
                for aid in pool:
                    gold.append(AnnotationLabel(eid, aid, rng.choice(["positive", "negative"])))
                links[eid] = {aid for aid in pool if rng.random() < 0.5}
            report = score(linkset(links), gold)
            triples = [(l.event_id, l.article_id, l.label) for l in gold]
            expected = oracle_confusion(links, triples)
            for row in report.rows:
                cell = expected[row.event_id]
                assert (row.tp, row.fp, row.fn) == (cell["tp"], cell["fp"], cell["fn"])
                p, r, f1 = prf(cell["tp"], cell["fp"], cell["fn"])
                assert row.precision == p and row.recall == r
                if f1 is None:
                    assert row.f1 is None
                else:
                    assert row.f1 == pytest.approx(f1, abs=1e-12)
            macro = oracle_macro(expected)
            for got, want in (
                (report.macro_precision, macro["precision"]),
                (report.macro_recall, macro["recall"]),
                (report.macro_f1, macro["f1"]),
            ):
                if want is None:
                    assert got is None
                else:
                    assert got == pytest.approx(want, abs=1e-12)

    def test_extremes_min_median_max(self):
        gold = []
        links = {}
        # three events with recalls 0.5, 0.75, 1.0
        specs = {"e1": (2, 2), "e2": (3, 1), "e3": (4, 0)}
        for eid, (tp, fn) in specs.items():
            ids = [f"{eid}a{i}" for i in range(tp + fn)]
            gold += [(eid, aid, "positive") for aid in ids]
            links[eid] = set(ids[:tp])
        report = score(linkset(links), labels_from(gold))
        lo, mid, hi = report.extremes()["recall"]
        assert (lo, mid, hi) == (0.5, 0.75, 1.0)

    def test_report_serializations(self):
        gold = labels_from([("e1", "a1", "positive"), ("e1", "a2", "negative")])
        report = score(linkset({"e1": {"a1"}}), gold)
        obj = json.loads(report.to_json())
        assert obj["macro"]["precision"] == 1.0
        assert obj["events"][0]["event_id"] == "e1"
        csv_text = report.to_csv()
        assert csv_text.splitlines()[0].startswith("event_id,tp,fp,fn")
        assert "1.000000000" in csv_text
        table = report.format_table()
        assert "macro" in table and "100.0" in table

    def test_unknown_phase_rejected(self):
        with pytest.raises(EvalError):
            score(linkset({}), [], phase="phase3")


class TestAgreement:
    def test_identical_labelings(self):
        a = labels_from([("e1", f"a{i}", "positive") for i in range(5)], "ann1")
        b = labels_from([("e1", f"a{i}", "positive") for i in range(5)], "ann2")
        assert agreement(a, b) == (1.0, 1.0)

    def test_all_positive_versus_half(self):
        a = labels_from([("e1", f"a{i}", "positive") for i in range(100)], "ann1")
        b = labels_from(
            [("e1", f"a{i}", "positive" if i < 50 else "negative") for i in range(100)],
            "ann2",
        )
        p_o, kappa = agreement(a, b)
        assert p_o == 0.5
        assert kappa == 0.0

    def test_constructed_table_near_088(self):
        # 2000 pairs: both-positive 1233, each one-sided 55, both-negative 657.
        pairs_a, pairs_b = [], []
        idx = 0
        for count, (la, lb) in (
            (1233, ("positive", "positive")),
            (55, ("positive", "negative")),
            (55, ("negative", "positive")),
            (657, ("negative", "negative")),
        ):
            for _ in range(count):
                pairs_a.append(("e1", f"a{idx}", la))
                pairs_b.append(("e1", f"a{idx}", lb))
                idx += 1
        p_o, kappa = agreement(labels_from(pairs_a, "x"), labels_from(pairs_b, "y"))
        assert p_o == pytest.approx(0.945, abs=1e-12)
        assert kappa == pytest.approx(0.88, abs=0.005)
        assert kappa == pytest.approx(0.4035280 / 0.458528, abs=1e-6)

    def test_matches_kappa_oracle_on_random_labelings(self):
        rng = random.Random(5)
        for _ in range(30):
            n = rng.randint(1, 60)
            la = [rng.choice(["positive", "negative"]) for _ in range(n)]
            lb = [rng.choice(["positive", "negative"]) for _ in range(n)]
            a = labels_from([("e1", f"a{i}", lab) for i, lab in enumerate(la)], "p")
            b = labels_from([("e1", f"a{i}", lab) for i, lab in enumerate(lb)], "q")
            p_o, kappa = agreement(a, b)
            exp_po, exp_kappa = oracle_kappa(la, lb)
            assert p_o == pytest.approx(exp_po, abs=1e-12)
            assert kappa == pytest.approx(exp_kappa, abs=1e-12)

    def test_disjoint_pairs_rejected(self):
        a = labels_from([("e1", "a1", "positive")], "x")
        b = labels_from([("e1", "a2", "positive")], "y")
        with pytest.raises(EvalError):
            agreement(a, b)
        with pytest.raises(EvalError):
            agreement([], [])


def sampling_world(class_sizes: dict[str, int], p1_count: int = 40, p2_count: int = 6):
    """Events per class, each with `p1_count` phase-1 articles."""
    records, articles = [], []
    phase1, phase2 = {}, {}
    day = date(2022, 1, 1)
    serial = 0
    for cls, n_events in sorted(class_sizes.items()):
        for k in range(n_events):
            eid = f"{cls}{k:02d}"
            records.append(EventRecord(id=eid, fingerprint=EventFingerprint(cls, "USA", day)))
            ids = []
            for j in range(p1_count):
                aid = f"{eid}art{serial:04d}"
                serial += 1
                articles.append(
                    Article(aid, "en", day + timedelta(days=j % 5), f"t {aid}", "b")
                )
                ids.append(aid)
            phase1[eid] = set(ids)
            phase2[eid] = set(ids[:p2_count])
    corpus = Corpus(articles)
    links = LinkSet(phase1=phase1, phase2=phase2, phase2_populated=True)
    return EventStore(records), links, corpus


class TestSampling:
    def test_small_class_takes_all(self):
        events, links, corpus = sampling_world({"flood": 2})
        plan = sample_for_annotation(events, links, corpus)
        assert [eid for eid, _ in plan.per_class["flood"]] == ["flood00", "flood01"]

    def test_large_class_seeded_choice_is_stable(self):
        events, links, corpus = sampling_world({"flood": 10})
        plan1 = sample_for_annotation(events, links, corpus, seed=42)
        plan2 = sample_for_annotation(events, links, corpus, seed=42)
        chosen1 = [eid for eid, _ in plan1.per_class["flood"]]
        assert len(chosen1) == 3
        assert chosen1 == [eid for eid, _ in plan2.per_class["flood"]]
        plan3 = sample_for_annotation(events, links, corpus, seed=43)
        assert len([eid for eid, _ in plan3.per_class["flood"]]) == 3

    def test_attack_quota_is_four(self):
        events, links, corpus = sampling_world({"attack": 6, "flood": 6})
        plan = sample_for_annotation(events, links, corpus, seed=1)
        assert len(plan.per_class["attack"]) == 4
        assert len(plan.per_class["flood"]) == 3

    def test_cap_takes_ordered_prefix(self):
        events, links, corpus = sampling_world({"storm": 1}, p1_count=200)
        plan = sample_for_annotation(events, links, corpus)
        (entry,) = plan.per_class["storm"]
        eid, listed = entry
        assert len(listed) == 150
        ordered = sorted(
            links.phase1[eid], key=lambda aid: (corpus.get(aid).publish_date, aid)
        )
        assert listed == ordered[:150]

    def test_eligibility_thresholds(self):
        events, links, corpus = sampling_world({"flood": 2}, p1_count=29)
        plan = sample_for_annotation(events, links, corpus)
        assert plan.per_class["flood"] == []
        assert any("no eligible events" in note for note in plan.notes)
        events, links, corpus = sampling_world({"flood": 2}, p2_count=4)
        plan = sample_for_annotation(events, links, corpus)
        assert plan.per_class["flood"] == []

    def test_requires_phase_two(self):
        events, links, corpus = sampling_world({"flood": 1})
        links.phase2_populated = False
        with pytest.raises(EvalError):
            sample_for_annotation(events, links, corpus)

    def test_plan_serializes(self):
        events, links, corpus = sampling_world({"flood": 1})
        plan = sample_for_annotation(events, links, corpus)
        obj = json.loads(plan.to_json())
        assert obj["classes"]["flood"][0]["event_id"] == "flood00"


class TestKeywordBaseline:
    def test_baseline_equals_matcher_with_swapped_lexicon(self, fixture_events, fixture_corpus_en):
        lexicon = make_lexicon(
            {"flood": ["flood", "deluge"], "storm": ["storm"], "attack": ["attack"], "earthquake": ["quake"]},
            {
                "IND": ["india"],
                "USA": ["united states"],
                "FRA": ["france"],
                "KEN": ["kenya"],
                "GBR": ["britain"],
                "MEX": ["mexico"],
            },
        )
        scope = MatchScope("title_plus_body")
        got = keyword_baseline(fixture_events, fixture_corpus_en, lexicon, scope)
        automaton = PatternAutomaton.compile(lexicon)
        want = phase_one_batch(fixture_events, fixture_corpus_en, automaton, scope=scope)
        assert got.phase1 == want.phase1
        assert not got.phase2_populated
