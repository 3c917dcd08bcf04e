#!/usr/bin/env python3
"""Regenerate the committed golden outputs under tests/golden/.

The content of every golden file is derived independently before it is
written: phase-1 links come from the brute-force oracle scan, phase-2
membership and the confusion counts come from the fixture generator's
plant manifest, and the ranking is recomputed from manifest counts with
the documented tie rules. Only after those cross-checks pass are the
files rendered, through the same CLI entry points the tests will run,
so the bytes match what a fresh pipeline run produces.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"
GOLDEN = ROOT / "tests" / "golden"

sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

from fame.cli import main as cli_main  # noqa: E402
from fame.corpus import load_corpus  # noqa: E402
from fame.events import load_events  # noqa: E402


def check_phase1(links_path: Path) -> None:
    store = load_events(DATA / "events.csv")
    corpus = load_corpus(DATA / "corpus.jsonl", languages={"en"})
    lex = json.loads((DATA / "lexicon_en.json").read_text("utf-8"))
    class_kws = {cls: [e["kw"] for e in entries] for cls, entries in lex["classes"].items()}
    loc_kws = {code: [e["kw"] for e in entries] for code, entries in lex["locations"].items()}
    events = [
        {
            "id": rec.id,
            "class": rec.fingerprint.event_class,
            "country": rec.fingerprint.country,
            "start_date": rec.fingerprint.start_date,
        }
        for rec in store
    ]
    articles = [
        {"id": a.id, "publish_date": a.publish_date, "title": a.title, "body": a.body}
        for a in corpus.articles()
    ]
    expected = oracles.oracle_phase_one(events, articles, class_kws, loc_kws)
    actual: dict[str, set[str]] = {}
    for line in links_path.read_text("utf-8").splitlines():
        obj = json.loads(line)
        if "_meta" in obj:
            continue
        if obj["phase"] == "phase1":
            actual[obj["event_id"]] = set(obj["article_ids"])
    assert actual == expected, "phase-1 golden does not match the oracle scan"


def expected_phase2() -> dict[str, set[str]]:
    manifest = json.loads((DATA / "plant_manifest.json").read_text("utf-8"))
    out: dict[str, set[str]] = {}
    for owner, kinds in manifest.items():
        out[owner] = set(kinds["rel_yes"]) | set(kinds["bait"])
    out["ev03"] = set(out["ev02"])  # fingerprint collision shares links
    return out


def check_phase2(links_path: Path) -> None:
    expected = expected_phase2()
    actual: dict[str, set[str]] = {}
    for line in links_path.read_text("utf-8").splitlines():
        obj = json.loads(line)
        if "_meta" in obj:
            continue
        if obj["phase"] == "phase2":
            actual[obj["event_id"]] = set(obj["article_ids"])
    assert actual == expected, "phase-2 golden does not match the plant manifest"


def check_report(report_path: Path) -> None:
    manifest = json.loads((DATA / "plant_manifest.json").read_text("utf-8"))
    phase2 = expected_phase2()
    gold = []
    for owner in ("ev01", "ev04", "ev06", "ev07", "ev10", "ev12"):
        kinds = manifest[owner]
        for aid in kinds["rel_yes"] + kinds["rel_no"] + kinds["amb"]:
            gold.append((owner, aid, "positive"))
        for aid in kinds["bait"] + kinds["near_class"] + kinds["near_loc"]:
            gold.append((owner, aid, "negative"))
    expected = oracles.oracle_confusion(phase2, gold)
    report = json.loads(report_path.read_text("utf-8"))
    rows = {r["event_id"]: r for r in report["events"]}
    assert set(rows) == set(expected), "scored events differ"
    for eid, conf in expected.items():
        for key in ("tp", "fp", "fn"):
            assert rows[eid][key] == conf[key], f"{eid} {key} differs"
    macro = oracles.oracle_macro(expected)
    for key in ("precision", "recall", "f1"):
        assert abs(report["macro"][key] - macro[key]) < 1e-9, f"macro {key} differs"


def check_ranking(ranking_path: Path) -> None:
    store = load_events(DATA / "events.csv")
    phase2 = expected_phase2()
    rows = []
    for fingerprint, ids in store.index.items():
        count = len(phase2.get(ids[0], set()))
        rows.append((-count, fingerprint.start_date.isoformat(), min(ids), fingerprint.key()))
    rows.sort()
    expected_keys = [key for *_rest, key in rows[:10]]
    got = [
        line.split(",")[0]
        for line in ranking_path.read_text("utf-8").splitlines()[2:]
        if line.strip()
    ]
    assert got == expected_keys, f"ranking order differs: {got} vs {expected_keys}"


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    d, g = str(DATA), str(GOLDEN)
    base = ["--events", f"{d}/events.csv", "--corpus", f"{d}/corpus.jsonl", "--languages", "en"]

    rc = cli_main(["match", *base, "--lexicon", f"{d}/lexicon_en.json",
                   "--out", f"{g}/links_phase1.jsonl"])
    assert rc == 0
    rc = cli_main(["filter", *base, "--links", f"{g}/links_phase1.jsonl",
                   "--client", f"mock:{d}/mock_script.jsonl",
                   "--out", f"{g}/links_phase2.jsonl", "--verdicts", f"{g}/verdicts.jsonl"])
    assert rc == 0
    rc = cli_main(["evaluate", "--links", f"{g}/links_phase2.jsonl",
                   "--labels", f"{d}/labels.csv", "--report", f"{g}/report.json"])
    assert rc == 0
    rc = cli_main(["rank", "--links", f"{g}/links_phase2.jsonl", "--events", f"{d}/events.csv",
                   "--k", "10", "--out", f"{g}/ranking.csv"])
    assert rc == 0

    check_phase1(GOLDEN / "links_phase1.jsonl")
    check_phase2(GOLDEN / "links_phase2.jsonl")
    check_report(GOLDEN / "report.json")
    check_ranking(GOLDEN / "ranking.csv")
    print("golden files verified and written:", sorted(p.name for p in GOLDEN.iterdir()))


if __name__ == "__main__":
    main()
