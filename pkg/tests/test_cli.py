from __future__ import annotations

import json

import pytest

from fame.cli import build_funnel, main as cli_main
from fame.events import load_events
from fame.lexicon import load_lexicon
from fame.matcher import load_linkset

from conftest import DATA, GOLDEN
from oracles import oracle_gtd_salience

D = str(DATA)
G = str(GOLDEN)


def run(capsys, argv: list[str]) -> tuple[int, str, str]:
    rc = cli_main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestIngest:
    def test_summary_and_collision_report(self, capsys, tmp_path):
        coll = tmp_path / "collisions.json"
        rc, out, _ = run(
            capsys,
            ["ingest", "--events", f"{D}/events.csv", "--collisions-out", str(coll)],
        )
        assert rc == 0
        summary = json.loads(out)
        assert summary == {
            "records": 12,
            "rejected_rows": 0,
            "fingerprint_collisions": 1,
        }
        payload = json.loads(coll.read_text("utf-8"))
        assert payload["attack|IND|2023-05-02"] == ["ev02", "ev03"]
        assert set(payload["_meta"]) == {"config_sha", "seed"}

    def test_salience_filter_matches_oracle(self, capsys, tmp_path):
        out_path = tmp_path / "events.csv"
        rc, out, _ = run(
            capsys,
            [
                "ingest",
                "--events",
                f"{D}/events.csv",
                "--salience-filter",
                "--out",
                str(out_path),
            ],
        )
        assert rc == 0
        store = load_events(f"{D}/events.csv")
        gtd_attacks = [
            {
                "id": r.id,
                "country": r.fingerprint.country,
                "casualties": r.casualties,
                "start_date": r.fingerprint.start_date,
            }
            for r in store
            if r.source.upper() == "GTD" and r.fingerprint.event_class == "attack"
        ]
        keep = oracle_gtd_salience(gtd_attacks)
        expected = sum(
            1
            for r in store
            if not (r.source.upper() == "GTD" and r.fingerprint.event_class == "attack")
            or r.id in keep
        )
        assert json.loads(out)["records"] == expected
        assert len(load_events(out_path)) == expected

    def test_bad_mapping_entry(self, capsys):
        rc, _, err = run(
            capsys,
            ["ingest", "--events", f"{D}/events.csv", "--mapping", "nonsense"],
        )
        assert rc == 2
        assert json.loads(err)["error"] == "ConfigError"


class TestErrorHandling:
    def test_missing_required_option(self, capsys):
        rc, _, err = run(capsys, ["match"])
        assert rc == 2
        payload = json.loads(err)
        assert payload["error"] == "ConfigError"
        assert "--events" in payload["message"]

    def test_invalid_config_path_blocks_outputs(self, capsys, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(f"events = {tmp_path}/missing.csv\n", "utf-8")
        out_path = tmp_path / "links.jsonl"
        rc, _, err = run(
            capsys,
            [
                "--config",
                str(config),
                "match",
                "--corpus",
                f"{D}/corpus.jsonl",
                "--lexicon",
                f"{D}/lexicon_en.json",
                "--out",
                str(out_path),
            ],
        )
        assert rc == 2
        assert json.loads(err)["error"] == "ConfigError"
        assert not out_path.exists()

    def test_date_filter_needs_both_ends(self, capsys, tmp_path):
        rc, _, err = run(
            capsys,
            [
                "funnel",
                "--corpus",
                f"{D}/corpus.jsonl",
                "--links",
                f"{G}/links_phase1.jsonl",
                "--date-start",
                "2023-01-01",
            ],
        )
        assert rc == 2
        assert "date" in json.loads(err)["message"]


class TestMatch:
    def test_match_writes_linkset_with_meta(self, capsys, tmp_path):
        out_path = tmp_path / "links.jsonl"
        rc, out, _ = run(
            capsys,
            [
                "match",
                "--events",
                f"{D}/events.csv",
                "--corpus",
                f"{D}/corpus.jsonl",
                "--languages",
                "en",
                "--lexicon",
                f"{D}/lexicon_en.json",
                "--out",
                str(out_path),
            ],
        )
        assert rc == 0
        assert json.loads(out)["phase1_total"] == 104
        first = json.loads(out_path.read_text("utf-8").splitlines()[0])
        assert set(first["_meta"]) == {"config_sha", "seed"}
        links = load_linkset(out_path)
        golden = load_linkset(f"{G}/links_phase1.jsonl")
        assert links.phase1 == golden.phase1

    def test_cli_window_overrides_config(self, capsys, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("window_days = 0\n", "utf-8")
        base = [
            "--events", f"{D}/events.csv",
            "--corpus", f"{D}/corpus.jsonl",
            "--languages", "en",
            "--lexicon", f"{D}/lexicon_en.json",
        ]
        rc, out, _ = run(
            capsys,
            ["--config", str(config), "match", *base, "--out", str(tmp_path / "a.jsonl")],
        )
        assert rc == 0
        day_zero_total = json.loads(out)["phase1_total"]
        rc, out, _ = run(
            capsys,
            [
                "--config", str(config), "match", *base,
                "--window-days", "7",
                "--out", str(tmp_path / "b.jsonl"),
            ],
        )
        assert rc == 0
        assert json.loads(out)["phase1_total"] == 104
        assert day_zero_total < 104


class TestFilter:
    def test_mock_filter_summary(self, capsys, tmp_path):
        out_path = tmp_path / "links2.jsonl"
        rc, out, _ = run(
            capsys,
            [
                "filter",
                "--events",
                f"{D}/events.csv",
                "--corpus",
                f"{D}/corpus.jsonl",
                "--languages",
                "en",
                "--links",
                f"{G}/links_phase1.jsonl",
                "--client",
                f"mock:{D}/mock_script.jsonl",
                "--out",
                str(out_path),
            ],
        )
        assert rc == 0
        assert json.loads(out) == {"pairs": 112, "kept": 82, "client_calls": 104}
        links = load_linkset(out_path)
        golden = load_linkset(f"{G}/links_phase2.jsonl")
        assert links.phase2 == golden.phase2

    def test_http_client_requires_endpoint_and_model(self, capsys):
        rc, _, err = run(
            capsys,
            [
                "filter",
                "--events", f"{D}/events.csv",
                "--corpus", f"{D}/corpus.jsonl",
                "--links", f"{G}/links_phase1.jsonl",
                "--client", "http",
                "--out", "/tmp/never.jsonl",
            ],
        )
        assert rc == 2
        assert json.loads(err)["error"] == "ConfigError"


class TestEvaluate:
    def test_agreement_mode(self, capsys, tmp_path):
        rows = "event_id,article_id,label,annotator\n" + "".join(
            f"e1,a{i},positive,X\n" for i in range(10)
        )
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text(rows, "utf-8")
        b.write_text(rows.replace(",X", ",Y"), "utf-8")
        rc, out, _ = run(
            capsys, ["evaluate", "--labels-a", str(a), "--labels-b", str(b)]
        )
        assert rc == 0
        assert json.loads(out) == {"kappa": 1.0, "percent_agreement": 1.0}

    def test_agreement_needs_both_files(self, capsys, tmp_path):
        a = tmp_path / "a.csv"
        a.write_text("event_id,article_id,label\ne1,a1,positive\n", "utf-8")
        rc, _, err = run(capsys, ["evaluate", "--labels-a", str(a)])
        assert rc == 2
        assert "labels-b" in json.loads(err)["message"]

    def test_score_mode_writes_report_and_csv(self, capsys, tmp_path):
        report = tmp_path / "report.json"
        csv_out = tmp_path / "per_event.csv"
        rc, out, _ = run(
            capsys,
            [
                "evaluate",
                "--links", f"{G}/links_phase2.jsonl",
                "--labels", f"{D}/labels.csv",
                "--report", str(report),
                "--csv", str(csv_out),
            ],
        )
        assert rc == 0
        assert "macro" in out
        payload = json.loads(report.read_text("utf-8"))
        assert set(payload["_meta"]) == {"config_sha", "seed"}
        golden = json.loads((GOLDEN / "report.json").read_text("utf-8"))
        assert payload["macro"] == golden["macro"]
        assert csv_out.read_text("utf-8").startswith("# config_sha=")

    def test_sample_mode_writes_plan(self, capsys, tmp_path):
        plan_path = tmp_path / "plan.json"
        rc, out, _ = run(
            capsys,
            [
                "evaluate",
                "--sample",
                "--links", f"{G}/links_phase2.jsonl",
                "--events", f"{D}/events.csv",
                "--corpus", f"{D}/corpus.jsonl",
                "--languages", "en",
                "--min-p1", "1",
                "--min-p2", "1",
                "--out", str(plan_path),
            ],
        )
        assert rc == 0
        assert json.loads(out)["classes"] == 4
        plan = json.loads(plan_path.read_text("utf-8"))
        assert len(plan["classes"]["attack"]) == 4
        assert len(plan["classes"]["flood"]) == 3


class TestRankCoverageRegress:
    def test_rank_falls_back_to_phase1(self, capsys, tmp_path):
        out_path = tmp_path / "ranking.csv"
        rc, out, _ = run(
            capsys,
            [
                "rank",
                "--links", f"{G}/links_phase1.jsonl",
                "--events", f"{D}/events.csv",
                "--k", "5",
                "--out", str(out_path),
            ],
        )
        assert rc == 0
        printed = [line for line in out.splitlines() if line.strip()]
        assert len(printed) == 5
        assert out_path.read_text("utf-8").startswith("# config_sha=")

    def test_rank_phase2_matches_golden(self, capsys, tmp_path):
        out_path = tmp_path / "ranking.csv"
        rc, _, _ = run(
            capsys,
            [
                "rank",
                "--links", f"{G}/links_phase2.jsonl",
                "--events", f"{D}/events.csv",
                "--k", "10",
                "--out", str(out_path),
            ],
        )
        assert rc == 0
        assert out_path.read_bytes() == (GOLDEN / "ranking.csv").read_bytes()

    def test_coverage_writes_matrix(self, capsys, tmp_path):
        out_path = tmp_path / "coverage.csv"
        rc, out, _ = run(
            capsys,
            [
                "coverage",
                "--links", f"{G}/links_phase2.jsonl",
                "--events", f"{D}/events.csv",
                "--corpus", f"{D}/corpus.jsonl",
                "--reporters", "USA,GBR,FRA",
                "--out", str(out_path),
            ],
        )
        assert rc == 0
        summary = json.loads(out)
        assert summary["reporters"] == ["USA", "GBR", "FRA"]
        lines = out_path.read_text("utf-8").splitlines()
        assert lines[0].startswith("# config_sha=")
        assert lines[1] == "reporter,event_country,articles,events,average"

    def test_regress_runs_forward_selection(self, capsys, tmp_path):
        report = tmp_path / "regression.json"
        rc, out, _ = run(
            capsys,
            [
                "regress",
                "--links", f"{G}/links_phase2.jsonl",
                "--events", f"{D}/events.csv",
                "--corpus", f"{D}/corpus.jsonl",
                "--attrs", f"{D}/attrs.csv",
                "--pair-attrs", f"{D}/pair_attrs.csv",
                "--min-event-countries", "3",
                "--report", str(report),
            ],
        )
        assert rc == 0
        assert "adj R2" in out
        payload = json.loads(report.read_text("utf-8"))
        assert "selected" in payload
        assert set(payload["_meta"]) == {"config_sha", "seed"}


class TestFunnelAndLexicon:
    def test_funnel_invariants(self, capsys, tmp_path):
        out_path = tmp_path / "funnel.json"
        rc, out, _ = run(
            capsys,
            [
                "funnel",
                "--corpus", f"{D}/corpus.jsonl",
                "--links", f"{G}/links_phase2.jsonl",
                "--out", str(out_path),
            ],
        )
        assert rc == 0
        payload = json.loads(out)
        for language, entry in payload["languages"].items():
            assert entry["phase2_total"] <= entry["phase1_total"] <= entry["total_articles"]
        assert payload["languages"]["en"]["phase1_total"] == 104
        assert payload["languages"]["es"]["phase1_total"] == 0
        assert "_meta" in json.loads(out_path.read_text("utf-8"))

    def test_funnel_without_phase2_omits_those_keys(self, capsys):
        rc, out, _ = run(
            capsys,
            [
                "funnel",
                "--corpus", f"{D}/corpus.jsonl",
                "--links", f"{G}/links_phase1.jsonl",
            ],
        )
        assert rc == 0
        entry = json.loads(out)["languages"]["en"]
        assert "phase1_total" in entry
        assert "phase2_total" not in entry

    def test_funnel_median_math(self, fixture_corpus_all):
        links = load_linkset(f"{G}/links_phase1.jsonl")
        report = build_funnel(fixture_corpus_all, links)
        counts = sorted(len(ids) for ids in links.phase1.values())
        mid = len(counts) // 2
        expected = (
            counts[mid]
            if len(counts) % 2
            else (counts[mid - 1] + counts[mid]) / 2
        )
        assert report.languages["en"]["phase1_median"] == float(expected)
        assert report.languages["en"]["phase1_max"] == counts[-1]

    def test_lexicon_subcommand_builds_loadable_file(self, capsys, tmp_path):
        out_path = tmp_path / "lex.json"
        rc, out, _ = run(
            capsys,
            [
                "lexicon",
                "--language", "en",
                "--classes", "storm",
                "--countries", "IND",
                "--admin1", f"{D}/admin1.csv",
                "--cities", f"{D}/cities.csv",
                "--out", str(out_path),
            ],
        )
        assert rc == 0
        summary = json.loads(out)
        assert summary["classes"] == 1 and summary["locations"] == 1
        lex = load_lexicon(out_path)
        assert "windstorm" in lex.class_sets["storm"]
        assert "west bengal" in lex.location_sets["IND"]

    def test_verbose_json_logging_smoke(self, capsys, tmp_path):
        rc, _, err = run(
            capsys,
            [
                "--log-json",
                "-v",
                "ingest",
                "--events", f"{D}/events.csv",
            ],
        )
        assert rc == 0
        for line in err.splitlines():
            if line.strip():
                record = json.loads(line)
                assert {"level", "logger", "message"} <= set(record)
