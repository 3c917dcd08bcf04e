#!/usr/bin/env python3
"""Generate the synthetic test fixtures under tests/data/.

Pure stdlib and fully seeded: rerunning this script reproduces every
fixture byte-for-byte. The planted-article bookkeeping is written to
tests/data/plant_manifest.json so tests and the golden generator can
derive expectations without re-parsing article text.
"""

from __future__ import annotations

import csv
import json
import random
from datetime import date, timedelta
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"

SEED = 20230823

COUNTRIES = ("USA", "IND", "FRA", "GBR", "MEX", "KEN")

# Keyword universe; the lexicon fixture and the planted article text
# draw from the same tables so phase-1 behavior is fully controlled.
CLASS_KEYWORDS = {
    "attack": ["attack", "attacks", "bombing", "bomber", "terrorist", "terrorism", "gunmen", "explosion"],
    "flood": ["flood", "floods", "flooding", "flooded", "deluge", "inundation"],
    "earthquake": ["earthquake", "earthquakes", "quake", "tremor", "aftershock", "seismic"],
    "storm": ["storm", "storms", "hurricane", "cyclone", "typhoon", "gale"],
}
LOCATION_KEYWORDS = {
    "USA": ["United States", "American", "New York", "Los Angeles", "Houston", "California", "Texas"],
    "IND": ["India", "Indian", "Kolkata", "Mumbai", "Delhi", "West Bengal", "Maharashtra"],
    "FRA": ["France", "French", "Paris", "Marseille", "Provence"],
    "GBR": ["United Kingdom", "British", "London", "Manchester", "Scotland"],
    "MEX": ["Mexico", "Mexican", "Oaxaca", "Guadalajara"],
    "KEN": ["Kenya", "Kenyan", "Nairobi", "Mombasa"],
}
# Display places for article text; first entry doubles as the dateline.
PLACES = {
    "USA": ["New York", "Houston", "Los Angeles"],
    "IND": ["Kolkata", "Mumbai", "Delhi"],
    "FRA": ["Paris", "Marseille"],
    "GBR": ["London", "Manchester"],
    "MEX": ["Oaxaca", "Guadalajara"],
    "KEN": ["Nairobi", "Mombasa"],
}
CLASS_NOUNS = {
    "attack": ["attack", "bombing", "explosion"],
    "flood": ["flood", "flooding", "deluge"],
    "earthquake": ["earthquake", "quake", "tremor"],
    "storm": ["storm", "hurricane", "cyclone"],
}

# id, class, country, start, deaths, casualties, source
EVENTS = [
    ("ev01", "attack", "USA", "2023-03-10", 12, 30, "gtd"),
    ("ev02", "attack", "IND", "2023-05-02", 5, 15, "gtd"),
    ("ev03", "attack", "IND", "2023-05-02", 3, 8, "gtd"),
    ("ev04", "flood", "FRA", "2023-04-18", 7, "", "emdat"),
    ("ev05", "flood", "KEN", "2023-06-01", 40, 60, "emdat"),
    ("ev06", "flood", "IND", "2023-07-11", 100, 200, "emdat"),
    ("ev07", "earthquake", "MEX", "2023-02-20", 60, 150, "emdat"),
    ("ev08", "earthquake", "IND", "2023-08-05", 2, 4, "emdat"),
    ("ev09", "storm", "USA", "2023-09-14", 9, 9, "emdat"),
    ("ev10", "storm", "GBR", "2023-10-30", 1, 2, "emdat"),
    ("ev11", "earthquake", "FRA", "2023-11-08", "", "", "emdat"),
    ("ev12", "attack", "GBR", "2023-12-03", 4, 4, "gtd"),
]

# Planted article counts per fingerprint owner (collision pair ev02/ev03
# shares the plants keyed under ev02).
#          rel_yes rel_no amb near_class near_loc out bait
PLANTS = {
    "ev01": (8, 3, 1, 4, 3, 2, 2),
    "ev02": (6, 2, 0, 3, 2, 1, 0),
    "ev04": (5, 2, 1, 2, 2, 2, 1),
    "ev05": (7, 1, 0, 2, 1, 1, 0),
    "ev06": (10, 4, 1, 3, 3, 2, 2),
    "ev07": (9, 3, 0, 2, 2, 1, 1),
    "ev08": (3, 1, 0, 1, 1, 1, 0),
    "ev09": (6, 2, 1, 2, 2, 1, 0),
    "ev10": (4, 2, 0, 1, 1, 1, 1),
    "ev11": (5, 1, 0, 1, 1, 1, 0),
    "ev12": (5, 2, 1, 2, 1, 1, 1),
}

LABELED_EVENTS = ("ev01", "ev04", "ev06", "ev07", "ev10", "ev12")

TOTAL_ARTICLES = 1000

NOISE_TOPICS = [
    "The central bank held interest rates steady for a third straight quarter",
    "A late goal settled the derby between two midtable sides",
    "The film festival opened with a restored classic",
    "Wheat futures slipped after a bumper harvest forecast",
    "The league announced a new broadcast deal worth billions",
    "Lawmakers debated the annual budget late into the night",
    "A startup unveiled a battery it says charges in five minutes",
    "The museum extended its retrospective by two weeks",
    "Union representatives met employers over wage indexation",
    "The railway operator published its summer timetable",
]
NOISE_TOPICS_ES = [
    "El banco central mantuvo las tasas de interes sin cambios",
    "Un gol en el descuento decidio el clasico de la jornada",
    "El festival de cine abrio con una pelicula restaurada",
    "Los futuros del trigo cayeron tras un buen pronostico de cosecha",
    "La liga anuncio un nuevo contrato de television",
    "El parlamento debatio el presupuesto hasta la madrugada",
]
FILLER_SENTENCES = [
    "Local residents described the scene to reporters.",
    "Traffic in the area was disrupted for several hours.",
    "Emergency services remained on site through the evening.",
    "The regional administration scheduled a briefing for Friday.",
    "Neighbouring districts offered assistance.",
    "Schools in the area stayed closed the following day.",
]


def iso(day: str) -> date:
    return date.fromisoformat(day)


def main() -> None:
    rng = random.Random(SEED)
    DATA.mkdir(parents=True, exist_ok=True)

    # ---------------- events.csv
    with (DATA / "events.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "class", "country", "start_date", "deaths", "casualties", "source"])
        for row in EVENTS:
            writer.writerow(row)

    # ---------------- lexicon_en.json (handwritten schema, sorted)
    lexicon = {
        "language": "en",
        "classes": {
            cls: [{"kw": kw.lower(), "prov": "thesaurus"} for kw in sorted(kws)]
            for cls, kws in CLASS_KEYWORDS.items()
        },
        "locations": {
            code: [{"kw": kw.lower(), "prov": "gazetteer"} for kw in sorted(kws)]
            for code, kws in LOCATION_KEYWORDS.items()
        },
    }
    (DATA / "lexicon_en.json").write_text(
        json.dumps(lexicon, ensure_ascii=False, indent=2, sort_keys=True) + "\n", "utf-8"
    )

    # ---------------- corpus + manifest
    events_by_id = {e[0]: e for e in EVENTS}
    articles: list[dict] = []
    manifest: dict[str, dict[str, list[str]]] = {}

    def outlet_for(home: str) -> str | None:
        if rng.random() < 0.08:
            return None
        if rng.random() < 0.4:
            return home
        return rng.choice([c for c in COUNTRIES if c != home])

    def add_article(language, day, title, body_sentences, home):
        outlet = outlet_for(home)
        art = {
            "language": language,
            "publish_date": day.isoformat(),
            "title": title,
            "body": " ".join(body_sentences),
        }
        if outlet is not None:
            art["outlet_country"] = outlet
            art["url"] = f"https://news-{outlet.lower()}.example/{len(articles)}"
        articles.append(art)
        return art

    for owner, (n_yes, n_no, n_amb, n_nc, n_nl, n_out, n_bait) in PLANTS.items():
        _, cls, country, start_s, *_ = events_by_id[owner]
        start = iso(start_s)
        places = PLACES[country]
        nouns = CLASS_NOUNS[cls]
        entry = manifest.setdefault(
            owner, {"rel_yes": [], "rel_no": [], "amb": [], "near_class": [], "near_loc": [], "out": [], "bait": []}
        )

        def plant(kind, day, title, body):
            art = add_article("en", day, title, body, country)
            entry[kind].append(art)

        for i in range(n_yes):
            place = places[i % len(places)]
            noun = nouns[i % len(nouns)]
            day = start + timedelta(days=i % 8)
            title = f"{noun.capitalize()} in {place} leaves {5 + i} dead"
            body = [
                f"Officials confirmed that a {noun} struck {place} and rescue work is under way.",
                rng.choice(FILLER_SENTENCES),
                rng.choice(FILLER_SENTENCES),
            ]
            plant("rel_yes", day, title, body)
        for i in range(n_no):
            place = places[i % len(places)]
            noun = nouns[(i + 1) % len(nouns)]
            day = start + timedelta(days=(i * 2) % 8)
            title = f"Reports of a {noun} near {place}"
            body = [
                f"Accounts of a {noun} near {place} were still being checked.",
                rng.choice(FILLER_SENTENCES),
            ]
            plant("rel_no", day, title, body)
        for i in range(n_amb):
            place = places[i % len(places)]
            noun = nouns[i % len(nouns)]
            day = start + timedelta(days=(i * 3) % 8)
            title = f"What we know about the {place} {noun}"
            body = [
                f"Witnesses gave conflicting accounts of the {noun} in {place}.",
                rng.choice(FILLER_SENTENCES),
            ]
            plant("amb", day, title, body)
        for i in range(n_nc):
            noun = nouns[i % len(nouns)]
            day = start + timedelta(days=i % 8)
            title = f"Insurers tally {noun} losses worldwide"
            body = [f"A market survey covered {noun} damage claims.", rng.choice(FILLER_SENTENCES)]
            plant("near_class", day, title, body)
        for i in range(n_nl):
            place = places[i % len(places)]
            day = start + timedelta(days=(i + 1) % 8)
            title = f"{place} hosts trade talks"
            body = [f"Delegates arrived in {place} for a two day summit.", rng.choice(FILLER_SENTENCES)]
            plant("near_loc", day, title, body)
        for i in range(n_out):
            place = places[i % len(places)]
            noun = nouns[i % len(nouns)]
            day = start - timedelta(days=3) if i % 2 else start + timedelta(days=9 + i)
            title = f"{noun.capitalize()} in {place}: timeline of events"
            body = [f"A look back at the {noun} that affected {place}.", rng.choice(FILLER_SENTENCES)]
            plant("out", day, title, body)
        for i in range(n_bait):
            place = places[i % len(places)]
            noun = nouns[i % len(nouns)]
            day = start + timedelta(days=(i + 2) % 8)
            title = f"Memorial marks anniversary of the {place} {noun}"
            body = [
                f"Officials confirmed the memorial for the historic {noun} in {place} will go ahead.",
                rng.choice(FILLER_SENTENCES),
            ]
            plant("bait", day, title, body)

    n_noise = TOTAL_ARTICLES - len(articles)
    year_start = iso("2023-01-01")
    for i in range(n_noise):
        day = year_start + timedelta(days=rng.randrange(365))
        home = rng.choice(COUNTRIES)
        if rng.random() < 0.25:
            topic = rng.choice(NOISE_TOPICS_ES)
            mention = f" Delegados de {LOCATION_KEYWORDS[home][0]} asistieron." if rng.random() < 0.3 else ""
            add_article("es", day, topic, [topic + "." + mention], home)
        else:
            topic = rng.choice(NOISE_TOPICS)
            mention = (
                f" Observers from {LOCATION_KEYWORDS[home][0]} attended."
                if rng.random() < 0.3
                else ""
            )
            add_article("en", day, topic, [topic + "." + mention, rng.choice(FILLER_SENTENCES)], home)

    for i, art in enumerate(articles, 1):
        art["id"] = f"a{i:04d}"
    with (DATA / "corpus.jsonl").open("w", encoding="utf-8") as fh:
        for art in articles:
            fh.write(json.dumps(art, ensure_ascii=False, sort_keys=True) + "\n")

    slim = {
        owner: {kind: sorted(a["id"] for a in arts) for kind, arts in kinds.items()}
        for owner, kinds in manifest.items()
    }
    (DATA / "plant_manifest.json").write_text(
        json.dumps(slim, ensure_ascii=False, indent=2, sort_keys=True) + "\n", "utf-8"
    )

    # ---------------- mock LLM script
    with (DATA / "mock_script.jsonl").open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"if_contains": "conflicting accounts", "answer": "Hard to say."}) + "\n")
        fh.write(json.dumps({"if_contains": "confirmed", "answer": "Yes."}) + "\n")
        fh.write(json.dumps({"default": "No."}) + "\n")

    # ---------------- labels.csv (adjudicated gold for six events)
    with (DATA / "labels.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["event_id", "article_id", "label", "annotator"])
        for owner in LABELED_EVENTS:
            kinds = slim[owner]
            for aid in kinds["rel_yes"] + kinds["rel_no"] + kinds["amb"]:
                writer.writerow([owner, aid, "positive", "adjudicated"])
            for aid in kinds["bait"] + kinds["near_class"] + kinds["near_loc"]:
                writer.writerow([owner, aid, "negative", "adjudicated"])

    # ---------------- gazetteer extras for lexicon tests
    with (DATA / "admin1.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["code", "name"])
        for code, name in [
            ("IND", "West Bengal"),
            ("IND", "Maharashtra"),
            ("USA", "California"),
            ("USA", "Texas"),
            ("FRA", "Provence"),
            ("GBR", "Scotland"),
            ("MEX", "Oaxaca"),
            ("KEN", "Nairobi County"),
        ]:
            writer.writerow([code, name])
    with (DATA / "cities.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["city", "code", "population"])
        for city, code, pop in [
            ("Kolkata", "IND", 14850000),
            ("Mumbai", "IND", 20400000),
            ("Delhi", "IND", 31200000),
            ("New York", "USA", 18800000),
            ("Los Angeles", "USA", 12400000),
            ("Houston", "USA", 6400000),
            ("Paris", "FRA", 11000000),
            ("Marseille", "FRA", 1600000),
            ("London", "GBR", 9500000),
            ("Manchester", "GBR", 2800000),
            ("Oaxaca", "MEX", 700000),
            ("Guadalajara", "MEX", 5300000),
            ("Nairobi", "KEN", 4900000),
            ("Mombasa", "KEN", 1300000),
        ]:
            writer.writerow([city, code, pop])

    # ---------------- attribute tables
    attrs_rows = [
        # code gdp popul dens area gini di pfi lit net gov religions...
        ("USA", 25.4e12, 331_900_000, 36.0, 9_833_520, 41.5, 7.85, 44.0, 99.0, 91.8, "federal",
         0.65, 0.02, 0.01, 0.26, 0.01, 0.01, 0.04),
        ("IND", 3.4e12, 1_407_000_000, 473.0, 3_287_263, 35.7, 7.04, 54.0, 74.4, 46.3, "federal",
         0.02, 0.00, 0.15, 0.01, 0.79, 0.01, 0.02),
        ("FRA", 2.78e12, 67_750_000, 123.0, 551_695, 32.4, 7.99, 26.0, 99.0, 85.3, "republic",
         0.63, 0.01, 0.08, 0.26, 0.00, 0.01, 0.01),
        ("GBR", 3.07e12, 67_330_000, 277.0, 243_610, 35.1, 8.54, 33.0, 99.0, 94.8, "other",
         0.64, 0.01, 0.06, 0.27, 0.01, 0.00, 0.01),
        ("MEX", 1.27e12, 126_700_000, 66.0, 1_964_375, 45.4, 6.07, 49.0, 95.2, 72.0, "federal",
         0.94, 0.00, 0.00, 0.05, 0.00, 0.00, 0.01),
        ("KEN", 0.113e12, 53_000_000, 94.0, 580_367, 40.8, 5.05, 36.0, 81.5, 29.5, "republic",
         0.85, 0.00, 0.11, 0.02, 0.00, 0.00, 0.02),
    ]
    with (DATA / "attrs.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["code", "gdp", "population", "population_density", "area", "gini",
             "democracy_index", "press_freedom_index", "literacy_rate", "internet_rate",
             "government"] + [f"religion_{r}" for r in
             ("christian", "jewish", "muslim", "unaffiliated", "hindu", "buddhist", "folk")]
        )
        for row in attrs_rows:
            writer.writerow(row)

    neighbors = {("USA", "MEX"), ("MEX", "USA")}
    same_language = {
        (a, b)
        for a in ("USA", "GBR", "IND", "KEN")
        for b in ("USA", "GBR", "IND", "KEN")
    }
    pair_rng = random.Random(SEED + 1)
    with (DATA / "pair_attrs.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["reporter", "event_country", "trade", "investment", "immigration",
             "neighbor", "same_language", "diplomatic"]
        )
        for reporter in COUNTRIES:
            for target in COUNTRIES:
                trade = round(pair_rng.uniform(0.5, 80.0), 3)
                invest = round(pair_rng.uniform(0.1, 30.0), 3)
                immig = round(pair_rng.uniform(0.01, 5.0), 3)
                writer.writerow([
                    reporter, target, trade, invest, immig,
                    int((reporter, target) in neighbors),
                    int((reporter, target) in same_language),
                    pair_rng.choice([4, 5, 6]) if reporter != target else 6,
                ])

    (DATA / "blocklist.txt").write_text("blocked.example\n# comment line\nspam.example\n", "utf-8")

    counts = {"articles": len(articles), "events": len(EVENTS)}
    print(json.dumps(counts))


if __name__ == "__main__":
    main()
