from __future__ import annotations

import json
import random
from datetime import date, timedelta
from pathlib import Path

import pytest

from fame.corpus import Corpus, load_corpus
from fame.events import EventStore, load_events
from fame.lexicon import KeywordLexicon, KeywordSet
from fame.matcher import PatternAutomaton

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixture_events() -> EventStore:
    return load_events(DATA / "events.csv")


@pytest.fixture(scope="session")
def fixture_corpus_en() -> Corpus:
    return load_corpus(DATA / "corpus.jsonl", languages={"en"})


@pytest.fixture(scope="session")
def fixture_corpus_all() -> Corpus:
    return load_corpus(DATA / "corpus.jsonl")


@pytest.fixture(scope="session")
def fixture_lexicon() -> KeywordLexicon:
    from fame.lexicon import load_lexicon

    return load_lexicon(DATA / "lexicon_en.json")


@pytest.fixture(scope="session")
def fixture_automaton(fixture_lexicon) -> PatternAutomaton:
    return PatternAutomaton.compile(fixture_lexicon)


@pytest.fixture(scope="session")
def plant_manifest() -> dict:
    return json.loads((DATA / "plant_manifest.json").read_text("utf-8"))


def make_lexicon(
    classes: dict[str, list[str]], locations: dict[str, list[str]], language: str = "en"
) -> KeywordLexicon:
    lex = KeywordLexicon(language=language)
    for cls, kws in classes.items():
        ks = KeywordSet(key=cls, language=language)
        for kw in kws:
            ks.add(kw, "thesaurus")
        lex.class_sets[cls] = ks
    for code, kws in locations.items():
        ks = KeywordSet(key=code, language=language)
        for kw in kws:
            ks.add(kw, "gazetteer")
        lex.location_sets[code] = ks
    return lex


WORD_POOL = [
    "river", "market", "summit", "bridge", "election", "harvest", "railway",
    "festival", "clinic", "border", "museum", "stadium", "harbor", "forest",
    "council", "village", "airport", "academy", "garden", "theater",
]


def random_world(rng: random.Random, n_events: int, n_articles: int, n_extra_keywords: int = 0):
    """A small synthetic (events, articles, lexicon) world for oracle checks.

    Articles are dicts compatible with both the package loader and the
    naive oracle scan. Keyword pools overlap the article vocabulary so
    matches actually occur.
    """
    classes = ["alpha", "beta", "gamma"]
    countries = ["AAA", "BBB", "CCC"]
    class_kws = {
        "alpha": ["quake", "tremor", "big shake"],
        "beta": ["surge", "overflow"],
        "gamma": ["blast", "loud bang"],
    }
    loc_kws = {
        "AAA": ["aland", "aland city", "northport"],
        "BBB": ["bborough", "south bank"],
        "CCC": ["ccove", "eastgate"],
    }
    for i in range(n_extra_keywords):
        target = class_kws[classes[i % 3]] if i % 2 else loc_kws[countries[i % 3]]
        target.append(f"filler{i:05d}")
    base = date(2021, 3, 1)
    events = []
    for i in range(n_events):
        events.append(
            {
                "id": f"e{i:03d}",
                "class": rng.choice(classes),
                "country": rng.choice(countries),
                "start_date": base + timedelta(days=rng.randrange(60)),
            }
        )
    articles = []
    for i in range(n_articles):
        words = [rng.choice(WORD_POOL) for _ in range(6)]
        if rng.random() < 0.55:
            words.insert(rng.randrange(len(words)), rng.choice(class_kws[rng.choice(classes)]))
        if rng.random() < 0.55:
            words.insert(rng.randrange(len(words)), rng.choice(loc_kws[rng.choice(countries)]))
        title = " ".join(words[:4]).capitalize()
        body = " ".join(words[4:]).capitalize() + "."
        articles.append(
            {
                "id": f"a{i:05d}",
                "language": "en",
                "publish_date": base + timedelta(days=rng.randrange(75)),
                "title": title,
                "body": body,
            }
        )
    return events, articles, class_kws, loc_kws


def world_to_package(events, articles, class_kws, loc_kws):
    """Lift a random world into package objects."""
    from fame.corpus import Article
    from fame.events import EventFingerprint, EventRecord

    store = EventStore(
        EventRecord(
            id=e["id"],
            fingerprint=EventFingerprint(e["class"], e["country"], e["start_date"]),
            source="synthetic",
        )
        for e in events
    )
    corpus = Corpus(
        Article(
            id=a["id"],
            language=a["language"],
            publish_date=a["publish_date"],
            title=a["title"],
            body=a["body"],
        )
        for a in articles
    )
    lexicon = make_lexicon(class_kws, loc_kws)
    return store, corpus, lexicon
