"""Per-language keyword sets for event classes and locations.

Location sets come from gazetteers (country name, demonyms, first-level
provinces, most-populated cities). Class sets come from seed wordlists
expanded by a light stemmer crossed with per-language affixes, and can
grow further through vote-based acceptance of sampled synonym lists.
Everything is case-folded once here so matching is case-insensitive by
construction.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Iterator

from .countries import CountryTable, default_table
from .errors import LexiconError, UnknownCountryError
from .text import collapse_ws, fold

logger = logging.getLogger(__name__)

PROVENANCES = ("gazetteer", "thesaurus", "llm_vote", "manual")

_BULLET_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")


@dataclass
class KeywordSet:
    """Keywords for one class or country, each with a provenance tag."""

    key: str
    language: str
    entries: dict[str, str] = field(default_factory=dict)

    def add(self, keyword: str, provenance: str) -> bool:
        """Case-fold and insert; returns False for duplicates/empties."""
        if provenance not in PROVENANCES:
            raise LexiconError(f"unknown provenance {provenance!r}")
        kw = collapse_ws(fold(keyword))
        if not kw or kw in self.entries:
            return False
        self.entries[kw] = provenance
        return True

    def keywords(self) -> list[str]:
        return sorted(self.entries)

    def __contains__(self, keyword: str) -> bool:
        return collapse_ws(fold(keyword)) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.entries))


@dataclass
class KeywordLexicon:
    language: str
    class_sets: dict[str, KeywordSet] = field(default_factory=dict)
    location_sets: dict[str, KeywordSet] = field(default_factory=dict)

    def class_set(self, event_class: str) -> KeywordSet:
        try:
            return self.class_sets[event_class]
        except KeyError:
            raise LexiconError(f"no class keyword set for {event_class!r}") from None

    def location_set(self, country: str) -> KeywordSet:
        try:
            return self.location_sets[country]
        except KeyError:
            raise LexiconError(f"no location keyword set for {country!r}") from None

    def ensure_universe(self, classes: list[str], countries: list[str]) -> None:
        """Guarantee a set per key; warn about the empty ones."""
        for cls in classes:
            self.class_sets.setdefault(cls, KeywordSet(cls, self.language))
        for code in countries:
            self.location_sets.setdefault(code, KeywordSet(code, self.language))
        for kind, sets in (("class", self.class_sets), ("location", self.location_sets)):
            for key, ks in sorted(sets.items()):
                if not ks.entries:
                    logger.warning("empty %s keyword set: %s (%s)", kind, key, self.language)

    def total_keywords(self) -> int:
        return sum(len(ks) for ks in self.class_sets.values()) + sum(
            len(ks) for ks in self.location_sets.values()
        )


@dataclass(frozen=True)
class City:
    name: str
    country: str
    population: int


@dataclass
class Gazetteer:
    """Country info, admin1 province names, and city populations."""

    countries: CountryTable
    admin1: dict[str, tuple[str, ...]] = field(default_factory=dict)
    cities: tuple[City, ...] = ()

    @classmethod
    def load(
        cls,
        country_info: str | Path | None = None,
        admin1_path: str | Path | None = None,
        cities_path: str | Path | None = None,
    ) -> "Gazetteer":
        """Load from CSVs: admin1 is `code,name`, cities is `city,code,population`."""
        table = CountryTable.load(country_info) if country_info else default_table()
        admin1: dict[str, list[str]] = {}
        if admin1_path:
            with Path(admin1_path).open(newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    admin1.setdefault(row["code"].strip().upper(), []).append(row["name"].strip())
        cities: list[City] = []
        if cities_path:
            with Path(cities_path).open(newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    cities.append(
                        City(
                            name=row["city"].strip(),
                            country=row["code"].strip().upper(),
                            population=int(row["population"]),
                        )
                    )
        return cls(
            countries=table,
            admin1={k: tuple(v) for k, v in admin1.items()},
            cities=tuple(cities),
        )

    def top_cities(self, k: int) -> list[City]:
        """Global top-k by population; ties by folded name then country."""
        ranked = sorted(self.cities, key=lambda c: (-c.population, fold(c.name), c.country))
        return ranked[:k]


def build_location_set(country: str, gazetteer: Gazetteer, top_cities: int = 5000) -> KeywordSet:
    """Country name + demonyms + admin1 provinces + global-top-k cities
    that lie in the country."""
    code = country.strip().upper()
    if code not in gazetteer.countries:
        raise UnknownCountryError(f"unknown country code {country!r}")
    info = gazetteer.countries.get(code)
    ks = KeywordSet(key=code, language="*")
    ks.add(info.name, "gazetteer")
    for demonym in info.demonyms:
        ks.add(demonym, "gazetteer")
    for province in gazetteer.admin1.get(code, ()):
        ks.add(province, "gazetteer")
    for city in gazetteer.top_cities(top_cities):
        if city.country == code:
            ks.add(city.name, "gazetteer")
    return ks


def affixes_for(language: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """(strip suffixes, affixes) for a language from the packaged table."""
    lang = language.split("-")[0].lower()
    data = json.loads(resources.files("fame.data").joinpath("affixes.json").read_text("utf-8"))
    entry = data.get(lang, data["en"])
    return tuple(entry["strip"]), tuple(entry["affixes"])


def base_words_for(event_class: str, language: str, path: str | Path | None = None) -> list[str]:
    """Seed wordlist for (class, language); packaged default or a JSON
    file shaped `{class: [words]}`."""
    if path is not None:
        data = json.loads(Path(path).read_text("utf-8"))
    else:
        lang = language.split("-")[0].lower()
        try:
            text = resources.files("fame.data").joinpath(f"class_base_{lang}.json").read_text("utf-8")
        except FileNotFoundError:
            raise LexiconError(f"no packaged class wordlist for language {language!r}") from None
        data = json.loads(text)
    words = data.get(event_class)
    if words is None:
        raise LexiconError(f"no base wordlist for class {event_class!r} ({language})")
    return [str(w) for w in words]


def stem(word: str, strip: tuple[str, ...]) -> str:
    """Strip one suffix (longest first) when ≥3 chars remain."""
    for suffix in sorted(strip, key=len, reverse=True):
        if suffix and word.endswith(suffix) and len(word) - len(suffix) >= 3:
            return word[: -len(suffix)]
    return word


def build_class_set(
    event_class: str,
    language: str,
    base: list[str] | None = None,
    affixes: tuple[str, ...] | None = None,
    strip: tuple[str, ...] | None = None,
) -> KeywordSet:
    """Cross stemmed base words with the affix list; keep the originals.

    Multi-word base terms are stemmed/affixed on their final word only.
    """
    if base is None:
        base = base_words_for(event_class, language)
    default_strip, default_affixes = affixes_for(language)
    if affixes is None:
        affixes = default_affixes
    if strip is None:
        strip = default_strip
    ks = KeywordSet(key=event_class, language=language)
    for word in base:
        folded = collapse_ws(fold(word))
        if not folded:
            continue
        ks.add(folded, "thesaurus")
        prefix, _, last = folded.rpartition(" ")
        root = stem(last, strip)
        for affix in affixes:
            variant = root + affix
            if len(variant) >= 3:
                ks.add((prefix + " " + variant) if prefix else variant, "thesaurus")
    return ks


def vote_threshold_count(threshold: float | str | Fraction, n_runs: int) -> int:
    """Minimum vote count: ceil(threshold * n), computed exactly."""
    frac = threshold if isinstance(threshold, Fraction) else Fraction(str(threshold))
    return math.ceil(frac * n_runs)


def vote_expand(
    existing: KeywordSet,
    runs: list[list[str]],
    threshold: float | str | Fraction = 0.5,
) -> list[str]:
    """Candidates appearing in ≥ ceil(threshold·n) runs, minus existing.

    A candidate counts at most once per run. Returns the accepted
    keywords sorted; the caller decides whether to insert them.
    """
    if not runs:
        raise LexiconError("vote_expand needs at least one sampler run")
    need = vote_threshold_count(threshold, len(runs))
    votes: dict[str, int] = {}
    for run in runs:
        seen = {collapse_ws(fold(w)) for w in run}
        seen.discard("")
        for kw in seen:
            votes[kw] = votes.get(kw, 0) + 1
    return sorted(kw for kw, v in votes.items() if v >= need and kw not in existing.entries)


def expand_with_sampler(
    keyword_set: KeywordSet,
    sampler: Callable[[str, int], list[str]],
    n_runs: int,
    threshold: float | str | Fraction = 0.5,
) -> list[str]:
    """Collect `n_runs` sampler outputs, vote, and insert the accepted
    keywords with `llm_vote` provenance."""
    runs = [sampler(keyword_set.key, i) for i in range(n_runs)]
    accepted = vote_expand(keyword_set, runs, threshold)
    for kw in accepted:
        keyword_set.add(kw, "llm_vote")
    return accepted


def parse_keyword_list(text: str) -> list[str]:
    """Split an answer into keywords on newlines/commas/semicolons,
    dropping list bullets and numbering."""
    out = []
    for chunk in re.split(r"[\n,;]+", text):
        word = _BULLET_RE.sub("", chunk).strip().strip(".")
        if word:
            out.append(word)
    return out


def save_lexicon(lexicon: KeywordLexicon, path: str | Path) -> None:
    obj = {
        "language": lexicon.language,
        "classes": {
            cls: [{"kw": kw, "prov": prov} for kw, prov in sorted(ks.entries.items())]
            for cls, ks in sorted(lexicon.class_sets.items())
        },
        "locations": {
            code: [{"kw": kw, "prov": prov} for kw, prov in sorted(ks.entries.items())]
            for code, ks in sorted(lexicon.location_sets.items())
        },
    }
    Path(path).write_text(json.dumps(obj, ensure_ascii=False, indent=2) + "\n", "utf-8")


def load_lexicon(path: str | Path) -> KeywordLexicon:
    try:
        obj = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc}") from None
    if (
        not isinstance(obj, dict)
        or not isinstance(obj.get("language"), str)
        or not isinstance(obj.get("classes"), dict)
        or not isinstance(obj.get("locations"), dict)
    ):
        raise LexiconError(f"lexicon schema mismatch in {path}")
    lex = KeywordLexicon(language=obj["language"])
    for kind, sets in (("classes", lex.class_sets), ("locations", lex.location_sets)):
        for key, entries in obj[kind].items():
            ks = KeywordSet(key=key, language=lex.language)
            if not isinstance(entries, list):
                raise LexiconError(f"lexicon schema mismatch in {path}: {kind}/{key}")
            for entry in entries:
                if not isinstance(entry, dict) or "kw" not in entry or "prov" not in entry:
                    raise LexiconError(f"lexicon schema mismatch in {path}: {kind}/{key}")
                if entry["prov"] not in PROVENANCES:
                    raise LexiconError(
                        f"unknown provenance {entry['prov']!r} in {path}: {kind}/{key}"
                    )
                ks.add(str(entry["kw"]), str(entry["prov"]))
            if not ks.entries:
                logger.warning("lexicon %s: empty %s set %r", path, kind[:-2], key)
            sets[key] = ks
    return lex


def apply_extra_keywords(lexicon: KeywordLexicon, path: str | Path) -> int:
    """Merge a JSON file `{classes: {cls: [kw]}, locations: {code: [kw]}}`
    into the lexicon with `manual` provenance; returns the insert count."""
    obj = json.loads(Path(path).read_text("utf-8"))
    added = 0
    for cls, words in (obj.get("classes") or {}).items():
        ks = lexicon.class_sets.setdefault(cls, KeywordSet(cls, lexicon.language))
        added += sum(ks.add(w, "manual") for w in words)
    for code, words in (obj.get("locations") or {}).items():
        ks = lexicon.location_sets.setdefault(code, KeywordSet(code, lexicon.language))
        added += sum(ks.add(w, "manual") for w in words)
    return added
