"""Multilingual article corpus: JSONL ingestion, indexing, windows, heads.

A corpus is immutable after load. Articles are indexed by publish date
and partitioned by language; all iteration orders are (date, id) so
results never depend on shard layout or worker count.
"""

from __future__ import annotations

import json
import logging
from bisect import bisect_left, bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from urllib.parse import urlsplit

from .errors import CorpusError
from .text import abbreviations_for, normalize, split_sentences

logger = logging.getLogger(__name__)

_REQUIRED_KEYS = ("id", "language", "publish_date", "title", "body")


@dataclass(frozen=True)
class Article:
    id: str
    language: str
    publish_date: date
    title: str
    body: str
    url: str | None = None
    outlet_country: str | None = None


@dataclass(frozen=True)
class ArticleHead:
    """Title plus at most the first three sentences of the body."""

    article_id: str
    title: str
    lead_sentences: tuple[str, ...]


@dataclass
class CorpusLoadReport:
    files: int = 0
    lines: int = 0
    loaded: int = 0
    malformed: int = 0
    duplicate_ids: int = 0
    dropped_language: int = 0
    dropped_date: int = 0
    dropped_blocklist: int = 0

    def dropped_total(self) -> int:
        return (
            self.malformed
            + self.duplicate_ids
            + self.dropped_language
            + self.dropped_date
            + self.dropped_blocklist
        )


class Corpus:
    """Immutable article collection with date and language indexes."""

    def __init__(self, articles: list[Article], report: CorpusLoadReport | None = None):
        self._by_id: dict[str, Article] = {}
        self._date_index: dict[date, list[str]] = {}
        self._languages: dict[str, list[str]] = {}
        for art in sorted(articles, key=lambda a: (a.publish_date, a.id)):
            if art.id in self._by_id:
                raise CorpusError(f"duplicate article id {art.id!r}")
            self._by_id[art.id] = art
            self._date_index.setdefault(art.publish_date, []).append(art.id)
            self._languages.setdefault(art.language, []).append(art.id)
        self._dates: list[date] = sorted(self._date_index)
        self.report = report if report is not None else CorpusLoadReport(loaded=len(self._by_id))

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, article_id: str) -> bool:
        return article_id in self._by_id

    def get(self, article_id: str) -> Article:
        try:
            return self._by_id[article_id]
        except KeyError:
            raise CorpusError(f"unknown article id {article_id!r}") from None

    def ids(self) -> list[str]:
        """All article ids in (publish_date, id) order."""
        return [i for d in self._dates for i in self._date_index[d]]

    def articles(self) -> list[Article]:
        return [self._by_id[i] for i in self.ids()]

    def languages(self) -> list[str]:
        return sorted(self._languages)

    def language_ids(self, language: str) -> list[str]:
        return list(self._languages.get(language, []))

    def date_range(self) -> tuple[date, date] | None:
        if not self._dates:
            return None
        return self._dates[0], self._dates[-1]

    def slice_ids(self, start: date, end: date) -> list[str]:
        """Ids with publish_date in [start, end], ordered (date, id)."""
        lo = bisect_left(self._dates, start)
        hi = bisect_right(self._dates, end)
        return [i for d in self._dates[lo:hi] for i in self._date_index[d]]


def slice_window(corpus: Corpus, t: date, span_days: int) -> list[str]:
    """Article ids published in [t, t + span_days] inclusive."""
    if span_days < 0:
        raise CorpusError("span_days must be nonnegative")
    return corpus.slice_ids(t, t + timedelta(days=span_days))


def extract_head(article: Article) -> ArticleHead:
    """Title plus the first min(3, sentence count) body sentences.

    The body is normalized (NFC, collapsed whitespace) before the
    language-specific segmentation rule runs.
    """
    body = normalize(article.body)
    sentences = split_sentences(body, abbreviations_for(article.language)) if body else []
    return ArticleHead(
        article_id=article.id,
        title=normalize(article.title),
        lead_sentences=tuple(sentences[:3]),
    )


def load_blocklist(path: str | Path) -> frozenset[str]:
    """Hostnames, one per line; blank lines and `#` comments ignored."""
    hosts = set()
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            hosts.add(line)
    return frozenset(hosts)


def host_blocked(url: str | None, blocklist: frozenset[str]) -> bool:
    """True when the URL host equals or is a subdomain of a blocked host."""
    if not url or not blocklist:
        return False
    host = (urlsplit(url).hostname or "").lower()
    if not host:
        return False
    if host in blocklist:
        return True
    return any(host.endswith("." + b) for b in blocklist)


def load_corpus(
    path: str | Path,
    languages: set[str] | None = None,
    date_range: tuple[date, date] | None = None,
    blocklist: frozenset[str] | None = None,
    on_malformed: str = "skip",
    jobs: int = 1,
) -> Corpus:
    """Load a JSONL shard file or a directory of `*.jsonl` shards.

    Filters drop articles outside the language set or date range and
    articles whose URL host is blocklisted; all drops are counted in the
    corpus report. `on_malformed` is `skip` (count and continue) or
    `fail`.
    """
    if on_malformed not in ("skip", "fail"):
        raise CorpusError(f"unknown malformed-line policy {on_malformed!r}")
    path = Path(path)
    if path.is_dir():
        shards = sorted(p for p in path.iterdir() if p.suffix in (".jsonl", ".ndjson"))
        if not shards:
            raise CorpusError(f"no *.jsonl shards under {path}")
    elif path.exists():
        shards = [path]
    else:
        raise CorpusError(f"corpus path not found: {path}")

    report = CorpusLoadReport(files=len(shards))
    block = blocklist or frozenset()

    def parse_shard(shard: Path) -> tuple[list[Article], CorpusLoadReport]:
        part = CorpusLoadReport()
        out: list[Article] = []
        with shard.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                part.lines += 1
                try:
                    art = _parse_article(line)
                except CorpusError as exc:
                    if on_malformed == "fail":
                        raise CorpusError(f"{shard}:{lineno}: {exc}") from None
                    part.malformed += 1
                    continue
                if languages is not None and art.language not in languages:
                    part.dropped_language += 1
                    continue
                if date_range is not None and not (
                    date_range[0] <= art.publish_date <= date_range[1]
                ):
                    part.dropped_date += 1
                    continue
                if host_blocked(art.url, block):
                    part.dropped_blocklist += 1
                    continue
                out.append(art)
        return out, part

    if jobs > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(parse_shard, shards))
    else:
        results = [parse_shard(s) for s in shards]

    articles: list[Article] = []
    seen: set[str] = set()
    # Shards are processed in sorted-path order, so the merge (and the
    # first-wins duplicate rule) is deterministic for any worker count.
    for shard_articles, part in results:
        report.lines += part.lines
        report.malformed += part.malformed
        report.dropped_language += part.dropped_language
        report.dropped_date += part.dropped_date
        report.dropped_blocklist += part.dropped_blocklist
        for art in shard_articles:
            if art.id in seen:
                if on_malformed == "fail":
                    raise CorpusError(f"duplicate article id {art.id!r}")
                report.duplicate_ids += 1
                continue
            seen.add(art.id)
            articles.append(art)
    report.loaded = len(articles)
    if report.dropped_total():
        logger.info(
            "corpus load: %d loaded, %d malformed, %d duplicate, %d language, %d date, %d blocklist",
            report.loaded,
            report.malformed,
            report.duplicate_ids,
            report.dropped_language,
            report.dropped_date,
            report.dropped_blocklist,
        )
    return Corpus(articles, report=report)


def _parse_article(line: str) -> Article:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise CorpusError("article line is not an object")
    for key in _REQUIRED_KEYS:
        if key not in obj or obj[key] is None:
            raise CorpusError(f"missing field {key!r}")
    art_id = str(obj["id"]).strip()
    language = str(obj["language"]).strip()
    if not art_id:
        raise CorpusError("empty article id")
    if not language:
        raise CorpusError("empty language tag")
    raw_date = str(obj["publish_date"]).strip()
    day = raw_date.split("T")[0].split(" ")[0]
    try:
        publish = date.fromisoformat(day)
    except ValueError:
        raise CorpusError(f"invalid publish_date {raw_date!r}") from None
    url = obj.get("url")
    outlet = obj.get("outlet_country")
    return Article(
        id=art_id,
        language=language,
        publish_date=publish,
        title=str(obj["title"]),
        body=str(obj["body"]),
        url=None if url is None else str(url),
        outlet_country=None if outlet is None else str(outlet).strip().upper() or None,
    )
