"""Semantic event-article filter (phase 2) via yes/no LLM answers.

Each phase-1 link is turned into a prompt: the article title and first
three sentences verbatim (any language), followed by an English
question naming the event class and country. Answers parse on the
first alphabetic token, so "Yesterday..." never counts as "Yes".
Clients are pluggable: an HTTP chat endpoint, a deterministic scripted
mock, and an append-only replay cache that makes reruns free.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .corpus import ArticleHead, Corpus, extract_head
from .countries import CountryTable, default_table
from .errors import LlmError, TransportError
from .events import EventFingerprint
from .lexicon import parse_keyword_list
from .matcher import LinkSet

logger = logging.getLogger(__name__)

VARIANTS = ("simple", "category", "category_paren", "definition")

API_KEY_ENV = "FAME_LLM_API_KEY"

_FIRST_WORD_RE = re.compile(r"[^\W\d_]+")

DEFAULT_SYNONYM_PROMPT = (
    "List common English words or short phrases that news articles use to "
    "refer to a {key}. Reply with one term per line and nothing else."
)


def prompt_sha(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def cache_key(model_id: str, variant: str, prompt: str) -> str:
    payload = "\x00".join((model_id, variant, prompt))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def load_class_info() -> dict[str, dict[str, str]]:
    text = resources.files("fame.data").joinpath("class_info.json").read_text("utf-8")
    return json.loads(text)


@dataclass
class PromptTemplate:
    """Question builder for one of the four wording variants."""

    variant: str = "simple"
    class_info: dict[str, dict[str, str]] = field(default_factory=load_class_info)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise LlmError(f"unknown prompt variant {self.variant!r}")

    def _info(self, event_class: str) -> dict[str, str]:
        default = {"display": event_class.replace("_", " ")}
        return {**default, **self.class_info.get(event_class, {})}

    def question(self, event_class: str, country_name: str) -> str:
        info = self._info(event_class)
        display = info["display"]
        if self.variant == "simple":
            return f"Does the text discuss a recent {display} in {country_name}?"
        if self.variant == "category":
            category = info.get("category", "event")
            return (
                f"Does the text discuss a recent {display}, a kind of {category}, "
                f"in {country_name}?"
            )
        if self.variant == "category_paren":
            category = info.get("category", "event")
            return f"Does the text discuss a recent {display} ({category}) in {country_name}?"
        definition = info.get("definition", info["display"])
        return (
            f"Does the text discuss a recent {display}, where {display} means "
            f"{definition}, in {country_name}?"
        )

    def render(
        self,
        event: EventFingerprint,
        head: ArticleHead,
        countries: CountryTable | None = None,
    ) -> str:
        table = countries if countries is not None else default_table()
        question = self.question(event.event_class, table.display_name(event.country))
        parts = [head.title]
        if head.lead_sentences:
            parts.append(" ".join(head.lead_sentences))
        return "\n".join(parts) + "\n\n" + question


def render_prompt(
    event: EventFingerprint,
    head: ArticleHead,
    template: PromptTemplate,
    countries: CountryTable | None = None,
) -> str:
    return template.render(event, head, countries)


def parse_answer(answer_raw: str) -> str:
    """keep / drop / indeterminate from the first alphabetic token."""
    m = _FIRST_WORD_RE.search(answer_raw)
    if m is None:
        return "indeterminate"
    word = m.group(0).casefold()
    if word == "yes":
        return "keep"
    if word == "no":
        return "drop"
    return "indeterminate"


class LlmClient(Protocol):
    model_id: str
    calls: int

    def complete(self, prompt: str) -> str: ...


class HttpChatClient:
    """Chat-completions HTTP client with retry/backoff.

    The API key comes from the `FAME_LLM_API_KEY` environment variable
    unless given explicitly. Decoding uses temperature 0 by default so
    reruns are as deterministic as the endpoint allows.
    """

    BACKOFF_SECONDS = (1.0, 4.0, 16.0)

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        api_key: str | None = None,
        temperature: float = 0.0,
        timeout: float = 30.0,
    ):
        self.endpoint = endpoint
        self.model_id = model_id
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.temperature = temperature
        self.timeout = timeout
        self.calls = 0

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt, backoff in enumerate(self.BACKOFF_SECONDS, 1):
            self.calls += 1
            try:
                response = httpx.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                body = response.json()
                return str(body["choices"][0]["message"]["content"])
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                logger.warning("LLM request failed (attempt %d): %s", attempt, exc)
                if attempt < len(self.BACKOFF_SECONDS):
                    time.sleep(backoff)
        raise TransportError(f"LLM endpoint unreachable after retries: {last_error}")


class MockScriptClient:
    """Deterministic client driven by a JSONL script.

    Each line is one rule: `{"prompt_sha": h, "answer": a}` matches an
    exact prompt, `{"if_contains": s, "answer": a}` matches a substring
    (first rule wins, in file order), `{"default": a}` catches the rest.
    """

    def __init__(self, script_path: str | Path, model_id: str = "mock"):
        self.model_id = model_id
        self.calls = 0
        self._by_sha: dict[str, str] = {}
        self._contains: list[tuple[str, str]] = []
        self._default: str | None = None
        path = Path(script_path)
        if not path.exists():
            raise LlmError(f"mock script not found: {path}")
        for lineno, line in enumerate(path.read_text("utf-8").splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LlmError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if "prompt_sha" in obj:
                self._by_sha[obj["prompt_sha"]] = str(obj["answer"])
            elif "if_contains" in obj:
                self._contains.append((str(obj["if_contains"]), str(obj["answer"])))
            elif "default" in obj:
                self._default = str(obj["default"])
            else:
                raise LlmError(f"{path}:{lineno}: unknown mock rule {sorted(obj)}")

    def complete(self, prompt: str) -> str:
        self.calls += 1
        sha = prompt_sha(prompt)
        if sha in self._by_sha:
            return self._by_sha[sha]
        for needle, answer in self._contains:
            if needle in prompt:
                return answer
        if self._default is not None:
            return self._default
        raise LlmError(f"mock script has no rule for prompt {sha[:12]}...")


class ReplayCache:
    """Append-only JSONL answer cache; reruns hit disk, not the network."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._answers: dict[str, str] = {}
        if self.path.exists():
            for lineno, line in enumerate(self.path.read_text("utf-8").splitlines(), 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise LlmError(f"{self.path}:{lineno}: invalid JSON: {exc}") from None
                self._answers[obj["key"]] = str(obj["answer"])

    def __len__(self) -> int:
        return len(self._answers)

    def get(self, key: str) -> str | None:
        return self._answers.get(key)

    def put(self, key: str, answer: str, **extra: str) -> None:
        with self._lock:
            self._answers[key] = answer
            record = {"key": key, "answer": answer, **extra}
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


class RateLimiter:
    """Token bucket: at most `rate` acquisitions per second on average."""

    def __init__(self, rate: float, burst: float | None = None):
        if rate <= 0:
            raise LlmError("rate must be positive")
        self.rate = rate
        self.capacity = burst if burst is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


@dataclass(frozen=True)
class Verdict:
    event_id: str
    article_id: str
    prompt_sha: str
    answer_raw: str
    decision: str


def save_verdicts(verdicts: list[Verdict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for v in verdicts:
            obj = {
                "event_id": v.event_id,
                "article_id": v.article_id,
                "prompt_sha": v.prompt_sha,
                "answer_raw": v.answer_raw,
                "decision": v.decision,
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def phase_two(
    links: LinkSet,
    corpus: Corpus,
    client: LlmClient,
    template: PromptTemplate,
    events_by_id: dict[str, EventFingerprint],
    indeterminate: str = "drop",
    cache: ReplayCache | None = None,
    jobs: int = 1,
    rate: RateLimiter | None = None,
    countries: CountryTable | None = None,
) -> tuple[LinkSet, list[Verdict]]:
    """Prune phase-1 links by prompting the client once per pair.

    Colliding events render identical prompts, so the in-run memo (and
    the replay cache, when given) answers them with a single query.
    `indeterminate` is drop (default), keep, or retry: retry re-asks the
    client up to 2 more times, then falls back to drop.
    """
    if indeterminate not in ("drop", "keep", "retry"):
        raise LlmError(f"unknown indeterminate policy {indeterminate!r}")
    table = countries if countries is not None else default_table()
    memo: dict[str, str] = {}
    memo_lock = threading.Lock()
    failures = 0

    def ask(key: str, prompt: str) -> str:
        nonlocal failures
        with memo_lock:
            if key in memo:
                return memo[key]
        cached = cache.get(key) if cache is not None else None
        if cached is not None:
            with memo_lock:
                memo[key] = cached
            return cached
        if rate is not None:
            rate.acquire()
        try:
            answer = client.complete(prompt)
        except TransportError as exc:
            logger.warning("transport failure, marking indeterminate: %s", exc)
            with memo_lock:
                failures += 1
                memo[key] = ""
            return ""
        if indeterminate == "retry" and parse_answer(answer) == "indeterminate":
            for _ in range(2):
                if rate is not None:
                    rate.acquire()
                try:
                    answer = client.complete(prompt)
                except TransportError as exc:
                    logger.warning("transport failure during retry: %s", exc)
                    break
                if parse_answer(answer) != "indeterminate":
                    break
        if cache is not None:
            cache.put(key, answer, prompt_sha=prompt_sha(prompt), model=client.model_id)
        with memo_lock:
            memo[key] = answer
        return answer

    pairs: list[tuple[str, str, str, str]] = []
    for event_id in links.phase1:
        try:
            fingerprint = events_by_id[event_id]
        except KeyError:
            raise LlmError(f"no fingerprint for linked event {event_id!r}") from None
        for article_id in sorted(links.phase1[event_id]):
            head = extract_head(corpus.get(article_id))
            prompt = template.render(fingerprint, head, table)
            pairs.append((event_id, article_id, prompt, cache_key(client.model_id, template.variant, prompt)))

    if jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            answers = list(pool.map(lambda p: ask(p[3], p[2]), pairs))
    else:
        answers = [ask(key, prompt) for _, _, prompt, key in pairs]

    out = LinkSet(
        phase1={k: set(v) for k, v in links.phase1.items()},
        phase2={k: set() for k in links.phase1},
        evidence={k: dict(v) for k, v in links.evidence.items()},
        collisions=dict(links.collisions),
        phase2_populated=True,
        meta=dict(links.meta),
    )
    verdicts: list[Verdict] = []
    for (event_id, article_id, prompt, _), answer in zip(pairs, answers):
        decision = parse_answer(answer)
        if decision == "keep" or (decision == "indeterminate" and indeterminate == "keep"):
            out.phase2[event_id].add(article_id)
        if decision == "indeterminate" and indeterminate != "keep":
            logger.warning(
                "indeterminate answer for event %s article %s: %.60r",
                event_id,
                article_id,
                answer,
            )
        verdicts.append(
            Verdict(
                event_id=event_id,
                article_id=article_id,
                prompt_sha=prompt_sha(prompt),
                answer_raw=answer,
                decision=decision,
            )
        )
    if failures:
        out.meta["transport_failures"] = failures
    return out, verdicts


def synonym_sampler(
    client: LlmClient,
    prompt_template: str = DEFAULT_SYNONYM_PROMPT,
) -> Callable[[str, int], list[str]]:
    """Sampler for vote-based lexicon expansion; each run is one query."""

    def sample(key: str, run: int) -> list[str]:
        prompt = prompt_template.format(key=key.replace("_", " "), run=run)
        return parse_keyword_list(client.complete(prompt))

    return sample
