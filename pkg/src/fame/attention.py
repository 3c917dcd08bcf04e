"""Cross-country media-attention analytics.

Builds event rankings and reporter-by-event-country coverage matrices
from link sets, derives the 47 country/pair factors, preprocesses them
(mean-imputed log deaths, min-max scaling), and fits OLS models with
greedy forward AIC selection plus VIF diagnostics.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .corpus import Corpus
from .countries import CountryTable, default_table
from .errors import RegressionError
from .events import EventStore
from .matcher import LinkSet

logger = logging.getLogger(__name__)

RELIGIONS = ("christian", "jewish", "muslim", "unaffiliated", "hindu", "buddhist", "folk")

GOVERNMENTS = ("federal", "republic", "other")

# Canonical factor columns, in the order they are always reported.
FACTOR_COLUMNS = (
    "deaths",
    "gdp_high",
    "gdp_hh",
    "gdp_hl",
    "gdp_lh",
    "gdp_ll",
    "trade",
    "investment",
    "democracy_high",
    "democracy_hh",
    "democracy_hl",
    "democracy_lh",
    "democracy_ll",
    "press_freedom_high",
    "press_freedom_hh",
    "press_freedom_hl",
    "press_freedom_lh",
    "press_freedom_ll",
    "federal",
    "republic",
    "other_government",
    "both_federal",
    "both_republic",
    "federal_other",
    "republic_other",
    "diplomatic_relation",
    "population",
    "population_density",
    "immigration",
    "gini_high",
    "gini_hh",
    "gini_hl",
    "gini_lh",
    "gini_ll",
    "area",
    "asia",
    "europe",
    "africa",
    "oceania",
    "north_america",
    "south_america",
    "neighbors",
    "continent_sim",
    "same_language",
    "religion_diversity",
    "literacy_rate",
    "internet_rate",
)

DISPLAY_NAMES = {
    "deaths": "#Deaths",
    "gdp_high": "GDP",
    "gdp_hh": "GDP (h-h)",
    "gdp_hl": "GDP (h-l)",
    "gdp_lh": "GDP (l-h)",
    "gdp_ll": "GDP (l-l)",
    "trade": "Trade",
    "investment": "Investment",
    "democracy_high": "Democracy in.",
    "democracy_hh": "Democracy in. (h-h)",
    "democracy_hl": "Democracy in. (h-l)",
    "democracy_lh": "Democracy in. (l-h)",
    "democracy_ll": "Democracy in. (l-l)",
    "press_freedom_high": "Press Freedom in.",
    "press_freedom_hh": "Press Freedom in. (h-h)",
    "press_freedom_hl": "Press Freedom in. (h-l)",
    "press_freedom_lh": "Press Freedom in. (l-h)",
    "press_freedom_ll": "Press Freedom in. (l-l)",
    "federal": "Federalism",
    "republic": "Republic",
    "other_government": "Other mode of government",
    "both_federal": "Both Federalism",
    "both_republic": "Both Republic",
    "federal_other": "Federalism and Other",
    "republic_other": "Republic and Other",
    "diplomatic_relation": "Diplomatic relation",
    "population": "Population",
    "population_density": "Population density",
    "immigration": "Immigration",
    "gini_high": "Gini in.",
    "gini_hh": "Gini in. (h-h)",
    "gini_hl": "Gini in. (h-l)",
    "gini_lh": "Gini in. (l-h)",
    "gini_ll": "Gini in. (l-l)",
    "area": "Area",
    "asia": "Asia",
    "europe": "Europe",
    "africa": "Africa",
    "oceania": "Oceania",
    "north_america": "North America",
    "south_america": "South America",
    "neighbors": "Neighbors",
    "continent_sim": "Continent sim",
    "same_language": "Same Language",
    "religion_diversity": "Religion Diversity",
    "literacy_rate": "Literacy rate",
    "internet_rate": "Internet user rate",
}

BINARY_FACTORS = frozenset(
    name
    for name in FACTOR_COLUMNS
    if name
    not in (
        "deaths",
        "trade",
        "investment",
        "diplomatic_relation",
        "population",
        "population_density",
        "immigration",
        "area",
        "religion_diversity",
        "literacy_rate",
        "internet_rate",
    )
)

_CONTINENT_FACTORS = {
    "asia": "Asia",
    "europe": "Europe",
    "africa": "Africa",
    "oceania": "Oceania",
    "north_america": "North America",
    "south_america": "South America",
}


@dataclass(frozen=True)
class FactorThresholds:
    """High/low cutoffs for the indicator factor families."""

    gdp: float = 500e9
    democracy: float = 5.0
    press_freedom: float = 50.0
    gini: float = 50.0


# --------------------------------------------------------------------------
# Event rankings and coverage matrices


@dataclass(frozen=True)
class RankedEvent:
    fingerprint_key: str
    record_ids: tuple[str, ...]
    article_count: int
    deaths: tuple[int | None, ...]
    collision: bool


def rank_events(
    links: LinkSet, events: EventStore, k: int, phase: str = "phase2"
) -> list[RankedEvent]:
    """Top-k fingerprints by linked-article count.

    Colliding records form one row carrying every member id. Ties break
    by earlier start date, then smallest member id.
    """
    rows = []
    for fingerprint, ids in events.index.items():
        counts = {len(links.links_for(event_id, phase)) for event_id in ids}
        if len(counts) != 1:
            raise RegressionError(
                f"colliding records disagree on links: {fingerprint.key()}"
            )
        rows.append(
            RankedEvent(
                fingerprint_key=fingerprint.key(),
                record_ids=tuple(ids),
                article_count=counts.pop(),
                deaths=tuple(events.get(i).deaths for i in ids),
                collision=len(ids) > 1,
            )
        )
    rows.sort(
        key=lambda r: (
            -r.article_count,
            r.fingerprint_key.rsplit("|", 1)[-1],
            min(r.record_ids),
        )
    )
    return rows[:k]


def ranking_to_csv(ranking: list[RankedEvent]) -> str:
    lines = ["fingerprint,record_ids,articles,deaths,collision"]
    for row in ranking:
        deaths = ";".join("" if d is None else str(d) for d in row.deaths)
        lines.append(
            f"{row.fingerprint_key},{';'.join(row.record_ids)},{row.article_count},"
            f"{deaths},{1 if row.collision else 0}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CoverageCell:
    articles: int
    events: int

    @property
    def average(self) -> float:
        return self.articles / self.events


@dataclass
class CoverageMatrix:
    """Average linked articles per event by (reporter, event country)."""

    reporters: list[str]
    event_countries: list[str]
    cells: dict[tuple[str, str], CoverageCell]
    events_per_country: dict[str, int]
    unknown_outlet_articles: int = 0
    excluded_reporters: list[str] = field(default_factory=list)

    def cell(self, reporter: str, event_country: str) -> CoverageCell:
        return self.cells[(reporter, event_country)]

    def pairs(self) -> list[tuple[str, str]]:
        return [(r, c) for r in self.reporters for c in self.event_countries]

    def values(self) -> np.ndarray:
        return np.array([self.cells[p].average for p in self.pairs()], dtype=float)

    def to_csv(self) -> str:
        lines = ["reporter,event_country,articles,events,average"]
        for reporter, country in self.pairs():
            cell = self.cells[(reporter, country)]
            lines.append(
                f"{reporter},{country},{cell.articles},{cell.events},{cell.average:.9g}"
            )
        return "\n".join(lines) + "\n"


def coverage_matrix(
    links: LinkSet,
    events: EventStore,
    corpus: Corpus,
    min_event_countries: int = 10,
    reporters: list[str] | None = None,
    phase: str = "phase2",
) -> CoverageMatrix:
    """Build the coverage matrix over unique-fingerprint events.

    Articles are attributed to their outlet country; articles without
    one are tallied under unknown and excluded. Without an explicit
    reporter list, reporters must cover events in at least
    `min_event_countries` distinct countries. Zero cells are explicit.
    """
    unique = [
        (fingerprint, ids[0])
        for fingerprint, ids in events.index.items()
        if len(ids) == 1
    ]
    events_per_country: dict[str, int] = {}
    for fingerprint, _ in unique:
        events_per_country[fingerprint.country] = events_per_country.get(fingerprint.country, 0) + 1
    event_countries = sorted(events_per_country)

    counts: dict[tuple[str, str], int] = {}
    countries_hit: dict[str, set[str]] = {}
    unknown = 0
    for fingerprint, event_id in unique:
        for article_id in links.links_for(event_id, phase):
            outlet = corpus.get(article_id).outlet_country
            if not outlet:
                unknown += 1
                continue
            key = (outlet, fingerprint.country)
            counts[key] = counts.get(key, 0) + 1
            countries_hit.setdefault(outlet, set()).add(fingerprint.country)

    excluded: list[str] = []
    if reporters is None:
        chosen = sorted(
            rep for rep, hit in countries_hit.items() if len(hit) >= min_event_countries
        )
        excluded = sorted(set(countries_hit) - set(chosen))
    else:
        chosen = list(reporters)
    cells = {
        (rep, country): CoverageCell(
            articles=counts.get((rep, country), 0), events=events_per_country[country]
        )
        for rep in chosen
        for country in event_countries
    }
    if unknown:
        logger.warning("%d linked articles lack an outlet country; excluded", unknown)
    return CoverageMatrix(
        reporters=chosen,
        event_countries=event_countries,
        cells=cells,
        events_per_country=events_per_country,
        unknown_outlet_articles=unknown,
        excluded_reporters=excluded,
    )


def deaths_by_country(
    events: EventStore, unique_only: bool = True, impute_missing: bool = True
) -> dict[str, float | None]:
    """Average deaths per event for each event country.

    Events without a death count contribute the global per-event mean
    when imputation is on, otherwise they are skipped; a country with no
    usable events maps to None.
    """
    if unique_only:
        chosen = [events.get(ids[0]) for ids in events.index.values() if len(ids) == 1]
    else:
        chosen = list(events)
    observed = [r.deaths for r in chosen if r.deaths is not None]
    global_mean = sum(observed) / len(observed) if observed else None
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for record in chosen:
        value: float | None
        if record.deaths is not None:
            value = float(record.deaths)
        elif impute_missing and global_mean is not None:
            value = global_mean
        else:
            value = None
        country = record.fingerprint.country
        if value is not None:
            sums[country] = sums.get(country, 0.0) + value
            counts[country] = counts.get(country, 0) + 1
        else:
            sums.setdefault(country, 0.0)
            counts.setdefault(country, 0)
    return {c: (sums[c] / counts[c] if counts[c] else None) for c in sums}


# --------------------------------------------------------------------------
# Attribute tables


@dataclass
class CountryAttributes:
    """Country-level attribute rows keyed by alpha-3 code."""

    rows: dict[str, dict[str, float | str]]

    NUMERIC = (
        "gdp",
        "population",
        "population_density",
        "area",
        "gini",
        "democracy_index",
        "press_freedom_index",
        "literacy_rate",
        "internet_rate",
    )

    @classmethod
    def load(cls, path: str | Path) -> "CountryAttributes":
        rows: dict[str, dict[str, float | str]] = {}
        with Path(path).open(newline="", encoding="utf-8") as fh:
            for rownum, row in enumerate(csv.DictReader(fh), 1):
                code = row["code"].strip().upper()
                parsed: dict[str, float | str] = {}
                for name in cls.NUMERIC:
                    parsed[name] = _require_float(row, name, path, rownum)
                government = row.get("government", "").strip().lower()
                if government not in GOVERNMENTS:
                    raise RegressionError(
                        f"{path} row {rownum}: government must be one of {GOVERNMENTS}"
                    )
                parsed["government"] = government
                total = 0.0
                for religion in RELIGIONS:
                    share = _require_float(row, f"religion_{religion}", path, rownum)
                    if share < 0:
                        raise RegressionError(f"{path} row {rownum}: negative religion share")
                    parsed[f"religion_{religion}"] = share
                    total += share
                if abs(total - 1.0) > 1e-6:
                    raise RegressionError(
                        f"{path} row {rownum}: religion shares sum to {total:.8f}, not 1"
                    )
                rows[code] = parsed
        return cls(rows)

    def get(self, code: str) -> dict[str, float | str]:
        try:
            return self.rows[code]
        except KeyError:
            raise RegressionError(f"no attributes for country {code!r}") from None


@dataclass
class CountryPairAttributes:
    """Pairwise attributes keyed by (reporter, event country)."""

    rows: dict[tuple[str, str], dict[str, float]]

    @classmethod
    def load(cls, path: str | Path) -> "CountryPairAttributes":
        rows: dict[tuple[str, str], dict[str, float]] = {}
        with Path(path).open(newline="", encoding="utf-8") as fh:
            for rownum, row in enumerate(csv.DictReader(fh), 1):
                reporter = row["reporter"].strip().upper()
                event_country = row["event_country"].strip().upper()
                parsed = {
                    name: _require_float(row, name, path, rownum)
                    for name in ("trade", "investment", "immigration")
                }
                for flag in ("neighbor", "same_language"):
                    value = _require_float(row, flag, path, rownum)
                    if value not in (0.0, 1.0):
                        raise RegressionError(f"{path} row {rownum}: {flag} must be 0 or 1")
                    parsed[flag] = value
                diplomatic = _require_float(row, "diplomatic", path, rownum)
                if diplomatic not in (1.0, 2.0, 3.0, 4.0, 5.0, 6.0):
                    raise RegressionError(f"{path} row {rownum}: diplomatic must be in 1..6")
                parsed["diplomatic"] = diplomatic
                rows[(reporter, event_country)] = parsed
        return cls(rows)

    def get(self, reporter: str, event_country: str, default_missing: bool = False) -> dict[str, float]:
        try:
            return self.rows[(reporter, event_country)]
        except KeyError:
            if default_missing:
                return {
                    "trade": 0.0,
                    "investment": 0.0,
                    "immigration": 0.0,
                    "neighbor": 0.0,
                    "same_language": 0.0,
                    "diplomatic": 1.0,
                }
            raise RegressionError(
                f"no pair attributes for ({reporter}, {event_country})"
            ) from None


def _require_float(row: dict[str, str], name: str, path, rownum: int) -> float:
    raw = (row.get(name) or "").strip()
    if not raw:
        raise RegressionError(f"{path} row {rownum}: missing {name}")
    try:
        return float(raw)
    except ValueError:
        raise RegressionError(f"{path} row {rownum}: invalid {name} {raw!r}") from None


# --------------------------------------------------------------------------
# Factor construction and preprocessing


@dataclass
class FactorMatrix:
    pairs: list[tuple[str, str]]
    columns: list[str]
    data: np.ndarray

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise RegressionError(f"unknown factor column {name!r}") from None

    def to_csv(self) -> str:
        lines = ["reporter,event_country," + ",".join(self.columns)]
        for (reporter, country), row in zip(self.pairs, self.data):
            cells = ",".join("" if math.isnan(v) else f"{v:.9g}" for v in row)
            lines.append(f"{reporter},{country},{cells}")
        return "\n".join(lines) + "\n"


def religion_entropy(shares: dict[str, float]) -> float:
    """Shannon entropy −Σ p ln p over the seven religion shares."""
    total = 0.0
    for religion in RELIGIONS:
        p = shares[f"religion_{religion}"]
        if p > 0:
            total -= p * math.log(p)
    return total


def build_factors(
    pairs: list[tuple[str, str]],
    attrs: CountryAttributes,
    pair_attrs: CountryPairAttributes,
    deaths: dict[str, float | None],
    countries: CountryTable | None = None,
    thresholds: FactorThresholds = FactorThresholds(),
    allow_missing_pairs: bool = False,
) -> FactorMatrix:
    """One row of the 47 factors per (reporter, event-country) pair.

    h/l indicator families read as (event country, reporting country);
    literacy and internet rates are the reporter's, everything else
    country-level describes the event country. Missing deaths become
    NaN for the preprocessing step to impute.
    """
    table = countries if countries is not None else default_table()
    data = np.empty((len(pairs), len(FACTOR_COLUMNS)), dtype=float)
    for i, (reporter, event_country) in enumerate(pairs):
        ev = attrs.get(event_country)
        rep = attrs.get(reporter)
        pair = pair_attrs.get(reporter, event_country, default_missing=allow_missing_pairs)
        death_value = deaths.get(event_country)
        continent = table.continent(event_country)
        same_continent = 1.0 if continent == table.continent(reporter) else 0.0
        values = {
            "deaths": math.nan if death_value is None else float(death_value),
            "trade": pair["trade"],
            "investment": pair["investment"],
            "immigration": pair["immigration"],
            "diplomatic_relation": pair["diplomatic"],
            "neighbors": pair["neighbor"],
            "same_language": pair["same_language"],
            "continent_sim": same_continent,
            "population": float(ev["population"]),
            "population_density": float(ev["population_density"]),
            "area": float(ev["area"]),
            "religion_diversity": religion_entropy(ev),  # type: ignore[arg-type]
            "literacy_rate": float(rep["literacy_rate"]),
            "internet_rate": float(rep["internet_rate"]),
        }
        for name, display in _CONTINENT_FACTORS.items():
            values[name] = 1.0 if continent == display else 0.0
        for prefix, column, cut in (
            ("gdp", "gdp", thresholds.gdp),
            ("democracy", "democracy_index", thresholds.democracy),
            ("press_freedom", "press_freedom_index", thresholds.press_freedom),
            ("gini", "gini", thresholds.gini),
        ):
            ev_high = float(ev[column]) > cut
            rep_high = float(rep[column]) > cut
            values[f"{prefix}_high"] = 1.0 if ev_high else 0.0
            values[f"{prefix}_hh"] = 1.0 if ev_high and rep_high else 0.0
            values[f"{prefix}_hl"] = 1.0 if ev_high and not rep_high else 0.0
            values[f"{prefix}_lh"] = 1.0 if not ev_high and rep_high else 0.0
            values[f"{prefix}_ll"] = 1.0 if not ev_high and not rep_high else 0.0
        ev_gov = ev["government"]
        rep_gov = rep["government"]
        values["federal"] = 1.0 if ev_gov == "federal" else 0.0
        values["republic"] = 1.0 if ev_gov == "republic" else 0.0
        values["other_government"] = 1.0 if ev_gov == "other" else 0.0
        values["both_federal"] = 1.0 if ev_gov == "federal" and rep_gov == "federal" else 0.0
        values["both_republic"] = 1.0 if ev_gov == "republic" and rep_gov == "republic" else 0.0
        values["federal_other"] = 1.0 if ev_gov == "federal" and rep_gov == "other" else 0.0
        values["republic_other"] = 1.0 if ev_gov == "republic" and rep_gov == "other" else 0.0
        data[i] = [values[name] for name in FACTOR_COLUMNS]
    return FactorMatrix(pairs=list(pairs), columns=list(FACTOR_COLUMNS), data=data)


def preprocess(factors: FactorMatrix, deaths_column: str = "deaths") -> FactorMatrix:
    """Impute + log the deaths column, min-max scale the continuous ones.

    Missing deaths take the mean of the observed values, then log(1+x)
    is applied, then min-max. Binary columns pass through untouched;
    constant continuous columns map to all zeros with a warning. The
    result has no missing values.
    """
    data = factors.data.astype(float).copy()
    for j, name in enumerate(factors.columns):
        column = data[:, j]
        if name == deaths_column:
            missing = np.isnan(column)
            if missing.all():
                raise RegressionError(f"column {name!r} has no observed values")
            if missing.any():
                column[missing] = column[~missing].mean()
            column = np.log1p(column)
            data[:, j] = _min_max(column, name)
            continue
        if np.isnan(column).any():
            raise RegressionError(f"column {name!r} has missing values")
        if name in BINARY_FACTORS:
            bad = ~np.isin(column, (0.0, 1.0))
            if bad.any():
                raise RegressionError(f"binary column {name!r} has non-binary values")
            continue
        data[:, j] = _min_max(column, name)
    return FactorMatrix(pairs=list(factors.pairs), columns=list(factors.columns), data=data)


def _min_max(column: np.ndarray, name: str) -> np.ndarray:
    lo = column.min()
    hi = column.max()
    if hi == lo:
        logger.warning("constant column %r min-max scaled to all zeros", name)
        return np.zeros_like(column)
    return (column - lo) / (hi - lo)


# --------------------------------------------------------------------------
# OLS, forward AIC selection, VIF


@dataclass
class OlsResult:
    columns: list[str]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    rss: float
    r_squared: float
    adj_r_squared: float
    aic: float
    n: int
    p: int

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.columns.index(name)])


def _design(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X]) if X.size else np.ones((X.shape[0], 1))


def _dependent_columns(design: np.ndarray, names: list[str]) -> list[str]:
    """Columns that do not increase rank when added left to right."""
    dependent = []
    kept = np.empty((design.shape[0], 0))
    rank = 0
    for j in range(design.shape[1]):
        candidate = np.column_stack([kept, design[:, j]])
        new_rank = np.linalg.matrix_rank(candidate)
        if new_rank > rank:
            kept = candidate
            rank = new_rank
        else:
            dependent.append(names[j])
    return dependent


def ols_fit(X: np.ndarray, y: np.ndarray, columns: list[str] | None = None) -> OlsResult:
    """Least squares with an intercept prepended to X.

    Reports per-coefficient standard errors, two-sided Student-t
    p-values, R², adjusted R², and the Gaussian AIC
    n·ln(RSS/n) + 2p with p counting the intercept.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    if X.shape[0] != n:
        raise RegressionError(f"X has {X.shape[0]} rows but y has {n}")
    names = ["intercept"] + (
        columns if columns is not None else [f"x{j + 1}" for j in range(X.shape[1])]
    )
    design = _design(X)
    p = design.shape[1]
    if n <= p:
        raise RegressionError(f"need n > p (n={n}, p={p})")
    if np.linalg.matrix_rank(design) < p:
        dependent = _dependent_columns(design, names)
        raise RegressionError(f"design matrix is rank deficient: {dependent}")
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ beta
    rss = float(residuals @ residuals)
    sigma2 = rss / (n - p)
    covariance = sigma2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / np.where(se > 0, se, 1.0), np.where(beta == 0, 0.0, np.inf * np.sign(beta)))
    p_values = 2.0 * stats.t.sf(np.abs(t), df=n - p)
    tss = float(((y - y.mean()) ** 2).sum())
    if tss > 0:
        r2 = 1.0 - rss / tss
    else:
        r2 = 1.0 if rss <= 1e-12 else 0.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - p)
    aic = float("-inf") if rss <= 0 else n * math.log(rss / n) + 2 * p
    return OlsResult(
        columns=names,
        coefficients=beta,
        standard_errors=se,
        t_values=t,
        p_values=p_values,
        rss=rss,
        r_squared=r2,
        adj_r_squared=adj_r2,
        aic=aic,
        n=n,
        p=p,
    )


def significance_stars(p_value: float) -> str:
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""


@dataclass
class AicStep:
    added: str | None
    aic: float


@dataclass
class RegressionResult:
    selected: list[str]
    model: OlsResult
    trace: list[AicStep]
    stars: dict[str, str]
    skipped: list[str]

    def format_table(self) -> str:
        lines = [f"{'factor':28} {'coef':>12} {'SE':>12} {'p':>12}"]
        for j, name in enumerate(self.model.columns):
            display = DISPLAY_NAMES.get(name, name)
            star = self.stars.get(name, "")
            lines.append(
                f"{display:28} {self.model.coefficients[j]:12.4f} "
                f"{self.model.standard_errors[j]:12.4f} {self.model.p_values[j]:12.4g} {star}"
            )
        lines.append(f"n = {self.model.n}, adj R2 = {self.model.adj_r_squared:.4f}, AIC = {self.model.aic:.3f}")
        return "\n".join(lines)

    def to_json(self) -> str:
        obj = {
            "selected": list(self.selected),
            "skipped": list(self.skipped),
            "n": self.model.n,
            "r_squared": self.model.r_squared,
            "adj_r_squared": self.model.adj_r_squared,
            "aic": self.model.aic,
            "trace": [{"added": s.added, "aic": s.aic} for s in self.trace],
            "coefficients": {
                name: {
                    "coef": float(self.model.coefficients[j]),
                    "se": float(self.model.standard_errors[j]),
                    "p": float(self.model.p_values[j]),
                    "stars": self.stars.get(name, ""),
                }
                for j, name in enumerate(self.model.columns)
            },
        }
        return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True)


def forward_aic(
    X: FactorMatrix | np.ndarray,
    y: np.ndarray,
    candidates: list[str] | None = None,
    always_in: list[str] | None = None,
) -> RegressionResult:
    """Greedy forward selection minimizing AIC.

    Starts from intercept (plus `always_in`), adds the single candidate
    whose model has the lowest AIC, and stops when no addition strictly
    lowers it. Ties keep the earlier column. Candidates that make the
    design rank deficient are skipped with a note.
    """
    if isinstance(X, FactorMatrix):
        matrix = X.data
        names = list(X.columns)
    else:
        matrix = np.asarray(X, dtype=float)
        names = [f"x{j + 1}" for j in range(matrix.shape[1])]
    if candidates is None:
        candidates = [n for n in names if n not in (always_in or [])]
    for name in candidates + (always_in or []):
        if name not in names:
            raise RegressionError(f"unknown factor column {name!r}")
    y = np.asarray(y, dtype=float).ravel()

    def columns_matrix(selected: list[str]) -> np.ndarray:
        if not selected:
            return np.empty((matrix.shape[0], 0))
        idx = [names.index(s) for s in selected]
        return matrix[:, idx]

    current: list[str] = list(always_in or [])
    base = ols_fit(columns_matrix(current), y, columns=current)
    trace = [AicStep(added=None, aic=base.aic)]
    best_model = base
    skipped: list[str] = []
    remaining = [c for c in candidates if c not in current]
    while remaining:
        best_candidate: str | None = None
        best_aic = best_model.aic
        best_fit: OlsResult | None = None
        for candidate in remaining:
            trial = current + [candidate]
            try:
                fit = ols_fit(columns_matrix(trial), y, columns=trial)
            except RegressionError:
                if candidate not in skipped:
                    skipped.append(candidate)
                    logger.info("forward selection skipped %r (rank deficient)", candidate)
                continue
            if fit.aic < best_aic:
                best_aic = fit.aic
                best_candidate = candidate
                best_fit = fit
        if best_candidate is None or best_fit is None:
            break
        current.append(best_candidate)
        remaining.remove(best_candidate)
        best_model = best_fit
        trace.append(AicStep(added=best_candidate, aic=best_fit.aic))
    stars = {
        name: significance_stars(float(best_model.p_values[j]))
        for j, name in enumerate(best_model.columns)
    }
    selected = [c for c in current if c not in (always_in or [])]
    return RegressionResult(
        selected=selected, model=best_model, trace=trace, stars=stars, skipped=skipped
    )


def vif(X: np.ndarray, columns: list[str] | None = None) -> dict[str, float]:
    """Variance inflation factor per column: 1/(1−R²) of the column
    regressed on all the others (plus an intercept); +inf marks perfect
    collinearity."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise RegressionError("VIF needs at least 2 columns")
    names = columns if columns is not None else [f"x{j + 1}" for j in range(X.shape[1])]
    out: dict[str, float] = {}
    for j in range(X.shape[1]):
        target = X[:, j]
        # Plain lstsq here: the auxiliary R² is well defined even when
        # the other columns are collinear among themselves.
        design = _design(np.delete(X, j, axis=1))
        beta, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
        residuals = target - design @ beta
        rss = float(residuals @ residuals)
        tss = float(((target - target.mean()) ** 2).sum())
        if tss <= 0:
            out[names[j]] = float("inf")
            continue
        r2 = 1.0 - rss / tss
        out[names[j]] = float("inf") if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2)
    return out
