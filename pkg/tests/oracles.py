"""Independent reference implementations used to cross-check the package.

Everything here is written from first principles with different
algorithms and different libraries than the code under test: matching
is a brute-force token scan, regression goes through explicit normal
equations with mpmath tail probabilities, tallies use exact fractions.
Slow and simple on purpose.
"""

from __future__ import annotations

import math
import re
import unicodedata
from datetime import date, timedelta
from fractions import Fraction

import mpmath
import numpy as np

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _norm(text: str) -> str:
    return unicodedata.normalize("NFC", text).casefold()


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(_norm(text))


def _contains_tokens(haystack: list[str], needle: str) -> bool:
    pattern = _TOKEN_RE.findall(_norm(needle))
    if not pattern:
        return False
    k = len(pattern)
    return any(haystack[i : i + k] == pattern for i in range(len(haystack) - k + 1))


def oracle_phase_one(
    events: list[dict],
    articles: list[dict],
    class_keywords: dict[str, list[str]],
    location_keywords: dict[str, list[str]],
    scope: str = "title_plus_body",
    window_days: int = 7,
    window_before_days: int = 0,
) -> dict[str, set[str]]:
    """Brute-force triple-rule scan.

    An article links to an event when its publish date falls in
    [start - before, start + window] and its scoped text contains at
    least one class keyword and at least one location keyword, both on
    token boundaries.
    """
    out: dict[str, set[str]] = {}
    for event in events:
        start: date = event["start_date"]
        lo = start - timedelta(days=window_before_days)
        hi = start + timedelta(days=window_days)
        cls_kws = class_keywords.get(event["class"], [])
        loc_kws = location_keywords.get(event["country"], [])
        hits: set[str] = set()
        for art in articles:
            if not (lo <= art["publish_date"] <= hi):
                continue
            if scope == "title_only":
                text = art["title"]
            else:
                text = art["title"] + "\n" + art.get("body", "")
            toks = _tokens(text)
            if any(_contains_tokens(toks, kw) for kw in cls_kws) and any(
                _contains_tokens(toks, kw) for kw in loc_kws
            ):
                hits.add(art["id"])
        out[event["id"]] = hits
    return out


def oracle_window(
    articles: list[dict], start: date, window_days: int, window_before_days: int = 0
) -> set[str]:
    lo = start - timedelta(days=window_before_days)
    hi = start + timedelta(days=window_days)
    return {a["id"] for a in articles if lo <= a["publish_date"] <= hi}


# ---------------------------------------------------------------------------
# Regression


def student_t_sf(t_abs: float, df: int) -> float:
    """P(T > t) for Student's t via the regularized incomplete beta."""
    if df <= 0:
        return float("nan")
    x = df / (df + t_abs * t_abs)
    return float(0.5 * mpmath.betainc(df / 2.0, 0.5, 0, x, regularized=True))


def oracle_ols(X: np.ndarray, y: np.ndarray) -> dict:
    """OLS by explicit normal equations, with an added intercept column."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n = X.shape[0]
    design = np.hstack([np.ones((n, 1)), X])
    p = design.shape[1]
    xtx = design.T @ design
    xtx_inv = np.linalg.inv(xtx)
    beta = xtx_inv @ design.T @ np.asarray(y, dtype=float)
    resid = np.asarray(y, dtype=float) - design @ beta
    rss = float(resid @ resid)
    ybar = float(np.mean(y))
    tss = float(np.sum((np.asarray(y, dtype=float) - ybar) ** 2))
    sigma2 = rss / (n - p)
    se = np.sqrt(np.clip(np.diag(sigma2 * xtx_inv), 0.0, None))
    tstats = np.array(
        [b / s if s > 0 else (math.inf if b > 0 else -math.inf if b < 0 else 0.0) for b, s in zip(beta, se)]
    )
    pvals = np.array([2.0 * student_t_sf(abs(t), n - p) for t in tstats])
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - p)
    aic = -math.inf if rss <= 0 else n * math.log(rss / n) + 2 * p
    return {
        "beta": beta,
        "se": se,
        "t": tstats,
        "p": pvals,
        "rss": rss,
        "r2": r2,
        "adj_r2": adj,
        "aic": aic,
    }


def oracle_forward_aic(X: np.ndarray, y: np.ndarray, names: list[str]) -> list[str]:
    """Greedy forward AIC selection: strict improvement, first-wins ties."""
    selected: list[str] = []
    remaining = list(names)
    current = oracle_ols(np.zeros((len(y), 0)), y)["aic"]
    while remaining:
        best_name, best_aic = None, current
        for name in remaining:
            cols = [names.index(s) for s in selected] + [names.index(name)]
            sub = X[:, cols]
            if np.linalg.matrix_rank(np.hstack([np.ones((len(y), 1)), sub])) < sub.shape[1] + 1:
                continue
            aic = oracle_ols(sub, y)["aic"]
            if aic < best_aic:
                best_name, best_aic = name, aic
        if best_name is None:
            break
        selected.append(best_name)
        remaining.remove(best_name)
        current = best_aic
    return selected


def oracle_vif(X: np.ndarray) -> list[float]:
    out = []
    n = X.shape[0]
    for j in range(X.shape[1]):
        others = np.delete(X, j, axis=1)
        design = np.hstack([np.ones((n, 1)), others])
        beta, *_ = np.linalg.lstsq(design, X[:, j], rcond=None)
        resid = X[:, j] - design @ beta
        rss = float(resid @ resid)
        tss = float(np.sum((X[:, j] - X[:, j].mean()) ** 2))
        if tss <= 0:
            out.append(math.inf)
            continue
        r2 = 1.0 - rss / tss
        out.append(math.inf if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2))
    return out


# ---------------------------------------------------------------------------
# Voting, metrics, events


def oracle_vote(existing: set[str], runs: list[list[str]], threshold) -> list[str]:
    """Exact-fraction tally: accept candidates present in at least
    ceil(threshold * n_runs) runs and not already in `existing`."""
    need = -(-Fraction(str(threshold)) * len(runs) // 1)  # ceil via floor division
    counts: dict[str, int] = {}
    for run in runs:
        for kw in {" ".join(unicodedata.normalize("NFC", w).casefold().split()) for w in run}:
            if kw:
                counts[kw] = counts.get(kw, 0) + 1
    return sorted(k for k, c in counts.items() if c >= need and k not in existing)


def oracle_confusion(
    predicted: dict[str, set[str]], gold: list[tuple[str, str, str]]
) -> dict[str, dict[str, int]]:
    """Per-event TP/FP/FN from (event, article, label) gold triples.

    Only labeled pairs are scored; a predicted pair without a label is
    ignored here (the package counts them separately).
    """
    by_event: dict[str, dict[str, str]] = {}
    for event_id, article_id, label in gold:
        by_event.setdefault(event_id, {})[article_id] = label
    out = {}
    for event_id, labels in by_event.items():
        pred = predicted.get(event_id, set())
        tp = sum(1 for a, lab in labels.items() if lab == "positive" and a in pred)
        fp = sum(1 for a, lab in labels.items() if lab == "negative" and a in pred)
        fn = sum(1 for a, lab in labels.items() if lab == "positive" and a not in pred)
        out[event_id] = {"tp": tp, "fp": fp, "fn": fn}
    return out


def prf(tp: int, fp: int, fn: int) -> tuple[float | None, float | None, float | None]:
    p = tp / (tp + fp) if tp + fp else None
    r = tp / (tp + fn) if tp + fn else None
    if p is None or r is None:
        f = None
    elif p + r == 0:
        f = 0.0
    else:
        f = 2 * p * r / (p + r)
    return p, r, f


def oracle_macro(confusions: dict[str, dict[str, int]]) -> dict[str, float | None]:
    """Macro means over events with at least one gold positive; each
    metric averages its defined values only."""
    ps, rs, fs = [], [], []
    for c in confusions.values():
        if c["tp"] + c["fn"] == 0:
            continue
        p, r, f = prf(c["tp"], c["fp"], c["fn"])
        if p is not None:
            ps.append(p)
        if r is not None:
            rs.append(r)
        if f is not None:
            fs.append(f)
    mean = lambda xs: sum(xs) / len(xs) if xs else None  # noqa: E731
    return {"precision": mean(ps), "recall": mean(rs), "f1": mean(fs)}


def oracle_kappa(a: list[str], b: list[str]) -> tuple[float, float]:
    assert len(a) == len(b) and a
    po = sum(1 for x, y in zip(a, b) if x == y) / len(a)
    pe = 0.0
    for label in set(a) | set(b):
        pe += (a.count(label) / len(a)) * (b.count(label) / len(b))
    kappa = 1.0 if pe >= 1.0 else (po - pe) / (1 - pe)
    return po, kappa


def oracle_gtd_salience(records: list[dict]) -> set[str]:
    """Keep attacks with >10 casualties, plus each country's top 3 by
    casualties (missing counts as 0; ties by earlier date then id)."""
    keep = {r["id"] for r in records if (r.get("casualties") or 0) > 10}
    by_country: dict[str, list[dict]] = {}
    for r in records:
        by_country.setdefault(r["country"], []).append(r)
    for rows in by_country.values():
        ranked = sorted(rows, key=lambda r: (-(r.get("casualties") or 0), r["start_date"], r["id"]))
        keep.update(r["id"] for r in ranked[:3])
    return keep


def oracle_collisions(records: list[dict]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for i, a in enumerate(records):
        for b in records[i + 1 :]:
            if (a["class"], a["country"], a["start_date"]) == (
                b["class"],
                b["country"],
                b["start_date"],
            ):
                key = f"{a['class']}|{a['country']}|{a['start_date'].isoformat()}"
                ids = out.setdefault(key, [])
                for r in (a, b):
                    if r["id"] not in ids:
                        ids.append(r["id"])
    return {k: sorted(v) for k, v in out.items()}


def oracle_minmax_log1p_impute(values: list[float | None]) -> list[float]:
    """Deaths preprocessing: mean-impute missing, log1p, min-max."""
    observed = [v for v in values if v is not None]
    mean = sum(observed) / len(observed)
    logged = [math.log1p(v if v is not None else mean) for v in values]
    lo, hi = min(logged), max(logged)
    if hi == lo:
        return [0.0 for _ in logged]
    return [(v - lo) / (hi - lo) for v in logged]
