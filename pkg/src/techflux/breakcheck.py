"""Index time series, structural-break test, and trend correlation.

The series runner composes the full pipeline over a list of time windows:
each window is built into a network and clustered, consecutive windows are
compared, and the mean convergence/novelty indices become one series point
per later window.

The break test is the classic known-breakpoint F-test: fit one regression
line over the whole series, fit the two segments separately, and compare
the pooled residual sum of squares against the segmented one,

    F = [(SSR_pooled - (SSR1 + SSR2)) / k] / [(SSR1 + SSR2) / (n1 + n2 - 2k)]

with k = 2 regressors (intercept and time index). The p-value comes from
the F distribution's survival function, evaluated through a hand-rolled
regularized incomplete beta so results do not depend on an external stats
stack. The incomplete beta uses the modified Lentz continued fraction,
switching to the symmetric expansion when x is past the central cut so the
fraction always converges fast; absolute accuracy is well under 1e-10
across the degrees of freedom this module produces.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .cograph import build_cooccurrence, top_n_filter
from .community import louvain
from .config import PipelineConfig
from .corpus import Corpus, TimeWindow, window_filter
from .errors import StatsError
from .fileio import atomic_write_text
from .lexicon import TermLexicon, extract_terms
from .transition import MEASURE_OVERLAP_TARGET, transition_report

_CF_MAX_ITER = 300
_CF_EPS = 1e-15
_CF_TINY = 1e-300

TREND_PERIODS = ("year", "quarter")


def _beta_cf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _CF_EPS:
            return h
    raise StatsError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (a > 0.0 and b > 0.0):
        raise StatsError(f"beta parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise StatsError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def f_survival(f: float, d1: float, d2: float) -> float:
    """P(F > f) for an F distribution with (d1, d2) degrees of freedom."""
    if not (d1 > 0.0 and d2 > 0.0):
        raise StatsError(f"degrees of freedom must be positive, got ({d1}, {d2})")
    if f < 0.0:
        raise StatsError(f"F statistic must be nonnegative, got {f}")
    if f == 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    # upper tail directly, avoiding the 1 - CDF cancellation
    x = d2 / (d2 + d1 * f)
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x)


@dataclass(frozen=True)
class OlsFit:
    intercept: float
    slope: float
    ssr: float


def ols_fit(x: list[float], y: list[float]) -> OlsFit:
    """Least-squares line through (x, y); ssr is the residual sum of squares."""
    if len(x) != len(y):
        raise StatsError(f"x and y lengths differ: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise StatsError(f"need at least 3 points, got {n}")
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    x_mean = math.fsum(xs) / n
    y_mean = math.fsum(ys) / n
    sxx = math.fsum((v - x_mean) ** 2 for v in xs)
    if sxx == 0.0:
        raise StatsError("x values are all equal; slope undefined")
    sxy = math.fsum((xs[i] - x_mean) * (ys[i] - y_mean) for i in range(n))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    ssr = math.fsum((ys[i] - intercept - slope * xs[i]) ** 2 for i in range(n))
    return OlsFit(intercept=intercept, slope=slope, ssr=ssr)


@dataclass(frozen=True)
class BreakTestResult:
    f_statistic: float
    p_value: float
    breakpoint_index: int
    k: int
    n1: int
    n2: int


def chow_test(x: list[float], y: list[float], breakpoint_index: int) -> BreakTestResult:
    """Known-breakpoint structural-break F-test on a line-plus-noise model.

    The series splits into [0, breakpoint) and [breakpoint, n). When the
    segmented fit is exact (pooled residuals remain) the statistic is
    +infinity with p = 0; when the pooled fit is already exact there is no
    break and the statistic is 0 with p = 1. A scale-relative floor keeps
    float dust in the residuals from flipping those exact cases.
    """
    if len(x) != len(y):
        raise StatsError(f"x and y lengths differ: {len(x)} vs {len(y)}")
    n = len(x)
    k = 2
    n1 = breakpoint_index
    n2 = n - breakpoint_index
    if n1 <= k or n2 <= k:
        raise StatsError(
            f"each segment needs more than {k} points; "
            f"breakpoint {breakpoint_index} gives segments of {n1} and {n2}"
        )
    pooled = ols_fit(x, y)
    left = ols_fit(x[:breakpoint_index], y[:breakpoint_index])
    right = ols_fit(x[breakpoint_index:], y[breakpoint_index:])
    segmented = left.ssr + right.ssr
    zero_floor = 1e-24 * (math.fsum(float(v) * float(v) for v in y) + 1.0)
    if segmented <= zero_floor:
        if pooled.ssr <= zero_floor:
            f_stat, p = 0.0, 1.0
        else:
            f_stat, p = math.inf, 0.0
    else:
        df2 = n1 + n2 - 2 * k
        f_stat = ((pooled.ssr - segmented) / k) / (segmented / df2)
        if f_stat < 0.0:
            f_stat = 0.0
        p = f_survival(f_stat, float(k), float(df2))
    return BreakTestResult(
        f_statistic=f_stat,
        p_value=p,
        breakpoint_index=breakpoint_index,
        k=k,
        n1=n1,
        n2=n2,
    )


def format_p_value(p: float) -> str:
    """4 significant digits; tiny values shown as a bound instead of 0."""
    if p < 1e-12:
        return "<1e-12"
    return f"{p:.4g}"


def break_result_to_json(result: BreakTestResult) -> str:
    f_value: object = result.f_statistic if math.isfinite(result.f_statistic) else "inf"
    payload = {
        "f_statistic": f_value,
        "p_value": result.p_value,
        "breakpoint_index": result.breakpoint_index,
        "k": result.k,
        "n1": result.n1,
        "n2": result.n2,
    }
    return json.dumps(payload, indent=2) + "\n"


def export_break_json(result: BreakTestResult, path: str | Path) -> None:
    atomic_write_text(path, break_result_to_json(result))


@dataclass(frozen=True)
class SeriesPoint:
    window: TimeWindow
    mean_ci: float
    mean_ni: float


@dataclass(frozen=True)
class IndexSeries:
    points: tuple[SeriesPoint, ...]
    description: str = ""

    def __post_init__(self) -> None:
        for prev, cur in zip(self.points, self.points[1:]):
            if not cur.window.start > prev.window.start:
                raise StatsError("series points must be strictly increasing by window start")
        for point in self.points:
            if not (0.0 <= point.mean_ci <= 1.0 and 0.0 <= point.mean_ni <= 1.0):
                raise StatsError(f"mean indices out of [0, 1] at {point.window.describe()}")

    def ci_values(self) -> list[float]:
        return [p.mean_ci for p in self.points]

    def ni_values(self) -> list[float]:
        return [p.mean_ni for p in self.points]


def _mean_index(per_cluster: dict[int, float], sizes: tuple[int, ...], weighted: bool) -> float:
    values = [per_cluster[cid] for cid in sorted(per_cluster)]
    if not weighted:
        return math.fsum(values) / len(values)
    total = sum(sizes)
    return math.fsum(v * sizes[i] for i, v in enumerate(values)) / total


def cluster_window(corpus: Corpus, lexicon: TermLexicon, window: TimeWindow, config: PipelineConfig):
    """Build, filter, and cluster one window; raises if the window has no edges."""
    sub = window_filter(corpus, window)
    graph = build_cooccurrence(sub, lexicon, field=config.field, pairs=config.pairs)
    graph = top_n_filter(graph, config.top_n)
    if not graph.edges:
        raise StatsError(f"window {window.describe()} produced an edgeless graph")
    return graph, louvain(graph, config.resolution)


def index_series(
    corpus: Corpus,
    lexicon: TermLexicon,
    windows: list[TimeWindow],
    config: PipelineConfig,
    description: str = "",
) -> IndexSeries:
    """Mean convergence/novelty per consecutive window pair.

    Each point is labeled with the later window of its pair, so a list of W
    windows yields W - 1 points. Indices always use the overlap measure
    regardless of the configured exploratory measure.
    """
    if len(windows) < 3:
        raise StatsError(f"need at least 3 windows, got {len(windows)}")
    for prev, cur in zip(windows, windows[1:]):
        if not cur.start > prev.start:
            raise StatsError(
                f"windows must be strictly increasing by start date: "
                f"{prev.describe()} then {cur.describe()}"
            )
    clustered = [(w,) + cluster_window(corpus, lexicon, w, config) for w in windows]
    points = []
    for (_, graph_t, part_t), (w_t1, graph_t1, part_t1) in zip(clustered, clustered[1:]):
        report = transition_report(
            (graph_t, part_t), (graph_t1, part_t1),
            tau=config.tau, measure=MEASURE_OVERLAP_TARGET,
        )
        sizes = report.similarity.col_sizes
        points.append(SeriesPoint(
            window=w_t1,
            mean_ci=_mean_index(report.convergence, sizes, config.weighted_mean),
            mean_ni=_mean_index(report.novelty, sizes, config.weighted_mean),
        ))
    return IndexSeries(points=tuple(points), description=description)


def export_series_csv(series: IndexSeries, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["window_start", "window_end", "mean_ci", "mean_ni"])
    for point in series.points:
        writer.writerow([
            point.window.start.isoformat(),
            point.window.end.isoformat(),
            f"{point.mean_ci:.6f}",
            f"{point.mean_ni:.6f}",
        ])
    atomic_write_text(path, buf.getvalue())


def _period_key(date, period: str) -> str:
    if period == "year":
        return str(date.year)
    return f"{date.year}Q{(date.month - 1) // 3 + 1}"


def term_trend(
    corpora: list[tuple[str, Corpus]],
    lexicon: TermLexicon,
    term: str,
    period: str,
) -> dict[str, dict[str, int]]:
    """Documents matching a term, per period, per labeled source.

    A document matches when the term fires in its text or appears among its
    tags, the same item semantics the network builder uses.
    """
    if period not in TREND_PERIODS:
        raise StatsError(f"period must be one of {TREND_PERIODS}, got {period!r}")
    if term not in lexicon.canonical_terms:
        raise StatsError(f"unknown term {term!r}: not in the lexicon")
    counts: dict[str, dict[str, int]] = {}
    for label, corpus in corpora:
        per_period: dict[str, int] = {}
        for doc in corpus.documents:
            if term in doc.tags or term in extract_terms(doc, lexicon):
                key = _period_key(doc.date, period)
                per_period[key] = per_period.get(key, 0) + 1
        counts[label] = dict(sorted(per_period.items()))
    return counts


def export_trend_csv(counts: dict[str, dict[str, int]], path: str | Path) -> None:
    """CSV rows (period, source, count) covering every period seen anywhere."""
    periods = sorted({p for per_period in counts.values() for p in per_period})
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["period", "source", "count"])
    for period in periods:
        for source in sorted(counts):
            writer.writerow([period, source, counts[source].get(period, 0)])
    atomic_write_text(path, buf.getvalue())


def pearson(a: list[float], b: list[float]) -> float:
    """Pearson correlation; errors on constant input where it is undefined."""
    if len(a) != len(b):
        raise StatsError(f"series lengths differ: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise StatsError(f"need at least 2 points, got {n}")
    xs = [float(v) for v in a]
    ys = [float(v) for v in b]
    x_mean = math.fsum(xs) / n
    y_mean = math.fsum(ys) / n
    sxx = math.fsum((v - x_mean) ** 2 for v in xs)
    syy = math.fsum((v - y_mean) ** 2 for v in ys)
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("correlation undefined for a constant series")
    sxy = math.fsum((xs[i] - x_mean) * (ys[i] - y_mean) for i in range(n))
    r = sxy / math.sqrt(sxx * syy)
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    return r
