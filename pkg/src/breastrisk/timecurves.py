"""Time-dependent calibration curves on the follow-up scale.

Observed curves are counting-process estimators (event counts,
Nelson-Aalen, Kaplan-Meier net risk, cumulative incidence); expected
curves integrate the per-subject model hazards against the observed
at-risk process in closed form. Ties follow the usual convention: events
at a time use the at-risk count before any removal, censorings leave
afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm as norm_dist

from .calib import CAUSE_BREAST_EVENT, poisson_exact_interval
from .errors import ValidationError
from .rates import MODEL_AGE_HI
from .risk import competing_risk_curve

METHOD_COUNT = "count"
METHOD_CUM_HAZARD = "cum_hazard"
METHOD_NET_RISK = "net_risk"
METHOD_CIF = "cif"

_Z95 = float(norm_dist.ppf(0.975))


@dataclass(frozen=True)
class CurveSeries:
    """One observed-vs-expected curve on a shared time grid.

    ``expected_b`` is only present for methods with two expected variants
    (net risk: cohort-at-baseline mean vs at-risk-weighted).
    """

    method_tag: str
    grid: np.ndarray
    observed: np.ndarray
    obs_lo: np.ndarray
    obs_hi: np.ndarray
    expected_a: np.ndarray
    expected_b: np.ndarray | None = None

    def __post_init__(self) -> None:
        if np.any(np.diff(self.grid) <= 0):
            raise ValidationError("curve grid must be strictly increasing")

    def ratio(self) -> "CurveSeries":
        """Observed / expected pointwise (first expected variant)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.expected_a > 0, self.observed / self.expected_a, np.nan)
            lo = np.where(self.expected_a > 0, self.obs_lo / self.expected_a, np.nan)
            hi = np.where(self.expected_a > 0, self.obs_hi / self.expected_a, np.nan)
            ratio_b = None
            if self.expected_b is not None:
                ratio_b = np.where(self.expected_b > 0, self.observed / self.expected_b, np.nan)
        return CurveSeries(
            method_tag=f"{self.method_tag}_oe",
            grid=self.grid,
            observed=ratio,
            obs_lo=lo,
            obs_hi=hi,
            expected_a=np.ones_like(self.expected_a),
            expected_b=ratio_b,
        )

    def rows(self) -> list[dict]:
        out = []
        for i, t in enumerate(self.grid):
            out.append(
                {
                    "method": self.method_tag,
                    "time": float(t),
                    "observed": float(self.observed[i]),
                    "obs_lo": float(self.obs_lo[i]),
                    "obs_hi": float(self.obs_hi[i]),
                    "expected_a": float(self.expected_a[i]),
                    "expected_b": (
                        float(self.expected_b[i]) if self.expected_b is not None else None
                    ),
                }
            )
        return out


# ---------------------------------------------------------------------------
# Cohort sweep machinery
# ---------------------------------------------------------------------------


class _Cohort:
    """Preprocessed cohort: exit-time counts and aggregate hazard steps."""

    def __init__(self, records, cause: int):
        records = list(records)
        if not records:
            raise ValidationError("empty cohort")
        self.records = records
        self.cause = cause
        self.n = len(records)
        self.fu = np.array([r.follow_up_years for r in records])
        causes = np.array([r.cause for r in records])
        self.is_event = causes == cause
        self.fu_sorted = np.sort(self.fu)
        self.event_times = np.sort(self.fu[self.is_event])
        self.max_fu = float(self.fu.max())

        # Per-unique-exit-time counts (events of the cause, any-cause events,
        # all exits) and the at-risk count just before each time.
        self.times, inverse = np.unique(self.fu, return_inverse=True)
        self.d_cause = np.zeros(len(self.times))
        self.d_any_event = np.zeros(len(self.times))
        self.d_exits = np.zeros(len(self.times))
        np.add.at(self.d_cause, inverse, self.is_event.astype(float))
        np.add.at(self.d_any_event, inverse, (causes != 0).astype(float))
        np.add.at(self.d_exits, inverse, 1.0)
        self.y_before = self.n - np.concatenate([[0.0], np.cumsum(self.d_exits)[:-1]])

        # Aggregate hazard step function sum_i Y_i(v) h_i(v).
        starts, ends, rates = [], [], []
        for r in records:
            edges, band_rates = r.hazard(cause).band_arrays()
            lo, hi = r.entry_age, r.exit_age
            inner = edges[(edges > lo) & (edges < hi)]
            pts = np.concatenate([[lo], inner, [hi]])
            idx = np.clip(
                np.searchsorted(edges, pts[:-1], side="right") - 1, 0, len(band_rates) - 1
            )
            starts.append(pts[:-1] - lo)
            ends.append(pts[1:] - lo)
            rates.append(band_rates[idx])
        seg_start = np.concatenate(starts)
        seg_end = np.concatenate(ends)
        seg_rate = np.concatenate(rates)

        knots = np.unique(np.concatenate([[0.0], seg_start, seg_end, self.fu]))
        delta = np.zeros(len(knots))
        np.add.at(delta, np.searchsorted(knots, seg_start), seg_rate)
        np.add.at(delta, np.searchsorted(knots, seg_end), -seg_rate)
        self.knots = knots
        self.agg_rate = np.maximum(np.cumsum(delta), 0.0)
        widths = np.diff(knots)
        self.count_prefix = np.concatenate([[0.0], np.cumsum(self.agg_rate[:-1] * widths)])
        at_risk = self.n - np.searchsorted(self.fu_sorted, knots, side="right")
        with np.errstate(divide="ignore", invalid="ignore"):
            per_head = np.where(at_risk > 0, self.agg_rate / np.maximum(at_risk, 1), 0.0)
        self._per_head = per_head
        self.hazard_prefix = np.concatenate([[0.0], np.cumsum(per_head[:-1] * widths)])

    def default_grid(self) -> np.ndarray:
        yearly = np.arange(1.0, math.floor(self.max_fu) + 1.0)
        return np.unique(np.concatenate([[0.0], self.event_times, yearly, [self.max_fu]]))

    def expected_count_at(self, grid: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.knots, grid, side="right") - 1, 0, len(self.knots) - 1)
        return self.count_prefix[idx] + self.agg_rate[idx] * (grid - self.knots[idx])

    def expected_cum_hazard_at(self, grid: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.knots, grid, side="right") - 1, 0, len(self.knots) - 1)
        return self.hazard_prefix[idx] + self._per_head[idx] * (grid - self.knots[idx])


def _step_values(event_times, event_values, grid, initial=0.0) -> np.ndarray:
    event_times = np.asarray(event_times, dtype=float)
    event_values = np.asarray(event_values, dtype=float)
    if len(event_times) == 0:
        return np.full(len(grid), initial)
    idx = np.searchsorted(event_times, grid, side="right") - 1
    values = np.concatenate([[initial], event_values])
    return values[idx + 1]


def _yearly_points(grid: np.ndarray) -> np.ndarray:
    return np.unique(
        np.concatenate([[0.0], np.arange(1.0, math.floor(grid[-1]) + 1), [grid[-1]]])
    )


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


def observed_count_curve(records, cause: int = CAUSE_BREAST_EVENT, grid=None) -> CurveSeries:
    """Cumulative observed events with exact Poisson pointwise bands;
    the expected variant is the at-risk-integrated model count."""
    cohort = _Cohort(records, cause)
    grid = np.asarray(grid, dtype=float) if grid is not None else cohort.default_grid()
    counts = np.searchsorted(cohort.event_times, grid, side="right").astype(float)
    lo = np.empty_like(counts)
    hi = np.empty_like(counts)
    cache: dict[int, tuple[float, float]] = {}
    for i, c in enumerate(counts.astype(int)):
        if c not in cache:
            cache[c] = poisson_exact_interval(c)
        lo[i], hi[i] = cache[c]
    return CurveSeries(
        method_tag=METHOD_COUNT,
        grid=grid,
        observed=counts,
        obs_lo=lo,
        obs_hi=hi,
        expected_a=cohort.expected_count_at(grid),
    )


def expected_count_curve(records, cause: int = CAUSE_BREAST_EVENT, grid=None) -> CurveSeries:
    """Expected event count through time, standalone."""
    cohort = _Cohort(records, cause)
    grid = np.asarray(grid, dtype=float) if grid is not None else cohort.default_grid()
    expected = cohort.expected_count_at(grid)
    return CurveSeries(
        method_tag=METHOD_COUNT,
        grid=grid,
        observed=expected,
        obs_lo=expected,
        obs_hi=expected,
        expected_a=expected,
    )


def nelson_aalen(records, cause: int = CAUSE_BREAST_EVENT, grid=None) -> CurveSeries:
    """Nelson-Aalen cumulative hazard vs the at-risk-weighted expected one."""
    cohort = _Cohort(records, cause)
    grid = np.asarray(grid, dtype=float) if grid is not None else cohort.default_grid()
    has = (cohort.d_cause > 0) & (cohort.y_before > 0)
    times = cohort.times[has]
    increments = cohort.d_cause[has] / cohort.y_before[has]
    var_inc = cohort.d_cause[has] / cohort.y_before[has] ** 2
    obs = _step_values(times, np.cumsum(increments), grid)
    var = _step_values(times, np.cumsum(var_inc), grid)
    half = _Z95 * np.sqrt(var)
    return CurveSeries(
        method_tag=METHOD_CUM_HAZARD,
        grid=grid,
        observed=obs,
        obs_lo=np.maximum(obs - half, 0.0),
        obs_hi=obs + half,
        expected_a=cohort.expected_cum_hazard_at(grid),
    )


def expected_cum_hazard(records, cause: int = CAUSE_BREAST_EVENT, grid=None) -> CurveSeries:
    cohort = _Cohort(records, cause)
    grid = np.asarray(grid, dtype=float) if grid is not None else cohort.default_grid()
    expected = cohort.expected_cum_hazard_at(grid)
    return CurveSeries(
        method_tag=METHOD_CUM_HAZARD,
        grid=grid,
        observed=expected,
        obs_lo=expected,
        obs_hi=expected,
        expected_a=expected,
    )


def _subject_cum_hazard_matrix(cohort: _Cohort, points: np.ndarray) -> np.ndarray:
    """Per-subject H_i(t) over the full horizon (ignores censoring)."""
    out = np.empty((cohort.n, len(points)))
    for i, r in enumerate(cohort.records):
        table = r.hazard(cohort.cause)
        hi_cov = table.coverage_hi
        ages = np.minimum(r.entry_age + points, hi_cov)
        out[i] = [table.cumulative(r.entry_age, a) if a > r.entry_age else 0.0 for a in ages]
    return out


def net_risk_curves(records, cause: int = CAUSE_BREAST_EVENT, grid=None) -> CurveSeries:
    """1 - Kaplan-Meier vs two expected net risks.

    Variant A averages 1 - exp(-H_i(t)) over the whole cohort at baseline;
    variant B transforms the at-risk-weighted expected cumulative hazard.
    Variant A is computed exactly at yearly points and interpolated.
    """
    cohort = _Cohort(records, cause)
    grid = np.asarray(grid, dtype=float) if grid is not None else cohort.default_grid()
    has = (cohort.d_cause > 0) & (cohort.y_before > 0)
    times = cohort.times[has]
    d = cohort.d_cause[has]
    y = cohort.y_before[has]
    surv = np.cumprod(1.0 - d / y)
    # once survival hits zero the curve is pinned and its variance is zero
    with np.errstate(divide="ignore", invalid="ignore"):
        gw_terms = np.where(y > d, d / (y * (y - d)), 0.0)
    greenwood = surv * surv * np.cumsum(gw_terms)
    risk = _step_values(times, 1.0 - surv, grid)
    var = _step_values(times, greenwood, grid)
    half = _Z95 * np.sqrt(var)

    points = _yearly_points(grid)
    h_matrix = _subject_cum_hazard_matrix(cohort, points)
    exp_a_points = np.mean(-np.expm1(-h_matrix), axis=0)
    expected_a = np.interp(grid, points, exp_a_points)
    expected_b = -np.expm1(-cohort.expected_cum_hazard_at(grid))
    return CurveSeries(
        method_tag=METHOD_NET_RISK,
        grid=grid,
        observed=risk,
        obs_lo=np.clip(risk - half, 0.0, 1.0),
        obs_hi=np.clip(risk + half, 0.0, 1.0),
        expected_a=expected_a,
        expected_b=expected_b,
    )


def cif_curves(records, cause: int = CAUSE_BREAST_EVENT, grid=None) -> CurveSeries:
    """Cumulative incidence estimator vs the mean model cumulative incidence.

    Each cause-j jump d/Y is weighted by the all-cause Kaplan-Meier left
    limit (disease or death as the endpoint); pointwise bands use the
    standard delta-method variance for the weighted estimator.
    """
    cohort = _Cohort(records, cause)
    grid = np.asarray(grid, dtype=float) if grid is not None else cohort.default_grid()

    keep = cohort.y_before > 0
    times = cohort.times[keep]
    d_j = cohort.d_cause[keep]
    d_all = cohort.d_any_event[keep]
    y = cohort.y_before[keep]
    surv_left = np.concatenate([[1.0], np.cumprod(1.0 - d_all / y)])[:-1]
    jumps = surv_left * d_j / y
    f_at_event = np.cumsum(jumps)

    has_jump = d_j > 0
    obs = _step_values(times[has_jump], f_at_event[has_jump], grid)

    # Delta-method variance via prefix sums:
    # var(t) = F(t)^2*A - 2 F(t)*B + C + D - 2 F(t)*E + 2 G, with prefix sums
    # over event times <= t of a_e, F_e a_e, F_e^2 a_e, b_e, c_e, F_e c_e.
    with np.errstate(divide="ignore", invalid="ignore"):
        a_e = np.where(y > d_all, d_all / (y * (y - d_all)), 0.0)
    b_e = surv_left * surv_left * ((y - d_j) / y) * d_j / (y * y)
    c_e = surv_left * d_j / (y * y)
    pre = {
        "a": np.cumsum(a_e),
        "fa": np.cumsum(f_at_event * a_e),
        "ffa": np.cumsum(f_at_event * f_at_event * a_e),
        "b": np.cumsum(b_e),
        "c": np.cumsum(c_e),
        "fc": np.cumsum(f_at_event * c_e),
    }
    idx = np.searchsorted(times, grid, side="right") - 1
    var = np.zeros_like(grid)
    valid = idx >= 0
    iv = idx[valid]
    ft = obs[valid]
    var[valid] = (
        ft * ft * pre["a"][iv]
        - 2.0 * ft * pre["fa"][iv]
        + pre["ffa"][iv]
        + pre["b"][iv]
        - 2.0 * ft * pre["c"][iv]
        + 2.0 * pre["fc"][iv]
    )
    var = np.maximum(var, 0.0)
    half = _Z95 * np.sqrt(var)

    points = _yearly_points(grid)
    exp_points = np.zeros(len(points))
    for r in cohort.records:
        hi_cov = min(r.h1.coverage_hi, r.h2.coverage_hi, MODEL_AGE_HI)
        ages = np.minimum(r.entry_age + points, hi_cov)
        exp_points += competing_risk_curve(r.h1, r.h2, r.entry_age, ages)
    exp_points /= cohort.n
    expected_a = np.interp(grid, points, exp_points)
    return CurveSeries(
        method_tag=METHOD_CIF,
        grid=grid,
        observed=obs,
        obs_lo=np.clip(obs - half, 0.0, 1.0),
        obs_hi=np.clip(obs + half, 0.0, 1.0),
        expected_a=expected_a,
    )


def all_curves(records, cause: int = CAUSE_BREAST_EVENT, grid=None) -> list[CurveSeries]:
    """The curve methods plus their observed/expected ratio series."""
    built = [
        observed_count_curve(records, cause, grid),
        nelson_aalen(records, cause, grid),
        net_risk_curves(records, cause, grid),
        cif_curves(records, cause, grid),
    ]
    return built + [s.ratio() for s in built]
