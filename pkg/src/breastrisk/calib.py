"""Overall calibration: observed vs expected event counts.

The preferred expected count integrates each subject's cause-specific
hazard over her actual at-risk interval. The cumulative-incidence variants
cover the three censoring regimes (fixed horizon, known per-subject
censoring, stochastic censoring weighted by a censoring survivor). The two
estimators known to be biased toward zero are provided, flagged, for bias
demonstrations, along with the fixed-horizon-with-exclusions protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln
from scipy.stats import chi2 as chi2_dist
from scipy.stats import norm as norm_dist

from .errors import (
    DegenerateCensorEstimate,
    EmptyGroup,
    MissingCensoringTime,
    NoConvergence,
    NonPositiveE,
    ValidationError,
)
from .rates import MODEL_AGE_HI, RateTable
from .risk import competing_absolute_risk

CAUSE_CENSORED = 0
CAUSE_BREAST_EVENT = 1
CAUSE_OTHER_DEATH = 2

GROUP_LABELS = ("<2%", "2-3%", "3-5%", "5-8%", ">=8%")
GROUP_REFERENCE = "2-3%"
_GROUP_BOUNDS = (0.02, 0.03, 0.05, 0.08)


@dataclass(frozen=True)
class FollowUpRecord:
    """One subject's follow-up with her bound hazard predictions.

    ``h1``/``h2`` are the model's cause-specific hazard curves for this
    subject (age scale). ``potential_censor_years`` is the known potential
    censoring time on the follow-up scale, when available.
    """

    subject_id: str
    entry_age: float
    exit_age: float
    cause: int
    h1: RateTable
    h2: RateTable
    potential_censor_years: float | None = None

    def __post_init__(self) -> None:
        if self.cause not in (CAUSE_CENSORED, CAUSE_BREAST_EVENT, CAUSE_OTHER_DEATH):
            raise ValidationError(f"cause must be 0, 1 or 2, got {self.cause}")
        if not (self.exit_age > self.entry_age):
            raise ValidationError(
                f"subject {self.subject_id}: exit {self.exit_age} not after entry {self.entry_age}"
            )

    @property
    def follow_up_years(self) -> float:
        return self.exit_age - self.entry_age

    def hazard(self, cause: int) -> RateTable:
        return self.h1 if cause == CAUSE_BREAST_EVENT else self.h2


def observed_count(records, cause: int = CAUSE_BREAST_EVENT) -> int:
    return sum(1 for r in records if r.cause == cause)


def predicted_ten_year_risk(record: FollowUpRecord) -> float:
    horizon = min(record.entry_age + 10.0, MODEL_AGE_HI)
    return competing_absolute_risk(record.h1, record.h2, record.entry_age, horizon)


# ---------------------------------------------------------------------------
# Expected counts
# ---------------------------------------------------------------------------


def expected_hazard_method(records, cause: int = CAUSE_BREAST_EVENT) -> float:
    """Sum of per-subject cumulative hazards over actual at-risk intervals."""
    return float(
        sum(r.hazard(cause).cumulative(r.entry_age, r.exit_age) for r in records)
    )


def expected_cif_fixed(records, horizon_years: float) -> float:
    """Sum of cumulative incidences over a common horizon from entry."""
    if horizon_years < 0:
        raise ValidationError(f"horizon must be >= 0, got {horizon_years}")
    total = 0.0
    for r in records:
        hi = min(r.entry_age + horizon_years, MODEL_AGE_HI)
        if hi > r.entry_age:
            total += competing_absolute_risk(r.h1, r.h2, r.entry_age, hi)
    return total


def expected_cif_deterministic(records) -> float:
    """Cumulative incidence to each subject's known potential censoring time."""
    total = 0.0
    for r in records:
        if r.potential_censor_years is None:
            raise MissingCensoringTime(
                f"subject {r.subject_id} has no potential censoring time"
            )
        hi = min(r.entry_age + r.potential_censor_years, MODEL_AGE_HI)
        if hi > r.entry_age:
            total += competing_absolute_risk(r.h1, r.h2, r.entry_age, hi)
    return total


@dataclass(frozen=True)
class StepSurvivor:
    """Right-continuous step survivor on the follow-up scale, S(0) = 1."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if len(t) != len(v) or len(t) == 0 or t[0] != 0.0 or v[0] != 1.0:
            raise ValidationError("step survivor must start at (0, 1)")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(v) > 1e-12) or np.any(v < -1e-12):
            raise ValidationError("step survivor must be non-increasing on ascending times")

    def at(self, u: float) -> float:
        idx = int(np.searchsorted(self.times, u, side="right")) - 1
        return float(self.values[max(idx, 0)])


def censoring_survivor(records) -> StepSurvivor:
    """Kaplan-Meier survivor of the censoring distribution.

    Censoring (cause 0) is the event; disease and death act as censoring of
    the censoring process.
    """
    if not any(r.cause == CAUSE_CENSORED for r in records):
        raise DegenerateCensorEstimate("no censoring events to estimate from")
    durations = np.array([r.follow_up_years for r in records])
    is_censor_event = np.array([r.cause == CAUSE_CENSORED for r in records])
    order = np.argsort(durations, kind="mergesort")
    durations, is_censor_event = durations[order], is_censor_event[order]
    times = [0.0]
    values = [1.0]
    n_at_risk = len(durations)
    i = 0
    surv = 1.0
    while i < len(durations):
        t = durations[i]
        j = i
        d = 0
        while j < len(durations) and durations[j] == t:
            d += int(is_censor_event[j])
            j += 1
        if d > 0:
            surv *= 1.0 - d / n_at_risk
            times.append(float(t))
            values.append(surv)
        n_at_risk -= j - i
        i = j
    return StepSurvivor(times=tuple(times), values=tuple(values))


def expected_cif_stochastic(
    records,
    censor_survivor_fn: StepSurvivor | None = None,
    horizon_years: float | None = None,
) -> float:
    """Cumulative incidence weighted by the censoring survivor.

    Integrates h1 * exp(-(H1+H2)) * S_C over follow-up to ``horizon_years``
    (default: the longest observed follow-up). ``S_C`` is estimated by
    Kaplan-Meier from the records when not supplied.
    """
    records = list(records)
    if not records:
        return 0.0
    sc = censor_survivor_fn if censor_survivor_fn is not None else censoring_survivor(records)
    horizon = (
        horizon_years
        if horizon_years is not None
        else max(r.follow_up_years for r in records)
    )
    total = 0.0
    for r in records:
        total += _stochastic_one(r, sc, horizon)
    return total


def _stochastic_one(r: FollowUpRecord, sc: StepSurvivor, horizon: float) -> float:
    hi_age = min(r.entry_age + horizon, MODEL_AGE_HI)
    if hi_age <= r.entry_age:
        return 0.0
    edges = np.concatenate(
        [
            r.h1._edges,
            r.h2._edges,
            r.entry_age + np.asarray(sc.times, dtype=float),
            [r.entry_age, hi_age],
        ]
    )
    edges = np.unique(edges)
    edges = edges[(edges >= r.entry_age) & (edges <= hi_age)]
    prob, log_s = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = (a + b) / 2.0  # robust against rounding at step boundaries
        r1, r2 = r.h1.rate_at(mid), r.h2.rate_at(mid)
        weight = sc.at(mid - r.entry_age)
        width = b - a
        total_haz = (r1 + r2) * width
        if total_haz < 1e-12:
            prob += weight * math.exp(log_s) * r1 * width
        else:
            prob += (
                weight
                * math.exp(log_s)
                * (r1 / (r1 + r2))
                * -math.expm1(-total_haz)
            )
        log_s -= total_haz
    return prob


def biased_sum_to_event(records) -> float:
    """Cumulative incidence summed only to each exit time. Biased toward zero."""
    return float(
        sum(
            competing_absolute_risk(r.h1, r.h2, r.entry_age, r.exit_age)
            for r in records
        )
    )


def biased_net_risk(records) -> float:
    """Sum of 1 - exp(-H1) over at-risk intervals. Biased toward zero."""
    return float(
        sum(-math.expm1(-r.h1.cumulative(r.entry_age, r.exit_age)) for r in records)
    )


def fixed_horizon_exclusion(records, horizon_years: float) -> tuple[int, float]:
    """The flawed fixed-horizon protocol: observed and expected counts.

    Keeps cases diagnosed within the horizon plus anyone still at risk at
    the horizon, then sums fixed-horizon cumulative incidence over the kept
    subjects. Under censoring this overstates O/E; provided for bias
    demonstrations only.
    """
    kept = [
        r
        for r in records
        if (r.cause == CAUSE_BREAST_EVENT and r.follow_up_years <= horizon_years)
        or r.follow_up_years >= horizon_years
    ]
    observed = sum(
        1
        for r in kept
        if r.cause == CAUSE_BREAST_EVENT and r.follow_up_years <= horizon_years
    )
    return observed, expected_cif_fixed(kept, horizon_years)


# ---------------------------------------------------------------------------
# Exact Poisson O/E interval
# ---------------------------------------------------------------------------


def _poisson_cdf(k: int, mu: float) -> float:
    i = np.arange(0, k + 1)
    return float(np.exp(i * math.log(mu) - mu - gammaln(i + 1)).sum())


def poisson_exact_interval(count: int, level: float = 0.95) -> tuple[float, float]:
    """Exact central confidence interval for a Poisson mean.

    Bounds are found by inverting the exact tail sums: the lower bound
    solves P(X >= count; mu) = alpha/2, the upper solves
    P(X <= count; mu) = alpha/2.
    """
    if count < 0 or count != int(count):
        raise ValidationError(f"count must be a non-negative integer, got {count}")
    if not (0.0 < level < 1.0):
        raise ValidationError(f"level must be in (0,1), got {level}")
    count = int(count)
    alpha = 1.0 - level
    half = alpha / 2.0
    spread = 10.0 * math.sqrt(count + 1.0) + 10.0
    if count == 0:
        lower = 0.0
    else:
        lower = brentq(
            lambda mu: (1.0 - _poisson_cdf(count - 1, mu)) - half,
            1e-12,
            count + spread,
            xtol=1e-12,
            rtol=8.9e-16,
        )
    upper = brentq(
        lambda mu: _poisson_cdf(count, mu) - half,
        max(count, 1e-12) * 1e-6,
        count + spread,
        xtol=1e-12,
        rtol=8.9e-16,
    )
    return float(lower), float(upper)


@dataclass(frozen=True)
class OERatio:
    observed: int
    expected: float
    ratio: float
    lo: float
    hi: float
    level: float

    @property
    def covers_unity(self) -> bool:
        return self.lo <= 1.0 <= self.hi


def oe_ratio_with_ci(observed: int, expected: float, level: float = 0.95) -> OERatio:
    """O/E with the exact Poisson interval on O, treating E as fixed."""
    if expected <= 0.0:
        raise NonPositiveE(f"expected count must be > 0, got {expected}")
    lo, hi = poisson_exact_interval(observed, level)
    return OERatio(
        observed=int(observed),
        expected=float(expected),
        ratio=observed / expected,
        lo=lo / expected,
        hi=hi / expected,
        level=level,
    )


# ---------------------------------------------------------------------------
# Grouped chi-square test
# ---------------------------------------------------------------------------


def group_chi_sq(groups) -> tuple[float, int, float]:
    """Sum of (O_k - E_k)^2 / E_k over groups; df = K - 1."""
    groups = list(groups)
    if len(groups) < 2:
        raise EmptyGroup(f"need at least 2 groups, got {len(groups)}")
    stat = 0.0
    for o_k, e_k in groups:
        if e_k <= 0.0:
            raise EmptyGroup(f"group expected count must be > 0, got {e_k}")
        stat += (o_k - e_k) ** 2 / e_k
    df = len(groups) - 1
    return stat, df, float(chi2_dist.sf(stat, df))


def group_of_risk(p10: float) -> str:
    for bound, label in zip(_GROUP_BOUNDS, GROUP_LABELS):
        if p10 < bound:
            return label
    return GROUP_LABELS[-1]


def assign_groups(records, mode: str = "cutpoints") -> tuple[list[str], list[str]]:
    """Per-record group labels plus ordered label list.

    ``cutpoints`` uses the fixed ten-year risk categories; ``deciles`` uses
    deciles of predicted ten-year risk within the cohort.
    """
    risks = [predicted_ten_year_risk(r) for r in records]
    if mode == "cutpoints":
        labels = [group_of_risk(p) for p in risks]
        ordered = [g for g in GROUP_LABELS if g in set(labels)]
        return labels, ordered
    if mode == "deciles":
        qs = np.quantile(risks, np.linspace(0, 1, 11)[1:-1])
        idx = np.searchsorted(qs, risks, side="right")
        labels = [f"decile-{i + 1}" for i in idx]
        ordered = [f"decile-{i + 1}" for i in range(10) if f"decile-{i + 1}" in set(labels)]
        return labels, ordered
    raise ValidationError(f"unknown grouping mode {mode!r}")


# ---------------------------------------------------------------------------
# Poisson regression calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PersonYearSegment:
    """One follow-up-year slice of a record for Poisson regression."""

    observed: int
    expected: float
    year_index: int
    covariates: dict = field(default_factory=dict)


def person_year_segments(records, group_labels=None) -> list[PersonYearSegment]:
    """Split records into follow-up-year segments with hazard-based offsets.

    Each whole year of follow-up becomes a segment (final partial year to
    the event or censoring); the expected count is the subject's cause-1
    cumulative hazard over the segment. Segments with zero expected hazard
    and no event are dropped (they carry no information).
    """
    segments = []
    for i, r in enumerate(records):
        fu = r.follow_up_years
        n_years = int(math.ceil(fu - 1e-12))
        for s in range(n_years):
            a = r.entry_age + s
            b = min(r.entry_age + s + 1.0, r.exit_age)
            expected = r.h1.cumulative(a, b)
            final = b >= r.exit_age - 1e-12
            observed = int(final and r.cause == CAUSE_BREAST_EVENT)
            if expected <= 0.0:
                if observed:
                    raise ValidationError(
                        f"subject {r.subject_id}: event in a zero-hazard segment"
                    )
                continue
            cov = {}
            if group_labels is not None:
                cov["group"] = group_labels[i]
            segments.append(
                PersonYearSegment(
                    observed=observed, expected=expected, year_index=s, covariates=cov
                )
            )
    return segments


@dataclass(frozen=True)
class PoissonFit:
    term_names: tuple[str, ...]
    coef: np.ndarray
    cov: np.ndarray
    loglik: float
    iterations: int

    def coefficient(self, name: str) -> float:
        return float(self.coef[self.term_names.index(name)])

    def se(self, name: str) -> float:
        i = self.term_names.index(name)
        return float(math.sqrt(self.cov[i, i]))

    def ci(self, name: str, level: float = 0.95) -> tuple[float, float]:
        z = float(norm_dist.ppf(0.5 + level / 2.0))
        c, s = self.coefficient(name), self.se(name)
        return c - z * s, c + z * s

    def ratio_ci(self, name: str, level: float = 0.95) -> tuple[float, float, float]:
        """exp-scale calibration coefficient with its Wald interval."""
        lo, hi = self.ci(name, level)
        return _safe_exp(self.coefficient(name)), _safe_exp(lo), _safe_exp(hi)

    def combined_ratio_ci(
        self, names, level: float = 0.95
    ) -> tuple[float, float, float]:
        """exp(sum of coefficients) with the delta-method Wald interval."""
        idx = [self.term_names.index(n) for n in names]
        total = float(sum(self.coef[i] for i in idx))
        var = float(sum(self.cov[i, j] for i in idx for j in idx))
        z = float(norm_dist.ppf(0.5 + level / 2.0))
        half = z * math.sqrt(max(var, 0.0))
        return _safe_exp(total), _safe_exp(total - half), _safe_exp(total + half)


def _safe_exp(x: float) -> float:
    return math.exp(min(x, 700.0))


def _poisson_loglik(y, mu) -> float:
    return float(np.sum(y * np.log(mu) - mu - gammaln(y + 1)))


def poisson_calibration_fit(
    segments,
    estimate_slope: bool = False,
    covariate_names: tuple[str, ...] = (),
    group_terms: tuple[str, ...] = (),
    max_iter: int = 50,
) -> PoissonFit:
    """Poisson regression of observed segment counts on model-expected counts.

    With ``estimate_slope`` the mean is exp(g0 + g1*log E); otherwise log E
    enters as a fixed offset and additional calibration terms are estimated
    for the named covariates (``year1`` and ``followup_time`` are built in;
    ``group_terms`` adds one indicator per non-reference group label).
    With the intercept alone the closed-form solution sum(O)/sum(E) is used.
    """
    segments = list(segments)
    if not segments:
        raise ValidationError("no segments to fit")
    y = np.array([s.observed for s in segments], dtype=float)
    e = np.array([s.expected for s in segments], dtype=float)
    if np.any(e <= 0.0):
        raise NonPositiveE("all segment expected counts must be > 0")
    log_e = np.log(e)

    names: list[str] = ["intercept"]
    cols: list[np.ndarray] = [np.ones(len(segments))]
    if estimate_slope:
        names.append("log_expected")
        cols.append(log_e)
        offset = np.zeros(len(segments))
    else:
        offset = log_e
    for nm in covariate_names:
        if nm == "year1":
            cols.append(np.array([1.0 if s.year_index == 0 else 0.0 for s in segments]))
        elif nm == "followup_time":
            cols.append(np.array([float(s.year_index) for s in segments]))
        else:
            cols.append(np.array([float(s.covariates[nm]) for s in segments]))
        names.append(nm)
    for g in group_terms:
        cols.append(
            np.array([1.0 if s.covariates.get("group") == g else 0.0 for s in segments])
        )
        names.append(f"group:{g}")

    x = np.column_stack(cols)
    p = x.shape[1]

    if p == 1 and not estimate_slope:
        total_o, total_e = float(y.sum()), float(e.sum())
        if total_o <= 0.0:
            raise NoConvergence("no observed events; intercept diverges")
        g0 = math.log(total_o / total_e)
        cov = np.array([[1.0 / total_o]])
        mu = np.exp(g0 + offset)
        return PoissonFit(
            term_names=("intercept",),
            coef=np.array([g0]),
            cov=cov,
            loglik=_poisson_loglik(y, mu),
            iterations=0,
        )

    beta = np.zeros(p)
    beta[0] = math.log(max(float(y.sum()), 0.5) / float(e.sum()))
    last_dev = np.inf
    for iteration in range(1, max_iter + 1):
        eta = x @ beta + offset
        mu = np.exp(eta)
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
            raise NoConvergence("diverging mean in IRLS")
        w = mu
        z = eta - offset + (y - mu) / mu
        xtw = x.T * w
        try:
            beta_new = np.linalg.solve(xtw @ x, xtw @ z)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular information matrix: {exc}") from None
        with np.errstate(divide="ignore", invalid="ignore"):
            dev_terms = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0) / mu), 0.0)
        dev = 2.0 * float(np.sum(dev_terms - (y - mu)))
        if np.max(np.abs(beta_new - beta)) < 1e-12 or abs(dev - last_dev) < 1e-12:
            beta = beta_new
            break
        beta, last_dev = beta_new, dev
    else:
        raise NoConvergence(f"IRLS did not converge in {max_iter} iterations")
    if np.max(np.abs(beta)) > 30.0:
        raise NoConvergence("separation: a calibration coefficient diverged")

    eta = x @ beta + offset
    mu = np.exp(eta)
    info = (x.T * mu) @ x
    cov = np.linalg.inv(info)
    return PoissonFit(
        term_names=tuple(names),
        coef=beta,
        cov=cov,
        loglik=_poisson_loglik(y, mu),
        iterations=iteration,
    )


def likelihood_ratio_test(full: PoissonFit, reduced: PoissonFit) -> tuple[float, int, float]:
    stat = 2.0 * (full.loglik - reduced.loglik)
    df = len(full.term_names) - len(reduced.term_names)
    if df <= 0:
        raise ValidationError("full model must have more terms than reduced model")
    return stat, df, float(chi2_dist.sf(max(stat, 0.0), df))


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

METHOD_HAZARD = "hazard"
METHOD_BIASED_SUM = "biased-sum"
METHOD_BIASED_NET = "biased-net"
BIASED_METHODS = (METHOD_BIASED_SUM, METHOD_BIASED_NET)


@dataclass(frozen=True)
class CalibrationReport:
    """O/E estimates, group table, chi-square test and regression summary."""

    observed: int
    n_subjects: int
    methods: dict
    group_mode: str | None
    group_rows: tuple[dict, ...]
    chi_sq: tuple[float, int, float] | None
    regression: dict | None
    level: float

    def to_json_dict(self) -> dict:
        return {
            "schema": "breastrisk/calibration/v1",
            "observed": self.observed,
            "n_subjects": self.n_subjects,
            "level": self.level,
            "methods": self.methods,
            "group_mode": self.group_mode,
            "groups": list(self.group_rows),
            "chi_sq": (
                None
                if self.chi_sq is None
                else {"statistic": self.chi_sq[0], "df": self.chi_sq[1], "p": self.chi_sq[2]}
            ),
            "regression": self.regression,
        }

    def to_text_table(self) -> str:
        lines = []
        lines.append(
            f"{'Term':<24}{'n':>9}{'O':>8}{'E':>11}{'O/E':>7}  O/E (95%CI) [adjusted]"
        )
        reg = self.regression or {}
        adj = reg.get("terms", {})

        def adj_cell(key):
            t = adj.get(key)
            if t is None:
                return ""
            return f"{t['ratio']:.2f} ({t['lo']:.2f}-{t['hi']:.2f})"

        hz = self.methods.get(METHOD_HAZARD)
        if hz:
            lines.append(
                f"{'Overall (intercept)':<24}{self.n_subjects:>9}{self.observed:>8}"
                f"{hz['expected']:>11.1f}{hz['ratio']:>7.2f}  {adj_cell('intercept')}"
            )
        for name, m in self.methods.items():
            if name == METHOD_HAZARD:
                continue
            flag = " [biased]" if m.get("biased") else ""
            lines.append(
                f"{name + flag:<24}{self.n_subjects:>9}{self.observed:>8}"
                f"{m['expected']:>11.1f}{m['ratio']:>7.2f}"
            )
        if "year1" in adj or "followup_time" in adj:
            lines.append("Follow-up time")
            for key, label in (("year1", "  Year 1"), ("followup_time", "  Year 2+ (time)")):
                t = adj.get(key)
                if t is None:
                    continue
                uni = t.get("univariate", {})
                lines.append(
                    f"{label:<24}{uni.get('n', ''):>9}{uni.get('observed', ''):>8}"
                    f"{uni.get('expected', float('nan')):>11.1f}"
                    f"{uni.get('ratio', float('nan')):>7.2f}  {adj_cell(key)}"
                )
        if self.group_rows:
            lines.append(f"Risk group ({self.group_mode})")
            for row in self.group_rows:
                key = f"group:{row['label']}"
                cell = adj_cell(key) if key in adj else ("1" if row.get("reference") else "")
                lines.append(
                    f"  {row['label']:<22}{row['n']:>9}{row['observed']:>8}"
                    f"{row['expected']:>11.1f}{row['ratio']:>7.2f}  {cell}"
                )
        if self.chi_sq is not None:
            stat, df, p = self.chi_sq
            lines.append(f"Group chi-square: {stat:.2f} on {df} df (p = {p:.3g})")
        if "lr_test" in reg:
            lr = reg["lr_test"]
            lines.append(
                f"Group likelihood-ratio: {lr['statistic']:.1f} on {lr['df']} df (p = {lr['p']:.3g})"
            )
        return "\n".join(lines) + "\n"


def _method_expected(records, name: str, level: float) -> dict:
    if name == METHOD_HAZARD:
        e = expected_hazard_method(records)
        biased = False
    elif name == METHOD_BIASED_SUM:
        e = biased_sum_to_event(records)
        biased = True
    elif name == METHOD_BIASED_NET:
        e = biased_net_risk(records)
        biased = True
    elif name.startswith("cif-fixed:"):
        e = expected_cif_fixed(records, float(name.split(":", 1)[1]))
        biased = False
    elif name == "cif-deterministic":
        e = expected_cif_deterministic(records)
        biased = False
    elif name == "cif-stochastic":
        e = expected_cif_stochastic(records)
        biased = False
    else:
        raise ValidationError(f"unknown expected-count method {name!r}")
    o = observed_count(records)
    out = {"expected": e, "biased": biased}
    if e > 0:
        ci = oe_ratio_with_ci(o, e, level)
        out.update({"ratio": ci.ratio, "lo": ci.lo, "hi": ci.hi, "covers_unity": ci.covers_unity})
    return out


def calibrate(
    records,
    methods: tuple[str, ...] = (METHOD_HAZARD,),
    group_mode: str | None = "cutpoints",
    include_regression: bool = True,
    level: float = 0.95,
) -> CalibrationReport:
    """Run the full calibration analysis over a cohort of records."""
    records = list(records)
    if not records:
        raise ValidationError("empty cohort")
    observed = observed_count(records)
    method_results = {name: _method_expected(records, name, level) for name in methods}

    group_rows: list[dict] = []
    chi = None
    labels = None
    ordered: list[str] = []
    reference_label = None
    if group_mode is not None:
        labels, ordered = assign_groups(records, group_mode)
        reference_label = GROUP_REFERENCE if GROUP_REFERENCE in ordered else (
            ordered[0] if ordered else None
        )
        for g in ordered:
            sub = [r for i, r in enumerate(records) if labels[i] == g]
            e_k = expected_hazard_method(sub)
            o_k = observed_count(sub)
            group_rows.append(
                {
                    "label": g,
                    "n": len(sub),
                    "observed": o_k,
                    "expected": e_k,
                    "ratio": (o_k / e_k) if e_k > 0 else float("nan"),
                    "reference": g == reference_label,
                }
            )
        positive = [(row["observed"], row["expected"]) for row in group_rows if row["expected"] > 0]
        if len(positive) >= 2:
            chi = group_chi_sq(positive)

    regression = None
    if include_regression:
        segments = person_year_segments(records, group_labels=labels)
        # groups with no observed events would separate the fit; they keep
        # their univariate row but get no adjusted coefficient
        fittable = {row["label"] for row in group_rows if row["observed"] > 0}
        group_terms = (
            tuple(g for g in ordered if g != reference_label and g in fittable)
            if labels
            else ()
        )
        covs = ("year1", "followup_time")
        full = poisson_calibration_fit(segments, covariate_names=covs, group_terms=group_terms)
        terms: dict[str, dict] = {}
        for nm in full.term_names:
            ratio, lo, hi = full.ratio_ci(nm, level)
            terms[nm] = {"ratio": ratio, "lo": lo, "hi": hi, "coefficient": full.coefficient(nm)}
            if nm.startswith("group:"):
                overall, olo, ohi = full.combined_ratio_ci(["intercept", nm], level)
                terms[nm]["including_intercept"] = {"ratio": overall, "lo": olo, "hi": ohi}
        year1_segments = [s for s in segments if s.year_index == 0]
        later_segments = [s for s in segments if s.year_index > 0]
        for key, segs in (("year1", year1_segments), ("followup_time", later_segments)):
            if key in terms:
                o = sum(s.observed for s in segs)
                e = sum(s.expected for s in segs)
                terms[key]["univariate"] = {
                    "n": len({id(s) for s in segs}),
                    "observed": o,
                    "expected": e,
                    "ratio": (o / e) if e > 0 else float("nan"),
                }
        regression = {"terms": terms, "iterations": full.iterations}
        if group_terms:
            reduced = poisson_calibration_fit(segments, covariate_names=covs)
            stat, df, p = likelihood_ratio_test(full, reduced)
            regression["lr_test"] = {"statistic": stat, "df": df, "p": p}

    return CalibrationReport(
        observed=observed,
        n_subjects=len(records),
        methods=method_results,
        group_mode=group_mode,
        group_rows=tuple(group_rows),
        chi_sq=chi,
        regression=regression,
        level=level,
    )
