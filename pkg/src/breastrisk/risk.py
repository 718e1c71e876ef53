"""Absolute risk: combine the genetic hazard with the relative hazard and
integrate against competing mortality in closed form.

All hazards are piecewise-constant, so the cumulative incidence integral is
a finite sum of exact band terms; numeric quadrature appears only in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, ValidationError
from .factors import (
    AssessmentContext,
    DensitySurface,
    FactorTable,
    RelativeHazard,
    RiskProfile,
    combined_relative_hazard,
)
from .pedigree import (
    GenotypePosterior,
    Pedigree,
    SegregationModel,
    genotype_posterior,
    mixture_band_table,
)
from .rates import MODEL_AGE_HI, MODEL_AGE_LO, RateTable

RISK_CATEGORIES = ("<2%", "2-3%", "3-5%", "5-8%", ">=8%")
_CATEGORY_BOUNDS = (0.02, 0.03, 0.05, 0.08)

HAZARD_BASIS_FAMILY = "family_combined"
HAZARD_BASIS_INTERMEDIATE = "population_intermediate"


def risk_category(ten_year_risk: float) -> str:
    for bound, label in zip(_CATEGORY_BOUNDS, RISK_CATEGORIES):
        if ten_year_risk < bound:
            return label
    return RISK_CATEGORIES[-1]


def _phi(x: float) -> float:
    """(1 - exp(-x)) / x, stable near zero."""
    if x < 1e-12:
        return 1.0 - 0.5 * x
    return -math.expm1(-x) / x


def _merged_edges(h1: RateTable, h2: RateTable, lo: float, hi: float) -> np.ndarray:
    edges = np.concatenate([h1._edges, h2._edges, [lo, hi]])
    edges = np.unique(edges)
    return edges[(edges > lo) & (edges < hi)]


def competing_absolute_risk(h1: RateTable, h2: RateTable, lo: float, hi: float) -> float:
    """P(first event is cause 1 in (lo, hi]) given event-free at ``lo``."""
    if hi < lo:
        raise OutOfRange(f"horizon {hi} before start {lo}")
    if hi == lo:
        return 0.0
    edges = np.concatenate([[lo], _merged_edges(h1, h2, lo, hi), [hi]])
    prob = 0.0
    log_s = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        r1, r2 = h1.rate_at(a), h2.rate_at(a)
        width = b - a
        total = (r1 + r2) * width
        prob += math.exp(log_s) * r1 * width * _phi(total)
        log_s -= total
    return prob


def competing_risk_curve(
    h1: RateTable, h2: RateTable, lo: float, points
) -> np.ndarray:
    """P(lo, p) for each ascending evaluation point ``p`` (single sweep)."""
    points = np.asarray(points, dtype=float)
    if np.any(np.diff(points) < 0) or (len(points) and points[0] < lo):
        raise OutOfRange("evaluation points must ascend from the start age")
    out = np.empty(len(points))
    prob, log_s, cursor = 0.0, 0.0, lo
    hi = float(points[-1]) if len(points) else lo
    edges = np.concatenate([[lo], _merged_edges(h1, h2, lo, hi), [hi]]) if hi > lo else np.array([lo])
    eval_i = 0
    for a, b in zip(edges[:-1], edges[1:]):
        while eval_i < len(points) and points[eval_i] <= a + 1e-15:
            out[eval_i] = prob
            eval_i += 1
        r1, r2 = h1.rate_at(a), h2.rate_at(a)
        while eval_i < len(points) and points[eval_i] < b - 1e-15:
            t = points[eval_i]
            w = t - a
            total = (r1 + r2) * w
            out[eval_i] = prob + math.exp(log_s) * r1 * w * _phi(total)
            eval_i += 1
        width = b - a
        total = (r1 + r2) * width
        prob += math.exp(log_s) * r1 * width * _phi(total)
        log_s -= total
        cursor = b
    while eval_i < len(points):
        out[eval_i] = prob
        eval_i += 1
    return out


@dataclass(frozen=True)
class ConditionalHazard:
    """Resolved cause-1 hazard for a subject, with max-rule diagnostics."""

    table: RateTable
    basis: str  # family_combined | population_intermediate
    relative_hazard: RelativeHazard
    posterior: GenotypePosterior
    max_rule: dict | None


def build_conditional_hazard(
    ped: Pedigree,
    profile: RiskProfile,
    seg_model: SegregationModel,
    mortality: RateTable,
    t0: float,
    factor_table: FactorTable | None = None,
    surface: DensitySurface | None = None,
) -> ConditionalHazard:
    """Resolve h1(t|x) from t0 to 85, applying the intermediate-endpoint rule.

    With atypical hyperplasia or LCIS the ten-year risks of the two hazard
    variants (intermediate ratio on the population hazard vs family hazard
    with all other factors) are compared at t0 and the larger one is used
    for every horizon.
    """
    if not (MODEL_AGE_LO <= t0 < MODEL_AGE_HI):
        raise OutOfRange(f"t0={t0} outside [{MODEL_AGE_LO}, {MODEL_AGE_HI})")
    if ped.proband.breast_age is not None:
        raise ValidationError("cannot assess a proband with a prior breast cancer")
    if t0 < ped.proband.censor_age - 1e-9:
        raise OutOfRange(
            f"t0={t0} before proband history age {ped.proband.censor_age}"
        )
    context = AssessmentContext(age=t0, postmenopausal=profile.postmenopausal)
    rel = combined_relative_hazard(profile, context, factor_table, surface)
    post = genotype_posterior(ped, seg_model)
    family_table = mixture_band_table(post, seg_model, t0).scaled(rel.value)
    if not rel.max_rule_pending:
        return ConditionalHazard(family_table, HAZARD_BASIS_FAMILY, rel, post, None)

    intermediate_table = seg_model.incidence.scaled(rel.intermediate_factor)
    horizon = min(t0 + 10.0, MODEL_AGE_HI)
    p_family = competing_absolute_risk(family_table, mortality, t0, horizon)
    p_intermediate = competing_absolute_risk(intermediate_table, mortality, t0, horizon)
    use_intermediate = p_intermediate > p_family
    detail = {
        "ten_year_family_combined": p_family,
        "ten_year_population_intermediate": p_intermediate,
        "selected": HAZARD_BASIS_INTERMEDIATE if use_intermediate else HAZARD_BASIS_FAMILY,
    }
    if use_intermediate:
        return ConditionalHazard(
            intermediate_table, HAZARD_BASIS_INTERMEDIATE, rel, post, detail
        )
    return ConditionalHazard(family_table, HAZARD_BASIS_FAMILY, rel, post, detail)


def conditional_hazard(
    ped: Pedigree,
    profile: RiskProfile,
    seg_model: SegregationModel,
    mortality: RateTable,
    t0: float,
    t: float,
    factor_table: FactorTable | None = None,
    surface: DensitySurface | None = None,
) -> float:
    """Pointwise h1(t | x) after max-rule resolution at t0."""
    resolved = build_conditional_hazard(
        ped, profile, seg_model, mortality, t0, factor_table, surface
    )
    return resolved.table.rate_at(min(t, MODEL_AGE_HI - 1e-9))


def absolute_risk(
    ped: Pedigree,
    profile: RiskProfile,
    seg_model: SegregationModel,
    mortality: RateTable,
    t0: float,
    t: float,
    factor_table: FactorTable | None = None,
    surface: DensitySurface | None = None,
) -> float:
    """P(breast cancer in (t0, t] | risk factors, event-free at t0)."""
    if not (MODEL_AGE_LO <= t0 < t <= MODEL_AGE_HI):
        raise OutOfRange(f"need 20 <= t0 < t <= 85, got ({t0}, {t})")
    resolved = build_conditional_hazard(
        ped, profile, seg_model, mortality, t0, factor_table, surface
    )
    return competing_absolute_risk(resolved.table, mortality, t0, t)


@dataclass(frozen=True)
class RiskAssessment:
    """Full assessment output: risks, category, curve, audit trail."""

    t0: float
    ten_year_risk: float
    lifetime_risk: float
    risk_category: str
    hazard_basis: str
    relative_hazard: RelativeHazard
    posterior: GenotypePosterior
    hazard_bands: tuple[tuple[float, float, float], ...]
    curve_ages: tuple[float, ...]
    curve_risks: tuple[float, ...]
    max_rule: dict | None
    params_version: str

    def to_json_dict(self) -> dict:
        return {
            "schema": "breastrisk/assessment/v1",
            "params_version": self.params_version,
            "t0": self.t0,
            "ten_year_risk": self.ten_year_risk,
            "lifetime_risk": self.lifetime_risk,
            "risk_category": self.risk_category,
            "hazard_basis": self.hazard_basis,
            "relative_hazard": {
                "value": self.relative_hazard.value,
                "factors": self.relative_hazard.audit(),
                "max_rule_pending": self.relative_hazard.max_rule_pending,
                "intermediate_factor": self.relative_hazard.intermediate_factor,
            },
            "max_rule": self.max_rule,
            "genotype_posterior": self.posterior.as_dict(),
            "hazard_curve": [
                {"age_lo": lo, "age_hi": hi, "rate": r} for lo, hi, r in self.hazard_bands
            ],
            "risk_curve": [
                {"age": a, "risk": r} for a, r in zip(self.curve_ages, self.curve_risks)
            ],
        }


def assess(
    ped: Pedigree,
    profile: RiskProfile,
    seg_model: SegregationModel,
    mortality: RateTable,
    t0: float,
    factor_table: FactorTable | None = None,
    surface: DensitySurface | None = None,
    params_version: str = "default",
) -> RiskAssessment:
    """Deterministic end-to-end assessment at current age ``t0``."""
    if not (MODEL_AGE_LO <= t0 < MODEL_AGE_HI):
        raise OutOfRange(f"t0={t0} outside [{MODEL_AGE_LO}, {MODEL_AGE_HI})")
    resolved = build_conditional_hazard(
        ped, profile, seg_model, mortality, t0, factor_table, surface
    )
    ages = [t0] + [float(a) for a in range(int(math.floor(t0)) + 1, int(MODEL_AGE_HI) + 1)]
    ages = [a for a in ages if a <= MODEL_AGE_HI]
    curve = competing_risk_curve(resolved.table, mortality, t0, ages)
    horizon = min(t0 + 10.0, MODEL_AGE_HI)
    ten_year = competing_absolute_risk(resolved.table, mortality, t0, horizon)
    lifetime = float(curve[-1])
    return RiskAssessment(
        t0=t0,
        ten_year_risk=ten_year,
        lifetime_risk=lifetime,
        risk_category=risk_category(ten_year),
        hazard_basis=resolved.basis,
        relative_hazard=resolved.relative_hazard,
        posterior=resolved.posterior,
        hazard_bands=resolved.table.bands,
        curve_ages=tuple(ages),
        curve_risks=tuple(float(v) for v in curve),
        max_rule=resolved.max_rule,
        params_version=params_version,
    )
