"""Relative hazard from personal, hormonal, benign-disease, imaging and
polygenic risk factors.

Each factor contributes a hazard ratio normalised by its population mean
risk, so an all-unknown profile has relative hazard exactly 1. Atypical
hyperplasia and LCIS are intermediate endpoints: their ratio is reported
but not multiplied in; the risk layer compares the two hazard variants by
ten-year risk and keeps the larger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SurfaceOutOfRange, ValidationError

BENIGN_NONE = "none_known"
BENIGN_NON_PROLIFERATIVE = "non_proliferative"
BENIGN_UNKNOWN_BIOPSY = "unknown_biopsy"
BENIGN_PROLIFERATIVE = "proliferative_usual"
BENIGN_ATYPICAL_HYPERPLASIA = "atypical_hyperplasia"
BENIGN_LCIS = "lcis"
BENIGN_STATES = (
    BENIGN_NONE,
    BENIGN_NON_PROLIFERATIVE,
    BENIGN_UNKNOWN_BIOPSY,
    BENIGN_PROLIFERATIVE,
    BENIGN_ATYPICAL_HYPERPLASIA,
    BENIGN_LCIS,
)
BENIGN_INTERMEDIATE = (BENIGN_ATYPICAL_HYPERPLASIA, BENIGN_LCIS)

HRT_NEVER = "never"
HRT_CURRENT = "current"
HRT_PAST = "past"
HRT_ESTROGEN = "estrogen_only"
HRT_COMBINED = "combined"

DENSITY_VISUAL = "visual_percent"
DENSITY_BIRADS = "birads"
DENSITY_VOLUMETRIC = "volumetric_percent"
_DENSITY_MEASURES = (DENSITY_VISUAL, DENSITY_BIRADS, DENSITY_VOLUMETRIC)

PARITY_NULLIPAROUS = "nulliparous"

FACTOR_IDS = (
    "menarche",
    "parity",
    "menopause_age",
    "height",
    "bmi",
    "hrt",
    "benign",
    "density",
    "snps",
)


@dataclass(frozen=True)
class Snp:
    risk_allele_freq: float
    per_allele_or: float
    genotype: int | None  # risk-allele count, None = not genotyped

    def __post_init__(self) -> None:
        if not (0.0 < self.risk_allele_freq < 1.0):
            raise ValidationError(f"risk allele frequency {self.risk_allele_freq} not in (0,1)")
        if self.per_allele_or <= 0.0:
            raise ValidationError(f"per-allele odds ratio {self.per_allele_or} must be > 0")
        if self.genotype is not None and self.genotype not in (0, 1, 2):
            raise ValidationError(f"genotype must be 0, 1, 2 or missing, got {self.genotype}")


@dataclass(frozen=True)
class RiskProfile:
    """Risk-factor inputs; ``None`` means unknown (factor contributes 1)."""

    menarche_age: float | None = None
    parity: float | str | None = None  # "nulliparous", first-birth age, or unknown
    menopause_status: str | None = None  # "pre" | "post"
    menopause_age: float | None = None
    height_m: float | None = None
    bmi: float | None = None
    hrt_status: str | None = None  # "never" | "current" | "past"
    hrt_type: str | None = None  # "estrogen_only" | "combined"
    hrt_years: float | None = None  # ordinal years of use / since stopping
    benign_disease: str = BENIGN_NONE
    density_measure: str | None = None
    density_value: float | None = None
    density_age: float | None = None
    density_bmi: float | None = None
    snps: tuple[Snp, ...] = ()

    def __post_init__(self) -> None:
        if isinstance(self.parity, str) and self.parity != PARITY_NULLIPAROUS:
            raise ValidationError(f"parity must be a first-birth age or {PARITY_NULLIPAROUS!r}")
        if self.menopause_status not in (None, "pre", "post"):
            raise ValidationError(f"menopause status {self.menopause_status!r} unknown")
        if self.menopause_age is not None and self.menopause_status != "post":
            raise ValidationError("menopause age given without post-menopausal status")
        first_birth = self.parity if isinstance(self.parity, (int, float)) else None
        if self.menarche_age is not None and first_birth is not None:
            if not self.menarche_age < first_birth:
                raise ValidationError("menarche age must precede first birth")
        if first_birth is not None and self.menopause_age is not None:
            if not first_birth < self.menopause_age:
                raise ValidationError("first birth must precede menopause")
        if self.menarche_age is not None and self.menopause_age is not None:
            if not self.menarche_age < self.menopause_age:
                raise ValidationError("menarche must precede menopause")
        for label, v in (("bmi", self.bmi), ("bmi at mammogram", self.density_bmi)):
            if v is not None and not (10.0 <= v <= 80.0):
                raise ValidationError(f"{label} {v} outside [10, 80]")
        if self.hrt_status not in (None, HRT_NEVER, HRT_CURRENT, HRT_PAST):
            raise ValidationError(f"hrt status {self.hrt_status!r} unknown")
        if self.hrt_status in (HRT_CURRENT, HRT_PAST):
            if self.hrt_type not in (HRT_ESTROGEN, HRT_COMBINED):
                raise ValidationError("current/past hormone therapy requires a type")
            if self.hrt_years is None or self.hrt_years < 0:
                raise ValidationError("current/past hormone therapy requires elapsed years")
        if self.benign_disease not in BENIGN_STATES:
            raise ValidationError(f"benign disease state {self.benign_disease!r} unknown")
        if self.density_measure is not None:
            if self.density_measure not in _DENSITY_MEASURES:
                raise ValidationError(f"density measure {self.density_measure!r} unknown")
            if self.density_value is None or self.density_age is None:
                raise ValidationError("density input requires value and age at mammogram")
            if self.density_measure == DENSITY_BIRADS:
                if self.density_value not in (1, 2, 3, 4):
                    raise ValidationError("BI-RADS category must be 1..4")
            elif not (0.0 <= self.density_value <= 100.0):
                raise ValidationError(f"density percent {self.density_value} outside [0, 100]")

    @property
    def postmenopausal(self) -> bool:
        return self.menopause_status == "post"


@dataclass(frozen=True)
class AssessmentContext:
    age: float
    postmenopausal: bool


# ---------------------------------------------------------------------------
# Parameter table
# ---------------------------------------------------------------------------

_DEFAULT_TABLE = {
    "version": "factors-v1",
    "menarche": {
        "bands": [[-1e9, 11, 1.16], [11, 12, 1.07], [12, 13, 1.07], [13, 14, 1.0],
                  [14, 15, 0.98], [15, 16, 0.93], [16, 17, 0.88], [17, 1e9, 0.81]],
        "mean_risk": 1.0,
    },
    "parity": {
        "nulliparous": 1.0,
        "bands": [[-1e9, 20, 0.74], [20, 25, 0.77], [25, 30, 0.87],
                  [30, 35, 1.01], [35, 1e9, 1.11]],
        "mean_risk": 1.0,
    },
    "menopause_age": {
        "step_hazard_ratio": 1.14, "reference_lo": 45.0, "band_years": 5.0,
        "mean_risk": 1.08,
    },
    "height": {
        "low": 1.0, "knot_lo": 1.6, "knot_hi": 1.7, "slope_base": 1.05,
        "slope": 2.0, "high": 1.24, "mean_risk": 1.1,
    },
    "bmi": {
        "bands": [[-1e9, 21, 1.0], [21, 23, 1.14], [23, 25, 1.15],
                  [25, 27, 1.26], [27, 1e9, 1.32]],
        "mean_risk": 1.24,
    },
    "hrt": {
        "max_combined": 2.0, "max_estrogen": 1.4, "mean_risk": 1.0,
        "bmi_low_cut": 25.0, "bmi_high_cut": 30.0, "bmi_excess_share": 0.1,
    },
    "benign": {
        BENIGN_NONE: 1.0, BENIGN_NON_PROLIFERATIVE: 1.0, BENIGN_UNKNOWN_BIOPSY: 1.3,
        BENIGN_PROLIFERATIVE: 2.0, BENIGN_ATYPICAL_HYPERPLASIA: 4.0, BENIGN_LCIS: 8.0,
        "mean_risk": 1.0,
    },
    "density": {"per_sd": 1.4, "min_age": 40.0, "mean_risk": 1.0},
}


@dataclass(frozen=True)
class FactorTable:
    """Versioned per-factor hazard ratios and mean-risk normalisers."""

    config: dict = field(default_factory=lambda: _DEFAULT_TABLE)

    @property
    def version(self) -> str:
        return self.config.get("version", "unversioned")

    def section(self, name: str) -> dict:
        return self.config[name]

    @classmethod
    def default(cls) -> "FactorTable":
        return cls()

    @classmethod
    def from_config(cls, config: dict) -> "FactorTable":
        merged = {**_DEFAULT_TABLE, **config}
        return cls(config=merged)


def _band_lookup(bands, value: float) -> float:
    for lo, hi, ratio in bands:
        if lo <= value < hi:
            return float(ratio)
    raise ValidationError(f"value {value} not covered by factor bands")


@dataclass(frozen=True)
class DensitySurface:
    """Expected-density reference: per-measure (age, BMI) grids plus SDs.

    ``measures`` maps measure name to dict with ``ages``, ``bmis``,
    ``expected`` (2d list, rows = ages) and ``sd``. ``birads_z`` maps the
    four categories straight to standardised residuals.
    """

    measures: dict
    birads_z: dict
    version: str = "density-v1"

    @classmethod
    def default(cls) -> "DensitySurface":
        ages = [40.0 + 5 * i for i in range(10)]
        bmis = [15.0 + 5 * i for i in range(7)]

        def grid(base, age_slope, bmi_slope, lo, hi):
            return [
                [min(hi, max(lo, base - age_slope * (a - 40) - bmi_slope * (b - 25)))
                 for b in bmis]
                for a in ages
            ]

        return cls(
            measures={
                DENSITY_VISUAL: {
                    "ages": ages, "bmis": bmis, "sd": 14.0,
                    "expected": grid(35.0, 0.4, 1.0, 2.0, 80.0),
                },
                DENSITY_VOLUMETRIC: {
                    "ages": ages, "bmis": bmis, "sd": 5.5,
                    "expected": grid(12.0, 0.15, 0.4, 3.0, 35.0),
                },
            },
            birads_z={1: -1.5, 2: -0.5, 3: 0.5, 4: 1.5},
        )

    def expected(self, measure: str, age: float, bmi: float) -> float:
        spec = self.measures[measure]
        ages = np.asarray(spec["ages"], dtype=float)
        bmis = np.asarray(spec["bmis"], dtype=float)
        grid = np.asarray(spec["expected"], dtype=float)
        if not (ages[0] - 1e-9 <= age <= ages[-1] + 1e-9):
            raise SurfaceOutOfRange(f"age {age} outside surface [{ages[0]}, {ages[-1]}]")
        if not (bmis[0] - 1e-9 <= bmi <= bmis[-1] + 1e-9):
            raise SurfaceOutOfRange(f"bmi {bmi} outside surface [{bmis[0]}, {bmis[-1]}]")
        i = min(int(np.searchsorted(ages, age, side="right")) - 1, len(ages) - 2)
        j = min(int(np.searchsorted(bmis, bmi, side="right")) - 1, len(bmis) - 2)
        i, j = max(i, 0), max(j, 0)
        ta = (age - ages[i]) / (ages[i + 1] - ages[i])
        tb = (bmi - bmis[j]) / (bmis[j + 1] - bmis[j])
        return float(
            grid[i, j] * (1 - ta) * (1 - tb)
            + grid[i + 1, j] * ta * (1 - tb)
            + grid[i, j + 1] * (1 - ta) * tb
            + grid[i + 1, j + 1] * ta * tb
        )

    def sd(self, measure: str) -> float:
        return float(self.measures[measure]["sd"])


# ---------------------------------------------------------------------------
# Per-factor operations
# ---------------------------------------------------------------------------


def hrt_relative_hazard(
    status: str | None,
    hrt_type: str | None,
    years: float | None,
    bmi: float | None,
    table: FactorTable | None = None,
) -> float:
    """Hormone-therapy ratio on the ramp schedule, with the BMI interaction.

    ``years`` is the ordinal year of use (current) or since stopping (past);
    fractional values count as the year in progress. BMI shifts the ratio by
    10% of the maximum excess, only while there is an excess.
    """
    table = table or FactorTable.default()
    cfg = table.section("hrt")
    if status in (None, HRT_NEVER):
        return 1.0
    max_rh = cfg["max_combined"] if hrt_type == HRT_COMBINED else cfg["max_estrogen"]
    excess = max_rh - 1.0
    year = max(1, math.ceil(years))
    if status == HRT_CURRENT:
        if year == 1:
            value = 1.0
        elif year == 2:
            value = 1.0 + 0.5 * excess
        else:
            value = max_rh
    else:
        if year == 1:
            value = 1.0 + (2.0 / 3.0) * excess
        elif year == 2:
            value = 1.0 + (1.0 / 3.0) * excess
        else:
            value = 1.0
    if value > 1.0 and bmi is not None:
        share = cfg["bmi_excess_share"] * excess
        if bmi >= cfg["bmi_high_cut"]:
            value -= share
        elif bmi < cfg["bmi_low_cut"]:
            value += share
    return value


def benign_relative_hazard(state: str, table: FactorTable | None = None) -> float:
    table = table or FactorTable.default()
    cfg = table.section("benign")
    if state not in BENIGN_STATES:
        raise ValidationError(f"benign state {state!r} unknown")
    return float(cfg[state])


def density_relative_hazard(
    profile: RiskProfile,
    surface: DensitySurface | None = None,
    table: FactorTable | None = None,
) -> float:
    """per-SD ratio raised to the standardised density residual.

    Returns 1 when density is absent, mammogram age is below the supported
    minimum, or (for the percent measures) no BMI is available to evaluate
    the expected surface.
    """
    table = table or FactorTable.default()
    surface = surface or DensitySurface.default()
    cfg = table.section("density")
    if profile.density_measure is None:
        return 1.0
    if profile.density_age is None or profile.density_age < cfg["min_age"]:
        return 1.0
    if profile.density_measure == DENSITY_BIRADS:
        residual = float(surface.birads_z[int(profile.density_value)])
    else:
        bmi = profile.density_bmi if profile.density_bmi is not None else profile.bmi
        if bmi is None:
            return 1.0
        expected = surface.expected(profile.density_measure, profile.density_age, bmi)
        residual = (profile.density_value - expected) / surface.sd(profile.density_measure)
    return float(cfg["per_sd"] ** residual)


def polygenic_relative_risk(snps) -> float:
    """Product of Hardy-Weinberg-normalised genotype odds ratios.

    Each variant's genotype ratios (1, or, or^2) are divided by their
    population mean under Hardy-Weinberg frequencies, so the population
    mean contribution of every variant is exactly 1. Missing genotypes
    contribute 1; an empty list gives 1.
    """
    result = 1.0
    for snp in snps:
        if snp.genotype is None:
            continue
        p, oratio = snp.risk_allele_freq, snp.per_allele_or
        ors = (1.0, oratio, oratio * oratio)
        mean = (1 - p) ** 2 + 2 * p * (1 - p) * oratio + p * p * oratio * oratio
        result *= ors[snp.genotype] / mean
    return result


def factor_relative_hazard(
    profile: RiskProfile,
    factor_id: str,
    context: AssessmentContext,
    table: FactorTable | None = None,
    surface: DensitySurface | None = None,
) -> float:
    """Normalised ratio for one factor; exactly 1 when the factor is unknown."""
    table = table or FactorTable.default()
    if factor_id == "menarche":
        if profile.menarche_age is None:
            return 1.0
        cfg = table.section("menarche")
        return _band_lookup(cfg["bands"], profile.menarche_age) / cfg["mean_risk"]
    if factor_id == "parity":
        if profile.parity is None:
            return 1.0
        cfg = table.section("parity")
        if profile.parity == PARITY_NULLIPAROUS:
            return cfg["nulliparous"] / cfg["mean_risk"]
        return _band_lookup(cfg["bands"], float(profile.parity)) / cfg["mean_risk"]
    if factor_id == "menopause_age":
        if not context.postmenopausal or profile.menopause_age is None:
            return 1.0
        cfg = table.section("menopause_age")
        steps = math.floor((profile.menopause_age - cfg["reference_lo"]) / cfg["band_years"])
        return cfg["step_hazard_ratio"] ** steps / cfg["mean_risk"]
    if factor_id == "height":
        if profile.height_m is None:
            return 1.0
        cfg = table.section("height")
        h = profile.height_m
        if h < cfg["knot_lo"]:
            ratio = cfg["low"]
        elif h < cfg["knot_hi"]:
            ratio = cfg["slope_base"] + cfg["slope"] * (h - cfg["knot_lo"])
        else:
            ratio = cfg["high"]
        return ratio / cfg["mean_risk"]
    if factor_id == "bmi":
        # Post-menopausal factor only; premenopausal or unknown BMI is neutral.
        if not context.postmenopausal or profile.bmi is None:
            return 1.0
        cfg = table.section("bmi")
        return _band_lookup(cfg["bands"], profile.bmi) / cfg["mean_risk"]
    if factor_id == "hrt":
        cfg = table.section("hrt")
        value = hrt_relative_hazard(
            profile.hrt_status, profile.hrt_type, profile.hrt_years, profile.bmi, table
        )
        return value / cfg["mean_risk"]
    if factor_id == "benign":
        cfg = table.section("benign")
        return benign_relative_hazard(profile.benign_disease, table) / cfg["mean_risk"]
    if factor_id == "density":
        return density_relative_hazard(profile, surface, table)
    if factor_id == "snps":
        return polygenic_relative_risk(profile.snps)
    raise ValidationError(f"unknown factor id {factor_id!r}")


@dataclass(frozen=True)
class RelativeHazard:
    """Combined normalised relative hazard with a per-factor audit trail.

    When the benign state is an intermediate endpoint (atypical hyperplasia
    or LCIS) its ratio is excluded from ``value`` and reported separately;
    ``max_rule_pending`` tells the risk layer to resolve the two variants.
    """

    value: float
    contributions: tuple[tuple[str, float], ...]
    max_rule_pending: bool
    intermediate_factor: float | None

    def audit(self) -> list[dict]:
        return [{"factor": name, "multiplier": m} for name, m in self.contributions]


def combined_relative_hazard(
    profile: RiskProfile,
    context: AssessmentContext,
    table: FactorTable | None = None,
    surface: DensitySurface | None = None,
) -> RelativeHazard:
    """Product of all normalised per-factor ratios with audit trail."""
    table = table or FactorTable.default()
    pending = profile.benign_disease in BENIGN_INTERMEDIATE
    contributions = []
    value = 1.0
    for factor_id in FACTOR_IDS:
        if factor_id == "benign" and pending:
            continue
        m = factor_relative_hazard(profile, factor_id, context, table, surface)
        contributions.append((factor_id, m))
        value *= m
    intermediate = (
        benign_relative_hazard(profile.benign_disease, table) if pending else None
    )
    return RelativeHazard(
        value=value,
        contributions=tuple(contributions),
        max_rule_pending=pending,
        intermediate_factor=intermediate,
    )
