"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field


class SnpModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    risk_allele_freq: float
    per_allele_or: float
    genotype: int | None = None


class ProfileModel(BaseModel):
    """Flat risk-factor fields; null means unknown."""

    model_config = ConfigDict(extra="forbid")

    menarche_age: float | None = None
    parity: float | Literal["nulliparous"] | None = None
    menopause_status: Literal["pre", "post"] | None = None
    menopause_age: float | None = None
    height_m: float | None = None
    bmi: float | None = None
    hrt_status: Literal["never", "current", "past"] | None = None
    hrt_type: Literal["estrogen_only", "combined"] | None = None
    hrt_years: float | None = None
    benign_disease: str = "none_known"
    density_measure: Literal["visual_percent", "birads", "volumetric_percent"] | None = None
    density_value: float | None = None
    density_age: float | None = None
    density_bmi: float | None = None
    snps: list[SnpModel] = Field(default_factory=list)


class PedigreeMemberModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    sex: Literal["F", "M"]
    mother_id: str | None = None
    father_id: str | None = None
    breast_age: float | None = None
    ovarian_age: float | None = None
    censor_age: float = 0.0
    brca_test: Literal["untested", "negative", "brca1", "brca2"] = "untested"


class AssessRequest(BaseModel):
    """The first pedigree member is the proband (the assessed woman)."""

    model_config = ConfigDict(extra="forbid")

    profile: ProfileModel = Field(default_factory=ProfileModel)
    pedigree: list[PedigreeMemberModel] = Field(min_length=1)
    current_age: float
    horizons: list[float] = Field(default_factory=lambda: [10.0])


class FactorAudit(BaseModel):
    factor: str
    multiplier: float


class RelativeHazardOut(BaseModel):
    value: float
    factors: list[FactorAudit]
    max_rule_pending: bool
    intermediate_factor: float | None


class PosteriorCell(BaseModel):
    c1: int
    c2: int
    weight: float


class HazardBand(BaseModel):
    age_lo: float
    age_hi: float
    rate: float


class CurvePoint(BaseModel):
    age: float
    risk: float


class AssessmentOut(BaseModel):
    """Mirrors the CLI assessment JSON field-for-field."""

    model_config = ConfigDict(populate_by_name=True)

    schema_: str = Field(alias="schema")
    params_version: str
    t0: float
    ten_year_risk: float
    lifetime_risk: float
    risk_category: str
    hazard_basis: str
    relative_hazard: RelativeHazardOut
    max_rule: dict[str, Any] | None
    genotype_posterior: list[PosteriorCell]
    hazard_curve: list[HazardBand]
    risk_curve: list[CurvePoint]


class HorizonRisk(BaseModel):
    horizon: float
    age: float
    risk: float


class AssessResponse(BaseModel):
    assessment: AssessmentOut
    horizon_risks: list[HorizonRisk]
    params_version: str


class WhatIfDelta(BaseModel):
    model_config = ConfigDict(extra="forbid")

    field: str
    value: Any = None


class WhatIfRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base: AssessRequest
    deltas: list[WhatIfDelta] = Field(default_factory=list)


class CategoryTransition(BaseModel):
    before: str
    after: str
    changed: bool


class WhatIfItem(BaseModel):
    delta: WhatIfDelta
    response: AssessResponse
    category_transition: CategoryTransition


class WhatIfResponse(BaseModel):
    base: AssessResponse
    items: list[WhatIfItem]
    params_version: str


class HealthResponse(BaseModel):
    status: str
    params_version: str
    api_version: str
