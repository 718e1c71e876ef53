"""Stateless HTTP service around the assessment engine.

No request mutates server state; the model tables are immutable and shared
across workers. Schema violations return 400 with the offending field
path; domain violations (pedigree loops, invalid ages, unknown what-if
fields) return 422.
"""

from __future__ import annotations

from pathlib import Path

import pydantic
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..errors import BreastRiskError
from ..factors import RiskProfile
from ..io import profile_from_json_dict
from ..params import ModelResources, load_resources
from ..pedigree import Pedigree, PedigreeMember
from ..rates import MODEL_AGE_HI, RateTable
from ..risk import assess, competing_absolute_risk
from .schemas import (
    AssessmentOut,
    AssessRequest,
    AssessResponse,
    CategoryTransition,
    HealthResponse,
    HorizonRisk,
    WhatIfItem,
    WhatIfRequest,
    WhatIfResponse,
)

API_VERSION = "v1"

_MUTABLE_PROFILE_FIELDS = set(RiskProfile.__dataclass_fields__) | {"snps"}
_MUTABLE_REQUEST_FIELDS = {"current_age", "pedigree", "horizons", "profile"}


def _to_pedigree(members) -> Pedigree:
    core = [PedigreeMember(**m.model_dump()) for m in members]
    return Pedigree(core, proband_id=core[0].id)


def _run_assessment(request: AssessRequest, resources: ModelResources) -> AssessResponse:
    profile = profile_from_json_dict(request.profile.model_dump())
    ped = _to_pedigree(request.pedigree)
    assessment = assess(
        ped,
        profile,
        resources.seg_model,
        resources.mortality,
        request.current_age,
        factor_table=resources.factor_table,
        surface=resources.density_surface,
        params_version=resources.version,
    )
    h1 = RateTable(bands=assessment.hazard_bands, cause_label="breast")
    horizon_risks = []
    for h in request.horizons:
        age = min(request.current_age + h, MODEL_AGE_HI)
        risk = (
            competing_absolute_risk(h1, resources.mortality, request.current_age, age)
            if age > request.current_age
            else 0.0
        )
        horizon_risks.append(HorizonRisk(horizon=h, age=age, risk=risk))
    return AssessResponse(
        assessment=AssessmentOut.model_validate(assessment.to_json_dict()),
        horizon_risks=horizon_risks,
        params_version=resources.version,
    )


def _apply_delta(request: AssessRequest, field: str, value) -> AssessRequest:
    data = request.model_dump()
    if field in _MUTABLE_PROFILE_FIELDS:
        data["profile"][field] = value
    elif field in _MUTABLE_REQUEST_FIELDS:
        data[field] = value
    else:
        raise BreastRiskError(f"unknown what-if field {field!r}")
    try:
        return AssessRequest.model_validate(data)
    except pydantic.ValidationError as exc:
        raise BreastRiskError(f"invalid what-if value for {field!r}: {exc}") from None


def create_app(resources: ModelResources | None = None, ui_dir: str | None = None) -> FastAPI:
    resources = resources if resources is not None else load_resources()
    app = FastAPI(title="breastrisk", version=API_VERSION)

    @app.exception_handler(RequestValidationError)
    async def _schema_error(request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in e.get("loc", [])), "message": e.get("msg", "")}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": errors})

    @app.exception_handler(BreastRiskError)
    async def _domain_error(request: Request, exc: BreastRiskError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get(f"/{API_VERSION}/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok", params_version=resources.version, api_version=API_VERSION
        )

    @app.post(f"/{API_VERSION}/assess", response_model=AssessResponse, response_model_by_alias=True)
    def post_assess(request: AssessRequest) -> AssessResponse:
        return _run_assessment(request, resources)

    @app.post(f"/{API_VERSION}/whatif", response_model=WhatIfResponse, response_model_by_alias=True)
    def post_whatif(request: WhatIfRequest) -> WhatIfResponse:
        base = _run_assessment(request.base, resources)
        items = []
        for delta in request.deltas:
            changed_request = _apply_delta(request.base, delta.field, delta.value)
            response = _run_assessment(changed_request, resources)
            items.append(
                WhatIfItem(
                    delta=delta,
                    response=response,
                    category_transition=CategoryTransition(
                        before=base.assessment.risk_category,
                        after=response.assessment.risk_category,
                        changed=base.assessment.risk_category
                        != response.assessment.risk_category,
                    ),
                )
            )
        return WhatIfResponse(base=base, items=items, params_version=resources.version)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


app = create_app()
