"""Capture UI test fixtures from the running assessment service.

Run from frontend/:  python3 scripts/make_fixtures.py
Writes fixtures/cases.json with 20 assess cases plus one what-if case.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from breastrisk.service.app import create_app


def member(mid, sex, censor, mother=None, father=None, breast=None, ovarian=None, test="untested"):
    return {
        "id": mid,
        "sex": sex,
        "mother_id": mother,
        "father_id": father,
        "breast_age": breast,
        "ovarian_age": ovarian,
        "censor_age": censor,
        "brca_test": test,
    }


def proband_only(age, **kwargs):
    return [member("proband", "F", age, **kwargs)]


def with_parents(age, mother_kwargs=None, father_kwargs=None):
    rows = [
        member("proband", "F", age, mother="mum", father="dad"),
        member("mum", "F", 62.0, **(mother_kwargs or {})),
        member("dad", "M", 70.0, **(father_kwargs or {})),
    ]
    return rows


CASES = [
    ("neutral_47", {}, proband_only(47.0), 47.0),
    ("neutral_30", {}, proband_only(30.0), 30.0),
    ("early_menarche", {"menarche_age": 10.0}, proband_only(45.0), 45.0),
    ("late_menarche_tall", {"menarche_age": 17.0, "height_m": 1.78}, proband_only(45.0), 45.0),
    ("nulliparous", {"parity": "nulliparous"}, proband_only(50.0), 50.0),
    ("late_first_birth", {"parity": 36.0, "menarche_age": 12.0}, proband_only(50.0), 50.0),
    (
        "postmenopause_bmi",
        {"menopause_status": "post", "menopause_age": 52.0, "bmi": 31.0},
        proband_only(58.0),
        58.0,
    ),
    (
        "hrt_combined_current",
        {"menopause_status": "post", "hrt_status": "current", "hrt_type": "combined", "hrt_years": 3.0},
        proband_only(55.0),
        55.0,
    ),
    (
        "hrt_estrogen_past",
        {"menopause_status": "post", "hrt_status": "past", "hrt_type": "estrogen_only", "hrt_years": 1.0},
        proband_only(56.0),
        56.0,
    ),
    ("benign_proliferative", {"benign_disease": "proliferative_usual"}, proband_only(48.0), 48.0),
    ("benign_unknown_biopsy", {"benign_disease": "unknown_biopsy"}, proband_only(48.0), 48.0),
    ("atypical_hyperplasia", {"benign_disease": "atypical_hyperplasia"}, proband_only(48.0), 48.0),
    ("lcis_with_family", {"benign_disease": "lcis"}, with_parents(48.0, {"breast": 44.0}), 48.0),
    (
        "dense_breasts",
        {"density_measure": "visual_percent", "density_value": 62.0, "density_age": 50.0, "density_bmi": 24.0},
        proband_only(50.0),
        50.0,
    ),
    (
        "birads_d",
        {"density_measure": "birads", "density_value": 4, "density_age": 52.0},
        proband_only(52.0),
        52.0,
    ),
    (
        "snp_panel",
        {
            "snps": [
                {"risk_allele_freq": 0.3, "per_allele_or": 1.25, "genotype": 2},
                {"risk_allele_freq": 0.12, "per_allele_or": 1.4, "genotype": 1},
                {"risk_allele_freq": 0.45, "per_allele_or": 0.9, "genotype": 0},
            ]
        },
        proband_only(44.0),
        44.0,
    ),
    ("mother_bc_40", {}, with_parents(47.0, {"breast": 40.0}), 47.0),
    (
        "mother_brca1",
        {},
        with_parents(35.0, {"test": "brca1"}),
        35.0,
    ),
    ("proband_brca2", {}, proband_only(40.0, test="brca2"), 40.0),
    (
        "ovarian_family",
        {"menarche_age": 13.0},
        with_parents(52.0, {"ovarian": 55.0}),
        52.0,
    ),
]


def main() -> None:
    client = TestClient(create_app())
    out = {"schema": "breastrisk-ui/fixtures/v1", "cases": [], "whatif": None}
    for name, profile, pedigree, age in CASES:
        request = {
            "profile": profile,
            "pedigree": pedigree,
            "current_age": age,
            "horizons": [10.0],
        }
        response = client.post("/v1/assess", json=request)
        response.raise_for_status()
        out["cases"].append({"name": name, "request": request, "response": response.json()})
    assert len(out["cases"]) == 20

    base = {
        "profile": {"menopause_status": "post"},
        "pedigree": proband_only(55.0),
        "current_age": 55.0,
        "horizons": [10.0],
    }
    delta_profile = {
        "menopause_status": "post",
        "hrt_status": "current",
        "hrt_type": "combined",
        "hrt_years": 3.0,
    }
    response = client.post(
        "/v1/whatif",
        json={"base": base, "deltas": [{"field": "profile", "value": delta_profile}]},
    )
    response.raise_for_status()
    out["whatif"] = {
        "name": "hrt_combined_year3",
        "base_request": base,
        "response": response.json(),
    }

    path = Path(__file__).resolve().parent.parent / "fixtures" / "cases.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(out['cases'])} cases + what-if)")


if __name__ == "__main__":
    main()
