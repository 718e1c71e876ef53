import json
from pathlib import Path

import pytest

from breastrisk.cli import main
from breastrisk.io import (
    read_cohort_csv,
    read_hazard_csv,
    write_cohort_csv,
    write_hazard_csv,
    profile_from_json_dict,
    profile_to_json_dict,
)
from breastrisk.factors import RiskProfile, Snp
from breastrisk.rates import RateTable
from breastrisk.simcohort import SimSpec, simulate

PROFILE = {
    "schema": "breastrisk/profile/v1",
    "menarche_age": 12.0,
    "parity": "nulliparous",
    "height_m": 1.68,
    "bmi": 24.0,
    "hrt_status": "never",
}

PEDIGREE = """\
id,sex,mother_id,father_id,breast_age,ovarian_age,censor_age,brca_test
p,F,m,f,,,47,
m,F,,,44,,62,
f,M,,,,,70,
"""

SPEC = {
    "schema": "breastrisk/simspec/v1",
    "n": 400,
    "seed": 11,
    "entry_age": {"kind": "fixed", "value": 45.0},
    "hazards": {
        "kind": "explicit",
        "h1_bands": [[20.0, 85.0, 0.012]],
        "h2_bands": [[20.0, 85.0, 0.004]],
        "multiplier": {"kind": "choice", "values": [0.5, 1.0, 2.0, 5.0, 8.0]},
    },
    "censoring": {"kind": "stochastic", "rate": 0.05, "admin_years": 10.0},
}


# -- profile codec ------------------------------------------------------------------


def test_profile_json_roundtrip():
    profile = RiskProfile(
        menarche_age=11.0,
        parity=26.0,
        menopause_status="post",
        menopause_age=51.0,
        bmi=27.5,
        hrt_status="past",
        hrt_type="combined",
        hrt_years=1.0,
        benign_disease="unknown_biopsy",
        snps=(Snp(0.3, 1.2, 1), Snp(0.1, 1.4, None)),
    )
    again = profile_from_json_dict(profile_to_json_dict(profile))
    assert again == profile


def test_profile_unknown_field_rejected():
    from breastrisk.errors import ValidationError

    with pytest.raises(ValidationError, match="unknown profile fields"):
        profile_from_json_dict({"weight_kg": 70.0})


# -- cohort / hazard files ------------------------------------------------------------


def test_cohort_roundtrip(tmp_path):
    records = simulate(SimSpec(**{k: v for k, v in SPEC.items() if k != "schema"}))
    path = tmp_path / "cohort.csv"
    write_cohort_csv(records, path)
    default_h1 = RateTable(bands=((20.0, 85.0, 0.012),), cause_label="breast")
    default_h2 = RateTable(bands=((20.0, 85.0, 0.004),), cause_label="other_mortality")
    again = read_cohort_csv(path, default_h1=default_h1, default_h2=default_h2)
    assert len(again) == len(records)
    for a, b in zip(records, again):
        assert a.subject_id == b.subject_id
        assert a.entry_age == b.entry_age
        assert a.exit_age == b.exit_age
        assert a.cause == b.cause
        assert a.potential_censor_years == pytest.approx(b.potential_censor_years)


def test_hazard_roundtrip_preserves_integrals(tmp_path):
    records = simulate(SimSpec(**{k: v for k, v in SPEC.items() if k != "schema"}))[:20]
    path = tmp_path / "hazards.csv"
    write_hazard_csv(records, path)
    tables = read_hazard_csv(path)
    for r in records:
        h1, h2 = tables[r.subject_id]
        assert h1.cumulative(r.entry_age, r.exit_age) == pytest.approx(
            r.h1.cumulative(r.entry_age, r.exit_age), rel=1e-12
        )
        assert h2.cumulative(r.entry_age, r.exit_age) == pytest.approx(
            r.h2.cumulative(r.entry_age, r.exit_age), rel=1e-12
        )


# -- CLI ------------------------------------------------------------------------------


def _write_inputs(tmp_path):
    (tmp_path / "profile.json").write_text(json.dumps(PROFILE))
    (tmp_path / "fam.txt").write_text(PEDIGREE)
    (tmp_path / "spec.json").write_text(json.dumps(SPEC))


def test_cli_assess(tmp_path, capsys):
    _write_inputs(tmp_path)
    out = tmp_path / "assessment.json"
    code = main(
        [
            "assess",
            "--profile", str(tmp_path / "profile.json"),
            "--pedigree", str(tmp_path / "fam.txt"),
            "--age", "47",
            "-o", str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == "breastrisk/assessment/v1"
    assert payload["t0"] == 47.0
    assert 0.0 < payload["ten_year_risk"] < 1.0
    assert payload["risk_curve"][-1]["age"] == 85.0


def test_cli_assess_deterministic(tmp_path):
    _write_inputs(tmp_path)
    outs = []
    for name in ("a.json", "b.json"):
        main(
            [
                "assess",
                "--profile", str(tmp_path / "profile.json"),
                "--pedigree", str(tmp_path / "fam.txt"),
                "--age", "47",
                "-o", str(tmp_path / name),
            ]
        )
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]


def test_cli_simulate_then_calibrate(tmp_path):
    _write_inputs(tmp_path)
    cohort = tmp_path / "cohort.csv"
    hazards = tmp_path / "hazards.csv"
    code = main(
        [
            "simulate",
            "--spec", str(tmp_path / "spec.json"),
            "--out-cohort", str(cohort),
            "--out-hazards", str(hazards),
        ]
    )
    assert code == 0
    report_path = tmp_path / "report.json"
    code = main(
        [
            "calibrate",
            "--cohort", str(cohort),
            "--hazards", str(hazards),
            "--method", "hazard,biased-sum,biased-net",
            "--groups", "cutpoints",
            "-o", str(report_path),
        ]
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["schema"] == "breastrisk/calibration/v1"
    hz = report["methods"]["hazard"]["expected"]
    assert report["methods"]["biased-sum"]["expected"] < hz
    assert report["methods"]["biased-net"]["expected"] < hz
    # calibrated simulation: O/E near 1
    assert 0.75 < report["methods"]["hazard"]["ratio"] < 1.3

    table_path = tmp_path / "report.txt"
    code = main(
        [
            "calibrate",
            "--cohort", str(cohort),
            "--hazards", str(hazards),
            "--method", "hazard,biased-sum",
            "--format", "table",
            "-o", str(table_path),
        ]
    )
    assert code == 0
    text = table_path.read_text()
    assert "Overall (intercept)" in text
    assert "[biased]" in text


def test_cli_simulate_deterministic(tmp_path):
    _write_inputs(tmp_path)
    blobs = []
    for name in ("c1.csv", "c2.csv"):
        main(
            [
                "simulate",
                "--spec", str(tmp_path / "spec.json"),
                "--out-cohort", str(tmp_path / name),
            ]
        )
        blobs.append((tmp_path / name).read_bytes())
    assert blobs[0] == blobs[1]


def test_cli_curves(tmp_path):
    _write_inputs(tmp_path)
    cohort = tmp_path / "cohort.csv"
    hazards = tmp_path / "hazards.csv"
    main(
        [
            "simulate",
            "--spec", str(tmp_path / "spec.json"),
            "--out-cohort", str(cohort),
            "--out-hazards", str(hazards),
        ]
    )
    out = tmp_path / "curves.csv"
    code = main(
        [
            "curves",
            "--cohort", str(cohort),
            "--hazards", str(hazards),
            "--methods", "count,cum_hazard,net_risk,cif",
            "-o", str(out),
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# schema:")
    assert lines[1] == "method,time,observed,obs_lo,obs_hi,expected_a,expected_b"
    methods = {ln.split(",")[0] for ln in lines[2:]}
    assert {"count", "cum_hazard", "net_risk", "cif", "cum_hazard_oe"} <= methods

    json_out = tmp_path / "curves.json"
    code = main(
        [
            "curves",
            "--cohort", str(cohort),
            "--hazards", str(hazards),
            "--format", "json",
            "-o", str(json_out),
        ]
    )
    assert code == 0
    payload = json.loads(json_out.read_text())
    assert payload["schema"] == "breastrisk/curves/v1"


def test_cli_missing_file_exit_code(tmp_path):
    code = main(
        [
            "assess",
            "--profile", str(tmp_path / "missing.json"),
            "--pedigree", str(tmp_path / "missing.txt"),
            "--age", "47",
        ]
    )
    assert code == 2


def test_cli_bad_pedigree_exit_code(tmp_path, capsys):
    (tmp_path / "profile.json").write_text(json.dumps(PROFILE))
    (tmp_path / "fam.txt").write_text("id,sex\n")
    code = main(
        [
            "assess",
            "--profile", str(tmp_path / "profile.json"),
            "--pedigree", str(tmp_path / "fam.txt"),
            "--age", "47",
        ]
    )
    assert code == 2
    assert "input error" in capsys.readouterr().err


def test_cli_loop_pedigree_exit_code(tmp_path):
    (tmp_path / "profile.json").write_text(json.dumps(PROFILE))
    loop = (
        "id,sex,mother_id,father_id,breast_age,ovarian_age,censor_age,brca_test\n"
        "c,F,s1,s2,,,30,\n"
        "gm,F,,,,,80,\n"
        "gf,M,,,,,80,\n"
        "s1,F,gm,gf,,,55,\n"
        "s2,M,gm,gf,,,55,\n"
    )
    (tmp_path / "fam.txt").write_text(loop)
    code = main(
        [
            "assess",
            "--profile", str(tmp_path / "profile.json"),
            "--pedigree", str(tmp_path / "fam.txt"),
            "--age", "30",
        ]
    )
    assert code == 2
