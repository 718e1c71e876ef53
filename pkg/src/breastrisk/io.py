"""File formats: cohort CSV, per-subject hazard CSV, profile JSON.

CSV files carry a ``# schema: ...`` comment on the first line; loaders
skip comment lines. All writers are deterministic for fixed inputs.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

from .calib import FollowUpRecord
from .errors import ParseError, ValidationError
from .factors import RiskProfile, Snp
from .rates import RateTable

COHORT_SCHEMA = "breastrisk/cohort/v1"
HAZARD_SCHEMA = "breastrisk/hazards/v1"
PROFILE_SCHEMA = "breastrisk/profile/v1"

_COHORT_FIELDS = ["id", "entry_age", "exit_age", "cause", "potential_censor_years"]
_HAZARD_FIELDS = ["id", "age_lo", "age_hi", "h1", "h2"]

_PROFILE_FIELDS = (
    "menarche_age",
    "parity",
    "menopause_status",
    "menopause_age",
    "height_m",
    "bmi",
    "hrt_status",
    "hrt_type",
    "hrt_years",
    "benign_disease",
    "density_measure",
    "density_value",
    "density_age",
    "density_bmi",
)


def profile_from_json_dict(data: dict) -> RiskProfile:
    data = dict(data)
    data.pop("schema", None)
    snps = tuple(
        Snp(
            risk_allele_freq=float(s["risk_allele_freq"]),
            per_allele_or=float(s["per_allele_or"]),
            genotype=None if s.get("genotype") is None else int(s["genotype"]),
        )
        for s in data.pop("snps", []) or []
    )
    unknown = set(data) - set(_PROFILE_FIELDS)
    if unknown:
        raise ValidationError(f"unknown profile fields: {sorted(unknown)}")
    kwargs = {k: data[k] for k in _PROFILE_FIELDS if data.get(k) is not None}
    if "benign_disease" not in kwargs:
        kwargs["benign_disease"] = "none_known"
    return RiskProfile(snps=snps, **kwargs)


def profile_to_json_dict(profile: RiskProfile) -> dict:
    out = {"schema": PROFILE_SCHEMA}
    for field in _PROFILE_FIELDS:
        out[field] = getattr(profile, field)
    out["snps"] = [
        {
            "risk_allele_freq": s.risk_allele_freq,
            "per_allele_or": s.per_allele_or,
            "genotype": s.genotype,
        }
        for s in profile.snps
    ]
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    # repr of a float is the shortest exact round-trip representation
    return repr(value) if isinstance(value, float) else str(value)


def write_cohort_csv(records, path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {COHORT_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(_COHORT_FIELDS)
        for r in records:
            writer.writerow(
                [
                    r.subject_id,
                    _fmt(float(r.entry_age)),
                    _fmt(float(r.exit_age)),
                    r.cause,
                    _fmt(r.potential_censor_years),
                ]
            )


def _open_rows(path: Path | str):
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return csv.DictReader(_io.StringIO("\n".join(lines)))


def read_cohort_csv(
    path: Path | str,
    hazards: dict[str, tuple[RateTable, RateTable]] | None = None,
    default_h1: RateTable | None = None,
    default_h2: RateTable | None = None,
) -> list[FollowUpRecord]:
    """Load a cohort; per-subject hazards from ``hazards`` or the defaults."""
    records = []
    for i, row in enumerate(_open_rows(path), start=2):
        try:
            sid = row["id"]
            if hazards is not None and sid in hazards:
                h1, h2 = hazards[sid]
            elif default_h1 is not None and default_h2 is not None:
                h1, h2 = default_h1, default_h2
            else:
                raise ParseError(f"row {i}: no hazard curves for subject {sid!r}")
            pc = row.get("potential_censor_years") or None
            records.append(
                FollowUpRecord(
                    subject_id=sid,
                    entry_age=float(row["entry_age"]),
                    exit_age=float(row["exit_age"]),
                    cause=int(row["cause"]),
                    h1=h1,
                    h2=h2,
                    potential_censor_years=float(pc) if pc is not None else None,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"cohort row {i}: {exc}") from None
    if not records:
        raise ParseError("cohort file has no data rows")
    return records


def write_hazard_csv(records, path: Path | str) -> None:
    """Per-subject banded hazards, both causes on merged band edges."""
    import numpy as np

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {HAZARD_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(_HAZARD_FIELDS)
        for r in records:
            e1, _ = r.h1.band_arrays()
            e2, _ = r.h2.band_arrays()
            lo = max(e1[0], e2[0])
            hi = min(e1[-1], e2[-1])
            edges = np.unique(np.concatenate([e1, e2]))
            edges = edges[(edges >= lo) & (edges <= hi)]
            for a, b in zip(edges[:-1], edges[1:]):
                writer.writerow(
                    [
                        r.subject_id,
                        _fmt(float(a)),
                        _fmt(float(b)),
                        _fmt(r.h1.rate_at(a)),
                        _fmt(r.h2.rate_at(a)),
                    ]
                )


def read_hazard_csv(path: Path | str) -> dict[str, tuple[RateTable, RateTable]]:
    bands: dict[str, list[tuple[float, float, float, float]]] = {}
    for i, row in enumerate(_open_rows(path), start=2):
        try:
            bands.setdefault(row["id"], []).append(
                (
                    float(row["age_lo"]),
                    float(row["age_hi"]),
                    float(row["h1"]),
                    float(row["h2"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"hazard row {i}: {exc}") from None
    out = {}
    for sid, rows in bands.items():
        rows.sort(key=lambda r: r[0])
        h1 = RateTable(
            bands=tuple((lo, hi, r1) for lo, hi, r1, _ in rows), cause_label="breast"
        )
        h2 = RateTable(
            bands=tuple((lo, hi, r2) for lo, hi, _, r2 in rows),
            cause_label="other_mortality",
        )
        out[sid] = (h1, h2)
    return out


def load_json(path: Path | str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def dump_json(data: dict, path: Path | str | None) -> str:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
