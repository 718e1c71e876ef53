"""Model parameter loading: rate tables, segregation inputs, factor config.

Defaults ship with the package under ``breastrisk/data``; they are
illustrative synthetic placeholders, not registry or study estimates.
A directory with the same file layout can be supplied explicitly or via
the ``BREASTRISK_PARAMS`` environment variable.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path

from .errors import ParseError
from .factors import DensitySurface, FactorTable
from .pedigree import SegregationModel, SegregationParams, build_model
from .rates import CAUSE_BREAST, CAUSE_OTHER_MORTALITY, RateTable, load_rate_table

ENV_PARAMS_DIR = "BREASTRISK_PARAMS"

_FILES = {
    "incidence": "incidence_breast.csv",
    "mortality": "mortality_other.csv",
    "segregation": "segregation.json",
    "factors": "factors.json",
    "density": "density_surface.json",
}


@dataclass(frozen=True)
class ModelResources:
    """Immutable bundle of everything an assessment needs."""

    incidence: RateTable
    mortality: RateTable
    seg_params: SegregationParams
    seg_model: SegregationModel
    factor_table: FactorTable
    density_surface: DensitySurface
    version: str


def default_params_dir() -> Path:
    env = os.environ.get(ENV_PARAMS_DIR)
    if env:
        return Path(env)
    return Path(str(importlib_resources.files("breastrisk") / "data"))


def _read_rate_table(directory: Path, name: str, cause: str) -> RateTable:
    path = directory / name
    if not path.exists():
        raise ParseError(f"missing parameter file {path}")
    return load_rate_table(path.read_text(encoding="utf-8"), cause_label=cause)


def load_resources(directory: Path | str | None = None) -> ModelResources:
    directory = Path(directory) if directory is not None else default_params_dir()
    incidence = _read_rate_table(directory, _FILES["incidence"], CAUSE_BREAST)
    mortality = _read_rate_table(directory, _FILES["mortality"], CAUSE_OTHER_MORTALITY)

    seg_cfg = json.loads((directory / _FILES["segregation"]).read_text(encoding="utf-8"))
    files = seg_cfg["files"]
    seg_params = SegregationParams(
        beta=float(seg_cfg["beta"]),
        gamma=math.log(float(seg_cfg["relative_hazard"])),
        brca1_prev=float(seg_cfg["brca1_prevalence"]),
        brca2_prev=float(seg_cfg["brca2_prevalence"]),
        breast_brca1=_read_rate_table(directory, files["breast_brca1"], CAUSE_BREAST),
        breast_brca2=_read_rate_table(directory, files["breast_brca2"], CAUSE_BREAST),
        ovarian_brca1=_read_rate_table(directory, files["ovarian_brca1"], CAUSE_BREAST),
        ovarian_brca2=_read_rate_table(directory, files["ovarian_brca2"], CAUSE_BREAST),
        ovarian_population=_read_rate_table(
            directory, files["ovarian_population"], CAUSE_BREAST
        ),
    )
    seg_model = build_model(incidence, seg_params)

    factors_cfg = json.loads((directory / _FILES["factors"]).read_text(encoding="utf-8"))
    factor_table = FactorTable.from_config(factors_cfg)

    density_cfg = json.loads((directory / _FILES["density"]).read_text(encoding="utf-8"))
    density_surface = DensitySurface(
        measures=density_cfg["measures"],
        birads_z={int(k): float(v) for k, v in density_cfg["birads_z"].items()},
        version=density_cfg.get("version", "unversioned"),
    )

    version = "+".join(
        [
            seg_cfg.get("version", "segregation-unversioned"),
            factor_table.version,
            density_surface.version,
        ]
    )
    return ModelResources(
        incidence=incidence,
        mortality=mortality,
        seg_params=seg_params,
        seg_model=seg_model,
        factor_table=factor_table,
        density_surface=density_surface,
        version=version,
    )
