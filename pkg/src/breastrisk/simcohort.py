"""Synthetic cohort generator: the brute-force oracle for the calibration
toolkit.

Event and death times are sampled as independent latent piecewise-
exponential lifetimes per cause; the observed exit is the earliest of the
latent times and the censoring time. Cohorts are bit-reproducible: one
PCG64 stream seeded from the spec draws a fixed-width row of uniforms per
subject, so subject ``i``'s fate depends only on (seed, i).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm as norm_dist

from .calib import FollowUpRecord
from .errors import InvalidSpec
from .factors import AssessmentContext, RiskProfile, factor_relative_hazard
from .params import ModelResources, load_resources
from .pedigree import genotype_posterior, mixture_band_table, singleton_pedigree
from .rates import MODEL_AGE_HI, RateTable, ScaledView

_COLUMNS = 8  # entry, multiplier, event1, event2, censor, profile x3


@dataclass(frozen=True)
class SimSpec:
    """Cohort recipe: size, seed, entry ages, hazards, censoring, deflation.

    ``hazards`` is either explicit banded tables (optionally with a
    per-subject multiplier distribution) or ``model`` (family-history
    mixture hazard at the entry age times a sampled risk-factor profile).
    ``year1_deflation`` scales the true cause-1 hazard in the first year of
    follow-up while records keep the undeflated model predictions.
    """

    n: int
    seed: int
    entry_age: dict = field(default_factory=lambda: {"kind": "fixed", "value": 45.0})
    hazards: dict = field(
        default_factory=lambda: {
            "kind": "explicit",
            "h1_bands": [[20.0, 85.0, 0.01]],
            "h2_bands": [[20.0, 85.0, 0.005]],
        }
    )
    censoring: dict = field(default_factory=lambda: {"kind": "none"})
    year1_deflation: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpec(f"n must be >= 1, got {self.n}")
        if not (0.0 < self.year1_deflation <= 1.0):
            raise InvalidSpec(f"year1_deflation must be in (0,1], got {self.year1_deflation}")
        if self.hazards.get("kind") not in ("explicit", "model"):
            raise InvalidSpec(f"unknown hazards kind {self.hazards.get('kind')!r}")
        if self.censoring.get("kind") not in (
            "none",
            "fixed",
            "deterministic",
            "stochastic",
            "risk_dependent",
        ):
            raise InvalidSpec(f"unknown censoring kind {self.censoring.get('kind')!r}")

    @classmethod
    def from_json(cls, text: str) -> "SimSpec":
        cfg = json.loads(text)
        cfg.pop("schema", None)
        return cls(**cfg)

    def to_json_dict(self) -> dict:
        return {
            "schema": "breastrisk/simspec/v1",
            "n": self.n,
            "seed": self.seed,
            "entry_age": self.entry_age,
            "hazards": self.hazards,
            "censoring": self.censoring,
            "year1_deflation": self.year1_deflation,
        }


def _draw_array(cfg: dict, u: np.ndarray) -> np.ndarray:
    kind = cfg.get("kind")
    if kind == "fixed":
        return np.full(len(u), float(cfg["value"]))
    if kind == "uniform":
        lo, hi = float(cfg["lo"]), float(cfg["hi"])
        return lo + u * (hi - lo)
    if kind == "choice":
        values = np.asarray(cfg["values"], dtype=float)
        idx = np.minimum((u * len(values)).astype(int), len(values) - 1)
        return values[idx]
    if kind == "lognormal":
        sigma = float(cfg["sigma"])
        z = norm_dist.ppf(np.clip(u, 1e-12, 1 - 1e-12))
        return np.exp(sigma * z - 0.5 * sigma * sigma)  # mean exactly 1
    raise InvalidSpec(f"unknown distribution kind {kind!r}")


def _cum_arrays(edges: np.ndarray, rates: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(rates * np.diff(edges))])


def _cum_at(edges, rates, cums, ages) -> np.ndarray:
    idx = np.clip(np.searchsorted(edges, ages, side="right") - 1, 0, len(rates) - 1)
    return cums[idx] + rates[idx] * (ages - edges[idx])


def _invert_cum(edges, rates, cums, targets) -> np.ndarray:
    """Ages where the cumulative hazard reaches ``targets``; inf if never."""
    targets = np.asarray(targets, dtype=float)
    out = np.full(targets.shape, np.inf)
    reachable = targets < cums[-1] - 1e-300
    t = targets[reachable]
    idx = np.clip(np.searchsorted(cums, t, side="right") - 1, 0, len(rates) - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ages = edges[idx] + np.where(rates[idx] > 0, (t - cums[idx]) / rates[idx], 0.0)
    out[reachable] = ages
    return out


class _HazardGroup:
    """Subjects sharing one base table; per-subject multipliers allowed."""

    def __init__(self, base: RateTable):
        self.base = base
        self.edges, self.rates = base.band_arrays()
        self.cums = _cum_arrays(self.edges, self.rates)

    def sample_event_ages(
        self,
        entries: np.ndarray,
        exp_draws: np.ndarray,
        multipliers: np.ndarray,
        deflation: float,
    ) -> np.ndarray:
        """Latent event ages from entry under multiplier and year-1 deflation."""
        base_entry = _cum_at(self.edges, self.rates, self.cums, entries)
        base_year1 = (
            _cum_at(self.edges, self.rates, self.cums, np.minimum(entries + 1.0, self.edges[-1]))
            - base_entry
        )
        thr = multipliers * deflation * base_year1
        in_first = exp_draws <= thr
        target_base = np.where(
            in_first,
            exp_draws / (multipliers * deflation),
            base_year1 + (exp_draws - thr) / multipliers,
        )
        return _invert_cum(self.edges, self.rates, self.cums, base_entry + target_base)


def _model_groups(entries: np.ndarray, resources: ModelResources):
    """Per-entry-age mixture hazard tables (singleton-pedigree posterior)."""
    if not np.allclose(entries, np.round(entries)):
        raise InvalidSpec("model hazards require whole-year entry ages")
    groups = {}
    for age in np.unique(entries.astype(int)):
        ped = singleton_pedigree(float(age))
        post = genotype_posterior(ped, resources.seg_model)
        groups[int(age)] = _HazardGroup(
            mixture_band_table(post, resources.seg_model, float(age))
        )
    return groups


def _profile_multipliers(u: np.ndarray, resources: ModelResources) -> np.ndarray:
    """Sampled risk-factor profiles, evaluated through the factor model.

    Menarche, first-birth and height categories are drawn independently;
    the per-category normalised ratios come from the real factor table so
    the cohort is exactly a mixture of model profiles.
    """
    table = resources.factor_table
    context = AssessmentContext(age=50.0, postmenopausal=False)

    def ratios(profiles):
        return np.array(
            [factor_relative_hazard(p, fid, context, table) for p, fid in profiles]
        )

    menarche_ages = [10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0]
    menarche_vals = ratios(
        [(RiskProfile(menarche_age=a), "menarche") for a in menarche_ages]
    )
    parity_opts = ["nulliparous", 19.0, 22.0, 27.0, 32.0, 36.0]
    parity_vals = ratios([(RiskProfile(parity=p), "parity") for p in parity_opts])
    heights = [1.55, 1.60, 1.65, 1.70, 1.75]
    height_vals = ratios([(RiskProfile(height_m=h), "height") for h in heights])

    def pick(values, col):
        idx = np.minimum((col * len(values)).astype(int), len(values) - 1)
        return values[idx]

    return (
        pick(menarche_vals, u[:, 5])
        * pick(parity_vals, u[:, 6])
        * pick(height_vals, u[:, 7])
    )


def simulate(spec: SimSpec, resources: ModelResources | None = None) -> list[FollowUpRecord]:
    """Generate a cohort of follow-up records, reproducible from the seed.

    Records carry the undeflated model hazards; ties between latent times
    resolve in favour of the disease event, then death, then censoring.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    u = rng.random((spec.n, _COLUMNS))

    entries = _draw_array(spec.entry_age, u[:, 0])
    if np.any(entries < 20.0) or np.any(entries >= MODEL_AGE_HI):
        raise InvalidSpec("entry ages must lie in [20, 85)")

    hz = spec.hazards
    if hz["kind"] == "explicit":
        h1_base = RateTable(
            bands=tuple(tuple(b) for b in hz["h1_bands"]), cause_label="breast"
        )
        h2_base = RateTable(
            bands=tuple(tuple(b) for b in hz["h2_bands"]), cause_label="other_mortality"
        )
        mult_cfg = hz.get("multiplier", {"kind": "fixed", "value": 1.0})
        multipliers = _draw_array(mult_cfg, u[:, 1])
        group_of = {None: _HazardGroup(h1_base)}
        group_keys = np.full(spec.n, None, dtype=object)
    else:
        resources = resources if resources is not None else load_resources()
        h2_base = resources.mortality
        groups = _model_groups(entries, resources)
        profile_cfg = hz.get("profile", {"kind": "random"})
        if profile_cfg.get("kind") == "neutral":
            multipliers = np.ones(spec.n)
        elif profile_cfg.get("kind") == "random":
            multipliers = _profile_multipliers(u, resources)
        else:
            raise InvalidSpec(f"unknown profile kind {profile_cfg.get('kind')!r}")
        group_of = groups
        group_keys = entries.astype(int)

    event1_age = np.full(spec.n, np.inf)
    exp1 = -np.log(u[:, 2])
    for key, group in group_of.items():
        mask = group_keys == key if key is not None else np.ones(spec.n, dtype=bool)
        event1_age[mask] = group.sample_event_ages(
            entries[mask], exp1[mask], multipliers[mask], spec.year1_deflation
        )

    h2_group = _HazardGroup(h2_base)
    exp2 = -np.log(u[:, 3])
    event2_age = h2_group.sample_event_ages(
        entries, exp2, np.ones(spec.n), 1.0
    )

    t1 = event1_age - entries
    t2 = event2_age - entries
    admin = MODEL_AGE_HI - entries

    cz = spec.censoring
    kind = cz["kind"]
    if kind == "none":
        tc = admin.copy()
    elif kind == "fixed":
        years = float(cz["years"])
        if years <= 0:
            raise InvalidSpec("fixed censoring requires years > 0")
        tc = np.minimum(np.full(spec.n, years), admin)
    elif kind == "deterministic":
        tc = np.minimum(_draw_array(cz["years"], u[:, 4]), admin)
        if np.any(tc <= 0):
            raise InvalidSpec("deterministic censoring times must be > 0")
    elif kind in ("stochastic", "risk_dependent"):
        rate = float(cz["rate"] if kind == "stochastic" else cz["rate_scale"])
        if rate <= 0:
            raise InvalidSpec("censoring rate must be > 0")
        rates = rate * (multipliers if kind == "risk_dependent" else np.ones(spec.n))
        draws = -np.log(u[:, 4]) / rates
        cap = float(cz.get("admin_years", np.inf))
        tc = np.minimum(np.minimum(draws, cap), admin)
    else:  # pragma: no cover - guarded in SimSpec
        raise InvalidSpec(kind)

    follow_up = np.minimum(np.minimum(t1, t2), tc)
    cause = np.where(t1 <= follow_up, 1, np.where(t2 <= follow_up, 2, 0))

    records = []
    width = len(str(spec.n))
    for i in range(spec.n):
        key = group_keys[i]
        base = group_of[key].base if key is not None else group_of[None].base
        h1 = ScaledView(base, float(multipliers[i])) if multipliers[i] != 1.0 else base
        records.append(
            FollowUpRecord(
                subject_id=f"s{i:0{width}d}",
                entry_age=float(entries[i]),
                exit_age=float(entries[i] + follow_up[i]),
                cause=int(cause[i]),
                h1=h1,
                h2=h2_base,
                potential_censor_years=float(tc[i]),
            )
        )
    return records


def piecewise_exponential_sample(bands, rng) -> float:
    """One inverse-CDF draw from a piecewise-constant hazard.

    ``bands`` is a sequence of (lo, hi, rate) or a prebuilt RateTable; the
    returned value is on the band axis, ``inf`` when the total hazard is
    exhausted before the end of coverage.
    """
    if isinstance(bands, RateTable):
        table = bands
    else:
        table = RateTable(bands=tuple(tuple(b) for b in bands), cause_label="breast")
    edges, rates = table.band_arrays()
    cums = _cum_arrays(edges, rates)
    target = -math.log(rng.random())
    return float(_invert_cum(edges, rates, cums, np.array([target]))[0])
