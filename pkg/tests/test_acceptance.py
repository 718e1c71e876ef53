"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line with the measured quantity.

Monte-Carlo experiments use fixed seeds, so every run is reproducible.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import chi2 as chi2_dist

from breastrisk.calib import (
    PersonYearSegment,
    biased_net_risk,
    biased_sum_to_event,
    expected_hazard_method,
    fixed_horizon_exclusion,
    group_chi_sq,
    observed_count,
    person_year_segments,
    poisson_calibration_fit,
    poisson_exact_interval,
)
from breastrisk.factors import RiskProfile, Snp, hrt_relative_hazard, polygenic_relative_risk
from breastrisk.factors import AssessmentContext, factor_relative_hazard
from breastrisk.pedigree import (
    CELLS,
    genotype_posterior,
    pedigree_likelihood,
    singleton_pedigree,
    solve_baseline_survivor,
)
from breastrisk.rates import RateTable
from breastrisk.risk import assess, competing_absolute_risk
from breastrisk.simcohort import SimSpec, simulate
from breastrisk.timecurves import (
    cif_curves,
    expected_count_curve,
    nelson_aalen,
    net_risk_curves,
)
from oracles import enumeration_joint, random_pedigree


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


# ---------------------------------------------------------------------------


def test_criterion_baseline_survivor_solve():
    rng = np.random.default_rng(101)
    start = time.time()
    worst = 0.0
    for _ in range(10_000):
        s_g = float(rng.uniform(1e-4, 1.0))
        beta = float(rng.uniform(1e-4, 1.0 - 1e-4))
        gamma = float(rng.uniform(0.0, math.log(20.0)))
        s0 = solve_baseline_survivor(s_g, beta, gamma)
        worst = max(worst, abs((1 - beta) * s0 + beta * s0 ** math.exp(gamma) - s_g))
    elapsed = time.time() - start
    closed = abs(
        solve_baseline_survivor(0.75, 0.5, math.log(2.0)) - (math.sqrt(7.0) - 1.0) / 2.0
    )
    _report(
        "baseline-survivor solve",
        worst < 1e-12 and closed < 1e-12 and elapsed < 1.0,
        f"max residual {worst:.2e}, closed-form error {closed:.2e}, {elapsed:.2f}s",
    )


def test_criterion_segregation_oracle(seg_model):
    rng = np.random.default_rng(202)
    start = time.time()
    worst = 0.0
    for _ in range(200):
        ped = random_pedigree(rng, 6)
        joint = enumeration_joint(ped, seg_model)
        for cell_index, cell in enumerate(CELLS):
            mine = pedigree_likelihood(ped, cell, seg_model)
            from breastrisk.pedigree import STATE_CELL

            mask = STATE_CELL == cell_index
            oracle = float(joint[mask].sum()) / float(seg_model.state_prior[mask].sum())
            if oracle == 0.0 and mine == 0.0:
                continue
            worst = max(worst, abs(mine - oracle) / max(abs(oracle), 1e-300))
    elapsed = time.time() - start
    _report(
        "segregation peeling vs enumeration",
        worst < 1e-10 and elapsed < 30.0,
        f"200 pedigrees, max relative diff {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_population_identity(resources):
    zero = RateTable(bands=((20.0, 85.0, 0.0),), cause_label="other_mortality")
    assessment = assess(
        singleton_pedigree(20.0),
        RiskProfile(),
        resources.seg_model,
        zero,
        20.0,
        factor_table=resources.factor_table,
        surface=resources.density_surface,
    )
    worst = 0.0
    for age, risk in zip(assessment.curve_ages, assessment.curve_risks):
        truth = -math.expm1(-resources.incidence.cumulative(20.0, age))
        worst = max(worst, abs(risk - truth))
    _report(
        "population identity (mortality off)",
        worst < 1e-6,
        f"max deviation over ages 20-85: {worst:.2e}",
    )


def test_criterion_absolute_risk_inequalities():
    rng = np.random.default_rng(303)
    worst_slack = 0.0
    for _ in range(1000):
        cut = float(rng.uniform(25.0, 80.0))
        h1 = RateTable(
            bands=((20.0, cut, float(rng.uniform(0, 0.08))), (cut, 85.0, float(rng.uniform(0, 0.08)))),
            cause_label="breast",
        )
        h2 = RateTable(
            bands=((20.0, cut, float(rng.uniform(0, 0.08))), (cut, 85.0, float(rng.uniform(0, 0.08)))),
            cause_label="other_mortality",
        )
        lo, hi = sorted(rng.uniform(20.0, 85.0, size=2))
        if hi - lo < 0.05:
            continue
        p = competing_absolute_risk(h1, h2, lo, hi)
        cum = h1.cumulative(lo, hi)
        net = -math.expm1(-cum)
        worst_slack = max(worst_slack, p - net, net - cum)
    constant_case = competing_absolute_risk(
        RateTable(bands=((20.0, 85.0, 0.01),), cause_label="breast"),
        RateTable(bands=((20.0, 85.0, 0.02),), cause_label="other_mortality"),
        40.0,
        50.0,
    )
    closed = abs(constant_case - (1.0 / 3.0) * -math.expm1(-0.3))
    _report(
        "absolute-risk inequality chain",
        worst_slack < 1e-12 and closed < 1e-9 and round(constant_case, 6) == 0.086394,
        f"max slack {worst_slack:.2e}, constant-hazard error {closed:.2e}",
    )


def test_criterion_parameter_conformance():
    checks = {
        "hrt year2 combined": hrt_relative_hazard("current", "combined", 2.0, None) == pytest.approx(1.5, abs=1e-12),
        "hrt max combined": hrt_relative_hazard("current", "combined", 5.0, None) == pytest.approx(2.0, abs=1e-12),
        "hrt max estrogen": hrt_relative_hazard("current", "estrogen_only", 5.0, None) == pytest.approx(1.4, abs=1e-12),
        "menarche 16": factor_relative_hazard(
            RiskProfile(menarche_age=16.0), "menarche", AssessmentContext(45.0, False)
        ) == pytest.approx(0.88, abs=1e-12),
        "lcis": factor_relative_hazard(
            RiskProfile(benign_disease="lcis"), "benign", AssessmentContext(45.0, False)
        ) == pytest.approx(8.0, abs=1e-12),
        "unknown biopsy": factor_relative_hazard(
            RiskProfile(benign_disease="unknown_biopsy"), "benign", AssessmentContext(45.0, False)
        ) == pytest.approx(1.3, abs=1e-12),
    }
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(200):
        p = float(rng.uniform(0.01, 0.99))
        oratio = float(rng.uniform(0.2, 5.0))
        hw = np.array([(1 - p) ** 2, 2 * p * (1 - p), p * p])
        vals = np.array([polygenic_relative_risk([Snp(p, oratio, g)]) for g in (0, 1, 2)])
        worst = max(worst, abs(float(hw @ vals) - 1.0))
    checks["hardy-weinberg mean"] = worst < 1e-12
    failed = [k for k, ok in checks.items() if not ok]
    _report(
        "parameter conformance",
        not failed,
        f"HW worst {worst:.2e}" + (f"; failed: {failed}" if failed else ""),
    )


def test_criterion_calibration_soundness(resources):
    start = time.time()
    spec = SimSpec(
        n=100_000,
        seed=515,
        entry_age={"kind": "choice", "values": [40.0, 45.0, 50.0, 55.0, 60.0]},
        hazards={"kind": "model", "profile": {"kind": "random"}},
        censoring={"kind": "stochastic", "rate": 0.06, "admin_years": 12.0},
    )
    records = simulate(spec, resources)
    observed = observed_count(records)
    expected = expected_hazard_method(records)
    oe_dev = abs(observed / expected - 1.0)
    oe_tol = 3.0 * math.sqrt(observed) / observed

    covered = 0
    replicates = 500
    for rep in range(replicates):
        rep_spec = SimSpec(
            n=1200,
            seed=10_000 + rep,
            entry_age={"kind": "fixed", "value": 45.0},
            hazards={
                "kind": "explicit",
                "h1_bands": [[20.0, 85.0, 0.008]],
                "h2_bands": [[20.0, 85.0, 0.004]],
                "multiplier": {"kind": "lognormal", "sigma": 0.6},
            },
            censoring={
                "kind": "deterministic",
                "years": {"kind": "choice", "values": [4.0, 6.0, 8.0, 10.0, 12.0]},
            },
        )
        recs = simulate(rep_spec)
        rows = [
            PersonYearSegment(
                observed=int(r.cause == 1),
                expected=competing_absolute_risk(
                    r.h1, r.h2, r.entry_age, r.entry_age + r.potential_censor_years
                ),
                year_index=0,
            )
            for r in recs
        ]
        fit = poisson_calibration_fit(rows, estimate_slope=True)
        lo, hi = fit.ci("log_expected")
        covered += lo <= 1.0 <= hi
    elapsed = time.time() - start
    coverage = covered / replicates
    _report(
        "calibration soundness",
        oe_dev < oe_tol and coverage >= 0.93 and elapsed < 300.0,
        f"O/E-1 = {oe_dev:.4f} (tol {oe_tol:.4f}), slope coverage {coverage:.1%}, {elapsed:.0f}s",
    )


def test_criterion_bias_reproduction():
    ordering_ok = True
    ratios = []
    censored_share = []
    for rep in range(40):
        spec = SimSpec(
            n=4000,
            seed=20_000 + rep,
            entry_age={"kind": "fixed", "value": 45.0},
            hazards={
                "kind": "explicit",
                "h1_bands": [[20.0, 85.0, 0.01]],
                "h2_bands": [[20.0, 85.0, 0.005]],
                "multiplier": {"kind": "lognormal", "sigma": 0.5},
            },
            censoring={"kind": "stochastic", "rate": 0.09, "admin_years": 10.0},
        )
        records = simulate(spec)
        s = biased_sum_to_event(records)
        n = biased_net_risk(records)
        h = expected_hazard_method(records)
        ordering_ok = ordering_ok and (s < n < h)
        o, e = fixed_horizon_exclusion(records, 5.0)
        ratios.append(o / e)
        censored_share.append(
            np.mean([r.potential_censor_years < 5.0 for r in records])
        )
    mean_ratio = float(np.mean(ratios))
    share = float(np.mean(censored_share))
    _report(
        "bias reproduction",
        ordering_ok and mean_ratio > 1.1 and share >= 0.30,
        f"ordering strict on 40/40, exclusion-protocol mean O/E {mean_ratio:.3f}, "
        f"5y censoring {share:.0%}",
    )


def test_criterion_oe_interval():
    worst = 0.0
    for count in range(0, 101):
        lo, hi = poisson_exact_interval(count, 0.95)
        oracle_lo = 0.0 if count == 0 else 0.5 * chi2_dist.ppf(0.025, 2 * count)
        oracle_hi = 0.5 * chi2_dist.ppf(0.975, 2 * (count + 1))
        worst = max(worst, abs(lo - oracle_lo), abs(hi - oracle_hi))

    mean = 700.0
    rng = np.random.default_rng(606)
    draws = rng.poisson(mean, size=10_000)
    cache: dict[int, tuple[float, float]] = {}
    covered = 0
    for o in draws:
        o = int(o)
        if o not in cache:
            cache[o] = poisson_exact_interval(o, 0.95)
        lo, hi = cache[o]
        covered += lo <= mean <= hi
    coverage = covered / len(draws)
    _report(
        "exact Poisson O/E interval",
        worst < 1e-9 and abs(coverage - 0.95) <= 0.01,
        f"max diff vs chi-square oracle {worst:.2e}, coverage {coverage:.4f}",
    )


def _ab_divergence(kind: str, seed: int) -> float:
    censoring = (
        {"kind": "stochastic", "rate": 0.1, "admin_years": 10.0}
        if kind == "independent"
        else {"kind": "risk_dependent", "rate_scale": 0.1, "admin_years": 10.0}
    )
    spec = SimSpec(
        n=10_000,
        seed=seed,
        entry_age={"kind": "fixed", "value": 45.0},
        hazards={
            "kind": "explicit",
            "h1_bands": [[20.0, 85.0, 0.01]],
            "h2_bands": [[20.0, 85.0, 0.004]],
            "multiplier": {"kind": "lognormal", "sigma": 0.8},
        },
        censoring=censoring,
    )
    series = net_risk_curves(simulate(spec), grid=[10.0])
    a, b = float(series.expected_a[0]), float(series.expected_b[0])
    return abs(a - b) / a


def test_criterion_time_curve_identities():
    # endpoint identity
    rng = np.random.default_rng(707)
    h1 = RateTable(bands=((20.0, 85.0, 0.012),), cause_label="breast")
    h2 = RateTable(bands=((20.0, 85.0, 0.004),), cause_label="other_mortality")
    from breastrisk.calib import FollowUpRecord

    records = [
        FollowUpRecord(
            subject_id=f"s{i}",
            entry_age=45.0,
            exit_age=45.0 + float(rng.uniform(0.3, 12.0)),
            cause=int(rng.choice([0, 1, 2])),
            h1=h1,
            h2=h2,
        )
        for i in range(500)
    ]
    endpoint = expected_count_curve(records).observed[-1]
    endpoint_err = abs(endpoint - expected_hazard_method(records))

    hand = [
        FollowUpRecord(subject_id="a", entry_age=40.0, exit_age=41.0, cause=1, h1=h1, h2=h2),
        FollowUpRecord(subject_id="b", entry_age=40.0, exit_age=42.0, cause=1, h1=h1, h2=h2),
        FollowUpRecord(subject_id="c", entry_age=40.0, exit_age=42.5, cause=0, h1=h1, h2=h2),
        FollowUpRecord(subject_id="d", entry_age=40.0, exit_age=43.0, cause=0, h1=h1, h2=h2),
    ]
    grid = [1.0, 2.0]
    na = nelson_aalen(hand, grid=grid).observed[1]
    km = net_risk_curves(hand, grid=grid).observed[1]
    cif = cif_curves(hand, grid=grid).observed[0]
    hand_ok = (
        abs(na - 7.0 / 12.0) < 1e-12 and abs(km - 0.5) < 1e-12 and abs(cif - 0.25) < 1e-12
    )

    threshold = 0.05
    independent = [_ab_divergence("independent", 30_000 + i) for i in range(50)]
    dependent = [_ab_divergence("dependent", 40_000 + i) for i in range(200)]
    agree = float(np.mean([d < threshold for d in independent]))
    detect = float(np.mean([d > threshold for d in dependent]))
    _report(
        "time-curve identities",
        endpoint_err < 1e-10 and hand_ok and agree >= 0.95 and detect >= 0.95,
        f"endpoint err {endpoint_err:.1e}, hand examples exact, "
        f"A/B agree {agree:.0%} (independent), diverge {detect:.0%} (risk-dependent)",
    )


def test_criterion_chi_sq_size():
    rng_master = np.random.default_rng(808)
    threshold = chi2_dist.ppf(0.95, 9)
    h2_rate = 0.003
    base_rate = 0.01
    rejections = 0
    replicates = 2000
    checked_expected = False
    for rep in range(replicates):
        spec = SimSpec(
            n=2000,
            seed=50_000 + rep,
            entry_age={"kind": "fixed", "value": 45.0},
            hazards={
                "kind": "explicit",
                "h1_bands": [[20.0, 85.0, base_rate]],
                "h2_bands": [[20.0, 85.0, h2_rate]],
                "multiplier": {"kind": "lognormal", "sigma": 0.5},
            },
            censoring={"kind": "fixed", "years": 10.0},
        )
        records = simulate(spec)
        scales = np.array([getattr(r.h1, "scale", 1.0) for r in records])
        total = scales * base_rate + h2_rate
        risks = (scales * base_rate / total) * -np.expm1(-total * 10.0)
        if not checked_expected:
            from breastrisk.calib import expected_cif_fixed

            library = expected_cif_fixed(records[:50], 10.0)
            assert library == pytest.approx(float(risks[:50].sum()), rel=1e-9)
            checked_expected = True
        order = np.argsort(risks, kind="mergesort")
        groups = []
        causes = np.array([r.cause == 1 for r in records])
        for chunk in np.array_split(order, 10):
            groups.append((int(causes[chunk].sum()), float(risks[chunk].sum())))
        stat, df, _p = group_chi_sq(groups)
        rejections += stat > threshold
    rate = rejections / replicates
    _report(
        "chi-square group-test size",
        0.03 <= rate <= 0.07,
        f"rejection rate {rate:.4f} over {replicates} null cohorts",
    )


def test_criterion_year1_deflation_recovery():
    covered = 0
    replicates = 200
    for rep in range(replicates):
        spec = SimSpec(
            n=3000,
            seed=60_000 + rep,
            entry_age={"kind": "fixed", "value": 45.0},
            hazards={
                "kind": "explicit",
                "h1_bands": [[20.0, 85.0, 0.02]],
                "h2_bands": [[20.0, 85.0, 0.004]],
                "multiplier": {"kind": "lognormal", "sigma": 0.5},
            },
            censoring={"kind": "stochastic", "rate": 0.05, "admin_years": 10.0},
            year1_deflation=0.5,
        )
        records = simulate(spec)
        segments = person_year_segments(records)
        fit = poisson_calibration_fit(segments, covariate_names=("year1", "followup_time"))
        _ratio, lo, hi = fit.ratio_ci("year1")
        covered += lo <= 0.5 <= hi
    coverage = covered / replicates
    _report(
        "year-1 deflation recovery",
        coverage >= 0.93,
        f"year-1 coefficient CI covers 0.5 in {coverage:.1%} of {replicates} replicates",
    )
