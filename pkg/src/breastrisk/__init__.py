"""Breast cancer risk assessment with a competing-mortality calibration
toolkit: segregation-based familial risk, multiplicative risk factors,
absolute risk projection, expected-count estimators, time-dependent
calibration curves, and a synthetic-cohort oracle."""

__version__ = "0.1.0"

from .calib import (
    CalibrationReport,
    FollowUpRecord,
    biased_net_risk,
    biased_sum_to_event,
    calibrate,
    expected_cif_deterministic,
    expected_cif_fixed,
    expected_cif_stochastic,
    expected_hazard_method,
    fixed_horizon_exclusion,
    group_chi_sq,
    oe_ratio_with_ci,
    poisson_calibration_fit,
)
from .factors import (
    DensitySurface,
    FactorTable,
    RiskProfile,
    Snp,
    benign_relative_hazard,
    combined_relative_hazard,
    density_relative_hazard,
    factor_relative_hazard,
    hrt_relative_hazard,
    polygenic_relative_risk,
)
from .params import ModelResources, load_resources
from .pedigree import (
    GenotypePosterior,
    Pedigree,
    PedigreeMember,
    SegregationModel,
    SegregationParams,
    build_model,
    genetic_hazard,
    genetic_survivor,
    genotype_posterior,
    parse_pedigree,
    pedigree_likelihood,
    serialize_pedigree,
    singleton_pedigree,
    solve_baseline_survivor,
)
from .rates import AgeInterval, RateTable, cumulative_hazard, load_rate_table
from .risk import RiskAssessment, absolute_risk, assess, conditional_hazard
from .simcohort import SimSpec, piecewise_exponential_sample, simulate
from .timecurves import (
    CurveSeries,
    cif_curves,
    expected_count_curve,
    expected_cum_hazard,
    nelson_aalen,
    net_risk_curves,
    observed_count_curve,
)
