import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breastrisk.errors import InvalidAges, UnsupportedPedigree, ValidationError
from breastrisk.pedigree import (
    CELLS,
    GenotypePosterior,
    Pedigree,
    PedigreeMember,
    genetic_hazard,
    genetic_survivor,
    genotype_posterior,
    mixture_band_table,
    parse_pedigree,
    pedigree_likelihood,
    serialize_pedigree,
    singleton_pedigree,
    solve_baseline_survivor,
)
from oracles import (
    enumeration_likelihood,
    enumeration_posterior_cells,
    random_pedigree,
)


# -- baseline survivor solve -------------------------------------------------


def test_solve_beta_near_zero_collapses():
    assert solve_baseline_survivor(0.9, 1e-12, 1.3) == pytest.approx(0.9, abs=1e-9)


def test_solve_gamma_zero_is_identity():
    assert solve_baseline_survivor(0.9, 0.3, 0.0) == pytest.approx(0.9, abs=1e-12)


def test_solve_quadratic_closed_form():
    s0 = solve_baseline_survivor(0.75, 0.5, math.log(2.0))
    assert s0 == pytest.approx((math.sqrt(7.0) - 1.0) / 2.0, abs=1e-12)


def test_solve_bisection_oracle():
    beta, gamma = 0.3, math.log(5.0)
    target = 0.6
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if (1 - beta) * mid + beta * mid ** math.exp(gamma) < target:
            lo = mid
        else:
            hi = mid
    assert solve_baseline_survivor(target, beta, gamma) == pytest.approx(lo, abs=1e-10)


@given(
    st.floats(min_value=1e-6, max_value=1.0),
    st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
    st.floats(min_value=0.0, max_value=math.log(20.0)),
)
@settings(max_examples=200, deadline=None)
def test_solve_residual_property(s_g, beta, gamma):
    s0 = solve_baseline_survivor(s_g, beta, gamma)
    residual = (1 - beta) * s0 + beta * s0 ** math.exp(gamma) - s_g
    assert abs(residual) < 1e-12
    assert s_g - 1e-12 <= s0 <= 1.0 + 1e-12


def test_solve_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        solve_baseline_survivor(0.0, 0.3, 1.0)
    with pytest.raises(ValidationError):
        solve_baseline_survivor(0.5, 1.5, 1.0)
    with pytest.raises(ValidationError):
        solve_baseline_survivor(0.5, 0.3, -1.0)


# -- pedigree structure and format -------------------------------------------


def test_member_event_after_censor_rejected():
    with pytest.raises(InvalidAges):
        PedigreeMember(id="a", sex="F", breast_age=50.0, censor_age=45.0)


def test_member_event_below_model_range_rejected():
    with pytest.raises(InvalidAges):
        PedigreeMember(id="a", sex="F", breast_age=18.0, censor_age=45.0)


def test_unknown_parent_rejected():
    m = PedigreeMember(id="a", sex="F", mother_id="mm", father_id="ff", censor_age=40.0)
    with pytest.raises(UnsupportedPedigree):
        Pedigree([m], proband_id="a")


def test_parent_cycle_rejected():
    a = PedigreeMember(id="a", sex="F", mother_id="b", father_id="c", censor_age=40.0)
    b = PedigreeMember(id="b", sex="F", mother_id="a", father_id="c", censor_age=60.0)
    c = PedigreeMember(id="c", sex="M", censor_age=60.0)
    with pytest.raises(UnsupportedPedigree):
        Pedigree([a, b, c], proband_id="a")


def test_inbreeding_loop_rejected():
    gm = PedigreeMember(id="gm", sex="F", censor_age=80.0)
    gf = PedigreeMember(id="gf", sex="M", censor_age=80.0)
    s1 = PedigreeMember(id="s1", sex="F", mother_id="gm", father_id="gf", censor_age=55.0)
    s2 = PedigreeMember(id="s2", sex="M", mother_id="gm", father_id="gf", censor_age=55.0)
    child = PedigreeMember(id="c", sex="F", mother_id="s1", father_id="s2", censor_age=30.0)
    with pytest.raises(UnsupportedPedigree, match="loop"):
        Pedigree([gm, gf, s1, s2, child], proband_id="c")


def test_half_sibs_are_loop_free():
    f = PedigreeMember(id="f", sex="M", censor_age=70.0)
    m1 = PedigreeMember(id="m1", sex="F", censor_age=70.0)
    m2 = PedigreeMember(id="m2", sex="F", censor_age=70.0)
    c1 = PedigreeMember(id="c1", sex="F", mother_id="m1", father_id="f", censor_age=40.0)
    c2 = PedigreeMember(id="c2", sex="F", mother_id="m2", father_id="f", censor_age=40.0)
    ped = Pedigree([c1, f, m1, m2, c2], proband_id="c1")
    assert len(ped.members) == 5


def test_single_known_parent_gets_implicit_founder(seg_model):
    with_mother = Pedigree(
        [
            PedigreeMember(id="p", sex="F", mother_id="m", censor_age=45.0),
            PedigreeMember(id="m", sex="F", breast_age=42.0, censor_age=60.0),
        ],
        proband_id="p",
    )
    explicit = Pedigree(
        [
            PedigreeMember(id="p", sex="F", mother_id="m", father_id="f", censor_age=45.0),
            PedigreeMember(id="m", sex="F", breast_age=42.0, censor_age=60.0),
            PedigreeMember(id="f", sex="M", censor_age=0.0),
        ],
        proband_id="p",
    )
    a = genotype_posterior(with_mother, seg_model).weights
    b = genotype_posterior(explicit, seg_model).weights
    np.testing.assert_allclose(a, b, rtol=1e-12)


PEDIGREE_TEXT = """\
id,sex,mother_id,father_id,breast_age,ovarian_age,censor_age,brca_test
proband,F,mum,dad,,,47,
mum,F,,,44,,62,brca1
dad,M,,,,,70,
"""


def test_parse_and_roundtrip():
    ped = parse_pedigree(PEDIGREE_TEXT)
    assert ped.proband_id == "proband"
    assert ped.member("mum").breast_age == 44.0
    assert ped.member("mum").brca_test == "brca1"
    text = serialize_pedigree(ped)
    again = parse_pedigree(text)
    assert serialize_pedigree(again) == text
    assert [m.id for m in again.members] == [m.id for m in ped.members]


def test_parse_rejects_wrong_field_count():
    with pytest.raises(ValidationError, match="8 fields"):
        parse_pedigree("a,F,,,47\n")


# -- posterior behaviour ------------------------------------------------------


def test_uninformative_posterior_is_prior(seg_model):
    post = genotype_posterior(singleton_pedigree(20.0), seg_model)
    np.testing.assert_allclose(post.weights, seg_model.cell_prior, atol=1e-3)
    np.testing.assert_allclose(post.weights, seg_model.cell_prior, rtol=1e-9)


def test_posterior_weights_sum_to_one(seg_model):
    rng = np.random.default_rng(123)
    for _ in range(20):
        ped = random_pedigree(rng, 5)
        post = genotype_posterior(ped, seg_model)
        assert abs(post.weights.sum() - 1.0) < 1e-10


def test_tested_proband_pins_posterior(seg_model):
    for test, expected_c1 in (("brca2", 2), ("brca1", 1), ("negative", 0)):
        ped = Pedigree(
            [PedigreeMember(id="p", sex="F", censor_age=40.0, brca_test=test)],
            proband_id="p",
        )
        post = genotype_posterior(ped, seg_model)
        mass = sum(
            w for (c1, _c2), w in zip(CELLS, post.weights) if c1 == expected_c1
        )
        assert mass == pytest.approx(1.0, abs=1e-12)


def test_affected_mother_raises_risk_cells(seg_model):
    ped = parse_pedigree(PEDIGREE_TEXT)
    post = genotype_posterior(ped, seg_model)
    base = genotype_posterior(singleton_pedigree(47.0), seg_model)
    carrier_mass = post.weights[2:].sum()
    base_mass = base.weights[2:].sum()
    assert carrier_mass > base_mass


def test_singleton_likelihood_is_survivor_product(seg_model):
    ped = singleton_pedigree(50.0)
    for cell_index, cell in enumerate(CELLS):
        lik = pedigree_likelihood(ped, cell, seg_model)
        s_br = seg_model.breast_survivor_at(50.0)[cell_index]
        s_ov = seg_model.ovarian_survivor_at(50.0)[cell[0]]
        assert lik == pytest.approx(s_br * s_ov, rel=1e-12)


def test_likelihood_matches_enumeration_with_tested_mother(seg_model):
    ped = Pedigree(
        [
            PedigreeMember(id="p", sex="F", mother_id="m", father_id="f", censor_age=35.0),
            PedigreeMember(id="m", sex="F", censor_age=60.0, brca_test="brca1"),
            PedigreeMember(id="f", sex="M", censor_age=65.0),
        ],
        proband_id="p",
    )
    for cell in CELLS:
        mine = pedigree_likelihood(ped, cell, seg_model)
        oracle = enumeration_likelihood(ped, seg_model, cell)
        assert mine == pytest.approx(oracle, rel=1e-10)


def test_three_member_event_matches_enumeration(seg_model):
    ped = Pedigree(
        [
            PedigreeMember(id="p", sex="F", mother_id="m", father_id="f", censor_age=30.0),
            PedigreeMember(id="m", sex="F", breast_age=40.0, censor_age=55.0),
            PedigreeMember(id="f", sex="M", censor_age=60.0),
        ],
        proband_id="p",
    )
    for cell in CELLS:
        mine = pedigree_likelihood(ped, cell, seg_model)
        oracle = enumeration_likelihood(ped, seg_model, cell)
        assert mine == pytest.approx(oracle, rel=1e-10)


def test_peeling_equals_enumeration_random(seg_model):
    rng = np.random.default_rng(2024)
    for _ in range(25):
        ped = random_pedigree(rng, 5)
        mine = genotype_posterior(ped, seg_model).weights
        oracle = enumeration_posterior_cells(ped, seg_model)
        np.testing.assert_allclose(mine, oracle, rtol=1e-10, atol=1e-18)


# -- survivor and hazard mixtures ---------------------------------------------


def test_genetic_survivor_one_at_t0(seg_model):
    post = genotype_posterior(singleton_pedigree(40.0), seg_model)
    assert genetic_survivor(post, seg_model, 40.0, 40.0) == 1.0


def test_genetic_survivor_monotone(seg_model):
    post = genotype_posterior(singleton_pedigree(40.0), seg_model)
    values = [genetic_survivor(post, seg_model, 40.0, t) for t in np.linspace(40, 85, 40)]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


def test_degenerate_posterior_tracks_noncarrier(seg_model):
    post = GenotypePosterior.degenerate(0, 0, anchor_age=30.0)
    s = genetic_survivor(post, seg_model, 30.0, 60.0)
    grid = seg_model.breast_survivor_at(60.0)[0] / seg_model.breast_survivor_at(30.0)[0]
    assert s == pytest.approx(grid, rel=1e-12)
    h = genetic_hazard(post, seg_model, 45.3)
    assert h == pytest.approx(seg_model.breast_rate[0, 25], rel=1e-12)


def test_two_cell_mixture_hand_value(seg_model):
    w = np.zeros(6)
    w[0] = w[1] = 0.5
    post = GenotypePosterior(weights=w, anchor_age=20.0)
    t = 50.0
    expected = 0.5 * seg_model.breast_survivor_at(t)[0] + 0.5 * seg_model.breast_survivor_at(t)[1]
    assert genetic_survivor(post, seg_model, 20.0, t) == pytest.approx(expected, rel=1e-12)


def test_mixture_hazard_bracketed(seg_model):
    ped = parse_pedigree(PEDIGREE_TEXT)
    post = genotype_posterior(ped, seg_model)
    for t in (47.2, 55.7, 70.1):
        k = int(t) - 20
        h = genetic_hazard(post, seg_model, t)
        rates = seg_model.breast_rate[:, k]
        assert rates.min() - 1e-15 <= h <= rates.max() + 1e-15


def test_hazard_matches_finite_difference(seg_model):
    ped = parse_pedigree(PEDIGREE_TEXT)
    post = genotype_posterior(ped, seg_model)
    eps = 1e-5
    for t in (48.5, 57.25, 69.75):
        fd = (
            math.log(genetic_survivor(post, seg_model, 47.0, t - eps))
            - math.log(genetic_survivor(post, seg_model, 47.0, t + eps))
        ) / (2 * eps)
        assert genetic_hazard(post, seg_model, t) == pytest.approx(fd, rel=1e-6)


def test_population_rate_identity(seg_model, resources):
    post = genotype_posterior(singleton_pedigree(20.0), seg_model)
    table = mixture_band_table(post, seg_model, 20.0)
    for lo, hi, rate in table.bands:
        assert rate == pytest.approx(resources.incidence.rate_at(lo), abs=1e-8)


def test_mixture_band_table_fractional_start(seg_model):
    post = genotype_posterior(singleton_pedigree(20.0), seg_model)
    table = mixture_band_table(post, seg_model, 47.5)
    assert table.bands[0][0] == 47.5
    assert table.bands[0][1] == 48.0
    assert table.coverage_hi == 85.0
