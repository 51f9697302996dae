"""Radial tilted measures and the empirical verification checks (small scale)."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from zopt.rngutil import derive_rng
from zopt.special import gamma_fn
from zopt.stats import ks_two_sample
from zopt.theory import (
    CHECK_IDS,
    RadialPotentialSpec,
    check_concentration,
    check_lemma_tail_bound,
    check_min_gap,
    check_sup_rate,
    ell_theta_radial,
    gibbs_radial_sampler,
    min_gap_bound,
    mixture_oracle,
    mixture_target,
    run_check,
    sup_rate_constant,
    tail_bound_rhs,
    triangular_problem,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        RadialPotentialSpec(dimension=0, exponent=2)
    with pytest.raises(ValueError):
        RadialPotentialSpec(dimension=2, exponent=0)
    with pytest.raises(ValueError):
        RadialPotentialSpec(dimension=2, exponent=2, theta=0.5)


def test_ell_theta_exponential_case():
    # d = m: the level mass is 1 - e^{-r theta}, independent of kappa
    for theta in (1.0, 50.0):
        spec = RadialPotentialSpec(dimension=2, exponent=2, kappa=7.0,
                                   theta=theta)
        r = np.linspace(0.0, 3.0, 40)
        assert np.allclose(ell_theta_radial(spec, r),
                           1.0 - np.exp(-r * theta), atol=1e-12)


def test_ell_theta_monotone_and_bounded():
    spec = RadialPotentialSpec(dimension=5, exponent=3, theta=10.0)
    r = np.linspace(0.0, 2.0, 100)
    v = ell_theta_radial(spec, r)
    assert v[0] == 0.0
    assert np.all(np.diff(v) >= 0)
    assert v[-1] <= 1.0
    with pytest.raises(ValueError):
        ell_theta_radial(spec, -0.1)


def test_ell_theta_small_r_power_law():
    # gamma(a, x) ~ x^a / a as x -> 0, so the mass behaves like
    # (r theta)^{d/m} / ((d/m) Gamma(d/m))
    spec = RadialPotentialSpec(dimension=3, exponent=2, theta=1.0)
    a = 1.5
    for r in (1e-6, 1e-4):
        approx = r**a / (a * float(gamma_fn(a)))
        assert ell_theta_radial(spec, r) == pytest.approx(approx, rel=1e-3)


def test_ell_theta_matches_monte_carlo():
    spec = RadialPotentialSpec(dimension=3, exponent=2, theta=10.0)
    x = gibbs_radial_sampler(spec, 200_000, np.random.default_rng(0))
    u = np.sum(x * x, axis=1)  # kappa = 1, m = 2
    r = 0.5
    emp = float(np.mean(u < r))
    se = math.sqrt(emp * (1 - emp) / x.shape[0])
    assert abs(emp - float(ell_theta_radial(spec, r))) < 3 * se + 1e-6


def test_gibbs_sampler_gaussian_case():
    # m = 2, kappa = 1: e^{-theta |x|^2} is N(0, 1/(2 theta) I)
    theta = 8.0
    spec = RadialPotentialSpec(dimension=2, exponent=2, theta=theta)
    x = gibbs_radial_sampler(spec, 10_000, np.random.default_rng(1))
    ref = np.random.default_rng(2).normal(0.0, 1.0 / math.sqrt(2 * theta),
                                          size=10_000)
    assert ks_two_sample(x[:, 0], ref) < 0.02
    assert abs(float(np.mean(np.sum(x * x, axis=1))) - 2 / (2 * theta)) \
        < 0.02 * 2 / (2 * theta)


def test_gibbs_sampler_temperature_scaling():
    # radii scale like theta^{-1/m}: quadruple theta, halve the radius (m=2)
    d, n = 3, 50_000
    r1 = np.linalg.norm(gibbs_radial_sampler(
        RadialPotentialSpec(d, 2, theta=10.0), n, np.random.default_rng(3)),
        axis=1)
    r2 = np.linalg.norm(gibbs_radial_sampler(
        RadialPotentialSpec(d, 2, theta=160.0), n, np.random.default_rng(3)),
        axis=1)
    assert float(np.mean(r1) / np.mean(r2)) == pytest.approx(4.0, rel=0.05)


def test_gibbs_sampler_rejects_bad_n():
    with pytest.raises(ValueError):
        gibbs_radial_sampler(RadialPotentialSpec(2, 2), 0,
                             np.random.default_rng(0))


def test_sup_rate_constant_two_dims():
    # d = 2, p = 1: Gamma(2)^1 * Gamma(2)^1 / (2 pi) = 1 / (2 pi)
    assert sup_rate_constant(2, 1.0) == pytest.approx(1.0 / (2 * math.pi),
                                                      rel=1e-12)


def test_min_gap_bound_formula():
    got = min_gap_bound(d=3, m=2.0, theta=100.0, n=10, p=1.0,
                        kappa0=1.0, kappa1=2.0)
    expect = 3 / 200.0 + math.exp(-10 * 0.5**1.5 / 2.0)
    assert got == pytest.approx(expect, rel=1e-12)


def test_tail_bound_rhs_exponential_oracle():
    # with level mass r (uniform-like) and p = 1 the integral is
    # (1 - e^{-N}) / N
    problem = triangular_problem()
    flat = type(problem)(f=problem.f, f_star=1.0, sample=problem.sample,
                         level_mass=lambda r: r)
    n = 7
    assert tail_bound_rhs(flat, n, 1.0) == pytest.approx(
        (1 - math.exp(-n)) / n, rel=1e-10)


def test_check_lemma_tail_bound_small():
    report = check_lemma_tail_bound(n_grid=(10, 50), replicates=400,
                                    rng=np.random.default_rng(0))
    assert report.passed
    assert report.name == "lemma21"
    assert "mean_n10" in report.statistics


def test_check_sup_rate_small():
    report = check_sup_rate(n_grid=(200, 2000), replicates=300,
                            rng=np.random.default_rng(0))
    assert report.passed
    assert report.bounds["constant"] == pytest.approx(1 / (2 * math.pi))


def test_check_min_gap_small():
    report = check_min_gap(replicates=200, rng=np.random.default_rng(0))
    assert report.passed
    assert report.statistics["mean_pth_power"] <= \
        report.bounds["bound_pth_power_plus_3se"]


def test_check_concentration_small():
    report, fit = check_concentration(
        theta_grid=(10.0, 100.0, 1000.0), n_per_theta=20_000,
        moment_draws=200_000, rng=np.random.default_rng(0))
    assert report.passed
    assert fit.slope == pytest.approx(-0.5, abs=0.05)


def test_checks_deterministic():
    a = check_min_gap(replicates=100, rng=np.random.default_rng(5))
    b = check_min_gap(replicates=100, rng=np.random.default_rng(5))
    assert a.statistics == b.statistics and a.passed == b.passed


def test_mixture_target_and_oracle():
    target = mixture_target(2)
    mu = 2.0 * np.ones(2)
    # peak value at a mode: log(e^0 + e^{-2|2mu|^2 ...}) ~ 0 within the
    # cross-term, and points off the box have zero density
    at_mode = float(np.asarray(target.log_density(mu)).ravel()[0])
    assert at_mode == pytest.approx(0.0, abs=1e-10)
    outside = float(np.asarray(target.log_density(10.0 * mu)).ravel()[0])
    assert outside == -np.inf
    draws = mixture_oracle(2, 4000, np.random.default_rng(0))
    assert draws.shape == (4000, 2)
    assert np.all(np.abs(draws) <= 6.0)
    # symmetric mixture: mean near zero, coordinate marginals match the
    # exact two-component CDF
    assert np.all(np.abs(draws.mean(axis=0)) < 0.15)
    grid = np.linspace(-4, 4, 9)
    exact_cdf = 0.5 * (sps.norm.cdf(grid, -2, 0.5) + sps.norm.cdf(grid, 2, 0.5))
    emp_cdf = np.mean(draws[:, 0][None, :] <= grid[:, None], axis=1)
    assert np.max(np.abs(emp_cdf - exact_cdf)) < 0.03


def test_run_check_dispatch():
    reports = run_check("th28", derive_rng(0, "theory"))
    assert len(reports) == 1 and reports[0].name == "th28"
    with pytest.raises(ValueError):
        run_check("bogus", np.random.default_rng(0))
    assert CHECK_IDS[-1] == "all"


def test_report_lines_format():
    report = check_min_gap(replicates=50, rng=np.random.default_rng(1))
    lines = report.lines()
    assert lines[0].startswith("check th28: ")
    assert any("stat" in ln for ln in lines)
    assert any("bound" in ln for ln in lines)
