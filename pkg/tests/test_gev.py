import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

import oracles
from crpfb import gev
from crpfb.errors import Degenerate, NotConverged
from crpfb.gev import GevParams
from crpfb.rng import stream

kappas = st.floats(-0.45, 0.45)


def test_cdf_at_location_is_inverse_e():
    for k in (-0.3, 0.0, 1e-8, 0.2, 0.9):
        assert gev.cdf(4.0, GevParams(k, 4.0, 2.5)) == pytest.approx(math.exp(-1), rel=1e-14)


def test_gumbel_median():
    p = GevParams(0.0, 3.0, 2.0)
    assert gev.cdf(3.0 - 2.0 * math.log(math.log(2)), p) == pytest.approx(0.5, rel=1e-14)


def test_cdf_direct_substitution():
    assert gev.cdf(6.0, GevParams(0.5, 0.0, 1.0)) == pytest.approx(math.exp(-1 / 16), rel=1e-14)


def test_off_support_tails():
    assert gev.cdf(-3.0, GevParams(0.5, 0.0, 1.0)) == 0.0  # below lower endpoint -2
    assert gev.cdf(3.0, GevParams(-0.5, 0.0, 1.0)) == 1.0  # above upper endpoint 2
    assert gev.pdf(-3.0, GevParams(0.5, 0.0, 1.0)) == 0.0


@given(kappas, st.floats(-10, 10), st.floats(0.1, 10), st.floats(-20, 40))
def test_cdf_pdf_match_reference(k, rho, eta, x):
    p = GevParams(k, rho, eta)
    ref = stats.genextreme(-k, loc=rho, scale=eta)
    assert gev.cdf(x, p) == pytest.approx(ref.cdf(x), abs=1e-12)
    assert gev.pdf(x, p) == pytest.approx(ref.pdf(x), rel=1e-8, abs=1e-14)


def test_quantile_identities():
    for k in (-0.2, 0.0, 0.3):
        assert gev.quantile(math.exp(-1), GevParams(k, 7.0, 3.0)) == pytest.approx(7.0, abs=1e-12)
    with pytest.raises(ValueError):
        gev.quantile(0.0, GevParams(0.1, 0, 1))
    with pytest.raises(ValueError):
        gev.quantile(1.0, GevParams(0.1, 0, 1))


def test_quantile_matches_bisection():
    p = GevParams(0.1, 10.0, 2.0)
    ref = oracles.bisect(lambda x: gev.cdf(x, p), 0.99, 0.0, 200.0)
    assert gev.quantile(0.99, p) == pytest.approx(ref, rel=1e-12)
    assert gev.quantile(0.99, p) == pytest.approx(21.68195247592644, rel=1e-12)
    assert gev.threshold(p, 1e-2) == pytest.approx(21.68195247592644, rel=1e-12)


@given(kappas, st.floats(-10, 10), st.floats(0.1, 10))
def test_roundtrip_on_grid(k, rho, eta):
    p = GevParams(k, rho, eta)
    grid = np.linspace(0.01, 0.99, 99)
    np.testing.assert_allclose(gev.cdf(gev.quantile(grid, p), p), grid, atol=1e-10)


@given(kappas, st.floats(0.1, 10))
def test_cdf_monotone_pdf_nonnegative(k, eta):
    p = GevParams(k, 0.0, eta)
    x = np.linspace(-30, 30, 400)
    assert np.all(np.diff(gev.cdf(x, p)) >= 0)
    assert np.all(gev.pdf(x, p) >= 0)


def test_gumbel_branch_is_continuous():
    x = np.linspace(-3, 8, 50)
    np.testing.assert_allclose(gev.cdf(x, GevParams(0.0, 0, 1)), gev.cdf(x, GevParams(2e-6, 0, 1)), atol=1e-5)
    np.testing.assert_allclose(gev.quantile(0.9, GevParams(5e-7, 0, 1)), gev.quantile(0.9, GevParams(0.0, 0, 1)))


def test_threshold_properties():
    p = GevParams(0.2, 3.0, 1.0)
    assert gev.threshold(p, 1 - math.exp(-1)) == pytest.approx(3.0, abs=1e-12)
    pf = [0.5, 0.1, 1e-2, 1e-3, 1e-5, 1e-8]
    v = [gev.threshold(p, a) for a in pf]
    assert all(b > a for a, b in zip(v, v[1:]))
    assert v[-1] > 100
    with pytest.raises(ValueError):
        gev.threshold(p, 0.0)


def test_fit_recovers_parameters():
    x = gev.sample(GevParams(0.2, 5.0, 1.5), 5000, stream(21))
    fit = gev.fit_mle(x)
    assert fit.converged
    assert abs(fit.params.kappa - 0.2) <= 0.05
    assert abs(fit.params.rho - 5.0) <= 0.1
    assert abs(fit.params.eta - 1.5) <= 0.1
    # support constraint holds at every sample
    assert np.all(1 + fit.params.kappa * (x - fit.params.rho) / fit.params.eta > 0)
    assert fit.neg_log_lik <= fit.init_neg_log_lik
    ref = stats.genextreme.fit(x)
    assert -ref[0] == pytest.approx(fit.params.kappa, abs=0.01)
    assert fit.neg_log_lik <= -np.sum(stats.genextreme.logpdf(x, *ref)) + 1e-6


def test_fit_gumbel_data():
    x = gev.sample(GevParams(0.0, 0.0, 1.0), 5000, stream(22))
    assert abs(gev.fit_mle(x).params.kappa) < 0.05


def test_fit_errors():
    with pytest.raises(Degenerate):
        gev.fit_mle(np.full(100, 3.0))
    with pytest.raises(ValueError):
        gev.fit_mle(np.arange(10.0))
    with pytest.raises(ValueError):
        gev.fit_mle(np.r_[np.arange(60.0), np.nan])
    x = gev.sample(GevParams(0.1, 0, 1), 500, stream(23))
    with pytest.raises(NotConverged):
        gev.fit_mle(x, max_iter=3)
    assert not gev.fit_mle(x, max_iter=3, strict=False).converged


@given(st.floats(0.1, 50), st.floats(-100, 100))
def test_fit_equivariance(alpha, beta):
    x = gev.sample(GevParams(0.1, 2.0, 1.0), 800, stream(24))
    a = gev.fit_mle(x).params
    b = gev.fit_mle(alpha * x + beta).params
    assert b.kappa == pytest.approx(a.kappa, abs=2e-4)
    assert b.rho == pytest.approx(alpha * a.rho + beta, abs=2e-4 * alpha + 1e-6 * abs(beta))
    assert b.eta == pytest.approx(alpha * a.eta, rel=2e-4)


def test_fit_json_roundtrip():
    fit = gev.fit_mle(gev.sample(GevParams(0.1, 0, 1), 200, stream(25)))
    doc = fit.to_json()
    assert set(doc) == {"kappa", "rho", "eta", "n", "nll", "ks"}
    assert gev.GevFit.from_json(doc).params == fit.params


def test_ks_statistic_matches_scipy():
    x = gev.sample(GevParams(0.1, 1.0, 2.0), 300, stream(26))
    p = GevParams(0.12, 1.1, 1.9)
    ref = stats.kstest(x, stats.genextreme(-0.12, loc=1.1, scale=1.9).cdf).statistic
    assert gev.ks_statistic(x, p) == pytest.approx(ref, rel=1e-10)


def test_diagnostics_tables():
    p = GevParams(0.1, 10.0, 2.0)
    x = gev.sample(p, 4000, stream(27))
    d = gev.diagnostics(p, x)
    n = len(x)
    assert np.all(np.diff(d.emp_p) > 0)
    np.testing.assert_allclose(d.emp_p, np.arange(1, n + 1) / (n + 1))
    # probability plot on the diagonal within KS tolerance of a known-true model
    assert np.max(np.abs(d.model_p - d.emp_p)) < 1.36 / math.sqrt(n)
    np.testing.assert_allclose(d.rl_x, np.log(-np.log(1 - d.emp_p)), rtol=1e-12)
    np.testing.assert_allclose(d.model_q, gev.quantile(d.emp_p, p))
    assert np.all(np.diff(d.emp_q) >= 0)
    assert d.emp_density.shape == d.model_density.shape == d.bin_centers.shape
    assert np.sum(d.emp_density * np.diff(np.histogram_bin_edges(np.sort(x), len(d.bin_centers)))) == pytest.approx(1.0)
    assert gev.Diagnostics.HEADER == ("mc", "emp_p", "model_p", "emp_q", "model_q", "rl_x")


def test_single_sample_diagnostics():
    d = gev.diagnostics(GevParams(0.0, 0.0, 1.0), [1.5])
    assert list(d.rows()) == [(1, 0.5, d.model_p[0], 1.5, d.model_q[0], d.rl_x[0])]
