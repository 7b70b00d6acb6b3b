import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from crpfb._kernels import corr_power
from crpfb.crpf import (
    CrpfConfig,
    FilterDraws,
    FilterTrace,
    ParticleSet,
    incremental_cost,
    init,
    resample,
    resample_indices,
    run,
    run_filters,
    step,
    weights,
)
from crpfb.model import ModelConfig, PriorHypothesis, StateVector, chunk_record
from crpfb.rng import stream

TS = 1 / 512
MCFG = ModelConfig()
LC = MCFG.chunk_len


def lfm_track(f0, fdot, mcfg=MCFG, amp=1.0):
    """Noise-free record whose chunk k is exactly amp·u(f0 + k·dT·fdot, fdot)."""
    t = np.arange(mcfg.n_samples) * mcfg.ts
    return amp * np.exp(2j * np.pi * (f0 * t + 0.5 * fdot * t * t)) / np.sqrt(mcfg.chunk_len)


# weights -------------------------------------------------------------------


def test_weight_examples():
    np.testing.assert_allclose(weights([1, 1, 1, 1], 7), [0.25] * 4)
    np.testing.assert_allclose(weights([1, 2], 1), [2 / 3, 1 / 3], rtol=1e-15)
    np.testing.assert_allclose(weights([1, 2], 5), [32 / 33, 1 / 33], rtol=1e-15)


@given(
    st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=20),
    st.integers(1, 10),
    st.floats(1e-3, 1e3),
)
def test_weights_normalised_and_scale_free(costs, q, alpha):
    w = weights(costs, q)
    assert abs(w.sum() - 1) < 1e-12
    np.testing.assert_allclose(weights(np.array(costs) * alpha, q), w, rtol=1e-9, atol=1e-300)


@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=20), st.integers(1, 10))
def test_weights_order_reversing(costs, q):
    c = np.array(costs)
    w = weights(c, q)
    i, j = np.argmin(c), np.argmax(c)
    assert w[i] >= w[j]


def test_weights_zero_cost_uses_floor():
    w = weights([0.0, 1.0], 5)
    assert np.all(np.isfinite(w)) and w[0] == pytest.approx(1.0)


# resample ------------------------------------------------------------------


def test_single_particle_passthrough():
    ps = ParticleSet(np.array([3.0]), np.array([1.0]), np.array([2.0]))
    assert resample(ps, 5, stream(0)) is ps


def test_resample_strongly_prefers_zero_cost():
    survivals = 0
    g = stream(4)
    for _ in range(10_000):
        ps = ParticleSet(np.array([0.0, 1.0]), np.array([0.0, 0.0]), np.array([0.0, 1e3]))
        survivals += int(np.sum(resample(ps, 5, g).f == 1.0) > 0)
    assert survivals / 10_000 < 1e-3


def test_equal_costs_give_unit_expected_clones():
    n, runs = 5, 10_000
    counts = np.zeros(n)
    g = stream(5)
    for _ in range(runs):
        idx = resample_indices(np.ones((1, n)), 5, 1e-12, g.random((1, n)))[0]
        counts += np.bincount(idx, minlength=n)
    mean = counts / runs
    # multinomial: each count has variance N·p(1-p) per run
    sd = np.sqrt(n * (1 / n) * (1 - 1 / n) / runs)
    assert np.all(np.abs(mean - 1.0) < 3 * sd * 1.5)


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_resample_outputs_are_inputs(n, seed):
    g = np.random.default_rng(seed)
    ps = ParticleSet(g.normal(size=n), g.normal(size=n), g.exponential(size=n))
    out = resample(ps, 3, stream(seed))
    pairs = set(zip(ps.f, ps.fdot, ps.cost))
    assert all(p in pairs for p in zip(out.f, out.fdot, out.cost))


def test_resample_indices_match_searchsorted():
    g = stream(8)
    costs = g.exponential(size=(3, 40))
    u = g.random((3, 40))
    idx = resample_indices(costs, 4, 1e-12, u)
    w = weights(costs, 4)
    for r in range(3):
        ref = np.minimum(np.searchsorted(np.cumsum(w[r]), u[r], side="right"), 39)
        np.testing.assert_array_equal(idx[r], ref)


# costs and the kernel ---------------------------------------------------------


@given(
    st.floats(-200, 200), st.floats(-300, 300), st.floats(-200, 200), st.floats(-300, 300),
    st.integers(2, 64),
)
def test_kernel_matches_direct_summation(f, fd, fz, fdz, n):
    g = np.random.default_rng(abs(int(f * 1000)) % 2**32)
    z = oracles.template(fz, fdz, n, TS) + 0.3 * (g.normal(size=n) + 1j * g.normal(size=n))
    got = corr_power(np.array([[f]]), np.array([[fd]]), z[None, :], TS)[0, 0]
    assert got == pytest.approx(oracles.power(z, f, fd, TS), rel=1e-10, abs=1e-12)


def test_matched_template_costs_zero():
    z = oracles.template(13.0, -40.0, LC, TS)
    assert incremental_cost(z, StateVector(13.0, -40.0), TS) < 1e-12


def test_zero_chunk_costs_zero():
    assert incremental_cost(np.zeros(LC, complex), StateVector(5.0, 1.0), TS) == 0.0


def test_half_bin_offset_cost():
    z = oracles.template(1 / (2 * LC * TS), 0.0, LC, TS)
    dc = incremental_cost(z, StateVector(0.0, 0.0), TS)
    assert 0 < dc < 1
    assert dc == pytest.approx(oracles.cost(z, 0.0, 0.0, TS), abs=1e-12)
    assert dc == pytest.approx(0.5943895876641585, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_cost_bounds(seed):
    g = np.random.default_rng(seed)
    z = g.normal(size=LC) + 1j * g.normal(size=LC)
    s = StateVector(g.uniform(-100, 100), g.uniform(-200, 200))
    dc = incremental_cost(z, s, TS)
    assert 0.0 <= dc <= np.sum(np.abs(z) ** 2)


# init / step / run -----------------------------------------------------------


def test_init():
    hyp = PriorHypothesis(7.0, (-5.0, 5.0))
    a = init(hyp, CrpfConfig(1), stream(3))
    b = init(hyp, CrpfConfig(1), stream(3))
    assert a.f[0] == b.f[0] and a.fdot[0] == b.fdot[0]
    ps = init(hyp, CrpfConfig(100), stream(3))
    assert np.all(ps.cost == 0) and np.all(ps.f == 7.0)
    assert np.all((ps.fdot >= -5) & (ps.fdot <= 5))
    big = init(PriorHypothesis(0.0, (0.0, 1.0)), CrpfConfig(100_000), stream(3))
    assert abs(big.fdot.mean() - 0.5) < 0.01


def test_config_validation():
    with pytest.raises(ValueError):
        CrpfConfig(n_particles=0)
    with pytest.raises(ValueError):
        CrpfConfig(q=0)
    assert CrpfConfig.from_dict(CrpfConfig(3, 2).to_dict()) == CrpfConfig(3, 2)


def test_first_step_exhaustive_three_particles():
    mcfg = ModelConfig(dT=4 * TS)
    g = np.random.default_rng(0)
    chunk = g.normal(size=4) + 1j * g.normal(size=4)
    ps = ParticleSet(np.array([1.0, 20.0, -30.0]), np.array([0.0, 5.0, -9.0]), np.array([0.4, 0.1, 0.2]))
    out, est, dc = step(ps, chunk, CrpfConfig(3), mcfg, (0.0, 0.0), stream(0), first=True)
    costs = [c + oracles.cost(chunk, f, fd, TS) for f, fd, c in zip(ps.f, ps.fdot, ps.cost)]
    j = int(np.argmin(costs))
    assert est == StateVector(ps.f[j], ps.fdot[j])
    np.testing.assert_allclose(out.cost, costs, rtol=1e-12)
    assert dc == pytest.approx(costs[j] - ps.cost[j], rel=1e-12)


def test_step_estimate_is_min_cost_particle():
    mcfg = ModelConfig(dT=4 * TS)
    g = np.random.default_rng(1)
    chunk = g.normal(size=4) + 1j * g.normal(size=4)
    ps = ParticleSet(g.uniform(-50, 50, 3), g.uniform(-50, 50, 3), g.uniform(0, 1, 3))
    before = ps.cost.min()
    out, est, _ = step(ps, chunk, CrpfConfig(3), mcfg, (0.0, 0.0), stream(2))
    j = int(np.argmin(out.cost))
    assert est == StateVector(out.f[j], out.fdot[j])
    assert out.cost.min() >= before
    # jitter-free propagation of some input particle
    assert any(
        np.isclose(est.f, f + mcfg.dT * fd) and est.fdot == fd for f, fd in zip(ps.f, ps.fdot)
    )


def test_step_tie_goes_to_lowest_index():
    mcfg = ModelConfig(dT=4 * TS)
    ps = ParticleSet(np.array([1.0, 1.0]), np.array([0.0, 0.0]), np.zeros(2))
    _, est, _ = step(ps, np.zeros(4, complex), CrpfConfig(2), mcfg, (0, 0), stream(0), first=True)
    assert est == StateVector(1.0, 0.0)


def test_step_rejects_wrong_chunk_length():
    ps = ParticleSet(np.zeros(1), np.zeros(1), np.zeros(1))
    with pytest.raises(ValueError):
        step(ps, np.zeros(5, complex), CrpfConfig(1), MCFG, (0, 0), stream(0))


def test_matched_track_zero_cost_trace():
    f0, fdot = -20.0, 37.0
    chunks = chunk_record(lfm_track(f0, fdot), MCFG)[0]
    trace = run(PriorHypothesis(f0, (fdot, fdot)), CrpfConfig(1), chunks, MCFG, rng=stream(0), jitter=(0.0, 0.0))
    assert trace.cum_cost < 1e-10
    expected_f = f0 + np.arange(MCFG.k_total) * MCFG.dT * fdot
    np.testing.assert_allclose(trace.estimates[:, 0], expected_f, atol=1e-12)
    np.testing.assert_allclose(trace.estimates[:, 1], fdot)


def test_single_chunk_trace():
    g = np.random.default_rng(2)
    chunk = (g.normal(size=LC) + 1j * g.normal(size=LC))[None, :]
    hyp = PriorHypothesis(0.0, (-5.0, 5.0))
    trace = run(hyp, CrpfConfig(4), chunk, MCFG, rng=stream(1))
    assert len(trace) == 1
    assert trace.cum_cost == trace.step_costs[0]


def test_run_is_bitwise_deterministic():
    g = np.random.default_rng(3)
    chunks = (g.normal(size=(16, LC)) + 1j * g.normal(size=(16, LC)))
    hyp = PriorHypothesis(10.0, (-80.0, 60.0))
    for n in (1, 7):
        a = run(hyp, CrpfConfig(n), chunks, MCFG, rng=stream(9))
        b = run(hyp, CrpfConfig(n), chunks, MCFG, rng=stream(9))
        assert np.array_equal(a.estimates, b.estimates)
        assert np.array_equal(a.step_costs, b.step_costs)


def test_cum_cost_is_exact_sum():
    t = FilterTrace(np.zeros((3, 2)), np.array([0.1, 0.2, 0.3]))
    assert t.cum_cost == np.sum([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        FilterTrace(np.zeros((3, 2)), np.zeros(2))


def test_filter_rows_do_not_interact():
    """A subset of rows run alone reproduces the same rows of a batch run."""
    g = np.random.default_rng(4)
    k, n, m = 6, 3, 5
    chunks = g.normal(size=(k, LC)) + 1j * g.normal(size=(k, LC))
    draws = FilterDraws.from_rng(stream(6), m, k, n)
    f0 = g.uniform(-80, 80, (m, n))
    fd0 = g.uniform(-100, 100, (m, n))
    sf, sfd = np.full(m, 0.3), np.full(m, 4.0)
    cfg = CrpfConfig(n, 5)
    F, FD, DC = run_filters(f0, fd0, sf, sfd, chunks, MCFG.dT, TS, cfg, draws)
    for r in (0, 3):
        sl = slice(r, r + 1)
        f, fd, dc = run_filters(f0[sl], fd0[sl], sf[sl], sfd[sl], chunks, MCFG.dT, TS, cfg, draws.row(r))
        assert np.array_equal(f[0], F[r]) and np.array_equal(fd[0], FD[r]) and np.array_equal(dc[0], DC[r])


def test_general_path_with_one_survivor_matches_single_particle_path():
    """N particles that are all identical and jitter-free behave like N = 1."""
    g = np.random.default_rng(5)
    k = 8
    chunks = g.normal(size=(k, LC)) + 1j * g.normal(size=(k, LC))
    f0 = np.full((1, 4), 12.0)
    fd0 = np.full((1, 4), -7.0)
    zero = np.zeros(1)
    multi = run_filters(f0, fd0, zero, zero, chunks, MCFG.dT, TS, CrpfConfig(4), FilterDraws.from_rng(stream(1), 1, k, 4))
    single = run_filters(f0[:, :1], fd0[:, :1], zero, zero, chunks, MCFG.dT, TS, CrpfConfig(1), FilterDraws.from_rng(stream(1), 1, k, 1))
    for a, b in zip(multi, single):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
