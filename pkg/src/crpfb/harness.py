"""Monte Carlo experiments: threshold calibration, Pd/ROC sweeps, IF RMSE,
parameter sweeps and timing.

Every trial owns random streams keyed by (seed, purpose, trial index), so a
trial's outcome does not depend on which worker runs it or in what order;
results are gathered back in trial order before aggregation.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import gev
from . import rng as rngmod
from .bank import BankConfig, _jitter, filter_draws, hypothesis_arrays, run_bank, select
from .crpf import CrpfConfig, FilterTrace, monolithic, run_filters
from .detector import decide, track_metric
from .errors import NotConverged
from .model import ModelConfig, chunk_record
from .signalgen import (
    IfCurve,
    NoiseSpec,
    SignalSpec,
    clean_signal,
    draw_coefficients,
    if_curve,
    sample_cggd,
    with_coefficients,
)

AXES = ("b", "dT", "q", "M", "N")


@dataclass(frozen=True)
class Scenario:
    """Everything that stays fixed across the trials of one experiment."""

    model: ModelConfig = field(default_factory=ModelConfig)
    bank: BankConfig = field(default_factory=BankConfig)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    signal: SignalSpec = field(default_factory=lambda: SignalSpec("S1", b=0.6, a=None))
    baseline: CrpfConfig = field(default_factory=lambda: CrpfConfig(n_particles=400, q=5))

    def __post_init__(self):
        if self.signal.n_samples != self.model.n_samples:
            raise ValueError(
                f"signal has {self.signal.n_samples} samples but the model expects {self.model.n_samples}"
            )

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "bank": self.bank.to_dict(),
            "noise": self.noise.to_dict(),
            "signal": self.signal.to_dict(),
            "baseline": self.baseline.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        unknown = set(d) - {"model", "bank", "noise", "signal", "baseline"}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        model = ModelConfig.from_dict(d.get("model", {}))
        sig = dict(d.get("signal", {}))
        sig.setdefault("T", model.T)
        sig.setdefault("ts", model.ts)
        sig.setdefault("a", None)
        return cls(
            model=model,
            bank=BankConfig.from_dict(d.get("bank", {})),
            noise=NoiseSpec.from_dict(d.get("noise", {})),
            signal=SignalSpec.from_dict(sig),
            baseline=CrpfConfig.from_dict(d.get("baseline", {"n_particles": 400, "q": 5})),
        )


@dataclass(frozen=True)
class CalibrationResult:
    pfa: float
    v_t_empirical: float
    v_t_gev: float
    gev: gev.GevFit
    m_c: int
    n_fit: int
    metrics: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "pfa": self.pfa,
            "v_t_empirical": self.v_t_empirical,
            "v_t_gev": self.v_t_gev,
            "gev": self.gev.to_json(),
            "m_c": self.m_c,
            "n_fit": self.n_fit,
        }


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    pd: float
    ci_halfwidth: float
    rmse: float
    mean_runtime: float
    threshold: float = math.nan

    HEADER_TAIL = ("pd", "ci", "rmse_hz", "runtime_s", "vt")

    def as_tuple(self):
        return (self.value, self.pd, self.ci_halfwidth, self.rmse, self.mean_runtime, self.threshold)


@dataclass(frozen=True)
class TrialOutcome:
    psi: float
    rmse_hz: float
    runtime_s: float


# ---------------------------------------------------------------- utilities


def default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def map_trials(fn: Callable[[int], object], n: int, workers: int | None = None) -> list:
    """``[fn(0), ..., fn(n-1)]``, spread over a process pool when workers > 1."""
    workers = default_workers() if not workers else workers
    if workers <= 1 or n < 2:
        return [fn(i) for i in range(n)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(n), chunksize=max(1, n // (8 * workers))))


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def empirical_threshold(metrics, pfa: float) -> float:
    """Order statistic at rank ceil((1 - pfa)(m + 1)), clamped to [0, m].

    Rank 0 (pfa = 1) returns -inf, i.e. every metric exceeds it.
    """
    xs = np.sort(np.asarray(metrics, dtype=float))
    m = xs.size
    r = math.ceil(round((1.0 - pfa) * (m + 1), 9))
    r = min(max(r, 0), m)
    if r == 0:
        return -math.inf
    return float(xs[r - 1])


def rmse_eval(curve: IfCurve, trace: FilterTrace, mcfg: ModelConfig) -> float:
    """IF RMSE over the full sample grid.

    Inside subinterval k the estimated IF is extrapolated linearly from its
    left edge, f̂_k + fdot̂_k·(l·ts) for local index l.
    """
    est = np.asarray(trace.estimates, dtype=float)
    if est.shape[0] != mcfg.k_total:
        raise ValueError(f"trace has {est.shape[0]} steps, grid needs {mcfg.k_total}")
    local = np.arange(mcfg.chunk_len) * mcfg.ts
    f_hat = (est[:, :1] + est[:, 1:2] * local).reshape(-1)
    t = np.arange(mcfg.n_samples) * mcfg.ts
    err = np.asarray(curve.frequency(t), dtype=float) - f_hat
    return float(np.sqrt(np.mean(err * err)))


# ------------------------------------------------------------------- trials


def h0_record(scn: Scenario, seed: int, i: int) -> np.ndarray:
    return sample_cggd(scn.noise, scn.model.n_samples, rng=rngmod.stream(seed, rngmod.H0_NOISE, i))


def h0_metric(scn: Scenario, seed: int, i: int) -> float:
    z = h0_record(scn, seed, i)
    bank = replace(scn.bank, seed=rngmod.derive_seed(seed, rngmod.H0_BANK, i))
    result = run_bank(z, scn.model, bank)
    return track_metric(z, result.trace.estimates, scn.model)


def trial_spec(scn: Scenario, snr_db: float, seed: int, i: int) -> SignalSpec:
    spec = replace(scn.signal, snr_db=float(snr_db))
    if spec.kind == "S1" and spec.a is None:
        spec = with_coefficients(spec, draw_coefficients(rngmod.stream(seed, rngmod.H1_COEFS, i)))
    return spec


def h1_record(scn: Scenario, snr_db: float, seed: int, i: int) -> tuple[SignalSpec, np.ndarray]:
    """Trial i's signal-plus-noise record.

    The coefficients and noise of trial i do not depend on the SNR, so the
    rows of an SNR sweep share their random numbers.
    """
    spec = trial_spec(scn, snr_db, seed, i)
    w = sample_cggd(scn.noise, scn.model.n_samples, rng=rngmod.stream(seed, rngmod.H1_NOISE, i))
    return spec, clean_signal(spec) + w


def h1_trial(scn: Scenario, snr_db: float, seed: int, i: int) -> TrialOutcome:
    spec, z = h1_record(scn, snr_db, seed, i)
    bank = replace(scn.bank, seed=rngmod.derive_seed(seed, rngmod.H1_BANK, i))
    t0 = time.perf_counter()
    result = run_bank(z, scn.model, bank)
    psi = track_metric(z, result.trace.estimates, scn.model)
    elapsed = time.perf_counter() - t0
    return TrialOutcome(psi, rmse_eval(if_curve(spec), result.trace, scn.model), elapsed)


def baseline_trial(scn: Scenario, snr_db: float, seed: int, i: int) -> TrialOutcome:
    """Monolithic CRPF on the same record as :func:`h1_trial` ``i``."""
    spec, z = h1_record(scn, snr_db, seed, i)
    t0 = time.perf_counter()
    trace = monolithic(z, scn.model, scn.baseline, seed=rngmod.derive_seed(seed, rngmod.BASELINE, i))
    psi = track_metric(z, trace.estimates, scn.model)
    elapsed = time.perf_counter() - t0
    return TrialOutcome(psi, rmse_eval(if_curve(spec), trace, scn.model), elapsed)


def h0_metrics(scn: Scenario, n: int, seed: int, workers: int | None = None) -> np.ndarray:
    return np.array(map_trials(partial(h0_metric, scn, seed), n, workers))


def h1_outcomes(
    scn: Scenario, snr_db: float, trials: int, seed: int, workers: int | None = None, baseline: bool = False
) -> list[TrialOutcome]:
    fn = baseline_trial if baseline else h1_trial
    return map_trials(partial(fn, scn, snr_db, seed), trials, workers)


# -------------------------------------------------------------- experiments


def calibrate_from_metrics(metrics, pfa: float, n_fit: int) -> CalibrationResult:
    metrics = np.asarray(metrics, dtype=float)
    m_c = metrics.size
    if not m_c >= n_fit >= 50:
        raise ValueError("need m_c >= n_fit >= 50")
    fit = gev.fit_mle(metrics[:n_fit])
    return CalibrationResult(
        pfa=float(pfa),
        v_t_empirical=empirical_threshold(metrics, pfa),
        v_t_gev=gev.threshold(fit, pfa),
        gev=fit,
        m_c=m_c,
        n_fit=n_fit,
        metrics=metrics,
    )


def calibrate(
    scn: Scenario,
    pfa: float,
    m_c: int,
    n_fit: int,
    seed: int,
    workers: int | None = None,
) -> CalibrationResult:
    """Thresholds from m_c noise-only records: rank-based and GEV (first n_fit)."""
    if not m_c >= n_fit >= 50:
        raise ValueError("need m_c >= n_fit >= 50")
    return calibrate_from_metrics(h0_metrics(scn, m_c, seed, workers), pfa, n_fit)


def _row(axis, value, outcomes, threshold, timing) -> SweepRow:
    psi = np.array([o.psi for o in outcomes])
    hits = int(np.sum(psi > threshold))
    n = psi.size
    lo, hi = wilson_interval(hits, n)
    runtime = float(np.mean([o.runtime_s for o in outcomes])) if timing else math.nan
    return SweepRow(
        axis,
        float(value),
        hits / n,
        (hi - lo) / 2,
        float(np.mean([o.rmse_hz for o in outcomes])),
        runtime,
        float(threshold),
    )


def pd_sweep(
    scn: Scenario,
    snr_grid: Sequence[float],
    threshold: float,
    trials: int,
    seed: int,
    workers: int | None = None,
    timing: bool = False,
) -> list[SweepRow]:
    """Detection probability (Ψ > V_T) with Wilson 95% half-width per SNR."""
    return [
        _row("snr_db", snr, h1_outcomes(scn, snr, trials, seed, workers), threshold, timing)
        for snr in snr_grid
    ]


@dataclass(frozen=True)
class RocRow:
    pfa: float
    pd: float
    threshold: float


def roc(
    scn: Scenario,
    snr_db: float,
    pfa_grid: Sequence[float],
    m_c: int,
    trials: int,
    seed: int,
    workers: int | None = None,
) -> list[RocRow]:
    """Pd against Pfa at one SNR; thresholds re-ranked from one H0 set."""
    h0 = h0_metrics(scn, m_c, seed, workers)
    psi = np.array([o.psi for o in h1_outcomes(scn, snr_db, trials, seed, workers)])
    rows = []
    for pfa in sorted(pfa_grid):
        vt = empirical_threshold(h0, pfa)
        rows.append(RocRow(float(pfa), float(np.mean(psi > vt)), vt))
    return rows


@dataclass(frozen=True)
class RmseRow:
    snr_db: float
    method: str
    rmse_hz: float
    rmse_sd_hz: float
    runtime_s: float


def rmse_sweep(
    scn: Scenario,
    snr_grid: Sequence[float],
    trials: int,
    seed: int,
    workers: int | None = None,
    baseline: bool = True,
    timing: bool = False,
) -> list[RmseRow]:
    rows = []
    for snr in snr_grid:
        methods = [("crpfb", False)] + ([("crpf", True)] if baseline else [])
        for name, is_base in methods:
            out = h1_outcomes(scn, snr, trials, seed, workers, baseline=is_base)
            r = np.array([o.rmse_hz for o in out])
            rt = float(np.mean([o.runtime_s for o in out])) if timing else math.nan
            rows.append(RmseRow(float(snr), name, float(r.mean()), float(r.std()), rt))
    return rows


def scenario_variant(scn: Scenario, axis: str, value: float) -> Scenario:
    if axis == "b":
        return replace(scn, signal=replace(scn.signal, b=float(value)))
    if axis == "dT":
        return replace(scn, model=replace(scn.model, dT=float(value)))
    if axis == "q":
        return replace(scn, bank=replace(scn.bank, crpf=replace(scn.bank.crpf, q=int(value))))
    if axis == "M":
        return replace(scn, bank=replace(scn.bank, m_filters=int(value)))
    if axis == "N":
        return replace(scn, bank=replace(scn.bank, crpf=replace(scn.bank.crpf, n_particles=int(value))))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


def param_sweep(
    axis: str,
    values: Sequence[float],
    scn: Scenario,
    snr_db: float,
    trials: int,
    m_c: int,
    pfa: float,
    seed: int,
    workers: int | None = None,
    timing: bool = False,
) -> list[SweepRow]:
    """Pd and IF RMSE per value of one parameter.

    Axes that change the detector (dT, q, M, N) get a threshold re-ranked
    from m_c fresh H0 metrics; the b axis only changes the signal, so one
    threshold serves every row.
    """
    variants = [scenario_variant(scn, axis, v) for v in values]
    shared = None
    if axis == "b":
        shared = empirical_threshold(h0_metrics(scn, m_c, seed, workers), pfa)
    rows = []
    for v, sv in zip(values, variants):
        vt = shared if shared is not None else empirical_threshold(h0_metrics(sv, m_c, seed, workers), pfa)
        rows.append(_row(axis, v, h1_outcomes(sv, snr_db, trials, seed, workers), vt, timing))
    return rows


# ------------------------------------------------------------------- timing


@dataclass(frozen=True)
class BenchReport:
    per_filter_s: float
    bank_serial_s: float
    bank_vectorized_s: float
    baseline_s: float
    m_filters: int
    baseline_particles: int
    trials: int

    @property
    def speedup(self) -> float:
        return self.baseline_s / self.per_filter_s

    def to_json(self) -> dict:
        return {
            "per_filter_s": self.per_filter_s,
            "bank_serial_s": self.bank_serial_s,
            "bank_vectorized_s": self.bank_vectorized_s,
            "baseline_s": self.baseline_s,
            "speedup": self.speedup,
            "m_filters": self.m_filters,
            "baseline_particles": self.baseline_particles,
            "trials": self.trials,
        }


def _filter_inputs(scn: Scenario, chunks: np.ndarray, block: int):
    """Per-filter prior inputs for one block (drawn outside any timed region)."""
    mcfg, bank = scn.model, scn.bank
    f0, lo, hi = hypothesis_arrays(mcfg, bank, block)
    draws = filter_draws(bank, block, bank.m_filters, chunks.shape[0])
    sig_f, sig_fd = _jitter(mcfg, lo, hi)
    n = bank.crpf.n_particles
    f_init = np.repeat(f0[:, None], n, axis=1)
    fd_init = lo[:, None] + (hi - lo)[:, None] * draws.init
    return f_init, fd_init, sig_f, sig_fd, draws


def benchmark(
    scn: Scenario,
    trials: int = 20,
    seed: int = 0,
    snr_db: float = -11.0,
    serial_trials: int = 3,
    threshold: float = 0.0,
) -> BenchReport:
    """Median wall-clock costs on identical records.

    per-filter: one CRPF per block, then Ψ and the threshold compare.
    bank serial: every filter run one after another, plus the argmin.
    bank vectorised: :func:`run_bank` plus Ψ and compare.
    baseline: monolithic CRPF plus Ψ and compare.
    """
    mcfg = scn.model
    per_filter, serial, vectorised, base = [], [], [], []
    # warm-up compiles the kernel and faults in the code paths
    _, z = h1_record(scn, snr_db, seed, 0)
    run_bank(z, mcfg, scn.bank)
    monolithic(z, mcfg, scn.baseline, seed=0)

    for i in range(trials):
        _, z = h1_record(scn, snr_db, seed, i)
        blocks = chunk_record(z, mcfg)
        inputs = [_filter_inputs(scn, blocks[p], p) for p in range(mcfg.n_blocks)]

        t0 = time.perf_counter()
        est = []
        for p, (f_init, fd_init, sf, sfd, draws) in enumerate(inputs):
            F, FD, _ = run_filters(
                f_init[:1], fd_init[:1], sf[:1], sfd[:1], blocks[p], mcfg.dT, mcfg.ts,
                scn.bank.crpf, draws.row(0),
            )
            est.append(np.stack([F[0], FD[0]], axis=1))
        decide(track_metric(z, np.concatenate(est), mcfg), threshold)
        per_filter.append(time.perf_counter() - t0)

        t0 = time.perf_counter()
        bank = replace(scn.bank, seed=i)
        result = run_bank(z, mcfg, bank)
        decide(track_metric(z, result.trace.estimates, mcfg), threshold)
        vectorised.append(time.perf_counter() - t0)

        t0 = time.perf_counter()
        trace = monolithic(z, mcfg, scn.baseline, seed=i)
        decide(track_metric(z, trace.estimates, mcfg), threshold)
        base.append(time.perf_counter() - t0)

        if i < serial_trials:
            t0 = time.perf_counter()
            for p, (f_init, fd_init, sf, sfd, draws) in enumerate(inputs):
                costs = np.empty(scn.bank.m_filters)
                for m in range(scn.bank.m_filters):
                    sl = slice(m, m + 1)
                    _, _, dc = run_filters(
                        f_init[sl], fd_init[sl], sf[sl], sfd[sl], blocks[p], mcfg.dT, mcfg.ts,
                        scn.bank.crpf, draws.row(m),
                    )
                    costs[m] = np.sum(dc)
                select(costs)
            serial.append(time.perf_counter() - t0)

    return BenchReport(
        per_filter_s=float(np.median(per_filter)),
        bank_serial_s=float(np.median(serial)) if serial else math.nan,
        bank_vectorized_s=float(np.median(vectorised)),
        baseline_s=float(np.median(base)),
        m_filters=scn.bank.m_filters,
        baseline_particles=scn.baseline.n_particles,
        trials=trials,
    )


@dataclass(frozen=True)
class ThresholdRow:
    pfa: float
    n_fit: int
    vt_gev_mean: float
    vt_gev_sd: float
    vt_empirical: float
    failed_fits: int


def threshold_vs_nfit(
    metrics,
    pfa_grid: Sequence[float],
    n_fit_grid: Sequence[int],
    repeats: int,
    seed: int,
) -> list[ThresholdRow]:
    """Mean GEV threshold over ``repeats`` random n_fit-subsets of one H0 pool,
    next to the rank threshold of the whole pool."""
    metrics = np.asarray(metrics, dtype=float)
    rows = []
    for n_fit in n_fit_grid:
        g = rngmod.stream(seed, rngmod.H0_NOISE, 1_000_000 + int(n_fit))
        fits = []
        failed = 0
        for _ in range(repeats):
            sub = g.choice(metrics.size, size=int(n_fit), replace=False)
            try:
                fits.append(gev.fit_mle(metrics[sub]).params)
            except NotConverged:
                failed += 1
        for pfa in pfa_grid:
            vts = np.array([gev.threshold(p, pfa) for p in fits])
            rows.append(
                ThresholdRow(
                    float(pfa),
                    int(n_fit),
                    float(vts.mean()) if vts.size else math.nan,
                    float(vts.std()) if vts.size else math.nan,
                    empirical_threshold(metrics, pfa),
                    failed,
                )
            )
    return rows


@dataclass(frozen=True)
class RmseParamRow:
    value: float
    rmse_hz: float
    rmse_sd_hz: float


def rmse_vs_param(
    axis: str,
    values: Sequence[float],
    scn: Scenario,
    snr_db: float,
    trials: int,
    seed: int,
    workers: int | None = None,
) -> list[RmseParamRow]:
    rows = []
    for v in values:
        out = h1_outcomes(scenario_variant(scn, axis, v), snr_db, trials, seed, workers)
        r = np.array([o.rmse_hz for o in out])
        rows.append(RmseParamRow(float(v), float(r.mean()), float(r.std())))
    return rows
