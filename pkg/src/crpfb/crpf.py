"""Cost-reference particle filter over one block of subinterval chunks.

Particles carry a state (f, fdot) and a cumulative cost. Each step after
the first resamples with weights ∝ cost^(-q), propagates through the
constant-velocity model and adds the incremental cost

    ΔC = ||z_k||² - |<z_k, u(x)>|²,

u(x) being the unit-norm LFM template of the state. The estimate at each
step is the particle with the smallest cumulative cost.

The initial particle set describes the left edge of the first chunk, so
the first step only scores it; propagation happens between chunks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from ._kernels import chunk_energy, corr_power
from .model import (
    ModelConfig,
    PriorHypothesis,
    StateVector,
    chunk_record,
    default_jitter,
    propagate_arrays,
)


@dataclass(frozen=True)
class CrpfConfig:
    n_particles: int = 1
    q: int = 5
    cost_floor: float = 1e-12

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.q < 1 or int(self.q) != self.q:
            raise ValueError("q must be a positive integer")
        if not self.cost_floor > 0:
            raise ValueError("cost_floor must be positive")

    def to_dict(self) -> dict:
        return {"n_particles": self.n_particles, "q": self.q, "cost_floor": self.cost_floor}

    @classmethod
    def from_dict(cls, d: dict) -> "CrpfConfig":
        return cls(**d)


@dataclass(frozen=True)
class Particle:
    state: StateVector
    cost: float


@dataclass
class ParticleSet:
    f: np.ndarray
    fdot: np.ndarray
    cost: np.ndarray

    def __len__(self) -> int:
        return self.f.size

    def particles(self) -> list[Particle]:
        return [
            Particle(StateVector(float(f), float(fd)), float(c))
            for f, fd, c in zip(self.f, self.fdot, self.cost)
        ]


@dataclass(frozen=True)
class FilterTrace:
    """Per-step estimates (K, 2) as [f, fdot] rows and the selected ΔC per step."""

    estimates: np.ndarray
    step_costs: np.ndarray

    def __post_init__(self):
        if len(self.estimates) != len(self.step_costs):
            raise ValueError("estimates and step_costs differ in length")

    @property
    def cum_cost(self) -> float:
        return float(np.sum(self.step_costs))

    @property
    def states(self) -> list[StateVector]:
        return [StateVector(float(f), float(fd)) for f, fd in self.estimates]

    def __len__(self) -> int:
        return len(self.step_costs)

    @classmethod
    def concat(cls, traces: list["FilterTrace"]) -> "FilterTrace":
        return cls(
            np.concatenate([t.estimates for t in traces]),
            np.concatenate([t.step_costs for t in traces]),
        )


@dataclass(frozen=True)
class FilterDraws:
    """Random inputs for M filters laid out by filter index.

    ``init`` (M, N) uniforms for the initial chirp rates, ``jitter``
    (M, K, N, 2) standard normals for the transition into chunk k (row 0 is
    unused), ``resample`` (M, K, N) uniforms or ``None`` when N = 1.
    """

    init: np.ndarray
    jitter: np.ndarray
    resample: np.ndarray | None

    @classmethod
    def from_rng(cls, rng: np.random.Generator, m: int, k: int, n: int) -> "FilterDraws":
        init = rng.random((m, n))
        jitter = rng.standard_normal((m, k, n, 2))
        resample = rng.random((m, k, n)) if n > 1 else None
        return cls(init, jitter, resample)

    def row(self, m: int) -> "FilterDraws":
        sl = slice(m, m + 1)
        return FilterDraws(
            self.init[sl], self.jitter[sl], None if self.resample is None else self.resample[sl]
        )


def weights(costs, q: int, floor: float = 1e-12) -> np.ndarray:
    """Resampling probabilities μ_i = c_i^(-q) / Σ c_g^(-q) along the last axis.

    Costs are clamped to ``floor`` first; the computation is done in the log
    domain so large q cannot overflow.
    """
    c = np.maximum(np.asarray(costs, dtype=float), floor)
    logw = -q * np.log(c)
    logw -= np.max(logw, axis=-1, keepdims=True)
    w = np.exp(logw)
    return w / np.sum(w, axis=-1, keepdims=True)


def resample_indices(costs: np.ndarray, q: int, floor: float, u: np.ndarray) -> np.ndarray:
    """Multinomial ancestor indices (inverse CDF of uniforms ``u``), row-wise."""
    w = weights(costs, q, floor)
    cdf = np.cumsum(w, axis=-1)
    m, n = w.shape
    if m * n * n <= 4_000_000:
        idx = np.sum(cdf[:, None, :] <= u[:, :, None], axis=-1)
    else:
        idx = np.stack([np.searchsorted(cdf[i], u[i], side="right") for i in range(m)])
    return np.minimum(idx, n - 1)


def delta_cost(energy, power):
    # Cauchy-Schwarz puts power in [0, energy]; clamp the rounding overshoot.
    return np.maximum(energy - power, 0.0)


def incremental_cost(chunk, state: StateVector, ts: float) -> float:
    chunk = np.asarray(chunk, dtype=np.complex128)
    p = corr_power(np.array([[state.f]]), np.array([[state.fdot]]), chunk[None, :], ts)
    return float(delta_cost(chunk_energy(chunk), p[0, 0]))


def init(hyp: PriorHypothesis, cfg: CrpfConfig, rng: np.random.Generator) -> ParticleSet:
    n = cfg.n_particles
    lo, hi = hyp.chirp_range
    u = rng.random(n)
    return ParticleSet(np.full(n, float(hyp.f0)), lo + (hi - lo) * u, np.zeros(n))


def resample(ps: ParticleSet, q: int, rng: np.random.Generator, floor: float = 1e-12) -> ParticleSet:
    n = len(ps)
    if n == 1:
        return ps
    idx = resample_indices(ps.cost[None, :], q, floor, rng.random((1, n)))[0]
    return ParticleSet(ps.f[idx], ps.fdot[idx], ps.cost[idx])


def step(
    ps: ParticleSet,
    chunk: np.ndarray,
    cfg: CrpfConfig,
    mcfg: ModelConfig,
    jitter: tuple[float, float],
    rng: np.random.Generator,
    first: bool = False,
) -> tuple[ParticleSet, StateVector, float]:
    """Resample, propagate and score one chunk.

    ``first=True`` scores the initial set as-is (no resampling or motion).
    Returns the new set, the minimum-cumulative-cost state and that
    particle's incremental cost.
    """
    chunk = np.asarray(chunk, dtype=np.complex128)
    if chunk.size != mcfg.chunk_len:
        raise ValueError(f"chunk has {chunk.size} samples, expected {mcfg.chunk_len}")
    if not first:
        ps = resample(ps, cfg.q, rng, cfg.cost_floor)
        n = rng.standard_normal((len(ps), 2))
        f, fd = propagate_arrays(ps.f, ps.fdot, mcfg.dT, jitter[0], jitter[1], n[:, 0], n[:, 1])
        ps = ParticleSet(f, fd, ps.cost)
    p = corr_power(ps.f[:, None], ps.fdot[:, None], chunk[None, :], mcfg.ts)[:, 0]
    dc = delta_cost(chunk_energy(chunk), p)
    ps = ParticleSet(ps.f, ps.fdot, ps.cost + dc)
    j = int(np.argmin(ps.cost))
    return ps, StateVector(float(ps.f[j]), float(ps.fdot[j])), float(dc[j])


def run_filters(
    f_init: np.ndarray,
    fdot_init: np.ndarray,
    sig_f: np.ndarray,
    sig_fd: np.ndarray,
    chunks: np.ndarray,
    dT: float,
    ts: float,
    cfg: CrpfConfig,
    draws: FilterDraws,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run M independent filters over the same K chunks.

    ``f_init``/``fdot_init`` are (M, N), jitter std devs are (M,), ``chunks``
    is (K, L). Returns (M, K) arrays of estimated f, estimated fdot and the
    selected incremental cost.

    Every operation is elementwise along the filter axis, so row m depends
    only on row m of the inputs: running any subset of filters separately
    gives bit-identical rows.
    """
    m, n = f_init.shape
    k_steps = chunks.shape[0]
    energy = chunk_energy(chunks)
    sig_f = np.asarray(sig_f, dtype=float)[:, None]
    sig_fd = np.asarray(sig_fd, dtype=float)[:, None]

    if n == 1:
        # no resampling, so each trajectory is fixed before seeing data
        F = np.empty((m, k_steps))
        FD = np.empty((m, k_steps))
        f, fd = f_init, fdot_init
        F[:, 0], FD[:, 0] = f[:, 0], fd[:, 0]
        for k in range(1, k_steps):
            f, fd = propagate_arrays(
                f, fd, dT, sig_f, sig_fd, draws.jitter[:, k, :, 0], draws.jitter[:, k, :, 1]
            )
            F[:, k], FD[:, k] = f[:, 0], fd[:, 0]
        dc = delta_cost(energy[None, :], corr_power(F, FD, chunks, ts))
        return F, FD, dc

    est_f = np.empty((m, k_steps))
    est_fd = np.empty((m, k_steps))
    est_dc = np.empty((m, k_steps))
    f, fd = f_init, fdot_init
    cost = np.zeros((m, n))
    rows = np.arange(m)
    for k in range(k_steps):
        if k > 0:
            idx = resample_indices(cost, cfg.q, cfg.cost_floor, draws.resample[:, k, :])
            f = np.take_along_axis(f, idx, axis=1)
            fd = np.take_along_axis(fd, idx, axis=1)
            cost = np.take_along_axis(cost, idx, axis=1)
            f, fd = propagate_arrays(
                f, fd, dT, sig_f, sig_fd, draws.jitter[:, k, :, 0], draws.jitter[:, k, :, 1]
            )
        p = corr_power(f.reshape(-1, 1), fd.reshape(-1, 1), chunks[k : k + 1], ts).reshape(m, n)
        dc = delta_cost(energy[k], p)
        cost = cost + dc
        j = np.argmin(cost, axis=1)
        est_f[:, k] = f[rows, j]
        est_fd[:, k] = fd[rows, j]
        est_dc[:, k] = dc[rows, j]
    return est_f, est_fd, est_dc


def run(
    hyp: PriorHypothesis,
    cfg: CrpfConfig,
    chunks: np.ndarray,
    mcfg: ModelConfig,
    rng: np.random.Generator | None = None,
    draws: FilterDraws | None = None,
    jitter: tuple[float, float] | None = None,
) -> FilterTrace:
    """Run one filter over a block's K chunks (shape (K, L))."""
    chunks = np.asarray(chunks, dtype=np.complex128)
    if chunks.ndim != 2 or chunks.shape[0] < 1 or chunks.shape[1] != mcfg.chunk_len:
        raise ValueError("chunks must be (K, chunk_len) with K >= 1")
    n = cfg.n_particles
    if draws is None:
        if rng is None:
            raise ValueError("need either rng or draws")
        draws = FilterDraws.from_rng(rng, 1, chunks.shape[0], n)
    lo, hi = hyp.chirp_range
    if jitter is None:
        jitter = mcfg.jitter
    if jitter is None:
        sf, sfd = default_jitter(lo, hi, mcfg.dT)
        jitter = (float(sf), float(sfd))
    f0 = np.full((1, n), float(hyp.f0))
    fd0 = lo + (hi - lo) * draws.init
    F, FD, dc = run_filters(
        f0, fd0, np.array([jitter[0]]), np.array([jitter[1]]), chunks, mcfg.dT, mcfg.ts, cfg, draws
    )
    return FilterTrace(np.stack([F[0], FD[0]], axis=1), dc[0])


def monolithic(
    samples: np.ndarray,
    mcfg: ModelConfig,
    cfg: CrpfConfig = CrpfConfig(n_particles=400, q=5),
    seed: int = 0,
) -> FilterTrace:
    """Baseline single CRPF with an FOV-wide prior over the whole record.

    Particles start at f ~ U(FOV), fdot ~ U(chirp_bounds) and run through
    all subintervals as one chain (no blocks, no hypothesis bank).
    """
    chunks = chunk_record(samples, mcfg).reshape(mcfg.k_total, mcfg.chunk_len)
    n = cfg.n_particles
    g = rngmod.stream(seed, rngmod.BASELINE)
    f0 = g.uniform(mcfg.fov[0], mcfg.fov[1], size=(1, n))
    lo, hi = mcfg.chirp_bounds
    draws = FilterDraws.from_rng(g, 1, mcfg.k_total, n)
    fd0 = lo + (hi - lo) * draws.init
    if mcfg.jitter is not None:
        sf, sfd = mcfg.jitter
    else:
        sf, sfd = default_jitter(lo, hi, mcfg.dT)
    F, FD, dc = run_filters(
        f0, fd0, np.array([float(sf)]), np.array([float(sfd)]), chunks, mcfg.dT, mcfg.ts, cfg, draws
    )
    return FilterTrace(np.stack([F[0], FD[0]], axis=1), dc[0])
