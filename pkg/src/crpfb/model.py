"""Piecewise constant-velocity (piecewise-LFM) state model and prior geometry.

The state is (f, fdot): instantaneous frequency at the left edge of a
subinterval and the chirp rate across it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import EmptyPrior, PartitionError


class Condition(enum.Enum):
    COND1 = 1  # close to a single LFM over the whole record
    COND2 = 2  # piecewise LFM, hypothesis-refined chirp range
    COND3 = 3  # too nonlinear: split into blocks first


@dataclass(frozen=True)
class StateVector:
    f: float
    fdot: float

    def __post_init__(self):
        if not (math.isfinite(self.f) and math.isfinite(self.fdot)):
            raise ValueError("state must be finite")


@dataclass(frozen=True)
class ModelConfig:
    T: float = 1.0
    dT: float = 1 / 16
    ts: float = 1 / 512
    fov: tuple[float, float] = (-80.0, 80.0)
    chirp_bounds: tuple[float, float] = (-120.0, 120.0)
    jitter: tuple[float, float] | None = None
    blocks: int | None = None
    r_hi: float = 4.0
    r_lo: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "fov", tuple(float(v) for v in self.fov))
        object.__setattr__(self, "chirp_bounds", tuple(float(v) for v in self.chirp_bounds))
        if self.jitter is not None:
            object.__setattr__(self, "jitter", tuple(float(v) for v in self.jitter))
            if len(self.jitter) != 2 or min(self.jitter) < 0:
                raise ValueError("jitter must be two nonnegative std devs")
        if self.T <= 0 or self.dT <= 0 or self.ts <= 0:
            raise ValueError("T, dT and ts must be positive")
        if not self.fov[0] < self.fov[1]:
            raise ValueError("fov must satisfy f_min < f_max")
        if not self.chirp_bounds[0] <= self.chirp_bounds[1]:
            raise ValueError("chirp_bounds must satisfy lo <= hi")
        if self.blocks is not None and self.blocks < 1:
            raise ValueError("blocks must be >= 1")
        if not 0 < self.r_lo <= self.r_hi:
            raise ValueError("need 0 < r_lo <= r_hi")
        _whole(self.dT / self.ts, "dT must be an integer multiple of ts")
        _whole(self.T / self.ts, "T must be an integer multiple of ts")
        # raises PartitionError when blocks/subintervals do not divide evenly
        self.k_per_block

    @property
    def n_samples(self) -> int:
        return int(round(self.T / self.ts))

    @property
    def chunk_len(self) -> int:
        return int(round(self.dT / self.ts))

    @property
    def n_blocks(self) -> int:
        if self.blocks is not None:
            return self.blocks
        if classify_condition(self) is Condition.COND3:
            return default_blocks(self)
        return 1

    @property
    def block_len(self) -> float:
        return self.T / self.n_blocks

    @property
    def k_per_block(self) -> int:
        k = self.T / (self.n_blocks * self.dT)
        return _whole(k, f"T={self.T} does not split into {self.n_blocks} blocks of whole dT={self.dT} subintervals")

    @property
    def k_total(self) -> int:
        return self.n_blocks * self.k_per_block

    def to_dict(self) -> dict:
        out = {}
        for fld in fields(self):
            v = getattr(self, fld.name)
            out[fld.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {fld.name for fld in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown ModelConfig fields: {sorted(unknown)}")
        return cls(**d)


def _whole(x: float, msg: str) -> int:
    n = int(round(x))
    if n < 1 or abs(x - n) > 1e-9 * max(1.0, abs(x)):
        raise PartitionError(msg)
    return n


@dataclass(frozen=True)
class PriorHypothesis:
    f0: float
    chirp_range: tuple[float, float]
    block_index: int = 0


def propagate(s: StateVector, dT: float, jitter: tuple[float, float], rng: np.random.Generator) -> StateVector:
    n = rng.standard_normal(2)
    f, fd = propagate_arrays(
        np.array([s.f]), np.array([s.fdot]), dT, jitter[0], jitter[1], n[:1], n[1:]
    )
    return StateVector(float(f[0]), float(fd[0]))


def propagate_arrays(f, fdot, dT, sig_f, sig_fd, n_f, n_fd):
    """One constant-velocity step with additive Gaussian jitter (vectorised)."""
    return f + (dT * fdot + sig_f * n_f), fdot + sig_fd * n_fd


def fov_ratio(cfg: ModelConfig) -> float:
    max_chirp = max(abs(cfg.chirp_bounds[0]), abs(cfg.chirp_bounds[1]))
    if max_chirp == 0:
        return math.inf
    return ((cfg.fov[1] - cfg.fov[0]) / cfg.T) / max_chirp


def classify_condition(cfg: ModelConfig) -> Condition:
    r = fov_ratio(cfg)
    if r >= cfg.r_hi:
        return Condition.COND1
    if r < cfg.r_lo:
        return Condition.COND3
    return Condition.COND2


def default_blocks(cfg: ModelConfig) -> int:
    max_chirp = max(abs(cfg.chirp_bounds[0]), abs(cfg.chirp_bounds[1]))
    return max(1, math.ceil(cfg.T * max_chirp / (cfg.fov[1] - cfg.fov[0]) - 1e-12))


def chirp_range_arrays(f0: np.ndarray, cfg: ModelConfig, condition: Condition | None = None):
    """Vectorised :func:`chirp_range_for`; returns (lo, hi) arrays."""
    if condition is None:
        condition = classify_condition(cfg)
    f0 = np.asarray(f0, dtype=float)
    b_lo, b_hi = cfg.chirp_bounds
    if condition is Condition.COND1:
        lo = np.full_like(f0, b_lo)
        hi = np.full_like(f0, b_hi)
    else:
        span = cfg.block_len
        lo = np.maximum((cfg.fov[0] - f0) / span, b_lo)
        hi = np.minimum((cfg.fov[1] - f0) / span, b_hi)
    if np.any(lo > hi):
        raise EmptyPrior("hypothesised chirp range does not meet chirp_bounds")
    return lo, hi


def chirp_range_for(f0: float, cfg: ModelConfig, condition: Condition | None = None) -> tuple[float, float]:
    """Chirp-rate interval implied by an exact initial frequency ``f0``.

    COND1 keeps the configured bounds. Otherwise the chirp must carry ``f0``
    to a point inside the FOV by the end of the (block) interval, so the
    range is [(f_min - f0)/T_p, (f_max - f0)/T_p] clipped to the bounds.
    """
    if not cfg.fov[0] <= f0 <= cfg.fov[1]:
        raise ValueError(f"f0={f0} outside the FOV {cfg.fov}")
    lo, hi = chirp_range_arrays(np.array([f0]), cfg, condition)
    return float(lo[0]), float(hi[0])


def partition_blocks(cfg: ModelConfig) -> list[tuple[float, int]]:
    """(start time, K) for each of the P equal blocks."""
    k = cfg.k_per_block
    return [(p * cfg.block_len, k) for p in range(cfg.n_blocks)]


def default_jitter(lo, hi, dT: float):
    """σ_fd = 5% of the chirp-range width, σ_f = σ_fd·dT."""
    sig_fd = 0.05 * (np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float))
    return sig_fd * dT, sig_fd


def chunk_record(samples: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    """Reshape a record into (P, K, L_c) subinterval chunks."""
    samples = np.asarray(samples)
    if samples.size != cfg.n_samples:
        raise ValueError(f"record has {samples.size} samples, config expects {cfg.n_samples}")
    return samples.reshape(cfg.n_blocks, cfg.k_per_block, cfg.chunk_len)
