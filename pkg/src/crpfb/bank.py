"""Filter bank: M independent CRPFs with hypothesised exact initial frequencies.

Per block, each filter m gets f0 ~ U(FOV) and the chirp range that f0
implies, runs over the block's K chunks, and the filter with the smallest
cumulated cost supplies the block's estimates. Blocks are independent and
their selected traces are concatenated in time order.

Random inputs come from separate streams per (seed, block, purpose) and are
laid out by filter index, so filter m sees the same numbers whatever M is
and whichever subset of filters is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .crpf import CrpfConfig, FilterDraws, FilterTrace, run_filters
from .model import (
    ModelConfig,
    PriorHypothesis,
    chirp_range_arrays,
    chunk_record,
    classify_condition,
    default_jitter,
)
from .signalgen import ComplexSeries


@dataclass(frozen=True)
class BankConfig:
    m_filters: int = 2000
    crpf: CrpfConfig = field(default_factory=CrpfConfig)
    seed: int = 0

    def __post_init__(self):
        if self.m_filters < 1:
            raise ValueError("m_filters must be >= 1")

    def to_dict(self) -> dict:
        return {"m_filters": self.m_filters, "crpf": self.crpf.to_dict(), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "BankConfig":
        d = dict(d)
        if "crpf" in d:
            d["crpf"] = CrpfConfig.from_dict(d["crpf"])
        return cls(**d)


@dataclass(frozen=True)
class BlockSelection:
    m_min: int
    cum_cost: float
    cum_costs: np.ndarray | None = None
    # (M, K, 2) estimates of every filter, kept only on request
    all_estimates: np.ndarray | None = None


@dataclass(frozen=True)
class BankResult:
    blocks: list[BlockSelection]
    trace: FilterTrace

    @property
    def m_min(self) -> list[int]:
        return [b.m_min for b in self.blocks]

    @property
    def cum_cost(self) -> float:
        return self.trace.cum_cost

    @property
    def all_cum_costs(self) -> np.ndarray | None:
        if any(b.cum_costs is None for b in self.blocks):
            return None
        return np.stack([b.cum_costs for b in self.blocks])

    def to_json(self) -> dict:
        return {
            "m_min": self.m_min,
            "cum_cost": self.cum_cost,
            "estimates": [
                [k, float(f), float(fd)] for k, (f, fd) in enumerate(self.trace.estimates)
            ],
        }


def hypothesis_arrays(mcfg: ModelConfig, bank: BankConfig, block_index: int, m: int | None = None):
    """(f0, lo, hi) arrays for the first ``m`` filters of a block."""
    m = bank.m_filters if m is None else m
    g = rngmod.stream(bank.seed, block_index, rngmod.HYPOTHESES)
    f0 = g.uniform(mcfg.fov[0], mcfg.fov[1], size=m)
    lo, hi = chirp_range_arrays(f0, mcfg, classify_condition(mcfg))
    return f0, lo, hi


def make_hypotheses(mcfg: ModelConfig, bank: BankConfig, block_index: int = 0) -> list[PriorHypothesis]:
    f0, lo, hi = hypothesis_arrays(mcfg, bank, block_index)
    return [
        PriorHypothesis(float(a), (float(b), float(c)), block_index) for a, b, c in zip(f0, lo, hi)
    ]


def filter_draws(bank: BankConfig, block_index: int, m: int, k: int) -> FilterDraws:
    n = bank.crpf.n_particles
    init = rngmod.stream(bank.seed, block_index, rngmod.INIT).random((m, n))
    jitter = rngmod.stream(bank.seed, block_index, rngmod.JITTER).standard_normal((m, k, n, 2))
    resample = None
    if n > 1:
        resample = rngmod.stream(bank.seed, block_index, rngmod.RESAMPLE).random((m, k, n))
    return FilterDraws(init, jitter, resample)


def _jitter(mcfg: ModelConfig, lo, hi):
    if mcfg.jitter is not None:
        return np.full(lo.shape, mcfg.jitter[0]), np.full(lo.shape, mcfg.jitter[1])
    return default_jitter(lo, hi, mcfg.dT)


def run_block(
    chunks: np.ndarray,
    mcfg: ModelConfig,
    bank: BankConfig,
    block_index: int,
    filters: np.ndarray | None = None,
):
    """Run (a subset of) a block's filters; returns (F, FD, dC) rows for ``filters``."""
    k = chunks.shape[0]
    m = bank.m_filters
    f0, lo, hi = hypothesis_arrays(mcfg, bank, block_index)
    draws = filter_draws(bank, block_index, m, k)
    if filters is not None:
        filters = np.asarray(filters)
        f0, lo, hi = f0[filters], lo[filters], hi[filters]
        draws = FilterDraws(
            draws.init[filters],
            draws.jitter[filters],
            None if draws.resample is None else draws.resample[filters],
        )
    n = bank.crpf.n_particles
    sig_f, sig_fd = _jitter(mcfg, lo, hi)
    f_init = np.repeat(f0[:, None], n, axis=1)
    fd_init = lo[:, None] + (hi - lo)[:, None] * draws.init
    return run_filters(f_init, fd_init, sig_f, sig_fd, chunks, mcfg.dT, mcfg.ts, bank.crpf, draws)


def select(cum_costs: np.ndarray) -> int:
    """Index of the minimum cumulated cost; ties go to the lowest index."""
    return int(np.argmin(cum_costs))


def run_bank(
    z: ComplexSeries | np.ndarray,
    mcfg: ModelConfig,
    bank: BankConfig,
    keep_all: bool = False,
) -> BankResult:
    samples = z.samples if isinstance(z, ComplexSeries) else np.asarray(z, dtype=np.complex128)
    blocks = chunk_record(samples, mcfg)
    selections = []
    traces = []
    for p, chunks in enumerate(blocks):
        F, FD, dc = run_block(chunks, mcfg, bank, p)
        cum = np.sum(dc, axis=1)
        m_min = select(cum)
        est = np.stack([F, FD], axis=2)
        selections.append(
            BlockSelection(
                m_min,
                float(cum[m_min]),
                cum if keep_all else None,
                est if keep_all else None,
            )
        )
        traces.append(FilterTrace(est[m_min], dc[m_min]))
    return BankResult(selections, FilterTrace.concat(traces))
