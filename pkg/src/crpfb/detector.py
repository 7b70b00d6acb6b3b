"""Batch detection: correlation energy along the bank's track vs. a threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import corr_power
from .bank import BankConfig, BankResult, run_bank
from .crpf import FilterTrace
from .model import ModelConfig, chunk_record
from .signalgen import ComplexSeries


@dataclass(frozen=True)
class Decision:
    metric: float
    threshold: float
    declared: bool

    def to_json(self) -> dict:
        return {"psi": self.metric, "vt": self.threshold, "declared": self.declared}


def _samples(z) -> np.ndarray:
    return z.samples if isinstance(z, ComplexSeries) else np.asarray(z, dtype=np.complex128)


def track_metric(samples: np.ndarray, estimates: np.ndarray, mcfg: ModelConfig) -> float:
    chunks = chunk_record(samples, mcfg).reshape(mcfg.k_total, mcfg.chunk_len)
    estimates = np.asarray(estimates, dtype=float)
    if estimates.shape != (mcfg.k_total, 2):
        raise ValueError(f"need {mcfg.k_total} estimates, got {estimates.shape[0]}")
    p = corr_power(estimates[None, :, 0].copy(), estimates[None, :, 1].copy(), chunks, mcfg.ts)
    return float(np.sum(p))


def test_metric(z, result: BankResult | FilterTrace, mcfg: ModelConfig) -> float:
    """Ψ = Σ_k |<z_k, u(x̂_k)>|² over every subinterval of every block."""
    trace = result.trace if isinstance(result, BankResult) else result
    return track_metric(_samples(z), trace.estimates, mcfg)


# keep pytest from collecting the function above when it is imported in tests
test_metric.__test__ = False


def decide(metric: float, threshold: float) -> Decision:
    return Decision(float(metric), float(threshold), bool(metric > threshold))


def detect(z, mcfg: ModelConfig, bank: BankConfig, threshold: float) -> tuple[Decision, BankResult]:
    result = run_bank(z, mcfg, bank)
    return decide(test_metric(z, result, mcfg), threshold), result
