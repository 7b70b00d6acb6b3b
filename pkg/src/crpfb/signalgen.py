"""NLFM test signals, complex generalized Gaussian noise and ground-truth IF.

Two signal families are provided:

``S1``  a(1 + b cos 12πt) · exp(2πj(a1 t + a2 t²/2 + a3 t³/3 + a4 t⁴/4))
``S2``  a · exp(-j b cos 2πt)

Anything else can be plugged in through an :class:`IfCurve`, an object with
``phase(t)`` (cycles), ``frequency(t)`` (Hz) and ``chirp(t)`` (Hz/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
from scipy.special import gammaln

from .rng import stream


class IfCurve(Protocol):
    def phase(self, t: np.ndarray) -> np.ndarray: ...

    def frequency(self, t: np.ndarray) -> np.ndarray: ...

    def chirp(self, t: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ComplexSeries:
    """Uniformly sampled complex baseband record."""

    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D sequence")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.dt


@dataclass(frozen=True)
class SignalSpec:
    """Parameters of one test signal.

    ``b`` is the amplitude-fluctuation depth for S1 and the FM index for S2.
    ``a`` holds the S1 polynomial coefficients (a1..a4); ``None`` means the
    caller will draw them (the harness does so per trial).
    """

    kind: str = "S1"
    T: float = 1.0
    ts: float = 1 / 512
    snr_db: float = 0.0
    b: float = 0.6
    a: tuple[float, float, float, float] | None = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        kind = str(self.kind).upper()
        object.__setattr__(self, "kind", kind)
        if kind not in ("S1", "S2"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.T <= 0 or self.ts <= 0:
            raise ValueError("T and ts must be positive")
        if kind == "S1":
            if not 0.0 <= self.b <= 1.0:
                raise ValueError("S1 fluctuation depth b must lie in [0, 1]")
            if self.a is not None:
                a = tuple(float(v) for v in self.a)
                if len(a) != 4 or any(abs(v) > 20 for v in a):
                    raise ValueError("S1 needs four coefficients in [-20, 20]")
                object.__setattr__(self, "a", a)
        elif not -40.0 <= self.b <= 40.0:
            raise ValueError("S2 FM index b must lie in [-40, 40]")

    @property
    def n_samples(self) -> int:
        return int(round(self.T / self.ts))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "T": self.T,
            "ts": self.ts,
            "snr_db": self.snr_db,
            "b": self.b,
            "a": None if self.a is None else list(self.a),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignalSpec":
        d = dict(d)
        if d.get("a") is not None:
            d["a"] = tuple(d["a"])
        return cls(**d)


@dataclass(frozen=True)
class NoiseSpec:
    """Complex generalized Gaussian noise, density ∝ exp(-(|w|/α)^(2·shape)).

    ``shape = 1`` is the circular complex Gaussian; ``shape < 1`` is heavy
    tailed.
    """

    shape: float = 0.5
    variance: float = 1.0

    def __post_init__(self):
        if self.shape <= 0 or self.variance <= 0:
            raise ValueError("noise shape and variance must be positive")

    def to_dict(self) -> dict:
        return {"shape": self.shape, "variance": self.variance}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(**d)


@dataclass(frozen=True)
class PolyIf:
    """IF of S1: f(t) = a1 + a2 t + a3 t² + a4 t³."""

    a: tuple[float, float, float, float]

    def phase(self, t):
        a1, a2, a3, a4 = self.a
        t = np.asarray(t, dtype=float)
        return t * (a1 + t * (a2 / 2 + t * (a3 / 3 + t * a4 / 4)))

    def frequency(self, t):
        a1, a2, a3, a4 = self.a
        t = np.asarray(t, dtype=float)
        return a1 + t * (a2 + t * (a3 + t * a4))

    def chirp(self, t):
        _, a2, a3, a4 = self.a
        t = np.asarray(t, dtype=float)
        return a2 + t * (2 * a3 + t * 3 * a4)


@dataclass(frozen=True)
class SineIf:
    """IF of S2: f(t) = b sin 2πt."""

    b: float

    def phase(self, t):
        return -self.b * np.cos(2 * np.pi * np.asarray(t, dtype=float)) / (2 * np.pi)

    def frequency(self, t):
        return self.b * np.sin(2 * np.pi * np.asarray(t, dtype=float))

    def chirp(self, t):
        return 2 * np.pi * self.b * np.cos(2 * np.pi * np.asarray(t, dtype=float))


def if_curve(spec: SignalSpec) -> IfCurve:
    if spec.kind == "S1":
        if spec.a is None:
            raise ValueError("S1 coefficients are not set")
        return PolyIf(spec.a)
    return SineIf(spec.b)


def amplitude_from_snr(spec: SignalSpec) -> float:
    """Carrier amplitude ``a`` that gives ``spec.snr_db`` against unit noise power."""
    power = 10.0 ** (spec.snr_db / 10.0)
    if spec.kind == "S1":
        return math.sqrt(power / (1.0 + spec.b**2 / 2.0))
    return math.sqrt(power)


def snr_from_amplitude(spec: SignalSpec, a: float) -> float:
    if spec.kind == "S1":
        return 10.0 * math.log10(a**2 * (1.0 + spec.b**2 / 2.0))
    return 20.0 * math.log10(a)


def true_if(spec: SignalSpec, t: float) -> tuple[float, float]:
    """Instantaneous frequency and chirp rate of the clean signal at time ``t``."""
    if not 0.0 <= t <= spec.T:
        raise ValueError(f"t={t} outside [0, {spec.T}]")
    curve = if_curve(spec)
    return float(curve.frequency(t)), float(curve.chirp(t))


def clean_signal(spec: SignalSpec) -> np.ndarray:
    t = np.arange(spec.n_samples) * spec.ts
    a = amplitude_from_snr(spec)
    if spec.kind == "S1":
        envelope = a * (1.0 + spec.b * np.cos(12 * np.pi * t))
        return envelope * np.exp(2j * np.pi * PolyIf(spec.a).phase(t))
    return a * np.exp(-1j * spec.b * np.cos(2 * np.pi * t))


def sample_cggd(
    noise: NoiseSpec, n: int, seed: int | None = None, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Draw ``n`` circular complex generalized Gaussian samples.

    The phase is uniform; |w|^(2c)/α^(2c) is Gamma(1/c) distributed, which
    is exactly the radial law of the density above. α is set so that
    E|w|² = variance.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if rng is None:
        rng = stream(0 if seed is None else seed)
    c = noise.shape
    log_alpha2 = math.log(noise.variance) + gammaln(1.0 / c) - gammaln(2.0 / c)
    u = rng.standard_gamma(1.0 / c, size=n)
    radius = np.exp(0.5 * log_alpha2) * u ** (1.0 / (2.0 * c))
    phase = rng.uniform(0.0, 2 * np.pi, size=n)
    return radius * np.exp(1j * phase)


def synthesize(
    spec: SignalSpec,
    noise: NoiseSpec | None,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> ComplexSeries:
    """Clean signal plus noise on the grid t = l·ts, l = 0..L-1.

    ``noise=None`` gives the noise-free record.
    """
    s = clean_signal(spec)
    if noise is not None:
        s = s + sample_cggd(noise, s.size, seed=seed, rng=rng)
    return ComplexSeries(0.0, spec.ts, s)


def noise_record(
    n: int, ts: float, noise: NoiseSpec, rng: np.random.Generator
) -> ComplexSeries:
    return ComplexSeries(0.0, ts, sample_cggd(noise, n, rng=rng))


def draw_coefficients(rng: np.random.Generator, bound: float = 20.0) -> tuple[float, ...]:
    return tuple(float(v) for v in rng.uniform(-bound, bound, size=4))


def with_coefficients(spec: SignalSpec, a: Sequence[float]) -> SignalSpec:
    return SignalSpec(spec.kind, spec.T, spec.ts, spec.snr_db, spec.b, tuple(a))
