"""Generalized extreme value distribution: G(x) = exp(-[1 + κ(x-ρ)/η]^(-1/κ)).

Sign convention: κ > 0 is the heavy (Fréchet) upper tail, κ < 0 the bounded
(Weibull) one. scipy's ``genextreme`` uses c = -κ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import Degenerate, NotConverged

GUMBEL_EPS = 1e-6
EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class GevParams:
    kappa: float
    rho: float
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("GEV scale eta must be positive")


@dataclass(frozen=True)
class GevFit:
    params: GevParams
    n_samples: int
    neg_log_lik: float
    converged: bool
    ks_stat: float
    init_neg_log_lik: float = math.nan
    iterations: int = 0

    def to_json(self) -> dict:
        p = self.params
        return {
            "kappa": p.kappa,
            "rho": p.rho,
            "eta": p.eta,
            "n": self.n_samples,
            "nll": self.neg_log_lik,
            "ks": self.ks_stat,
        }

    @classmethod
    def from_json(cls, d: dict) -> "GevFit":
        return cls(
            GevParams(d["kappa"], d["rho"], d["eta"]), int(d["n"]), d["nll"], True, d["ks"]
        )


def _reduced(x, p: GevParams):
    return (np.asarray(x, dtype=float) - p.rho) / p.eta


def cdf(x, p: GevParams):
    y = _reduced(x, p)
    if abs(p.kappa) < GUMBEL_EPS:
        out = np.exp(-np.exp(-y))
    else:
        s = 1.0 + p.kappa * y
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inside = np.exp(-np.power(np.where(s > 0, s, 1.0), -1.0 / p.kappa))
        # below the lower endpoint (κ > 0) → 0, above the upper one (κ < 0) → 1
        outside = 0.0 if p.kappa > 0 else 1.0
        out = np.where(s > 0, inside, outside)
    return out if out.ndim else float(out)


def logpdf(x, p: GevParams):
    y = _reduced(x, p)
    if abs(p.kappa) < GUMBEL_EPS:
        out = -math.log(p.eta) - y - np.exp(-y)
    else:
        s = 1.0 + p.kappa * y
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ls = np.log(np.where(s > 0, s, 1.0))
            val = -math.log(p.eta) - (1.0 + 1.0 / p.kappa) * ls - np.exp(-ls / p.kappa)
        out = np.where(s > 0, val, -np.inf)
    return out if np.ndim(out) else float(out)


def pdf(x, p: GevParams):
    out = np.exp(logpdf(x, p))
    return out if np.ndim(out) else float(out)


def quantile(prob, p: GevParams):
    """Inverse CDF: ρ + (η/κ)[(-ln p)^(-κ) - 1], Gumbel limit ρ - η ln(-ln p)."""
    prob = np.asarray(prob, dtype=float)
    if np.any((prob <= 0) | (prob >= 1)):
        raise ValueError("probability must lie strictly inside (0, 1)")
    w = -np.log(prob)
    if abs(p.kappa) < GUMBEL_EPS:
        out = p.rho - p.eta * np.log(w)
    else:
        out = p.rho + p.eta / p.kappa * np.expm1(-p.kappa * np.log(w))
    return out if out.ndim else float(out)


def sample(p: GevParams, n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return quantile(u, p)


def neg_log_lik(p: GevParams, x) -> float:
    ll = logpdf(x, p)
    return float(-np.sum(ll))


def ks_statistic(x, p: GevParams) -> float:
    """sup |F_n - G| for the sample ``x``."""
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    g = np.asarray(cdf(xs, p), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - g), np.max(g - (i - 1) / n)))


def gumbel_moments_init(x) -> GevParams:
    x = np.asarray(x, dtype=float)
    eta = math.sqrt(6.0) * float(np.std(x)) / math.pi
    return GevParams(0.1, float(np.mean(x)) - EULER_GAMMA * eta, eta)


def fit_mle(
    samples,
    init: GevParams | None = None,
    max_iter: int = 2000,
    tol: float = 1e-9,
    strict: bool = True,
) -> GevFit:
    """Maximum-likelihood GEV fit by Nelder-Mead on (κ, log η, ρ).

    The data are standardised before the search and the result mapped back,
    which keeps the simplex well scaled whatever the metric units are. The
    default start is the Gumbel method-of-moments point with κ = 0.1 (κ = 0
    if that start violates the support constraint).
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 50:
        raise ValueError("need a 1-D sample of at least 50 values")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    sd = float(np.std(x))
    if sd == 0.0 or np.ptp(x) == 0.0:
        raise Degenerate("samples have zero spread")
    mu = float(np.mean(x))
    xs = (x - mu) / sd
    n = x.size

    if init is None:
        p0 = gumbel_moments_init(xs)
        if not np.isfinite(neg_log_lik(p0, xs)):
            p0 = GevParams(0.0, p0.rho, p0.eta)
    else:
        p0 = GevParams(init.kappa, (init.rho - mu) / sd, init.eta / sd)

    def objective(theta):
        kappa, log_eta, rho = theta
        if not -50.0 < log_eta < 50.0:
            return np.inf
        return neg_log_lik(GevParams(kappa, rho, math.exp(log_eta)), xs)

    theta0 = np.array([p0.kappa, math.log(p0.eta), p0.rho])
    nll0 = objective(theta0)
    res = optimize.minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        options={"maxiter": max_iter, "maxfev": 4 * max_iter, "xatol": tol, "fatol": tol},
    )
    converged = bool(res.success)
    if not converged and strict:
        raise NotConverged(f"GEV fit stopped after {res.nit} iterations: {res.message}")
    kappa, log_eta, rho = res.x
    params = GevParams(float(kappa), mu + sd * float(rho), sd * math.exp(float(log_eta)))
    shift = n * math.log(sd)
    return GevFit(
        params=params,
        n_samples=n,
        neg_log_lik=float(res.fun) + shift,
        converged=converged,
        ks_stat=ks_statistic(x, params),
        init_neg_log_lik=float(nll0) + shift,
        iterations=int(res.nit),
    )


def threshold(fit: GevFit | GevParams, pfa: float) -> float:
    """V_T = G⁻¹(1 - pfa)."""
    if not 0.0 < pfa < 1.0:
        raise ValueError("pfa must lie strictly inside (0, 1)")
    p = fit.params if isinstance(fit, GevFit) else fit
    return float(quantile(1.0 - pfa, p))


@dataclass(frozen=True)
class Diagnostics:
    """Data behind the probability, quantile, return-level and density plots."""

    mc: np.ndarray
    emp_p: np.ndarray
    model_p: np.ndarray
    emp_q: np.ndarray
    model_q: np.ndarray
    rl_x: np.ndarray
    bin_centers: np.ndarray
    emp_density: np.ndarray
    model_density: np.ndarray

    HEADER = ("mc", "emp_p", "model_p", "emp_q", "model_q", "rl_x")

    def rows(self):
        return zip(self.mc, self.emp_p, self.model_p, self.emp_q, self.model_q, self.rl_x)


def diagnostics(fit: GevFit | GevParams, samples, bins: int | None = None) -> Diagnostics:
    p = fit.params if isinstance(fit, GevFit) else fit
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    mc = np.arange(1, n + 1)
    emp_p = mc / (n + 1)
    if bins is None:
        bins = max(1, min(100, int(round(math.sqrt(n)))))
    hist, edges = np.histogram(xs, bins=bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return Diagnostics(
        mc=mc,
        emp_p=emp_p,
        model_p=np.asarray(cdf(xs, p), dtype=float).reshape(-1),
        emp_q=xs,
        model_q=np.asarray(quantile(emp_p, p), dtype=float).reshape(-1),
        rl_x=np.log(-np.log1p(-emp_p)),
        bin_centers=centers,
        emp_density=hist,
        model_density=np.asarray(pdf(centers, p), dtype=float).reshape(-1),
    )
