"""Smallest singular value tails and coordinate-profile diagnostics.

The tail estimator is plain Monte Carlo over independent matrix draws.  The
profile tools bucket the coordinate moduli of a unit vector and classify it
as compressible, regular or singular, reporting both sides of every
inequality instead of asserting bounds whose constants are unknown.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import stats

from . import rng as _rng
from ._parallel import map_ordered
from .ensemble import Distribution, EnsembleSpec, sample_matrix
from .hermitization import shifted_singular_values

REGULAR = "Regular"
SINGULAR = "Singular"
COMPRESSIBLE = "CompressibleVP"


class ProfileStructureError(ValueError):
    """The vector has fewer than m/2 coordinates in its middle band.

    With ``p_n = 1`` this cannot happen to a vector that passed the
    compressibility test: a short band caps ``||x_sigma||^2`` below ``r^2/2``.
    For ``p_n < 1`` the cap becomes ``r^2/4 + r^2/(4 p_n^2)`` and it can.
    """


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval for ``k`` successes in ``n``."""
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@dataclass
class TailReport:
    spec: EnsembleSpec
    z: complex
    thresholds: np.ndarray
    counts: np.ndarray
    trials: int
    smin: np.ndarray = field(repr=False)

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.trials

    def intervals(self, level: float = 0.95) -> np.ndarray:
        return np.array([clopper_pearson(int(k), self.trials, level) for k in self.counts])

    def rows(self):
        ci = self.intervals()
        for t, k, (lo, hi) in zip(self.thresholds, self.counts, ci):
            yield float(t), int(k), self.trials, int(k) / self.trials, float(lo), float(hi)

    def summary(self) -> dict:
        return {
            "n": self.spec.n, "dist": str(self.spec.dist), "p_n": self.spec.p_n,
            "seed": self.spec.seed, "z": [self.z.real, self.z.imag],
            "trials": self.trials,
            "rows": [dict(zip(("threshold", "count", "trials", "prob", "cp_lower", "cp_upper"), r))
                     for r in self.rows()],
            "min_smin": float(self.smin.min()),
        }


def smin_samples(spec: EnsembleSpec, z: complex, trials: int, workers: int = 1) -> np.ndarray:
    """``s_n(X - zI)`` for trials ``0 .. trials-1``."""
    z = complex(z)
    return np.array(map_ordered(
        lambda t: float(shifted_singular_values(sample_matrix(spec, t), z)[-1]),
        range(trials), workers))


def smin_tail_estimate(spec: EnsembleSpec, z: complex, thresholds, trials: int,
                       workers: int = 1) -> TailReport:
    """Count draws with ``s_n(X - zI) <= t`` for each threshold ``t``."""
    th = np.asarray(thresholds, dtype=float).ravel()
    if trials < 50:
        raise ValueError("need at least 50 trials")
    if th.size == 0 or np.any(th <= 0) or np.any(np.diff(th) <= 0):
        raise ValueError("thresholds must be positive and strictly ascending")
    s = smin_samples(spec, z, trials, workers)
    counts = np.array([(s <= t).sum() for t in th])
    return TailReport(spec=spec, z=complex(z), thresholds=th, counts=counts,
                      trials=trials, smin=s)


def profile_counts(x, Delta: float) -> tuple[Dict[int, int], int]:
    """Bucket counts ``P_k = #{j : |x_j| in (k Delta, (k+1) Delta]}``.

    Returns the non-empty buckets and, separately, the number of zero
    coordinates (which belong to no bucket).  Complex input is reduced to
    moduli first.
    """
    if Delta <= 0:
        raise ValueError("Delta must be positive")
    a = np.abs(np.asarray(x).ravel())
    if not np.all(np.isfinite(a)):
        raise ValueError("x must be finite")
    nz = a[a > 0]
    k = np.ceil(nz / Delta).astype(np.int64) - 1
    # undo rounding in the division so the (k Delta, (k+1) Delta] test is exact
    k = np.where(nz <= k * Delta, k - 1, k)
    k = np.where(nz > (k + 1) * Delta, k + 1, k)
    keys, counts = np.unique(k, return_counts=True)
    return {int(a): int(b) for a, b in zip(keys, counts)}, int(a.size - nz.size)


@dataclass
class ProfileReport:
    x: np.ndarray
    Delta: float
    Pk: Dict[int, int]
    sigma_set: np.ndarray
    classification: str
    sigma_norm: float
    m: float
    J: Optional[np.ndarray] = None
    lhs: Optional[float] = None
    budget: Optional[float] = None
    alt_budget: Optional[float] = None

    def summary(self) -> dict:
        return {"classification": self.classification, "Delta": self.Delta,
                "sigma_size": int(self.sigma_set.size), "sigma_norm": self.sigma_norm,
                "m": self.m, "J_size": None if self.J is None else int(self.J.size),
                "lhs": self.lhs, "budget": self.budget, "alt_budget": self.alt_budget,
                "Pk": {str(k): v for k, v in sorted(self.Pk.items())}}


# Defaults under which the flat vector (1/sqrt n, ..., 1/sqrt n) is a regular
# profile: it needs R >= sqrt(p_n) to sit in sigma, and Q >= pi R sqrt(2 p_n) / r^2
# once Delta = r / (4 pi sqrt n).
DEFAULT_PROFILE = {"R": 1.5, "r": 0.9, "Q": 10.0, "C": 1.0}


def classify_profile(x, R: float = DEFAULT_PROFILE["R"], r: float = DEFAULT_PROFILE["r"],
                     Delta: Optional[float] = None, Q: float = DEFAULT_PROFILE["Q"],
                     p_n: float = 1.0, C: float = DEFAULT_PROFILE["C"]) -> ProfileReport:
    """Compressible / regular / singular classification of a unit vector.

    ``sigma(x)`` collects coordinates with ``|x_j| <= R / sqrt(n p_n)``.  If the
    mass there is below ``r`` the vector is compressible.  Otherwise take the
    band ``J(x) = {j : r/(2 sqrt n) <= |x_j| <= R / sqrt(n p_n)}``, keep its
    ``ceil(m/2)`` largest coordinates with ``m = max(1, r^2 n / (2 R^2 p_n))``,
    and call the profile regular when ``sum_{k>=1} P_k^2 <= Q m^{5/2} Delta``.
    ``Delta`` defaults to ``r / (4 pi sqrt n)``.
    """
    x = np.abs(np.asarray(x).ravel())
    n = x.size
    if not np.all(np.isfinite(x)) or abs(np.linalg.norm(x) - 1.0) > 1e-9:
        raise ValueError("x must be a unit vector")
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    if Delta is None:
        Delta = r / (4.0 * math.pi * math.sqrt(n))
    if not 0 < Delta < r / (2.0 * math.sqrt(n)):
        raise ValueError("need 0 < Delta < r / (2 sqrt n)")
    cutoff = R / math.sqrt(n * p_n)
    sigma = np.flatnonzero(x <= cutoff)
    sigma_norm = float(np.linalg.norm(x[sigma]))
    Pk, _ = profile_counts(x, Delta)
    m = max(1.0, r * r * n / (2.0 * R * R * p_n))
    if sigma_norm < r:
        return ProfileReport(x=x, Delta=Delta, Pk=Pk, sigma_set=sigma,
                             classification=COMPRESSIBLE, sigma_norm=sigma_norm, m=m)
    band = np.flatnonzero((x >= r / (2.0 * math.sqrt(n))) & (x <= cutoff))
    half = math.ceil(m / 2.0)
    if band.size < half:
        raise ProfileStructureError(
            f"|J(x)| = {band.size} < ceil(m/2) = {half}: too few band coordinates")
    J = band[np.argsort(-x[band], kind="stable")[:half]]
    PJ, _ = profile_counts(x[J], Delta)
    lhs = float(sum(v * v for k, v in PJ.items() if k >= 1))
    budget = Q * m ** 2.5 * Delta
    buckets = math.floor((R / math.sqrt(p_n) - r / 2.0) / (math.sqrt(n) * Delta))
    alt = C * Q * m * m / buckets if buckets > 0 else math.inf
    label = REGULAR if lhs <= budget else SINGULAR
    return ProfileReport(x=x, Delta=Delta, Pk=Pk, sigma_set=sigma, classification=label,
                         sigma_norm=sigma_norm, m=m, J=np.sort(J), lhs=lhs,
                         budget=budget, alt_budget=alt)


def small_ball_prob(x, dist: Distribution, Delta: float, v: float = 0.0,
                    p_n: float = 1.0, trials: int = 10_000, seed: int = 0,
                    batch: int = 100_000) -> float:
    """Monte Carlo ``Pr{|sum_j eps_j beta_j x_j - v| < Delta}``."""
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    x = np.asarray(x, dtype=float).ravel()
    gen = _rng.stream(seed, _rng.SMALL_BALL)
    hits, done = 0, 0
    rows = max(1, batch // max(1, x.size))
    while done < trials:
        k = min(rows, trials - done)
        beta = dist.sample(gen, (k, x.size))
        if p_n < 1.0:
            beta = beta * (gen.random((k, x.size)) < p_n)
        hits += int(np.sum(np.abs(beta @ x - v) < Delta))
        done += k
    return hits / trials
