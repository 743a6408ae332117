"""Logarithmic potentials: empirical, limiting and the uniform-disc closed form.

For a matrix ``X`` the potential of its eigenvalue measure at ``z`` is

    U(z) = -(1/n) log|det(X - zI)| = -(1/n) sum_j log s_j(X - zI),

which is what makes singular values (rather than eigenvalues) usable here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import rng as _rng
from ._parallel import map_ordered
from .ensemble import EnsembleSpec, disc_point, sample_disc, sample_matrix, shift_matrix
from .hermitization import shifted_singular_values
from .limit_law import LimitSolution
from .spectra import ComplexSpectrum, eigenvalues

BESSEL_MAX_ARG = 30.0
_BESSEL_MAX_TERMS = 120


class AllTrialsExcluded(RuntimeError):
    pass


def smoothing_radius(n: int, c: float = 1.0, exponent: float = 1.0 / 8.0) -> float:
    """Default smoothing schedule ``r(n) = c n^{-1/8}``."""
    return c * n ** (-exponent)


def disc_potential(z):
    """Potential of the uniform law on the unit disc.

    ``(1 - |z|^2)/2`` inside the disc and ``-log|z|`` outside.
    """
    a = np.abs(np.asarray(z, dtype=complex))
    inside = a <= 1.0
    out = np.where(inside, 0.5 * (1.0 - a * a), -np.log(np.where(inside, 1.0, a)))
    return float(out) if out.ndim == 0 else out


@dataclass
class PotentialEstimate:
    value: float
    trials: int
    used: int
    excluded: int
    min_sn: float
    per_trial: np.ndarray = field(repr=False)
    kept: np.ndarray = field(repr=False)

    def diagnostics(self) -> dict:
        return {"value": self.value, "trials": self.trials, "used": self.used,
                "excluded": self.excluded, "min_sn": self.min_sn}


def _disc_points(seed: int, trial: int, count: int) -> list:
    gen = _rng.stream(seed, _rng.XI, trial)
    return [sample_disc(gen) for _ in range(count)]


def empirical_potential(source: Union[EnsembleSpec, np.ndarray], z: complex,
                        r: float = 0.0, trials: int = 1, truncate: bool = False,
                        seed: Optional[int] = None, xi_draws: int = 1,
                        workers: int = 1) -> PotentialEstimate:
    """Monte Carlo estimate of ``-(1/n) E sum_j log s_j(X - zI - r xi I)``.

    ``source`` is an :class:`EnsembleSpec` (trial ``t`` uses its own matrix) or
    a fixed square array reused by every trial.  ``xi_draws`` smoothing points
    are averaged per trial; the first equals :func:`ensemble.disc_point`.

    With ``truncate`` a trial is dropped when ``s_n < n^-3`` or
    ``s_1 > 4 + |z|``; the drop count is reported and the average is over
    the kept trials only.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if r < 0:
        raise ValueError("r must be non-negative")
    if xi_draws < 1:
        raise ValueError("xi_draws must be >= 1")
    z = complex(z)
    if isinstance(source, EnsembleSpec):
        n = source.n
        seed = source.seed if seed is None else seed
        get = lambda t: sample_matrix(source, t)  # noqa: E731
    else:
        fixed = np.asarray(source)
        if fixed.ndim != 2 or fixed.shape[0] != fixed.shape[1]:
            raise ValueError("fixed source must be a square matrix")
        n = fixed.shape[0]
        seed = 0 if seed is None else seed
        get = lambda t: fixed  # noqa: E731

    def one(t):
        M = get(t)
        shifts = [z] if r == 0 else [z + r * xi for xi in _disc_points(seed, t, xi_draws)]
        vals, smin, smax = [], math.inf, 0.0
        for w in shifts:
            s = shifted_singular_values(M, w)
            smin, smax = min(smin, float(s[-1])), max(smax, float(s[0]))
            with np.errstate(divide="ignore"):
                vals.append(-float(np.mean(np.log(s))))
        return float(np.mean(vals)), smin, smax

    res = map_ordered(one, range(trials), workers)
    per = np.array([v for v, _, _ in res])
    smin = np.array([a for _, a, _ in res])
    smax = np.array([b for _, _, b in res])
    kept = np.ones(trials, dtype=bool)
    if truncate:
        kept = (smin >= float(n) ** -3) & (smax <= 4.0 + abs(z))
    if not np.any(kept):
        raise AllTrialsExcluded(f"all {trials} trials violated the truncation gates")
    return PotentialEstimate(value=float(np.mean(per[kept])), trials=trials,
                             used=int(kept.sum()), excluded=int((~kept).sum()),
                             min_sn=float(smin.min()), per_trial=per, kept=kept)


def limit_potential(sol: LimitSolution) -> float:
    """``-2 int_0^inf log(y) p~(y, z) dy`` from a solved limit density.

    The log singularity at 0 is integrated exactly on the first cell,
    ``int_0^h log y dy = h (log h - 1)``, with the density frozen there.
    """
    x, p = sol.x_grid, sol.density
    pos = x > 0
    y, q = x[pos], p[pos]
    h = y[0]
    at_zero = p[np.argmin(np.abs(x))] if np.any(x == 0) else q[0]
    patch = 0.5 * (at_zero + q[0]) * h * (math.log(h) - 1.0)
    f = np.log(y) * q
    body = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(y)))
    return -2.0 * (patch + body)


def circular_mean(U: Callable, z0: complex, rho: float, m_points: int = 64) -> float:
    """Average of ``U`` over the circle ``|z - z0| = rho`` by the periodic trapezoid rule."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if m_points < 16:
        raise ValueError("m_points must be at least 16")
    pts = complex(z0) + rho * np.exp(2j * np.pi * np.arange(m_points) / m_points)
    try:
        vals = np.asarray(U(pts), dtype=float)
        if vals.shape != pts.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(U(p)) for p in pts])
    return float(np.mean(vals))


def empirical_char(spectrum: Union[ComplexSpectrum, np.ndarray], t: float, v: float) -> complex:
    """``(1/n) sum_j exp(i t Re l_j + i v Im l_j)``."""
    lam = spectrum.values if isinstance(spectrum, ComplexSpectrum) else np.asarray(spectrum)
    lam = np.asarray(lam, dtype=complex)
    return complex(np.mean(np.exp(1j * (t * lam.real + v * lam.imag))))


def bessel_ratio(rho: float) -> float:
    """``2 J_1(rho) / rho`` from its power series, for ``0 <= rho <= 30``.

    Terms are summed until they stop mattering.  Near the top of the domain
    the alternating series loses about six digits to cancellation.
    """
    rho = float(rho)
    if rho < 0 or rho > BESSEL_MAX_ARG:
        raise ValueError(f"series is only trusted on [0, {BESSEL_MAX_ARG}], got {rho}")
    q = -(rho * rho) / 4.0
    term, total = 1.0, 1.0
    for k in range(1, _BESSEL_MAX_TERMS):
        term *= q / (k * (k + 1))
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)) and k > rho:
            break
    return total


def disc_char(t: float, v: float, r: float) -> float:
    """Characteristic function ``h(rt, rv)`` of ``r xi`` with ``xi`` uniform on the disc."""
    if r < 0:
        raise ValueError("r must be non-negative")
    return bessel_ratio(r * math.hypot(t, v))


@dataclass
class CharCheck:
    t: float
    v: float
    r: float
    draws: int
    f_n: complex
    f_smoothed: complex
    h: float

    @property
    def error(self) -> float:
        return abs(self.f_smoothed - self.f_n * self.h)

    def summary(self) -> dict:
        return {"t": self.t, "v": self.v, "r": self.r, "draws": self.draws,
                "f_n": [self.f_n.real, self.f_n.imag],
                "f_smoothed": [self.f_smoothed.real, self.f_smoothed.imag],
                "h": self.h, "error": self.error}


def smoothed_char(M: np.ndarray, t: float, v: float, r: float, draws: int = 200,
                  seed: int = 0, workers: int = 1) -> CharCheck:
    """Compare the smoothed characteristic function with ``f_n h(rt, rv)``.

    Draw ``d`` recomputes the spectrum of ``M + r xi_d I`` and evaluates its
    characteristic function; the average over draws estimates the smoothed one.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    if r < 0:
        raise ValueError("r must be non-negative")
    f0 = empirical_char(eigenvalues(M), t, v)
    h = disc_char(t, v, r)
    vals = map_ordered(
        lambda d: empirical_char(eigenvalues(shift_matrix(M, -r * disc_point(seed, d))), t, v),
        range(draws), workers)
    return CharCheck(t=float(t), v=float(v), r=float(r), draws=draws, f_n=f0,
                     f_smoothed=complex(np.mean(vals)), h=h)


@dataclass(frozen=True)
class PotentialGrid:
    re: np.ndarray
    im: np.ndarray
    values: np.ndarray
    kind: str
    flagged: Optional[np.ndarray] = None

    def rows(self):
        R, I = np.meshgrid(self.re, self.im, indexing="xy")
        for a, b, u in zip(R.ravel(), I.ravel(), self.values.ravel()):
            yield float(a), float(b), float(u), self.kind


def potential_grid(U: Callable[[complex], float], re, im, kind: str) -> PotentialGrid:
    """Evaluate ``U`` on the rectangular grid ``re x im`` (rows follow ``im``)."""
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    vals = np.array([[float(U(complex(a, b))) for a in re] for b in im])
    return PotentialGrid(re=re, im=im, values=vals, kind=kind,
                         flagged=~np.isfinite(vals))
