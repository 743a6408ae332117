"""Distances between empirical spectra and their limits, and rate sweeps."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

from ._parallel import map_ordered
from .ensemble import Distribution, EnsembleSpec, gaussian, sample_matrix
from .limit_law import density, mp_cdf
from .spectra import ComplexSpectrum, eigenvalues, squared_sv_measure

KINDS = ("sv-vs-limit", "mp", "circular")


def kolmogorov_distance(F, G: Callable) -> float:
    """Exact ``sup_x |F(x) - G(x)|`` for an equal-weight empirical ``F`` and continuous ``G``.

    ``F`` is an :class:`EmpiricalCDF` (or anything with sorted ``points``) or a
    raw sample.  The sup is attained at a sample point, approached from one
    side or the other.
    """
    x = np.sort(np.asarray(getattr(F, "points", F), dtype=float).ravel())
    n = x.size
    g = np.asarray(G(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - g)), np.max(np.abs((i - 1) / n - g))))


def disc_radial_cdf(rho):
    rho = np.asarray(rho, dtype=float)
    return np.clip(rho, 0.0, 1.0) ** 2


class CircularLawDistance(NamedTuple):
    radial_ks: float
    angular_ks: float


def circular_law_distance(spec: ComplexSpectrum, fold: bool = True) -> CircularLawDistance:
    """Radial and angular Kolmogorov distances to the uniform law on the unit disc.

    Under the disc law ``|l|`` has CDF ``min(rho^2, 1)`` and ``arg l`` is uniform.
    Spectra of real matrices are closed under conjugation, so by default the
    angle is folded to ``|arg l|`` and compared with uniform on ``[0, pi]``;
    ``fold=False`` compares ``arg l`` with uniform on ``(-pi, pi]``.
    """
    lam = np.asarray(spec.values, dtype=complex)
    if lam.size < 8:
        raise ValueError("need at least 8 eigenvalues")
    radial = kolmogorov_distance(np.abs(lam), disc_radial_cdf)
    ang = np.angle(lam)
    if fold:
        angular = kolmogorov_distance(np.abs(ang), lambda t: np.clip(t / np.pi, 0.0, 1.0))
    else:
        angular = kolmogorov_distance(
            ang, lambda t: np.clip((t + np.pi) / (2 * np.pi), 0.0, 1.0))
    return CircularLawDistance(radial, angular)


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Least-squares slope of ``log y`` against ``log x``; None with fewer than 2 distinct x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if np.unique(x[ok]).size < 2:
        return None
    lx, ly = np.log(x[ok]), np.log(y[ok])
    lx0 = lx - lx.mean()
    return float(np.dot(lx0, ly - ly.mean()) / np.dot(lx0, lx0))


@dataclass
class SweepConfig:
    n_list: Sequence[int]
    p_list: Sequence[float] = (1.0,)
    z_list: Sequence[complex] = (0.5,)
    trials: int = 10
    kind: str = "sv-vs-limit"
    dist: Distribution = field(default_factory=gaussian)
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if len(self.n_list) < 2 or list(self.n_list) != sorted(set(self.n_list)):
            raise ValueError("n_list must be strictly ascending with at least 2 entries")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.kind == "mp" and any(complex(z) != 0 for z in self.z_list):
            raise ValueError("kind 'mp' compares at z = 0 only")


@dataclass
class RateTable:
    rows: List[dict]
    groups: List[dict]
    kappa3: float

    COLUMNS = ("n", "p_n", "re_z", "im_z", "kind", "trials", "mean_distance", "slope_group_id")

    def csv_rows(self):
        for r in self.rows:
            yield tuple(r[c] for c in self.COLUMNS)

    def summary(self) -> dict:
        return {"kappa3": self.kappa3, "groups": self.groups}


def trial_distance(kind: str, spec: EnsembleSpec, z: complex, trial: int,
                   limit=None) -> float:
    """One Monte Carlo distance sample for a sweep cell."""
    M = sample_matrix(spec, trial)
    if kind == "circular":
        return circular_law_distance(eigenvalues(M)).radial_ks
    F = squared_sv_measure(M, z)
    if kind == "mp":
        return kolmogorov_distance(F, mp_cdf)
    return kolmogorov_distance(F, limit.squared_cdf)


def rate_sweep(config: SweepConfig,
               distance_fn: Optional[Callable[[int, float, complex, int], float]] = None
               ) -> RateTable:
    """Average distances per ``(n, p_n, z)`` cell and fit log-log slopes against ``n p_n``.

    ``distance_fn(n, p_n, z, trial)`` replaces the Monte Carlo distance; it
    exists so the regression can be checked on synthetic data.
    """
    limits = {}
    if config.kind == "sv-vs-limit" and distance_fn is None:
        limits = {complex(z): density(z) for z in config.z_list}

    cells = [(n, p, complex(z)) for p in config.p_list for z in config.z_list
             for n in config.n_list]
    rows, groups = [], []
    for gid, (p, z) in enumerate((p, complex(z)) for p in config.p_list for z in config.z_list):
        group_rows = []
        for n in config.n_list:
            spec = EnsembleSpec(n, config.dist, p, config.seed)
            if distance_fn is None:
                fn = lambda t: trial_distance(config.kind, spec, z, t, limits.get(z))  # noqa: E731
            else:
                fn = lambda t: float(distance_fn(n, p, z, t))  # noqa: E731
            d = map_ordered(fn, range(config.trials), config.workers)
            row = {"n": int(n), "p_n": float(p), "re_z": z.real, "im_z": z.imag,
                   "kind": config.kind, "trials": config.trials,
                   "mean_distance": float(np.mean(d)), "slope_group_id": gid}
            rows.append(row)
            group_rows.append(row)
        slope = fit_loglog_slope([r["n"] * r["p_n"] for r in group_rows],
                                 [r["mean_distance"] for r in group_rows])
        groups.append({"slope_group_id": gid, "p_n": float(p), "re_z": z.real, "im_z": z.imag,
                       "kind": config.kind, "slope": slope,
                       "flag": None if slope is not None else "insufficient cells"})
    assert len(rows) == len(cells)
    return RateTable(rows=rows, groups=groups, kappa3=config.dist.kappa3)
