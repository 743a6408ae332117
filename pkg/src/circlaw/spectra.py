"""Eigenvalues, singular values and the empirical measures built from them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensemble import disc_point
from .hermitization import shifted_singular_values


class EigenSolverError(RuntimeError):
    """The dense eigensolver did not converge."""


@dataclass(frozen=True)
class ComplexSpectrum:
    values: np.ndarray
    n: int
    z_shift: Optional[complex] = None
    r_smooth: float = 0.0

    def __post_init__(self):
        if len(self.values) != self.n:
            raise ValueError("spectrum length does not match n")


@dataclass(frozen=True)
class EmpiricalCDF:
    """Equal-weight empirical CDF, right-continuous: ``F(x) = #{p <= x} / n``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float).ravel())
        if pts.size == 0 or not np.all(np.isfinite(pts)):
            raise ValueError("an empirical CDF needs a non-empty finite sample")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.size

    def __call__(self, x):
        return np.searchsorted(self.points, x, side="right") / self.n


@dataclass(frozen=True)
class SymmetrizedCDF:
    """``F~(x) = (1 + sgn(x) F(x^2)) / 2`` for a CDF ``F`` on ``[0, inf)``.

    ``sgn(0) = 0``, so ``F~(0) = 1/2`` exactly.  As a measure this splits each
    atom at ``s^2`` into half-atoms at ``+s`` and ``-s``; those points are in
    :attr:`points`.
    """

    base: EmpiricalCDF

    @property
    def points(self) -> np.ndarray:
        s = np.sqrt(self.base.points)
        return np.concatenate([-s[::-1], s])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (1.0 + np.sign(x) * self.base(x * x))


def symmetrize_cdf(F: EmpiricalCDF) -> SymmetrizedCDF:
    if F.points[0] < 0:
        raise ValueError("symmetrization needs a CDF supported on [0, inf)")
    return SymmetrizedCDF(F)


def eigenvalues(M: np.ndarray, z_shift: Optional[complex] = None,
                r_smooth: float = 0.0) -> ComplexSpectrum:
    """All eigenvalues of a square matrix, with multiplicity (LAPACK geev)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        values = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    return ComplexSpectrum(values=np.asarray(values, dtype=complex), n=M.shape[0],
                           z_shift=z_shift, r_smooth=r_smooth)


def singular_values(M: np.ndarray) -> np.ndarray:
    """Singular values, descending."""
    return shifted_singular_values(M, 0.0)


@dataclass(frozen=True)
class EmpiricalSpectralMeasure:
    """Two-dimensional ESD ``G_n(x, y)`` of a complex spectrum."""

    values: np.ndarray

    def __call__(self, x: float, y: float) -> float:
        v = self.values
        return float(np.mean((v.real <= x) & (v.imag <= y)))

    @property
    def radii(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def angles(self) -> np.ndarray:
        return np.angle(self.values)


def esd_2d(spec: ComplexSpectrum) -> EmpiricalSpectralMeasure:
    return EmpiricalSpectralMeasure(np.asarray(spec.values, dtype=complex))


def squared_sv_measure(M_base: np.ndarray, z: complex = 0.0, r: float = 0.0,
                       seed: int = 0, trial: int = 0) -> EmpiricalCDF:
    """Empirical CDF of ``s_j(M - zI - r xi I)^2``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    shift = complex(z) + (r * disc_point(seed, trial) if r > 0 else 0.0)
    s = shifted_singular_values(M_base, shift)
    return EmpiricalCDF(s * s)
