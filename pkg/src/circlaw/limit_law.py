"""Limiting law of the symmetrized singular values of ``X - zI``.

Its Stieltjes transform ``S(alpha, z)`` solves

    S = -(alpha + S) / ((alpha + S)^2 - |z|^2),

equivalently the cubic ``S^3 + 2 alpha S^2 + (alpha^2 + 1 - |z|^2) S + alpha = 0``,
with the branch fixed by ``Im S > 0`` on the upper half-plane.  The density of
the symmetrized law is ``Im S(x + i0, z) / pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_V0 = 1e-6
DEFAULT_POINTS = 2001
DEFAULT_MARGIN = 0.5

_OMEGA = np.exp(2j * np.pi / 3)
_TRACK_HEIGHT = 10.0
_TRACK_STEPS = 100
_MAX_REFINE = 4


class BranchSelectionError(RuntimeError):
    """The Herglotz root could not be singled out; ``roots`` holds all three."""

    def __init__(self, alpha, z, roots):
        super().__init__(f"ambiguous branch at alpha={alpha}, z={z}: roots={roots}")
        self.alpha = alpha
        self.z = z
        self.roots = roots


class BoundaryIndeterminate(ValueError):
    """The point sits on a support threshold, where the root count is undefined."""


class GridTooCoarse(ValueError):
    pass


def cubic_roots(b, c, d, polish: int = 2) -> np.ndarray:
    """Roots of the monic cubic ``y^3 + b y^2 + c y + d`` by Cardano's formula.

    Inputs broadcast; the result has shape ``(3,) + broadcast shape``.  A few
    Newton steps clean up the cancellation Cardano suffers near multiple roots.
    """
    b, c, d = np.broadcast_arrays(*(np.asarray(a, dtype=complex) for a in (b, c, d)))
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    sq = np.sqrt((q / 2.0) ** 2 + (p / 3.0) ** 3)
    w1 = -q / 2.0 + sq
    w2 = -q / 2.0 - sq
    w = np.where(np.abs(w1) >= np.abs(w2), w1, w2)
    u = w ** (1.0 / 3.0)
    roots = []
    for k in range(3):
        uk = u * _OMEGA ** k
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(uk == 0, 0.0, uk - p / (3.0 * uk))
        roots.append(t - b / 3.0)
    y = np.stack(roots)
    for _ in range(polish):
        f = ((y + b) * y + c) * y + d
        df = (3.0 * y + 2.0 * b) * y + c
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(df != 0, f / df, 0.0)
        better = np.abs(((y - step + b) * (y - step) + c) * (y - step) + d) < np.abs(f)
        y = np.where(better, y - step, y)
    return y


def solve_cubic(alpha, z) -> np.ndarray:
    """Three roots in ``S`` of ``S^3 + 2a S^2 + (a^2 + 1 - |z|^2) S + a = 0``."""
    alpha = np.asarray(alpha, dtype=complex)
    t = abs(complex(z)) ** 2
    return cubic_roots(2.0 * alpha, alpha * alpha + 1.0 - t, alpha)


def shifted_cubic_roots(x, z) -> np.ndarray:
    """Roots in ``y`` of ``y^3 - x y^2 + (1 - |z|^2) y + x |z|^2 = 0`` (``y = S + x``)."""
    x = np.asarray(x, dtype=complex)
    t = abs(complex(z)) ** 2
    return cubic_roots(-x, 1.0 - t + 0.0 * x, x * t)


def cubic_residual(S, alpha, z):
    """``S (alpha + S)^2 + (alpha + S) - |z|^2 S``."""
    t = abs(complex(z)) ** 2
    return S * (alpha + S) ** 2 + (alpha + S) - t * S


def _pick(roots, prev):
    """Index of the upper-half-plane root closest to ``prev``, plus an ambiguity flag."""
    cand = (roots.imag > 0) & (np.abs(roots) <= 1.0 + 1e-9)
    dist = np.where(cand, np.abs(roots - prev[None, :]), np.inf)
    order = np.argsort(dist, axis=0)
    d1 = np.take_along_axis(dist, order[:1], axis=0)[0]
    d2 = np.take_along_axis(dist, order[1:2], axis=0)[0]
    ambiguous = ~np.isfinite(d1) | (np.isfinite(d2) & (d1 > 0.5 * d2))
    return order[0], ambiguous


def _track(u, v, t_zabs, S0, t0, t1, steps, depth):
    """Follow the branch ``S0`` (known at path parameter ``t0``) to ``t1``.

    The path is ``alpha(t) = u + i (v + H (1 - t))``, so ``t = 1`` is the target.
    Returns the tracked roots and a mask of points that stayed ambiguous.
    """
    S = S0.copy()
    bad = np.zeros(u.shape, dtype=bool)
    ts = np.linspace(t0, t1, steps + 1)
    for ta, tb in zip(ts[:-1], ts[1:]):
        alpha = u + 1j * (v + _TRACK_HEIGHT * (1.0 - tb))
        roots = cubic_roots(2.0 * alpha, alpha * alpha + 1.0 - t_zabs, alpha)
        idx, amb = _pick(roots, S)
        amb &= ~bad
        if np.any(amb) and depth < _MAX_REFINE:
            sel = np.flatnonzero(amb)
            sub, subbad = _track(u[sel], v[sel], t_zabs, S[sel], ta, tb, 10, depth + 1)
            pick = np.take_along_axis(roots, idx[None, :], axis=0)[0]
            pick[sel] = sub
            S = pick
            bad[sel] = subbad
        else:
            S = np.take_along_axis(roots, idx[None, :], axis=0)[0]
            bad |= amb
    return S, bad


def stieltjes_limit_array(alpha, z, track: bool = False) -> np.ndarray:
    """Vectorized :func:`stieltjes_limit`.

    ``track=True`` skips the unique-root shortcut and follows every point by
    homotopy from ``alpha + 10i``.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    if np.any(alpha.imag <= 0):
        raise ValueError("alpha must lie in the upper half-plane")
    t_zabs = abs(complex(z)) ** 2
    roots = solve_cubic(alpha, z)
    cand = (roots.imag > 0) & (np.abs(roots) <= 1.0 + 1e-9)
    unique = (cand.sum(axis=0) == 1) & (not track)
    out = np.take_along_axis(roots, np.argmax(cand, axis=0)[None, :], axis=0)[0]
    hard = np.flatnonzero(~unique)
    if hard.size:
        u, v = alpha.real[hard], alpha.imag[hard]
        top = u + 1j * (v + _TRACK_HEIGHT)
        r0 = cubic_roots(2.0 * top, top * top + 1.0 - t_zabs, top)
        # far from the axis the Herglotz root is the one near -1/alpha
        S0 = np.take_along_axis(
            r0, np.argmin(np.abs(r0 + 1.0 / top), axis=0)[None, :], axis=0)[0]
        S, bad = _track(u, v, t_zabs, S0, 0.0, 1.0, _TRACK_STEPS, 0)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise BranchSelectionError(complex(alpha[hard[i]]), z, roots[:, hard[i]])
        out[hard] = S
    return out


def stieltjes_limit(alpha: complex, z: complex) -> complex:
    """Herglotz solution ``S(alpha, z)`` of the self-consistent equation."""
    return complex(stieltjes_limit_array([alpha], z)[0])


def support_thresholds(z: complex) -> tuple[float, float]:
    """Edges ``(x1, x2)`` of the limit density in the symmetrized variable.

    The density vanishes for ``|x| >= x1`` and, when ``|z| > 1``, also for
    ``|x| <= x2``.  ``x2 = 0`` for ``|z| <= 1``.
    """
    t = abs(complex(z)) ** 2
    half = (5.0 + 2.0 * t) / 2.0
    # ((1 + 8t)^{3/2} - 1) / 8t, stable as t -> 0 where it tends to 3/2
    ratio = 1.5 if t == 0 else math.expm1(1.5 * math.log1p(8.0 * t)) / (8.0 * t)
    x1 = math.sqrt(half + ratio)
    if t <= 1.0:
        return x1, 0.0
    x2sq = half - ((1.0 + 8.0 * t) ** 1.5 + 1.0) / (8.0 * t)
    return x1, math.sqrt(max(x2sq, 0.0))


def _all_real(x, z) -> np.ndarray:
    """True where the real cubic at ``alpha = x`` has three real roots (counted with multiplicity)."""
    x = np.asarray(x, dtype=float)
    t = abs(complex(z)) ** 2
    b, c, d = 2.0 * x, x * x + 1.0 - t, x
    disc = 18.0 * b * c * d - 4.0 * b ** 3 * d + b * b * c * c - 4.0 * c ** 3 - 27.0 * d * d
    scale = (1.0 + np.abs(b) + np.abs(c) + np.abs(d)) ** 4
    return disc >= -1e-13 * scale


def root_count(x: float, z: complex) -> int:
    """Number of real roots of ``y^3 - x y^2 + (1 - |z|^2) y + x |z|^2``: 1 or 3."""
    x = float(x)
    x1, x2 = support_thresholds(z)
    edges = [x1] + ([x2] if abs(complex(z)) > 1 else [])
    for e in edges:
        if abs(abs(x) - e) <= 1e-6:
            raise BoundaryIndeterminate(f"|x|={abs(x)} is within 1e-6 of threshold {e}")
    roots = shifted_cubic_roots(x, z)
    scale = 1.0 + np.abs(roots)
    return int(np.sum(np.abs(roots.imag) <= 1e-9 * scale))


def default_grid(z: complex, points: int = DEFAULT_POINTS,
                 margin: float = DEFAULT_MARGIN) -> np.ndarray:
    x1, _ = support_thresholds(z)
    return np.linspace(-x1 - margin, x1 + margin, points)


@dataclass(frozen=True)
class LimitSolution:
    """Density of the symmetrized law on a grid.

    ``cdf`` is the trapezoid integral of ``density`` divided by its total,
    which is kept as ``mass`` so quadrature error stays visible.
    """

    z: complex
    x_grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    x1: float
    x2: float
    mass: float
    v0: float = DEFAULT_V0

    def squared_cdf(self, x):
        """``F(x, z)`` of the squared singular values, ``2 F~(sqrt x) - 1``."""
        x = np.asarray(x, dtype=float)
        y = np.sqrt(np.clip(x, 0.0, None))
        return np.where(x < 0, 0.0, np.clip(2.0 * limit_cdf(self, y) - 1.0, 0.0, 1.0))

    def squared_density(self, x):
        """Density of the squared law, ``p~(sqrt x) / sqrt x`` for ``x > 0``.

        Evaluated pointwise rather than interpolated from the grid, which would
        blur the square-root edges.
        """
        x = np.asarray(x, dtype=float)
        y = np.sqrt(np.clip(x, 1e-300, None))
        return np.where(x > 0, density_at(y, self.z, self.v0) / y, 0.0)

    def rows(self):
        return zip(self.x_grid.tolist(), self.density.tolist(), self.cdf.tolist())


def density_at(x, z: complex, v0: float = DEFAULT_V0) -> np.ndarray:
    """Pointwise ``p~(x, z) = Im S(x + i v0, z) / pi``, exactly 0 where all roots are real."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.zeros_like(flat)
    live = ~_all_real(flat, z)
    if np.any(live):
        S = stieltjes_limit_array(flat[live] + 1j * v0, z)
        out[live] = np.clip(S.imag, 0.0, None) / np.pi
    return out.reshape(x.shape)


def density(z: complex, x_grid=None, v0: float = DEFAULT_V0) -> LimitSolution:
    """Density and CDF of the symmetrized limit law on a symmetric grid."""
    x1, x2 = support_thresholds(z)
    x = default_grid(z) if x_grid is None else np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 3 or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be a strictly ascending 1-d array")
    if np.max(np.abs(x + x[::-1])) > 1e-9 * max(1.0, np.max(np.abs(x))):
        raise ValueError("x_grid must be symmetric about 0")
    if x[0] > -x1 or x[-1] < x1:
        raise ValueError(f"x_grid must cover [-{x1}, {x1}]")
    if np.max(np.diff(x)) > x1 / 200.0:
        raise GridTooCoarse(f"grid spacing exceeds x1/200 = {x1 / 200.0}")
    dens = density_at(x, z, v0)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))])
    mass = float(cum[-1])
    if not mass > 0:
        raise GridTooCoarse("grid resolves no mass")
    return LimitSolution(z=complex(z), x_grid=x, density=dens, cdf=cum / mass, x1=x1, x2=x2,
                         mass=mass, v0=v0)


def limit_cdf(sol: LimitSolution, x):
    """``F~(x, z)`` by linear interpolation of the integrated density."""
    out = np.interp(x, sol.x_grid, sol.cdf, left=0.0, right=sol.cdf[-1])
    return float(out) if np.ndim(out) == 0 else out


def mp_density(x):
    """Marchenko-Pastur density with ratio 1: ``sqrt((4 - x)/x) / (2 pi)`` on (0, 4)."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 4)
    xs = np.where(inside, x, 1.0)
    out = np.where(inside, np.sqrt((4.0 - xs) / xs) / (2.0 * np.pi), 0.0)
    return float(out) if out.ndim == 0 else out


def mp_cdf(x):
    """Closed-form Marchenko-Pastur(1) CDF, via ``x = 4 sin^2(theta)``."""
    x = np.asarray(x, dtype=float)
    theta = np.arcsin(np.sqrt(np.clip(x, 0.0, 4.0) / 4.0))
    out = (2.0 * theta + np.sin(2.0 * theta)) / np.pi
    return float(out) if out.ndim == 0 else out


def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = 0.5 + (x * np.sqrt(4.0 - x * x) / 4.0 + np.arcsin(x / 2.0)) / np.pi
    return float(out) if out.ndim == 0 else out
