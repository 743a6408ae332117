"""Dense and sparse i.i.d. random matrix ensembles.

A matrix is generated in three factored steps: raw entries ``X_jk`` with mean
zero and unit variance, an independent Bernoulli(p_n) retention mask, and the
scaling ``1/sqrt(n p_n)``.  With ``p_n = 1`` the mask is all ones and the
scaling reduces to ``1/sqrt(n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng as _rng

FAMILIES = ("gaussian", "rademacher", "uniform", "twopoint")


@dataclass(frozen=True)
class Distribution:
    """Law of a single raw entry.

    Use the module-level constructors (:func:`gaussian`, :func:`rademacher`,
    :func:`uniform_pm`, :func:`two_point`) rather than building this directly.
    For ``twopoint`` the law puts mass ``prob`` on ``atom`` and the remaining
    mass on ``-1/atom``.
    """

    name: str
    atom: Optional[float] = None
    prob: Optional[float] = None

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValueError(f"unknown distribution family {self.name!r}")
        if self.name == "twopoint":
            if self.atom is None or self.prob is None:
                raise ValueError("twopoint needs both atom and prob")
            if not 0.0 < self.prob < 1.0 or self.atom <= 0.0:
                raise ValueError("twopoint needs atom > 0 and 0 < prob < 1")
        if abs(self.mean) > 1e-12 or abs(self.variance - 1.0) > 1e-12:
            raise ValueError(f"{self} is not centered with unit variance")

    @property
    def other_atom(self) -> Optional[float]:
        if self.name != "twopoint":
            return None
        return -self.prob * self.atom / (1.0 - self.prob)

    @property
    def mean(self) -> float:
        if self.name == "twopoint":
            return self.prob * self.atom + (1.0 - self.prob) * self.other_atom
        return 0.0

    @property
    def variance(self) -> float:
        if self.name == "twopoint":
            return (self.prob * self.atom ** 2
                    + (1.0 - self.prob) * self.other_atom ** 2)
        return 1.0

    @property
    def kappa3(self) -> float:
        """Third absolute moment ``E|X|^3``."""
        if self.name == "gaussian":
            return 2.0 * math.sqrt(2.0 / math.pi)
        if self.name == "rademacher":
            return 1.0
        if self.name == "uniform":
            return 3.0 * math.sqrt(3.0) / 4.0
        return (self.prob * abs(self.atom) ** 3
                + (1.0 - self.prob) * abs(self.other_atom) ** 3)

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        if self.name == "gaussian":
            return gen.standard_normal(size)
        if self.name == "rademacher":
            return np.where(gen.random(size) < 0.5, -1.0, 1.0)
        if self.name == "uniform":
            s3 = math.sqrt(3.0)
            return gen.uniform(-s3, s3, size)
        return np.where(gen.random(size) < self.prob, self.atom, self.other_atom)

    def __str__(self) -> str:
        if self.name == "twopoint":
            return f"twopoint:{self.atom!r}"
        return self.name


def gaussian() -> Distribution:
    return Distribution("gaussian")


def rademacher() -> Distribution:
    return Distribution("rademacher")


def uniform_pm() -> Distribution:
    """Uniform law on ``[-sqrt(3), sqrt(3)]``."""
    return Distribution("uniform")


def two_point(atom: Optional[float] = None, prob: Optional[float] = None) -> Distribution:
    """Centered two-point law with unit variance.

    Mean zero and unit variance leave one free parameter, so give either the
    positive ``atom`` (then ``prob = 1/(1 + atom^2)``) or ``prob`` (then
    ``atom = sqrt((1 - prob)/prob)``).  Giving both is allowed only when they
    agree.  The second atom is always ``-1/atom``.
    """
    if atom is None and prob is None:
        raise ValueError("give atom or prob")
    if atom is not None and atom <= 0:
        raise ValueError("atom must be positive")
    if prob is not None and not 0.0 < prob < 1.0:
        raise ValueError("prob must lie in (0, 1)")
    if atom is None:
        atom = math.sqrt((1.0 - prob) / prob)
    implied = 1.0 / (1.0 + atom * atom)
    if prob is not None and abs(prob - implied) > 1e-12:
        raise ValueError(
            f"atom={atom} forces prob={implied} for mean 0 and variance 1, got {prob}")
    return Distribution("twopoint", atom=float(atom), prob=implied)


def parse_distribution(text: str) -> Distribution:
    """Parse ``gaussian``, ``rademacher``, ``uniform`` or ``twopoint:<atom>``."""
    name, _, arg = text.strip().lower().partition(":")
    if name in ("normal", "gauss"):
        name = "gaussian"
    if name == "uniformpm":
        name = "uniform"
    if name == "twopoint":
        if not arg:
            raise ValueError("twopoint needs an atom, e.g. twopoint:2.0")
        return two_point(atom=float(arg))
    if arg:
        raise ValueError(f"{name} takes no parameter")
    return Distribution(name)


@dataclass(frozen=True)
class EnsembleSpec:
    """One random-matrix law: size, entry law, sparsity and seed."""

    n: int
    dist: Distribution = field(default_factory=gaussian)
    p_n: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.p_n <= 1.0:
            raise ValueError(f"p_n must lie in (0, 1], got {self.p_n!r}")

    @property
    def kappa3(self) -> float:
        return self.dist.kappa3

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.n * self.p_n)


def raw_entries(spec: EnsembleSpec, trial: int = 0) -> np.ndarray:
    """Unscaled i.i.d. entries ``X_jk`` for one trial."""
    gen = _rng.stream(spec.seed, _rng.RAW, trial)
    return spec.dist.sample(gen, (spec.n, spec.n))


def bernoulli_mask(spec: EnsembleSpec, trial: int = 0) -> np.ndarray:
    """Retention indicators ``eps_jk`` (all ones when ``p_n == 1``)."""
    if spec.p_n == 1.0:
        return np.ones((spec.n, spec.n))
    gen = _rng.stream(spec.seed, _rng.MASK, trial)
    return (gen.random((spec.n, spec.n)) < spec.p_n).astype(float)


def sample_matrix(spec: EnsembleSpec, trial: int = 0) -> np.ndarray:
    """Draw ``(eps_jk X_jk) / sqrt(n p_n)`` for the given trial index."""
    return raw_entries(spec, trial) * bernoulli_mask(spec, trial) * spec.scale


def shift_matrix(M: np.ndarray, z: complex) -> np.ndarray:
    """Return ``M - z I``.  The result is real when ``z`` is real."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    z = complex(z)
    out = M.astype(complex if z.imag != 0.0 or np.iscomplexobj(M) else float)
    idx = np.diag_indices_from(out)
    out[idx] = out[idx] - (z if np.iscomplexobj(out) else z.real)
    return out


def sample_disc(gen: np.random.Generator) -> complex:
    """One point uniform on the closed unit disc, by rejection from the square."""
    while True:
        x, y = gen.uniform(-1.0, 1.0, 2)
        if x * x + y * y <= 1.0:
            return complex(x, y)


def disc_point(seed: int, trial: int = 0) -> complex:
    """The smoothing variable ``xi`` belonging to ``(seed, trial)``."""
    return sample_disc(_rng.stream(seed, _rng.XI, trial))


def smooth_matrix(M: np.ndarray, z: complex, r: float, seed: int,
                  trial: int = 0) -> np.ndarray:
    """Return ``M - z I - r xi I`` with ``xi`` uniform on the unit disc."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0:
        return shift_matrix(M, z)
    return shift_matrix(M, complex(z) + r * disc_point(seed, trial))
