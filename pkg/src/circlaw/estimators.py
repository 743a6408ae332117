"""scikit-learn style wrappers around the functional API.

Parameters are set in ``__init__`` and never touched there, so ``get_params``,
``set_params`` and ``clone`` behave as usual.  Learned state ends in ``_``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (check_complex, check_nonnegative, check_positive_int,
                          check_probability, check_square_matrix)
from .convergence import circular_law_distance, kolmogorov_distance
from .ensemble import EnsembleSpec, parse_distribution
from .hermitization import shifted_singular_values
from .limit_law import (DEFAULT_MARGIN, DEFAULT_POINTS, DEFAULT_V0, default_grid, density,
                        limit_cdf, stieltjes_limit)
from .potential import limit_potential
from .spectra import eigenvalues
from .sv_tail import smin_tail_estimate


class LimitLaw(BaseEstimator):
    """Limiting symmetrized singular-value law of ``X/sqrt(n) - zI``.

    Parameters
    ----------
    z : complex
        Shift.
    points : int
        Size of the default symmetric grid.
    margin : float
        Extra room beyond the outer support edge.
    v0 : float
        Height above the real axis at which the density is read off.

    Attributes
    ----------
    solution_ : LimitSolution
    x1_, x2_ : float
        Outer and inner support thresholds.
    potential_ : float
        Logarithmic potential of the circular law at ``z``.
    """

    def __init__(self, z=0.0, points=DEFAULT_POINTS, margin=DEFAULT_MARGIN, v0=DEFAULT_V0):
        self.z = z
        self.points = points
        self.margin = margin
        self.v0 = v0

    def fit(self, X=None, y=None):
        z = check_complex(self.z)
        check_positive_int(self.points, "points", 3)
        check_nonnegative(self.margin, "margin")
        self.solution_ = density(z, default_grid(z, self.points, self.margin), self.v0)
        self.x1_, self.x2_ = self.solution_.x1, self.solution_.x2
        self.potential_ = limit_potential(self.solution_)
        return self

    def pdf(self, x):
        check_is_fitted(self, "solution_")
        s = self.solution_
        return np.interp(np.asarray(x, dtype=float), s.x_grid, s.density, left=0.0, right=0.0)

    def cdf(self, x):
        check_is_fitted(self, "solution_")
        return limit_cdf(self.solution_, x)

    def stieltjes(self, alpha):
        return stieltjes_limit(alpha, check_complex(self.z))

    def score(self, X, y=None):
        """Negative Kolmogorov distance of squared singular values ``X`` to the squared law."""
        check_is_fitted(self, "solution_")
        x = np.asarray(X, dtype=float).ravel()
        return -kolmogorov_distance(x, self.solution_.squared_cdf)


class SquaredSingularValues(TransformerMixin, BaseEstimator):
    """Map a square matrix to the squared singular values of ``M - zI``.

    ``transform`` returns a column of length ``n`` in descending order.
    """

    def __init__(self, z=0.0):
        self.z = z

    def fit(self, X, y=None):
        X = check_square_matrix(X, "X")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_square_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        s = shifted_singular_values(X, check_complex(self.z))
        return (s * s)[:, None]


class CircularLawFit(BaseEstimator):
    """Eigenvalues of a square matrix and their distance to the disc law.

    Attributes
    ----------
    spectrum_ : ComplexSpectrum
    radial_ks_, angular_ks_ : float
    """

    def fit(self, X, y=None):
        X = check_square_matrix(X, "X")
        self.spectrum_ = eigenvalues(X)
        self.radial_ks_, self.angular_ks_ = circular_law_distance(self.spectrum_)
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "spectrum_")
        return -self.radial_ks_


class SmallestSingularValueTail(BaseEstimator):
    """Monte Carlo tail of ``s_n(X - zI)`` at fixed thresholds.

    Attributes
    ----------
    report_ : TailReport
    counts_, probabilities_, upper_ : ndarray
        Hit counts, frequencies and Clopper-Pearson 95% upper bounds.
    """

    def __init__(self, n=64, dist="gaussian", p_n=1.0, z=0.5, thresholds=(1e-4, 1e-2, 1e-1),
                 trials=500, seed=0, workers=1):
        self.n = n
        self.dist = dist
        self.p_n = p_n
        self.z = z
        self.thresholds = thresholds
        self.trials = trials
        self.seed = seed
        self.workers = workers

    def fit(self, X=None, y=None):
        spec = EnsembleSpec(check_positive_int(self.n, "n"), parse_distribution(str(self.dist)),
                            check_probability(self.p_n), int(self.seed))
        self.report_ = smin_tail_estimate(spec, check_complex(self.z), self.thresholds,
                                          check_positive_int(self.trials, "trials", 50),
                                          self.workers)
        self.counts_ = self.report_.counts
        self.probabilities_ = self.report_.probabilities
        self.upper_ = self.report_.intervals()[:, 1]
        return self
