"""Numerical experiments around the circular law for random matrices."""
from .convergence import (RateTable, SweepConfig, circular_law_distance, kolmogorov_distance,
                          rate_sweep)
from .ensemble import (Distribution, EnsembleSpec, gaussian, parse_distribution, rademacher,
                       sample_matrix, shift_matrix, smooth_matrix, two_point, uniform_pm)
from .estimators import CircularLawFit, LimitLaw, SmallestSingularValueTail, \
    SquaredSingularValues
from .hermitization import build_hermitization, stieltjes_empirical
from .limit_law import (LimitSolution, density, limit_cdf, root_count, stieltjes_limit,
                        support_thresholds)
from .potential import (circular_mean, disc_char, disc_potential, empirical_char,
                        empirical_potential, limit_potential)
from .spectra import ComplexSpectrum, EmpiricalCDF, eigenvalues, singular_values, \
    symmetrize_cdf
from .sv_tail import classify_profile, profile_counts, small_ball_prob, smin_tail_estimate

__version__ = "0.1.0"
