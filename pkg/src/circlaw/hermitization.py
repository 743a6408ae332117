"""Hermitized block matrix and empirical Stieltjes transforms.

For a square ``B = M - zI`` the ``2n x 2n`` Hermitian matrix

    W = [[0, B], [B*, 0]]

has spectrum ``{+s_j(B), -s_j(B)}``.  The empirical Stieltjes transform of the
symmetrized singular-value law is ``(1/2n) Tr (W - alpha I)^{-1}``, evaluated
here through the singular values instead of an explicit inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import shift_matrix


@dataclass(frozen=True)
class HermitizationW:
    W: np.ndarray
    z: complex
    n: int

    def eigenvalues(self) -> np.ndarray:
        """Ascending real spectrum of ``W``."""
        return np.linalg.eigvalsh(self.W)

    def singular_values(self) -> np.ndarray:
        """Singular values of the off-diagonal block, descending."""
        ev = self.eigenvalues()
        return np.sort(np.abs(ev[self.n:]))[::-1]


def build_hermitization(M_base: np.ndarray, z: complex) -> HermitizationW:
    B = shift_matrix(M_base, z)
    n = B.shape[0]
    W = np.zeros((2 * n, 2 * n), dtype=B.dtype)
    W[:n, n:] = B
    W[n:, :n] = B.conj().T
    return HermitizationW(W=W, z=complex(z), n=n)


def shifted_singular_values(M_base: np.ndarray, z: complex = 0.0,
                            method: str = "svd") -> np.ndarray:
    """Descending singular values of ``M_base - z I``.

    ``method="svd"`` bidiagonalizes ``M_base - zI`` directly.
    ``method="hermitization"`` reads them off the spectrum of ``W``; it is
    several times slower for complex shifts and is kept as a cross-check.
    """
    if method == "hermitization":
        return build_hermitization(M_base, z).singular_values()
    if method != "svd":
        raise ValueError(f"unknown method {method!r}")
    return np.linalg.svd(shift_matrix(M_base, z), compute_uv=False)


def _check_upper(alpha: complex) -> complex:
    alpha = complex(alpha)
    if not alpha.imag > 0:
        raise ValueError(f"alpha must lie in the upper half-plane, got {alpha}")
    return alpha


def stieltjes_from_singular_values(s: np.ndarray, alpha: complex) -> complex:
    """``(1/2n) sum_j [1/(s_j - alpha) + 1/(-s_j - alpha)]``."""
    alpha = _check_upper(alpha)
    s = np.asarray(s, dtype=float)
    # 1/(s - a) + 1/(-s - a) = 2a / (s^2 - a^2)
    return complex(np.mean(alpha / (s * s - alpha * alpha)))


def stieltjes_empirical(M_base: np.ndarray, z: complex, alpha: complex) -> complex:
    """Single-sample ``S_n(alpha, z)`` of the symmetrized singular-value law."""
    return stieltjes_from_singular_values(shifted_singular_values(M_base, z), alpha)


def stieltjes_squared(M_base: np.ndarray, z: complex, w: complex) -> complex:
    """``s_n(w, z) = (1/n) sum_j 1/(s_j^2 - w)``, the transform of the squared law."""
    s = shifted_singular_values(M_base, z)
    return complex(np.mean(1.0 / (s * s - complex(w))))
