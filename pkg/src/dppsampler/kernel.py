"""RBF similarity kernel, L-ensemble principal minors, and GP posterior variance.

This is the numerical core shared by every DPP sampler.  The ensemble matrix
is ``L[i,j] = q_i * q_j * K(phi_i, phi_j)`` with the RBF similarity
``K = exp(-||phi_i - phi_j||^2 / (2 sigma^2))`` and all quality scores fixed
to one, plus an optional diagonal jitter for factorization stability.

The log-determinant of a principal minor and the Gaussian-process posterior
variance are linked by the Schur-complement factorization

    logdet(L_{p1..pk}) = sum_i ln posterior_variance(p_i | p_1..p_{i-1})

which is what makes sequential posterior-variance sampling a DPP sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateSetError
from .searchspace import Configuration, SearchSpace, encode, quality

#: Pivots below this are treated as an exactly singular factorization.
SINGULAR_PIVOT = 1e-300


def default_sigma(k: int) -> float:
    """The sqrt(2)/k bandwidth rule used for k-point budgets."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.sqrt(2.0) / k


@dataclass(frozen=True)
class KernelConfig:
    """RBF bandwidth and diagonal jitter."""

    sigma: float
    jitter: float = 1e-10

    def __post_init__(self) -> None:
        if not (isinstance(self.sigma, (int, float)) and math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be a positive real, got {self.sigma!r}")
        if not 0.0 <= self.jitter <= 1e-6:
            raise ValueError(f"jitter must lie in [0, 1e-6], got {self.jitter!r}")


@dataclass(frozen=True)
class PrincipalMinor:
    """A symmetric k x k restriction of the ensemble matrix."""

    entries: np.ndarray
    size: int

    def __post_init__(self) -> None:
        a = np.asarray(self.entries, dtype=float)
        if a.shape != (self.size, self.size):
            raise ValueError("entries must be size x size")
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        if scale and float(np.max(np.abs(a - a.T))) > 1e-12 * scale:
            raise ValueError("entries must be symmetric")
        object.__setattr__(self, "entries", a)


def rbf(a: np.ndarray, b: np.ndarray, cfg: KernelConfig) -> float:
    """exp(-||a - b||^2 / (2 sigma^2)); 1.0 at zero distance."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"feature length mismatch: {a.shape} vs {b.shape}")
    d2 = float(np.sum((a - b) ** 2))
    return math.exp(-d2 / (2.0 * cfg.sigma**2))


def _cross_kernel(phi_a: np.ndarray, phi_b: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """K(a_i, b_j) for row-stacked feature matrices (vectorized)."""
    d2 = np.sum((phi_a[:, None, :] - phi_b[None, :, :]) ** 2, axis=-1)
    return np.exp(-d2 / (2.0 * cfg.sigma**2))


def build_L(points: Sequence[Configuration], space: SearchSpace, cfg: KernelConfig) -> PrincipalMinor:
    """Ensemble minor over the given points: q_i q_j K(phi_i, phi_j) + jitter on the diagonal."""
    if not points:
        raise ValueError("points must be nonempty")
    phis = np.stack([encode(space, p) for p in points])
    q = np.array([quality(p) for p in points])
    L = (q[:, None] * q[None, :]) * _cross_kernel(phis, phis, cfg)
    L[np.diag_indices_from(L)] += cfg.jitter
    return PrincipalMinor(entries=L, size=len(points))


def _logdet_psd(a: np.ndarray) -> float:
    """Log-determinant of a symmetric PSD matrix via Cholesky.

    Returns -inf when the factorization fails or any pivot falls below the
    singularity threshold.
    """
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return -math.inf
    diag = np.diagonal(chol)
    # Cholesky pivots of the LDL^T factorization are the squared diagonals.
    if np.any(diag * diag < SINGULAR_PIVOT):
        return -math.inf
    return 2.0 * float(np.sum(np.log(diag)))


def logdet(m: PrincipalMinor) -> float:
    """Log-determinant of a principal minor, or -inf when numerically singular.

    Raises ``ValueError`` on asymmetric input.
    """
    a = np.asarray(m.entries, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))))
    if float(np.max(np.abs(a - a.T))) > 1e-12 * scale:
        raise ValueError("principal minor is not symmetric")
    return _logdet_psd(a)


def _posterior_variances(
    phi_cand: np.ndarray, phi_sel: np.ndarray, cfg: KernelConfig
) -> np.ndarray:
    """Posterior variances of candidate rows given selected rows (vectorized).

    ``K(x,x) - k_x^T K_S^{-1} k_x`` with the jittered selected-set matrix;
    the candidate's own diagonal carries no jitter, so the empty-selection
    prior variance is exactly 1.
    """
    n = phi_cand.shape[0]
    if phi_sel.shape[0] == 0:
        return np.ones(n)
    K_S = _cross_kernel(phi_sel, phi_sel, cfg)
    K_S[np.diag_indices_from(K_S)] += cfg.jitter
    try:
        chol = np.linalg.cholesky(K_S)
    except np.linalg.LinAlgError:
        raise DegenerateSetError("selected-set kernel matrix is singular beyond jitter rescue")
    k_x = _cross_kernel(phi_sel, phi_cand, cfg)
    z = solve_triangular(chol, k_x, lower=True, check_finite=False)
    return 1.0 - np.sum(z * z, axis=0)


def posterior_variance(
    candidate: Configuration,
    selected: Sequence[Configuration],
    space: SearchSpace,
    cfg: KernelConfig,
) -> float:
    """Remaining GP predictive variance at ``candidate`` after conditioning
    on ``selected``.

    Returns 1.0 for an empty selection.  Raises ``DegenerateSetError`` when
    the selected-set matrix is singular beyond jitter rescue.  The result is
    floored at zero (tiny negative values are factorization round-off).
    """
    phi_c = encode(space, candidate)[None, :]
    if not selected:
        return 1.0
    phi_s = np.stack([encode(space, p) for p in selected])
    pv = float(_posterior_variances(phi_c, phi_s, cfg)[0])
    return max(pv, 0.0)
