"""Weighted geometric mean of positive definite matrices and the matching Riemannian geometry."""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError, RangeError
from .linalg import (
    SpectralDecomposition,
    as_positive_definite,
    dagger,
    hermitian_eig,
    hermitian_part,
    mpow,
    singular_values,
)


def _pair(X, Y):
    X = as_positive_definite(X)
    Y = as_positive_definite(Y)
    if X.shape != Y.shape or X.ndim != 2:
        raise DimensionError(f"expected two matrices of equal size, got {X.shape} and {Y.shape}")
    return X, Y


def _inner(X, Y, decX: SpectralDecomposition | None = None):
    """X^{1/2}, X^{-1/2} and the congruence X^{-1/2} Y X^{-1/2}."""
    dec = decX if decX is not None else hermitian_eig(X)
    root = mpow(X, 0.5, dec)
    iroot = mpow(X, -0.5, dec)
    return root, iroot, hermitian_part(iroot @ Y @ iroot)


def geometric_mean(X, Y, t, decX: SpectralDecomposition | None = None):
    """X #_t Y = X^{1/2} (X^{-1/2} Y X^{-1/2})^t X^{1/2} for any real t.

    ``t`` may be a 1-D array, in which case the means are stacked along a
    leading axis and the inner matrix is diagonalized once. A known
    eigendecomposition of ``X`` can be passed to skip re-validating ``X``.
    """
    if decX is None:
        X, Y = _pair(X, Y)
    else:
        # positivity of Y is still enforced: the inner power refuses a non-PD congruence
        Y = np.asarray(Y, dtype=complex)
    ts = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(ts)):
        raise DomainError("weight t must be finite")
    root, _, inner = _inner(X, Y, decX)
    P = mpow(inner, ts)
    M = hermitian_part(root @ P @ root)
    if not np.all(np.isfinite(M)):
        raise RangeError(f"geometric mean overflowed at t={ts}")
    return M


def riemannian_distance(X, Y) -> float:
    """Closed-form geodesic distance ||log(X^{-1/2} Y X^{-1/2})||_2 (Hilbert-Schmidt)."""
    X, Y = _pair(X, Y)
    _, _, inner = _inner(X, Y)
    w = hermitian_eig(inner).eigenvalues
    if np.min(w) <= 0:
        raise DomainError("inner congruence lost positivity")
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


def congruence(A, X):
    """A* X A, refusing numerically singular A."""
    A = np.asarray(A, dtype=complex)
    X = as_positive_definite(X)
    if A.shape != X.shape:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {X.shape}")
    s = singular_values(A)
    if not s[-1] > 1e-10 * s[0]:
        raise DomainError(f"congruence matrix is near singular: s_min/s_max = {s[-1] / s[0]:.3e}")
    return hermitian_part(dagger(A) @ X @ A)


def log_det(X) -> float:
    w = hermitian_eig(X).eigenvalues
    if np.min(w) <= 0:
        raise DomainError("log_det needs a positive definite matrix")
    return float(np.sum(np.log(w)))
