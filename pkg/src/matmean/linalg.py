"""
Dense complex linear algebra for small Hermitian problems.

Everything here works on numpy arrays. Functions that take a matrix also
accept a stack of matrices with shape ``(..., n, n)``; the eigensolver
rotates every matrix in the stack at once, which is what makes sweeping a
whole grid of weights affordable.
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError, RangeError

HERMITIAN_RTOL = 1e-12
PD_THRESHOLD = 1e-12
JACOBI_TOL = 1e-14
JACOBI_SWEEPS = 30


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in descending order and the unitary whose columns are the eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values: np.ndarray | None = None) -> np.ndarray:
        """Return ``U diag(values) U*``; defaults to the stored eigenvalues."""
        w = self.eigenvalues if values is None else values
        U = self.eigenvectors
        return hermitian_part((U * w[..., None, :]) @ dagger(U))


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + dagger(A))


def _check_square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] == 0:
        raise DimensionError(f"expected square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def as_hermitian(A) -> np.ndarray:
    """Validate a (stack of) Hermitian matrices and return the symmetrized complex copy."""
    A = _check_square(np.asarray(A, dtype=complex))
    residual = np.max(np.abs(A - dagger(A)), axis=(-1, -2))
    bound = HERMITIAN_RTOL * (1.0 + np.max(np.abs(A), axis=(-1, -2)))
    if np.any(residual > bound):
        raise DomainError(f"matrix is not Hermitian: asymmetry residual {np.max(residual):.3e}")
    return hermitian_part(A)


def as_positive_definite(A) -> np.ndarray:
    """Validate positive definiteness via the eigensolver."""
    A = as_hermitian(A)
    w = hermitian_eig(A).eigenvalues
    _require_pd(w)
    return A


def _require_pd(w: np.ndarray) -> None:
    lmax = w[..., 0]
    lmin = w[..., -1]
    bad = ~(lmin > PD_THRESHOLD * np.maximum(lmax, 0.0))
    if np.any(bad):
        worst = float(np.min(lmin))
        raise DomainError(f"matrix is not positive definite: smallest eigenvalue {worst:.6e}")


_NEGLIGIBLE = 1e-290


def hermitian_eig(A, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_SWEEPS) -> SpectralDecomposition:
    """Cyclic Jacobi eigendecomposition of Hermitian matrices.

    Each rotation first removes the phase of the pivot entry with a diagonal
    unitary and then applies the real symmetric Jacobi rotation, so the
    rotated diagonal stays exactly real. Sweeps continue until the
    off-diagonal Frobenius norm of every matrix in the stack is at most
    ``tol * ||A||_F``.

    Parameters
    ----------
    A : array_like, shape (..., n, n)
        Hermitian matrix or stack of them. Only the Hermitian part is used.
    tol : float
        Relative off-diagonal convergence threshold.
    max_sweeps : int
        Sweep budget; exceeding it raises :class:`ConvergenceError`.

    Returns
    -------
    SpectralDecomposition
        Eigenvalues sorted descending along the last axis, eigenvectors as
        columns in the matching order.
    """
    A = _check_square(np.asarray(A, dtype=complex))
    batch_shape = A.shape[:-2]
    n = A.shape[-1]
    a = hermitian_part(A).reshape((-1, n, n)).copy()
    m = a.shape[0]
    # power-of-two prescaling is exact and keeps the norms below from overflowing
    amax = np.max(np.abs(a), axis=(-1, -2))
    _, expo = np.frexp(np.where(amax > 0, amax, 1.0))
    pow2 = np.ldexp(1.0, expo)
    a /= pow2[:, None, None]
    eye = np.broadcast_to(np.eye(n, dtype=complex), (m, n, n))
    v = eye.copy()
    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-1, -2)))
    offmask = ~np.eye(n, dtype=bool)

    def off_norm():
        return np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=-1))

    rounds = _tournament(n)
    off = off_norm()
    sweeps = 0
    while np.any(off > tol * scale):
        if sweeps == max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps: "
                f"off-diagonal norm {np.max(off):.3e} (relative {np.max(off / scale):.3e})"
            )
        for P, Q in rounds:
            apq = a[:, P, Q]
            mag = np.abs(apq)
            # after prescaling, pivots this small are below any rounding and would overflow theta
            nz = mag > _NEGLIGIBLE
            safe = np.where(nz, mag, 1.0)
            app = a[:, P, P].real
            aqq = a[:, Q, Q].real
            theta = (aqq - app) / (2.0 * safe)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(1.0, theta))
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            cph = np.where(nz, np.conj(apq) / safe, 1.0)
            # disjoint pivots: one unitary applies the whole round
            J = eye.copy()
            J[:, P, P] = c
            J[:, P, Q] = s
            J[:, Q, P] = -s * cph
            J[:, Q, Q] = c * cph
            a = dagger(J) @ a @ J
            a[:, P, Q] = 0.0
            a[:, Q, P] = 0.0
            a[:, P, P] = app - t * mag
            a[:, Q, Q] = aqq + t * mag
            v = v @ J
        sweeps += 1
        off = off_norm()

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1)) * pow2[:, None]
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return SpectralDecomposition(w.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n)))


def _tournament(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Round-robin pairing of 0..n-1: every pair (p, q), p < q, appears once per sweep in disjoint rounds."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(x, y), max(x, y)) for x, y in pairs if x >= 0 and y >= 0]
        if pairs:
            rounds.append((np.array([x for x, _ in pairs]), np.array([y for _, y in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def eigvalsh(A) -> np.ndarray:
    return hermitian_eig(A).eigenvalues


def singular_values(A, hermitian: bool = False) -> np.ndarray:
    """Singular values in descending order.

    For a general matrix they are the square roots of the eigenvalues of
    ``A* A``. With ``hermitian=True`` the input is taken to be Hermitian and
    the absolute eigenvalues are returned instead, which keeps the relative
    accuracy of small singular values of positive definite matrices.
    """
    A = _check_square(np.asarray(A, dtype=complex))
    if hermitian:
        s = np.abs(eigvalsh(A))
    else:
        s = np.sqrt(np.clip(eigvalsh(dagger(A) @ A), 0.0, None))
    return -np.sort(-s, axis=-1)


def spectral_function(A, f: Callable[[np.ndarray], np.ndarray], decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    """Apply ``f`` to the spectrum of Hermitian ``A``: returns ``U f(Λ) U*``.

    ``f`` receives the eigenvalue array (shape ``(..., n)``) and must return
    an array of the same shape.
    """
    dec = decomposition if decomposition is not None else hermitian_eig(as_hermitian(A))
    fw = np.asarray(f(dec.eigenvalues), dtype=float)
    if not np.all(np.isfinite(fw)):
        raise RangeError("spectral function produced non-finite values")
    return dec.reconstruct(fw)


def mexp(A, decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    with np.errstate(over="ignore"):
        return spectral_function(A, np.exp, decomposition)


def mlog(A, decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    dec = decomposition if decomposition is not None else hermitian_eig(as_hermitian(A))
    _require_pd(dec.eigenvalues)
    return spectral_function(A, np.log, dec)


def mpow(A, t, decomposition: SpectralDecomposition | None = None) -> np.ndarray:
    """Real power of a Hermitian matrix.

    ``t`` may be a scalar or a 1-D array of exponents; for an array the
    result is stacked along a new leading axis and only one
    eigendecomposition is computed. Non-integer or negative exponents require
    a positive definite input.
    """
    dec = decomposition if decomposition is not None else hermitian_eig(as_hermitian(A))
    ts = np.asarray(t, dtype=float)
    integral = np.all(ts == np.round(ts)) and np.all(ts >= 0)
    if not integral:
        _require_pd(dec.eigenvalues)
    w = dec.eigenvalues
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if ts.ndim == 0:
            fw = w ** float(ts) if not integral else w ** int(ts)
        else:
            fw = w[None, ...] ** ts.reshape((-1,) + (1,) * w.ndim)
    if not np.all(np.isfinite(fw)):
        raise RangeError(f"matrix power overflowed for exponent(s) {ts}")
    U = dec.eigenvectors
    if ts.ndim == 0:
        return dec.reconstruct(fw)
    return hermitian_part((U[None] * fw[..., None, :]) @ dagger(U)[None])


def random_hermitian(n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """GUE-style sample ``(G + G*)/2`` where ``G`` has i.i.d. complex normal entries with E|g|^2 = sigma^2."""
    if n < 1:
        raise DimensionError("n must be at least 1")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    z = rng.standard_normal((2, n, n))
    G = (z[0] + 1j * z[1]) * (sigma / np.sqrt(2.0))
    return hermitian_part(G)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with the phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def commutator_norm(H, K) -> float:
    H = np.asarray(H, dtype=complex)
    K = np.asarray(K, dtype=complex)
    if H.shape != K.shape:
        raise DimensionError(f"dimension mismatch: {H.shape} vs {K.shape}")
    return float(np.linalg.norm(H @ K - K @ H))


def spread(H) -> float:
    """Width of the spectrum of a Hermitian matrix, max eigenvalue minus min."""
    w = eigvalsh(H)
    return float(w[..., 0] - w[..., -1])
