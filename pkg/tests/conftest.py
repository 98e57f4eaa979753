import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("matmean", max_examples=40, deadline=None)
settings.load_profile("matmean")

SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


class Pauli:
    """Closed forms for H = sigma_z, K = sigma_x, derived by hand.

    Both e^H and e^K have determinant 1. The congruence
    M = e^{-H/2} e^K e^{-H/2} = [[c/e, s], [s, e c]] (c = cosh 1, s = sinh 1)
    has determinant 1 and trace 2c^2, so its eigenvalues are e^{+-a} with
    cosh a = c^2. For such M, M^t = (sinh(ta) M - sinh((t-1)a) I) / sinh a,
    which gives Tr(e^H #_t e^K) = 2c cosh((2t-1)a/2) / cosh(a/2).
    (1-t)H + tK has eigenvalues +-sqrt((1-t)^2 + t^2), and
    Tr e^{(1-t)H} e^{tK} = 2 cosh(1-t) cosh(t).
    Every matrix in the family has determinant 1, so the two eigenvalues
    are the roots of x^2 - Tr x + 1.
    """

    H = SIGMA_Z
    K = SIGMA_X
    c = math.cosh(1.0)
    a = math.acosh(math.cosh(1.0) ** 2)

    @classmethod
    def trace_mean(cls, t):
        return 2 * cls.c * math.cosh((2 * t - 1) * cls.a / 2) / math.cosh(cls.a / 2)

    @staticmethod
    def trace_exp(t):
        return 2 * math.cosh(math.hypot(1 - t, t))

    @staticmethod
    def trace_sym(t):
        return 2 * math.cosh(1 - t) * math.cosh(t)

    @staticmethod
    def eigs_from_trace(tr):
        # det 1: x^2 - tr x + 1 = 0
        big = (tr + math.sqrt(tr * tr - 4)) / 2
        return np.array([big, 1 / big])

    trace_exp_sum = 2 * math.cosh(math.sqrt(2.0))   # Tr e^{H+K}
    trace_product = 2 * math.cosh(1.0) ** 2         # Tr e^H e^K
    commutator = 2 * math.sqrt(2.0)                 # ||[sz, sx]||_F = ||2i sy||_F


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rand_herm(rng, n, sigma=1.0):
    z = rng.standard_normal((2, n, n))
    G = (z[0] + 1j * z[1]) * sigma / math.sqrt(2)
    return (G + G.conj().T) / 2


def rand_pd(rng, n, spread=1.0):
    return np_expm_h(rand_herm(rng, n, spread))


def np_expm_h(H):
    """Reference matrix exponential through numpy's Hermitian eigensolver."""
    w, U = np.linalg.eigh(H)
    return (U * np.exp(w)) @ U.conj().T


def np_func_h(A, f):
    w, U = np.linalg.eigh((A + A.conj().T) / 2)
    return (U * f(w)) @ U.conj().T


def rel_err(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
