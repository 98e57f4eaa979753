"""
Unitarily invariant norms, (log-)majorization of singular values and compound matrices.

Log-majorization is always evaluated on prefix sums of logarithms. The
matrices compared here are exponentials whose singular values can span many
orders of magnitude, so raw prefix products would overflow.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import singular_values

ZERO_RTOL = 1e-14
PREFIX_SLACK = 1e-10
TOTAL_SLACK = 1e-9


@dataclass(frozen=True)
class NormSelector:
    """A unitarily invariant norm, identified by ``kind`` and an optional parameter.

    ``kind`` is one of ``"trace"``, ``"frobenius"``, ``"operator"``,
    ``"kyfan"`` (parameter k) or ``"schatten"`` (parameter p >= 1).
    """

    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in ("trace", "frobenius", "operator", "kyfan", "schatten"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "kyfan":
            if self.param is None or int(self.param) != self.param or self.param < 1:
                raise ValueError(f"Ky Fan index must be a positive integer, got {self.param!r}")
            object.__setattr__(self, "param", int(self.param))
        elif self.kind == "schatten":
            if self.param is None or not self.param >= 1:
                raise ValueError(f"Schatten exponent must be >= 1, got {self.param!r}")
        elif self.param is not None:
            raise ValueError(f"{self.kind} norm takes no parameter")

    @classmethod
    def parse(cls, text: str) -> "NormSelector":
        """Parse ``trace``, ``frobenius``, ``operator``, ``kyfan:k`` or ``schatten:p``."""
        name, _, arg = text.strip().lower().partition(":")
        if name in ("kyfan", "schatten"):
            if not arg:
                raise ValueError(f"norm {name!r} needs a parameter, e.g. {name}:2")
            return cls(name, int(arg) if name == "kyfan" else float(arg))
        if arg:
            raise ValueError(f"norm {name!r} takes no parameter")
        return cls(name)

    @property
    def label(self) -> str:
        if self.param is None:
            return self.kind
        p = self.param
        return f"{self.kind}:{int(p) if float(p).is_integer() else p}"

    def __str__(self) -> str:
        return self.label

    def strictly_increasing(self, n: int) -> bool:
        """Whether strict dominance of singular values forces a strict norm increase in dimension n."""
        if self.kind == "kyfan":
            return self.param == n
        return self.kind != "operator"

    def validate(self, n: int) -> None:
        if self.kind == "kyfan" and self.param > n:
            raise DimensionError(f"Ky Fan index {self.param} exceeds dimension {n}")

    def of_singular_values(self, s: np.ndarray) -> np.ndarray:
        """Evaluate the norm from descending singular values (last axis)."""
        s = np.asarray(s, dtype=float)
        self.validate(s.shape[-1])
        if self.kind == "trace":
            return np.sum(s, axis=-1)
        if self.kind == "operator":
            return s[..., 0]
        if self.kind == "frobenius":
            return np.sqrt(np.sum(s * s, axis=-1))
        if self.kind == "kyfan":
            return np.sum(s[..., : self.param], axis=-1)
        p = float(self.param)
        # factor out s_1 so large exponents do not overflow
        top = s[..., 0]
        safe = np.where(top > 0, top, 1.0)
        return top * np.sum((s / safe[..., None]) ** p, axis=-1) ** (1.0 / p)


def default_norms(n: int) -> list[NormSelector]:
    return [NormSelector("trace"), NormSelector("frobenius"), NormSelector("operator")] + [
        NormSelector("kyfan", k) for k in range(1, n + 1)
    ]


def ui_norm(A, sel: NormSelector, hermitian: bool = False) -> float:
    return float(sel.of_singular_values(singular_values(A, hermitian=hermitian)))


@dataclass(frozen=True)
class MajorizationVerdict:
    relation: str  # "log", "weak_log" or "none"
    worst_margin: float
    prefix_margins: np.ndarray = field(repr=False)
    total_difference: float = 0.0

    def at_least(self, relation: str) -> bool:
        rank = {"none": 0, "weak_log": 1, "log": 2}
        return rank[self.relation] >= rank[relation]


def _log_prefix(v: np.ndarray, zero_floor: float) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore"):
        logs = np.where(v > zero_floor, np.log(np.where(v > 0, v, 1.0)), -np.inf)
    zero = ~(v > zero_floor)
    return logs, zero


def log_majorization_compare(a, b, tol: float | None = None, total_tol: float | None = None) -> MajorizationVerdict:
    """Decide whether ``a`` is (weakly) log-majorized by ``b``.

    Both vectors must be non-negative and sorted descending. Prefix slacks
    ``sum_{i<=k} log b_i - sum_{i<=k} log a_i`` at or above ``-tol`` count as
    holding. The relation is ``log`` when the first n-1 prefixes hold and the
    total slack is within ``total_tol``; otherwise ``weak_log`` needs every
    prefix, the total included, to hold. Defaults are ``n * 1e-10`` and
    ``n * 1e-9``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"vectors must be 1-D of equal length, got {a.shape} and {b.shape}")
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("log-majorization needs non-negative vectors")
    if np.any(np.diff(a) > 0) or np.any(np.diff(b) > 0):
        raise DomainError("vectors must be sorted in descending order")
    n = a.size
    tol = n * PREFIX_SLACK if tol is None else tol
    total_tol = n * TOTAL_SLACK if total_tol is None else total_tol

    top = max(a[0], b[0]) if n else 0.0
    la, za = _log_prefix(a, top * ZERO_RTOL)
    lb, zb = _log_prefix(b, top * ZERO_RTOL)
    # zeros are exact: a zero on the left makes that prefix trivially hold,
    # a zero on the right fails unless matched by a zero on the left
    za_prefix = np.cumsum(za) > 0
    zb_prefix = np.cumsum(zb) > 0
    with np.errstate(invalid="ignore"):
        raw = np.cumsum(np.where(zb, 0.0, lb)) - np.cumsum(np.where(za, 0.0, la))
    margins = np.where(za_prefix, np.where(zb_prefix, 0.0, np.inf), np.where(zb_prefix, -np.inf, raw))
    worst = float(np.min(margins)) if n else 0.0
    total = float(margins[-1]) if n else 0.0
    head_ok = bool(np.all(margins[:-1] >= -tol))
    if head_ok and abs(total) <= total_tol:
        relation = "log"
    elif head_ok and total >= -tol:
        relation = "weak_log"
    else:
        relation = "none"
    return MajorizationVerdict(relation, worst, margins, total)


def weak_majorization(a, b, tol: float = 0.0) -> bool:
    """Plain (signed) weak majorization: prefix sums of sorted ``a`` never exceed those of ``b``."""
    a = -np.sort(-np.asarray(a, dtype=float))
    b = -np.sort(-np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise DimensionError("vectors must have equal length")
    return bool(np.all(np.cumsum(b) - np.cumsum(a) >= -tol))


def matrix_log_majorization(A, B, tol: float | None = None, hermitian: bool = False) -> MajorizationVerdict:
    """Log-majorization of the singular values of ``A`` by those of ``B``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return log_majorization_compare(
        singular_values(A, hermitian=hermitian), singular_values(B, hermitian=hermitian), tol
    )


def compound_matrix(A, k: int) -> np.ndarray:
    """k-th compound (antisymmetric tensor power) of ``A``.

    Entry (I, J) is the minor of ``A`` on rows I and columns J, with the
    k-subsets ordered lexicographically.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if not 1 <= k <= n:
        raise DimensionError(f"compound order k={k} outside 1..{n}")
    idx = np.array(list(combinations(range(n), k)))
    sub = A[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def log_prefix_products_via_compounds(A, hermitian: bool = False) -> np.ndarray:
    """log of s_1(A^{∧k}) for k = 1..n, i.e. prefix sums of log singular values of A."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    out = np.empty(n)
    for k in range(1, n + 1):
        C = compound_matrix(A, k)
        out[k - 1] = np.log(singular_values(C, hermitian=hermitian)[0])
    return out
