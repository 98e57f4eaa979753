"""
Checks for the Golden-Thompson family of trace, norm and log-majorization inequalities.

Every check compares two real numbers (or two singular value vectors) and
reports a :class:`CheckResult`. Checks that are naturally evaluated over a
grid of weights return a :class:`ResultBatch`, which stores the same fields
as arrays and expands to individual results on demand.

Naming used throughout:

* ``mean``  -- (e^{rH} #_t e^{rK})^{1/r}
* ``exp``   -- e^{(1-t)H + tK}
* ``sym``   -- e^{(1-t)H/2} e^{tK} e^{(1-t)H/2}, whose trace equals Tr e^{(1-t)H} e^{tK}
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, RangeError
from .linalg import (
    SpectralDecomposition,
    as_hermitian,
    as_positive_definite,
    commutator_norm,
    dagger,
    eigvalsh,
    hermitian_eig,
    hermitian_part,
    mexp,
    mlog,
    mpow,
    singular_values,
    spread,
)
from .majorization import (
    MajorizationVerdict,
    NormSelector,
    log_majorization_compare,
    log_prefix_products_via_compounds,
)
from .means import geometric_mean

REL_TOL = 1e-9
KAPPA = 1e8
COMMUTE_TOL = 1e-10

HOLDS = "holds"
EQUALITY = "equality"
VIOLATED = "violated"
NOT_APPLICABLE = "not_applicable"
RECORDED = "recorded"


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    lhs: float
    rhs: float
    gap: float
    tol: float
    verdict: str
    context: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != VIOLATED

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "tol": self.tol,
            "verdict": self.verdict,
            "context": self.context,
        }


def _verdicts(gap: np.ndarray, tol: np.ndarray) -> np.ndarray:
    out = np.full(gap.shape, HOLDS, dtype=object)
    out[np.abs(gap) <= tol] = EQUALITY
    out[~(gap >= -tol)] = VIOLATED
    return out


def default_tol(lhs, rhs, rel: float = REL_TOL):
    return rel * np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)


def compare(check_id: str, lhs: float, rhs: float, context: dict | None = None, tol: float | None = None) -> CheckResult:
    """Assert ``lhs <= rhs`` up to ``tol`` (default 1e-9 * max(|lhs|, |rhs|, 1))."""
    lhs = float(lhs)
    rhs = float(rhs)
    tol = float(default_tol(lhs, rhs)) if tol is None else float(tol)
    gap = rhs - lhs
    verdict = _verdicts(np.array([gap]), np.array([tol]))[0]
    return CheckResult(check_id, lhs, rhs, gap, tol, verdict, dict(context or {}))


def agree(check_id: str, x: float, y: float, context: dict | None = None, tol: float | None = None) -> CheckResult:
    """Assert ``x == y`` up to ``tol``; the gap is ``-|x - y|``."""
    x = float(x)
    y = float(y)
    tol = float(default_tol(x, y)) if tol is None else float(tol)
    gap = -abs(x - y)
    verdict = EQUALITY if -gap <= tol else VIOLATED
    return CheckResult(check_id, x, y, gap, tol, verdict, dict(context or {}))


def not_applicable(check_id: str, context: dict | None = None) -> CheckResult:
    return CheckResult(check_id, math.nan, math.nan, math.nan, math.nan, NOT_APPLICABLE, dict(context or {}))


def from_majorization(check_id: str, verdict: MajorizationVerdict, context: dict | None = None,
                      expected: str = "log", n: int | None = None) -> CheckResult:
    """Wrap a majorization verdict as a check of ``relation >= expected``.

    The gap is the worst prefix margin over the first n-1 prefixes. For
    ``expected="log"`` a total log-product mismatch is folded in as
    ``-|total| / 10`` so that ``gap < -tol`` holds exactly when the relation
    falls short (the total slack is ten times the prefix slack).
    """
    margins = np.asarray(verdict.prefix_margins)
    n = margins.size if n is None else n
    tol = n * 1e-10
    inner = float(np.min(margins[:-1])) if margins.size > 1 else 0.0
    if expected == "log":
        gap = inner if verdict.relation == "log" else min(inner, -abs(verdict.total_difference) / 10.0)
    else:
        gap = float(verdict.worst_margin)
    if not verdict.at_least(expected):
        result = VIOLATED
        gap = min(gap, -2 * tol)
    else:
        result = EQUALITY if abs(gap) <= tol else HOLDS
    ctx = dict(context or {})
    ctx["relation"] = verdict.relation
    ctx["total_log_difference"] = float(verdict.total_difference)
    return CheckResult(check_id, float(-verdict.total_difference), 0.0, gap, tol, result, ctx)


@dataclass
class ResultBatch:
    """Array form of many results sharing a check id and parameters, indexed by weight ``t``."""

    check_id: str
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    gap: np.ndarray
    tol: np.ndarray
    verdict: np.ndarray
    params: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, check_id, t, lhs, rhs, params=None, equality=False, rel=REL_TOL):
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        tol = default_tol(lhs, rhs, rel)
        if equality:
            gap = -np.abs(rhs - lhs)
            verdict = np.where(-gap <= tol, EQUALITY, VIOLATED).astype(object)
        else:
            gap = rhs - lhs
            verdict = _verdicts(gap, tol)
        return cls(check_id, np.asarray(t, dtype=float), lhs, rhs, gap, tol, verdict, dict(params or {}))

    def __len__(self):
        return self.t.size

    @property
    def violated(self) -> np.ndarray:
        return self.verdict == VIOLATED

    def results(self, context: dict | None = None, only_violated: bool = False) -> list[CheckResult]:
        out = []
        for i in range(len(self)):
            if only_violated and self.verdict[i] != VIOLATED:
                continue
            ctx = dict(context or {})
            ctx.update(self.params)
            ctx["t"] = float(self.t[i])
            out.append(CheckResult(self.check_id, float(self.lhs[i]), float(self.rhs[i]), float(self.gap[i]),
                                   float(self.tol[i]), str(self.verdict[i]), ctx))
        return out


def logmaj_batch(check_id: str, ts, a: np.ndarray, b: np.ndarray, params: dict | None = None) -> ResultBatch:
    """Row-wise log-majorization of positive descending spectra ``a`` by ``b`` (shape (T, n)).

    Same verdict and gap conventions as :func:`from_majorization` with
    ``expected="log"``; entries must be strictly positive.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[-1]
    tol = n * 1e-10
    with np.errstate(divide="ignore"):
        margins = np.cumsum(np.log(b), axis=-1) - np.cumsum(np.log(a), axis=-1)
    total = margins[:, -1]
    inner = np.min(margins[:, :-1], axis=-1) if n > 1 else np.zeros(len(total))
    is_log = (inner >= -tol) & (np.abs(total) <= n * 1e-9)
    gap = np.where(is_log, inner, np.minimum(np.minimum(inner, -np.abs(total) / 10.0), -2 * tol))
    gap = np.where(np.isnan(gap), -np.inf, gap)
    verdict = np.where(is_log, np.where(np.abs(gap) <= tol, EQUALITY, HOLDS), VIOLATED).astype(object)
    return ResultBatch(check_id, np.atleast_1d(np.asarray(ts, dtype=float)), -total, np.zeros_like(total),
                       gap, np.full(total.shape, tol), verdict, dict(params or {}))


# ---------------------------------------------------------------------------
# weights, regimes, conditioning

REGIMES = ("interior", "near_exterior", "far_exterior")

# pairs (x, y) meaning |||x||| <= |||y||| in each regime
REGIME_ORDERINGS = {
    "interior": (("mean", "exp"), ("exp", "sym")),
    "near_exterior": (("exp", "sym"), ("sym", "mean")),
    "far_exterior": (("exp", "mean"), ("mean", "sym")),
}


def regimes(t: float) -> tuple[str, ...]:
    """Every regime containing ``t``; boundary weights belong to both neighbours."""
    out = []
    if 0.0 <= t <= 1.0:
        out.append("interior")
    if -1.0 <= t <= 0.0 or 1.0 <= t <= 2.0:
        out.append("near_exterior")
    if t <= -1.0 or t >= 2.0:
        out.append("far_exterior")
    return tuple(out)


def regime_label(t: float) -> str:
    return "|".join(regimes(t))


def regime_mask(ts: np.ndarray, regime: str) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if regime == "interior":
        return (ts >= 0) & (ts <= 1)
    if regime == "near_exterior":
        return ((ts >= -1) & (ts <= 0)) | ((ts >= 1) & (ts <= 2))
    if regime == "far_exterior":
        return (ts <= -1) | (ts >= 2)
    raise ValueError(f"unknown regime {regime!r}")


def mean_weight(ts, r: float = 1.0) -> float:
    """Exponent multiplier bounding the spectral spread of every matrix formed for these weights.

    The exponential and symmetric-product sides do not scale with r, hence
    the factor max(r, 1).
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    r = max(r, 1.0)
    if ts.size == 0:
        return r
    return float(r * (np.max(np.maximum(np.abs(ts), np.abs(1 - ts))) + 1.0))


def condition_guard(H, K, weight: float, kappa: float = KAPPA):
    """Shrink (H, K) so that exp(weight * (spread H + spread K)) <= kappa.

    Returns the possibly rescaled pair and the factor applied; this is the
    same as drawing with ``sigma * factor``.
    """
    total = weight * (spread(H) + spread(K))
    limit = math.log(kappa)
    factor = 1.0 if total <= limit else limit / total
    if factor == 1.0:
        return H, K, 1.0
    return H * factor, K * factor, factor


def commutes(H, K, tol: float = COMMUTE_TOL) -> bool:
    scale = 1.0 + np.linalg.norm(H) * np.linalg.norm(K)
    return commutator_norm(H, K) <= tol * scale


# ---------------------------------------------------------------------------
# spectra of the three operator families over a grid of weights

def _exp_stack(dec, coeff) -> np.ndarray:
    """U diag(exp(c w)) U* for each coefficient c."""
    c = np.atleast_1d(np.asarray(coeff, dtype=float))
    with np.errstate(over="ignore"):
        fw = np.exp(c[:, None] * dec.eigenvalues[None, :])
    if not np.all(np.isfinite(fw)):
        raise RangeError("matrix exponential overflowed")
    U = dec.eigenvectors
    return (U[None] * fw[:, None, :]) @ dagger(U)[None]


def _pd_eigs(M: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(M)):
        raise RangeError("non-finite matrix entries")
    w = eigvalsh(M)
    return np.clip(w, 0.0, None)


def _sandwich_eigs(P, Q, P_inv, Q_inv) -> np.ndarray:
    """Eigenvalues of P Q P (P, Q positive definite) with relative accuracy at both ends.

    Eigenvalues of the formed product are accurate only relative to the
    largest one, so the lower half of the spectrum is taken from the
    inverse sandwich P^{-1} Q^{-1} P^{-1}, whose largest eigenvalues are the
    reciprocals of the smallest ones.
    """
    hi = _pd_eigs(hermitian_part(P @ Q @ P))
    lo = 1.0 / _pd_eigs(hermitian_part(P_inv @ Q_inv @ P_inv))[..., ::-1]
    split = np.sqrt(hi[..., :1] * lo[..., -1:])
    return -np.sort(-np.where(hi >= split, hi, lo), axis=-1)


def exp_singular_values(H, K, ts) -> np.ndarray:
    """Singular values of e^{(1-t)H+tK}, shape (T, n)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    S = (1 - ts)[:, None, None] * H[None] + ts[:, None, None] * K[None]
    with np.errstate(over="ignore"):
        s = np.exp(eigvalsh(S))
    if not np.all(np.isfinite(s)):
        raise RangeError("exponential overflowed")
    return s


def sym_singular_values(H, K, ts, decH=None, decK=None) -> np.ndarray:
    """Singular values of e^{(1-t)H/2} e^{tK} e^{(1-t)H/2}, shape (T, n)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    decH = decH or hermitian_eig(H)
    decK = decK or hermitian_eig(K)
    E1 = _exp_stack(decH, (1 - ts) / 2)
    E2 = _exp_stack(decK, ts)
    return _pd_eigs(hermitian_part(E1 @ E2 @ E1))


def mean_singular_values(H, K, ts, r: float = 1.0, switch: bool = False, decH=None, decK=None) -> np.ndarray:
    """Singular values of (e^{rH} #_t e^{rK})^{1/r}, shape (T, n).

    With ``switch=True`` the mean is evaluated as e^{rK} #_{1-t} e^{rH}.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    decH = decH or hermitian_eig(H)
    decK = decK or hermitian_eig(K)
    if switch:
        decH, decK, ts = decK, decH, 1 - ts
    with np.errstate(over="ignore"):
        decX = SpectralDecomposition(np.exp(r * decH.eigenvalues), decH.eigenvectors)
    X = decX.reconstruct()
    Y = _exp_stack(decK, [r])[0]
    M = geometric_mean(X, Y, ts, decX=decX)
    return _pd_eigs(M) ** (1.0 / r)


def product_singular_values(H, K, ts) -> np.ndarray:
    """Singular values of the non-normal product e^{(1-t)H} e^{tK}; informational only."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    P = _exp_stack(hermitian_eig(H), 1 - ts) @ _exp_stack(hermitian_eig(K), ts)
    return singular_values(P)


def _prep(H, K):
    H = as_hermitian(H)
    K = as_hermitian(K)
    if H.shape != K.shape or H.ndim != 2:
        raise DimensionError(f"dimension mismatch: {H.shape} vs {K.shape}")
    return H, K


def _trace_real(M) -> tuple[float, float]:
    tr = np.trace(M)
    return float(tr.real), float(abs(tr.imag))


# ---------------------------------------------------------------------------
# Golden-Thompson and the three-regime ordering

def golden_thompson(H, K) -> CheckResult:
    """Tr e^{H+K} <= Tr e^H e^K."""
    H, K = _prep(H, K)
    lhs = float(np.sum(np.exp(eigvalsh(H + K))))
    rhs, imag = _trace_real(mexp(H) @ mexp(K))
    return compare("golden_thompson", lhs, rhs, {"imag_residual": imag})


def theorem2_batches(H, K, ts, norms: list[NormSelector], context: dict | None = None) -> list[ResultBatch]:
    """Regime orderings of mean (r=1), exp and sym norms over a weight grid.

    Negative weights are evaluated both directly and through the switch
    relation; a ``theorem2_switch`` batch asserts the two agree.
    """
    H, K = _prep(H, K)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    decH, decK = hermitian_eig(H), hermitian_eig(K)
    sv = {
        "mean": mean_singular_values(H, K, ts, decH=decH, decK=decK),
        "exp": exp_singular_values(H, K, ts),
        "sym": sym_singular_values(H, K, ts, decH, decK),
    }
    neg = ts < 0
    switched = mean_singular_values(H, K, ts[neg], switch=True, decH=decH, decK=decK) if np.any(neg) else None
    out = []
    for sel in norms:
        vals = {k: sel.of_singular_values(v) for k, v in sv.items()}
        for regime in REGIMES:
            mask = regime_mask(ts, regime)
            if not np.any(mask):
                continue
            for x, y in REGIME_ORDERINGS[regime]:
                out.append(ResultBatch.compare(
                    "theorem2", ts[mask], vals[x][mask], vals[y][mask],
                    {"norm": sel.label, "regime": regime, "ordering": f"{x}<={y}"},
                ))
        if switched is not None:
            out.append(ResultBatch.compare(
                "theorem2_switch", ts[neg], vals["mean"][neg], sel.of_singular_values(switched),
                {"norm": sel.label}, equality=True,
            ))
    return out


def three_way_compare(H, K, t: float, sel: NormSelector) -> list[CheckResult]:
    """Three-family regime ordering at a single weight: the pairwise results of each regime containing ``t``."""
    out = []
    for batch in theorem2_batches(H, K, [t], [sel]):
        out.extend(batch.results({"regime_label": regime_label(t)}))
    return out


def norm_triple(H, K, t: float, sel: NormSelector) -> tuple[float, float, float]:
    """(|||mean|||, |||exp|||, |||sym|||) at weight t with r = 1."""
    H, K = _prep(H, K)
    return (
        float(sel.of_singular_values(mean_singular_values(H, K, [t]))[0]),
        float(sel.of_singular_values(exp_singular_values(H, K, [t]))[0]),
        float(sel.of_singular_values(sym_singular_values(H, K, [t]))[0]),
    )


# ---------------------------------------------------------------------------
# interpolation between the mean and the exponential of the convex combination

def interpolation_batches(H, K, ts, r: float, norms: list[NormSelector], logmaj: bool = False) -> list[ResultBatch]:
    """Interior (0<=t<=1: mean <= exp) and exterior (otherwise: exp <= mean) comparisons.

    Exterior weights t < 0 go through the switch relation. With ``logmaj``
    the exterior weights also get the log-majorization form.
    """
    H, K = _prep(H, K)
    if not r > 0:
        raise DomainError("r must be positive")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    inside = (ts >= 0) & (ts <= 1)
    outside = (ts <= 0) | (ts >= 1)
    decH, decK = hermitian_eig(H), hermitian_eig(K)
    e = exp_singular_values(H, K, ts)
    m = np.empty_like(e)
    neg = ts < 0
    if np.any(~neg):
        m[~neg] = mean_singular_values(H, K, ts[~neg], r, decH=decH, decK=decK)
    if np.any(neg):
        m[neg] = mean_singular_values(H, K, ts[neg], r, switch=True, decH=decH, decK=decK)
    out = []
    for sel in norms:
        mv = sel.of_singular_values(m)
        ev = sel.of_singular_values(e)
        if np.any(inside):
            out.append(ResultBatch.compare("interior", ts[inside], mv[inside], ev[inside],
                                           {"norm": sel.label, "r": r}))
        if np.any(outside):
            out.append(ResultBatch.compare("exterior", ts[outside], ev[outside], mv[outside],
                                           {"norm": sel.label, "r": r}))
    if logmaj and np.any(outside):
        out.append(logmaj_batch("exterior_logmaj", ts[outside], e[outside], m[outside], {"r": r}))
    return out


def interior_interpolation(H, K, t: float, r: float, sel: NormSelector) -> CheckResult:
    """|||(e^{rH} #_t e^{rK})^{1/r}||| <= |||e^{(1-t)H+tK}||| for 0 <= t <= 1."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interior interpolation needs 0 <= t <= 1, got {t}")
    return [b for b in interpolation_batches(H, K, [t], r, [sel]) if b.check_id == "interior"][0].results()[0]


def exterior_interpolation(H, K, t: float, r: float, sel: NormSelector) -> CheckResult:
    """|||e^{(1-t)H+tK}||| <= |||(e^{rH} #_t e^{rK})^{1/r}||| for t <= 0 or t >= 1."""
    if 0.0 < t < 1.0:
        raise DomainError(f"exterior interpolation needs t <= 0 or t >= 1, got {t}")
    return [b for b in interpolation_batches(H, K, [t], r, [sel]) if b.check_id == "exterior"][0].results()[0]


def exterior_logmaj(H, K, t: float, r: float) -> CheckResult:
    """Log-majorization form: e^{(1-t)H+tK} is log-majorized by (e^{rH} #_t e^{rK})^{1/r}."""
    H, K = _prep(H, K)
    e = exp_singular_values(H, K, [t])[0]
    m = mean_singular_values(H, K, [t], r, switch=t < 0)[0]
    return from_majorization("exterior_logmaj", log_majorization_compare(e, m), {"t": t, "r": r})


# ---------------------------------------------------------------------------
# Hiai's bounds for t >= 1

def hiai_branches(t: float, r: float) -> tuple[str, ...]:
    out = []
    if r >= max(t / 2, t - 1):
        out.append("upper")
    if r <= min(t / 2, t - 1):
        out.append("lower")
    return tuple(out)


def hiai_batches(H, K, ts, r: float, norms: list[NormSelector], logmaj: bool = False) -> list[ResultBatch]:
    """sym <= mean when r >= max(t/2, t-1); mean <= sym when r <= min(t/2, t-1); t >= 1 only."""
    H, K = _prep(H, K)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    ts = ts[ts >= 1]
    upper = ts[r >= np.maximum(ts / 2, ts - 1)]
    lower = ts[r <= np.minimum(ts / 2, ts - 1)]
    decH, decK = hermitian_eig(H), hermitian_eig(K)
    out = []
    for branch, sel_t in (("upper", upper), ("lower", lower)):
        if sel_t.size == 0:
            continue
        m = mean_singular_values(H, K, sel_t, r, decH=decH, decK=decK)
        s = sym_singular_values(H, K, sel_t, decH, decK)
        for sel in norms:
            mv, sv_ = sel.of_singular_values(m), sel.of_singular_values(s)
            lhs, rhs = (sv_, mv) if branch == "upper" else (mv, sv_)
            out.append(ResultBatch.compare("hiai", sel_t, lhs, rhs, {"norm": sel.label, "r": r, "branch": branch}))
        if logmaj:
            a, b = (s, m) if branch == "upper" else (m, s)
            out.append(logmaj_batch("hiai_logmaj", sel_t, a, b, {"r": r, "branch": branch}))
    return out


def hiai2019_regime(H, K, t: float, r: float, sel: NormSelector) -> list[CheckResult]:
    """Norm and log-majorization forms of Hiai's bounds at (t, r).

    Returns a single ``not_applicable`` result when r lies strictly between
    min(t/2, t-1) and max(t/2, t-1).
    """
    if t < 1:
        raise DomainError(f"Hiai bounds need t >= 1, got {t}")
    if not r > 0:
        raise DomainError("r must be positive")
    branches = hiai_branches(t, r)
    if not branches:
        return [not_applicable("hiai", {"t": t, "r": r, "norm": sel.label})]
    out = []
    for batch in hiai_batches(H, K, [t], r, [sel]):
        out.extend(batch.results())
    out.extend(hiai_logmaj(H, K, t, r))
    return out


def hiai_logmaj(H, K, t: float, r: float) -> list[CheckResult]:
    H, K = _prep(H, K)
    branches = hiai_branches(t, r)
    if not branches:
        return [not_applicable("hiai_logmaj", {"t": t, "r": r})]
    m = mean_singular_values(H, K, [t], r)[0]
    s = sym_singular_values(H, K, [t])[0]
    out = []
    for branch in branches:
        a, b = (s, m) if branch == "upper" else (m, s)
        out.append(from_majorization("hiai_logmaj", log_majorization_compare(a, b),
                                     {"t": t, "r": r, "branch": branch}))
    return out


# ---------------------------------------------------------------------------
# Araki, Golden-Thompson log-majorization, near-exterior log-majorization, Furuta

def araki_check(A, B, r: float) -> MajorizationVerdict:
    """(A^{1/2} B A^{1/2})^r is log-majorized by A^{r/2} B^r A^{r/2} for r >= 1."""
    if r < 1:
        raise DomainError(f"Araki's inequality needs r >= 1, got {r}")
    A = as_positive_definite(A)
    B = as_positive_definite(B)
    decA, decB = hermitian_eig(A), hermitian_eig(B)
    left = _sandwich_eigs(mpow(A, 0.5, decA), B, mpow(A, -0.5, decA), mpow(B, -1.0, decB)) ** r
    right = _sandwich_eigs(mpow(A, r / 2, decA), mpow(B, r, decB), mpow(A, -r / 2, decA), mpow(B, -r, decB))
    return log_majorization_compare(left, right)


def _sandwich_power_eigs(H, K, q: float) -> np.ndarray:
    """Eigenvalues of (e^{qH/2} e^{qK} e^{qH/2})^{1/q}."""
    decH, decK = hermitian_eig(H), hermitian_eig(K)
    E, F = _exp_stack(decH, [q / 2, -q / 2]), _exp_stack(decK, [q, -q])
    return _sandwich_eigs(E[0], F[0], E[1], F[1]) ** (1.0 / q)


def gt_logmaj(H, K, q: float) -> MajorizationVerdict:
    """e^{H+K} is log-majorized by (e^{qH/2} e^{qK} e^{qH/2})^{1/q} for q > 0."""
    if not q > 0:
        raise DomainError("q must be positive")
    H, K = _prep(H, K)
    with np.errstate(over="ignore"):
        left = np.exp(eigvalsh(H + K))
    return log_majorization_compare(left, _sandwich_power_eigs(H, K, q))


def kyfan_monotonicity(H, K, q_grid, step_slack: float = REL_TOL) -> list[CheckResult]:
    """Ky Fan k-norms of (e^{qH/2} e^{qK} e^{qH/2})^{1/q} are nondecreasing along ``q_grid``.

    One result per k; ``context["strict"]`` records whether every step
    increased by more than the slack.
    """
    H, K = _prep(H, K)
    qs = sorted(float(q) for q in q_grid)
    if len(qs) < 2:
        raise ValueError("need at least two q values")
    values = np.array([np.cumsum(_sandwich_power_eigs(H, K, q)) for q in qs])  # (Q, n)
    out = []
    for k in range(values.shape[1]):
        col = values[:, k]
        steps = np.diff(col)
        tols = step_slack * np.maximum(np.abs(col[1:]), 1.0)
        worst = int(np.argmin(steps + tols))
        res = compare("kyfan_monotone", col[worst], col[worst + 1],
                      {"k": k + 1, "q_from": qs[worst], "q_to": qs[worst + 1],
                       "strict": bool(np.all(steps > tols))},
                      tol=float(tols[worst]))
        out.append(res)
    return out


def theorem5_check(H, K, t: float) -> MajorizationVerdict:
    """e^{(1-t)H/2} e^{tK} e^{(1-t)H/2} is log-majorized by e^H #_t e^K for 1 <= t <= 2."""
    if not 1.0 <= t <= 2.0:
        raise DomainError(f"the symmetrized log-majorization needs 1 <= t <= 2, got {t}")
    H, K = _prep(H, K)
    left = sym_singular_values(H, K, [t])[0]
    right = mean_singular_values(H, K, [t])[0]
    return log_majorization_compare(left, right)


def theorem5_compound_crosscheck(H, K, t: float, rel: float = REL_TOL) -> CheckResult:
    """Prefix log-products of both sides via compound matrices versus the eigenvalue route.

    Also re-evaluates the log-majorization verdict from the compound route and
    reports it in the context.
    """
    H, K = _prep(H, K)
    decH, decK = hermitian_eig(H), hermitian_eig(K)
    E1 = _exp_stack(decH, [(1 - t) / 2])[0]
    left = hermitian_part(E1 @ _exp_stack(decK, [t])[0] @ E1)
    right = geometric_mean(mexp(H), mexp(K), t)
    worst = 0.0
    routes = []
    for M in (left, right):
        via_compound = log_prefix_products_via_compounds(M, hermitian=True)
        via_eig = np.cumsum(np.log(_pd_eigs(M)))
        worst = max(worst, float(np.max(np.abs(via_compound - via_eig))))
        routes.append(via_compound)
    slack = np.diff(np.concatenate([[0.0], routes[1]])), np.diff(np.concatenate([[0.0], routes[0]]))
    verdict = log_majorization_compare(np.exp(slack[1]), np.exp(slack[0]))
    return agree("theorem5_compound", worst, 0.0, {"t": t, "compound_relation": verdict.relation}, tol=rel)


def furuta_check(A, B, r: float, p: float, q: float) -> CheckResult:
    """(A^r B^p A^r)^{1/q} <= A^{(p+2r)/q} in the Loewner order, given A >= B >= 0.

    Returns ``not_applicable`` when the exponent conditions or A >= B fail.
    """
    ctx = {"r": r, "p": p, "q": q}
    if not (r >= 0 and p >= 0 and q >= 1 and (1 + 2 * r) * q >= p + 2 * r - 1e-12):
        return not_applicable("furuta", ctx)
    A = as_positive_definite(A)
    B = as_positive_definite(B)
    decA = hermitian_eig(A)
    lam_a = decA.eigenvalues[0]
    d = eigvalsh(hermitian_part(A - B))[-1]
    if d < -1e-10 * lam_a:
        ctx["min_eig_A_minus_B"] = float(d)
        return not_applicable("furuta", ctx)
    Ar = mpow(A, r, decA)
    left = mpow(hermitian_part(Ar @ mpow(B, p) @ Ar), 1.0 / q)
    right = mpow(A, (p + 2 * r) / q, decA)
    gap = float(eigvalsh(hermitian_part(right - left))[-1])
    ln = float(eigvalsh(left)[0])
    rn = float(eigvalsh(right)[0])
    tol = float(default_tol(ln, rn))
    verdict = _verdicts(np.array([gap]), np.array([tol]))[0]
    return CheckResult("furuta", ln, rn, gap, tol, verdict, ctx)


def furuta_instance(H, K, t: float):
    """Furuta exponents and operators that yield the log-majorization of ``theorem5_check``.

    (H, K) is shifted by a common multiple of the identity so that
    e^H #_t e^K <= I; then A = e^{-K}, B = (e^{K/2} e^{-H} e^{K/2})^{t-1},
    r = 1/2 and p = q = 1/(t-1). Requires 1 < t <= 2.
    """
    if not 1.0 < t <= 2.0:
        raise DomainError(f"Furuta instantiation needs 1 < t <= 2, got {t}")
    H, K = _prep(H, K)
    top = mean_singular_values(H, K, [t])[0][0]
    shift = math.log(top) * np.eye(H.shape[0])
    H = H - shift
    K = K - shift
    decK = hermitian_eig(K)
    A = mexp(-K, None)
    Kh = _exp_stack(decK, [0.5])[0]
    inner = hermitian_part(Kh @ mexp(-H) @ Kh)
    B = mpow(inner, t - 1)
    e = 1.0 / (t - 1)
    return A, B, 0.5, e, e


# ---------------------------------------------------------------------------
# equality cases, derivative identities, Lie-Trotter, convexity, conjecture

def theorem1_gap(H, K, t: float, r: float, sel: NormSelector) -> CheckResult:
    if 0.0 <= t <= 1.0:
        return interior_interpolation(H, K, t, r, sel)
    return exterior_interpolation(H, K, t, r, sel)


def equality_diagnostic(H, K, t: float, r: float, sel: NormSelector, gap_floor: float = 1e-6) -> CheckResult:
    """Gap of the interpolation inequality at (t, r) next to the commutator norm.

    A commuting pair must give equality; a failure to do so is the only
    asserted outcome. For other pairs the context records whether the
    relative gap exceeds ``gap_floor``.
    """
    H, K = _prep(H, K)
    n = H.shape[0]
    if not sel.strictly_increasing(n):
        raise DomainError(f"{sel.label} is not strictly increasing in dimension {n}")
    res = theorem1_gap(H, K, t, r, sel)
    comm = commutator_norm(H, K)
    scale = max(abs(res.lhs), abs(res.rhs), 1.0)
    ctx = dict(res.context, commutator=comm, commuting=commutes(H, K), t=t, r=r, norm=sel.label,
               gap_exceeds_floor=bool(res.gap > gap_floor * scale))
    if ctx["commuting"]:
        verdict = EQUALITY if abs(res.gap) <= res.tol else VIOLATED
    else:
        verdict = res.verdict
    return CheckResult("equality", res.lhs, res.rhs, res.gap, res.tol, verdict, ctx)


def _op_norm_herm(H) -> float:
    w = eigvalsh(H)
    return float(max(abs(w[0]), abs(w[-1])))


def derivative_identities(H, K, r: float = 1.0, h: float = 1e-4) -> list[CheckResult]:
    """Derivative forms of the interpolation inequalities at t = 0 and t = 2.

    Returns four results: the inequality at t = 0, the inequality at
    t = 2, and for each a finite-difference agreement check of the analytic
    derivatives against central differences with step ``h``.
    """
    if not r > 0:
        raise DomainError("r must be positive")
    if not 1e-6 <= h <= 1e-3:
        raise DomainError(f"step h must lie in [1e-6, 1e-3], got {h}")
    H, K = _prep(H, K)
    n = H.shape[0]
    eH = mexp(H)

    # t = 0
    Ehalf = mexp(r * H / 2)
    inner0 = hermitian_part(Ehalf @ mexp(-r * K) @ Ehalf)
    rhs0 = float(np.trace(eH @ mlog(inner0)).real) / r
    lhs0 = float(np.trace(eH @ (H - K)).real)
    ineq0 = compare("derivative_t0", lhs0, rhs0, {"r": r})

    def f(ts):
        return np.sum(mean_singular_values(H, K, ts, r), axis=-1)

    def g(ts):
        return np.sum(exp_singular_values(H, K, ts), axis=-1)

    fv = f([-h, 0.0, h])
    gv = g([-h, 0.0, h])
    fd_f = (fv[2] - fv[0]) / (2 * h)
    fd_g = (gv[2] - gv[0]) / (2 * h)
    L0 = _op_norm_herm(mlog(inner0)) / r
    curv_f = abs(fv[1]) * L0 ** 3
    curv_g = abs(gv[1]) * _op_norm_herm(K - H) ** 3
    tol_f = max(1e-6, 10 * h * h * curv_f)
    tol_g = max(1e-6, 10 * h * h * curv_g)
    err0 = max(abs(fd_f - (-rhs0)) - tol_f, abs(fd_g - (-lhs0)) - tol_g)
    fd0 = CheckResult("derivative_fd_t0", float(fd_f), float(-rhs0), -abs(fd_f + rhs0), tol_f,
                      EQUALITY if err0 <= 0 else VIOLATED,
                      {"r": r, "h": h, "fd_exp": float(fd_g), "analytic_exp": -lhs0, "tol_exp": tol_g})

    # t = 2
    decH = hermitian_eig(H)
    Em = _exp_stack(decH, [-0.5])[0]
    eK = mexp(K)
    e2K = mexp(2 * K)
    inner2 = hermitian_part(Em @ eK @ Em)
    lhs2 = float(np.trace(hermitian_part(Em @ e2K @ Em) @ mlog(inner2)).real)
    rhs2 = float(np.trace(_exp_stack(decH, [-1.0])[0] @ e2K @ (K - H)).real)
    ineq2 = compare("derivative_t2", lhs2, rhs2, {})

    ts2 = [2 - h, 2.0, 2 + h]
    Fv = np.sum(mean_singular_values(H, K, ts2), axis=-1)
    P = _exp_stack(decH, [1 - s for s in ts2]) @ _exp_stack(hermitian_eig(K), ts2)
    Gv = np.trace(P, axis1=-2, axis2=-1).real
    fd_F = (Fv[2] - Fv[0]) / (2 * h)
    fd_G = (Gv[2] - Gv[0]) / (2 * h)
    L2 = _op_norm_herm(mlog(inner2))
    curv_F = abs(Fv[1]) * L2 ** 3
    hk = _op_norm_herm(H) + _op_norm_herm(K)
    curv_G = n * math.exp(_op_norm_herm(H) + 2 * _op_norm_herm(K)) * hk ** 3
    tol_F = max(1e-6, 10 * h * h * curv_F)
    tol_G = max(1e-6, 10 * h * h * curv_G)
    err2 = max(abs(fd_F - lhs2) - tol_F, abs(fd_G - rhs2) - tol_G)
    fd2 = CheckResult("derivative_fd_t2", float(fd_F), lhs2, -abs(fd_F - lhs2), tol_F,
                      EQUALITY if err2 <= 0 else VIOLATED,
                      {"h": h, "fd_product": float(fd_G), "analytic_product": rhs2, "tol_product": tol_G})
    return [ineq0, ineq2, fd0, fd2]


def trotter_errors(H, K, m_list) -> np.ndarray:
    H, K = _prep(H, K)
    target = mexp(H + K)
    decH, decK = hermitian_eig(H), hermitian_eig(K)
    errs = []
    for m in m_list:
        step = _exp_stack(decH, [1.0 / m])[0] @ _exp_stack(decK, [1.0 / m])[0]
        errs.append(np.linalg.norm(np.linalg.matrix_power(step, int(m)) - target))
    return np.array(errs)


def lie_trotter_check(H, K, m_list, window: tuple[float, float] = (0.3, 0.7), tail: int = 2) -> CheckResult:
    """First-order convergence of (e^{H/m} e^{K/m})^m to e^{H+K}.

    Errors must decrease along ``m_list`` and, for the last ``tail``
    doublings, the ratio e(2m)/e(m) must fall inside ``window``. A commuting
    pair only needs every error below 1e-10.
    """
    ms = [int(m) for m in m_list]
    if not ms or any(m <= 0 for m in ms) or ms != sorted(ms):
        raise ValueError("m_list must be ascending positive integers")
    errs = trotter_errors(H, K, ms)
    ctx = {"m": ms, "errors": [float(e) for e in errs]}
    if commutes(as_hermitian(H), as_hermitian(K)):
        worst = float(np.max(errs))
        return CheckResult("lie_trotter", worst, 1e-10, 1e-10 - worst, 1e-10,
                           EQUALITY if worst <= 1e-10 else VIOLATED, ctx)
    lo, hi = window
    ratios = []
    for i, m in enumerate(ms):
        if 2 * m in ms:
            ratios.append((m, errs[ms.index(2 * m)] / errs[i]))
    ratios = ratios[-tail:]
    decrease = float(np.min(-np.diff(errs) / errs[:-1])) if len(errs) > 1 else 0.0
    gaps = [min(rho - lo, hi - rho) for _, rho in ratios] + [decrease]
    gap = float(min(gaps))
    ctx["ratios"] = {str(m): float(rho) for m, rho in ratios}
    worst_ratio = float(max((abs(rho - 0.5), rho) for _, rho in ratios)[1]) if ratios else math.nan
    return CheckResult("lie_trotter", worst_ratio, 0.5, gap, 0.0, HOLDS if gap >= 0 else VIOLATED, ctx)


def _loewner_gap(big, small):
    """Smallest eigenvalue of big - small, plus tolerance and both operator norms.

    Works on stacks as well; the eigenvalue problems of the stack are solved together.
    """
    w = eigvalsh(np.stack([hermitian_part(big - small), big, small]))
    gap = w[0, ..., -1]
    bn = np.max(np.abs(w[1]), axis=-1)
    sn = np.max(np.abs(w[2]), axis=-1)
    return gap, default_tol(bn, sn), sn, bn


def _convexity_form(t: float):
    if 0.0 <= t <= 1.0:
        return "concave"
    if -1.0 <= t <= 0.0 or 1.0 <= t <= 2.0:
        return "convex"
    return None


def convexity_checks(X, Y, X2, Y2, t):
    """Midpoint concavity (0 <= t <= 1) or convexity (t in [-1,0] or [1,2]) of (X, Y) -> X #_t Y.

    ``t`` may be a scalar, giving one result, or a sequence, giving a list
    evaluated with one eigendecomposition per pair.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    X, Y, X2, Y2 = (as_positive_definite(M) for M in (X, Y, X2, Y2))
    forms = [_convexity_form(float(x)) for x in ts]
    keep = np.array([f is not None for f in forms])
    out = [not_applicable("convexity", {"t": float(x)}) for x in ts]
    if np.any(keep):
        tk = ts[keep]
        mid = geometric_mean((X + X2) / 2, (Y + Y2) / 2, tk)
        avg = 0.5 * geometric_mean(X, Y, tk) + 0.5 * geometric_mean(X2, Y2, tk)
        concave = np.array([forms[i] == "concave" for i in np.flatnonzero(keep)])
        big = np.where(concave[:, None, None], mid, avg)
        small = np.where(concave[:, None, None], avg, mid)
        gap, tol, sn, bn = _loewner_gap(big, small)
        verdict = _verdicts(gap, tol)
        for j, i in enumerate(np.flatnonzero(keep)):
            ctx = {"t": float(ts[i]), "form": forms[i]}
            out[i] = CheckResult("convexity", float(sn[j]), float(bn[j]), float(gap[j]), float(tol[j]), verdict[j], ctx)
    return out[0] if np.ndim(t) == 0 else out


def monotonicity_check(X, Y, X2, Y2, t):
    """X <= X2 and Y <= Y2 imply X #_t Y <= X2 #_t Y2 for 0 <= t <= 1.

    Accepts a scalar or a sequence of weights like :func:`convexity_checks`.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    X, Y, X2, Y2 = (as_positive_definite(M) for M in (X, Y, X2, Y2))
    out = [not_applicable("monotonicity", {"t": float(x)}) for x in ts]
    keep = (ts >= 0.0) & (ts <= 1.0)
    ordered = True
    for lo, hi in ((X, X2), (Y, Y2)):
        d = eigvalsh(hermitian_part(hi - lo))[-1]
        if d < -1e-10 * max(np.max(np.abs(eigvalsh(hi))), 1.0):
            ordered = False
    if ordered and np.any(keep):
        tk = ts[keep]
        gap, tol, sn, bn = _loewner_gap(geometric_mean(X2, Y2, tk), geometric_mean(X, Y, tk))
        verdict = _verdicts(gap, tol)
        for j, i in enumerate(np.flatnonzero(keep)):
            out[i] = CheckResult("monotonicity", float(sn[j]), float(bn[j]), float(gap[j]), float(tol[j]),
                                 verdict[j], {"t": float(ts[i])})
    return out[0] if np.ndim(t) == 0 else out


def conjecture_fuzz(H, K, t: float) -> CheckResult:
    """Record the sign of Tr[sym] - Tr[e^H #_t e^K] for t >= 2. Never asserts.

    ``context["candidate"]`` is true when the trace of the mean exceeds
    that of the symmetric product by more than the tolerance.
    """
    if t < 2:
        raise DomainError(f"conjecture concerns t >= 2, got {t}")
    H, K = _prep(H, K)
    mean_tr = float(np.sum(mean_singular_values(H, K, [t])))
    sym_tr = float(np.sum(sym_singular_values(H, K, [t])))
    tol = float(default_tol(mean_tr, sym_tr))
    gap = sym_tr - mean_tr
    return CheckResult("conjecture", mean_tr, sym_tr, gap, tol, RECORDED,
                       {"t": t, "candidate": bool(gap < -tol), "difference": mean_tr - sym_tr})
