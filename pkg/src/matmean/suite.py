"""
Seeded randomized verification suite.

Each trial draws a fresh Hermitian pair from its own random stream, derived
from the master seed and the trial index, so trials can be distributed over
worker processes without changing the report. Every check rescales the pair
through :func:`condition_guard` for its own parameter range before running.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import inequalities as iq
from .inequalities import CheckResult, ResultBatch
from .linalg import commutator_norm, hermitian_part, mexp, random_hermitian, random_unitary
from .majorization import NormSelector, default_norms


def default_t_grid(lo: float = -3.0, hi: float = 3.0, step: float = 0.05) -> tuple[float, ...]:
    count = int(round((hi - lo) / step))
    return tuple(round(lo + i * step, 10) for i in range(count + 1))


@dataclass(frozen=True)
class SuiteConfig:
    n: int = 4
    sigma: float = 1.0
    trials: int = 1000
    seed: int = 42
    t_grid: tuple[float, ...] = field(default_factory=default_t_grid)
    r_grid: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    norms: tuple[str, ...] | None = None
    checks: tuple[str, ...] | None = None
    kappa: float = iq.KAPPA
    q_grid: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    araki_r: tuple[float, ...] = (1.0, 1.5, 2.0, 4.0)
    theorem5_t: tuple[float, ...] = (1.0, 1.25, 1.5, 1.75, 2.0)
    furuta_t: tuple[float, ...] = (1.25, 1.5, 1.75, 2.0)
    conjecture_t: tuple[float, ...] = (2.0, 2.5, 3.0, 3.5, 4.0)
    convexity_t: tuple[float, ...] = (-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
    lie_trotter_m: tuple[int, ...] = (8, 16, 32, 64, 128, 256)
    derivative_r: float = 1.0
    derivative_h: float = 1e-4
    equality_cases: tuple[tuple[float, float], ...] = ((2.0, 1.0), (-0.5, 2.0), (0.3, 0.5), (3.0, 1.0))
    jobs: int = 1

    def selectors(self) -> list[NormSelector]:
        if self.norms is None:
            return default_norms(self.n)
        return [NormSelector.parse(s) for s in self.norms]

    def selected_checks(self) -> list[str]:
        return list(CHECKS) if self.checks is None else list(self.checks)

    def validate(self) -> None:
        problems = []
        if not (isinstance(self.n, int) and self.n >= 1):
            problems.append(f"n: must be a positive integer, got {self.n!r}")
        if not self.sigma > 0:
            problems.append(f"sigma: must be positive, got {self.sigma!r}")
        if not (isinstance(self.trials, int) and self.trials >= 0):
            problems.append(f"trials: must be a non-negative integer, got {self.trials!r}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            problems.append(f"seed: must be a non-negative integer, got {self.seed!r}")
        if not self.t_grid or not all(math.isfinite(t) for t in self.t_grid):
            problems.append("t_grid: must be a non-empty list of finite numbers")
        if not self.r_grid or not all(r > 0 for r in self.r_grid):
            problems.append("r_grid: every r must be positive")
        if not self.kappa > 1:
            problems.append(f"kappa: must exceed 1, got {self.kappa!r}")
        if not (isinstance(self.jobs, int) and self.jobs >= 1):
            problems.append(f"jobs: must be a positive integer, got {self.jobs!r}")
        try:
            for sel in self.selectors():
                if isinstance(self.n, int):
                    sel.validate(self.n)
        except ValueError as exc:
            problems.append(f"norms: {exc}")
        unknown = [c for c in self.selected_checks() if c not in CHECKS]
        if unknown:
            problems.append(f"checks: unknown {', '.join(unknown)}; choose from {', '.join(CHECKS)}")
        if problems:
            raise ConfigError(problems)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["norms"] = [s.label for s in self.selectors()] if not _bad_norms(self) else list(self.norms)
        d["checks"] = self.selected_checks()
        d.pop("jobs")
        return d


def _bad_norms(cfg) -> bool:
    try:
        cfg.selectors()
    except ValueError:
        return True
    return False


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# ---------------------------------------------------------------------------
# individual checks; each returns (items, stats) where an item is a ResultBatch
# or a (cell params, CheckResult) pair

def _guard(cfg, H, K, weight):
    return iq.condition_guard(H, K, weight, cfg.kappa)


def _check_golden_thompson(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, 1.0)
    return [({}, iq.golden_thompson(H, K))], {}, f


def _check_theorem2(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, iq.mean_weight(cfg.t_grid))
    return iq.theorem2_batches(H, K, cfg.t_grid, cfg.selectors()), {}, f


def _check_interpolation(cfg, H0, K0, rng):
    items = []
    factors = []
    for r in cfg.r_grid:
        H, K, f = _guard(cfg, H0, K0, iq.mean_weight(cfg.t_grid, r))
        factors.append(f)
        items.extend(iq.interpolation_batches(H, K, cfg.t_grid, r, cfg.selectors(), logmaj=True))
    return items, {}, min(factors)


def _check_hiai(cfg, H0, K0, rng):
    items = []
    factors = []
    ts = [t for t in cfg.t_grid if t >= 1]
    if not ts:
        return [], {}, 1.0
    for r in cfg.r_grid:
        H, K, f = _guard(cfg, H0, K0, iq.mean_weight(ts, r))
        factors.append(f)
        items.extend(iq.hiai_batches(H, K, ts, r, cfg.selectors(), logmaj=True))
    return items, {}, min(factors)


def _check_araki(cfg, H0, K0, rng):
    items = []
    factors = []
    for r in cfg.araki_r:
        H, K, f = _guard(cfg, H0, K0, r)
        factors.append(f)
        verdict = iq.araki_check(mexp(H), mexp(K), r)
        items.append(({"r": r}, iq.from_majorization("araki", verdict, {"r": r})))
    return items, {}, min(factors)


def _check_gt_logmaj(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, max(cfg.q_grid))
    items = []
    for q in cfg.q_grid:
        items.append(({"q": q}, iq.from_majorization("gt_logmaj", iq.gt_logmaj(H, K, q), {"q": q})))
    mono = iq.kyfan_monotonicity(H, K, cfg.q_grid)
    for res in mono:
        items.append(({"k": res.context["k"]}, res))
    stats = {}
    if commutator_norm(H, K) >= 0.1:
        stats = {"noncommuting_trials": 1, "strict_trials": int(mono[-1].context["strict"])}
    return items, stats, f


def _check_theorem5(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, 3.0)
    items = []
    for t in cfg.theorem5_t:
        items.append(({"t": t}, iq.from_majorization("theorem5", iq.theorem5_check(H, K, t), {"t": t})))
        items.append(({"t": t}, iq.theorem5_compound_crosscheck(H, K, t)))
    return items, {}, f


def _random_psd(n, rng, scale):
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)
    return hermitian_part(G @ G.conj().T) * scale


def _check_furuta(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, 3.0)
    items = []
    for t in cfg.furuta_t:
        A, B, r, p, q = iq.furuta_instance(H, K, t)
        items.append(({"t": t, "source": "theorem5"}, iq.furuta_check(A, B, r, p, q)))
        B2 = mexp(H)
        A2 = B2 + _random_psd(cfg.n, rng, 0.5)
        items.append(({"t": t, "source": "perturbed"}, iq.furuta_check(A2, B2, r, p, q)))
    return items, {}, f


def commuting_pair(n: int, sigma: float, rng: np.random.Generator):
    """Two Hermitian matrices diagonal in a common random basis."""
    U = random_unitary(n, rng)
    d1 = rng.standard_normal(n) * sigma
    d2 = rng.standard_normal(n) * sigma
    return hermitian_part((U * d1) @ U.conj().T), hermitian_part((U * d2) @ U.conj().T)


def _check_equality(cfg, H0, K0, rng):
    trace = NormSelector("trace")
    items = []
    stats = {"noncommuting_trials": 0, "gap_exceeds_floor": 0, "commuting_trials": 0, "commuting_equal": 0}
    Hc0, Kc0 = commuting_pair(cfg.n, cfg.sigma, rng)
    factors = []
    for t, r in cfg.equality_cases:
        H, K, f = _guard(cfg, H0, K0, iq.mean_weight([t], r))
        factors.append(f)
        res = iq.equality_diagnostic(H, K, t, r, trace)
        items.append(({"t": t, "r": r, "pair": "random"}, res))
        if res.context["commutator"] >= 0.1:
            stats["noncommuting_trials"] += 1
            stats["gap_exceeds_floor"] += int(res.context["gap_exceeds_floor"])
        Hc, Kc, _ = _guard(cfg, Hc0, Kc0, iq.mean_weight([t], r))
        resc = iq.equality_diagnostic(Hc, Kc, t, r, trace)
        items.append(({"t": t, "r": r, "pair": "commuting"}, resc))
        stats["commuting_trials"] += 1
        stats["commuting_equal"] += int(resc.verdict == iq.EQUALITY)
    return items, stats, min(factors)


def _check_derivative(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, 3.0 * max(cfg.derivative_r, 1.0))
    return [({}, res) for res in iq.derivative_identities(H, K, cfg.derivative_r, cfg.derivative_h)], {}, f


def _check_lie_trotter(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, 1.0)
    return [({}, iq.lie_trotter_check(H, K, cfg.lie_trotter_m))], {}, f


def _check_convexity(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, 3.0)
    H2, K2, _ = _guard(cfg, random_hermitian(cfg.n, cfg.sigma, rng), random_hermitian(cfg.n, cfg.sigma, rng), 3.0)
    X, Y, X2, Y2 = mexp(H), mexp(K), mexp(H2), mexp(K2)
    Xb = X + _random_psd(cfg.n, rng, 0.5)
    Yb = Y + _random_psd(cfg.n, rng, 0.5)
    ts = list(cfg.convexity_t)
    items = [({"t": t}, res) for t, res in zip(ts, iq.convexity_checks(X, Y, X2, Y2, ts))]
    inside = [t for t in ts if 0.0 <= t <= 1.0]
    if inside:
        items.extend(({"t": t}, res) for t, res in zip(inside, iq.monotonicity_check(X, Y, Xb, Yb, inside)))
    return items, {}, f


def _check_conjecture(cfg, H, K, rng):
    H, K, f = _guard(cfg, H, K, iq.mean_weight(cfg.conjecture_t))
    items = [({"t": t}, iq.conjecture_fuzz(H, K, t)) for t in cfg.conjecture_t]
    stats = {"evaluations": len(items), "candidates": sum(int(r.context["candidate"]) for _, r in items)}
    return items, stats, f


CHECKS = {
    "golden_thompson": _check_golden_thompson,
    "theorem2": _check_theorem2,
    "interpolation": _check_interpolation,
    "hiai": _check_hiai,
    "araki": _check_araki,
    "gt_logmaj": _check_gt_logmaj,
    "theorem5": _check_theorem5,
    "furuta": _check_furuta,
    "equality": _check_equality,
    "derivative": _check_derivative,
    "lie_trotter": _check_lie_trotter,
    "convexity": _check_convexity,
    "conjecture": _check_conjecture,
}
CHECK_INDEX = {name: i for i, name in enumerate(CHECKS)}


# ---------------------------------------------------------------------------
# aggregation

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cell_key(check_id: str, params: dict) -> str:
    if not params:
        return check_id
    return check_id + "[" + ",".join(f"{k}={_fmt(params[k])}" for k in sorted(params)) + "]"


def _new_cell(check_id, params):
    return {"check_id": check_id, "params": {k: params[k] for k in sorted(params)}, "count": 0,
            "holds": 0, "equality": 0, "violated": 0, "not_applicable": 0, "recorded": 0,
            "min_gap": None, "max_gap": None, "min_rel_gap": None, "max_rel_gap": None}


def _fold(cell, verdicts, gaps, lhs, rhs):
    cell["count"] += len(verdicts)
    for v in (iq.HOLDS, iq.EQUALITY, iq.VIOLATED, iq.NOT_APPLICABLE, iq.RECORDED):
        cell[v] += int(np.count_nonzero(verdicts == v))
    ok = np.isfinite(gaps)
    if not np.any(ok):
        return
    g = gaps[ok]
    rel = g / np.maximum(np.maximum(np.abs(lhs[ok]), np.abs(rhs[ok])), 1.0)
    for key, fn, vals in (("min_gap", min, g.min()), ("max_gap", max, g.max()),
                          ("min_rel_gap", min, rel.min()), ("max_rel_gap", max, rel.max())):
        vals = float(vals)
        cell[key] = vals if cell[key] is None else fn(cell[key], vals)


def _merge_cell(dst, src):
    for k in ("count", "holds", "equality", "violated", "not_applicable", "recorded"):
        dst[k] += src[k]
    for key, fn in (("min_gap", min), ("max_gap", max), ("min_rel_gap", min), ("max_rel_gap", max)):
        if src[key] is not None:
            dst[key] = src[key] if dst[key] is None else fn(dst[key], src[key])


def _matrix_json(M) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


@dataclass
class TrialOutcome:
    trial: int
    cells: dict
    failures: list
    stats: dict


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, stream)))


def trial_pair(cfg: SuiteConfig, trial: int):
    rng = trial_rng(cfg.seed, trial)
    return random_hermitian(cfg.n, cfg.sigma, rng), random_hermitian(cfg.n, cfg.sigma, rng)


def run_trial(cfg: SuiteConfig, trial: int) -> TrialOutcome:
    H, K = trial_pair(cfg, trial)
    return evaluate_pair(cfg, H, K, trial)


def evaluate_pair(cfg: SuiteConfig, H, K, trial: int = 0) -> TrialOutcome:
    """Run the selected checks on one Hermitian pair.

    Checks that need extra randomness draw it from the stream of ``trial``,
    so evaluating a stored pair with its trial index replays the suite.
    """
    cells: dict = {}
    failures = []
    stats: dict = {}
    for name in cfg.selected_checks():
        rng = trial_rng(cfg.seed, trial, 1 + CHECK_INDEX[name])
        items, st, factor = CHECKS[name](cfg, H, K, rng)
        for key, val in st.items():
            stats.setdefault(name, {}).setdefault(key, 0)
            stats[name][key] += val
        replay = None
        for item in items:
            if isinstance(item, ResultBatch):
                params = item.params
                check_id = item.check_id
                verdicts, gaps, lhs, rhs = item.verdict, item.gap, item.lhs, item.rhs
                bad = item.results(only_violated=True) if np.any(item.violated) else []
            else:
                params, res = item
                check_id = res.check_id
                verdicts = np.array([res.verdict], dtype=object)
                gaps, lhs, rhs = (np.array([x], dtype=float) for x in (res.gap, res.lhs, res.rhs))
                bad = [res] if res.verdict == iq.VIOLATED else []
            key = cell_key(check_id, params)
            cell = cells.setdefault(key, _new_cell(check_id, params))
            _fold(cell, verdicts, gaps, lhs, rhs)
            for res in bad:
                if replay is None:
                    replay = {"seed": cfg.seed, "trial": trial, "check": name, "guard_factor": factor,
                              "H": _matrix_json(H), "K": _matrix_json(K)}
                failures.append(_jsonable({**res.to_dict(), "cell": key, "replay": replay}))
    return TrialOutcome(trial, cells, failures, stats)


def _run_chunk(args):
    cfg, trials = args
    return [run_trial(cfg, t) for t in trials]


@dataclass
class SuiteReport:
    trials: int
    seed: int
    config: dict
    aggregates: dict
    failures: list
    statistics: dict

    @property
    def violated(self) -> int:
        return sum(c["violated"] for c in self.aggregates.values())

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "seed": self.seed,
            "trials": self.trials,
            "aggregates": self.aggregates,
            "failures": self.failures,
            "statistics": self.statistics,
        }
        return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["count", "holds", "equality", "violated", "not_applicable", "recorded",
                "min_gap", "max_gap", "min_rel_gap", "max_rel_gap"]
        w.writerow(["check_id", "params"] + cols)
        for key in sorted(self.aggregates):
            c = self.aggregates[key]
            params = ";".join(f"{k}={_fmt(v)}" for k, v in c["params"].items())
            w.writerow([c["check_id"], params] + ["" if c[k] is None else _fmt(c[k]) for k in cols])
        return buf.getvalue()

    def summary_rows(self) -> list[tuple]:
        """(check_id, evaluations, violated, equality, not_applicable, min_rel_gap) per check id."""
        out = {}
        for c in self.aggregates.values():
            row = out.setdefault(c["check_id"], [0, 0, 0, 0, None])
            row[0] += c["count"]
            row[1] += c["violated"]
            row[2] += c["equality"]
            row[3] += c["not_applicable"]
            if c["min_rel_gap"] is not None:
                row[4] = c["min_rel_gap"] if row[4] is None else min(row[4], c["min_rel_gap"])
        return [(k, *v) for k, v in sorted(out.items())]


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    """Run every selected check over ``cfg.trials`` random pairs.

    The report does not depend on ``cfg.jobs``: per-trial outcomes are merged
    in trial order and all aggregates are order-independent.
    """
    cfg.validate()
    trials = list(range(cfg.trials))
    if cfg.jobs > 1 and len(trials) > 1:
        chunks = [trials[i::cfg.jobs] for i in range(cfg.jobs)]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = [o for part in pool.map(_run_chunk, [(cfg, c) for c in chunks]) for o in part]
        outcomes.sort(key=lambda o: o.trial)
    else:
        outcomes = [run_trial(cfg, t) for t in trials]
    return _report(cfg, outcomes)


def run_pair(cfg: SuiteConfig, H, K, trial: int = 0) -> SuiteReport:
    """Report for a single given pair, aggregated exactly as a one-trial suite."""
    cfg.validate()
    H = np.asarray(H, dtype=complex)
    K = np.asarray(K, dtype=complex)
    if H.shape != (cfg.n, cfg.n) or K.shape != (cfg.n, cfg.n):
        raise ConfigError([f"n: pair has shape {H.shape}/{K.shape}, config expects {cfg.n}x{cfg.n}"])
    return _report(replace(cfg, trials=1), [evaluate_pair(cfg, H, K, trial)])


def _report(cfg: SuiteConfig, outcomes: list[TrialOutcome]) -> SuiteReport:
    aggregates: dict = {}
    failures = []
    statistics: dict = {}
    for o in outcomes:
        for key, cell in o.cells.items():
            if key in aggregates:
                _merge_cell(aggregates[key], cell)
            else:
                aggregates[key] = {**cell, "params": dict(cell["params"])}
        failures.extend(o.failures)
        for name, st in o.stats.items():
            for k, v in st.items():
                statistics.setdefault(name, {}).setdefault(k, 0)
                statistics[name][k] += v
    return SuiteReport(cfg.trials, cfg.seed, cfg.to_dict(), aggregates, failures, statistics)
