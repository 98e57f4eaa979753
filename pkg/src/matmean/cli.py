"""
Command line front end.

    matmean verify      seeded randomized suite, JSON + CSV report
    matmean sweep       trace curves of the three operator families over t
    matmean check-pair  run the suite checks on a pair read from a matrix file

Exit codes: 0 clean, 1 violated verdicts, 2 bad configuration or input.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import inequalities as iq
from .errors import MatmeanError
from .linalg import eigvalsh, hermitian_part, random_hermitian
from .matrixfile import MatrixFileError, read_matrix_file, write_matrix_file
from .suite import CHECKS, ConfigError, SuiteConfig, commuting_pair, default_t_grid, run_pair, run_suite, trial_rng
from .sweep import render_svg, rows_to_csv, sweep_rows

EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG = 0, 1, 2
REPLAY_LIMIT = 5


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("MATMEAN_SEED")
    if raw is None or not raw.strip():
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MATMEAN_SEED must be an integer, got {raw!r}") from None


def _floats(text: str, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"--{name}: empty list")
    return vals


def _names(text: str | None) -> tuple[str, ...] | None:
    if text is None:
        return None
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _t_grid(args) -> tuple[float, ...]:
    if getattr(args, "t_grid", None):
        return _floats(args.t_grid, "t-grid")
    if not args.t_step > 0:
        raise UsageError(f"--t-step must be positive, got {args.t_step}")
    if not args.t_min < args.t_max:
        raise UsageError(f"--t-min must be below --t-max, got {args.t_min} and {args.t_max}")
    return default_t_grid(args.t_min, args.t_max, args.t_step)


def _suite_config(args, n: int, trials: int) -> SuiteConfig:
    kwargs = dict(n=n, trials=trials, seed=args.seed, t_grid=_t_grid(args), kappa=args.kappa,
                  norms=_names(args.norms), checks=_names(args.checks))
    if args.r_grid:
        kwargs["r_grid"] = _floats(args.r_grid, "r-grid")
    if hasattr(args, "sigma"):
        kwargs["sigma"] = args.sigma
    if hasattr(args, "jobs"):
        kwargs["jobs"] = args.jobs
    return SuiteConfig(**kwargs)


def _print_table(report, out) -> None:
    rows = report.summary_rows()
    header = ("check", "evaluations", "violated", "equality", "n/a", "min rel gap")
    cells = [header] + [
        (name, str(count), str(bad), str(eq), str(na), "" if gap is None else f"{gap:.3e}")
        for name, count, bad, eq, na, gap in rows
    ]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for j, r in enumerate(cells):
        line = "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
        print(line.rstrip(), file=out)
        if j == 0:
            print("  ".join("-" * w for w in widths), file=out)
    for name in sorted(report.statistics):
        stats = ", ".join(f"{k}={v}" for k, v in sorted(report.statistics[name].items()))
        print(f"{name}: {stats}", file=out)
    print(f"violated verdicts: {report.violated}", file=out)


def _write_report(report, out_dir: Path, stem: str = "report") -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath = out_dir / f"{stem}.json"
    cpath = out_dir / f"{stem}.csv"
    jpath.write_text(report.to_json(), encoding="utf-8")
    cpath.write_text(report.to_csv(), encoding="utf-8")
    return jpath, cpath


def _replay_hint(report, out_dir: Path, out) -> None:
    seen = []
    for f in report.failures:
        key = (f["replay"]["trial"], f["replay"]["check"])
        if key not in seen:
            seen.append(key)
    for trial, check in seen[:REPLAY_LIMIT]:
        f = next(x for x in report.failures if (x["replay"]["trial"], x["replay"]["check"]) == (trial, check))
        H = np.array([[complex(*z) for z in row] for row in f["replay"]["H"]])
        K = np.array([[complex(*z) for z in row] for row in f["replay"]["K"]])
        path = out_dir / f"replay_trial{trial}.txt"
        write_matrix_file(path, H, K, "hermitian")
        print(f"replay: matmean check-pair {path} --seed {report.seed} --trial {trial} --checks {check}", file=out)
    if len(seen) > REPLAY_LIMIT:
        print(f"... {len(seen) - REPLAY_LIMIT} more failing trials listed in the JSON report", file=out)


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    cfg = _suite_config(args, args.n, args.trials)
    report = run_suite(cfg)
    out_dir = Path(args.out)
    jpath, cpath = _write_report(report, out_dir)
    print(f"seed {cfg.seed}, n {cfg.n}, sigma {cfg.sigma!r}, trials {cfg.trials}", file=out)
    _print_table(report, out)
    print(f"wrote {jpath} and {cpath}", file=out)
    if report.violated:
        _replay_hint(report, out_dir, out)
        return EXIT_VIOLATED
    return EXIT_OK


def cmd_check_pair(args, out=None) -> int:
    out = out or sys.stdout
    try:
        mf = read_matrix_file(args.matrix_file)
    except OSError as exc:
        raise UsageError(f"cannot read {args.matrix_file}: {exc.strerror}") from None
    H, K = mf.hermitian_pair()
    cfg = _suite_config(args, mf.n, 1)
    report = run_pair(cfg, H, K, args.trial)
    print(f"{args.matrix_file}: n {mf.n}, kind {mf.kind}, "
          f"symmetrization residuals {mf.residuals[0]:.3e} {mf.residuals[1]:.3e}", file=out)
    _print_table(report, out)
    if args.out:
        jpath, cpath = _write_report(report, Path(args.out), "check_pair")
        print(f"wrote {jpath} and {cpath}", file=out)
    return EXIT_VIOLATED if report.violated else EXIT_OK


def sweep_pair(args, index: int):
    """The Hermitian pair used for sweep panel ``index`` and the guard factor applied to it."""
    if args.input:
        H, K = read_matrix_file(args.input).hermitian_pair()
    else:
        rng = trial_rng(args.seed, index)
        if args.commuting:
            H, K = commuting_pair(args.n, args.sigma, rng)
        else:
            H, K = random_hermitian(args.n, args.sigma, rng), random_hermitian(args.n, args.sigma, rng)
        if args.positive:
            # a multiple of the identity rescales all three traces by the same factor
            n = H.shape[0]
            H = hermitian_part(H + (args.sigma - eigvalsh(H)[-1]) * np.eye(n))
            K = hermitian_part(K + (args.sigma - eigvalsh(K)[-1]) * np.eye(n))
    return iq.condition_guard(H, K, iq.mean_weight(args.t_values), args.kappa)


def cmd_sweep(args, out=None) -> int:
    out = out or sys.stdout
    if args.pairs < 1:
        raise UsageError(f"--pairs must be at least 1, got {args.pairs}")
    if not args.sigma > 0:
        raise UsageError(f"--sigma must be positive, got {args.sigma}")
    if args.n < 1:
        raise UsageError(f"--n must be at least 1, got {args.n}")
    args.t_values = _t_grid(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = 1 if args.input else args.pairs
    total_bad = 0
    for i in range(pairs):
        H, K, factor = sweep_pair(args, i)
        rows = sweep_rows(H, K, args.t_values)
        bad = [r for r in rows if r.violations]
        skipped = sum(r.overflow for r in rows)
        total_bad += len(bad)
        stem = out_dir / f"sweep_pair{i + 1}"
        written = []
        if args.format in ("csv", "both"):
            Path(f"{stem}.csv").write_text(rows_to_csv(rows), encoding="utf-8")
            written.append(f"{stem}.csv")
        if args.format in ("svg", "both"):
            title = f"pair {i + 1}, seed {args.seed}, n {H.shape[0]}" + ("" if factor == 1.0 else f", scaled by {factor:.4g}")
            Path(f"{stem}.svg").write_text(render_svg(rows, title), encoding="utf-8")
            written.append(f"{stem}.svg")
        status = "ordering holds" if not bad else f"ordering violated at {len(bad)} points"
        extra = f", {skipped} not representable in double precision (try a smaller --kappa)" if skipped else ""
        print(f"pair {i + 1}: {len(rows)} points, {status}{extra}, guard factor {factor:.6g}; wrote {' '.join(written)}",
              file=out)
        for r in bad[:10]:
            print(f"  t={r.t!r}: {' '.join(r.violations)}", file=out)
    return EXIT_VIOLATED if total_bad else EXIT_OK


def _add_grid_flags(p, t_min=-3.0, t_max=3.0, t_step=0.05):
    p.add_argument("--t-min", type=float, default=t_min)
    p.add_argument("--t-max", type=float, default=t_max)
    p.add_argument("--t-step", type=float, default=t_step)
    p.add_argument("--t-grid", help="explicit comma-separated weights; overrides --t-min/--t-max/--t-step")


def _add_check_flags(p):
    _add_grid_flags(p)
    p.add_argument("--r-grid", help="comma-separated r values (default 0.25,0.5,1,2,4)")
    p.add_argument("--norms", help="comma-separated norms: trace, frobenius, operator, kyfan:k, schatten:p "
                                   "(default trace, frobenius, operator and every Ky Fan norm)")
    p.add_argument("--checks", help=f"comma-separated subset of: {', '.join(CHECKS)}")
    p.add_argument("--kappa", type=float, default=iq.KAPPA, help="condition guard bound (default %(default)g)")


def build_parser() -> argparse.ArgumentParser:
    seed_help = "master seed (default $MATMEAN_SEED or 42)"
    parser = argparse.ArgumentParser(prog="matmean", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the randomized verification suite")
    v.add_argument("--seed", type=int, default=None, help=seed_help)
    v.add_argument("--n", type=int, default=4)
    v.add_argument("--sigma", type=float, default=1.0)
    v.add_argument("--trials", type=int, default=1000)
    _add_check_flags(v)
    v.add_argument("--out", default=".", help="directory for report.json and report.csv")
    v.add_argument("--jobs", type=int, default=1, help="worker processes; results do not depend on it")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="trace curves of the three operator families over t")
    s.add_argument("--seed", type=int, default=None, help=seed_help)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--sigma", type=float, default=1.0)
    _add_grid_flags(s)
    s.add_argument("--pairs", type=int, default=3)
    s.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    s.add_argument("--positive", action="store_true", help="shift H and K to be positive definite")
    s.add_argument("--commuting", action="store_true", help="draw commuting pairs")
    s.add_argument("--input", help="sweep the pair in this matrix file instead of random pairs")
    s.add_argument("--kappa", type=float, default=iq.KAPPA, help="condition guard bound (default %(default)g)")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check-pair", help="run the checks on a pair from a matrix file")
    c.add_argument("matrix_file")
    c.add_argument("--seed", type=int, default=None, help=seed_help + "; feeds checks that draw extra matrices")
    c.add_argument("--trial", type=int, default=0, help="trial index whose random streams the checks use")
    _add_check_flags(c)
    c.add_argument("--out", help="optional directory for check_pair.json and check_pair.csv")
    c.set_defaults(func=cmd_check_pair)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except (UsageError, MatrixFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MatmeanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
