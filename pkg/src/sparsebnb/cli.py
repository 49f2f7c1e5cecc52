"""Command line front end.

Subcommands:
    solve   certify a global minimizer for a problem directory
    path    warm-started solves down a logarithmic level grid
    gen     write a synthetic Bernoulli-mixture problem directory
    params  envelope parameters (and the zero-solution level) for a config
    bench   desk-scale solver-vs-oracle matrix with pass/fail lines

A problem directory holds config.json next to A.csv and y.csv (row-major,
header-free) or their binary twins A.npy / y.npy.  config.json carries
{"loss": {"family": ...}, "penalty": {"family": ..., <parameters>}} plus
"lambda" for single solves or "path": {"num_points", "ratio_min"} for grids.
Every JSON document this tool emits encodes non-finite numbers as null.
Exit codes: 0 success, 1 solver stopped at a limit, 2 bad input.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .bnb import BnbOpts, solve as solve_bnb
from .exceptions import ConfigError, DegenerateError, SparseBnbError
from .l0reg import L0Regularizer
from .losses import LeastSquares, Logistic, SquaredHinge, loss_from_json
from .oracle import DENSITY_KINDS, Density, exhaustive_solve, gen_bernoulli_mixture, map_penalty_from_density
from .path import PathSpec, fit_path, lambda_max
from .penalties import BigM, BigML2, L1L2, PowerP, penalty_from_json
from .relaxation import Problem


def _jnum(v: float):
    v = float(v)
    return v if math.isfinite(v) else None


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _read_config(cfg_file: Path) -> dict:
    if not cfg_file.is_file():
        raise ConfigError(f"config.json: not found at {cfg_file}")
    try:
        cfg = json.loads(cfg_file.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config.json: invalid JSON ({e})")
    if not isinstance(cfg, dict):
        raise ConfigError("config.json: expected a JSON object at the top level")
    return cfg


def _load_vector_or_matrix(d: Path, stem: str, ndim: int):
    npy, csv = d / f"{stem}.npy", d / f"{stem}.csv"
    if npy.is_file():
        arr = np.load(npy)
    elif csv.is_file():
        arr = np.loadtxt(csv, delimiter=",", dtype=float, ndmin=ndim)
    else:
        raise ConfigError(f"{stem}: neither {stem}.csv nor {stem}.npy in {d}")
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != ndim:
        raise ConfigError(f"{stem}: expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{stem}: values must be finite")
    return arr


def _load_problem(dirname: str, need_lambda: bool) -> tuple[Problem, dict]:
    d = Path(dirname)
    if not d.is_dir():
        raise ConfigError(f"problem directory not found: {dirname}")
    cfg = _read_config(d / "config.json")
    A = _load_vector_or_matrix(d, "A", 2)
    y = _load_vector_or_matrix(d, "y", 1)
    loss = loss_from_json(cfg.get("loss"), y)
    pen = penalty_from_json(cfg.get("penalty"))
    lam = cfg.get("lambda")
    if lam is None:
        if need_lambda:
            raise ConfigError("lambda: required in config.json for this subcommand")
        lam = 1.0  # placeholder; the path grid supplies the real levels
    return Problem(A, loss, L0Regularizer(lam, pen)), cfg


def _bnb_opts(args) -> BnbOpts:
    return BnbOpts(
        gap_tol=args.gap_tol,
        time_limit=args.time_limit,
        node_limit=args.node_limit,
        exploration=args.exploration,
        threads=args.threads,
    )


# -- subcommands ------------------------------------------------------------


def _cmd_solve(args) -> int:
    p, _ = _load_problem(args.problem, need_lambda=True)
    sol = solve_bnb(p, _bnb_opts(args))
    _emit(
        {
            "objective": _jnum(sol.objective),
            "x": [float(v) for v in sol.x_opt],
            "status": sol.status,
            "gap": _jnum(sol.gap),
            "nodes": sol.nodes_explored,
            "time_s": _jnum(sol.wall_time),
        },
        args.out,
    )
    return 0 if sol.status == "Optimal" else 1


def _cmd_path(args) -> int:
    p, cfg = _load_problem(args.problem, need_lambda=False)
    pcfg = cfg.get("path", {})
    if not isinstance(pcfg, dict):
        raise ConfigError("path: expected a JSON object")
    if set(pcfg) - {"num_points", "ratio_min"}:
        raise ConfigError(f"path: unexpected fields {sorted(set(pcfg) - {'num_points', 'ratio_min'})}")
    points = args.points if args.points is not None else pcfg.get("num_points", 20)
    ratio = args.ratio_min if args.ratio_min is not None else pcfg.get("ratio_min", 1e-2)
    spec = PathSpec(num_points=points, ratio_min=ratio, solve=_bnb_opts(args))

    rows = []
    worst = "Optimal"
    for lam, sol in fit_path(p, spec):
        rows.append(
            {
                "lambda": _jnum(lam),
                "objective": _jnum(sol.objective),
                "support": [int(i) for i in np.flatnonzero(sol.x_opt)],
                "nnz": int(np.count_nonzero(sol.x_opt)),
                "status": sol.status,
                "nodes": sol.nodes_explored,
                "time_s": _jnum(sol.wall_time),
            }
        )
        if sol.status != "Optimal":
            worst = sol.status
    _emit(rows, args.out)
    return 0 if worst == "Optimal" else 1


def _cmd_gen(args) -> int:
    density = Density(kind=args.density, gamma=args.gamma, gamma2=args.gamma2)
    A, y, _, zeta = gen_bernoulli_mixture(args.m, args.n, args.p, args.rho, density, args.snr, args.seed)
    pen, lam = map_penalty_from_density(density, zeta, args.p)

    d = Path(args.dir)
    d.mkdir(parents=True, exist_ok=True)
    if args.binary:
        np.save(d / "A.npy", A)
        np.save(d / "y.npy", y)
        files = ["A.npy", "y.npy", "config.json"]
    else:
        np.savetxt(d / "A.csv", A, delimiter=",")
        np.savetxt(d / "y.csv", y, delimiter=",")
        files = ["A.csv", "y.csv", "config.json"]
    cfg = {"loss": {"family": "LeastSquares"}, "penalty": pen.to_json(), "lambda": lam}
    (d / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")

    _emit({"dir": str(d), "files": files, "m": args.m, "n": args.n, "lambda": _jnum(lam)}, None)
    return 0


def _cmd_params(args) -> int:
    target = Path(args.config)
    cfg_file = target / "config.json" if target.is_dir() else target
    cfg = _read_config(cfg_file)
    pen = penalty_from_json(cfg.get("penalty"))
    lam = cfg.get("lambda")
    if lam is None:
        raise ConfigError("lambda: required in the config for params")
    q = L0Regularizer(lam, pen).params

    doc = {
        "family": type(pen).__name__,
        "lambda": _jnum(lam),
        "tau": _jnum(q.tau),
        "mu": _jnum(q.mu),
        "kappa": _jnum(q.kappa),
        "beta": _jnum(q.beta),
        "tau_neg": _jnum(q.tau_neg),
        "mu_neg": _jnum(q.mu_neg),
        "kappa_neg": _jnum(q.kappa_neg),
    }
    if target.is_dir() and any((target / f).is_file() for f in ("A.csv", "A.npy")):
        A = _load_vector_or_matrix(target, "A", 2)
        y = _load_vector_or_matrix(target, "y", 1)
        p = Problem(A, loss_from_json(cfg.get("loss"), y), L0Regularizer(lam, pen))
        try:
            doc["lambda_max"] = _jnum(lambda_max(p))
        except DegenerateError:
            doc["lambda_max"] = None
    _emit(doc, args.out)
    return 0


BENCH_PENALTIES = (
    ("BigM", lambda: BigM(M=2.0)),
    ("BigML2", lambda: BigML2(M=2.0, sigma=1.0)),
    ("L1L2", lambda: L1L2(sigma=0.5, sigma2=1.0)),
    ("PowerP", lambda: PowerP(sigma=1.0, p=2.0)),
)


def bench_instance(seed: int, m: int = 30, n: int = 12) -> Problem:
    """Instance seed -> (loss, penalty) cell of the solver-vs-oracle matrix.

    Seeds sweep losses fastest and penalties next, so 12 consecutive seeds
    cover the full cross once.  The level is pinned at a tenth of the
    zero-solution threshold.
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    kind = seed % 3
    if kind == 0:
        x_true = np.zeros(n)
        k = max(1, n // 4)
        x_true[rng.choice(n, size=k, replace=False)] = rng.standard_normal(k)
        loss = LeastSquares(A @ x_true + 0.1 * rng.standard_normal(m))
    else:
        labels = np.where(rng.uniform(size=m) < 0.5, -1.0, 1.0)
        loss = Logistic(labels) if kind == 1 else SquaredHinge(labels)
    pen = BENCH_PENALTIES[(seed // 3) % 4][1]()
    template = Problem(A, loss, L0Regularizer(1.0, pen))
    lam = 0.1 * lambda_max(template)
    return Problem(A, loss, L0Regularizer(lam, pen))


def _cmd_bench(args) -> int:
    tol = 1e-6
    failures = 0
    for seed in range(args.seeds):
        p = bench_instance(seed, args.m, args.n)
        t0 = time.perf_counter()
        sol = solve_bnb(p, BnbOpts(gap_tol=1e-8))
        t1 = time.perf_counter()
        _, obj_star = exhaustive_solve(p)
        t2 = time.perf_counter()
        rel = abs(sol.objective - obj_star) / max(1.0, abs(obj_star))
        ok = rel <= tol
        failures += 0 if ok else 1
        cell = f"{type(p.loss).__name__}+{type(p.reg.penalty).__name__}"
        print(
            f"{'PASS' if ok else 'FAIL'} seed={seed:02d} {cell:24s} "
            f"rel={rel:.2e} bnb={t1 - t0:6.2f}s oracle={t2 - t1:6.2f}s"
        )
    print(f"bench: {args.seeds - failures}/{args.seeds} passed (m={args.m}, n={args.n}, tol={tol:g})")
    return 0 if failures == 0 else 1


# -- parser -----------------------------------------------------------------


def _add_solver_flags(sp) -> None:
    sp.add_argument("--gap-tol", type=float, default=1e-8, help="relative optimality gap target")
    sp.add_argument("--time-limit", type=float, default=None, help="wall clock budget in seconds")
    sp.add_argument("--node-limit", type=int, default=None, help="cap on explored nodes")
    sp.add_argument("--threads", type=int, default=1, help="relaxation solves per batch")
    sp.add_argument("--exploration", choices=("bestfirst", "depthfirst"), default="bestfirst")
    sp.add_argument("--out", default=None, help="write the JSON result here instead of stdout")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sparsebnb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="certify a global minimizer for a problem directory")
    sp.add_argument("problem", help="directory with config.json, A.csv/.npy, y.csv/.npy")
    _add_solver_flags(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("path", help="solve down a logarithmic level grid with warm starts")
    sp.add_argument("problem")
    sp.add_argument("--points", type=int, default=None, help="grid size (default 20 or config value)")
    sp.add_argument("--ratio-min", type=float, default=None, help="last level as a fraction of the first")
    _add_solver_flags(sp)
    sp.set_defaults(func=_cmd_path)

    sp = sub.add_parser("gen", help="write a synthetic Bernoulli-mixture problem directory")
    sp.add_argument("dir")
    sp.add_argument("--m", type=int, required=True, help="rows of A")
    sp.add_argument("--n", type=int, required=True, help="columns of A")
    sp.add_argument("--p", type=float, default=0.01, help="Bernoulli support probability")
    sp.add_argument("--rho", type=float, default=0.9, help="AR(1) row correlation of A")
    sp.add_argument("--snr", type=float, default=10.0, help="signal-to-noise ratio")
    sp.add_argument("--density", choices=DENSITY_KINDS, default="Normal", help="amplitude density")
    sp.add_argument("--gamma", type=float, default=1.0, help="density scale")
    sp.add_argument("--gamma2", type=float, default=None, help="second scale, GaussLaplace only")
    sp.add_argument("--seed", type=int, default=0, help="generator seed; no hidden entropy")
    sp.add_argument("--binary", action="store_true", help="write A.npy/y.npy instead of CSV")
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("params", help="envelope parameters for a config, levels included")
    sp.add_argument("config", help="config.json or a problem directory (adds lambda_max)")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_params)

    sp = sub.add_parser("bench", help="desk-scale solver-vs-oracle matrix")
    sp.add_argument("--seeds", type=int, default=60, help="instance seeds 0..N-1")
    sp.add_argument("--m", type=int, default=30)
    sp.add_argument("--n", type=int, default=12)
    sp.set_defaults(func=_cmd_bench)

    return ap


def run(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except SparseBnbError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
