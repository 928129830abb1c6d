"""Command-line front end.

Subcommands:

    propagator    write t, R(t) (row-major), S(t) (upper triangle) as CSV
    bounds        write witness curves (lambda bounds, area bounds, lambda_min)
    tdis          sweep disentanglement time over theta (and delta) lists
    oracle-check  compare the reduced propagator against the explicit bath
    plot          render a CSV produced by this tool as a static SVG

Global flags: --config PATH, --out DIR, --threads N, --seed U64.
Exit codes: 0 success, 1 usage or config error, 2 I/O error, 3 numeric
failure.  Identical config and seed give byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import initial_covariance_from_task, load_config
from .errors import ConfigError, NumericsError
from .discrete_bath import coupling_resolution_warning, oracle_covariances
from .model import CaseParams
from .phase_space import (
    build_symplectic_form,
    partial_transpose_form,
    random_pure_covariance,
    require_physical,
    vacuum_covariance,
)
from .propagator import (
    build_propagator,
    classical_transition,
    diffusion_matrix,
    solve_homogeneous,
)
from .uncertainty import (
    area_lower_bounds,
    disentanglement_time,
    lambda_bound,
    lambda_min_evolved,
    lambda_tilde_bound,
    witness_curves,
)


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(1, f"error: {message}"))


def _fail(code, message):
    print(message, file=sys.stderr)
    return code


def _format(x, precision):
    return f"{x:.{precision - 1}e}"


def _write_csv(path, header, rows, comment, precision):
    lines = [f"# {comment}", ",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                cell if isinstance(cell, str) else _format(cell, precision)
                for cell in row
            )
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _outpath(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _subset_from_task(cfg):
    n = cfg.model.n_oscillators
    raw = cfg.task.get("subset", str(n))
    subset = {int(x) - 1 for x in raw.replace(";", ",").split(",") if x.strip()}
    if not subset or not subset < set(range(n)):
        raise ConfigError(f"[task] subset must be a proper subset of 1..{n}")
    return subset


# ---------------------------------------------------------------------------
# subcommands


def cmd_propagator(cfg, args):
    times, R, S = build_propagator(
        cfg.model, cfg.times, mode=cfg.task.get("mode", "auto")
    )
    d = R.shape[-1]
    header = ["t"]
    header += [f"R_{i}_{j}" for i in range(d) for j in range(d)]
    header += [f"S_{i}_{j}" for i in range(d) for j in range(i, d)]
    iu = np.triu_indices(d)
    rows = [
        [t, *R[k].ravel(), *S[k][iu]]
        for k, t in enumerate(times)
    ]
    path = _outpath(args, "propagator.csv")
    _write_csv(path, header, rows, cfg.resolved, cfg.precision)
    return [path]


def cmd_bounds(cfg, args):
    layout = cfg.layout
    tripartite = cfg.task.get("tripartite", "").strip().lower() in ("1", "true", "yes")
    if tripartite:
        if layout.n_oscillators != 3:
            raise ConfigError("[task] tripartite needs N = 3")
        return _bounds_tripartite(cfg, args)
    subset = _subset_from_task(cfg)
    if layout.n_oscillators != 2 and "subset" not in cfg.task:
        raise ConfigError("bounds needs N = 2, an explicit [task] subset, "
                          "or the tripartite flag")
    times, R, S = build_propagator(
        cfg.model, cfg.times, mode=cfg.task.get("mode", "auto")
    )
    omega = build_symplectic_form(layout)
    omega_t = partial_transpose_form(layout, subset)
    lb = [lambda_bound(R[k], S[k], omega, omega_t) for k in range(len(times))]
    lt = [lambda_tilde_bound(R[k], S[k], omega_t) for k in range(len(times))]
    header = ["t", "lambda_bound", "lambda_tilde_bound"]
    cols = [list(times), lb, lt]
    if layout.n_oscillators == 2:
        gamma = cfg.model.spectral_density.gamma
        areas = np.array(
            [area_lower_bounds(t, S[k], gamma, layout) for k, t in enumerate(times)]
        )
        header += ["area_pp_bound", "area_mm_bound", "area_pm_bound", "area_mp_bound"]
        cols += [areas[:, i].tolist() for i in range(4)]
    V0 = initial_covariance_from_task(cfg.task, layout)
    if V0 is not None:
        require_physical(V0)
        lmin = [lambda_min_evolved(V0, R[k], S[k], omega_t) for k in range(len(times))]
        header.append("lambda_min")
        cols.append(lmin)
    draws = int(cfg.task.get("envelope_draws", 0))
    if draws > 0:
        rng = np.random.default_rng(args.seed)
        samples = [random_pure_covariance(layout, rng) for _ in range(draws)]
        env = [
            min(lambda_min_evolved(V, R[k], S[k], omega_t) for V in samples)
            for k in range(len(times))
        ]
        header.append("lambda_min_envelope")
        cols.append(env)
    rows = list(zip(*cols))
    path = _outpath(args, "bounds.csv")
    _write_csv(path, header, rows, cfg.resolved, cfg.precision)
    return [path]


def _bounds_tripartite(cfg, args):
    from .uncertainty import tripartite_bounds

    times, R, S = build_propagator(
        cfg.model, cfg.times, mode=cfg.task.get("mode", "auto")
    )
    header = ["t"]
    header += [f"sufficiency_min_{i + 1}" for i in range(3)]
    header += [f"factorizability_max_{i + 1}" for i in range(3)]
    rows = []
    for k, t in enumerate(times):
        row = [t]
        per = [tripartite_bounds(t, R[k], S[k], i, cfg.layout) for i in range(3)]
        row += [b.sufficiency.min_eigenvalue for b in per]
        row += [
            float(np.linalg.eigvalsh(b.factorizability.B)[-1]) for b in per
        ]
        rows.append(row)
    path = _outpath(args, "bounds.csv")
    _write_csv(path, header, rows, cfg.resolved, cfg.precision)
    return [path]


def _tdis_point(cfg, theta, delta):
    from .propagator import pair_at

    sd = cfg.model.spectral_density
    gamma = sd.gamma
    case = CaseParams(delta=delta, theta=theta)
    model = case.to_model(
        gamma=gamma, cutoff=sd.cutoff, mass=cfg.model.system.masses[0]
    )
    hom = solve_homogeneous(model, cfg.times, mode=cfg.task.get("mode", "auto"))
    R = classical_transition(hom)
    S = diffusion_matrix(hom)
    lb_curve, _ = witness_curves(hom.times, R, S)
    omega = build_symplectic_form(cfg.layout)
    omega_t = partial_transpose_form(cfg.layout, {1})

    def refine(t):
        pair = pair_at(hom, t)
        return lambda_bound(pair.R, pair.S, omega, omega_t)

    t_tol = 1e-4 / gamma if gamma > 0 else None
    res = disentanglement_time(
        lb_curve, refine=refine if gamma > 0 else None, t_tol=t_tol
    )
    return theta, delta, res


def cmd_tdis(cfg, args):
    thetas = [float(x) for x in cfg.task.get("thetas", "").split(",") if x.strip()]
    if not thetas:
        raise ConfigError("tdis needs [task] thetas = list")
    deltas = [float(x) for x in cfg.task.get("deltas", "0.38").split(",") if x.strip()]
    points = [(th, de) for th in thetas for de in deltas]
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(lambda p: _tdis_point(cfg, *p), points))
    else:
        results = [_tdis_point(cfg, *p) for p in points]
    gamma = cfg.model.spectral_density.gamma
    rows = []
    for theta, delta, res in results:
        if res.crossed:
            rows.append([theta, delta, res.time * gamma, "crossed"])
        else:
            rows.append([theta, delta, "", f"no-crossing(sign={res.sign:+d})"])
    path = _outpath(args, "tdis.csv")
    _write_csv(
        path, ["theta", "delta", "t_dis_gamma", "status"], rows, cfg.resolved, cfg.precision
    )
    return [path]


def cmd_oracle_check(cfg, args):
    task = cfg.task
    if "bath_modes" not in task:
        raise ConfigError("oracle-check needs [task] bath_modes")
    n_modes = int(task["bath_modes"])
    omega_max = float(task["omega_max"]) if "omega_max" in task else None
    threshold = float(task.get("threshold", 5e-3))
    layout = cfg.layout
    V0 = initial_covariance_from_task(task, layout)
    if V0 is None:
        V0 = vacuum_covariance(layout)
    times = cfg.times
    Vor, bath = oracle_covariances(cfg.model, V0, times, n_modes, omega_max)
    hom = solve_homogeneous(cfg.model, times, mode="numeric")
    R = classical_transition(hom)
    S = diffusion_matrix(hom)
    Vp = np.einsum("kab,bc,kdc->kad", R, V0, R) + S
    dev = np.abs(Vor - Vp).max(axis=(1, 2))
    rows = [[t, d] for t, d in zip(times, dev)]
    verdict = "pass" if dev.max() < threshold else "fail"
    warning = coupling_resolution_warning(cfg.model, bath)
    comment = (
        f"{cfg.resolved}; bath_modes={n_modes}; recurrence={bath.recurrence_time:.6g}; "
        f"max_deviation={dev.max():.6e}; threshold={threshold:.3e}; result={verdict}"
    )
    if warning:
        comment += f"; warning={warning}"
    path = _outpath(args, "oracle_check.csv")
    _write_csv(path, ["t", "max_abs_deviation"], rows, comment, cfg.precision)
    return [path]


def cmd_plot(args):
    try:
        with open(args.csv) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise exc
    lines = [ln for ln in lines if not ln.startswith("#")]
    if len(lines) < 2:
        raise ConfigError(f"{args.csv} has no plottable data")
    header = lines[0].split(",")
    data = []
    for ln in lines[1:]:
        cells = ln.split(",")
        data.append([float(c) if c else np.nan for c in cells])
    data = np.array(data, dtype=float)
    wanted = args.columns.split(",") if args.columns else header[1:]
    for col in wanted:
        if col not in header:
            raise ConfigError(f"unknown column {col!r}; have {header}")
    idx = [header.index(c) for c in wanted]
    from .svgplot import line_plot

    logx = args.kind == "loglog" or args.logx
    logy = args.kind == "loglog" or args.logy
    out = args.svg or os.path.splitext(args.csv)[0] + ".svg"
    line_plot(
        data[:, 0],
        [data[:, i] for i in idx],
        wanted,
        out,
        xlabel=header[0],
        title=args.title,
        logx=logx,
        logy=logy,
    )
    return [out]


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = _Parser(prog="qbrownian", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    for name in ("propagator", "bounds", "tdis", "oracle-check"):
        common(sub.add_parser(name))
    plot = sub.add_parser("plot")
    plot.add_argument("csv", help="CSV file produced by this tool")
    plot.add_argument("--kind", choices=("line", "loglog"), default="line")
    plot.add_argument("--columns", default="", help="comma-separated y columns")
    plot.add_argument("--logx", action="store_true")
    plot.add_argument("--logy", action="store_true")
    plot.add_argument("--title", default="")
    plot.add_argument("--svg", default="", help="output SVG path")
    return parser


_COMMANDS = {
    "propagator": cmd_propagator,
    "bounds": cmd_bounds,
    "tdis": cmd_tdis,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        if args.command == "plot":
            paths = cmd_plot(args)
        else:
            cfg = load_config(args.config, seed=args.seed)
            paths = _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        return _fail(1, f"config error: {exc}")
    except OSError as exc:
        return _fail(2, f"i/o error: {exc}")
    except NumericsError as exc:
        return _fail(3, f"numeric failure: {exc}")
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
