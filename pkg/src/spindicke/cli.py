"""Command-line entry points: eigmap, boundaries, moments, semiclassical, phasemap.

Usage: spindicke <subcommand> --config <path> [--out <path>] [--format csv|jsonl]

Exit codes: 0 success, 1 usage/config error, 2 numerical failure.  A diverged
integration is a result, not a failure: it lands in the status column.
SPINDICKE_THREADS caps sweep concurrency (default: machine parallelism).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, parse_config, validate_for
from .model import DegenerateModelError, derive_couplings
from .moments import (FIRST_MOMENT_LABELS, SECOND_MOMENT_LABELS, MomentState,
                      integrate_moments)
from .phasemap import WindowError, phase_sweep
from .semiclassical import integrate_semiclassical
from .stability import (EigensolverError, closed_boundaries, landscape_sweep,
                        open_determinant_roots)
from .tables import ResultTable, emit, write_table

__all__ = ["main", "run_subcommand"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _metadata(config: RunConfig, subcommand: str) -> tuple:
    meta = [("spindicke_version", __version__), ("subcommand", subcommand)]
    meta.extend(config.items)
    return tuple(meta)


def _integrator_kwargs(config: RunConfig, n_steps: int) -> dict:
    sample_every = config.get("sample_every")
    if sample_every is None:
        sample_every = max(1, n_steps // 10000)
    return dict(
        adaptive=config.get("adaptive", True),
        sample_every=sample_every,
        max_halvings=config.get("halvings", 4),
    )


def _representatives(grid, i, j):
    """(alpha_minus, alpha_plus) for one landscape cell."""
    eig = grid.eigenvalues[i, j]
    if grid.model_kind == "bec":
        return eig[0], eig[1]
    if grid.model_kind == "closed":
        return eig[0], eig[2]
    order = np.lexsort((eig.imag, eig.real))[::-1]
    return eig[order[0]], eig[order[2]]


def _run_eigmap(config: RunConfig, workers) -> ResultTable:
    params = config.params()
    grid = landscape_sweep(config.get("model"), params, config.get("q_axis"),
                           config.get("omega0_axis"), workers=workers)
    rows = []
    for i, q in enumerate(grid.q_axis):
        for j, w0 in enumerate(grid.omega0_axis):
            am, ap = _representatives(grid, i, j)
            rows.append((float(q), float(w0), am.real, am.imag, ap.real, ap.imag,
                         grid.label(i, j)))
    cols = ("q", "omega0", "re_alpha_minus", "im_alpha_minus",
            "re_alpha_plus", "im_alpha_plus", "label")
    return ResultTable(cols, tuple(rows), _metadata(config, "eigmap"))


def _run_boundaries(config: RunConfig, workers) -> ResultTable:
    model = config.get("model")
    axis = config.get("omega0_axis")
    omega0_values = axis if axis is not None else [config.get("omega0")]
    rows = []
    for w0 in omega0_values:
        params = config.params(omega0=float(w0))
        if model == "closed":
            d = derive_couplings(params)
            bset = closed_boundaries(d.delta_plus, d.delta_minus, params.omega0)
            for root in bset.determinant_roots:
                rows.append((float(w0), "determinant", float(root), 0.0))
            for root in bset.nested_sqrt_roots:
                rows.append((float(w0), "nested", float(root), 0.0))
        else:
            oroots = open_determinant_roots(params)
            for root in oroots.roots:
                rows.append((float(w0), "determinant", root.real, root.imag))
    cols = ("omega0", "source", "re_q", "im_q")
    return ResultTable(cols, tuple(rows), _metadata(config, "boundaries"))


def _run_moments(config: RunConfig, workers) -> ResultTable:
    params = config.params()
    dt, t_end = config.get("dt"), config.get("t_end")
    kw = _integrator_kwargs(config, max(1, round(t_end / dt)))
    traj = integrate_moments(MomentState.vacuum(), params, dt, t_end, **kw)
    pops = traj.populations()
    cols = ["t", "n_plus", "n_minus"]
    for name in FIRST_MOMENT_LABELS + SECOND_MOMENT_LABELS:
        cols += [f"re_{name}", f"im_{name}"]
    cols.append("status")
    rows = []
    for i, t in enumerate(traj.times):
        row = [float(t), float(pops.n_plus[i]), float(pops.n_minus[i])]
        for v in traj.first[i]:
            row += [v.real, v.imag]
        for v in traj.second[i]:
            row += [v.real, v.imag]
        row.append(traj.status)
        rows.append(tuple(row))
    return ResultTable(tuple(cols), tuple(rows), _metadata(config, "moments"))


def _run_semiclassical(config: RunConfig, workers) -> ResultTable:
    system = config.get("model")
    params = config.params()
    dt, t_end = config.get("dt"), config.get("t_end")
    kw = _integrator_kwargs(config, max(1, round(t_end / dt)))
    traj = integrate_semiclassical(system, config.seed(system), params, dt, t_end, **kw)
    ncav, npl, nmi, nze = traj.populations()
    sx, sy, sz, _ = traj.spin_expectations()
    amp_cols = ("alpha",) if system == "full" else ()
    amp_cols += ("beta_plus", "beta_minus", "beta_zero")
    cols = ["t"]
    for name in amp_cols:
        cols += [f"re_{name}", f"im_{name}"]
    if system == "full":
        cols.append("n_cavity")
    cols += ["n_plus", "n_minus", "n_zero", "s_x", "s_y", "s_z", "status"]
    series = [traj.alpha] if system == "full" else []
    series += [traj.beta_plus, traj.beta_minus, traj.beta_zero]
    rows = []
    for i, t in enumerate(traj.times):
        row = [float(t)]
        for s in series:
            row += [s[i].real, s[i].imag]
        if system == "full":
            row.append(float(ncav[i]))
        row += [float(npl[i]), float(nmi[i]), float(nze[i]),
                float(sx[i]), float(sy[i]), float(sz[i]), traj.status]
        rows.append(tuple(row))
    return ResultTable(tuple(cols), tuple(rows), _metadata(config, "semiclassical"))


def _run_phasemap(config: RunConfig, workers) -> ResultTable:
    params = config.params(lambda_plus=0.0, lambda_minus=0.0)
    with_chaos = config.get("chaos_score", False)
    grid = phase_sweep(
        params, config.get("lambda_plus_axis"), config.get("lambda_minus_axis"),
        window=(config.get("window_start"), config.get("window_end")),
        dt=config.get("dt"), seed=config.seed("full"),
        eps_mean=config.get("eps_mean", None) or 1e-4,
        eps_amp=config.get("eps_amp", None) or 1e-3,
        with_chaos=with_chaos,
        perturbation_size=config.get("perturbation_size", 1e-8),
        workers=workers)
    cols = ["lambda_plus", "lambda_minus", "mean", "amplitude", "label"]
    if with_chaos:
        cols.append("chaos_score")
    rows = []
    for i, lp in enumerate(grid.lambda_plus_axis):
        for j, lm in enumerate(grid.lambda_minus_axis):
            row = [float(lp), float(lm), float(grid.mean[i, j]),
                   float(grid.amplitude[i, j]), grid.labels[i, j].value]
            if with_chaos:
                row.append(float(grid.chaos[i, j]))
            rows.append(tuple(row))
    return ResultTable(tuple(cols), tuple(rows), _metadata(config, "phasemap"))


_RUNNERS = {
    "eigmap": _run_eigmap,
    "boundaries": _run_boundaries,
    "moments": _run_moments,
    "semiclassical": _run_semiclassical,
    "phasemap": _run_phasemap,
}


def run_subcommand(name: str, config: RunConfig, *, workers=None) -> ResultTable:
    """Validate the config for one subcommand and produce its ResultTable."""
    if name not in _RUNNERS:
        raise ConfigError(f"unknown subcommand {name!r}")
    validate_for(config, name)
    return _RUNNERS[name](config, workers)


def _workers_from_env() -> int:
    raw = os.environ.get("SPINDICKE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"SPINDICKE_THREADS must be a positive integer, got {raw!r}")
    return n


def _build_parser() -> _Parser:
    parser = _Parser(prog="spindicke",
                     description="Spin-1 Dicke model stability and dynamics runs")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key=value run configuration")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", default=None, choices=("csv", "jsonl"))
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}")
        config = parse_config(text)
        table = run_subcommand(args.subcommand, config, workers=_workers_from_env())
        fmt = args.format or config.get("format", "csv")
        out = args.out or config.get("out")
        if out:
            write_table(table, out, fmt)
        else:
            sys.stdout.write(emit(table, fmt))
        return 0
    except (_UsageError, ConfigError, WindowError) as exc:
        print(f"spindicke: config error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateModelError, EigensolverError, ValueError, RuntimeError,
            ArithmeticError) as exc:
        print(f"spindicke: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
