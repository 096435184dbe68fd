"""Command-line interface.

Subcommands mirror the library: spectral queries (perron, lifted-radius),
simulation (simulate-survival, weighted-run), variational bounds (bound-c3,
rate-function), and the packaged experiments (fig1, fig2, conjecture-scan,
run). Exit codes: 0 success, 1 numerical failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .bounds import optimize_j, rate_function_lifted
from .config import (
    FIG1_EPSILONS,
    FIG2_EPSILONS,
    ExperimentConfig,
    config_from_values,
    load_config,
)
from .errors import (
    ConfigParseError,
    NoConvergenceError,
    OverflowGuardError,
    RelochainError,
    StateCapExceededError,
    UnknownExperimentError,
)
from .experiments import benchmark_matrix, fmt, run_config, write_csv
from .lifted import bracket_radius
from .matrices import load_matrix, perron_triple
from .relocation import HistoryWindow, parse_relocation_law
from .simulate import RngSpec, run_killed_chain, run_weighted_chain


def _sigma_arg(parser, required=False):
    parser.add_argument(
        "--sigma",
        required=required,
        help="matrix text file (first line m, then m rows); defaults to the built-in two-state benchmark",
    )


def _get_sigma(args):
    return load_matrix(args.sigma) if args.sigma else benchmark_matrix()


def _parse_a(spec, sigma):
    if spec in (None, "ones", "1"):
        return np.ones(sigma.m)
    if spec == "h":
        return perron_triple(sigma).h
    return np.array([float(tok) for tok in spec.replace(",", " ").split()])


def _out_stream(args):
    if getattr(args, "out", None):
        return open(args.out, "w", encoding="utf-8", newline="\n")
    return sys.stdout


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relochain",
        description="persistence of killed Markov chains with preferential relocations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perron", help="spectral elements of a benchmark matrix")
    _sigma_arg(p)

    p = sub.add_parser("lifted-radius", help="certified radius bracket for a relocation law")
    _sigma_arg(p)
    p.add_argument("--tau", required=True, help="relocation law: 'dirac d' | 'geometric eps' | 'explicit p0 ...'")
    p.add_argument("--dtail", type=float, default=1e-6)
    p.add_argument("--dmax", type=int, default=16)

    p = sub.add_parser("simulate-survival", help="Monte Carlo survival curve of the killed chain")
    _sigma_arg(p)
    p.add_argument("--tau", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--replicas", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--init-state", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("weighted-run", help="one path of the conservative weighted chain")
    _sigma_arg(p)
    p.add_argument("--tau", required=True)
    p.add_argument("--a", default="ones", help="'ones' | 'h' | comma-separated positive weights")
    p.add_argument("--steps", type=int, default=400_000)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--thin", type=int, default=20)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("bound-c3", help="optimize the dispersed-relocation objective")
    _sigma_arg(p)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=12345)

    p = sub.add_parser("rate-function", help="benchmark and lifted rate functions on a grid")
    _sigma_arg(p)
    p.add_argument("--tau", required=True, help="bounded relocation law")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out", help="CSV output path (default stdout)")

    for name, eps_default in (("fig1", FIG1_EPSILONS), ("fig2", FIG2_EPSILONS)):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="config file; other flags override its values")
        _sigma_arg(p)
        p.add_argument("--outdir", default=f"out_{name}")
        p.add_argument("--steps", type=int, default=400_000)
        p.add_argument("--seed", type=int, default=12345)
        p.add_argument("--dmax", type=int, default=16)
        p.add_argument("--emit-svg", action="store_true")
        p.set_defaults(default_epsilons=eps_default)

    p = sub.add_parser("conjecture-scan", help="randomized search for ceiling violations")
    p.add_argument("--config")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--outdir", default="out_conjecture")

    p = sub.add_parser("run", help="run an experiment described by a config file")
    p.add_argument("--config", required=True)

    return parser


def _cmd_perron(args):
    triple = perron_triple(_get_sigma(args))
    json.dump(
        {"r": triple.r, "h": [float(x) for x in triple.h], "rho": [float(x) for x in triple.rho]},
        sys.stdout,
    )
    sys.stdout.write("\n")


def _cmd_lifted_radius(args):
    sigma = _get_sigma(args)
    law = parse_relocation_law(args.tau)
    bracket = bracket_radius(sigma, law, delta_tail=args.dtail, d_max=args.dmax)
    json.dump(
        {
            "lo": bracket.lo,
            "hi": bracket.hi,
            "d_used": bracket.d_used,
            "tail_mass": bracket.tail_mass,
        },
        sys.stdout,
    )
    sys.stdout.write("\n")


def _cmd_simulate_survival(args):
    sigma = _get_sigma(args)
    law = parse_relocation_law(args.tau)
    result = run_killed_chain(
        sigma, law, HistoryWindow.constant(args.init_state), args.n, args.replicas,
        RngSpec(args.seed, args.stream),
    )
    stream = _out_stream(args)
    try:
        stream.write("n,p_hat,se\n")
        curve = result.curve
        for n, p, s in zip(curve.ns, curve.p_hat, curve.se):
            stream.write(f"{n},{fmt(p)},{fmt(s)}\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


def _cmd_weighted_run(args):
    sigma = _get_sigma(args)
    law = parse_relocation_law(args.tau)
    a = _parse_a(args.a, sigma)
    stats = run_weighted_chain(
        sigma, law, a, steps=args.steps, burnin=args.burnin, thin=args.thin,
        rng=RngSpec(args.seed, args.stream),
    )
    stream = _out_stream(args)
    try:
        cols = ",".join(f"theta_{i+1}" for i in range(sigma.m))
        stream.write(f"j,{cols},c2_running\n")
        for j, theta, c2 in zip(stats.sample_steps, stats.theta_samples, stats.c2_running):
            cells = ",".join(fmt(x) for x in theta)
            stream.write(f"{j},{cells},{fmt(c2)}\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


def _cmd_bound_c3(args):
    sigma = _get_sigma(args)
    result = optimize_j(sigma, restarts=args.restarts, rng=RngSpec(args.seed))
    json.dump(
        {
            "a_star": [float(x) for x in result.a_star],
            "J_star": result.j_star,
            "J_at_one": result.j_at_one,
            "J_at_h": result.j_at_h,
        },
        sys.stdout,
    )
    sys.stdout.write("\n")


def _cmd_rate_function(args):
    sigma = _get_sigma(args)
    law = parse_relocation_law(args.tau)
    table = rate_function_lifted(sigma, law, grid_points=args.grid)
    stream = _out_stream(args)
    try:
        cols = ",".join(f"nu_{i+1}" for i in range(sigma.m))
        stream.write(f"{cols},I,I_bold\n")
        for nu, iv, ib in zip(table.nu_grid, table.i_values, table.i_lifted):
            cells = ",".join(fmt(x) for x in nu)
            iv_s = "inf" if math.isinf(iv) else fmt(iv)
            stream.write(f"{cells},{iv_s},{fmt(ib)}\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


def _experiment_config(args, name):
    if args.config:
        config = load_config(args.config)
        if config.experiment != name:
            raise UnknownExperimentError(f"config names {config.experiment!r}, expected {name!r}")
        return config
    values = {"experiment": name}
    if name in ("fig1", "fig2"):
        return ExperimentConfig(
            experiment=name,
            sigma_path=args.sigma,
            epsilons=args.default_epsilons,
            steps=args.steps,
            seed=args.seed,
            dmax=args.dmax,
            outdir=args.outdir,
            emit_svg=args.emit_svg,
            raw=values,
        )
    return ExperimentConfig(
        experiment=name,
        count=args.count,
        m=args.m,
        seed=args.seed,
        outdir=args.outdir,
        raw=values,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "perron":
            _cmd_perron(args)
        elif args.command == "lifted-radius":
            _cmd_lifted_radius(args)
        elif args.command == "simulate-survival":
            _cmd_simulate_survival(args)
        elif args.command == "weighted-run":
            _cmd_weighted_run(args)
        elif args.command == "bound-c3":
            _cmd_bound_c3(args)
        elif args.command == "rate-function":
            _cmd_rate_function(args)
        elif args.command in ("fig1", "fig2", "conjecture-scan"):
            run_config(_experiment_config(args, args.command))
        elif args.command == "run":
            run_config(load_config(args.config))
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
    except (NoConvergenceError, StateCapExceededError, OverflowGuardError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except (ConfigParseError, UnknownExperimentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RelochainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
