"""Experiment orchestration: occupation concentration, radius comparison, conjecture scan.

Every experiment writes CSV files with a header row and 12-significant-digit
floats, then a manifest recording the config, per-stage wall-clock, and a
content digest of each output. Reruns with the same config and seed are
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bounds import optimize_j
from .config import ExperimentConfig
from .errors import UnknownExperimentError
from .lifted import bracket_radius, build_lifted, lifted_spectral_radius
from .matrices import (
    SubStochasticMatrix,
    load_matrix,
    perron_triple,
    validate_substochastic,
)
from .relocation import RelocationLaw
from .simulate import RngSpec, run_weighted_chain
from . import svg

BENCHMARK_ENTRIES = ((0.72, 0.08), (0.18, 0.58))


@dataclass(frozen=True)
class RunManifest:
    config: dict
    version: str
    stage_seconds: dict
    outputs: tuple  # of (relative path, sha256 hex digest)


def fmt(x) -> str:
    return f"{float(x):.12g}"


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row) + "\n")


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def benchmark_matrix() -> SubStochasticMatrix:
    """The two-state benchmark used by the shipped experiment configs."""
    return validate_substochastic(np.array(BENCHMARK_ENTRIES))


def _load_sigma(config: ExperimentConfig) -> SubStochasticMatrix:
    if config.sigma_path:
        return load_matrix(config.sigma_path)
    return benchmark_matrix()


def _eps_name(eps: float) -> str:
    return f"{eps:g}"


def run_fig1(config: ExperimentConfig):
    """Occupation-measure concentration for geometric laws at decreasing eps.

    One weighted run with flat weights per eps; each run emits its occupation
    samples, and the summary collects mean and spread of the first
    coordinate against the benchmark quasi-stationary mass.
    """
    sigma = _load_sigma(config)
    rho1 = float(perron_triple(sigma).rho[0])
    os.makedirs(config.outdir, exist_ok=True)
    ones = np.ones(sigma.m)
    outputs = []
    stages = {}
    summary_rows = []
    panel_data = []
    for k, eps in enumerate(config.epsilons):
        t0 = time.perf_counter()
        law = RelocationLaw.geometric(eps)
        stats = run_weighted_chain(
            sigma, law, ones,
            steps=config.steps, burnin=config.burnin, thin=config.thin,
            rng=RngSpec(config.seed, config.stream + k),
        )
        name = f"fig1_eps{_eps_name(eps)}.csv"
        path = os.path.join(config.outdir, name)
        theta_cols = [f"theta_{i+1}" for i in range(sigma.m)]
        rows = [
            [int(j), *theta, c2]
            for j, theta, c2 in zip(stats.sample_steps, stats.theta_samples, stats.c2_running)
        ]
        write_csv(path, ["j", *theta_cols, "c2_running"], [[str(r[0]), *r[1:]] for r in rows])
        outputs.append(path)
        theta1 = stats.theta_samples[:, 0]
        summary_rows.append([_eps_name(eps), float(theta1.mean()), float(theta1.std(ddof=1)), rho1])
        panel_data.append((f"eps={_eps_name(eps)}", theta1))
        stages[f"eps {_eps_name(eps)}"] = round(time.perf_counter() - t0, 3)
    summary = os.path.join(config.outdir, "fig1_summary.csv")
    write_csv(summary, ["eps", "mean_theta_1", "std_theta_1", "rho_1"], summary_rows)
    outputs.append(summary)
    if config.emit_svg:
        panel = os.path.join(config.outdir, "fig1_histograms.svg")
        svg.histogram_panel(
            panel, panel_data, title="occupation measure of state 1", xlabel="theta_1"
        )
        outputs.append(panel)
    return outputs, stages


def run_fig2(config: ExperimentConfig):
    """Radius brackets for geometric laws against the variational ceiling.

    Each row holds the certified bracket of the relocation-chain radius, the
    benchmark radius, and the optimized objective, all in log scale.
    """
    sigma = _load_sigma(config)
    os.makedirs(config.outdir, exist_ok=True)
    stages = {}
    t0 = time.perf_counter()
    opt = optimize_j(sigma, restarts=config.restarts, rng=RngSpec(config.seed, config.stream))
    log_jstar = math.log(opt.j_star)
    log_r = math.log(perron_triple(sigma).r)
    stages["optimize_j"] = round(time.perf_counter() - t0, 3)

    rows = []
    for eps in config.epsilons:
        t0 = time.perf_counter()
        law = RelocationLaw.geometric(eps)
        bracket = bracket_radius(sigma, law, delta_tail=config.dtail, d_max=config.dmax)
        rows.append([_eps_name(eps), math.log(bracket.lo), math.log(bracket.hi), log_r, log_jstar])
        stages[f"eps {_eps_name(eps)}"] = round(time.perf_counter() - t0, 3)
    path = os.path.join(config.outdir, "fig2.csv")
    write_csv(path, ["eps", "log_r_lo", "log_r_hi", "log_r_benchmark", "log_Jstar"], rows)
    outputs = [path]
    if config.emit_svg:
        xs = [math.log10(float(r[0])) for r in rows]
        chart = os.path.join(config.outdir, "fig2_rates.svg")
        svg.line_chart(
            chart,
            xs,
            [
                ("log r_lo", [r[1] for r in rows]),
                ("log r_hi", [r[2] for r in rows]),
                ("log r benchmark", [r[3] for r in rows]),
                ("log J*", [r[4] for r in rows]),
            ],
            title="persistence log-rates for geometric relocation laws",
            xlabel="log10 eps",
            ylabel="log rate",
        )
        outputs.append(chart)
    return outputs, stages


def _random_substochastic(gen, m):
    """Rejection-sample a validated matrix: uniform entries, rows scaled below 1."""
    while True:
        raw = gen.random((m, m))
        targets = gen.uniform(0.2, 0.98, size=m)
        raw = raw / raw.sum(axis=1, keepdims=True) * targets[:, None]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return validate_substochastic(raw)
        except Exception:
            continue


def _random_bounded_law(gen):
    d = int(gen.integers(1, 4))
    masses = gen.dirichlet(np.ones(d + 1))
    return RelocationLaw.explicit(masses)


def run_conjecture_scan(config: ExperimentConfig):
    """Search randomized cases for an exact radius above the variational ceiling.

    Violations are counted and reported, never asserted away: the question
    whether the ceiling binds for every relocation law is open.
    """
    os.makedirs(config.outdir, exist_ok=True)
    gen = RngSpec(config.seed, config.stream).generator()
    rows = []
    violations = 0
    t0 = time.perf_counter()
    for case in range(config.count):
        sigma = _random_substochastic(gen, config.m)
        law = _random_bounded_law(gen)
        r = perron_triple(sigma).r
        chain = build_lifted(sigma, law, mode="exact")
        r_bold = lifted_spectral_radius(chain).radius
        j_star = optimize_j(sigma, restarts=config.restarts, rng=RngSpec(config.seed, case + 1)).j_star
        violated = int(r_bold > j_star + 1e-6)
        violations += violated
        rows.append([str(case), r, j_star, r_bold, str(violated)])
    path = os.path.join(config.outdir, "conjecture.csv")
    write_csv(path, ["case_id", "r", "J_star", "r_bold", "violated"], rows)
    stages = {"scan": round(time.perf_counter() - t0, 3)}
    print(f"conjecture scan: {violations} violation(s) in {config.count} case(s)")
    return [path], stages


_EXPERIMENTS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "conjecture-scan": run_conjecture_scan,
}


def run_config(config: ExperimentConfig) -> RunManifest:
    """Dispatch the named experiment and write manifest.json beside its outputs."""
    runner = _EXPERIMENTS.get(config.experiment)
    if runner is None:
        raise UnknownExperimentError(f"unknown experiment {config.experiment!r}")
    outputs, stages = runner(config)
    entries = tuple((os.path.basename(p), sha256_of(p)) for p in outputs)
    manifest = RunManifest(
        config=dict(config.raw) or _config_echo(config),
        version=__version__,
        stage_seconds=stages,
        outputs=entries,
    )
    path = os.path.join(config.outdir, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "config": manifest.config,
                "version": manifest.version,
                "stage_seconds": manifest.stage_seconds,
                "outputs": [{"path": p, "sha256": d} for p, d in manifest.outputs],
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return manifest


def _config_echo(config: ExperimentConfig) -> dict:
    return {
        "experiment": config.experiment,
        "epsilons": " ".join(_eps_name(e) for e in config.epsilons),
        "steps": str(config.steps),
        "seed": str(config.seed),
        "outdir": config.outdir,
    }


def verify_manifest(outdir) -> bool:
    """Recompute digests for every file a manifest lists; True when all match."""
    path = os.path.join(outdir, "manifest.json")
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    for entry in data["outputs"]:
        full = os.path.join(outdir, entry["path"])
        if not os.path.exists(full) or sha256_of(full) != entry["sha256"]:
            return False
    return True
