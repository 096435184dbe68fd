"""Seeded Monte Carlo engines for the killed and weighted relocation chains.

The killed chain and the Feynman-Kac estimator run replicas side by side in
numpy arrays; the weighted chain is a single long path driven by buffered
uniform draws. Relocation depths are sampled by rejection (draw the depth
from the law, accept with probability proportional to the tilted row mass at
the referenced state), which is exact for unbounded laws: no truncation bias
enters the samplers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OverflowGuardError
from .matrices import SubStochasticMatrix, tilt_vector
from .relocation import (
    GEOMETRIC,
    HistoryWindow,
    RelocationLaw,
    occupation_measure,
)

LOG_OVERFLOW_LIMIT = 690.0  # log(1e300), unreachable for sub-stochastic weights


@dataclass(frozen=True)
class RngSpec:
    """Deterministic stream identity: same (seed, stream) reproduces the same paths."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class SurvivalCurve:
    ns: np.ndarray
    p_hat: np.ndarray
    se: np.ndarray
    replicas: int


@dataclass(frozen=True)
class KilledChainResult:
    curve: SurvivalCurve
    lifetimes: np.ndarray  # completed transitions; +inf when censored at n_max
    empirical: dict  # checkpoint n -> (survivors, m) array of empirical measures


@dataclass(frozen=True)
class WeightedChainStats:
    """Occupation samples and ergodic averages from one weighted-chain path."""

    theta_samples: np.ndarray  # (k, m)
    sample_steps: np.ndarray  # (k,)
    c2_running: np.ndarray  # (k,) running mean of the bound integrand
    c2_mean: float
    c2_se: float
    batch_means: np.ndarray
    state_histogram: np.ndarray
    burnin: int
    steps: int


@dataclass(frozen=True)
class FkEstimate:
    value: float
    se: float
    n: int
    replicas: int


class _UniformBuffer:
    """Blocked uniform draws; one stream feeds every decision in a sequential chain."""

    __slots__ = ("_rng", "_block", "_buf", "_i")

    def __init__(self, rng: np.random.Generator, block: int = 1 << 16):
        self._rng = rng
        self._block = block
        self._buf = rng.random(block)
        self._i = 0

    def next(self) -> float:
        if self._i == self._block:
            self._buf = self._rng.random(self._block)
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return v


def default_burnin(law: RelocationLaw) -> int:
    """10/eps steps for geometric laws, else 100 (d+1): the memory horizon sets mixing."""
    if law.kind == GEOMETRIC:
        return int(math.ceil(10.0 / law.eps))
    return 100 * (law.support_max + 1)


def _draw_depth_scalar(law: RelocationLaw, u: float, cum: np.ndarray | None) -> int:
    if law.kind == GEOMETRIC:
        return int(math.log1p(-u) / math.log1p(-law.eps))
    if law.kind == "dirac":
        return law.point
    return int(np.searchsorted(cum, u, side="right"))


def _law_cumulative(law: RelocationLaw) -> np.ndarray | None:
    if law.kind == "explicit":
        c = np.cumsum(np.asarray(law.masses, dtype=float))
        c[-1] = 1.0
        return c
    return None


def _draw_depth_vector(law: RelocationLaw, rng: np.random.Generator, size: int, cum) -> np.ndarray:
    if law.kind == GEOMETRIC:
        return rng.geometric(law.eps, size=size) - 1
    if law.kind == "dirac":
        return np.full(size, law.point, dtype=np.int64)
    return np.searchsorted(cum, rng.random(size), side="right").astype(np.int64)


def run_killed_chain(
    sigma: SubStochasticMatrix,
    law: RelocationLaw,
    init: HistoryWindow,
    n_max: int,
    replicas: int,
    rng: RngSpec,
    checkpoints: tuple[int, ...] = (),
) -> KilledChainResult:
    """Replica-parallel simulation of the killed chain with relocations.

    Each replica keeps its full history; a step draws the relocation depth T
    from the law, reads the state T steps back (the initial window extends by
    its oldest entry), and moves from it by sigma, dying with the row's
    killing probability. p_hat[n] is the fraction of replicas whose first n
    transitions all succeeded.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    gen = rng.generator()
    entries = sigma.entries
    m = sigma.m
    cum = np.cumsum(entries, axis=1)  # row cdf; u beyond the last column kills
    law_cum = _law_cumulative(law)

    p = len(init)
    hist = np.zeros((replicas, p + n_max), dtype=np.int8)
    for k in range(p):
        hist[:, p - 1 - k] = init.states[k]

    lifetimes = np.full(replicas, np.inf)
    active = np.arange(replicas)
    alive_counts = np.zeros(n_max + 1, dtype=np.int64)
    alive_counts[0] = replicas
    counts = np.zeros((replicas, m), dtype=np.int64)
    empirical: dict[int, np.ndarray] = {}
    check = set(int(c) for c in checkpoints)

    for n in range(1, n_max + 1):
        if active.size == 0:
            for rest in range(n, n_max + 1):
                alive_counts[rest] = 0
                if rest in check:
                    empirical[rest] = np.zeros((0, m))
            break
        size = active.size
        depth = _draw_depth_vector(law, gen, size, law_cum)
        ref_col = np.maximum(p - 1 + (n - 1) - depth, 0)
        ref_state = hist[active, ref_col]
        u = gen.random(size)
        nxt = (u[:, None] >= cum[ref_state]).sum(axis=1)
        died = nxt >= m
        lifetimes[active[died]] = n - 1
        survivors = active[~died]
        moved = nxt[~died]
        hist[survivors, p - 1 + n] = moved
        counts[survivors, moved] += 1
        active = survivors
        alive_counts[n] = active.size
        if n in check:
            empirical[n] = counts[active] / float(n)

    p_hat = alive_counts / float(replicas)
    se = np.sqrt(p_hat * (1.0 - p_hat) / replicas)
    curve = SurvivalCurve(ns=np.arange(n_max + 1), p_hat=p_hat, se=se, replicas=replicas)
    return KilledChainResult(curve=curve, lifetimes=lifetimes, empirical=empirical)


def run_weighted_chain(
    sigma: SubStochasticMatrix,
    law: RelocationLaw,
    a,
    steps: int,
    burnin: int | None = None,
    thin: int = 20,
    rng: RngSpec = RngSpec(0),
    n_batches: int = 20,
    init_state: int = 0,
) -> WeightedChainStats:
    """One long path of the conservative chain with weighted relocations.

    Per step: rejection-sample the relocation depth (accept with probability
    (sigma a)(s_T) / max(sigma a)), then move by the a-biased transition
    row. After burn-in the occupation measure of the current memory and the
    running bound integrand log(K a / a) are recorded every `thin` steps;
    the integrand is evaluated at the same memory state in both numerator
    and denominator, so a point-mass law with a equal to the right Perron
    vector yields a constant sequence.
    """
    if burnin is None:
        # The memory-horizon rule, capped so short diagnostic runs stay legal.
        burnin = min(default_burnin(law), steps // 2)
    if steps <= burnin:
        raise ValueError("steps must exceed burnin")
    av = tilt_vector(a)
    if av.shape[0] != sigma.m:
        raise ValueError("tilt vector length must match the state count")
    gen = rng.generator()
    buf = _UniformBuffer(gen)
    entries = sigma.entries
    m = sigma.m
    sa = entries @ av  # (sigma a)(s)
    sa_max = float(sa.max())
    pi_cum = np.cumsum(entries * av[None, :] / sa[:, None], axis=1)
    pi_cum[:, -1] = 1.0
    law_cum = _law_cumulative(law)

    init = HistoryWindow.constant(init_state, 1)
    hist = np.zeros(steps + 1, dtype=np.int64)
    hist[0] = init_state

    geometric = law.kind == GEOMETRIC
    if geometric:
        theta = occupation_measure(init, law, m)
        one_minus_eps = 1.0 - law.eps
    else:
        d_sup = law.support_max
        law_masses = np.array([law.mass(i) for i in range(d_sup + 1)])

    n_rec = (steps - burnin - 1) // thin + 1
    theta_samples = np.empty((n_rec, m))
    sample_steps = np.empty(n_rec, dtype=np.int64)
    c2_running = np.empty(n_rec)
    rec = 0
    hist_counts = np.zeros(m, dtype=np.int64)
    batch_sums = np.zeros(n_batches)
    batch_counts = np.zeros(n_batches, dtype=np.int64)
    post = steps - burnin
    c2_sum = 0.0
    c2_count = 0
    log_av = np.log(av)

    for j in range(steps):
        # rejection sampling of the relocation depth
        while True:
            t_depth = _draw_depth_scalar(law, buf.next(), law_cum)
            ref = hist[j - t_depth] if t_depth <= j else init_state
            if buf.next() * sa_max <= sa[ref]:
                break
        u = buf.next()
        row = pi_cum[ref]
        nxt = 0
        while row[nxt] < u:
            nxt += 1
        hist[j + 1] = nxt

        if geometric:
            theta *= one_minus_eps
            theta[nxt] += law.eps
            theta /= theta.sum()
        else:
            theta = np.zeros(m)
            for i in range(d_sup):
                theta[hist[max(j + 1 - i, 0)]] += law_masses[i]
            theta[hist[max(j + 1 - d_sup, 0)]] += law.tail(d_sup)
            theta /= theta.sum()

        if j + 1 > burnin:
            c2 = math.log(float(theta @ sa)) - log_av[nxt]
            c2_sum += c2
            c2_count += 1
            b = (c2_count - 1) * n_batches // post
            batch_sums[b] += c2
            batch_counts[b] += 1
            hist_counts[nxt] += 1
            if (c2_count - 1) % thin == 0:
                theta_samples[rec] = theta
                sample_steps[rec] = j + 1
                c2_running[rec] = c2_sum / c2_count
                rec += 1

    means = batch_sums / np.maximum(batch_counts, 1)
    c2_mean = c2_sum / c2_count
    c2_se = float(means.std(ddof=1) / math.sqrt(n_batches))
    return WeightedChainStats(
        theta_samples=theta_samples[:rec],
        sample_steps=sample_steps[:rec],
        c2_running=c2_running[:rec],
        c2_mean=c2_mean,
        c2_se=c2_se,
        batch_means=means,
        state_histogram=hist_counts,
        burnin=burnin,
        steps=steps,
    )


def fk_survival_estimate(
    sigma: SubStochasticMatrix,
    law: RelocationLaw,
    a,
    init: HistoryWindow,
    n: int,
    replicas: int,
    rng: RngSpec,
) -> FkEstimate:
    """Unbiased survival estimate through the weighted chain.

    Replicas never die; each carries the running product of
    K a(X(j-1)) / a(X(j)) in log space, and the estimate is the plain mean
    of the exponentiated weights.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    gen = rng.generator()
    av = tilt_vector(a)
    entries = sigma.entries
    m = sigma.m
    sa = entries @ av
    sa_max = float(sa.max())
    pi_cum = np.cumsum(entries * av[None, :] / sa[:, None], axis=1)
    pi_cum[:, -1] = 1.0
    law_cum = _law_cumulative(law)
    log_av = np.log(av)

    p = len(init)
    hist = np.zeros((replicas, p + n), dtype=np.int8)
    for k in range(p):
        hist[:, p - 1 - k] = init.states[k]

    geometric = law.kind == GEOMETRIC
    if geometric:
        theta0 = occupation_measure(init, law, m)
        theta = np.tile(theta0, (replicas, 1))
        one_minus_eps = 1.0 - law.eps
    else:
        d_sup = law.support_max
        law_masses = np.array([law.mass(i) for i in range(d_sup + 1)])

    log_w = np.zeros(replicas)
    rows = np.arange(replicas)

    for j in range(1, n + 1):
        # K a at the pre-move memory state
        if geometric:
            ka = theta @ sa
        else:
            ka = np.zeros(replicas)
            for i in range(d_sup):
                col = max(p - 1 + (j - 1) - i, 0)
                ka += law_masses[i] * sa[hist[:, col]]
            col = max(p - 1 + (j - 1) - d_sup, 0)
            ka += law.tail(d_sup) * sa[hist[:, col]]

        # rejection sampling of depths, vectorized over still-rejected replicas
        ref = np.zeros(replicas, dtype=np.int64)
        pending = rows
        while pending.size:
            depth = _draw_depth_vector(law, gen, pending.size, law_cum)
            cols = np.maximum(p - 1 + (j - 1) - depth, 0)
            cand = hist[pending, cols]
            accept = gen.random(pending.size) * sa_max <= sa[cand]
            ref[pending[accept]] = cand[accept]
            pending = pending[~accept]

        u = gen.random(replicas)
        nxt = (u[:, None] >= pi_cum[ref]).sum(axis=1)
        np.clip(nxt, 0, m - 1, out=nxt)
        hist[:, p - 1 + j] = nxt

        log_w += np.log(ka) - log_av[nxt]
        if geometric:
            theta *= one_minus_eps
            theta[rows, nxt] += law.eps
            theta /= theta.sum(axis=1, keepdims=True)

    if (log_w > LOG_OVERFLOW_LIMIT).any():
        raise OverflowGuardError("Feynman-Kac weight left the representable range")
    w = np.exp(log_w)
    value = float(w.mean())
    se = float(w.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    return FkEstimate(value=value, se=se, n=n, replicas=replicas)
