"""Exact finite representation of the relocation chain on memory windows.

A bounded relocation law with support in {0..d} makes the chain Markov on
windows of d+1 states. Windows are encoded in mixed radix with the most
recent state most significant, so the successor of window index w under a
new state t is t * m**d + w // m: an integer shift-and-add, no lookup
tables. The kernel weight from window w toward t is
sum_i mass(i) * sigma[w_i, t]; the N x m array of these weights is the only
stored object, never the N x N operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergenceError, StateCapExceededError
from .matrices import SubStochasticMatrix, perron_triple
from .relocation import HistoryWindow, RelocationLaw, TruncationResult, truncate_law

DEFAULT_STATE_CAP = 2**21
LIFTED_RESIDUAL_RTOL = 1e-12
LIFTED_INCREMENT_RTOL = 1e-15
MAX_SWEEPS = 100_000

EXACT = "exact"
LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class LiftedChain:
    """Sub-stochastic chain on the m**(d+1) memory windows.

    `weights[w, t]` is the transition weight from window w toward state t;
    the successor window index is t * m**d + w // m.
    """

    m: int
    d: int
    masses: np.ndarray
    weights: np.ndarray
    mode: str
    tail_mass: float

    @property
    def n_states(self) -> int:
        return self.m ** (self.d + 1)

    def window_index(self, window: HistoryWindow) -> int:
        digits = window.truncated(self.d + 1)
        if any(s >= self.m for s in digits):
            raise ValueError("window entry outside the state space")
        idx = 0
        for s in digits:
            idx = idx * self.m + s
        return idx

    def apply(self, v: np.ndarray) -> np.ndarray:
        """One sub-stochastic sweep u(w) = sum_t weights[w, t] * v(succ(w, t))."""
        m = self.m
        block = self.n_states // m
        u = np.zeros_like(v)
        for t in range(m):
            u += self.weights[:, t] * np.repeat(v[t * block : (t + 1) * block], m)
        return u


@dataclass(frozen=True)
class SpectralResult:
    """Perron radius of the lifted operator with its sup-normalized right vector."""

    radius: float
    right_vector: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class RadiusBracket:
    """Certified two-sided enclosure of the relocation-chain radius.

    `lo_lift` and `hi_lift` are the raw truncated-lift radii; `lo` and `hi`
    additionally fold in the always-valid analytic envelopes (the benchmark
    radius from below, the largest benchmark row sum from above), which carry
    the certificate when the affordable truncation is loose.
    """

    lo: float
    hi: float
    d_used: int
    tail_mass: float
    lo_lift: float
    hi_lift: float
    exact: bool
    cap_reached: bool


def _finite_masses(law_or_trunc, mode: str) -> tuple[np.ndarray, float]:
    if isinstance(law_or_trunc, TruncationResult):
        return np.asarray(law_or_trunc.masses, dtype=float), law_or_trunc.tail_mass
    if isinstance(law_or_trunc, RelocationLaw):
        if not law_or_trunc.bounded:
            raise ValueError("unbounded law: truncate first, or use bracket_radius")
        d = law_or_trunc.support_max
        masses = np.array([law_or_trunc.mass(i) for i in range(d + 1)], dtype=float)
        return masses, 0.0
    return np.asarray(law_or_trunc, dtype=float), 0.0


def build_lifted(sigma, law, mode: str = EXACT, state_cap: int = DEFAULT_STATE_CAP) -> LiftedChain:
    """Assemble the window chain for a finite-support mass vector.

    `law` may be a bounded RelocationLaw, a TruncationResult, or a raw mass
    sequence. Modes: exact uses the masses as given; lower is the
    conservative truncation (row deficits realize the discarded tail as
    killing); upper adds tail_mass * max_u sigma[u, t] to every weight toward
    t, which dominates the true kernel pointwise.
    """
    entries = sigma.entries if isinstance(sigma, SubStochasticMatrix) else np.asarray(sigma, dtype=float)
    if mode not in (EXACT, LOWER, UPPER):
        raise ValueError(f"unknown lift mode {mode!r}")
    masses, tail_mass = _finite_masses(law, mode)
    if mode != UPPER:
        tail_mass_applied = 0.0
    else:
        tail_mass_applied = tail_mass
    m = entries.shape[0]
    d = len(masses) - 1
    n_states = m ** (d + 1)
    if n_states > state_cap:
        best = int(math.floor(math.log(state_cap, m))) - 1
        raise StateCapExceededError(
            f"m**(d+1) = {n_states} exceeds the cap {state_cap}; largest affordable d is {best}",
            best_d=best,
        )

    occ = np.zeros((n_states, m))
    base = np.arange(m)
    for i, mass in enumerate(masses):
        if mass == 0.0:
            continue
        pattern = np.tile(np.repeat(base, m ** (d - i)), m**i)
        for s in range(m):
            occ[:, s] += mass * (pattern == s)
    weights = occ @ entries
    if tail_mass_applied > 0.0:
        weights += tail_mass_applied * entries.max(axis=0)[None, :]

    # The sub-stochastic invariant only binds for chains built from a
    # validated benchmark; tilted matrices may legitimately exceed it.
    if mode != UPPER and isinstance(sigma, SubStochasticMatrix):
        sums = weights.sum(axis=1)
        if (sums > 1.0 + 1e-12).any():
            raise ValueError("lifted row sums exceed 1; input masses are not sub-stochastic")
    weights.setflags(write=False)
    masses = np.asarray(masses, dtype=float).copy()
    masses.setflags(write=False)
    return LiftedChain(m=m, d=d, masses=masses, weights=weights, mode=mode, tail_mass=tail_mass)


def lifted_spectral_radius(chain: LiftedChain, max_sweeps: int = MAX_SWEEPS) -> SpectralResult:
    """Matrix-free power iteration on the window operator.

    A diagonal shift proportional to the largest row sum keeps the iteration
    convergent for periodic or reducible supports (upper-mode lifts need
    this); the shift moves the eigenvalue by exactly its own value and is
    subtracted back. Cost per sweep is O(m**(d+2)); memory stays O(m**(d+1))
    per vector.
    """
    shift = 0.1 * float(chain.weights.sum(axis=1).max())
    if shift <= 0.0:
        raise ValueError("zero operator has no Perron radius")
    v = np.ones(chain.n_states)
    lam_prev = 0.0
    sweeps = 0
    norm_every = 4  # deferred normalization; growth over 4 sweeps stays in range
    while sweeps < max_sweeps:
        for _ in range(4):
            for _ in range(norm_every):
                v = chain.apply(v) + shift * v
                sweeps += 1
            peak = float(v.max())  # iterates stay nonnegative
            v /= peak
        lam = peak ** (1.0 / norm_every)
        if abs(lam - lam_prev) <= LIFTED_INCREMENT_RTOL * lam:
            resid_vec = chain.apply(v) + shift * v - lam * v
            residual = float(np.abs(resid_vec).max())
            if residual <= LIFTED_RESIDUAL_RTOL * lam:
                radius = lam - shift
                unshifted_residual = float(np.abs(chain.apply(v) - radius * v).max())
                v = v.copy()
                v.setflags(write=False)
                return SpectralResult(
                    radius=radius, right_vector=v, iterations=sweeps, residual=unshifted_residual
                )
        lam_prev = lam
    raise NoConvergenceError(f"lifted power iteration did not converge in {max_sweeps} sweeps")


def survival_exact(chain: LiftedChain, init: HistoryWindow, n: int) -> float:
    """Probability that the window chain survives n transitions from `init`.

    n-fold application of the operator to the all-ones vector, read at the
    initial window.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    v = np.ones(chain.n_states)
    for _ in range(n):
        v = chain.apply(v)
    return float(v[chain.window_index(init)])


def lifted_structure_check(chain: LiftedChain) -> tuple[bool, bool]:
    """(irreducible, aperiodic) of the lifted support digraph.

    Strong connectivity by forward and backward reachability from window 0;
    period as the gcd of 1 + depth(u) - depth(v) over support edges, using
    BFS depths.
    """
    m, n = chain.m, chain.n_states
    block = n // m
    pos = chain.weights > 0.0

    depth = _lifted_bfs(chain, pos, forward=True)
    if (depth < 0).any():
        return False, False
    back = _lifted_bfs(chain, pos, forward=False)
    if (back < 0).any():
        return False, False

    g = 0
    for t in range(m):
        src = np.nonzero(pos[:, t])[0]
        dst = t * block + src // m
        diffs = np.abs(depth[src] + 1 - depth[dst])
        g = math.gcd(g, int(np.gcd.reduce(diffs))) if len(diffs) else g
    return True, g == 1


def _lifted_bfs(chain: LiftedChain, pos: np.ndarray, forward: bool) -> np.ndarray:
    m, n = chain.m, chain.n_states
    block = n // m
    depth = np.full(n, -1, dtype=np.int64)
    depth[0] = 0
    frontier = np.array([0], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        nxt = []
        for t in range(m):
            if forward:
                cand_src = frontier[pos[frontier, t]]
                cand = t * block + cand_src // m
            else:
                # Predecessors of u under letter t exist when u sits in block t;
                # they are (u mod block) * m + x with a positive weight toward t.
                in_block = frontier[(frontier // block) == t]
                if in_block.size == 0:
                    continue
                base = (in_block % block) * m
                cand = (base[:, None] + np.arange(m)[None, :]).ravel()
                cand = cand[pos[cand, t]]
            if cand.size:
                cand = cand[depth[cand] < 0]
                if cand.size:
                    cand = np.unique(cand)
                    depth[cand] = level
                    nxt.append(cand)
        frontier = np.concatenate(nxt) if nxt else np.empty(0, dtype=np.int64)
    return depth


def bracket_radius(
    sigma: SubStochasticMatrix,
    law: RelocationLaw,
    delta_tail: float = 1e-6,
    d_max: int = 20,
    state_cap: int = DEFAULT_STATE_CAP,
) -> RadiusBracket:
    """Two-sided certified enclosure of the relocation-chain spectral radius.

    Bounded laws that fit the caps get the exact lifted radius on both
    sides. Otherwise the law is truncated at the largest affordable depth:
    the conservative lift bounds from below, the tail-majorized lift from
    above, and the analytic envelopes (benchmark radius, largest benchmark
    row sum) tighten whatever the truncation left loose.
    """
    m = sigma.m
    d_cap = d_max
    while m ** (d_cap + 1) > state_cap:
        d_cap -= 1
    if d_cap < 0:
        raise StateCapExceededError("state cap too small for even a single-step window", best_d=None)

    if law.bounded and law.support_max <= d_cap:
        chain = build_lifted(sigma, law, mode=EXACT, state_cap=state_cap)
        radius = lifted_spectral_radius(chain).radius
        return RadiusBracket(
            lo=radius,
            hi=radius,
            d_used=law.support_max,
            tail_mass=0.0,
            lo_lift=radius,
            hi_lift=radius,
            exact=True,
            cap_reached=False,
        )

    trunc = truncate_law(law, delta_tail, d_cap, mode="conservative")
    lower = build_lifted(sigma, trunc, mode=LOWER, state_cap=state_cap)
    lo_lift = lifted_spectral_radius(lower).radius
    upper = build_lifted(sigma, trunc, mode=UPPER, state_cap=state_cap)
    hi_lift = lifted_spectral_radius(upper).radius

    r_bench = perron_triple(sigma).r
    lo = max(lo_lift, r_bench)
    hi = min(hi_lift, float(sigma.row_sums().max()))
    hi = max(hi, lo)
    return RadiusBracket(
        lo=lo,
        hi=hi,
        d_used=trunc.d,
        tail_mass=trunc.tail_mass,
        lo_lift=lo_lift,
        hi_lift=hi_lift,
        exact=False,
        cap_reached=trunc.cap_reached,
    )
