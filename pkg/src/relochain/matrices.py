"""Validated nonnegative matrix algebra for killed-chain benchmarks.

Covers construction and structure checking of sub-stochastic matrices,
Perron spectral elements by power iteration, positive tilting, the
normalized simplex map driven by a tilted matrix, the Hilbert projective
metric, and Birkhoff contraction coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateImageError,
    NegativeEntryError,
    NoConvergenceError,
    NonPositiveInputError,
    PeriodicError,
    ProportionalToStochasticWarning,
    ReducibleError,
    RowSumExceedsOneError,
    ZeroRowError,
)

ROW_SUM_TOL = 1e-12
NEGATIVE_NOISE_TOL = 1e-15
EIG_INCREMENT_RTOL = 1e-14
EIG_RESIDUAL_RTOL = 1e-12
MAX_POWER_ITERATIONS = 100_000


@dataclass(frozen=True)
class StateSpace:
    """Ordered, distinct state labels; index order is fixed for the object's lifetime."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ValueError("state space must contain at least one state")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("state labels must be distinct")

    @property
    def m(self) -> int:
        return len(self.labels)

    @classmethod
    def of_size(cls, m: int) -> "StateSpace":
        return cls(tuple(str(i + 1) for i in range(m)))


@dataclass(frozen=True)
class SubStochasticMatrix:
    """Nonnegative matrix with row sums at most 1, irreducible and aperiodic.

    The row deficit 1 - sum_t entries[s, t] is the per-state killing
    probability. Construct through :func:`validate_substochastic`.
    """

    space: StateSpace
    entries: np.ndarray
    irreducible: bool
    aperiodic: bool
    strictly_positive: bool
    proportional_to_stochastic: bool

    @property
    def m(self) -> int:
        return self.space.m

    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)


@dataclass(frozen=True)
class PerronTriple:
    """Spectral radius r with right vector h and left probability vector rho.

    Normalized so that rho sums to 1 and rho @ h = 1.
    """

    r: float
    h: np.ndarray
    rho: np.ndarray


def _as_square_array(raw) -> np.ndarray:
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix must have at least one state")
    return a


def structure_flags(raw) -> tuple[bool, bool, bool]:
    """(irreducible, aperiodic, strictly_positive) of the support digraph.

    Irreducibility is strong connectivity; aperiodicity is gcd 1 of the
    values 1 + depth(u) - depth(v) over support edges (u, v), with depths
    from a BFS tree rooted at state 0.
    """
    a = _as_square_array(raw)
    m = a.shape[0]
    support = a > 0.0
    strictly_positive = bool(support.all())

    forward = _reachable(support, 0)
    backward = _reachable(support.T, 0)
    irreducible = bool(forward.all() and backward.all())

    depth = _bfs_depths(support, 0)
    g = 0
    for u in range(m):
        if depth[u] < 0:
            continue
        for v in np.nonzero(support[u])[0]:
            if depth[v] >= 0:
                g = math.gcd(g, abs(int(depth[u]) + 1 - int(depth[v])))
    aperiodic = g == 1
    return irreducible, aperiodic, strictly_positive


def _reachable(support: np.ndarray, root: int) -> np.ndarray:
    m = support.shape[0]
    seen = np.zeros(m, dtype=bool)
    seen[root] = True
    stack = [root]
    while stack:
        u = stack.pop()
        for v in np.nonzero(support[u])[0]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return seen


def _bfs_depths(support: np.ndarray, root: int) -> np.ndarray:
    m = support.shape[0]
    depth = np.full(m, -1, dtype=np.int64)
    depth[root] = 0
    frontier = [root]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in np.nonzero(support[u])[0]:
                if depth[v] < 0:
                    depth[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return depth


def validate_substochastic(raw, labels=None) -> SubStochasticMatrix:
    """Validate entries and structure, clamp rounding noise, and build the matrix.

    Rows summing to slightly more than 1 (within 1e-12) are rescaled onto the
    simplex boundary; text-format inputs routinely carry that much noise.
    A matrix proportional to a stochastic one is legal but triggers a warning,
    since uniform killing makes the relocation comparison trivial.
    """
    a = _as_square_array(raw).copy()
    m = a.shape[0]

    if (a < -NEGATIVE_NOISE_TOL).any():
        s, t = np.unravel_index(np.argmin(a), a.shape)
        raise NegativeEntryError(f"entry ({s}, {t}) is negative: {a[s, t]!r}")
    np.clip(a, 0.0, None, out=a)

    sums = a.sum(axis=1)
    if (sums > 1.0 + ROW_SUM_TOL).any():
        s = int(np.argmax(sums))
        raise RowSumExceedsOneError(f"row {s} sums to {sums[s]!r} > 1 + {ROW_SUM_TOL}")
    over = sums > 1.0
    if over.any():
        a[over] /= sums[over, None]
        sums = a.sum(axis=1)

    irreducible, aperiodic, strictly_positive = structure_flags(a)
    if not irreducible:
        raise ReducibleError("support digraph is not strongly connected")
    if not aperiodic:
        raise PeriodicError("support digraph is periodic")

    proportional = bool(sums.max() - sums.min() <= ROW_SUM_TOL)
    if proportional:
        warnings.warn(
            "matrix is proportional to a stochastic matrix; killing is uniform",
            ProportionalToStochasticWarning,
            stacklevel=2,
        )

    space = StateSpace(tuple(labels)) if labels is not None else StateSpace.of_size(m)
    if space.m != m:
        raise ValueError(f"{space.m} labels for a {m}x{m} matrix")
    a.setflags(write=False)
    return SubStochasticMatrix(
        space=space,
        entries=a,
        irreducible=True,
        aperiodic=True,
        strictly_positive=strictly_positive,
        proportional_to_stochastic=proportional,
    )


def probability_vector(weights) -> np.ndarray:
    """Validate simplex membership (sum 1 within 1e-12) and return a copy."""
    p = np.asarray(weights, dtype=float).copy()
    if p.ndim != 1:
        raise ValueError("probability vector must be one-dimensional")
    if (p < 0).any():
        raise NonPositiveInputError("probability vector has a negative coordinate")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"probability vector sums to {p.sum()!r}, not 1")
    return p


def tilt_vector(a) -> np.ndarray:
    """Validate a strictly positive, finite weight vector and return a copy."""
    v = np.asarray(a, dtype=float).copy()
    if v.ndim != 1:
        raise ValueError("tilt vector must be one-dimensional")
    if not np.isfinite(v).all() or (v <= 0).any():
        raise NonPositiveInputError("tilt vector coordinates must be positive and finite")
    return v


def tilt(sigma, a) -> np.ndarray:
    """Column-scale sigma by the positive weights a: result[s, t] = sigma[s, t] * a[t].

    Support is unchanged, so irreducibility and aperiodicity carry over.
    """
    entries = sigma.entries if isinstance(sigma, SubStochasticMatrix) else _as_square_array(sigma)
    v = tilt_vector(a)
    if v.shape[0] != entries.shape[0]:
        raise ValueError("tilt vector length does not match the matrix")
    return entries * v[None, :]


NORM_EVERY = 4  # defer sup-normalization; growth over 4 steps stays in range


def _power_pair(a: np.ndarray, shift: float):
    """Sup-normalized power iteration on a and a.T with a common diagonal shift.

    Iterates stay entrywise nonnegative (nonnegative matrix, positive start),
    so the sup norm is a plain max; normalization is deferred a few steps at
    a time and the per-step eigenvalue estimate recovered as a geometric mean.
    """
    m = a.shape[0]
    at = a.T.copy()
    v = np.ones(m)
    u = np.ones(m)
    lam_v = lam_u = 0.0
    iters = 0
    while iters < MAX_POWER_ITERATIONS:
        for _ in range(3):
            for _ in range(NORM_EVERY):
                v = a @ v + shift * v
                u = at @ u + shift * u
                iters += 1
            nv = v.max()
            v /= nv
            nu = u.max()
            u /= nu
        est_v = nv ** (1.0 / NORM_EVERY)
        est_u = nu ** (1.0 / NORM_EVERY)
        inc_ok = (
            abs(est_v - lam_v) <= EIG_INCREMENT_RTOL * est_v
            and abs(est_u - lam_u) <= EIG_INCREMENT_RTOL * est_u
        )
        lam_v, lam_u = est_v, est_u
        if inc_ok:
            res_v = np.abs(a @ v + shift * v - est_v * v).max()
            res_u = np.abs(at @ u + shift * u - est_u * u).max()
            if res_v <= EIG_RESIDUAL_RTOL * est_v and res_u <= EIG_RESIDUAL_RTOL * est_u:
                return v, u, est_v - shift, iters
    raise NoConvergenceError(f"power iteration did not converge in {MAX_POWER_ITERATIONS} iterations")


def perron_triple(matrix) -> PerronTriple:
    """Spectral radius and eigenvectors of an irreducible aperiodic nonnegative matrix.

    Accepts a validated SubStochasticMatrix or a raw square array such as a
    tilted matrix. Power iteration runs on the matrix and its transpose with
    sup-norm normalization; when aperiodicity is not certified the iteration
    works on a diagonally shifted copy (shift proportional to the matrix
    scale, subtracted back exactly). The result satisfies rho @ M = r rho and
    M @ h = r h to 1e-10 relative, with sum(rho) = 1 and rho @ h = 1.
    """
    if isinstance(matrix, SubStochasticMatrix):
        a = np.asarray(matrix.entries, dtype=float)
        aperiodic_known = matrix.aperiodic
        irreducible = matrix.irreducible
    else:
        a = _as_square_array(matrix)
        if (a < 0).any():
            raise NegativeEntryError("matrix has a negative entry")
        irreducible, aperiodic_known, _ = structure_flags(a)
    m = a.shape[0]
    if m == 1:
        r = float(a[0, 0])
        if r <= 0:
            raise ReducibleError("1x1 matrix with zero entry has no positive spectral radius")
        return PerronTriple(r=r, h=np.ones(1), rho=np.ones(1))
    if not irreducible:
        raise ReducibleError("matrix is reducible; Perron data is not well defined here")

    shift = 0.0 if aperiodic_known else 0.1 * float(a.sum(axis=1).max())
    v, u, r_est, _ = _power_pair(a, shift)

    rho = u / u.sum()
    # Two-sided Rayleigh estimate: error is quadratic in the vector residuals.
    r = float(rho @ (a @ v) / (rho @ v))
    h = v / (rho @ v)
    h.setflags(write=False)
    rho.setflags(write=False)
    return PerronTriple(r=r, h=h, rho=rho)


def spectral_radius(matrix, aperiodic_known=False) -> float:
    """Spectral radius only, by one-sided power iteration; cheaper than the full triple."""
    a = matrix.entries if isinstance(matrix, SubStochasticMatrix) else _as_square_array(matrix)
    if isinstance(matrix, SubStochasticMatrix):
        aperiodic_known = matrix.aperiodic
    m = a.shape[0]
    if m == 1:
        return float(a[0, 0])
    shift = 0.0 if aperiodic_known else 0.1 * float(a.sum(axis=1).max())
    v = np.ones(m)
    lam = 0.0
    iters = 0
    while iters < MAX_POWER_ITERATIONS:
        for _ in range(3):
            for _ in range(NORM_EVERY):
                v = a @ v + shift * v
                iters += 1
            nv = v.max()
            v /= nv
        est = nv ** (1.0 / NORM_EVERY)
        if abs(est - lam) <= EIG_INCREMENT_RTOL * est:
            if np.abs(a @ v + shift * v - est * v).max() <= EIG_RESIDUAL_RTOL * est:
                return float(est - shift)
        lam = est
    raise NoConvergenceError(f"power iteration did not converge in {MAX_POWER_ITERATIONS} iterations")


def phi_map(p, sigma_a) -> np.ndarray:
    """Normalized right action of a tilted matrix on the simplex: p sigma_a / (p sigma_a 1)."""
    p = np.asarray(p, dtype=float)
    w = p @ np.asarray(sigma_a, dtype=float)
    total = w.sum()
    if total <= 0.0:
        raise DegenerateImageError("image p @ sigma_a vanished; input outside the admissible cone")
    return w / total


def hilbert_distance(x, y) -> float:
    """Projective distance log max(x/y) - log min(x/y) between positive vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if (x <= 0).any() or (y <= 0).any():
        raise NonPositiveInputError("hilbert_distance requires strictly positive coordinates")
    ratio = x / y
    return float(np.log(ratio.max()) - np.log(ratio.min()))


def birkhoff_contraction(matrix) -> float:
    """Contraction coefficient tanh(Delta/4) of the projective action of a matrix.

    Delta is the largest log cross-ratio over entry pairs. Any zero entry
    voids the strict-contraction certificate and the conventional value 1 is
    returned; rows of zeros are rejected outright.
    """
    a = matrix.entries if isinstance(matrix, SubStochasticMatrix) else _as_square_array(matrix)
    if (a < 0).any():
        raise NegativeEntryError("matrix has a negative entry")
    if (a.sum(axis=1) == 0.0).any():
        raise ZeroRowError("matrix has a zero row")
    if (a == 0.0).any():
        return 1.0
    logs = np.log(a)
    # G[s, t, t'] = log a[s,t] - log a[s,t']; Delta = max over s,s' of G[s] - G[s'].
    g = logs[:, :, None] - logs[:, None, :]
    delta = float((g.max(axis=0) - g.min(axis=0)).max())
    return math.tanh(delta / 4.0)


def read_matrix_text(text: str) -> np.ndarray:
    """Parse the shared matrix text format: first line m, then m rows of m reals."""
    tokens = text.split()
    if not tokens:
        raise ValueError("empty matrix text")
    try:
        m = int(tokens[0])
    except ValueError as exc:
        raise ValueError(f"first token must be the dimension, got {tokens[0]!r}") from exc
    need = 1 + m * m
    if len(tokens) != need:
        raise ValueError(f"expected {need - 1} entries for a {m}x{m} matrix, got {len(tokens) - 1}")
    vals = [float(t) for t in tokens[1:]]
    return np.array(vals, dtype=float).reshape(m, m)


def write_matrix_text(a) -> str:
    a = _as_square_array(a)
    lines = [str(a.shape[0])]
    for row in a:
        lines.append(" ".join(f"{x:.12g}" for x in row))
    return "\n".join(lines) + "\n"


def load_matrix(path, labels=None) -> SubStochasticMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_substochastic(read_matrix_text(fh.read()), labels=labels)
