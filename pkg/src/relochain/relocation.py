"""Relocation laws, memory windows, occupation rows, and kernel rows.

The law families are closed-form only (explicit table, point mass,
geometric), so tails and means are exact and the ergodicity hypothesis
checks never need numerical truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .matrices import SubStochasticMatrix, tilt_vector

EXPLICIT = "explicit"
DIRAC = "dirac"
GEOMETRIC = "geometric"


@dataclass(frozen=True)
class RelocationLaw:
    """Probability law on the nonnegative integers governing relocation depth.

    Exactly one parameterization is active, selected by `kind`:
    explicit masses on {0..d}, a point mass at d, or geometric with
    mass(k) = eps (1-eps)^k.
    """

    kind: str
    masses: tuple[float, ...] | None = None
    point: int | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.kind == EXPLICIT:
            if not self.masses:
                raise ValueError("explicit law needs at least one mass")
            p = np.asarray(self.masses, dtype=float)
            if (p < 0).any():
                raise ValueError("explicit masses must be nonnegative")
            if abs(p.sum() - 1.0) > 1e-12:
                raise ValueError(f"explicit masses sum to {p.sum()!r}, not 1")
        elif self.kind == DIRAC:
            if self.point is None or self.point < 0:
                raise ValueError("dirac law needs a nonnegative point")
        elif self.kind == GEOMETRIC:
            if self.eps is None or not (0.0 < self.eps < 1.0):
                raise ValueError("geometric law needs eps in (0, 1)")
        else:
            raise ValueError(f"unknown law kind {self.kind!r}")

    @classmethod
    def explicit(cls, masses) -> "RelocationLaw":
        return cls(kind=EXPLICIT, masses=tuple(float(x) for x in masses))

    @classmethod
    def dirac(cls, d: int) -> "RelocationLaw":
        return cls(kind=DIRAC, point=int(d))

    @classmethod
    def geometric(cls, eps: float) -> "RelocationLaw":
        return cls(kind=GEOMETRIC, eps=float(eps))

    @property
    def bounded(self) -> bool:
        return self.kind != GEOMETRIC

    @property
    def support_max(self) -> int | None:
        """Largest index with positive mass, None when unbounded."""
        if self.kind == DIRAC:
            return self.point
        if self.kind == EXPLICIT:
            p = self.masses
            top = len(p) - 1
            while top > 0 and p[top] == 0.0:
                top -= 1
            return top
        return None

    @property
    def is_dirac_mass(self) -> bool:
        """True when the whole mass sits on one index, whatever the encoding."""
        if self.kind == DIRAC:
            return True
        if self.kind == EXPLICIT:
            return sum(1 for x in self.masses if x > 0.0) == 1
        return False

    @cached_property
    def mean(self) -> float:
        if self.kind == DIRAC:
            return float(self.point)
        if self.kind == GEOMETRIC:
            return (1.0 - self.eps) / self.eps
        return float(sum(i * p for i, p in enumerate(self.masses)))

    def mass(self, i: int) -> float:
        if i < 0:
            return 0.0
        if self.kind == DIRAC:
            return 1.0 if i == self.point else 0.0
        if self.kind == GEOMETRIC:
            return self.eps * (1.0 - self.eps) ** i
        return self.masses[i] if i < len(self.masses) else 0.0

    def tail(self, n: int) -> float:
        """tail(n) = sum of masses at indices >= n; nonincreasing with tail(0) = 1."""
        if n <= 0:
            return 1.0
        if self.kind == DIRAC:
            return 1.0 if n <= self.point else 0.0
        if self.kind == GEOMETRIC:
            return (1.0 - self.eps) ** n
        return float(max(0.0, math.fsum(self.masses[n:])))

    def spec_string(self) -> str:
        if self.kind == DIRAC:
            return f"dirac {self.point}"
        if self.kind == GEOMETRIC:
            return f"geometric {self.eps:.12g}"
        return "explicit " + " ".join(f"{p:.12g}" for p in self.masses)


def parse_relocation_law(spec: str) -> RelocationLaw:
    """Parse `dirac d` | `geometric eps` | `explicit p0 p1 ... pd`."""
    parts = spec.split()
    if not parts:
        raise ValueError("empty relocation law spec")
    kind = parts[0].lower()
    if kind == DIRAC:
        if len(parts) != 2:
            raise ValueError("dirac law takes exactly one integer argument")
        return RelocationLaw.dirac(int(parts[1]))
    if kind == GEOMETRIC:
        if len(parts) != 2:
            raise ValueError("geometric law takes exactly one argument")
        return RelocationLaw.geometric(float(parts[1]))
    if kind == EXPLICIT:
        if len(parts) < 2:
            raise ValueError("explicit law needs at least one mass")
        return RelocationLaw.explicit(float(x) for x in parts[1:])
    raise ValueError(f"unknown relocation law {parts[0]!r}")


@dataclass(frozen=True)
class HistoryWindow:
    """Finite memory window (s_0, ..., s_d) of state indices, most recent first.

    Indices past the stored window reuse the oldest entry, which realizes an
    eventually constant infinite memory.
    """

    states: tuple[int, ...]

    def __post_init__(self):
        if len(self.states) == 0:
            raise ValueError("history window must be nonempty")
        if any(s < 0 for s in self.states):
            raise ValueError("window entries are state indices, must be >= 0")

    def __len__(self) -> int:
        return len(self.states)

    @classmethod
    def constant(cls, state: int, length: int = 1) -> "HistoryWindow":
        return cls((int(state),) * max(1, length))

    def entry(self, i: int) -> int:
        """State i steps into the past, with the eventually constant extension."""
        return self.states[i] if i < len(self.states) else self.states[-1]

    def truncated(self, length: int) -> tuple[int, ...]:
        """First `length` entries, extended by the oldest one if needed."""
        s = self.states
        if len(s) >= length:
            return s[:length]
        return s + (s[-1],) * (length - len(s))


@dataclass(frozen=True)
class TruncationResult:
    """Law restricted to {0..d} with the unassigned tail accounted for.

    Conservative mode keeps the raw masses (total below 1, realizing extra
    killing); renormalized mode rescales them onto the simplex.
    """

    masses: np.ndarray
    d: int
    retained: float
    tail_mass: float
    mode: str
    cap_reached: bool

    @property
    def conservative(self) -> bool:
        return self.mode == "conservative"


def truncate_law(law: RelocationLaw, delta_tail: float, d_max: int, mode: str = "conservative") -> TruncationResult:
    """Smallest d with tail(d+1) <= delta_tail, capped at d_max.

    Hitting the cap is reported through `cap_reached` and the achieved
    `tail_mass` rather than by failing.
    """
    if delta_tail <= 0:
        raise ValueError("delta_tail must be positive")
    if mode not in ("conservative", "renormalized"):
        raise ValueError(f"unknown truncation mode {mode!r}")
    d = _smallest_depth(law, delta_tail)
    cap_reached = d > d_max
    if cap_reached:
        d = d_max
    masses = np.array([law.mass(i) for i in range(d + 1)], dtype=float)
    tail_mass = law.tail(d + 1)
    retained = 1.0 - tail_mass
    if mode == "renormalized":
        masses = masses / retained
    masses.setflags(write=False)
    return TruncationResult(
        masses=masses, d=d, retained=retained, tail_mass=tail_mass, mode=mode, cap_reached=cap_reached
    )


def _smallest_depth(law: RelocationLaw, delta_tail: float) -> int:
    if law.bounded:
        d = law.support_max
        while d > 0 and law.tail(d) <= delta_tail:
            d -= 1
        return d
    # Geometric: closed-form first guess, then exact adjustment at the float boundary.
    n = max(1, math.ceil(math.log(delta_tail) / math.log1p(-law.eps)))
    while law.tail(n) > delta_tail:
        n += 1
    while n > 1 and law.tail(n - 1) <= delta_tail:
        n -= 1
    return n - 1


def occupation_measure(window: HistoryWindow, law: RelocationLaw, m: int) -> np.ndarray:
    """Law-weighted histogram of the window over the m states, renormalized onto the simplex.

    Mass at indices beyond the window is carried by the oldest entry, so the
    total assigned mass is exactly 1 up to rounding.
    """
    weights = np.zeros(m, dtype=float)
    s = window.states
    k = len(s)
    for i in range(k - 1):
        weights[s[i]] += law.mass(i)
    weights[s[k - 1]] += law.tail(k - 1)
    total = weights.sum()
    return weights / total


def defective_kernel_row(window: HistoryWindow, sigma, law: RelocationLaw) -> np.ndarray:
    """Sub-probability row sum_i mass(i) sigma[w_i, :]; the deficit from 1 is the killing probability."""
    entries = sigma.entries if isinstance(sigma, SubStochasticMatrix) else np.asarray(sigma, dtype=float)
    s = window.states
    k = len(s)
    row = np.zeros(entries.shape[1], dtype=float)
    for i in range(k - 1):
        row += law.mass(i) * entries[s[i]]
    row += law.tail(k - 1) * entries[s[k - 1]]
    return row


def biased_kernel_row(window: HistoryWindow, sigma, law: RelocationLaw, a) -> np.ndarray:
    """Conservative row: the defective row reweighted by a and normalized.

    Equals the two-stage decomposition that first picks a relocation index
    with probability proportional to mass(i) * (sigma a)(w_i) and then moves
    by the a-biased transition matrix.
    """
    v = tilt_vector(a)
    row = defective_kernel_row(window, sigma, law)
    weighted = row * v
    total = weighted.sum()
    if total <= 0.0:
        raise ValueError("biased kernel row degenerated; sigma must be irreducible and a positive")
    return weighted / total


@dataclass(frozen=True)
class HypothesisReport:
    """Which unique-ergodicity route applies, and whether strictness is available."""

    finite_mean: bool
    tail_o_inv_sqrt: bool
    exponential_tail: bool
    sigma_positive: bool
    law_is_dirac: bool
    route_finite_mean: bool
    route_positive_matrix: bool
    unique_ergodicity: bool
    strict_improvement: bool


def hypothesis_report(sigma: SubStochasticMatrix, law: RelocationLaw) -> HypothesisReport:
    """Decide the ergodicity hypotheses analytically for the closed-form law families.

    Route (i) needs a finite first moment of the law; route (ii) needs a
    strictly positive matrix and a tail of order o(n^{-1/2}). Strict
    improvement over the benchmark is only guaranteed when the law is not a
    point mass and some route applies.
    """
    finite_mean = True  # bounded support or geometric: always finite
    tail_small = True  # exact for these families: tails vanish or decay geometrically
    exponential_tail = True
    positive = bool(sigma.strictly_positive)
    dirac = law.is_dirac_mass
    route_i = finite_mean
    route_ii = positive and tail_small
    unique = route_i or route_ii
    return HypothesisReport(
        finite_mean=finite_mean,
        tail_o_inv_sqrt=tail_small,
        exponential_tail=exponential_tail,
        sigma_positive=positive,
        law_is_dirac=dirac,
        route_finite_mean=route_i,
        route_positive_matrix=route_ii,
        unique_ergodicity=unique,
        strict_improvement=unique and not dirac,
    )
