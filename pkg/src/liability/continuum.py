"""Posterior distributions on [0, 1] and the spread order around a pivot.

A distribution is stored as a CDF through knots ``(t, G)`` joined linearly.
A repeated position is a jump, so atoms and uniform pieces share one type.
Every integral here is evaluated in closed form per segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .equilibrium import Slice, best_outcome, slice_candidates
from .model import ModelError, PopulationModel

MASS_TOL = 1e-12
HEADER = "# posterior-distribution"


@dataclass(frozen=True)
class PosteriorDistribution:
    """Piecewise-linear CDF over posteriors; ``knots`` are ``(position, cumulative mass)``."""

    knots: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = [(float(t), float(g)) for t, g in self.knots]
        if not pts:
            raise ModelError("a distribution needs at least one knot")
        if pts[0][1] > 0.0:
            pts.insert(0, (pts[0][0], 0.0))
        for (t0, g0), (t1, g1) in zip(pts, pts[1:]):
            if t1 < t0 or g1 < g0 - MASS_TOL:
                raise ModelError("knots must be non-decreasing in position and mass")
        if pts[0][0] < 0.0 or pts[-1][0] > 1.0:
            raise ModelError("support must lie in [0, 1]")
        if abs(pts[0][1]) > MASS_TOL or abs(pts[-1][1] - 1.0) > 1e-9:
            raise ModelError("cumulative mass must run from 0 to 1")
        pts[-1] = (pts[-1][0], 1.0)
        object.__setattr__(self, "knots", tuple(pts))

    # -- constructors -----------------------------------------------------

    @classmethod
    def point(cls, position: float) -> "PosteriorDistribution":
        return cls(((position, 0.0), (position, 1.0)))

    @classmethod
    def uniform(cls, low: float = 0.0, high: float = 1.0) -> "PosteriorDistribution":
        return cls(((low, 0.0), (high, 1.0)))

    @classmethod
    def from_atoms(cls, atoms: Iterable[Tuple[float, float]]) -> "PosteriorDistribution":
        """Discrete distribution from ``(position, probability)`` pairs."""
        return cls.from_pieces((t, t, m) for t, m in atoms)

    @classmethod
    def from_pieces(cls, pieces: Iterable[Tuple[float, float, float]]) -> "PosteriorDistribution":
        """Mixture of uniforms on ``[low, high]`` (atoms when low == high)."""
        pieces = sorted((float(a), float(b), float(m)) for a, b, m in pieces if m > 0.0)
        knots: List[Tuple[float, float]] = []
        total = 0.0
        for low, high, mass in pieces:
            if knots and low < knots[-1][0]:
                raise ModelError("pieces must not overlap")
            knots.append((low, total))
            total += mass
            knots.append((high, total))
        return cls(tuple(knots))

    # -- basic queries ----------------------------------------------------

    def segments(self) -> List[Tuple[float, float, float]]:
        """``(low, high, mass)`` for every piece with positive mass."""
        return [
            (t0, t1, g1 - g0)
            for (t0, g0), (t1, g1) in zip(self.knots, self.knots[1:])
            if g1 - g0 > 0.0
        ]

    def atoms(self) -> List[Tuple[float, float]]:
        return [(t0, m) for t0, t1, m in self.segments() if t0 == t1]

    @property
    def atomless(self) -> bool:
        return not self.atoms()

    @property
    def mean(self) -> float:
        return sum(m * 0.5 * (t0 + t1) for t0, t1, m in self.segments())

    def breakpoints(self) -> List[float]:
        return sorted({t for t, _ in self.knots})

    def cdf(self, a: float) -> float:
        """Right-continuous CDF."""
        value = 0.0
        for t0, t1, m in self.segments():
            if a >= t1:
                value += m
            elif a > t0:
                value += m * (a - t0) / (t1 - t0)
        return value

    def cdf_left(self, a: float) -> float:
        """Left limit ``G(a-)``."""
        value = 0.0
        for t0, t1, m in self.segments():
            if a > t1:
                value += m
            elif a > t0:
                value += m * (a - t0) / (t1 - t0)
        return value

    def integrated_cdf(self, t: float) -> float:
        """``int_0^t G(s) ds``, i.e. ``E[(t - mu)^+]``."""
        total = 0.0
        for t0, t1, m in self.segments():
            if t >= t1:
                total += m * (t - 0.5 * (t0 + t1))
            elif t > t0:
                total += m * (t - t0) ** 2 / (2.0 * (t1 - t0))
        return total

    def gain_above(self, cutoff: float) -> float:
        """``int_{[cutoff, 1]} (2 mu - 1) dG``; atoms at the cutoff count."""
        total = 0.0
        for t0, t1, m in self.segments():
            if t0 == t1:
                if t0 >= cutoff:
                    total += m * (2.0 * t0 - 1.0)
                continue
            a = max(t0, cutoff)
            if a >= t1:
                continue
            total += m / (t1 - t0) * (t1 - a) * (a + t1 - 1.0)
        return total

    def expect(self, f: Callable[[np.ndarray], np.ndarray], splits: Sequence[float] = (), nodes: int = 32) -> float:
        """``E[f(mu)]`` with Gauss-Legendre on each piece, split at ``splits``."""
        xs, ws = np.polynomial.legendre.leggauss(nodes)
        total = 0.0
        for t0, t1, m in self.segments():
            if t0 == t1:
                total += m * float(f(np.array([t0]))[0])
                continue
            cuts = [t0] + sorted(s for s in splits if t0 < s < t1) + [t1]
            density = m / (t1 - t0)
            for a, b in zip(cuts, cuts[1:]):
                pts = 0.5 * (b - a) * xs + 0.5 * (a + b)
                total += density * 0.5 * (b - a) * float(np.dot(ws, f(pts)))
        return total

    # -- text format ------------------------------------------------------

    def serialize(self) -> str:
        """Header with mean and atom information, then one knot per line."""
        lines = [f"{HEADER} mean={self.mean!r} atoms={len(self.atoms())} atomless={str(self.atomless).lower()}"]
        lines += [f"{t!r} {g!r}" for t, g in self.knots]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "PosteriorDistribution":
        header = None
        knots = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                header = line
                continue
            t, g = line.split()
            knots.append((float(t), float(g)))
        dist = cls(tuple(knots))
        if header is not None:
            fields = dict(item.split("=", 1) for item in header.split()[2:] if "=" in item)
            if "mean" in fields and abs(float(fields["mean"]) - dist.mean) > 1e-9:
                raise ModelError("header mean disagrees with the knots")
            if "atomless" in fields and (fields["atomless"] == "true") != dist.atomless:
                raise ModelError("header atom flag disagrees with the knots")
        return dist


class SpreadOrder(str, Enum):
    MORE_SPREAD = "more_spread"
    LESS_SPREAD = "less_spread"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


@dataclass(frozen=True)
class SpreadComparison:
    order: SpreadOrder
    pivot: float = 0.5


def _grid(a: PosteriorDistribution, b: PosteriorDistribution, pivot: float) -> List[float]:
    pts = sorted(set(a.breakpoints()) | set(b.breakpoints()) | {pivot})
    mids = [0.5 * (p + q) for p, q in zip(pts, pts[1:])]
    return sorted(set(pts) | set(mids))


def compare_spread(a: PosteriorDistribution, b: PosteriorDistribution, pivot: float = 0.5, tol: float = 1e-12) -> SpreadComparison:
    """Is ``a`` more spread around ``pivot`` than ``b``?

    ``a`` is more spread if its CDF is weakly higher below the pivot and
    weakly lower above it.  Both the value and left limit are compared at
    every breakpoint, so jumps cannot hide a violation.
    """
    a_more = b_more = True
    equal = True
    for t in _grid(a, b, pivot):
        # At the pivot the left limit belongs to the lower side and the value
        # to the upper side, so mass sitting exactly on the pivot is neutral.
        for diff, below in ((a.cdf(t) - b.cdf(t), t < pivot), (a.cdf_left(t) - b.cdf_left(t), t <= pivot)):
            if abs(diff) > tol:
                equal = False
            if (below and diff < -tol) or (not below and diff > tol):
                a_more = False
            if (below and diff > tol) or (not below and diff < -tol):
                b_more = False
    if equal:
        return SpreadComparison(SpreadOrder.EQUAL, pivot)
    if a_more:
        return SpreadComparison(SpreadOrder.MORE_SPREAD, pivot)
    if b_more:
        return SpreadComparison(SpreadOrder.LESS_SPREAD, pivot)
    return SpreadComparison(SpreadOrder.INCOMPARABLE, pivot)


def is_mean_preserving_spread(a: PosteriorDistribution, b: PosteriorDistribution, tol: float = 1e-12) -> bool:
    """True if ``a`` has ``b``'s mean and a pointwise larger integrated CDF."""
    if abs(a.mean - b.mean) > tol:
        return False
    pts = sorted(set(a.breakpoints()) | set(b.breakpoints()))
    check = set(pts)
    # The integrand is linear between breakpoints, so the integral's extremum
    # on a piece sits where the integrand vanishes.
    for p, q in zip(pts, pts[1:]):
        dp = a.cdf(p) - b.cdf(p)
        dq = a.cdf_left(q) - b.cdf_left(q)
        if dp * dq < 0.0:
            check.add(p + (q - p) * dp / (dp - dq))
    return all(a.integrated_cdf(t) - b.integrated_cdf(t) >= -tol for t in check)


# ---------------------------------------------------------------------------
# Cutoffs and welfare under fixed punishments


def biased_cutoff_from_unbiased(mu_u: float) -> float:
    """Biased type's critical posterior under the fine whose unbiased cutoff is ``mu_u``."""
    if not 0.5 < mu_u <= 1.0:
        raise ModelError(f"mu_u={mu_u!r} must lie in (1/2, 1]")
    raw = 0.5 * (3.0 - 1.0 / (2.0 * mu_u - 1.0))
    return min(max(raw, 0.0), mu_u)


def fine_for_unbiased_cutoff(mu_u: float) -> float:
    """Fine making the unbiased type indifferent at ``mu_u``."""
    return 1.0 / (1.0 - mu_u) - 2.0 if mu_u < 1.0 else math.inf


def welfare_functional(dist: PosteriorDistribution, mu_u: float, gamma: float) -> float:
    """Designer payoff on one verifiable realization under fixed cutoffs."""
    mu_b = biased_cutoff_from_unbiased(mu_u)
    return (1.0 - gamma) * dist.gain_above(mu_b) + gamma * dist.gain_above(mu_u)


def optimal_welfare_functional(dist: PosteriorDistribution, gamma: float, grid: int = 2001) -> Tuple[float, float]:
    """Best ``(welfare, mu_u)`` over cutoffs, ignoring equilibrium constraints.

    Welfare only changes where a cutoff crosses a breakpoint, and between them
    it is smooth, so a dense grid plus the breakpoints and their biased images
    is searched.
    """
    from scipy.optimize import minimize_scalar

    cands = set(np.linspace(0.5 + 1e-9, 1.0, grid).tolist())
    for t in dist.breakpoints():
        if 0.5 < t <= 1.0:
            cands.add(t)
        if t < 1.0:
            # mu_u whose biased image is t
            cands.add(0.5 * (1.0 + 1.0 / (3.0 - 2.0 * t)))
    best_mu = max(cands, key=lambda m: welfare_functional(dist, m, gamma))
    step = 1.0 / (grid - 1)
    lo, hi = max(0.5 + 1e-12, best_mu - step), min(1.0, best_mu + step)
    res = minimize_scalar(lambda m: -welfare_functional(dist, m, gamma), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    pick = res.x if -res.fun > welfare_functional(dist, best_mu, gamma) else best_mu
    return welfare_functional(dist, pick, gamma), pick


# ---------------------------------------------------------------------------
# Richer verifiable signal with a binary unverifiable signal


def slice_for_posterior(x: float, p_y: float) -> Slice:
    """Slice for verifiable posterior ``x`` refined by a binary signal of precision ``p_y``."""
    odds = x / (1.0 - x)
    up = odds * p_y / (1.0 - p_y)
    down = odds * (1.0 - p_y) / p_y
    return Slice(
        x=x,
        hi=up / (1.0 + up),
        lo=down / (1.0 + down),
        v_hi=x * p_y - (1.0 - x) * (1.0 - p_y),
        v_lo=x * (1.0 - p_y) - (1.0 - x) * p_y,
        fail_hi=1.0 - p_y,
        fail_lo=p_y,
    )


def slice_optimal_welfare(x: float, p_y: float, pop: PopulationModel) -> float:
    return best_outcome(slice_candidates(slice_for_posterior(x, p_y), pop)).welfare


def critical_posterior(p_y: float) -> float:
    """Verifiable posterior at which the two critical fines coincide."""
    r = p_y / (1.0 - p_y) - (1.0 - p_y) / p_y
    return 2.0 / (2.0 + r)


def continuum_welfare(
    dist: PosteriorDistribution,
    p_y: float,
    pop: PopulationModel,
    slice_welfare: Optional[Callable[[float], float]] = None,
    nodes: int = 32,
) -> float:
    """Designer-optimal welfare with the fine chosen separately for every ``x``."""
    per_x = slice_welfare or (lambda x: slice_optimal_welfare(x, p_y, pop))
    vec = np.vectorize(per_x, otypes=[float])
    return dist.expect(vec, splits=(critical_posterior(p_y),), nodes=nodes)


@dataclass(frozen=True)
class SpreadInstance:
    beta: float
    p_y: float
    epsilon: float
    pop: PopulationModel
    x_star: float
    x1: float
    x2: float
    narrow: PosteriorDistribution  # verifiable signal of the better structure
    spread: PosteriorDistribution  # more spread verifiable signal
    welfare_narrow: float
    welfare_spread: float

    @property
    def gap(self) -> float:
        return self.welfare_narrow - self.welfare_spread


def spread_instance_restrictions(beta: float, p_y: float, epsilon: float) -> List[str]:
    """Names of the construction's restrictions that fail."""
    x_star = critical_posterior(p_y)
    x1 = 2.0 * beta - x_star - epsilon
    x2 = x1 + epsilon
    failed = []
    if not beta > x_star:
        failed.append("prior above the critical posterior")
    if not x_star + epsilon < 0.5:
        failed.append("low cluster inefficient without the private signal")
    if x_star - epsilon <= 0.0 or not slice_for_posterior(x_star - epsilon, p_y).hi > 0.5:
        failed.append("high private signal efficient on the low cluster")
    if not (0.0 < x1 < 1.0) or not slice_for_posterior(x1, p_y).lo > 0.5:
        failed.append("low private signal efficient on the high cluster")
    if not x1 > 0.5:
        failed.append("high cluster above one half (spread order)")
    if not x1 > x_star + epsilon:
        failed.append("clusters do not overlap")
    if not x2 + epsilon <= 1.0:
        failed.append("support inside [0, 1]")
    return failed


DEFAULT_GAMMA = 11 / 20
DEFAULT_GAMMA_BAR = 1 / 2


def _search_default(epsilon: float, pop: PopulationModel) -> Tuple[float, float]:
    grid = np.round(np.arange(0.60, 0.80 + 1e-9, 0.01), 10)
    for beta in grid:
        for p_y in grid:
            if spread_instance_restrictions(beta, p_y, epsilon):
                continue
            inst = _build(float(beta), float(p_y), epsilon, pop)
            if inst.gap > 0.0:
                return float(beta), float(p_y)
    raise ModelError("no grid point satisfies the construction's restrictions")


def _build(beta: float, p_y: float, epsilon: float, pop: PopulationModel) -> SpreadInstance:
    x_star = critical_posterior(p_y)
    x1 = 2.0 * beta - x_star - epsilon
    x2 = 2.0 * beta - x_star
    narrow = PosteriorDistribution.from_pieces([(x_star, x_star + epsilon, 0.5), (x1, x1 + epsilon, 0.5)])
    spread = PosteriorDistribution.from_pieces([(x_star - epsilon, x_star, 0.5), (x2, x2 + epsilon, 0.5)])
    return SpreadInstance(
        beta, p_y, epsilon, pop, x_star, x1, x2, narrow, spread,
        continuum_welfare(narrow, p_y, pop), continuum_welfare(spread, p_y, pop),
    )


def prop5_instance(
    epsilon: float = 0.01,
    beta: Optional[float] = None,
    p_y: Optional[float] = None,
    gamma: float = DEFAULT_GAMMA,
    gamma_bar: float = DEFAULT_GAMMA_BAR,
) -> SpreadInstance:
    """Two verifiable signals where the more spread one lowers welfare.

    Without explicit ``beta``/``p_y`` the first point of the grid
    ``[0.60, 0.80]^2`` (step 0.01, ``beta`` outer) satisfying every restriction
    with a positive gap is used.
    """
    if not epsilon > 0.0:
        raise ModelError("epsilon must be positive")
    pop = PopulationModel(gamma, gamma_bar)
    if beta is None or p_y is None:
        beta, p_y = _search_default(epsilon, pop)
    failed = spread_instance_restrictions(beta, p_y, epsilon)
    if failed:
        raise ModelError("infeasible parameters: " + "; ".join(failed))
    return _build(beta, p_y, epsilon, pop)


# ---------------------------------------------------------------------------
# Blackwell-better private information that hurts


@dataclass(frozen=True)
class BlackwellReport:
    epsilon_mid: float
    epsilon_low: float
    mean_preserving: bool
    blackwell_more_informative: bool
    spread_ordered: bool
    separates_original: bool
    separates_spread: bool
    strict_interior: bool  # mid posterior strictly below 1/2 in both signals


def separating_fine_exists(mu_high: float, mu_mid: float) -> bool:
    """Can one fine keep the unbiased type acting at ``mu_high`` and deter the biased at ``mu_mid``?"""
    return biased_cutoff_from_unbiased(mu_high) >= mu_mid


def blackwell_counterexample(
    mu_high: float = 0.75,
    mu_mid: Optional[float] = None,
    mu_low: float = 0.2,
    probs: Tuple[float, float, float] = (0.3, 0.4, 0.3),
    epsilon: float = 0.01,
) -> Tuple[Tuple[PosteriorDistribution, PosteriorDistribution], BlackwellReport]:
    """Three-point private signal and a mean-preserving spread of it.

    Posteriors after ``x = -1`` are ``(mu_low, mu_mid, mu_high)`` with
    probabilities ``probs``.  The spread raises the middle posterior by
    ``epsilon`` and lowers the bottom one to keep the mean.  ``mu_mid``
    defaults to the largest value still separable from ``mu_high``.
    """
    if mu_mid is None:
        mu_mid = biased_cutoff_from_unbiased(mu_high)
    p_low, p_mid, p_high = probs
    eps_low = p_mid * epsilon / p_low
    if mu_low - eps_low < 0.0:
        raise ModelError("spread pushes the bottom posterior below zero")
    original = PosteriorDistribution.from_atoms([(mu_low, p_low), (mu_mid, p_mid), (mu_high, p_high)])
    spread = PosteriorDistribution.from_atoms(
        [(mu_low - eps_low, p_low), (mu_mid + epsilon, p_mid), (mu_high, p_high)]
    )
    report = BlackwellReport(
        epsilon_mid=epsilon,
        epsilon_low=eps_low,
        mean_preserving=abs(original.mean - spread.mean) <= 1e-12,
        blackwell_more_informative=is_mean_preserving_spread(spread, original),
        spread_ordered=compare_spread(spread, original).order is SpreadOrder.MORE_SPREAD,
        separates_original=separating_fine_exists(mu_high, mu_mid),
        separates_spread=separating_fine_exists(mu_high, mu_mid + epsilon),
        strict_interior=mu_mid + epsilon < 0.5 and mu_low - eps_low < mu_mid < 0.5 < mu_high,
    )
    return (original, spread), report
