"""Extensions of the baseline liability game.

Court objectives and contracting regimes reuse the slice solver in
:mod:`liability.equilibrium`; the remaining helpers cover many agent types
and richer signal structures, for which only the critical fines are exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .audit import inaction_belief
from .equilibrium import (
    EquilibriumSolution,
    _require_either_positive,
    eta_1,
    eta_2,
    solve,
)
from .model import (
    SIGNALS,
    InformationEnvironment,
    ModelError,
    PopulationModel,
    _delta,
    _odds,
    critical_py,
    posterior,
)

__all__ = [
    "MensReaMode",
    "ObjectiveOutcome",
    "MonotoneCheck",
    "TypeSpectrum",
    "KTypeFines",
    "DependentSignalSpec",
    "eta_1",
    "eta_2",
    "solve_with_mode",
    "solve_objective_mensrea",
    "objective_condition",
    "check_py_monotone_objective",
    "solve_commitment",
    "solve_expost_screening",
    "verify_no_inaction_punishment",
    "ktype_critical_fines",
    "ktype_fine_difference",
    "extended_posteriors",
    "delta_extended",
    "closed_form_delta_extended",
]


class MensReaMode(str, Enum):
    SUBJECTIVE = "subjective"  # court targets the agent's type
    OBJECTIVE = "objective"  # court targets acting on bad information


def solve_with_mode(env: InformationEnvironment, pop: PopulationModel, mode: MensReaMode) -> EquilibriumSolution:
    return solve(env, pop, MensReaMode(mode).value)


# ---------------------------------------------------------------------------
# Objective mens rea


@dataclass(frozen=True)
class ObjectiveOutcome:
    solution: EquilibriumSolution
    condition: Optional[bool]  # welfare condition at p_y*; None if p_y* is outside the region
    p_y_star: Optional[float]


def _hat_delta(beta: float, p_x: float, p_y: float) -> Tuple[float, float]:
    """Numerator and denominator of the chilling/deterrence value ratio."""
    gain = beta * p_y * (1 - p_x) - (1 - beta) * p_x * (1 - p_y)
    loss = (1 - beta) * p_x * p_y - beta * (1 - p_x) * (1 - p_y)
    return gain, loss


def objective_jump(env: InformationEnvironment, pop: PopulationModel, p_y: float) -> float:
    """Welfare change when crossing ``p_y`` from the chilling to the mixing side.

    Both sides punish at ``F^b``; the left side chills the unbiased type and
    lets the biased type mix with ``eta_1``, the right side lets the unbiased
    type act and the biased type mix with ``eta_2``.
    """
    g = pop.gamma
    gain, loss = _hat_delta(env.beta, env.p_x, p_y)
    gap = eta_2(pop, p_y).value - eta_1(pop, p_y).value
    return g * gain - (1 - g) * gap * loss


def objective_condition(env: InformationEnvironment, pop: PopulationModel) -> Tuple[Optional[bool], Optional[float]]:
    """Whether welfare cannot fall at ``p_y*`` under an objective court."""
    p_star = critical_py(env.beta, env.p_x)
    if p_star is None:
        return None, None
    g = pop.gamma
    gain, loss = _hat_delta(env.beta, env.p_x, p_star)
    gap = eta_2(pop, p_star).value - eta_1(pop, p_star).value
    return (1 - g) / g * gap <= gain / loss, p_star


def solve_objective_mensrea(
    env: InformationEnvironment, pop: PopulationModel, off_path_deterrence: bool = False
) -> ObjectiveOutcome:
    """Designer optimum when the court punishes acting on inefficient information.

    By default the designer chooses between the free pass and the mixing
    profiles at ``F^b``.  ``off_path_deterrence=True`` also admits deterring
    every action on ``x = -1``, which an off-path court belief supports.
    """
    _require_either_positive(env)
    condition, p_star = objective_condition(env, pop)
    return ObjectiveOutcome(solve(env, pop, "objective", off_path_deterrence), condition, p_star)


@dataclass(frozen=True)
class MonotoneCheck:
    guaranteed: bool
    fired: Tuple[str, ...]
    p_y_star: Optional[float]
    jump: Optional[float]  # welfare change at p_y*, when it lies in the region
    gamma_free: bool  # the sufficient condition that ignores gamma_bar


def check_py_monotone_objective(env: InformationEnvironment, pop: PopulationModel) -> MonotoneCheck:
    """Sufficient conditions for welfare to rise in ``p_y`` under an objective court."""
    condition, p_star = objective_condition(env, pop)
    fired: List[str] = []
    jump = None
    gamma_free = False
    if p_star is None:
        fired.append("outside-region")
    else:
        jump = objective_jump(env, pop, p_star)
        if condition:
            fired.append("welfare-condition")
        lhs = (1 - env.beta) / env.beta * env.p_x / (1 - env.p_x)
        rhs = (1 - pop.gamma * (1 - p_star)) / (1 - p_star * pop.gamma)
        gamma_free = lhs <= rhs
        if gamma_free:
            fired.append("gamma-bar-free")
    return MonotoneCheck(bool(fired), tuple(fired), p_star, jump, gamma_free)


# ---------------------------------------------------------------------------
# Contracting regimes


def solve_commitment(env: InformationEnvironment, pop: PopulationModel) -> EquilibriumSolution:
    """Principal commits to punishments; no court indifference is needed."""
    return solve(env, pop, "commitment")


def solve_expost_screening(env: InformationEnvironment, pop: PopulationModel) -> EquilibriumSolution:
    """No cap on fines; the court picks the (expected) punishment freely.

    Any randomization over fines is payoff-equivalent to its mean for
    risk-neutral agents, so the court's choice is reported as a deterministic
    fine equal to the required expectation and the caps are infinite.
    """
    return solve(env, pop, "expost")


def verify_no_inaction_punishment(
    env: InformationEnvironment,
    pop: PopulationModel,
    solution: EquilibriumSolution,
    tol: float = 1e-12,
) -> bool:
    """True when inaction never makes the court more suspicious than the prior."""
    actions = solution.profile.action_prob
    return all(
        inaction_belief(env, pop, actions, x, theta) >= pop.gamma - tol
        for x in SIGNALS
        for theta in SIGNALS
    )


# ---------------------------------------------------------------------------
# Many agent types


@dataclass(frozen=True)
class TypeSpectrum:
    """Alignment weights ``lambdas`` (0 = biased, 1 = unbiased) and type priors."""

    lambdas: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        lam = tuple(float(v) for v in self.lambdas)
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", w)
        if len(lam) < 2 or len(lam) != len(w):
            raise ModelError("need at least two types with one weight each")
        if lam[0] != 0.0 or lam[-1] != 1.0:
            raise ModelError("the spectrum must run from lambda = 0 to lambda = 1")
        if any(b < a for a, b in zip(lam, lam[1:])):
            raise ModelError("lambdas must be non-decreasing")
        if any(v < 0.0 for v in w) or not math.isclose(sum(w), 1.0, abs_tol=1e-12):
            raise ModelError("weights must be a probability vector")


@dataclass(frozen=True)
class KTypeFines:
    k_act_high: Optional[int]  # highest type acting on (-1, 1); indices are 0-based
    k_act_low: Optional[int]  # highest type acting on (-1, -1)
    fines_high: Tuple[float, ...]  # largest fine letting type k act on (-1, 1)
    fines_low: Tuple[float, ...]  # smallest fine deterring type k on (-1, -1)

    def difference(self) -> Optional[float]:
        if self.k_act_high is None or self.k_act_low is None:
            return None
        return self.fines_low[self.k_act_low] - self.fines_high[self.k_act_high]


def _type_fine(belief: float, lam: float) -> float:
    # Type k acts at belief m iff lam (2m - 1) + 1 - lam >= (1 - m) F.
    return 1.0 / (1.0 - belief) - 2.0 * lam


def ktype_critical_fines(env: InformationEnvironment, spectrum: TypeSpectrum, fine: float) -> KTypeFines:
    """Per-type critical fines and the marginal acting types under ``fine``."""
    if not fine >= 0.0:
        raise ModelError(f"fine must be non-negative, got {fine!r}")
    hi = posterior(env, (-1, 1))
    lo = posterior(env, (-1, -1))
    high = tuple(_type_fine(hi, lam) for lam in spectrum.lambdas)
    low = tuple(_type_fine(lo, lam) for lam in spectrum.lambdas)

    def marginal(fines: Sequence[float]) -> Optional[int]:
        acting = [k for k, f in enumerate(fines) if fine <= f]
        return max(acting) if acting else None

    return KTypeFines(marginal(high), marginal(low), high, low)


def ktype_fine_difference(env: InformationEnvironment, spectrum: TypeSpectrum, k_high: int, k_low: int) -> float:
    """Closed form of ``F_{-1}^{k_low} - F_1^{k_high}``.

    Equals ``delta - 2 + 2 (lambda_high - lambda_low)``, which reduces to
    ``delta`` for the biased/unbiased pair.
    """
    lam = spectrum.lambdas
    return _delta(env.beta, env.p_x, env.p_y) - 2.0 + 2.0 * (lam[k_high] - lam[k_low])


# ---------------------------------------------------------------------------
# Richer signal structures


def _half_open(name: str, value: float) -> float:
    value = float(value)
    if not 0.5 <= value < 1.0:
        raise ModelError(f"{name}={value!r} must lie in [1/2, 1)")
    return value


@dataclass(frozen=True)
class DependentSignalSpec:
    """Either state-dependent precisions or a copy probability ``rho``.

    Asymmetric: ``P(X = theta | theta) = p_x[theta]`` and likewise for ``Y``,
    given as ``(p_x_pos, p_x_neg, p_y_pos, p_y_neg)``.
    Correlated: ``Y`` equals ``X`` with probability ``rho`` and is otherwise an
    independent signal of precision ``p_y``; ``X`` has precision ``p_x``.
    """

    asymmetric: Optional[Tuple[float, float, float, float]] = None
    rho: Optional[float] = None
    p_x: Optional[float] = None
    p_y: Optional[float] = None

    def __post_init__(self) -> None:
        correlated = self.rho is not None
        if correlated == (self.asymmetric is not None):
            raise ModelError("populate exactly one of the asymmetric or correlated forms")
        if correlated:
            if not 0.0 <= float(self.rho) <= 1.0:
                raise ModelError(f"rho={self.rho!r} must lie in [0, 1]")
            if self.p_x is None or self.p_y is None:
                raise ModelError("the correlated form needs p_x and p_y")
            object.__setattr__(self, "p_x", _half_open("p_x", self.p_x))
            object.__setattr__(self, "p_y", _half_open("p_y", self.p_y))
        else:
            names = ("p_x_pos", "p_x_neg", "p_y_pos", "p_y_neg")
            vals = tuple(_half_open(n, v) for n, v in zip(names, self.asymmetric))
            if len(vals) != 4:
                raise ModelError("asymmetric form needs four precisions")
            object.__setattr__(self, "asymmetric", vals)

    @classmethod
    def correlated(cls, rho: float, p_x: float, p_y: float) -> "DependentSignalSpec":
        return cls(rho=rho, p_x=p_x, p_y=p_y)

    @classmethod
    def state_dependent(cls, p_x_pos: float, p_x_neg: float, p_y_pos: float, p_y_neg: float) -> "DependentSignalSpec":
        return cls(asymmetric=(p_x_pos, p_x_neg, p_y_pos, p_y_neg))

    def likelihood_ratio(self, x: int, y: int) -> float:
        """P(x, y | theta = 1) / P(x, y | theta = -1).

        Factors common to both states are cancelled, so the ratio stays finite
        on pairs whose probability vanishes in a limit (``y != x`` at
        ``rho = 1``).
        """
        if self.asymmetric is not None:
            pxp, pxn, pyp, pyn = self.asymmetric
            rx = pxp / (1 - pxn) if x == 1 else (1 - pxp) / pxn
            ry = pyp / (1 - pyn) if y == 1 else (1 - pyp) / pyn
            return rx * ry
        rho, px, py = self.rho, self.p_x, self.p_y
        rx = px / (1 - px) if x == 1 else (1 - px) / px
        if y != x:
            ry = py / (1 - py) if y == 1 else (1 - py) / py
        else:
            good = py if y == 1 else 1 - py
            bad = 1 - py if y == 1 else py
            ry = (rho + (1 - rho) * good) / (rho + (1 - rho) * bad)
        return rx * ry


def extended_posteriors(spec: DependentSignalSpec, beta: float) -> dict:
    if not 0.0 < beta < 1.0:
        raise ModelError(f"beta={beta!r} must lie in (0, 1)")
    out = {}
    for x in SIGNALS:
        for y in SIGNALS:
            odds = _odds(beta) * spec.likelihood_ratio(x, y)
            out[(x, y)] = odds / (1.0 + odds)
    return out


def delta_extended(spec: DependentSignalSpec, beta: float) -> float:
    """``F^b - F^u`` recomputed from the critical-fine definitions."""
    post = extended_posteriors(spec, beta)
    hi, lo = post[(-1, 1)], post[(-1, -1)]
    return 1.0 / (1.0 - lo) - (2.0 * hi - 1.0) / (1.0 - hi)


def closed_form_delta_extended(spec: DependentSignalSpec, beta: float, constant: float = 2.0) -> float:
    """Closed form ``constant + odds * bracket`` for the extended structures.

    Recomputing the fines from the posteriors gives the constant ``+2``;
    ``constant=-2`` is accepted so the sign-flipped variant can be compared.
    """
    if spec.asymmetric is not None:
        pxp, pxn, pyp, pyn = spec.asymmetric
        scale = _odds(beta) * (1 - pxp) / pxn
        bracket = (1 - pyp) / pyn - pyp / (1 - pyn)
    else:
        rho, px, py = spec.rho, spec.p_x, spec.p_y
        scale = _odds(beta) * (1 - px) / px
        bracket = correlation_bracket(rho, py)
    return constant + scale * bracket


def correlation_bracket(rho: float, p_y: float) -> float:
    """Bracket term for correlated signals; never positive."""
    return (1 - (1 - rho) * p_y) / (rho + p_y * (1 - rho)) - p_y / (1 - p_y)
