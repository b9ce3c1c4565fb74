"""Independent perfect-Bayesian-equilibrium audit.

Nothing here reuses the solver's slice helpers: payoffs and court beliefs are
recomputed from the full joint distribution of (type, x, y, state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Tuple

from .model import SIGNALS, AgentType, InformationEnvironment, PopulationModel, posterior

AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    constraint: str
    magnitude: float
    where: Tuple = ()


@dataclass(frozen=True)
class AuditResult:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def acting_payoff(omega: AgentType, belief: float, fine: float) -> float:
    """Interim gain from acting over not acting for a type at ``belief``."""
    failure = 1.0 - belief
    penalty = 0.0 if fine == 0.0 else failure * fine
    gross = belief - failure if omega is AgentType.UNBIASED else 1.0
    return gross - penalty


def court_statistic(
    env: InformationEnvironment,
    pop: PopulationModel,
    actions: Mapping,
    x: int,
    objective: bool = False,
) -> Optional[float]:
    """Court's decision statistic after a failure on ``x``; ``None`` off path.

    Subjective courts use P(unbiased | act, failure, x); objective courts use
    the probability the act was taken on an efficient signal pair.
    """
    num = 0.0
    den = 0.0
    for omega in AgentType:
        for y in SIGNALS:
            mass = pop.prior(omega) * env.joint(x, y, -1) * actions[(omega, x, y)]
            den += mass
            if objective:
                num += mass if posterior(env, (x, y)) >= 0.5 else 0.0
            elif omega is AgentType.UNBIASED:
                num += mass
    if den <= 0.0:
        return None
    return num / den


def audit_profile(
    env: InformationEnvironment,
    pop: PopulationModel,
    actions: Mapping,
    punishment: Mapping[int, float],
    caps: Mapping[int, float],
    reported_belief: Optional[Mapping[int, float]] = None,
    *,
    court_optimal: bool = True,
    objective: bool = False,
    tol: float = AUDIT_TOL,
) -> AuditResult:
    """Check probabilities, agent best responses, Bayes consistency and the court."""
    out: List[Violation] = []
    for key, a in actions.items():
        if not (-tol <= a <= 1.0 + tol):
            out.append(Violation("probability-range", abs(a), key))
    for x in SIGNALS:
        fine = punishment[x]
        cap = caps[x]
        if fine < -tol or (math.isfinite(cap) and fine > cap + tol):
            out.append(Violation("fine-range", fine, (x,)))
        for omega in AgentType:
            for y in SIGNALS:
                gain = acting_payoff(omega, posterior(env, (x, y)), fine)
                a = actions[(omega, x, y)]
                scale = 1.0 + (fine if math.isfinite(fine) else 0.0)
                if gain > tol * scale and a < 1.0 - tol:
                    out.append(Violation("agent-best-response", gain * (1.0 - a), (omega.value, x, y)))
                elif gain < -tol * scale and a > tol:
                    out.append(Violation("agent-best-response", -gain * a, (omega.value, x, y)))
        stat = court_statistic(env, pop, actions, x, objective)
        if stat is None:
            continue
        if reported_belief is not None and abs(reported_belief[x] - stat) > tol:
            out.append(Violation("bayes-consistency", abs(reported_belief[x] - stat), (x,)))
        if not court_optimal:
            continue
        if stat < pop.gamma_bar - tol and fine < cap - tol:
            out.append(Violation("court-optimality", cap - fine, (x,)))
        if stat > pop.gamma_bar + tol and fine > tol:
            out.append(Violation("court-optimality", fine, (x,)))
    return AuditResult(out)


def audit_solution(env: InformationEnvironment, pop: PopulationModel, solution, tol: float = AUDIT_TOL) -> AuditResult:
    """Audit an :class:`~liability.equilibrium.EquilibriumSolution`.

    Under commitment the principal is not sequentially rational, so the court
    optimality check is skipped there.
    """
    return audit_profile(
        env,
        pop,
        solution.profile.action_prob,
        solution.profile.punishment,
        solution.caps,
        solution.court_belief,
        court_optimal=solution.mode != "commitment",
        objective=solution.mode == "objective",
        tol=tol,
    )


def inaction_belief(env: InformationEnvironment, pop: PopulationModel, actions: Mapping, x: int, theta: int) -> float:
    """P(unbiased | no action, x, theta); the prior when nobody abstains."""
    unbiased = 0.0
    total = 0.0
    for omega in AgentType:
        for y in SIGNALS:
            mass = pop.prior(omega) * env.joint(x, y, theta) * (1.0 - actions[(omega, x, y)])
            total += mass
            if omega is AgentType.UNBIASED:
                unbiased += mass
    if total <= 0.0:
        return pop.gamma
    return unbiased / total
