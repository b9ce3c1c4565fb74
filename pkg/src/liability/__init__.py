"""Optimal liability when evidence is partly verifiable.

Designer-optimal equilibria of a game in which a biased or unbiased agent
acts on verifiable and unverifiable signals and a court punishes failures.
"""

from .model import (
    SIGNALS,
    AgentType,
    CaseError,
    CaseLabel,
    EmptyRegionError,
    InformationEnvironment,
    ModelError,
    PopulationModel,
    SignalPair,
    case_region_bounds,
    classify_case,
    critical_px,
    critical_py,
    delta,
    posterior,
    posteriors,
)
from .equilibrium import (
    EquilibriumSolution,
    Mixing,
    Regime,
    StrategyProfile,
    candidate_equilibria,
    cutoff_belief,
    eta_b,
    eta_u,
    fine_b,
    fine_u,
    solve_optimal,
    welfare,
)
from .audit import AuditResult, audit_solution

__all__ = [
    "SIGNALS",
    "AgentType",
    "AuditResult",
    "CaseError",
    "CaseLabel",
    "EmptyRegionError",
    "EquilibriumSolution",
    "InformationEnvironment",
    "Mixing",
    "ModelError",
    "PopulationModel",
    "Regime",
    "SignalPair",
    "StrategyProfile",
    "audit_solution",
    "candidate_equilibria",
    "case_region_bounds",
    "classify_case",
    "critical_px",
    "critical_py",
    "cutoff_belief",
    "delta",
    "eta_b",
    "eta_u",
    "fine_b",
    "fine_u",
    "posterior",
    "posteriors",
    "solve_optimal",
    "welfare",
]
