"""Designer-optimal equilibria of the liability game with binary signals.

The court conditions on the verifiable realization ``x``, so the game splits
into two independent *slices*, one per ``x``.  On each slice the agent sees a
high posterior (``y = 1``) and a low posterior (``y = -1``).  A slice is

* efficient on both posteriors: everybody acts and nobody is punished;
* efficient on neither: a fine deterring the biased type on the high
  posterior stops all action;
* mixed (high efficient, low inefficient): the deterrence/chilling trade-off
  governed by the chilling fine ``F^u`` and the deterring fine ``F^b``.

Acting is x+y>=0 efficient when only the ``x = -1`` slice is mixed, which is
the configuration most of the API is phrased in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple

from .model import (
    SIGNALS,
    AgentType,
    CaseError,
    CaseLabel,
    InformationEnvironment,
    ModelError,
    PopulationModel,
    classify_case,
    is_efficient,
    posterior,
)

U = AgentType.UNBIASED
B = AgentType.BIASED

KNIFE_EDGE_TOL = 1e-10
WELFARE_TIE_TOL = 1e-12

MODES = ("subjective", "objective", "commitment", "expost")


class Regime(str, Enum):
    FREE_PASS = "free_pass"
    DETER_AT_FB = "deter_at_fb"
    DETER_AT_FU = "deter_at_fu"
    CASE_SPECIFIC = "case_specific"


class Mixing(NamedTuple):
    """Indifference mixing probability, clamped to [0, 1]."""

    value: float
    raw: float

    @property
    def feasible(self) -> bool:
        return self.raw <= 1.0


@dataclass(frozen=True)
class StrategyProfile:
    """Action probabilities ``a^omega(x, y)`` and court punishments ``F(x)``."""

    action_prob: Mapping[Tuple[AgentType, int, int], float]
    punishment: Mapping[int, float]

    def act(self, omega: AgentType, x: int, y: int) -> float:
        return self.action_prob[(omega, x, y)]

    @classmethod
    def constant(cls, prob: float, fine: float = 0.0) -> "StrategyProfile":
        actions = {(w, x, y): prob for w in AgentType for x in SIGNALS for y in SIGNALS}
        return cls(actions, {x: fine for x in SIGNALS})


@dataclass(frozen=True)
class EquilibriumSolution:
    """A strategy profile together with the punishment caps that support it.

    ``caps`` holds the maximum punishment per verifiable realization.  In the
    x+y>=0 case the ``x = 1`` slice never punishes, so a single cap
    ``f_bar`` serves both slices; in the other cases the caps may differ.
    """

    f_bar: float
    profile: StrategyProfile
    court_belief: Mapping[int, float]
    welfare: float
    regime: Regime
    caps: Mapping[int, float]
    case: CaseLabel
    mode: str = "subjective"
    slice_regimes: Mapping[int, str] = field(default_factory=dict)
    knife_edge: bool = False
    supported: bool = True

    def mixing(self) -> Dict[str, float]:
        """The two probabilities the tables mix on."""
        return {
            "a_u_-1_1": self.profile.act(U, -1, 1),
            "a_b_-1_-1": self.profile.act(B, -1, -1),
        }


def cutoff_belief(omega: AgentType, fine: float) -> float:
    """Posterior above which type ``omega`` strictly prefers to act."""
    if not fine >= 0.0:
        raise ModelError(f"fine must be non-negative, got {fine!r}")
    if math.isinf(fine):
        return 1.0
    if AgentType(omega) is U:
        return (fine + 1.0) / (fine + 2.0)
    if fine <= 1.0:
        return 0.0
    return (fine - 1.0) / fine


def unbiased_fine(belief: float) -> float:
    """Largest fine at which the unbiased type still acts on ``belief``."""
    return (2.0 * belief - 1.0) / (1.0 - belief)


def biased_fine(belief: float) -> float:
    """Smallest fine deterring the biased type from acting on ``belief``."""
    return 1.0 / (1.0 - belief)


def fine_u(env: InformationEnvironment) -> float:
    belief = posterior(env, (-1, 1))
    if not is_efficient(belief):
        raise CaseError("acting on (-1, 1) is inefficient; F^u is undefined")
    return unbiased_fine(belief)


def fine_b(env: InformationEnvironment) -> float:
    belief = posterior(env, (-1, -1))
    if is_efficient(belief):
        raise CaseError("acting on (-1, -1) is efficient; F^b is undefined")
    return biased_fine(belief)


def _eta_b(pop: PopulationModel, fail_hi: float, fail_lo: float) -> Mixing:
    raw = fail_hi * (pop.gamma - pop.gamma_bar) / (pop.gamma_bar * (1.0 - pop.gamma) * fail_lo)
    return Mixing(min(max(raw, 0.0), 1.0), raw)


def eta_b(pop: PopulationModel, env: InformationEnvironment) -> Mixing:
    """Biased mixing on (-1,-1) that leaves the court indifferent when both types act on (-1,1)."""
    return _eta_b(pop, 1.0 - env.p_y, env.p_y)


def eta_u(pop: PopulationModel) -> Mixing:
    """Unbiased mixing on (-1,1) that leaves the court indifferent when the biased type is deterred on (-1,-1)."""
    raw = pop.gamma_bar * (1.0 - pop.gamma) / (pop.gamma * (1.0 - pop.gamma_bar))
    return Mixing(min(max(raw, 0.0), 1.0), raw)


def welfare(env: InformationEnvironment, pop: PopulationModel, profile: StrategyProfile) -> float:
    """Designer's ex-ante payoff E[a^omega(x, y) * theta]."""
    total = 0.0
    for omega in AgentType:
        for x in SIGNALS:
            for y in SIGNALS:
                a = profile.act(omega, x, y)
                for theta in SIGNALS:
                    total += pop.prior(omega) * env.joint(x, y, theta) * a * theta
    return total


# ---------------------------------------------------------------------------
# Slice machinery


@dataclass(frozen=True)
class Slice:
    """One verifiable realization with a binary unverifiable signal on top.

    ``v_*`` are welfare weights P(x, y) (2 posterior - 1) and ``fail_*`` are
    the court's likelihoods P(y | theta = -1, x).
    """

    x: float
    hi: float
    lo: float
    v_hi: float
    v_lo: float
    fail_hi: float
    fail_lo: float

    @classmethod
    def from_env(cls, env: InformationEnvironment, x: int) -> "Slice":
        return cls(
            x=x,
            hi=posterior(env, (x, 1)),
            lo=posterior(env, (x, -1)),
            v_hi=env.value(x, 1),
            v_lo=env.value(x, -1),
            fail_hi=1.0 - env.p_y,
            fail_lo=env.p_y,
        )

    @property
    def kind(self) -> str:
        if is_efficient(self.lo):
            return "efficient"
        if not is_efficient(self.hi):
            return "inefficient"
        return "mixed"


@dataclass(frozen=True)
class SliceOutcome:
    regime: str
    cap: float
    fine: float
    actions: Mapping[Tuple[AgentType, int], float]  # (omega, y) -> prob
    welfare: float

    @property
    def mixed(self) -> int:
        return sum(1 for a in self.actions.values() if 0.0 < a < 1.0)


def _acts(u_hi: float, u_lo: float, b_hi: float, b_lo: float) -> Dict[Tuple[AgentType, int], float]:
    return {(U, 1): u_hi, (U, -1): u_lo, (B, 1): b_hi, (B, -1): b_lo}


def slice_welfare(sl: Slice, pop: PopulationModel, actions: Mapping) -> float:
    g = pop.gamma
    return g * (actions[(U, 1)] * sl.v_hi + actions[(U, -1)] * sl.v_lo) + (1.0 - g) * (
        actions[(B, 1)] * sl.v_hi + actions[(B, -1)] * sl.v_lo
    )


def slice_court_belief(sl: Slice, pop: PopulationModel, actions: Mapping) -> Optional[float]:
    """P(unbiased | act, failure, x); ``None`` when nobody acts on the slice."""
    unbiased = pop.gamma * (actions[(U, 1)] * sl.fail_hi + actions[(U, -1)] * sl.fail_lo)
    biased = (1.0 - pop.gamma) * (actions[(B, 1)] * sl.fail_hi + actions[(B, -1)] * sl.fail_lo)
    if unbiased + biased <= 0.0:
        return None
    return unbiased / (unbiased + biased)


def slice_objective_statistic(sl: Slice, pop: PopulationModel, actions: Mapping) -> Optional[float]:
    """P(acted on an efficient posterior | act, failure, x); ``None`` off path."""
    g = pop.gamma
    weight = {}
    for y, fail in ((1, sl.fail_hi), (-1, sl.fail_lo)):
        weight[y] = fail * (g * actions[(U, y)] + (1.0 - g) * actions[(B, y)])
    total = weight[1] + weight[-1]
    if total <= 0.0:
        return None
    good = (weight[1] if is_efficient(sl.hi) else 0.0) + (weight[-1] if is_efficient(sl.lo) else 0.0)
    return good / total


def eta_1(pop: PopulationModel, p_y: float) -> Mixing:
    """Objective court: biased mixing on (-1,-1) when only he acts on (-1,1)."""
    return _eta_objective(pop, 1.0 - p_y, p_y, 1.0)


def eta_2(pop: PopulationModel, p_y: float) -> Mixing:
    """Objective court: biased mixing on (-1,-1) when both types act on (-1,1)."""
    return _eta_objective(pop, 1.0 - p_y, p_y, 1.0 - pop.gamma)


def _eta_objective(pop: PopulationModel, fail_hi: float, fail_lo: float, scale: float) -> Mixing:
    raw = fail_hi / fail_lo * (1.0 - pop.gamma_bar) / pop.gamma_bar / scale
    return Mixing(min(max(raw, 0.0), 1.0), raw)


def _outcome(sl, pop, regime, cap, fine, acts) -> SliceOutcome:
    return SliceOutcome(regime, cap, fine, acts, slice_welfare(sl, pop, acts))


def slice_candidates(
    sl: Slice, pop: PopulationModel, mode: str = "subjective", off_path_deterrence: bool = False
) -> List[SliceOutcome]:
    """Equilibrium outcomes on one slice among which the designer picks.

    ``off_path_deterrence`` adds, on mixed slices, the profile in which a fine
    deterring the biased type on the high posterior stops all action and the
    court's off-path belief justifies it.  It never helps a subjective court
    but can beat the indifference mixings of an objective one.
    """
    if mode not in MODES:
        raise ModelError(f"unknown mode {mode!r}")
    unbounded = mode == "expost"
    if sl.kind == "efficient":
        return [_outcome(sl, pop, "first_best", 0.0, 0.0, _acts(1, 1, 1, 1))]
    if sl.kind == "inefficient":
        fine = biased_fine(sl.hi)
        cap = math.inf if unbounded else fine
        return [_outcome(sl, pop, "deter_all", cap, fine, _acts(0, 0, 0, 0))]

    fu = unbiased_fine(sl.hi)
    fb = biased_fine(sl.lo)
    knife = abs(fu - fb) <= KNIFE_EDGE_TOL
    fb_above = fb > fu or knife
    fu_above = fu > fb or knife
    free = _outcome(sl, pop, "free_pass", math.inf if unbounded else 0.0, 0.0, _acts(1, 0, 1, 1))
    out: List[SliceOutcome] = []
    if off_path_deterrence and not unbounded:
        fine = biased_fine(sl.hi)
        out.append(_outcome(sl, pop, "deter_all", fine, fine, _acts(0, 0, 0, 0)))

    if mode == "commitment":
        if fb_above:
            out += [free, _outcome(sl, pop, "deter_at_fb", fb, fb, _acts(0, 0, 1, 0))]
        if fu_above:
            out.append(_outcome(sl, pop, "interim_efficient", fb, fb, _acts(1, 0, 1, 0)))
        return out

    if mode == "objective":
        if fb_above:
            out.append(free)
            e1 = _eta_objective(pop, sl.fail_hi, sl.fail_lo, 1.0)
            if e1.feasible:
                out.append(_outcome(sl, pop, "mix_at_fb", fb, fb, _acts(0, 0, 1, e1.value)))
        if fu_above:
            e2 = _eta_objective(pop, sl.fail_hi, sl.fail_lo, 1.0 - pop.gamma)
            if e2.feasible:
                out.append(_outcome(sl, pop, "mix_at_fb", fb, fb, _acts(1, 0, 1, e2.value)))
            elif not fb_above:
                out.append(free)
        return out

    eb = _eta_b(pop, sl.fail_hi, sl.fail_lo)
    cap_fb = math.inf if unbounded else fb
    cap_fu = math.inf if unbounded else fu
    if fb_above:
        if unbounded:
            # Nothing limits the fine, so punishing the lone biased actor on
            # the high posterior deters him there as well.
            out.append(_outcome(sl, pop, "full_deterrence", math.inf, biased_fine(sl.hi), _acts(0, 0, 0, 0)))
            if not eb.raw < 1.0:
                out.append(free)
        else:
            out += [free, _outcome(sl, pop, "deter_at_fb", fb, fb, _acts(0, 0, 1, 0))]
    if fu_above:
        if eb.feasible:
            out.append(_outcome(sl, pop, "mix_at_fb", cap_fb, fb, _acts(1, 0, 1, eb.value)))
        elif not fb_above:
            out.append(free)
        eu = eta_u(pop)
        out.append(_outcome(sl, pop, "mix_at_fu", cap_fu, fu, _acts(eu.value, 0, 1, 0)))
    return out


def best_outcome(candidates: List[SliceOutcome]) -> SliceOutcome:
    """Welfare-maximal outcome; ties go to the smaller cap, then fewer mixings."""
    top = max(c.welfare for c in candidates)
    tied = [c for c in candidates if c.welfare >= top - WELFARE_TIE_TOL]
    return min(tied, key=lambda c: (c.cap, c.mixed))


_REGIME_OF = {
    "free_pass": Regime.FREE_PASS,
    "deter_at_fb": Regime.DETER_AT_FB,
    "mix_at_fb": Regime.DETER_AT_FB,
    "interim_efficient": Regime.DETER_AT_FB,
    "full_deterrence": Regime.DETER_AT_FB,
    "mix_at_fu": Regime.DETER_AT_FU,
}


def assemble(
    env: InformationEnvironment,
    pop: PopulationModel,
    outcomes: Mapping[int, SliceOutcome],
    *,
    mode: str = "subjective",
    case: Optional[CaseLabel] = None,
    knife_edge: bool = False,
) -> EquilibriumSolution:
    """Glue per-slice outcomes into a full solution."""
    case = classify_case(env) if case is None else case
    actions = {}
    fines = {}
    beliefs = {}
    for x in SIGNALS:
        oc = outcomes[x]
        for (omega, y), a in oc.actions.items():
            actions[(omega, x, y)] = a
        fines[x] = oc.fine
        statistic = slice_objective_statistic if mode == "objective" else slice_court_belief
        belief = statistic(Slice.from_env(env, x), pop, oc.actions)
        beliefs[x] = pop.gamma_bar if belief is None else belief
    caps = {x: outcomes[x].cap for x in SIGNALS}
    finite_caps = [c for c in caps.values() if math.isfinite(c)]
    f_bar = max(finite_caps) if len(finite_caps) == len(caps) else max(fines.values())
    if case is CaseLabel.EITHER_POSITIVE:
        regime = _REGIME_OF.get(outcomes[-1].regime, Regime.CASE_SPECIFIC)
        # The x = 1 slice never punishes, so the x = -1 cap is the law's cap.
        caps = {x: outcomes[-1].cap for x in SIGNALS}
        f_bar = outcomes[-1].cap if math.isfinite(outcomes[-1].cap) else outcomes[-1].fine
    else:
        regime = Regime.CASE_SPECIFIC
    profile = StrategyProfile(actions, fines)
    return EquilibriumSolution(
        f_bar=f_bar,
        profile=profile,
        court_belief=beliefs,
        welfare=sum(outcomes[x].welfare for x in SIGNALS),
        regime=regime,
        caps=caps,
        case=case,
        mode=mode,
        slice_regimes={x: outcomes[x].regime for x in SIGNALS},
        knife_edge=knife_edge,
        supported=pop.supported,
    )


def _is_knife_edge(sl: Slice) -> bool:
    if sl.kind != "mixed":
        return False
    return abs(unbiased_fine(sl.hi) - biased_fine(sl.lo)) <= KNIFE_EDGE_TOL


def solve(
    env: InformationEnvironment,
    pop: PopulationModel,
    mode: str = "subjective",
    off_path_deterrence: bool = False,
) -> EquilibriumSolution:
    """Designer-optimal equilibrium under the given court/principal ``mode``."""
    slices = {x: Slice.from_env(env, x) for x in SIGNALS}
    outcomes = {
        x: best_outcome(slice_candidates(slices[x], pop, mode, off_path_deterrence)) for x in SIGNALS
    }
    knife = any(_is_knife_edge(sl) for sl in slices.values())
    return assemble(env, pop, outcomes, mode=mode, knife_edge=knife)


def _require_either_positive(env: InformationEnvironment) -> None:
    case = classify_case(env)
    if case is not CaseLabel.EITHER_POSITIVE:
        raise CaseError(f"operation needs the x+y>=0 case, environment is {case.value}")


def candidate_equilibria(
    env: InformationEnvironment, pop: PopulationModel, mode: str = "subjective"
) -> List[EquilibriumSolution]:
    """Every equilibrium the designer chooses among on the x = -1 slice, for an x+y>=0 environment."""
    _require_either_positive(env)
    pivotal = Slice.from_env(env, -1)
    upper = best_outcome(slice_candidates(Slice.from_env(env, 1), pop, mode))
    knife = _is_knife_edge(pivotal)
    return [
        assemble(env, pop, {1: upper, -1: oc}, mode=mode, case=CaseLabel.EITHER_POSITIVE, knife_edge=knife)
        for oc in slice_candidates(pivotal, pop, mode)
    ]


def solve_optimal(env: InformationEnvironment, pop: PopulationModel) -> EquilibriumSolution:
    """Designer-optimal equilibrium with a subjective (type-screening) court.

    Works in every efficiency case.  When acting is always (never) efficient
    the answer is the trivial free pass (full deterrence).  With
    ``gamma <= gamma_bar`` the same machinery runs but the result is flagged
    ``supported=False``.
    """
    return solve(env, pop, "subjective")


def free_pass_minus_deterrence(env: InformationEnvironment, pop: PopulationModel) -> float:
    """Closed-form welfare gap between the free pass and deterrence at ``F^b``.

    Only meaningful when ``F^b > F^u``; positive means the free pass wins.
    """
    b, px, py, g = env.beta, env.p_x, env.p_y, pop.gamma
    return g * (b * (1 - px) * py - (1 - b) * px * (1 - py)) + (1 - g) * (
        b * (1 - px) * (1 - py) - (1 - b) * px * py
    )
