"""Brute-force and sampling checks of the closed-form solver.

The brute force works on one verifiable realization at a time: it walks a
grid of punishment caps, lets the court pick either no punishment or the
cap, computes every agent best response directly from payoffs, enumerates
mixing only where an agent is exactly indifferent, and admits a profile only
if the court's choice is optimal against its Bayes belief.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .audit import Violation, audit_solution
from .equilibrium import (
    EquilibriumSolution,
    Regime,
    StrategyProfile,
    candidate_equilibria,
    solve,
    solve_optimal,
)
from .model import (
    SIGNALS,
    AgentType,
    CaseLabel,
    InformationEnvironment,
    ModelError,
    PopulationModel,
    classify_case,
    delta,
    is_interior_either_positive,
    posterior,
)

U = AgentType.UNBIASED
B = AgentType.BIASED

THREADS_ENV = "LIABILITY_THREADS"


class BudgetExceeded(ModelError):
    """The requested grid would enumerate too many profiles."""


@dataclass(frozen=True)
class OracleConfig:
    fine_grid_step: float = 0.01
    mix_grid_step: float = 1e-4
    fine_max: Optional[float] = None  # default: largest relevant critical fine + 2
    mc_samples: int = 1_000_000
    seed: int = 0
    include_grid: bool = True  # False keeps only 0 and the critical fines
    max_profiles: int = 20_000_000
    joint_mix_limit: int = 1_000_000  # per (cap, fine) when several pairs mix
    court_tol: float = 1e-12
    indifference_tol: float = 1e-9

    def __post_init__(self) -> None:
        if not (self.fine_grid_step > 0 and self.mix_grid_step > 0):
            raise ModelError("grid steps must be positive")
        if self.mc_samples <= 0:
            raise ModelError("mc_samples must be positive")

    @property
    def welfare_tolerance(self) -> float:
        return 10.0 * self.mix_grid_step


@dataclass(frozen=True)
class SliceData:
    """What the oracle needs about one verifiable realization.

    ``weight_*`` are P(x, y, theta) for the two states, in any common scale.
    """

    posterior_hi: float
    posterior_lo: float
    good: Tuple[float, float]  # P(x, y, theta=1) for y = 1, -1
    bad: Tuple[float, float]  # P(x, y, theta=-1) for y = 1, -1

    @classmethod
    def from_env(cls, env: InformationEnvironment, x: int) -> "SliceData":
        return cls(
            posterior(env, (x, 1)),
            posterior(env, (x, -1)),
            (env.joint(x, 1, 1), env.joint(x, -1, 1)),
            (env.joint(x, 1, -1), env.joint(x, -1, -1)),
        )

    @classmethod
    def from_posterior(cls, x: float, p_y: float) -> "SliceData":
        good = (x * p_y, x * (1 - p_y))
        bad = ((1 - x) * (1 - p_y), (1 - x) * p_y)
        return cls(good[0] / (good[0] + bad[0]), good[1] / (good[1] + bad[1]), good, bad)


@dataclass(frozen=True)
class SliceOptimum:
    welfare: float
    cap: float
    fine: float
    actions: Dict[Tuple[AgentType, int], float]
    belief: Optional[float]


def _critical_fines(sd: SliceData) -> Tuple[List[float], float]:
    """Critical fines of a slice and the default top of the cap grid.

    The grid runs to the largest fine that matters on the slice plus 2:
    the deterring fine on the low posterior when the high one is efficient,
    the fine deterring everybody otherwise.  The all-deterring fine is always
    added as a single point.
    """
    deter_low = 1.0 / (1.0 - sd.posterior_lo)
    deter_all = 1.0 / (1.0 - sd.posterior_hi)
    points = [deter_low, deter_all]
    if sd.posterior_lo >= 0.5:
        return points, 2.0
    if sd.posterior_hi >= 0.5:
        chill = (2.0 * sd.posterior_hi - 1.0) / (1.0 - sd.posterior_hi)
        return points + [chill], max(deter_low, chill) + 2.0
    return points, deter_all + 2.0


def _gain(omega: AgentType, belief: float, fine: float) -> float:
    lose = 1.0 - belief
    return (belief - lose if omega is U else 1.0) - lose * fine


def brute_force_slice(
    sd: SliceData,
    pop: PopulationModel,
    cfg: OracleConfig,
    mode: str = "subjective",
) -> SliceOptimum:
    """Best admissible profile on one slice."""
    if mode not in ("subjective", "objective", "commitment"):
        raise ModelError(f"the oracle does not support mode {mode!r}")
    crit, default_max = _critical_fines(sd)
    fine_max = cfg.fine_max if cfg.fine_max is not None else default_max
    caps = {0.0, *crit}
    if cfg.include_grid:
        caps.update(np.arange(cfg.fine_grid_step, fine_max + 1e-12, cfg.fine_grid_step).tolist())
    mix = np.linspace(0.0, 1.0, int(round(1.0 / cfg.mix_grid_step)) + 1)
    g = pop.gamma
    post = {1: sd.posterior_hi, -1: sd.posterior_lo}
    pairs = [(U, 1), (U, -1), (B, 1), (B, -1)]
    prior = {U: g, B: 1.0 - g}
    efficient = {y: post[y] >= 0.5 for y in SIGNALS}
    value = {y: sd.good[0 if y == 1 else 1] - sd.bad[0 if y == 1 else 1] for y in SIGNALS}
    fail = {y: sd.bad[0 if y == 1 else 1] for y in SIGNALS}

    best: Optional[SliceOptimum] = None
    work = 0
    for cap in sorted(caps):
        fines = (0.0, cap) if cap > 0.0 else (0.0,)
        for fine in fines:
            fixed = {}
            free = []
            for omega, y in pairs:
                gain = _gain(omega, post[y], fine)
                if abs(gain) <= cfg.indifference_tol * (1.0 + fine):
                    free.append((omega, y))
                else:
                    fixed[(omega, y)] = 1.0 if gain > 0 else 0.0
            axis = mix
            if len(free) > 1 and len(mix) ** len(free) > cfg.joint_mix_limit:
                # Several indifferent pairs only occur on knife edges; a
                # coarser joint grid keeps the enumeration bounded there.
                per_axis = int(cfg.joint_mix_limit ** (1.0 / len(free)))
                axis = np.linspace(0.0, 1.0, per_axis)
            n = len(axis) ** len(free)
            work += n
            if work > cfg.max_profiles:
                raise BudgetExceeded(f"more than {cfg.max_profiles} profiles")
            grids = np.meshgrid(*([axis] * len(free)), indexing="ij") if free else []
            cols = {}
            for k, key in enumerate(free):
                cols[key] = grids[k].ravel()
            size = n
            acts = {key: cols.get(key, np.full(size, fixed.get(key, 0.0))) for key in pairs}
            num = np.zeros(size)
            den = np.zeros(size)
            for omega, y in pairs:
                mass = prior[omega] * fail[y] * acts[(omega, y)]
                den += mass
                if (mode == "objective" and efficient[y]) or (mode != "objective" and omega is U):
                    num += mass
            on_path = den > 0.0
            stat = np.where(on_path, num / np.where(on_path, den, 1.0), pop.gamma_bar)
            if mode == "commitment":
                ok = np.ones(size, dtype=bool)
            else:
                ok = np.ones(size, dtype=bool)
                if fine < cap:
                    ok &= ~(stat < pop.gamma_bar - cfg.court_tol)
                if fine > 0.0:
                    ok &= ~(stat > pop.gamma_bar + cfg.court_tol)
            if not ok.any():
                continue
            welfare = np.zeros(size)
            for omega, y in pairs:
                welfare += prior[omega] * value[y] * acts[(omega, y)]
            welfare = np.where(ok, welfare, -np.inf)
            i = int(np.argmax(welfare))
            w = float(welfare[i])
            if best is None or w > best.welfare + 1e-15:
                chosen = {key: float(acts[key][i]) for key in pairs}
                belief = float(stat[i]) if on_path[i] else None
                best = SliceOptimum(w, cap, fine, chosen, belief)
    assert best is not None  # the free pass at cap 0 is always admissible
    return best


@dataclass
class AuditReport:
    env: InformationEnvironment
    pop: PopulationModel
    best_welfare: float
    best_solution: EquilibriumSolution
    solver_welfare: float
    tolerance: float
    violations: List[Violation] = field(default_factory=list)

    @property
    def agreement(self) -> bool:
        return abs(self.best_welfare - self.solver_welfare) <= self.tolerance

    CSV_COLUMNS = (
        "beta", "p_x", "p_y", "gamma", "gamma_bar", "regime",
        "oracle_welfare", "solver_welfare", "agreement", "violations",
    )

    def row(self) -> Dict[str, str]:
        return {
            "beta": f"{self.env.beta:.12g}",
            "p_x": f"{self.env.p_x:.12g}",
            "p_y": f"{self.env.p_y:.12g}",
            "gamma": f"{self.pop.gamma:.12g}",
            "gamma_bar": f"{self.pop.gamma_bar:.12g}",
            "regime": self.best_solution.regime.value,
            "oracle_welfare": f"{self.best_welfare:.12g}",
            "solver_welfare": f"{self.solver_welfare:.12g}",
            "agreement": str(self.agreement).lower(),
            "violations": str(len(self.violations)),
        }


def write_audit_csv(reports: Sequence[AuditReport], handle=None) -> str:
    buf = handle if handle is not None else io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=AuditReport.CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.row())
    return buf.getvalue() if handle is None else ""


def _regime_for(env: InformationEnvironment, cap: float) -> Regime:
    if classify_case(env) is not CaseLabel.EITHER_POSITIVE:
        return Regime.CASE_SPECIFIC
    if cap == 0.0:
        return Regime.FREE_PASS
    hi, lo = posterior(env, (-1, 1)), posterior(env, (-1, -1))
    if math.isclose(cap, 1.0 / (1.0 - lo), rel_tol=1e-12):
        return Regime.DETER_AT_FB
    if math.isclose(cap, (2 * hi - 1) / (1 - hi), rel_tol=1e-12):
        return Regime.DETER_AT_FU
    return Regime.CASE_SPECIFIC


def brute_force_optimum(
    env: InformationEnvironment,
    pop: PopulationModel,
    cfg: OracleConfig = OracleConfig(),
    mode: str = "subjective",
) -> AuditReport:
    """Grid-search optimum compared with the closed-form solver."""
    slices = {x: brute_force_slice(SliceData.from_env(env, x), pop, cfg, mode) for x in SIGNALS}
    actions = {(omega, x, y): slices[x].actions[(omega, y)] for x in SIGNALS for omega in AgentType for y in SIGNALS}
    caps = {x: slices[x].cap for x in SIGNALS}
    solution = EquilibriumSolution(
        f_bar=max(caps.values()),
        profile=StrategyProfile(actions, {x: slices[x].fine for x in SIGNALS}),
        court_belief={x: pop.gamma_bar if slices[x].belief is None else slices[x].belief for x in SIGNALS},
        welfare=sum(s.welfare for s in slices.values()),
        regime=_regime_for(env, caps[-1]),
        caps=caps,
        case=classify_case(env),
        mode=mode,
        supported=pop.supported,
    )
    violations = audit_solution(env, pop, solution).violations
    # Every admissible profile is searched, including off-path deterrence.
    reference = solve(env, pop, mode, off_path_deterrence=True).welfare
    return AuditReport(env, pop, solution.welfare, solution, reference,
                       cfg.welfare_tolerance, violations)


def monte_carlo_welfare(
    env: InformationEnvironment,
    pop: PopulationModel,
    profile: StrategyProfile,
    cfg: OracleConfig = OracleConfig(),
) -> Tuple[float, float]:
    """Sample mean of ``a^omega(x, y) * theta`` and its standard error."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.mc_samples
    unbiased = rng.random(n) < pop.gamma
    theta = np.where(rng.random(n) < env.beta, 1, -1)
    x = np.where(rng.random(n) < env.p_x, theta, -theta)
    y = np.where(rng.random(n) < env.p_y, theta, -theta)
    act = np.zeros(n)
    for omega, mask_type in ((U, unbiased), (B, ~unbiased)):
        for xv in SIGNALS:
            for yv in SIGNALS:
                mask = mask_type & (x == xv) & (y == yv)
                act[mask] = profile.act(omega, xv, yv)
    sample = act * theta
    return float(sample.mean()), float(sample.std(ddof=1) / math.sqrt(n))


# ---------------------------------------------------------------------------
# Property sweeps


def random_environment(rng: np.random.Generator, either_positive: bool = True) -> InformationEnvironment:
    """Random environment; interior x+y>=0 by rejection when requested."""
    while True:
        env = InformationEnvironment(
            float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.51, 0.99)), float(rng.uniform(0.51, 0.99))
        )
        if not either_positive or is_interior_either_positive(env):
            return env


def random_population(rng: np.random.Generator) -> PopulationModel:
    gamma_bar = float(rng.uniform(0.05, 0.9))
    gamma = float(rng.uniform(gamma_bar + 0.01, 0.99)) if gamma_bar < 0.98 else 0.99
    return PopulationModel(gamma, gamma_bar)


@dataclass(frozen=True)
class PropertyReport:
    prop: str
    trials: int
    failures: int
    counterexample: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _check_delta_monotone(rng):
    env = InformationEnvironment(float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.51, 0.98)), float(rng.uniform(0.51, 0.98)))
    eps = 1e-4
    d = delta(env)
    ok = delta(env.with_(p_x=env.p_x + eps)) > d and delta(env.with_(p_y=env.p_y + eps)) < d
    return ok, env


def _check_py_welfare(rng):
    pop = random_population(rng)
    env = InformationEnvironment(float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.51, 0.99)), float(rng.uniform(0.51, 0.98)))
    higher = env.with_(p_y=float(rng.uniform(env.p_y, 0.99)))
    ok = solve_optimal(higher, pop).welfare >= solve_optimal(env, pop).welfare - 1e-9
    return ok, (env, higher.p_y, pop)


def _check_subjective_objective(rng):
    env, pop = random_environment(rng), random_population(rng)
    return solve(env, pop, "subjective").welfare >= solve(env, pop, "objective").welfare - 1e-10, (env, pop)


def _check_variant_order(rng):
    env, pop = random_environment(rng), random_population(rng)
    base = solve(env, pop, "subjective").welfare
    commit = solve(env, pop, "commitment").welfare
    expost = solve(env, pop, "expost").welfare
    ok = commit >= base - 1e-12 and base >= expost - 1e-12
    if delta(env) < 0:
        ok = ok and abs(base - expost) <= 1e-12
    return ok, (env, pop)


def _check_inaction(rng):
    from .variants import verify_no_inaction_punishment

    env, pop = random_environment(rng), random_population(rng)
    return all(verify_no_inaction_punishment(env, pop, c) for c in candidate_equilibria(env, pop)), (env, pop)


def _check_ktype(rng):
    from .variants import TypeSpectrum, ktype_critical_fines

    k = int(rng.integers(2, 7))
    inner = np.sort(rng.uniform(0.0, 1.0, k - 2))
    lam = (0.0, *inner.tolist(), 1.0)
    weights = rng.dirichlet(np.ones(k))
    spectrum = TypeSpectrum(lam, tuple(weights.tolist()))
    env = InformationEnvironment(float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.51, 0.98)), float(rng.uniform(0.51, 0.98)))
    base = ktype_critical_fines(env, spectrum, float(rng.uniform(0.0, 3.0)))
    k_hi = base.k_act_high if base.k_act_high is not None else 0
    k_lo = base.k_act_low if base.k_act_low is not None else 0

    def diff(e):
        f = ktype_critical_fines(e, spectrum, 0.0)
        return f.fines_low[k_lo] - f.fines_high[k_hi]

    eps = 1e-4
    d = diff(env)
    ok = diff(env.with_(p_x=env.p_x + eps)) > d and diff(env.with_(p_y=env.p_y + eps)) < d
    return ok, (env, spectrum)


def random_spread_pair(rng: np.random.Generator):
    """Mean-matched pair ``(more, less)`` spread around 1/2.

    The less spread distribution contracts the pieces below and above 1/2
    towards 1/2 with side-specific factors chosen so the mean is unchanged.
    """
    from .continuum import PosteriorDistribution

    while True:
        k = int(rng.integers(1, 4))
        low_edges = np.sort(rng.uniform(0.0, 0.5, 2 * k))
        high_edges = np.sort(rng.uniform(0.5, 1.0, 2 * k))
        low = [(low_edges[2 * i], low_edges[2 * i + 1]) for i in range(k)]
        high = [(high_edges[2 * i], high_edges[2 * i + 1]) for i in range(k)]
        masses = rng.dirichlet(np.ones(2 * k))
        w_low, w_high = masses[:k], masses[k:]
        pull_low = sum(w * (0.5 - 0.5 * (a + b)) for w, (a, b) in zip(w_low, low))
        pull_high = sum(w * (0.5 * (a + b) - 0.5) for w, (a, b) in zip(w_high, high))
        s_low = float(rng.uniform(0.0, 1.0))
        s_high = 1.0 - (1.0 - s_low) * pull_low / pull_high
        if not 0.0 <= s_high <= 1.0:
            continue

        def shrink(seg, s):
            return 0.5 + s * (seg[0] - 0.5), 0.5 + s * (seg[1] - 0.5)

        more = PosteriorDistribution.from_pieces(
            [(a, b, m) for (a, b), m in zip(low + high, masses)]
        )
        less = PosteriorDistribution.from_pieces(
            [(*shrink(seg, s_low), m) for seg, m in zip(low, w_low)]
            + [(*shrink(seg, s_high), m) for seg, m in zip(high, w_high)]
        )
        return more, less


def _check_spread_pi(rng):
    from .continuum import welfare_functional

    more, less = random_spread_pair(rng)
    mu_u = float(rng.uniform(0.5 + 1e-6, 1.0))
    gamma = float(rng.uniform(0.0, 1.0))
    ok = welfare_functional(more, mu_u, gamma) >= welfare_functional(less, mu_u, gamma) - 1e-10
    return ok, (more.serialize(), less.serialize(), mu_u, gamma)


def _check_oracle(rng):
    env, pop = random_environment(rng), random_population(rng)
    rep = brute_force_optimum(env, pop, OracleConfig())
    return rep.agreement and not rep.violations, (env, pop, rep.best_welfare, rep.solver_welfare)


PROPERTIES: Dict[str, Callable] = {
    "delta-monotone": _check_delta_monotone,
    "py-welfare-monotone": _check_py_welfare,
    "subjective-dominates-objective": _check_subjective_objective,
    "variant-ordering": _check_variant_order,
    "inaction-robust": _check_inaction,
    "ktype-monotone": _check_ktype,
    "spread-pi-order": _check_spread_pi,
    "oracle-agreement": _check_oracle,
}


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ModelError(f"{THREADS_ENV}={raw!r} is not an integer") from None


def property_sweep(prop: str, trials: int, seed: int = 0, workers: Optional[int] = None) -> PropertyReport:
    """Run a registered property on ``trials`` independently seeded draws.

    Trial ``i`` uses ``default_rng([seed, i])`` so results do not depend on
    the number of worker threads.
    """
    if prop not in PROPERTIES:
        raise ModelError(f"unknown property {prop!r}; known: {', '.join(sorted(PROPERTIES))}")
    check = PROPERTIES[prop]

    def run(i):
        return check(np.random.default_rng([seed, i]))

    workers = workers or thread_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(i) for i in range(trials)]
    failed = [w for ok, w in results if not ok]
    return PropertyReport(prop, trials, len(failed), repr(failed[0]) if failed else None)
