"""Critical fines, court-indifference mixings and the designer-optimal solver."""

import math
from fractions import Fraction as Fr

import numpy as np
import pytest

import exact
from liability.audit import audit_solution
from liability.equilibrium import (
    Mixing,
    Regime,
    Slice,
    StrategyProfile,
    candidate_equilibria,
    cutoff_belief,
    eta_1,
    eta_2,
    eta_b,
    eta_u,
    fine_b,
    fine_u,
    free_pass_minus_deterrence,
    slice_candidates,
    solve,
    solve_optimal,
    welfare,
)
from liability.model import (
    AgentType,
    CaseError,
    CaseLabel,
    InformationEnvironment,
    ModelError,
    PopulationModel,
    critical_px,
    delta,
)
from liability.oracle import random_environment, random_population

U, B = AgentType.UNBIASED, AgentType.BIASED
BETA, PX, PY, GAMMA, GBAR = Fr(9, 13), Fr(3, 4), Fr(3, 4), Fr(11, 20), Fr(1, 2)
BENCH = InformationEnvironment(float(BETA), float(PX), float(PY))
POP = PopulationModel(float(GAMMA), float(GBAR))

# Exact welfare of the four x = -1 candidates at the benchmark parameters,
# frozen from rational enumeration (tests/exact.py).
FREE_PASS = Fr(1897, 4160)
DETER_ALL_NEGATIVE = Fr(395, 832)
MIX_BIASED = Fr(1061, 2080)
MIX_UNBIASED = Fr(211, 416)


def _to_exact(profile):
    return {(o.value, x, y): Fr(p).limit_denominator(10**9) for (o, x, y), p in profile.action_prob.items()}


class TestCutoffs:
    def test_unbiased_cutoff(self):
        assert cutoff_belief(U, 0.0) == 0.5
        assert cutoff_belief(U, 1.25) == pytest.approx(9 / 13, abs=1e-15)

    def test_biased_cutoff(self):
        assert cutoff_belief(B, 0.5) == 0.0
        assert cutoff_belief(B, 1.25) == pytest.approx(0.2, abs=1e-15)

    def test_infinite_fine(self):
        assert cutoff_belief(U, math.inf) == 1.0

    def test_negative_fine_rejected(self):
        with pytest.raises(ModelError):
            cutoff_belief(U, -0.1)


class TestCriticalFines:
    def test_benchmark_parameters(self):
        assert fine_u(BENCH) == pytest.approx(1.25, abs=1e-12)
        assert fine_b(BENCH) == pytest.approx(1.25, abs=1e-12)

    def test_difference_is_delta(self):
        env = BENCH.with_(p_x=0.8)
        assert fine_b(env) - fine_u(env) == pytest.approx(delta(env), abs=1e-12)
        assert fine_u(env) == pytest.approx(11 / 16, abs=1e-14)
        assert fine_b(env) == pytest.approx(19 / 16, abs=1e-14)

    def test_undefined_outside_premise(self):
        with pytest.raises(CaseError):
            fine_u(InformationEnvironment(0.1, 0.7, 0.6))
        with pytest.raises(CaseError):
            fine_b(InformationEnvironment(0.97, 0.6, 0.6))


class TestMixings:
    def test_eta_b_makes_court_indifferent(self):
        m = eta_b(POP, BENCH)
        assert m.value == pytest.approx(2 / 27, abs=1e-12)
        acts = exact.profile(u_m1_m1=0, b_m1_m1=Fr(2, 27))
        assert exact.court_belief(BETA, PX, PY, GAMMA, acts, -1) == GBAR

    def test_eta_u_makes_court_indifferent(self):
        m = eta_u(POP)
        assert m.value == pytest.approx(9 / 11, abs=1e-12)
        acts = exact.profile(u_m1_m1=0, u_m1_1=Fr(9, 11), b_m1_m1=0)
        assert exact.court_belief(BETA, PX, PY, GAMMA, acts, -1) == GBAR

    def test_objective_mixings(self):
        assert eta_1(POP, 0.75).value == pytest.approx(1 / 3, abs=1e-12)
        assert eta_2(POP, 0.75).value == pytest.approx(20 / 27, abs=1e-12)

    def test_infeasible_raw_is_kept(self):
        m = eta_b(PopulationModel(0.9, 0.1), BENCH)
        assert m.raw > 1.0 and m.value == 1.0 and not m.feasible
        assert Mixing(0.5, 0.5).feasible


class TestWelfare:
    def test_profile_welfare_matches_enumeration(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            probs = {(o, x, y): float(rng.uniform()) for o in AgentType for x in (1, -1) for y in (1, -1)}
            profile = StrategyProfile(probs, {1: 0.0, -1: 0.0})
            want = exact.welfare(BETA, PX, PY, GAMMA, {(o.value, x, y): Fr(p) for (o, x, y), p in probs.items()})
            assert welfare(BENCH, POP, profile) == pytest.approx(float(want), abs=1e-14)

    def test_constant_profile(self):
        everyone = StrategyProfile.constant(1.0)
        assert welfare(BENCH, POP, everyone) == pytest.approx(float(2 * BETA - 1), abs=1e-15)


class TestCandidates:
    def test_four_candidates_exact(self):
        got = {c.slice_regimes[-1]: c.welfare for c in candidate_equilibria(BENCH, POP)}
        assert got["free_pass"] == pytest.approx(float(FREE_PASS), abs=1e-12)
        assert got["deter_at_fb"] == pytest.approx(float(DETER_ALL_NEGATIVE), abs=1e-12)
        assert got["mix_at_fb"] == pytest.approx(float(MIX_BIASED), abs=1e-12)
        assert got["mix_at_fu"] == pytest.approx(float(MIX_UNBIASED), abs=1e-12)

    def test_candidate_profiles_match_enumeration(self):
        for cand in candidate_equilibria(BENCH, POP):
            want = exact.welfare(BETA, PX, PY, GAMMA, _to_exact(cand.profile))
            assert cand.welfare == pytest.approx(float(want), abs=1e-9)

    def test_every_candidate_passes_audit(self):
        for env in (BENCH.with_(p_x=0.74), BENCH, BENCH.with_(p_x=0.76)):
            for cand in candidate_equilibria(env, POP):
                assert audit_solution(env, POP, cand).ok, cand.slice_regimes

    def test_requires_either_positive(self):
        with pytest.raises(CaseError):
            candidate_equilibria(InformationEnvironment(0.5, 0.9, 0.6), POP)

    def test_unknown_mode(self):
        with pytest.raises(ModelError):
            slice_candidates(Slice.from_env(BENCH, -1), POP, "lenient")


class TestSolve:
    def test_benchmark_optimum(self):
        sol = solve_optimal(BENCH, POP)
        assert sol.welfare == pytest.approx(float(MIX_BIASED), abs=1e-12)
        assert sol.regime is Regime.DETER_AT_FB
        assert sol.knife_edge
        assert sol.mixing()["a_b_-1_-1"] == pytest.approx(2 / 27, abs=1e-12)
        assert sol.court_belief[-1] == pytest.approx(0.5, abs=1e-12)

    def test_downward_jump_at_critical_px(self):
        star = critical_px(9 / 13, 0.75)
        left = solve_optimal(BENCH.with_(p_x=star - 1e-6), POP)
        right = solve_optimal(BENCH.with_(p_x=star + 1e-6), POP)
        assert left.welfare - right.welfare > 0.02
        # Left of the threshold the biased type mixes; right of it the
        # unbiased type is chilled on (-1, 1) because deterrence costs F^b > F^u.
        assert left.slice_regimes[-1] == "mix_at_fb"
        assert right.slice_regimes[-1] == "deter_at_fb"

    def test_caps_are_contingent_on_x_but_equal_in_either_positive(self):
        sol = solve_optimal(BENCH.with_(p_x=0.7), POP)
        assert sol.caps[1] == sol.caps[-1] == sol.f_bar

    def test_free_pass_closed_form(self):
        env = BENCH.with_(p_x=0.8)
        by_regime = {c.slice_regimes[-1]: c.welfare for c in candidate_equilibria(env, POP)}
        assert free_pass_minus_deterrence(env, POP) == pytest.approx(
            by_regime["free_pass"] - by_regime["deter_at_fb"], abs=1e-12
        )

    def test_always_efficient_is_free_pass(self):
        env = InformationEnvironment(0.95, 0.6, 0.6)
        sol = solve_optimal(env, POP)
        assert sol.case is CaseLabel.ALWAYS_EFFICIENT
        assert sol.f_bar == 0.0
        assert sol.welfare == pytest.approx(2 * 0.95 - 1, abs=1e-12)

    def test_never_efficient_deters_everyone(self):
        env = InformationEnvironment(0.02, 0.6, 0.6)
        sol = solve_optimal(env, POP)
        assert sol.welfare == 0.0
        assert all(p == 0 for p in sol.profile.action_prob.values())

    def test_unsupported_population_is_flagged(self):
        sol = solve_optimal(BENCH, PopulationModel(0.4, 0.5))
        assert not sol.supported

    def test_optimum_dominates_candidates(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            env, pop = random_environment(rng), random_population(rng)
            best = solve_optimal(env, pop).welfare
            assert all(c.welfare <= best + 1e-12 for c in candidate_equilibria(env, pop))

    @pytest.mark.parametrize("mode", ["subjective", "objective", "commitment", "expost"])
    def test_solutions_pass_audit(self, mode):
        rng = np.random.default_rng(99)
        for _ in range(60):
            env, pop = random_environment(rng), random_population(rng)
            sol = solve(env, pop, mode)
            assert audit_solution(env, pop, sol).ok, (env, pop, mode)
