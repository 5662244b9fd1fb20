"""Unit tests for the model layer: dynamics, costates, Hamiltonian,
projection formula, switching/singular machinery, equilibria."""

import math

import numpy as np
import pytest

from agrospray.model import (AdjointState, ControlSignal, ModelParams,
                             NoInteriorEquilibriumError, PopulationState,
                             ProblemKind, ProblemSpec,
                             SingularDenominatorError, adjoint_rhs_fixed,
                             adjoint_rhs_mintime, coexistence_equilibrium,
                             control_from_adjoint, dynamics_rhs,
                             hamiltonian, pest_free_feasibility,
                             singular_control, switching_function)

TABLE = ModelParams()
INIT = PopulationState(3.1, 3.7, 2.2)


class TestModelParams:
    def test_defaults_are_reference_values(self):
        assert (TABLE.r, TABLE.e, TABLE.a, TABLE.b, TABLE.c) == \
            (1.0, 2.5, 3.1, 1.2, 0.2)
        assert (TABLE.h, TABLE.q, TABLE.k, TABLE.W, TABLE.V, TABLE.K) == \
            (0.7, 0.9, 1.0, 5.0, 1000.0, 0.01)
        assert TABLE.xi == 50.0

    @pytest.mark.parametrize("kwargs", [
        {"q": 1.5}, {"q": -0.1}, {"k": 0.0}, {"k": 1.2}, {"W": 0.0},
        {"V": 0.0}, {"a": -1.0}, {"xi": float("nan")},
        {"e": float("inf")},
    ])
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)

    def test_packed_array_layout(self):
        packed = TABLE.as_array()
        assert packed.tolist() == [1.0, 2.5, 3.1, 1.2, 0.2, 0.7, 0.9,
                                   1.0, 5.0, 1000.0, 0.01]


class TestStateAndControlTypes:
    def test_population_state_allows_negative_components(self):
        # spraying can push components below zero; the type must not
        # reject that
        PopulationState(1.0, 1.0, -0.5)

    def test_population_state_rejects_non_finite(self):
        with pytest.raises(ValueError):
            PopulationState(math.nan, 0.0, 0.0)

    def test_adjoint_rejects_negative_abnormal_multiplier(self):
        with pytest.raises(ValueError):
            AdjointState(0.0, 0.0, 0.0, l0=-1.0)

    def test_control_values_clamped_to_unit_interval(self):
        with pytest.raises(ValueError):
            ControlSignal(np.array([0.0, 1.0]), np.array([0.0, 1.5]))
        with pytest.raises(ValueError):
            ControlSignal(np.array([0.0, 1.0]), np.array([-0.1, 0.5]))

    def test_control_grid_strictly_increasing(self):
        with pytest.raises(ValueError):
            ControlSignal(np.array([0.0, 0.0, 1.0]), np.zeros(3))

    def test_control_interpolates_linearly(self):
        u = ControlSignal(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        assert u(0.25) == pytest.approx(0.25)
        assert np.allclose(u(np.array([0.0, 0.5, 1.0])), [0.0, 0.5, 1.0])

    def test_problem_spec_rejects_negative_initials(self):
        with pytest.raises(ValueError):
            ProblemSpec(TABLE, PopulationState(-1.0, 0.0, 0.0))

    def test_problem_spec_rejects_bad_bracket(self):
        with pytest.raises(ValueError):
            ProblemSpec(TABLE, INIT, horizon_bracket=(5.0, 2.0))


class TestDynamics:
    def test_reference_point_no_spray(self):
        rhs = dynamics_rhs(INIT, 0.0, TABLE)
        assert rhs == pytest.approx([-1.1160, 0.5920, -4.2801], abs=5e-5)

    def test_origin_is_unsprayed_equilibrium(self):
        assert np.all(dynamics_rhs(PopulationState(0, 0, 0), 0.0, TABLE)
                      == 0.0)

    def test_origin_full_spray_shows_pure_spray_terms(self):
        rhs = dynamics_rhs(PopulationState(0, 0, 0), 1.0, TABLE)
        assert rhs == pytest.approx([-0.07, -0.0063, -0.63], abs=1e-12)

    def test_control_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            dynamics_rhs(INIT, 1.5, TABLE)

    def test_invariant_manifolds_preserved(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            f, s, v = rng.uniform(0.0, 5.0, 3)
            assert dynamics_rhs(PopulationState(0, s, v), 0.0, TABLE)[0] == 0
            assert dynamics_rhs(PopulationState(f, 0, v), 0.0, TABLE)[1] == 0
            assert dynamics_rhs(PopulationState(f, s, 0), 0.0, TABLE)[2] == 0


class TestAdjointRhs:
    def test_zero_costate_fixed_keeps_running_cost(self):
        rhs = adjoint_rhs_fixed(AdjointState(0, 0, 0), INIT, TABLE)
        assert rhs == pytest.approx([0.0, 0.0, -1.0])

    def test_costate_e1_at_carrying_capacity(self):
        rhs = adjoint_rhs_fixed(AdjointState(1, 0, 0),
                                PopulationState(5.0, 0.0, 0.0), TABLE)
        assert rhs == pytest.approx([1.0, 1.0, -1.0])

    def test_costate_e2_at_origin(self):
        rhs = adjoint_rhs_fixed(AdjointState(0, 1, 0),
                                PopulationState(0, 0, 0), TABLE)
        assert rhs == pytest.approx([0.0, 3.1, -1.0])

    def test_mintime_zero_costate_is_fixed_point(self):
        rhs = adjoint_rhs_mintime(AdjointState(0, 0, 0), INIT, TABLE)
        assert np.all(rhs == 0.0)

    def test_mintime_e3_at_origin_slow_parasites(self):
        p = ModelParams(e=0.3)
        rhs = adjoint_rhs_mintime(AdjointState(0, 0, 1),
                                  PopulationState(0, 0, 0), p)
        assert rhs == pytest.approx([0.0, 0.0, -0.3])

    def test_mintime_all_ones_symbolic_oracle(self):
        # value frozen from an independent symbolic substitution
        rhs = adjoint_rhs_mintime(AdjointState(1, 1, 1),
                                  PopulationState(1, 1, 1), TABLE)
        assert rhs == pytest.approx([-0.6, 3.1, -2.495], abs=1e-12)

    def test_mintime_rhs_linear_in_costate(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            x = PopulationState(*rng.uniform(0.0, 4.0, 3))
            l = rng.uniform(-2.0, 2.0, 3)
            alpha = rng.uniform(-3.0, 3.0)
            lhs = adjoint_rhs_mintime(AdjointState(*(alpha * l)), x, TABLE)
            rhs = alpha * adjoint_rhs_mintime(AdjointState(*l), x, TABLE)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_fixed_minus_mintime_is_unit_running_cost(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            x = PopulationState(*rng.uniform(0.0, 4.0, 3))
            l = AdjointState(*rng.uniform(-2.0, 2.0, 3))
            diff = adjoint_rhs_fixed(l, x, TABLE) \
                - adjoint_rhs_mintime(l, x, TABLE)
            assert diff == pytest.approx([0.0, 0.0, -1.0], abs=1e-12)


class TestHamiltonian:
    def test_running_cost_only_states(self):
        H = hamiltonian(PopulationState(0, 0, 2), 0.0,
                        AdjointState(0, 0, 0), TABLE,
                        ProblemKind.FIXED_HORIZON)
        assert H == pytest.approx(2.0)

    def test_quadratic_cost_only(self):
        H = hamiltonian(PopulationState(0, 0, 0), 0.5,
                        AdjointState(0, 0, 0), TABLE,
                        ProblemKind.FIXED_HORIZON)
        assert H == pytest.approx(6.25)

    def test_mintime_decomposition(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            x = PopulationState(*rng.uniform(0.0, 4.0, 3))
            l = AdjointState(*rng.uniform(-2.0, 2.0, 3), l0=0.7)
            u = rng.uniform(0.0, 1.0)
            H = hamiltonian(x, u, l, TABLE, ProblemKind.MIN_TIME)
            inner = float(np.dot(l.as_array(), dynamics_rhs(x, u, TABLE)))
            assert H - l.l0 == pytest.approx(inner, rel=1e-12, abs=1e-12)

    def test_fixed_hamiltonian_convex_in_control(self):
        x = INIT
        l = AdjointState(0.3, -0.4, 0.8)
        for u in (0.1, 0.5, 0.9):
            d = 0.05
            second = (hamiltonian(x, u + d, l, TABLE,
                                  ProblemKind.FIXED_HORIZON)
                      - 2 * hamiltonian(x, u, l, TABLE,
                                        ProblemKind.FIXED_HORIZON)
                      + hamiltonian(x, u - d, l, TABLE,
                                    ProblemKind.FIXED_HORIZON))
            assert second > 0


class TestControlProjection:
    def test_zero_costate_maps_to_zero(self):
        assert control_from_adjoint(AdjointState(0, 0, 0), TABLE) == 0.0

    def test_upper_clamp_boundary(self):
        l3 = TABLE.xi / (TABLE.h * TABLE.q)   # makes the raw value 1
        assert control_from_adjoint(AdjointState(0, 0, l3), TABLE) \
            == pytest.approx(1.0)
        assert control_from_adjoint(AdjointState(0, 0, 2 * l3), TABLE) == 1.0

    def test_lower_clamp(self):
        assert control_from_adjoint(AdjointState(0, 0, -10), TABLE) == 0.0

    def test_xi_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            control_from_adjoint(AdjointState(1, 1, 1), ModelParams(xi=0.0))

    def test_formula_minimizes_hamiltonian_on_grid_scan(self):
        rng = np.random.default_rng(5)
        grid = np.linspace(0.0, 1.0, 10_001)
        for _ in range(100):
            x = PopulationState(*rng.uniform(0.0, 5.0, 3))
            l = AdjointState(*rng.uniform(-30.0, 30.0, 3))
            u_star = control_from_adjoint(l, TABLE)
            assert 0.0 <= u_star <= 1.0
            values = [hamiltonian(x, u, l, TABLE,
                                  ProblemKind.FIXED_HORIZON) for u in grid]
            u_grid = grid[int(np.argmin(values))]
            assert abs(u_star - u_grid) <= grid[1] - grid[0] + 1e-12


class TestSwitchingFunction:
    def test_zero(self):
        assert switching_function(AdjointState(0, 0, 0), TABLE) == 0.0

    def test_e1_coefficient(self):
        assert switching_function(AdjointState(1, 0, 0), TABLE) \
            == pytest.approx(-0.07)

    def test_e2_plus_e3(self):
        assert switching_function(AdjointState(0, 1, 1), TABLE) \
            == pytest.approx(-0.6363)


class TestSingularControl:
    def test_zero_costate_raises(self):
        with pytest.raises(SingularDenominatorError):
            singular_control(INIT, AdjointState(0, 0, 0), TABLE)

    def test_all_ones_symbolic_oracle(self):
        # alpha and beta frozen from an independent symbolic derivation
        # of the second derivative of the switching function
        value = singular_control(PopulationState(1, 1, 1),
                                 AdjointState(1, 1, 1), TABLE)
        alpha, beta = 0.300184325, 0.0039445
        assert value == pytest.approx(-alpha / beta, rel=1e-10)

    def test_frozen_interior_point_oracle(self):
        x = PopulationState(1.7009866156778017, 0.5404774682538404,
                            2.656735312063398)
        l = AdjointState(-0.043676533501870285, 0.3793515009128736,
                         -0.27978274976240947)
        value = singular_control(x, l, TABLE)
        assert value == pytest.approx(0.58025449570861235, rel=1e-10)


class TestEquilibriumAndFeasibility:
    def test_reference_equilibrium_coordinates(self):
        eq = coexistence_equilibrium(TABLE)
        assert eq.s == pytest.approx(2.0790, abs=5e-5)
        assert eq.f == pytest.approx(2.9210, abs=5e-5)
        # v* from the closed form; the residual check below certifies it
        assert eq.v == pytest.approx(2.0965, abs=5e-5)

    def test_equilibrium_residual_reference(self):
        eq = coexistence_equilibrium(TABLE)
        assert np.abs(dynamics_rhs(eq, 0.0, TABLE)).max() < 1e-9

    def test_no_interior_equilibrium_raises(self):
        # spider mortality beyond any food supply drives s* negative
        with pytest.raises(NoInteriorEquilibriumError):
            coexistence_equilibrium(ModelParams(a=2000.0))

    def test_feasibility_reference_values(self):
        first, _ = pest_free_feasibility(TABLE)
        assert first is False

    def test_feasibility_mintime_values(self):
        assert pest_free_feasibility(ModelParams(c=2.0, e=0.3)) \
            == (True, True)

    def test_feasibility_boundary_strict(self):
        # a == ckW exactly: condition must be strictly false
        p = ModelParams(a=1.0, c=0.2, k=1.0, W=5.0)
        assert pest_free_feasibility(p)[0] is False
