import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from discordlab import dynamics, qmath
from discordlab.dynamics import ModelParams, XState
from tests.conftest import random_xstate

FREEZING_STATE = XState(a=0.0, b=0.4, c=0.5, d=0.1, delta=0.0, beta_c=0.4)


class TestDegeneracy:
    def test_two_spins(self):
        assert dynamics.degeneracy(2, 1) == 1
        assert dynamics.degeneracy(2, 0) == 1

    @given(st.integers(1, 16))
    def test_dimension_sum(self, n):
        total = 0
        j = n / 2.0
        while j >= -1e-9:
            total += dynamics.degeneracy(n, j) * round(2 * j + 1)
            j -= 1.0
        assert total == 2**n

    @given(st.integers(1, 30))
    def test_top_multiplet_unique(self, n):
        assert dynamics.degeneracy(n, n / 2.0) == 1

    def test_invalid_quantum_numbers(self):
        with pytest.raises(dynamics.InvalidQuantumNumberError):
            dynamics.degeneracy(4, 3.0)
        with pytest.raises(dynamics.InvalidQuantumNumberError):
            dynamics.degeneracy(4, 0.5)

    @given(st.integers(1, 16))
    def test_magnetization_count_matches_degeneracy_sum(self, n):
        for m in dynamics.magnetizations(n):
            total = 0
            j = abs(m)
            while j <= n / 2.0 + 1e-9:
                total += dynamics.degeneracy(n, j)
                j += 1.0
            assert total == dynamics.magnetization_count(n, m)


class TestWeightsAndPartitionFunction:
    def test_infinite_temperature_limit(self):
        p = ModelParams(beta_t=1e-300, n1=6, n2=4)
        w = dynamics.sector_weight(p, 1.0, -1.0, 2.0, 1.0)
        assert w == pytest.approx(dynamics.degeneracy(6, 2) * dynamics.degeneracy(4, 1))
        assert dynamics.partition_function(p) == pytest.approx(2 ** (6 + 4))

    def test_zero_magnetization(self):
        p = ModelParams()
        w = dynamics.sector_weight(p, 0.0, 0.0, 3.0, 2.0)
        assert w == pytest.approx(
            dynamics.degeneracy(14, 3) * dynamics.degeneracy(12, 2)
        )

    def test_partition_function_brute_force(self):
        p = ModelParams(n1=4, n2=4, beta_t=0.01, alpha1=25.0, alpha2=20.0, q=3.0)
        z = 0.0
        for c1 in itertools.product([0.5, -0.5], repeat=4):
            for c2 in itertools.product([0.5, -0.5], repeat=4):
                m1, m2 = sum(c1), sum(c2)
                z += math.exp(-p.beta_t * (p.q * m1 * m2 + p.alpha1 * m1 + p.alpha2 * m2))
        assert dynamics.partition_function(p) == pytest.approx(z, rel=1e-10)

    def test_partition_function_equals_sector_weight_sum(self):
        p = ModelParams(n1=4, n2=2, beta_t=0.05, alpha1=3.0, alpha2=1.0, q=2.0)
        total = 0.0
        js1 = [p.n1 / 2.0 - k for k in range(p.n1 // 2 + 1)]
        js2 = [p.n2 / 2.0 - k for k in range(p.n2 // 2 + 1)]
        for j1 in js1:
            for m1 in np.arange(-j1, j1 + 1):
                for j2 in js2:
                    for m2 in np.arange(-j2, j2 + 1):
                        total += dynamics.sector_weight(p, m1, m2, j1, j2)
        assert dynamics.partition_function(p) == pytest.approx(total, rel=1e-12)

    def test_positive_for_reference_params(self):
        assert dynamics.partition_function(ModelParams()) > 0


class TestSectorPropagator:
    def test_identity_at_t0(self):
        sp = dynamics.sector_propagator(ModelParams(), 2.0, -1.0, 0.0)
        assert np.allclose(sp.u, np.eye(4))
        assert sp.weight > 0

    def test_no_flip_flop_is_diagonal(self):
        p = ModelParams(j1=0.0)
        sp = dynamics.sector_propagator(p, 1.0, 2.0, 0.7)
        assert np.allclose(sp.u, np.diag(np.diag(sp.u)))
        w1 = p.omega1 + p.gamma1 * 1.0
        w2 = p.omega2 + p.gamma2 * 2.0
        e1 = w1 + w2 + p.j2
        q = w1 - w2
        assert sp.u[0, 0] == pytest.approx(np.exp(-1j * e1 * 0.7))
        assert sp.u[1, 1] == pytest.approx(np.exp(-1j * (-p.j2 + q) * 0.7))
        assert sp.u[2, 2] == pytest.approx(np.exp(-1j * (-p.j2 - q) * 0.7))
        assert sp.u[3, 3] == pytest.approx(np.exp(-1j * (-e1 + 2 * p.j2) * 0.7))

    def test_unitarity_random(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            p = ModelParams(
                j1=rng.uniform(0, 10), j2=rng.uniform(0, 10),
                omega1=rng.uniform(0, 10), omega2=rng.uniform(0, 10),
                gamma1=rng.uniform(0, 1), gamma2=rng.uniform(0, 1),
            )
            m1 = rng.integers(-7, 8)
            m2 = rng.integers(-6, 7)
            sp = dynamics.sector_propagator(p, float(m1), float(m2), rng.uniform(0, 10))
            assert np.max(np.abs(sp.u @ sp.u.conj().T - np.eye(4))) <= 1e-10

    def test_degenerate_central_block(self):
        p = ModelParams(j1=0.0, omega1=5.0, omega2=5.0, gamma1=0.0, gamma2=0.0)
        sp = dynamics.sector_propagator(p, 1.0, -3.0, 1.3)
        assert sp.u[1, 1] == pytest.approx(np.exp(1j * p.j2 * 1.3))
        assert sp.u[1, 2] == 0

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            dynamics.sector_propagator(ModelParams(), 0.0, 0.0, -1.0)


class TestEvolve:
    def test_t0_identity(self):
        rho0 = FREEZING_STATE.to_matrix()
        assert np.max(np.abs(dynamics.evolve(FREEZING_STATE, ModelParams(), 0.0) - rho0)) <= 1e-12

    def test_decoupled_bath_preserves_spectrum(self, rng):
        p = ModelParams(gamma1=0.0, gamma2=0.0)
        st_ = random_xstate(rng)
        w0 = np.sort(np.linalg.eigvalsh(st_.to_matrix()))
        for t in (0.5, 2.0, 6.0):
            wt = np.sort(np.linalg.eigvalsh(dynamics.evolve(st_, p, t)))
            assert np.max(np.abs(wt - w0)) <= 1e-10

    def test_agrees_with_explicit_sector_sum(self):
        p = ModelParams(n1=4, n2=2, beta_t=0.05, alpha1=3.0, alpha2=1.0, q=2.0)
        rho0 = FREEZING_STATE.to_matrix()
        t = 1.7
        num = np.zeros((4, 4), dtype=complex)
        z = 0.0
        js1 = [p.n1 / 2.0 - k for k in range(p.n1 // 2 + 1)]
        js2 = [p.n2 / 2.0 - k for k in range(p.n2 // 2 + 1)]
        for j1 in js1:
            for m1 in np.arange(-j1, j1 + 1):
                for j2 in js2:
                    for m2 in np.arange(-j2, j2 + 1):
                        w = dynamics.sector_weight(p, m1, m2, j1, j2)
                        u = dynamics.sector_propagator(p, m1, m2, t).u
                        num += w * (u @ rho0 @ u.conj().T)
                        z += w
        assert np.max(np.abs(dynamics.evolve(FREEZING_STATE, p, t) - num / z)) <= 1e-12

    @pytest.mark.parametrize("t", [1.0, 3.0, 6.0])
    def test_freezing_state_invariants(self, t):
        rho_t = dynamics.evolve(FREEZING_STATE, ModelParams(), t)
        qmath.check_density_matrix(rho_t)
        assert dynamics.x_pattern_defect(rho_t) <= 1e-10

    def test_invariants_random_states_and_times(self):
        rng = np.random.default_rng(17)
        p = ModelParams()
        for _ in range(200):
            st_ = random_xstate(rng)
            rho_t = dynamics.evolve(st_, p, rng.uniform(0, 10))
            assert abs(rho_t.trace() - 1) <= 1e-10
            assert np.linalg.eigvalsh(rho_t)[0] >= -1e-10
            assert dynamics.x_pattern_defect(rho_t) <= 1e-10


class TestTrajectoryAndGrid:
    def test_single_point(self):
        out = dynamics.trajectory(FREEZING_STATE, ModelParams(), [0.0])
        assert len(out) == 1
        assert np.allclose(out[0][1], FREEZING_STATE.to_matrix())

    def test_sixty_point_grid(self):
        grid = dynamics.uniform_grid(6.0, 60)
        assert len(grid) == 60
        assert grid[0] == pytest.approx(0.1)
        assert grid[-1] == pytest.approx(6.0)
        out = dynamics.trajectory(FREEZING_STATE, ModelParams(), grid)
        assert len(out) == 60

    def test_reversed_grid_rejected(self):
        with pytest.raises(dynamics.NonAscendingGridError):
            dynamics.trajectory(FREEZING_STATE, ModelParams(), [1.0, 0.5])


class TestTypes:
    def test_params_json_round_trip(self):
        p = ModelParams(j1=3.5, n1=6)
        assert ModelParams.from_json(p.to_json()) == p

    def test_params_reject_unknown_keys(self):
        with pytest.raises(ValueError):
            ModelParams.from_dict({"j1": 1.0, "bogus": 2.0})

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ModelParams(n1=0)
        with pytest.raises(ValueError):
            ModelParams(beta_t=0.0)

    def test_xstate_validation(self):
        with pytest.raises(ValueError):
            XState(a=0.5, b=0.5, c=0.2, d=-0.2)
        with pytest.raises(ValueError):
            XState(a=0.25, b=0.25, c=0.25, d=0.25, delta=0.6)

    def test_xstate_matrix_round_trip(self, rng):
        st_ = random_xstate(rng)
        back = XState.from_matrix(st_.to_matrix())
        assert back.a == pytest.approx(st_.a)
        assert back.delta == pytest.approx(st_.delta)

    def test_from_matrix_rejects_non_x(self):
        m = np.full((4, 4), 0.25, dtype=complex)
        with pytest.raises(ValueError):
            XState.from_matrix(m)
