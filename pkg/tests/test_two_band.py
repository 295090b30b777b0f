"""
Unit tests for the two-band environment model.

Tests:
- Closed-form solution against block propagation
- Stationary states and hand-derived eigen-operator tables
- Rate ramps and sampled generators
"""

import numpy as np
import pytest

from conftest import random_state
from effham.exceptions import ModelInvariantError
from effham.models import RampSpec, TwoBandParams
from effham.solvers.generalized import (
    build_block_hamiltonian,
    generalized_damping_basis,
    generalized_oracle,
    propagate_blocks,
    stack,
)
from effham.solvers.two_band import (
    EXCITED,
    ZERO,
    build_model,
    closed_form_propagator,
    closed_form_solution,
    eigen_operator_table,
    ramp,
    ramped_generator,
    ramped_model,
    stationary_state,
    steady_state_set,
)
from effham.utils.numerics import biorthonormal_projector


def random_pair(rng):
    w = rng.uniform(0.1, 0.9)
    return random_state(rng, 2, w), random_state(rng, 2, 1.0 - w)


@pytest.mark.unit
class TestClosedForm:
    """Tests for the exact solution."""

    def test_matches_block_propagation(self, rng):
        for _ in range(100):
            p = TwoBandParams(gamma1=rng.uniform(0.05, 3.0), gamma2=rng.uniform(0.05, 3.0))
            rhos0 = random_pair(rng)
            t = rng.uniform(0.0, 5.0)
            exact = closed_form_solution(p, rhos0, t)
            numeric = propagate_blocks(build_model(p), rhos0, t)
            for a, b in zip(exact, numeric):
                assert np.max(np.abs(a - b)) <= 1e-10

    def test_equal_rates_populations(self):
        p = TwoBandParams(gamma1=1.0, gamma2=1.0)
        for t in (0.0, 0.3, 1.0, 4.0):
            rho1, rho2 = closed_form_solution(p, (EXCITED, ZERO), t)
            assert rho1[0, 0].real == pytest.approx((1 + np.exp(-2 * t)) / 2, abs=1e-14)
            assert rho2[1, 1].real == pytest.approx((1 - np.exp(-2 * t)) / 2, abs=1e-14)

    def test_coherence_decay_rates(self, two_band_params):
        rho = np.array([[0.5, 0.3j], [-0.3j, 0.5]])
        for p in two_band_params:
            lower, _ = closed_form_solution(p, (rho, ZERO), 2.0)
            _, upper = closed_form_solution(p, (ZERO, rho), 2.0)
            assert lower[0, 1] == pytest.approx(0.3j * np.exp(-p.gamma2), abs=1e-14)
            assert upper[0, 1] == pytest.approx(0.3j * np.exp(-p.gamma1), abs=1e-14)

    def test_propagator_acts_like_closed_form(self, two_band_params, rng):
        for p in two_band_params:
            rhos0 = random_pair(rng)
            evolved = closed_form_propagator(p, 1.1) @ stack(rhos0).stacked
            expected = stack(closed_form_solution(p, rhos0, 1.1)).stacked
            assert np.allclose(evolved, expected, atol=1e-13)

    def test_rates_must_be_positive(self):
        with pytest.raises(ModelInvariantError) as exc:
            TwoBandParams(gamma1=0.0, gamma2=1.0)
        assert exc.value.field == "gamma1"


@pytest.mark.unit
class TestStationaryStates:
    """Tests for the stationary component pairs."""

    def test_fixed_points(self, two_band_params):
        for p in two_band_params:
            model = build_model(p)
            for pair in steady_state_set(p):
                for d in generalized_oracle(model, pair):
                    assert np.max(np.abs(d)) < 1e-14

    def test_unit_trace_state(self, two_band_params):
        for p in two_band_params:
            psi = stationary_state(p)
            assert psi.total_trace() == pytest.approx(1.0, abs=1e-14)
            rho1, rho2 = psi.matrices()
            assert rho1[0, 0].real == pytest.approx(p.gamma1 / p.total)
            assert rho2[1, 1].real == pytest.approx(p.gamma2 / p.total)

    def test_long_time_limit(self, two_band_params):
        for p in two_band_params:
            rho1, rho2 = closed_form_solution(p, (EXCITED, ZERO), 60.0)
            assert rho1[0, 0].real == pytest.approx(p.gamma1 / p.total, abs=1e-12)
            assert rho2[1, 1].real == pytest.approx(p.gamma2 / p.total, abs=1e-12)


@pytest.mark.unit
class TestEigenOperatorTables:
    """Tests for the hand-derived eigen-operators."""

    def test_table_entries_are_eigen_operators(self, two_band_params):
        for p in two_band_params:
            model = build_model(p)
            fixtures = eigen_operator_table(p)
            for lam, pair in zip(fixtures.eigenvalues, fixtures.right):
                for d, a in zip(generalized_oracle(model, pair), pair):
                    assert np.allclose(d, lam * a, atol=1e-14)

    def test_pairing_is_identity(self, two_band_params):
        for p in two_band_params:
            assert np.max(np.abs(eigen_operator_table(p).pairing() - np.eye(8))) <= 1e-9

    def test_stacked_vectors_are_dual(self, two_band_params):
        for p in two_band_params:
            fixtures = eigen_operator_table(p)
            assert np.allclose(fixtures.stacked_left() @ fixtures.stacked_right(), np.eye(8), atol=1e-12)

    def test_numerical_spectrum_matches(self):
        p = TwoBandParams(gamma1=0.3, gamma2=1.7)
        basis = generalized_damping_basis(build_model(p))
        expected = sorted(eigen_operator_table(p).eigenvalues)
        got = sorted(basis.eigenvalues.real)
        assert np.allclose(got, expected, atol=1e-9)
        assert np.max(np.abs(basis.eigenvalues.imag)) < 1e-9

    def test_stationary_projector_matches(self):
        p = TwoBandParams(gamma1=2.0, gamma2=0.5)
        fixtures = eigen_operator_table(p)
        expected = fixtures.stacked_right()[:, :3] @ fixtures.stacked_left()[:3, :]
        system = generalized_damping_basis(build_model(p)).system
        zero_cluster = next(c for c in system.clusters if abs(system.eigenvalues[c[0]]) < 1e-9)
        assert len(zero_cluster) == 3
        assert np.max(np.abs(biorthonormal_projector(system, zero_cluster) - expected)) <= 1e-8


@pytest.mark.unit
class TestRamps:
    """Tests for ramped rates and sampled generators."""

    def test_linear_ramp_with_floor(self):
        spec = RampSpec(value_at_T=1.0, slope_at_T=2.0, T=1.0, floor=0.01)
        assert ramp(spec, 1.0) == pytest.approx(1.0)
        assert ramp(spec, 0.75) == pytest.approx(0.5)
        assert ramp(spec, 0.0) == pytest.approx(0.01)
        assert spec.derivative(0.0) == 0.0
        assert spec.derivative(0.9) == 2.0

    def test_ramped_generator_samples(self):
        spec1 = RampSpec(value_at_T=1.5, slope_at_T=1.0, T=2.0)
        spec2 = RampSpec(value_at_T=0.8, slope_at_T=0.2, T=2.0)
        gen = ramped_generator(spec1, spec2, steps=10)
        assert gen.steps == 10
        for i in (0, 4, 10):
            t = gen.times[i]
            expected = build_block_hamiltonian(ramped_model(spec1, spec2, t)).flattened
            assert np.allclose(gen.matrices[i], expected, atol=1e-14)
        mid = 0.5 * (gen.times[3] + gen.times[4])
        assert np.allclose(gen.midpoint(3), build_block_hamiltonian(ramped_model(spec1, spec2, mid)).flattened, atol=1e-14)

    def test_ramped_generator_derivative_is_exact(self):
        spec1 = RampSpec(value_at_T=3.0, slope_at_T=1.0, T=2.0)
        spec2 = RampSpec(value_at_T=0.8, slope_at_T=0.2, T=2.0)
        gen = ramped_generator(spec1, spec2, steps=40)
        per_unit_time = (
            build_block_hamiltonian(ramped_model(spec1, spec2, 1.0)).flattened
            - build_block_hamiltonian(ramped_model(spec1, spec2, 0.0)).flattened
        )
        for i in (0, 17, 40):
            assert np.allclose(gen.derivative(i), per_unit_time, atol=1e-12)

    def test_static_ramp_has_zero_derivative(self):
        spec = RampSpec(value_at_T=0.7, slope_at_T=0.0, T=1.0)
        gen = ramped_generator(spec, RampSpec(value_at_T=1.3, slope_at_T=0.0, T=1.0), steps=100)
        for i in (0, 50, 100):
            assert not np.any(gen.derivative(i))

    def test_grid_covers_zero_to_final_time(self):
        spec = RampSpec(value_at_T=1.0, slope_at_T=0.0, T=3.0)
        gen = ramped_generator(spec, spec, steps=6)
        assert gen.times[0] == 0.0
        assert gen.times[-1] == pytest.approx(3.0)
        assert gen.uniform_step == pytest.approx(0.5)
