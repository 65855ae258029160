import warnings

import numpy as np
import pytest

from kvnsim.grid import (
    CoverageError,
    GridSpec,
    GridState,
    apply_gate,
    apply_sequence,
    born_density,
    boundary_mass,
    density_to_csv,
    exact_controlled_shift,
    measure_positions,
    momentum_expectation,
    position_expectation,
    position_moments,
    prepare_gaussian,
)
from kvnsim.kvn import KvNTerm, build_kvn, validate_separation
from kvnsim.phasepoly import PhasePolynomial, parse_polynomial
from kvnsim.synth import Gate, GateKind, cx_via_cz, synthesize_term, trotter_circuit
from kvnsim.gaussian import GaussianState, evolve_gaussian


SPEC1 = GridSpec(num_modes=1, points_per_mode=128, half_extent=8.0)
SPEC2 = GridSpec(num_modes=2, points_per_mode=128, half_extent=8.0)


def l2_distance(a: GridState, b: GridState) -> float:
    return float(
        np.sqrt(np.sum(np.abs(a.psi - b.psi) ** 2) * a.spec.cell_volume)
    )


class TestGridSpec:
    def test_spacing_relation(self):
        assert SPEC1.dx == pytest.approx(0.125)
        assert SPEC1.dp == pytest.approx(2 * np.pi / (128 * 0.125))
        assert SPEC1.dx * SPEC1.dp * SPEC1.points_per_mode == pytest.approx(2 * np.pi)

    def test_power_of_two_required(self):
        with pytest.raises(ValueError, match="power of two"):
            GridSpec(num_modes=1, points_per_mode=100)
        with pytest.raises(ValueError, match="power of two"):
            GridSpec(num_modes=1, points_per_mode=8)

    def test_mode_limit(self):
        with pytest.raises(ValueError, match="between 1 and 4"):
            GridSpec(num_modes=5, points_per_mode=16)

    def test_memory_cap(self):
        with pytest.raises(ValueError, match="memory cap"):
            GridSpec(num_modes=4, points_per_mode=1024)

    def test_positions_centered(self):
        xs = SPEC1.positions()
        assert xs[0] == -8.0
        assert xs[64] == 0.0
        assert xs[-1] == pytest.approx(8.0 - SPEC1.dx)


class TestPrepareGaussian:
    def test_vacuum_normalized(self):
        spec = GridSpec(num_modes=2, points_per_mode=64, half_extent=8.0)
        state = prepare_gaussian(spec, [0.0, 0.0], 0.5 * np.eye(2))
        assert abs(state.norm() - 1.0) <= 1e-9

    def test_peak_at_nearest_cell_to_mean(self):
        state = prepare_gaussian(SPEC2, [1.0, 0.0], np.diag([0.05, 0.05]))
        rho = np.abs(state.psi) ** 2
        idx = np.unravel_index(np.argmax(rho), rho.shape)
        xs = SPEC2.positions()
        assert xs[idx[0]] == pytest.approx(1.0)
        assert xs[idx[1]] == pytest.approx(0.0)

    def test_second_moments_match_covariance(self):
        cov = np.array([[0.7, 0.2], [0.2, 0.4]])
        state = prepare_gaussian(SPEC2, [0.5, -0.3], cov)
        mean, sampled_cov = position_moments(born_density(state))
        assert np.allclose(mean, [0.5, -0.3], atol=1e-6)
        assert np.allclose(sampled_cov, cov, atol=1e-6)

    def test_coverage_error(self):
        with pytest.raises(CoverageError):
            prepare_gaussian(SPEC1, [7.5], np.array([[1.0]]))

    def test_coverage_warning_between_two_and_five_sigma(self):
        with pytest.warns(UserWarning, match="5 sigma"):
            prepare_gaussian(SPEC1, [5.0], np.array([[1.0]]))

    def test_rejects_non_positive_definite(self):
        with pytest.raises(ValueError, match="positive definite"):
            prepare_gaussian(SPEC2, [0.0, 0.0], np.diag([1.0, -0.1]))


class TestUnitarity:
    @pytest.mark.parametrize(
        "gate",
        [
            Gate(GateKind.MOMENTUM_DISPLACEMENT, (0,), 0.8),
            Gate(GateKind.QUADRATIC_PHASE, (0,), 0.5),
            Gate(GateKind.CUBIC_PHASE, (0,), 0.2),
            Gate(GateKind.QUARTIC_PHASE, (0,), 0.1),
            Gate(GateKind.ROTATION, (1,), 0.9),
            Gate(GateKind.ROTATION, (1,), np.pi),
            Gate(GateKind.CONTROLLED_Z, (0, 1), 0.6),
            Gate(GateKind.CONTROLLED_X, (0, 1), 0.6),
            Gate(GateKind.FOURIER, (0,)),
            Gate(GateKind.FOURIER_INVERSE, (1,)),
        ],
    )
    def test_norm_preserved_per_gate(self, gate):
        state = prepare_gaussian(SPEC2, [0.6, -0.2], 0.5 * np.eye(2))
        out = apply_gate(state, gate)
        assert abs(out.norm() - 1.0) <= 1e-12


class TestFourier:
    def test_fourth_power_is_identity(self):
        state = prepare_gaussian(SPEC1, [0.7], np.array([[0.4]]))
        out = state
        for _ in range(4):
            out = apply_gate(out, Gate(GateKind.FOURIER, (0,)))
        assert l2_distance(out, state) <= 1e-10

    def test_inverse_pair(self):
        state = prepare_gaussian(SPEC1, [0.3], np.array([[0.6]]))
        out = apply_gate(
            apply_gate(state, Gate(GateKind.FOURIER, (0,))),
            Gate(GateKind.FOURIER_INVERSE, (0,)),
        )
        assert l2_distance(out, state) <= 1e-12

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_quadrature_exchange_relations(self, seed):
        # after F: <X> = -<P before>, <P> = <X before>
        rng = np.random.default_rng(seed)
        mean = rng.uniform(-1, 1)
        state = prepare_gaussian(SPEC1, [mean], np.array([[rng.uniform(0.3, 0.8)]]))
        state = apply_gate(
            state, Gate(GateKind.MOMENTUM_DISPLACEMENT, (0,), rng.uniform(-1, 1))
        )
        x0, p0 = position_expectation(state, 0), momentum_expectation(state, 0)
        out = apply_gate(state, Gate(GateKind.FOURIER, (0,)))
        assert position_expectation(out, 0) == pytest.approx(-p0, abs=1e-8)
        assert momentum_expectation(out, 0) == pytest.approx(x0, abs=1e-8)

    def test_convention_pin(self):
        # a state displaced in position maps to one displaced in momentum
        state = prepare_gaussian(SPEC1, [1.0], np.array([[0.5]]))
        out = apply_gate(state, Gate(GateKind.FOURIER, (0,)))
        assert position_expectation(out, 0) == pytest.approx(0.0, abs=1e-8)
        assert momentum_expectation(out, 0) == pytest.approx(1.0, abs=1e-8)

    def test_square_is_parity(self):
        # F^2 reverses the position argument on the centered grid
        state = prepare_gaussian(SPEC1, [0.6], np.array([[0.5]]))
        out = apply_gate(
            apply_gate(state, Gate(GateKind.FOURIER, (0,))),
            Gate(GateKind.FOURIER, (0,)),
        )
        reflected = np.roll(state.psi[::-1], 1)
        assert np.linalg.norm(out.psi - reflected) * np.sqrt(SPEC1.dx) <= 1e-12

    def test_rotation_pi_means_flip(self):
        state = prepare_gaussian(SPEC2, [1.0, 0.4], 0.5 * np.eye(2))
        out = apply_gate(
            apply_gate(state, Gate(GateKind.ROTATION, (0,), np.pi)),
            Gate(GateKind.ROTATION, (1,), np.pi),
        )
        assert position_expectation(out, 0) == pytest.approx(-1.0, abs=1e-8)
        assert position_expectation(out, 1) == pytest.approx(-0.4, abs=1e-8)

    def test_rotation_quarter_matches_fourier_density(self):
        state = prepare_gaussian(SPEC1, [0.9], np.array([[0.5]]))
        via_r = apply_gate(state, Gate(GateKind.ROTATION, (0,), np.pi / 2))
        via_f = apply_gate(state, Gate(GateKind.FOURIER, (0,)))
        assert np.allclose(
            np.abs(via_r.psi) ** 2, np.abs(via_f.psi) ** 2, atol=1e-12
        )


class TestDiagonalGates:
    def test_cz_phase_gradient_matches_conjugate_position(self):
        # finite-difference phase gradient along x1 equals s * x2, so its
        # density-weighted average equals s * <x2> under the same weights
        s = 0.1
        state = prepare_gaussian(SPEC2, [1.0, 0.8], np.diag([0.04, 0.04]))
        out = apply_gate(state, Gate(GateKind.CONTROLLED_Z, (0, 1), s))
        ratio = out.psi[1:, :] * np.conj(out.psi[:-1, :])
        base = state.psi[1:, :] * np.conj(state.psi[:-1, :])
        grad = np.angle(ratio * np.conj(base)) / SPEC2.dx
        w = np.abs(state.psi[1:, :]) ** 2
        w /= w.sum()
        x2 = SPEC2.positions()[None, :]
        measured = float((w * grad).sum())
        expected = s * float((w * x2).sum())
        assert measured == pytest.approx(expected, abs=1e-6)

    def test_displacement_shifts_momentum(self):
        state = prepare_gaussian(SPEC1, [0.0], np.array([[0.5]]))
        out = apply_gate(state, Gate(GateKind.MOMENTUM_DISPLACEMENT, (0,), 0.9))
        assert momentum_expectation(out, 0) == pytest.approx(0.9, abs=1e-8)
        assert np.allclose(np.abs(out.psi) ** 2, np.abs(state.psi) ** 2)


class TestControlledX:
    def test_moment_shift_matches_gaussian_backend(self):
        # grid CX vs the exact Gaussian backend on the same generator
        s = 0.4
        state = prepare_gaussian(SPEC2, [1.0, 0.0], 0.5 * np.eye(2))
        out = apply_gate(state, Gate(GateKind.CONTROLLED_X, (0, 1), s))
        term = KvNTerm(factor=PhasePolynomial.variable(2, 0), mode=1, sign=1)
        from kvnsim.kvn import KvNHamiltonian

        gauss = GaussianState.from_position_density(
            np.array([1.0, 0.0]), 0.5 * np.eye(2)
        )
        evolved = evolve_gaussian(gauss, KvNHamiltonian(n=1, terms=(term,)), s)
        assert position_expectation(out, 1) == pytest.approx(
            evolved.position_mean()[1], abs=1e-6
        )
        assert position_expectation(out, 1) == pytest.approx(s * 1.0, abs=1e-6)

    def test_cx_via_cz_equivalence(self):
        # narrow control bounds the shift excursion; vacuum-width target keeps
        # the Fourier conjugation well inside the box in both quadratures
        state = prepare_gaussian(SPEC2, [0.3, 0.0], np.diag([0.1, 0.5]))
        direct = apply_gate(state, Gate(GateKind.CONTROLLED_X, (0, 1), 1.0))
        via = apply_sequence(state, cx_via_cz(0, 1, 1.0, 2))
        assert l2_distance(direct, via) <= 1e-10

    def test_cx_via_cz_zero_strength_is_identity(self):
        state = prepare_gaussian(SPEC2, [0.5, 0.0], 0.25 * np.eye(2))
        via = apply_sequence(state, cx_via_cz(0, 1, 0.0, 2))
        assert l2_distance(via, state) <= 1e-12


class TestExactControlledShift:
    def test_constant_factor_translates(self):
        term = KvNTerm(factor=PhasePolynomial.constant(2, 1), mode=0, sign=1)
        state = prepare_gaussian(SPEC2, [0.0, 0.0], 0.5 * np.eye(2))
        out = exact_controlled_shift(state, term, 0.8)
        assert position_expectation(out, 0) == pytest.approx(0.8, abs=1e-9)

    def test_harmonic_term_responds_linearly_to_control(self):
        term = KvNTerm(factor=PhasePolynomial.variable(2, 1), mode=0, sign=1)
        state = prepare_gaussian(SPEC2, [1.0, 0.0], 0.5 * np.eye(2))
        out = exact_controlled_shift(state, term, 0.5)
        # control mean is zero: target mean unchanged
        assert position_expectation(out, 0) == pytest.approx(1.0, abs=1e-9)
        shifted = prepare_gaussian(SPEC2, [1.0, 0.6], 0.5 * np.eye(2))
        out2 = exact_controlled_shift(shifted, term, 0.5)
        assert position_expectation(out2, 0) == pytest.approx(1.0 + 0.5 * 0.6, abs=1e-8)

    def test_inverse_composition(self):
        term = KvNTerm(factor=PhasePolynomial(2, {(0, 2): 1}), mode=0, sign=-1)
        state = prepare_gaussian(SPEC2, [0.2, -0.1], 0.4 * np.eye(2))
        out = exact_controlled_shift(
            exact_controlled_shift(state, term, 0.3), term, -0.3
        )
        assert l2_distance(out, state) <= 1e-10


class TestSynthesisAgainstOracle:
    @pytest.mark.parametrize(
        "expo,mode",
        [((0, 1), 0), ((0, 2), 0), ((0, 3), 0)],
    )
    def test_single_control_generators(self, expo, mode):
        spec = GridSpec(num_modes=2, points_per_mode=64, half_extent=8.0)
        state = prepare_gaussian(spec, [0.0, 0.0], np.diag([0.5, 0.04]))
        term = KvNTerm(factor=PhasePolynomial.monomial(2, expo, 1), mode=mode, sign=1)
        for s in (0.5, -0.31):
            syn = apply_sequence(state, synthesize_term(term, s))
            ora = exact_controlled_shift(state, term, s)
            rel = l2_distance(syn, ora)
            assert rel <= 1e-6

    def test_cubic_factor_spec_point(self):
        # X^3 factor at s = 0.1 on a 64-point grid: within 1e-8 relative
        spec = GridSpec(num_modes=2, points_per_mode=64, half_extent=8.0)
        state = prepare_gaussian(spec, [0.0, 0.0], np.diag([0.04, 0.5]))
        term = KvNTerm(factor=PhasePolynomial.monomial(2, (3, 0), 1), mode=1, sign=1)
        syn = apply_sequence(state, synthesize_term(term, 0.1))
        ora = exact_controlled_shift(state, term, 0.1)
        assert l2_distance(syn, ora) <= 1e-8


class TestTrotterOnGrid:
    def test_gaussian_grid_cross_validation_monotone(self):
        # quadratic generator: grid moments approach the exact Gaussian
        # flow as the step count doubles
        h = validate_separation(parse_polynomial("1/2 * x2^2 + 1/2 * x1^2", 2), 1)
        kvn = build_kvn(h)
        state = prepare_gaussian(SPEC2, [1.0, 0.0], 0.5 * np.eye(2))
        exact = evolve_gaussian(
            GaussianState.from_position_density(np.array([1.0, 0.0]), 0.5 * np.eye(2)),
            kvn,
            1.2,
        ).position_mean()
        errors = []
        for steps in (8, 16, 32, 64):
            out = apply_sequence(state, trotter_circuit(kvn, 1.2, steps, 1))
            mean, _ = position_moments(born_density(out))
            errors.append(np.linalg.norm(mean - exact))
        assert all(a > b for a, b in zip(errors, errors[1:]))

    def test_time_reversal_composes_to_identity(self):
        h = validate_separation(
            parse_polynomial("1/2 * x2^2 + 1/2 * x1^2 + 1/40 * x1^4", 2), 1
        )
        circ = trotter_circuit(build_kvn(h), 0.8, 4, 1)
        state = prepare_gaussian(SPEC2, [1.0, 0.0], 0.5 * np.eye(2))
        out = apply_sequence(apply_sequence(state, circ), circ.inverse())
        assert l2_distance(out, state) <= 1e-8

    def test_born_density_approaches_liouville_density_under_refinement(self):
        # the squared modulus of the evolved state converges to the
        # transported classical density as the product formula is refined
        from kvnsim.oracle import (
            FlowMap,
            compare_densities,
            gaussian_density,
            liouville_density_grid,
        )

        h = validate_separation(parse_polynomial("1/2 * x2^2 + 1/2 * x1^2", 2), 1)
        kvn = build_kvn(h)
        spec = GridSpec(num_modes=2, points_per_mode=64, half_extent=8.0)
        state = prepare_gaussian(spec, [1.0, 0.0], 0.5 * np.eye(2))
        reference = liouville_density_grid(
            FlowMap(h, dt=1e-3), gaussian_density([1.0, 0.0], 0.5 * np.eye(2)), 1.0, spec
        )
        tvs = []
        for steps in (10, 40, 160):
            out = apply_sequence(state, trotter_circuit(kvn, 1.0, steps, 1))
            tvs.append(compare_densities(born_density(out), reference).total_variation)
        assert tvs[0] > tvs[1] > tvs[2]


class TestMeasurement:
    def test_concentrated_density_sampled_exactly(self):
        spec = GridSpec(num_modes=1, points_per_mode=64, half_extent=8.0)
        psi = np.zeros(64, dtype=np.complex128)
        psi[40] = 1.0 / np.sqrt(spec.dx)
        state = GridState(spec, psi)
        samples = measure_positions(state, 50, seed=3)
        assert np.all(samples[:, 0] == spec.positions()[40])

    def test_deterministic_given_seed(self):
        state = prepare_gaussian(SPEC1, [0.0], np.array([[1.0]]))
        a = measure_positions(state, 1000, seed=11)
        b = measure_positions(state, 1000, seed=11)
        assert np.array_equal(a, b)
        c = measure_positions(state, 1000, seed=12)
        assert not np.array_equal(a, c)

    def test_sample_mean_within_clt_bound_across_seeds(self):
        state = prepare_gaussian(SPEC1, [0.0], np.array([[1.0]]))
        n = 100_000
        bound = 3.0 / np.sqrt(n)  # 3 sigma / sqrt(n) with sigma = 1
        hits = 0
        for seed in range(20):
            samples = measure_positions(state, n, seed=seed)
            if abs(samples[:, 0].mean()) <= bound:
                hits += 1
        assert hits == 20

    def test_rejects_zero_samples(self):
        state = prepare_gaussian(SPEC1, [0.0], np.array([[1.0]]))
        with pytest.raises(ValueError, match="num_samples"):
            measure_positions(state, 0, seed=0)


class TestBornDensity:
    def test_vacuum_peaks_at_origin(self):
        state = prepare_gaussian(SPEC2, [0.0, 0.0], 0.5 * np.eye(2))
        rho = born_density(state)
        idx = np.unravel_index(np.argmax(rho.values), rho.values.shape)
        assert SPEC2.positions()[idx[0]] == 0.0
        assert SPEC2.positions()[idx[1]] == 0.0
        assert rho.total() == pytest.approx(1.0, abs=1e-9)

    def test_density_covariance_matches_request(self):
        cov = np.diag([0.3, 0.9])
        state = prepare_gaussian(SPEC2, [0.0, 0.5], cov)
        _, measured = position_moments(born_density(state))
        assert np.allclose(measured, cov, atol=1e-6)

    def test_global_phase_leaves_density_unchanged(self):
        # identical up to one rounding step of the complex modulus
        state = prepare_gaussian(SPEC1, [0.4], np.array([[0.5]]))
        rotated = GridState(state.spec, state.psi * np.exp(1j * 0.7318))
        assert np.allclose(
            np.abs(state.psi) ** 2, np.abs(rotated.psi) ** 2, rtol=1e-12, atol=0.0
        )

    def test_boundary_mass_tiny_for_contained_state(self):
        state = prepare_gaussian(SPEC1, [0.0], np.array([[0.5]]))
        assert boundary_mass(state) <= 1e-12


class TestCsvExports:
    def test_density_csv_shape_and_determinism(self):
        spec = GridSpec(num_modes=1, points_per_mode=16, half_extent=4.0)
        state = prepare_gaussian(spec, [0.0], np.array([[0.4]]))
        text = density_to_csv(born_density(state))
        lines = text.strip().splitlines()
        assert lines[0] == "x1,density"
        assert len(lines) == 17
        assert text == density_to_csv(born_density(state))
