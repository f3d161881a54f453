import math

import numpy as np
import pytest

from qclab.core.exceptions import InvalidArgumentError
from qclab.models.schemas import BoxRegion, CheckId, Convention, FieldKind, Sign, SpacetimePoint
from qclab.services.correlation.conservation import integral_balance
from qclab.services.correlation.correlators import (
    NAMED_PATTERNS,
    combined_ES,
    evaluate,
    evaluate_many,
)
from qclab.services.quantum.fock import build_fock_space
from qclab.services.quantum.modes import mode_function
from qclab.services.verification.oracle import (
    DenseTraceOracle,
    FDScheme,
    convergence_order,
    default_step,
    fd_derivative,
    fd_energy_continuity,
    grid_integral,
    nyquist_grid,
)

from conftest import BOX, random_points


class TestDenseTraceOracle:
    def test_combined_matches_trace_path(self, coherent_rho, space, mode_set, fixed_points):
        oracle = DenseTraceOracle(coherent_rho, space, mode_set)
        fields = combined_ES(Convention.DERIVATION_13, coherent_rho, space, mode_set, fixed_points)
        p = SpacetimePoint(r=(2.0, 0.1, 5.0), t=0.6)
        ebb, sbb = oracle.combined(Convention.DERIVATION_13, p, fixed_points)
        np.testing.assert_allclose(ebb, evaluate(fields["Ebb"], p), atol=1e-14)
        np.testing.assert_allclose(sbb, evaluate(fields["Sbb"], p), atol=1e-14)

    def test_operator_cache(self, coherent_rho, space, mode_set):
        oracle = DenseTraceOracle(coherent_rho, space, mode_set)
        p = SpacetimePoint()
        assert oracle.operator(FieldKind.E, Sign.PLUS, p) is oracle.operator(FieldKind.E, Sign.PLUS, p)

    def test_dimension_mismatch(self, coherent_rho, mode_set):
        with pytest.raises(InvalidArgumentError, match="dimension mismatch"):
            DenseTraceOracle(coherent_rho, build_fock_space(2, [2, 2]), mode_set)

    def test_wrong_point_count(self, coherent_rho, space, mode_set):
        oracle = DenseTraceOracle(coherent_rho, space, mode_set)
        pattern = NAMED_PATTERNS[Convention.PRINTED_22]["E"]
        with pytest.raises(InvalidArgumentError):
            oracle.correlator(pattern, random_points(2))


class TestFiniteDifferences:
    def test_scheme_validation(self):
        with pytest.raises(InvalidArgumentError):
            FDScheme(h=0.0)
        with pytest.raises(InvalidArgumentError):
            FDScheme(h=1e-3, order=3)

    @pytest.mark.parametrize("order", [2, 4])
    def test_plane_wave_derivative(self, mode_set, order):
        mode = mode_set.modes[1]
        p = SpacetimePoint(r=(0.3, 0.7, 1.1), t=0.2)

        def f(q):
            return mode_function(mode, FieldKind.E, Sign.PLUS, q)

        result = fd_derivative(f, p, "y", FDScheme(h=1e-3, order=order), mode_set)
        exact = 1j * mode.k[1] * f(p)
        np.testing.assert_allclose(result.value, exact, atol=1e-5 if order == 2 else 1e-10)
        assert not result.step_warning

    def test_large_step_warns(self, mode_set):
        result = fd_derivative(
            lambda q: np.array([math.sin(q.t)]),
            SpacetimePoint(),
            "t",
            FDScheme(h=1.0),
            mode_set,
        )
        assert result.step_warning

    def test_richardson_error_estimate(self):
        scheme = FDScheme(h=0.1, richardson=True)
        result = fd_derivative(lambda q: np.array([math.sin(q.r[0])]), SpacetimePoint(), "x", scheme)
        actual = abs(float(result.value[0]) - 1.0)
        assert result.error_estimate == pytest.approx(actual, rel=0.05)

    def test_unknown_axis(self):
        with pytest.raises(InvalidArgumentError):
            fd_derivative(lambda q: np.zeros(1), SpacetimePoint(), "w", FDScheme(h=0.1))

    def test_default_step(self, mode_set_c2):
        assert default_step(mode_set_c2) == pytest.approx(mode_set_c2.min_wavelength / 100)
        assert default_step(mode_set_c2, "t") == pytest.approx(mode_set_c2.min_wavelength / 200)


class TestConvergenceOrder:
    def test_second_order_slope(self):
        samples = [(h, 3.0 * h**2) for h in (0.1, 0.05, 0.025)]
        estimate = convergence_order(samples)
        assert estimate.order == pytest.approx(2.0)
        assert not estimate.floor_reached

    def test_floor(self):
        estimate = convergence_order([(0.1, 0.0), (0.05, 1e-16), (0.025, 0.0)])
        assert estimate.floor_reached
        assert estimate.order is None

    def test_noise_next_to_exact_zeros(self):
        h = 0.05
        estimate = convergence_order([(h, 1.6e-14), (h / 2, 0.0), (h / 4, 0.0)])
        assert estimate.floor_reached
        assert estimate.order is None

    def test_single_floor_sample_stops_the_fit(self):
        estimate = convergence_order([(0.1, 1e-6), (0.05, 2.5e-7), (0.025, 5e-14)])
        assert estimate.floor_reached

    @pytest.mark.parametrize(
        "samples",
        [
            [(0.1, 1.0), (0.05, 0.5)],
            [(0.1, 1.0), (0.2, 0.5), (0.05, 0.1)],
            [(0.1, 1.0), (0.0, 0.5), (-0.1, 0.1)],
        ],
    )
    def test_invalid_samples(self, samples):
        with pytest.raises(InvalidArgumentError):
            convergence_order(samples)


class TestEnergyContinuityOracle:
    def test_second_order_convergence(self, coherent_rho, space, mode_set, fixed_points):
        oracle = DenseTraceOracle(coherent_rho, space, mode_set)
        result = fd_energy_continuity(
            oracle, Convention.DERIVATION_13, fixed_points, random_points(1, seed=21)[0]
        )
        assert len(result.residuals) == 3
        assert result.residuals[2] < result.residuals[0]
        assert result.estimate.floor_reached or 1.8 <= result.estimate.order <= 2.2

    def test_vacuum_reaches_floor(self, vacuum_rho, space, mode_set, fixed_points):
        oracle = DenseTraceOracle(vacuum_rho, space, mode_set)
        result = fd_energy_continuity(oracle, Convention.PRINTED_22, fixed_points, SpacetimePoint())
        assert result.estimate.floor_reached


class TestGridQuadrature:
    def test_nyquist_grid(self, mode_set):
        assert nyquist_grid(mode_set) == 6

    def test_constant_integrand(self):
        value = grid_integral(lambda points: np.ones(len(points)), BOX, 4)
        assert value == pytest.approx(BOX**3)

    def test_too_coarse(self):
        with pytest.raises(InvalidArgumentError):
            grid_integral(lambda points: np.ones(len(points)), BOX, 1)

    def test_matches_exact_energy_integral(self, tensor_factory, coherent_rho, mode_set):
        tensors = tensor_factory(coherent_rho)
        report = integral_balance(
            CheckId.EQ24, tensors, BoxRegion.FULL_BOX, [0.0, 1.0, 2.0], 1e-10
        )

        def energy(points):
            e = evaluate_many(tensors.ebb, points)
            s = evaluate_many(tensors.sbb, points)
            axes = tuple(range(1, e.ndim))
            return np.sum(np.abs(e) ** 2, axis=axes) + np.sum(np.abs(s) ** 2, axis=axes)

        grid = float(grid_integral(energy, BOX, nyquist_grid(mode_set), 0.0))
        assert grid == pytest.approx(report.extras["initial_norm"], rel=1e-10)
