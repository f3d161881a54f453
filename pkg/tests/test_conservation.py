import numpy as np
import pytest
from hypothesis import given, settings

from qclab.core.exceptions import InvalidArgumentError
from qclab.models.schemas import (
    CURL_IDS,
    DIVERGENCE_IDS,
    BoxRegion,
    CheckId,
    Convention,
    SignConvention,
    Verdict,
)
from qclab.services.correlation.conservation import (
    CoherenceTensors,
    angular_split,
    angular_split_report,
    build_report,
    continuity_residual,
    curl_divergence_residual,
    density_bundle,
    helicity_residual,
    integral_balance,
    is_pass_fail,
    operator_maxwell_residual,
    potential_residual,
    sandwich_residual,
)
from qclab.services.quantum.fock import build_fock_space, make_state
from qclab.services.quantum.modes import build_mode_set

from conftest import BOX, coherent, point_strategy, random_points

TIMES = list(np.linspace(0.0, 2 * np.pi, 9))


def _c2_tensors() -> CoherenceTensors:
    ms = build_mode_set(BOX, [((1, 0, 0), 1), ((0, 1, 1), 2)], c=2.0)
    space = build_fock_space(2, [5, 5])
    rho = make_state(space, coherent((0.3, 0.0), (0.2, 0.25)))
    return CoherenceTensors.build(Convention.DERIVATION_13, rho, space, ms, random_points(3, seed=4))


# shared by hypothesis examples, which cannot take function-scoped fixtures
TENSORS_C2 = _c2_tensors()


class TestVerdicts:
    def test_pass_fail_classification(self):
        assert is_pass_fail(CheckId.EQ7, Convention.DERIVATION_13)
        assert is_pass_fail(CheckId.EQ7, None)
        assert not is_pass_fail(CheckId.EQ7, Convention.PRINTED_22)
        assert is_pass_fail(CheckId.EQ11, Convention.PRINTED_22)
        assert is_pass_fail(CheckId.ORACLE_DENSE, Convention.PRINTED_22)

    def test_zero_scale_and_zero_residual_pass(self):
        report = build_report(CheckId.EQ23, Convention.DERIVATION_13, "vacuum", 0.0, 0.0, 1e-10)
        assert report.relative == 0.0
        assert report.verdict is Verdict.PASS

    def test_zero_scale_uses_absolute_residual(self):
        report = build_report(CheckId.EQ23, Convention.DERIVATION_13, "s", 1e-3, 0.0, 1e-10)
        assert report.relative == pytest.approx(1e-3)
        assert report.verdict is Verdict.FAIL

    def test_printed_failure_is_reported_only(self):
        report = build_report(CheckId.EQ15, Convention.PRINTED_22, "s", 1.0, 1.0, 1e-12)
        assert report.verdict is Verdict.REPORTED_ONLY


class TestOperatorMaxwell:
    def test_passes_at_sample_points(self, space, mode_set, sample_points):
        report = operator_maxwell_residual(space, mode_set, sample_points, 1e-12)
        assert report.verdict is Verdict.PASS
        assert report.state == "*"
        assert report.convention is None
        assert set(report.extras) == {"eq2", "eq3", "eq4", "eq5"}
        assert len(report.point_residuals) == len(sample_points)


class TestCurlDivergence:
    @pytest.mark.parametrize("check", CURL_IDS + DIVERGENCE_IDS)
    def test_derivation_convention_closes(self, check, tensor_factory, coherent_rho, sample_points):
        report = curl_divergence_residual(check, tensor_factory(coherent_rho), sample_points, 1e-12)
        assert report.verdict is Verdict.PASS, report.relative
        assert report.scale > 0

    @pytest.mark.parametrize("check", DIVERGENCE_IDS)
    def test_divergences_close_in_printed_convention(
        self, check, tensor_factory, mixture_rho, sample_points
    ):
        tensors = tensor_factory(mixture_rho, Convention.PRINTED_22)
        report = curl_divergence_residual(check, tensors, sample_points, 1e-12)
        assert report.verdict is Verdict.PASS

    def test_printed_curl_system_is_reported_only(self, tensor_factory, coherent_rho, sample_points):
        tensors = tensor_factory(coherent_rho, Convention.PRINTED_22)
        report = curl_divergence_residual(CheckId.EQ15, tensors, sample_points, 1e-12)
        assert report.verdict is Verdict.REPORTED_ONLY
        assert report.relative > 1e-6

    @pytest.mark.parametrize("convention", list(Convention))
    def test_vacuum_and_single_photon_are_exact_zero(
        self, convention, tensor_factory, vacuum_rho, fock1_rho, sample_points
    ):
        for rho in (vacuum_rho, fock1_rho):
            report = curl_divergence_residual(
                CheckId.EQ15, tensor_factory(rho, convention), sample_points, 1e-12
            )
            assert report.residual_norm == 0.0
            assert report.relative == 0.0
            assert report.verdict is not Verdict.FAIL

    def test_speed_of_light_two(self, mode_set_c2, tensor_factory, coherent_rho, sample_points):
        tensors = tensor_factory(coherent_rho, ms=mode_set_c2)
        for check in (CheckId.EQ15, CheckId.EQ16, CheckId.EQ7):
            assert curl_divergence_residual(check, tensors, sample_points, 1e-12).verdict is Verdict.PASS

    def test_not_a_curl_identity(self, tensor_factory, coherent_rho, sample_points):
        with pytest.raises(InvalidArgumentError):
            curl_divergence_residual(CheckId.EQ23, tensor_factory(coherent_rho), sample_points, 1e-12)


class TestSandwich:
    @pytest.mark.parametrize("check", [CheckId.EQ2_SANDWICH, CheckId.EQ3_SANDWICH])
    @pytest.mark.parametrize("convention", list(Convention))
    def test_closes_in_both_conventions(
        self, check, convention, tensor_factory, coherent_rho, sample_points
    ):
        report = sandwich_residual(check, tensor_factory(coherent_rho, convention), sample_points, 1e-12)
        assert report.verdict is Verdict.PASS
        assert report.scale > 0

    def test_rejects_other_checks(self, tensor_factory, coherent_rho, sample_points):
        with pytest.raises(InvalidArgumentError):
            sandwich_residual(CheckId.EQ7, tensor_factory(coherent_rho), sample_points, 1e-12)


class TestDensities:
    @given(p=point_strategy)
    @settings(max_examples=25, deadline=None)
    def test_bundle_structure(self, p):
        tensors = TENSORS_C2
        bundle = density_bundle(tensors, p)
        assert bundle.energy >= 0.0
        np.testing.assert_allclose(bundle.flow, tensors.c**2 * bundle.momentum, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(bundle.stress, bundle.stress.T, atol=1e-15)
        offset = p.position - tensors.ms.box_centre
        np.testing.assert_allclose(bundle.angular, np.cross(offset, bundle.momentum), atol=1e-14)

    def test_vacuum_densities_vanish(self, tensor_factory, vacuum_rho):
        bundle = density_bundle(tensor_factory(vacuum_rho), random_points(1)[0])
        assert bundle.energy == 0.0
        assert not bundle.flow.any()
        assert not bundle.stress.any()


class TestContinuity:
    def test_energy_closes_with_printed_sign(self, tensor_factory, coherent_rho, sample_points):
        report = continuity_residual(CheckId.EQ23, tensor_factory(coherent_rho), sample_points, 1e-10)
        assert report.verdict is Verdict.PASS
        assert report.sign_convention is SignConvention.PRINTED

    @pytest.mark.parametrize("check", [CheckId.EQ27, CheckId.EQ36])
    def test_momentum_and_angular_close_with_flipped_sign(
        self, check, tensor_factory, mixture_rho, sample_points
    ):
        report = continuity_residual(check, tensor_factory(mixture_rho), sample_points, 1e-10)
        assert report.verdict is Verdict.PASS
        assert report.sign_convention is SignConvention.FLIPPED

    def test_forced_printed_sign_fails_momentum(self, tensor_factory, coherent_rho, sample_points):
        report = continuity_residual(
            CheckId.EQ27, tensor_factory(coherent_rho), sample_points, 1e-10, sign_policy="printed"
        )
        assert report.sign_convention is SignConvention.PRINTED
        assert report.verdict is Verdict.FAIL

    def test_angular_continuity_with_explicit_origin(
        self, tensor_factory, coherent_rho, sample_points
    ):
        report = continuity_residual(
            CheckId.EQ36, tensor_factory(coherent_rho), sample_points, 1e-10, r0=(0.0, 1.0, 2.0)
        )
        assert report.verdict is Verdict.PASS

    def test_speed_of_light_two(self, mode_set_c2, tensor_factory, coherent_rho, sample_points):
        tensors = tensor_factory(coherent_rho, ms=mode_set_c2)
        for check in (CheckId.EQ23, CheckId.EQ27):
            assert continuity_residual(check, tensors, sample_points, 1e-10).verdict is Verdict.PASS

    def test_printed_convention_is_reported_only(self, tensor_factory, coherent_rho, sample_points):
        tensors = tensor_factory(coherent_rho, Convention.PRINTED_22)
        report = continuity_residual(CheckId.EQ23, tensors, sample_points, 1e-10)
        assert report.verdict in (Verdict.REPORTED_ONLY, Verdict.PASS)
        assert report.verdict is not Verdict.FAIL

    def test_rejects_other_checks(self, tensor_factory, coherent_rho, sample_points):
        with pytest.raises(InvalidArgumentError):
            continuity_residual(CheckId.EQ24, tensor_factory(coherent_rho), sample_points, 1e-10)


class TestIntegralBalance:
    def test_full_box_energy_is_constant(self, tensor_factory, coherent_rho):
        report = integral_balance(
            CheckId.EQ24, tensor_factory(coherent_rho), BoxRegion.FULL_BOX, TIMES, 1e-10
        )
        assert report.verdict is Verdict.PASS
        assert report.extras["initial_norm"] > 0
        assert report.extras["samples"] == len(TIMES)

    def test_half_box_momentum_balance(self, tensor_factory, coherent_rho):
        report = integral_balance(
            CheckId.EQ28, tensor_factory(coherent_rho), BoxRegion.HALF_BOX, TIMES, 1e-10
        )
        assert report.verdict is Verdict.PASS
        assert report.sign_convention is SignConvention.FLIPPED
        assert report.extras["surface_flux_norm"] > 0
        if not report.extras["fd_floor_reached"]:
            assert 1.8 <= report.extras["fd_order"] <= 2.2
        assert report.extras["fd_relative_h2"] < report.extras["fd_relative_h0"]

    def test_half_box_energy_balance(self, tensor_factory, mixture_rho):
        report = integral_balance(
            CheckId.EQ24, tensor_factory(mixture_rho), BoxRegion.HALF_BOX, TIMES, 1e-10
        )
        assert report.verdict is Verdict.PASS
        assert report.sign_convention is SignConvention.PRINTED

    def test_too_few_times(self, tensor_factory, coherent_rho):
        with pytest.raises(InvalidArgumentError, match="at least 3"):
            integral_balance(
                CheckId.EQ24, tensor_factory(coherent_rho), BoxRegion.FULL_BOX, [0.0, 1.0], 1e-10
            )

    def test_rejects_other_checks(self, tensor_factory, coherent_rho):
        with pytest.raises(InvalidArgumentError):
            integral_balance(
                CheckId.EQ23, tensor_factory(coherent_rho), BoxRegion.FULL_BOX, TIMES, 1e-10
            )


class TestPotentialAndAngular:
    @pytest.mark.parametrize("convention", list(Convention))
    def test_potential(self, convention, tensor_factory, coherent_rho):
        report = potential_residual(tensor_factory(coherent_rho, convention), 1e-13, "coherent")
        assert report.verdict is Verdict.PASS
        assert report.extras["curl_mismatch"] <= report.scale * 1e-13

    def test_split_closes_with_boundary_term(self, tensor_factory, coherent_rho):
        split = angular_split(tensor_factory(coherent_rho))
        assert split.scale > 0
        assert split.closure_residual / split.scale < 1e-10
        report = angular_split_report(split, Convention.DERIVATION_13, 1e-10, "coherent")
        assert report.verdict is Verdict.PASS
        assert {"total_x", "spin_z", "boundary_y", "two_term_residual"} <= set(report.extras)

    def test_vacuum_split_is_zero(self, tensor_factory, vacuum_rho):
        split = angular_split(tensor_factory(vacuum_rho))
        assert split.scale == 0.0
        report = angular_split_report(split, Convention.DERIVATION_13, 1e-10)
        assert report.verdict is Verdict.PASS


class TestHelicity:
    MODES = build_mode_set(BOX, [((0, 0, 1), 1), ((0, 0, 1), 2)])
    SPACE = build_fock_space(2, [10, 10])

    def split(self, second: float, fixed_points):
        rho = make_state(self.SPACE, coherent((0.5, 0.0), (0.0, second)))
        tensors = CoherenceTensors.build(
            Convention.DERIVATION_13, rho, self.SPACE, self.MODES, fixed_points
        )
        return angular_split(tensors)

    def test_reversed_helicity_negates_spin(self, fixed_points):
        left, right = self.split(0.25, fixed_points), self.split(-0.25, fixed_points)
        assert abs(left.spin[2]) > 1e-6
        assert np.linalg.norm(left.spin[:2]) < 1e-12 * abs(left.spin[2])
        report = helicity_residual(left, right, Convention.DERIVATION_13, ("left", "right"), 1e-10)
        assert report.verdict is Verdict.PASS
        assert report.state == "left|right"
        assert report.extras["spin_z_left"] == pytest.approx(-report.extras["spin_z_right"])

    def test_same_helicity_fails(self, fixed_points):
        left = self.split(0.25, fixed_points)
        report = helicity_residual(left, left, Convention.DERIVATION_13, ("a", "b"), 1e-10)
        assert report.verdict is Verdict.FAIL


def _shifted(points, tau):
    return [p.shifted("t", tau) for p in points]


class TestTimeTranslation:
    @pytest.mark.parametrize("tau", [0.0, 3.7, -1.25])
    @pytest.mark.parametrize("check", [CheckId.EQ7, CheckId.EQ23, CheckId.EQ27])
    def test_residuals_survive_a_global_time_shift(
        self, check, tau, tensor_factory, coherent_rho, fixed_points, sample_points
    ):
        tensors = tensor_factory(coherent_rho, points=_shifted(fixed_points, tau))
        points = _shifted(sample_points, tau)
        if check is CheckId.EQ7:
            report = curl_divergence_residual(check, tensors, points, 1e-12)
        else:
            report = continuity_residual(check, tensors, points, 1e-10)
        assert report.verdict is Verdict.PASS
        assert report.relative < 1e-11
        if check is CheckId.EQ27:
            assert report.sign_convention is SignConvention.FLIPPED
