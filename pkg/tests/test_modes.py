import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qclab.core.exceptions import InvalidArgumentError
from qclab.models.schemas import AmplitudeConvention, FieldKind, Sign, SpacetimePoint
from qclab.services.quantum.modes import (
    build_mode_set,
    derivative_factor,
    mode_derivative,
    mode_function,
    polarization_vectors,
)

from conftest import BOX, point_strategy

index_strategy = st.tuples(*(st.integers(min_value=-3, max_value=3) for _ in range(3)))


class TestModeSet:
    @given(n=index_strategy, pol_index=st.sampled_from([1, 2]), c=st.sampled_from([1.0, 2.0]))
    @settings(max_examples=60, deadline=None)
    def test_dispersion_and_transversality(self, n, pol_index, c):
        assume(n != (0, 0, 0))
        mode = build_mode_set(BOX, [(n, pol_index)], c=c).modes[0]
        assert mode.omega == pytest.approx(c * np.linalg.norm(mode.k))
        assert np.linalg.norm(mode.pol) == pytest.approx(1.0)
        assert abs(mode.pol @ mode.k) < 1e-12

    @given(n=index_strategy)
    @settings(max_examples=60, deadline=None)
    def test_polarisations_are_right_handed(self, n):
        assume(n != (0, 0, 0))
        assume(not (n[0] == 0 and n[1] == 0 and n[2] < 0))
        k = np.asarray(n, dtype=float)
        pol1, pol2 = polarization_vectors(k)
        assert abs(pol1 @ pol2) < 1e-12
        np.testing.assert_allclose(np.cross(pol1, pol2), k / np.linalg.norm(k), atol=1e-12)

    def test_axis_aligned_polarisations(self):
        pol1, pol2 = polarization_vectors(np.array([0.0, 0.0, 1.0]))
        np.testing.assert_array_equal(pol1, [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(pol2, [0.0, 1.0, 0.0])

    def test_physical_amplitude(self):
        ms = build_mode_set(BOX, [((1, 0, 0), 1)], convention=AmplitudeConvention.PHYSICAL, hbar=2.0)
        mode = ms.modes[0]
        assert mode.amplitude == pytest.approx(math.sqrt(2 * math.pi * 2.0 * mode.omega / BOX**3))

    def test_derived_lengths(self, mode_set):
        assert mode_set.min_wavelength == pytest.approx(BOX / math.sqrt(2))
        assert mode_set.longest_period == pytest.approx(2 * math.pi)
        np.testing.assert_allclose(mode_set.box_centre, [math.pi] * 3)

    @pytest.mark.parametrize(
        "entries",
        [
            [((0, 0, 0), 1)],
            [((1, 0, 0), 3)],
            [((1, 0, 0), 1), ((1, 0, 0), 1)],
        ],
    )
    def test_invalid_entries(self, entries):
        with pytest.raises(InvalidArgumentError):
            build_mode_set(BOX, entries)

    def test_non_positive_box(self):
        with pytest.raises(InvalidArgumentError):
            build_mode_set(0.0, [((1, 0, 0), 1)])


class TestModeFunctions:
    def test_field_vectors(self):
        mode = build_mode_set(BOX, [((0, 0, 1), 1)], c=2.0).modes[0]
        np.testing.assert_allclose(mode.field_vector(FieldKind.E), [1j, 0, 0])
        np.testing.assert_allclose(mode.field_vector(FieldKind.B), [0, 1j, 0])
        np.testing.assert_allclose(mode.field_vector(FieldKind.A), [1.0, 0, 0])

    @given(p=point_strategy)
    @settings(max_examples=30, deadline=None)
    def test_minus_is_conjugate_of_plus(self, p):
        mode = build_mode_set(BOX, [((1, 2, 0), 2)]).modes[0]
        for field in FieldKind:
            np.testing.assert_allclose(
                mode_function(mode, field, Sign.MINUS, p),
                mode_function(mode, field, Sign.PLUS, p).conj(),
                atol=1e-15,
            )

    @pytest.mark.parametrize("axis", ["x", "y", "z", "t"])
    @pytest.mark.parametrize("sign", [Sign.PLUS, Sign.MINUS])
    def test_derivative_matches_central_difference(self, axis, sign):
        mode = build_mode_set(BOX, [((1, -1, 2), 1)], c=2.0).modes[0]
        p = SpacetimePoint(r=(0.4, 1.3, 2.2), t=0.7)
        h = 1e-5

        def f(q):
            return mode_function(mode, FieldKind.B, sign, q)

        numeric = (f(p.shifted(axis, h)) - f(p.shifted(axis, -h))) / (2 * h)
        exact = mode_derivative(mode, FieldKind.B, sign, p, axis)
        np.testing.assert_allclose(exact, numeric, atol=1e-8)

    def test_second_derivative_in_time(self):
        mode = build_mode_set(BOX, [((1, 1, 0), 1)]).modes[0]
        p = SpacetimePoint(r=(1.0, 2.0, 3.0), t=0.1)
        second = mode_derivative(mode, FieldKind.E, Sign.PLUS, p, "t", order=2)
        np.testing.assert_allclose(
            second, -(mode.omega**2) * mode_function(mode, FieldKind.E, Sign.PLUS, p), atol=1e-14
        )

    def test_unknown_axis(self):
        mode = build_mode_set(BOX, [((1, 0, 0), 1)]).modes[0]
        with pytest.raises(InvalidArgumentError):
            derivative_factor(mode, Sign.PLUS, "w")
