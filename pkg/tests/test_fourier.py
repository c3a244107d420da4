import numpy as np
import pytest

from oracles import brute_force_dft, brute_force_dft_2d

from fourierpairs.errors import InvalidInputError, ResourceLimitError
from fourierpairs.fourier import (
    SpectrumPair,
    build_operator,
    build_operator_2d,
    forward,
    image_to_vec,
    inverse,
    signed_frequency_indices,
    vec_to_image,
)


class TestBuildOperator:
    def test_n2_closed_form(self):
        op = build_operator(2)
        np.testing.assert_allclose(
            op.real_part, np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        )
        np.testing.assert_array_equal(op.imag_part, np.zeros((2, 2)))

    def test_n4_single_entry(self):
        op = build_operator(4)
        assert op.imag_part[1, 1] == pytest.approx(-0.5, abs=1e-15)

    def test_unitarity_for_every_size_up_to_256(self):
        for size in range(2, 257):
            op = build_operator(size)
            gram = op.real_part.T @ op.real_part + op.imag_part.T @ op.imag_part
            assert np.abs(gram - np.eye(size)).max() < 1e-10, f"size {size}"

    @pytest.mark.parametrize("size", [3, 8, 17, 64])
    def test_column_parity_exact(self, size):
        op = build_operator(size)
        for k in range(1, size):
            np.testing.assert_array_equal(op.real_part[:, k], op.real_part[:, size - k])
            np.testing.assert_array_equal(op.imag_part[:, k], -op.imag_part[:, size - k])

    def test_signed_frequency_map(self):
        np.testing.assert_array_equal(
            signed_frequency_indices(8), [0, 1, 2, 3, -4, -3, -2, -1]
        )
        np.testing.assert_array_equal(signed_frequency_indices(5), [0, 1, 2, -2, -1])

    def test_rejects_short_transform(self):
        with pytest.raises(InvalidInputError):
            build_operator(1)


class TestForwardInverse:
    def test_zero_maps_to_zero(self):
        op = build_operator(8)
        spec = forward(op, np.zeros(8))
        np.testing.assert_array_equal(spec.real, np.zeros(8))
        np.testing.assert_array_equal(spec.imag, np.zeros(8))

    def test_constant_concentrates_at_dc(self):
        op = build_operator(16)
        spec = forward(op, np.full(16, 3.0))
        assert spec.real[0] == pytest.approx(3.0 * np.sqrt(16), abs=1e-12)
        assert np.abs(spec.real[1:]).max() < 1e-12
        assert np.abs(spec.imag).max() < 1e-12

    def test_matches_brute_force_summation(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(64)
        spec = forward(build_operator(64), x)
        ref = brute_force_dft(x)
        assert np.abs(spec.real - ref.real).max() < 1e-10
        assert np.abs(spec.imag - ref.imag).max() < 1e-10

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(128)
        op = build_operator(128)
        back = inverse(op, forward(op, x))
        assert np.abs(back - x).max() < 1e-10

    def test_inverse_of_zero_and_constant(self):
        op = build_operator(8)
        np.testing.assert_array_equal(
            inverse(op, SpectrumPair(np.zeros(8), np.zeros(8))), np.zeros(8)
        )
        const = np.full(8, -2.5)
        np.testing.assert_allclose(
            inverse(op, forward(op, const)), const, rtol=0, atol=1e-12
        )

    def test_length_mismatch(self):
        op = build_operator(8)
        with pytest.raises(InvalidInputError):
            forward(op, np.zeros(9))
        with pytest.raises(InvalidInputError):
            inverse(op, SpectrumPair(np.zeros(9), np.zeros(9)))


class TestOperator2D:
    def test_all_ones_image_is_a_dc_spike(self):
        op = build_operator_2d(2)
        spec = forward(op, image_to_vec(np.ones((2, 2))))
        assert spec.real[0] == pytest.approx(2.0, abs=1e-12)
        assert np.abs(spec.real[1:]).max() < 1e-12
        assert np.abs(spec.imag).max() < 1e-12

    def test_matches_per_axis_application(self):
        rng = np.random.default_rng(3)
        image = rng.standard_normal((8, 8))
        spec = forward(build_operator_2d(8), image_to_vec(image))
        ref = brute_force_dft_2d(image)
        assert np.abs(vec_to_image(spec.real, 8) - ref.real).max() < 1e-9
        assert np.abs(vec_to_image(spec.imag, 8) - ref.imag).max() < 1e-9

    def test_zero_image(self):
        op = build_operator_2d(4)
        spec = forward(op, np.zeros(16))
        assert not spec.real.any() and not spec.imag.any()

    @pytest.mark.parametrize("side", [2, 4, 8])
    def test_kronecker_consistency(self, side):
        rng = np.random.default_rng(side)
        image = rng.standard_normal((side, side))
        spec = forward(build_operator_2d(side), image_to_vec(image))
        ref = brute_force_dft_2d(image)
        assert np.abs(spec.real - ref.real.ravel()).max() < 1e-9
        assert np.abs(spec.imag - ref.imag.ravel()).max() < 1e-9

    def test_round_trip_2d(self):
        rng = np.random.default_rng(5)
        image = rng.standard_normal((6, 6))
        op = build_operator_2d(6)
        back = inverse(op, forward(op, image_to_vec(image)))
        assert np.abs(back - image.ravel()).max() < 1e-10

    def test_frequency_pairs(self):
        op = build_operator_2d(4)
        # vec index side*kr + kc carries the signed pair (kr, kc)
        np.testing.assert_array_equal(op.freq_pairs[0], [0, 0])
        np.testing.assert_array_equal(op.freq_pairs[4 * 2 + 3], [-2, -1])

    def test_size_bounds(self):
        with pytest.raises(InvalidInputError):
            build_operator_2d(1)
        with pytest.raises(ResourceLimitError):
            build_operator_2d(65)
