import numpy as np
import pytest

from oracles import dense_observation_rows

from fourierpairs.errors import InvalidInputError
from fourierpairs.fourier import forward
from fourierpairs.kernels import KernelSpec, SQUARED_EXPONENTIAL, TimeGrid
from fourierpairs.model import build_model, sample_pair
from fourierpairs.observation import (
    ObservationSet,
    SpectralObservations,
    TemporalObservations,
    apply_observation,
    assemble,
    corrupt,
    fraction_to_count,
    make_selection,
)


def se_model(size, alpha=None):
    alpha = alpha if alpha is not None else 0.001 * size**2
    return build_model(
        TimeGrid.regular(size),
        KernelSpec(family=SQUARED_EXPONENTIAL, sigma2=1.0, alpha=alpha),
    )


class TestSelection:
    def test_full_selection_is_identity(self):
        sel = make_selection(6, np.arange(6))
        np.testing.assert_array_equal(sel.dense(), np.eye(6))

    def test_empty_selection(self):
        sel = make_selection(6, [])
        assert sel.count == 0
        assert sel.dense().shape == (6, 0)

    def test_dense_has_one_entry_per_column(self):
        sel = make_selection(8, [1, 5])
        dense = sel.dense()
        assert dense.sum() == 2
        assert dense[1, 0] == 1.0 and dense[5, 1] == 1.0

    def test_invalid_indices(self):
        with pytest.raises(InvalidInputError):
            make_selection(8, [3, 3])
        with pytest.raises(InvalidInputError):
            make_selection(8, [5, 2])
        with pytest.raises(InvalidInputError):
            make_selection(8, [7, 8])
        with pytest.raises(InvalidInputError):
            make_selection(8, [-1, 2])


class TestAssemble:
    def test_full_temporal_observation(self):
        model = se_model(16)
        obs = ObservationSet(
            temporal=TemporalObservations(
                make_selection(16, np.arange(16)), np.zeros(16), 0.3
            )
        )
        system = assemble(model, obs)
        np.testing.assert_array_equal(system.matrix, np.eye(16))
        np.testing.assert_array_equal(system.noise, np.full(16, 0.3))

    def test_full_spectral_observation_reproduces_the_transform(self):
        model = se_model(16)
        sel = make_selection(16, np.arange(16))
        obs = ObservationSet(
            spectral=SpectralObservations(sel, np.zeros(16), np.zeros(16), 0.0)
        )
        system = assemble(model, obs)
        rng = np.random.default_rng(2)
        x = rng.standard_normal(16)
        spec = forward(model.op, x)
        np.testing.assert_allclose(
            system.matrix @ x, np.concatenate([spec.real, spec.imag]), atol=1e-12
        )

    def test_two_percent_row_count(self):
        size = 512
        count = fraction_to_count(size, 0.02)
        assert count == 10
        model = se_model(size)
        rng = np.random.default_rng(0)
        t_idx = np.sort(rng.choice(size, count, replace=False))
        f_idx = np.sort(rng.choice(size, count, replace=False))
        pair = sample_pair(model, seed=1)
        obs = corrupt(pair, t_idx, f_idx, 0.2, 0.2, seed=3)
        system = assemble(model, obs)
        assert system.matrix.shape == (30, size)
        assert obs.row_count == 30

    def test_gather_and_dense_paths_agree(self):
        model = se_model(32)
        rng = np.random.default_rng(9)
        t_idx = np.sort(rng.choice(32, 7, replace=False))
        f_idx = np.sort(rng.choice(32, 5, replace=False))
        pair = sample_pair(model, seed=4)
        obs = corrupt(pair, t_idx, f_idx, 0.1, 0.1, seed=5)
        x = rng.standard_normal(32)
        system = assemble(model, obs)
        np.testing.assert_allclose(
            apply_observation(model, obs, x), system.matrix @ x, atol=1e-12
        )
        np.testing.assert_allclose(
            system.matrix @ x, dense_observation_rows(model, obs) @ x, atol=1e-12
        )

    def test_noise_covariance_is_three_block_diagonal(self):
        model = se_model(16)
        pair = sample_pair(model, seed=0)
        obs = corrupt(pair, [0, 3], [1, 2, 5], 0.4, 0.7, seed=1)
        system = assemble(model, obs)
        dense = system.dense_noise()
        np.testing.assert_array_equal(
            np.diagonal(dense), [0.4, 0.4, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7]
        )
        assert not np.any(dense - np.diag(np.diagonal(dense)))

    def test_empty_set_is_rejected(self):
        model = se_model(8)
        with pytest.raises(InvalidInputError):
            assemble(model, ObservationSet())

    def test_dimension_mismatch(self):
        model = se_model(8)
        obs = ObservationSet(
            temporal=TemporalObservations(make_selection(9, [0]), np.zeros(1), 0.1)
        )
        with pytest.raises(InvalidInputError):
            assemble(model, obs)


class TestCorrupt:
    def test_zero_noise_full_indices_recovers_truth(self):
        model = se_model(32)
        pair = sample_pair(model, seed=11)
        full = np.arange(32)
        obs = corrupt(pair, full, full, 0.0, 0.0, seed=12)
        np.testing.assert_array_equal(obs.temporal.values, pair.signal)
        np.testing.assert_array_equal(obs.spectral.real_values, pair.spectrum.real)
        np.testing.assert_array_equal(obs.spectral.imag_values, pair.spectrum.imag)

    def test_seeded_reproducibility(self):
        model = se_model(32)
        pair = sample_pair(model, seed=11)
        a = corrupt(pair, [1, 4], [2, 9], 0.2, 0.2, seed=42)
        b = corrupt(pair, [1, 4], [2, 9], 0.2, 0.2, seed=42)
        np.testing.assert_array_equal(a.temporal.values, b.temporal.values)
        np.testing.assert_array_equal(a.spectral.real_values, b.spectral.real_values)
        np.testing.assert_array_equal(a.spectral.imag_values, b.spectral.imag_values)

    def test_noise_variance_calibration(self):
        size = 512
        model = se_model(size)
        pair = sample_pair(model, seed=6)
        count = fraction_to_count(size, 0.02)
        rng = np.random.default_rng(1)
        t_idx = np.sort(rng.choice(size, count, replace=False))
        errors = []
        for rep in range(200):
            obs = corrupt(pair, t_idx, [], 0.2, 0.0, seed=1000 + rep)
            errors.append(obs.temporal.values - pair.signal[t_idx])
        var = np.concatenate(errors).var()
        assert 0.8 * 0.2 < var < 1.2 * 0.2


class TestFractionToCount:
    def test_floor_with_minimum_of_one(self):
        assert fraction_to_count(512, 0.02) == 10
        assert fraction_to_count(10, 0.01) == 1
        assert fraction_to_count(100, 1.0) == 100

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidInputError):
            fraction_to_count(10, 0.0)
        with pytest.raises(InvalidInputError):
            fraction_to_count(10, 1.5)
