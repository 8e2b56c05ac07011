import numpy as np
import pytest

from gesturemix import (
    DataError,
    FeatureMatrix,
    GestureVideo,
    NormalizationStats,
    apply_normalization,
    compute_variances,
    fit_normalization,
    invert_normalization,
)
from gesturemix.landmarks import LANDMARK_COUNT, STD_FLOOR


def make_video(frames, source_id="vid", label=None):
    return GestureVideo(frames=np.asarray(frames, dtype=float), source_id=source_id, label=label)


def two_pass_variance(frames):
    """Oracle: textbook two-pass population variance, plain Python loops."""
    n_frames = len(frames)
    out = np.zeros((LANDMARK_COUNT, 3))
    for lm in range(LANDMARK_COUNT):
        for c in range(3):
            values = [frames[t][lm][c] for t in range(n_frames)]
            mean = sum(values) / n_frames
            out[lm, c] = sum((v - mean) ** 2 for v in values) / n_frames
    return out


class TestComputeVariances:
    def test_identical_frames_give_zeros(self):
        video = make_video(np.full((5, 21, 3), 0.25))
        feat = compute_variances(video)
        assert np.all(feat.rows == 0.0)

    def test_two_frames_single_moving_landmark(self):
        frames = np.zeros((2, 21, 3))
        frames[1, 0, 0] = 2.0  # landmark 0, x in {0, 2}
        feat = compute_variances(make_video(frames))
        assert feat.rows[0, 0] == 1.0  # mean 1, deviations +-1, divisor 2
        expected = np.zeros((21, 3))
        expected[0, 0] = 1.0
        assert np.array_equal(feat.rows, expected)

    def test_sinusoid_matches_two_pass_oracle(self):
        t = np.arange(150)
        frames = np.empty((150, 21, 3))
        for lm in range(21):
            for c in range(3):
                frames[:, lm, c] = 0.3 * np.sin(2 * np.pi * (lm + 1) * t / 150 + 0.1 * c)
        feat = compute_variances(make_video(frames))
        assert np.allclose(feat.rows, two_pass_variance(frames), atol=1e-13, rtol=0)

    def test_propagates_source_id_and_label(self):
        video = make_video(np.random.default_rng(0).random((4, 21, 3)), "abc", "wave")
        feat = compute_variances(video)
        assert feat.source_id == "abc"
        assert feat.label == "wave"

    def test_frame_order_invariance(self):
        rng = np.random.default_rng(42)
        frames = rng.normal(size=(30, 21, 3))
        shuffled = frames[rng.permutation(30)]
        a = compute_variances(make_video(frames)).rows
        b = compute_variances(make_video(shuffled)).rows
        assert np.allclose(a, b, atol=1e-12, rtol=0)

    def test_translation_invariance(self):
        rng = np.random.default_rng(7)
        frames = rng.normal(size=(20, 21, 3))
        offset = np.array([5.0, -3.0, 11.0])
        a = compute_variances(make_video(frames)).rows
        b = compute_variances(make_video(frames + offset)).rows
        assert np.allclose(a, b, atol=1e-12, rtol=0)


class TestVideoValidation:
    def test_single_frame_rejected(self):
        with pytest.raises(DataError):
            make_video(np.zeros((1, 21, 3)))

    def test_wrong_landmark_count_rejected(self):
        with pytest.raises(DataError):
            make_video(np.zeros((5, 20, 3)))

    def test_nan_rejected(self):
        frames = np.zeros((3, 21, 3))
        frames[1, 4, 2] = np.nan
        with pytest.raises(DataError):
            make_video(frames)


def matrix_of(value, source_id="m", label=None):
    return FeatureMatrix(rows=np.full((21, 3), float(value)), source_id=source_id, label=label)


class TestFitNormalization:
    def test_constant_features_hit_std_floor(self):
        stats = fit_normalization([matrix_of(0.7)])
        assert np.allclose(stats.mean, 0.7)
        assert np.all(stats.std == STD_FLOOR)

    def test_symmetric_two_value_column(self):
        lo, hi = matrix_of(0.0), matrix_of(2.0)
        stats = fit_normalization([lo, hi])
        assert np.allclose(stats.mean, 1.0)
        assert np.allclose(stats.std, 1.0)  # population std of {0, 2}

    def test_matches_streaming_oracle(self):
        # Welford accumulation, one row at a time.
        rng = np.random.default_rng(3)
        features = [
            FeatureMatrix(rows=rng.random((21, 3)), source_id=f"v{i}") for i in range(80)
        ]
        count = 0
        mean = np.zeros(3)
        m2 = np.zeros(3)
        for feat in features:
            for row in feat.rows:
                count += 1
                delta = row - mean
                mean = mean + delta / count
                m2 = m2 + delta * (row - mean)
        stats = fit_normalization(features)
        assert np.allclose(stats.mean, mean, rtol=1e-12, atol=1e-15)
        assert np.allclose(stats.std, np.sqrt(m2 / count), rtol=1e-9, atol=1e-15)

    def test_empty_list_rejected(self):
        with pytest.raises(DataError):
            fit_normalization([])


class TestApplyNormalization:
    def test_column_mean_maps_to_zero(self):
        stats = NormalizationStats(mean=np.array([1.0, 2.0, 3.0]), std=np.array([2.0, 2.0, 2.0]))
        feat = FeatureMatrix(rows=np.tile([1.0, 2.0, 3.0], (21, 1)), source_id="m")
        out = apply_normalization(feat, stats)
        assert np.all(out.rows == 0.0)
        assert out.normalized

    def test_identity_stats_preserve_values(self):
        stats = NormalizationStats(mean=np.zeros(3), std=np.ones(3))
        feat = FeatureMatrix(rows=np.random.default_rng(1).random((21, 3)), source_id="m")
        out = apply_normalization(feat, stats)
        assert np.array_equal(out.rows, feat.rows)

    def test_round_trip_with_invert(self):
        rng = np.random.default_rng(5)
        features = [FeatureMatrix(rows=rng.random((21, 3)), source_id=f"v{i}") for i in range(4)]
        stats = fit_normalization(features)
        for feat in features:
            back = invert_normalization(apply_normalization(feat, stats), stats)
            assert np.allclose(back.rows, feat.rows, atol=1e-12, rtol=0)
            assert not back.normalized

    def test_self_fit_set_is_standardized(self):
        rng = np.random.default_rng(9)
        features = [FeatureMatrix(rows=rng.random((21, 3)), source_id=f"v{i}") for i in range(10)]
        stats = fit_normalization(features)
        stacked = np.vstack([apply_normalization(f, stats).rows for f in features])
        assert np.allclose(stacked.mean(axis=0), 0.0, atol=1e-9)
        assert np.allclose(stacked.std(axis=0), 1.0, atol=1e-9)


class TestFeatureMatrixValidation:
    def test_negative_variance_rejected(self):
        rows = np.zeros((21, 3))
        rows[3, 1] = -0.5
        with pytest.raises(DataError):
            FeatureMatrix(rows=rows, source_id="bad")

    def test_negative_allowed_when_normalized(self):
        rows = np.zeros((21, 3))
        rows[3, 1] = -0.5
        feat = FeatureMatrix(rows=rows, source_id="ok", normalized=True)
        assert feat.rows[3, 1] == -0.5

    def test_wrong_shape_rejected(self):
        with pytest.raises(DataError):
            FeatureMatrix(rows=np.zeros((20, 3)), source_id="bad")

    def test_nonpositive_std_rejected(self):
        with pytest.raises(DataError):
            NormalizationStats(mean=np.zeros(3), std=np.array([1.0, 0.0, 1.0]))
