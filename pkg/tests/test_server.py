import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otapriv.config import paper_default_config
from otapriv.device import build_encoders
from otapriv.server import (
    MarginClassifier,
    average_pool,
    build_classifier,
    build_decoder,
    classify,
    classify_batch,
    compute_margin,
    decode,
    post_process,
    run_server,
)


class TestPostProcess:
    def test_unit_gamma_passthrough(self):
        y = np.array([1.0, 2.0])
        np.testing.assert_array_equal(post_process(y, 1.0), y)

    def test_scalar_division(self):
        np.testing.assert_allclose(post_process(np.array([4.0, 6.0]), 2.0),
                                   [2.0, 3.0])

    def test_inverse_pair(self):
        y = np.random.default_rng(0).standard_normal(5)
        back = post_process(post_process(y, 3.7), 1 / 3.7)
        np.testing.assert_allclose(back, y, atol=1e-12)

    def test_nonpositive_gamma_raises(self):
        with pytest.raises(ValueError):
            post_process(np.ones(2), 0.0)


class TestDecode:
    def test_identity_decoder(self):
        z = np.array([1.0, -1.0, 2.0])
        np.testing.assert_array_equal(decode(z, np.eye(3)), z)

    def test_noiseless_round_trip_recovers_rowspace_feature(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        dec = build_decoder(cfg, enc)
        f = enc[0].T @ np.random.default_rng(1).standard_normal(cfg.r)
        # identical features on every device, all p=1, w summing to 1:
        # aggregation returns z = W f exactly; decoding must return f
        z = enc[0] @ f
        np.testing.assert_allclose(decode(z, dec), f, atol=1e-9)

    def test_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(2)
        d_mat = rng.standard_normal((4, 3))
        z = rng.standard_normal(3)
        expected = np.zeros(4)
        for i in range(4):
            for j in range(3):
                expected[i] += d_mat[i, j] * z[j]
        np.testing.assert_allclose(decode(z, d_mat), expected, atol=1e-12)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError):
            decode(np.zeros(5), np.zeros((4, 3)))


class TestDecoderBuild:
    def test_transpose_is_encoder_transpose(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        np.testing.assert_array_equal(build_decoder(cfg, enc), enc[0].T)

    def test_pseudoinverse(self):
        cfg = dataclasses.replace(paper_default_config(),
                                  decoder="pseudoinverse")
        enc = build_encoders(cfg)
        np.testing.assert_allclose(build_decoder(cfg, enc),
                                   np.linalg.pinv(enc[0]), atol=1e-12)

    def test_transpose_rejects_per_device_encoders(self):
        cfg = dataclasses.replace(paper_default_config(),
                                  encoder="per_device_orthonormal")
        enc = build_encoders(cfg)
        with pytest.raises(ValueError):
            build_decoder(cfg, enc)


class TestAveragePool:
    def test_identical_vectors(self):
        v = np.array([1.0, 2.0])
        np.testing.assert_array_equal(average_pool([v, v]), v)

    def test_two_basis_vectors(self):
        out = average_pool([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        np.testing.assert_allclose(out, [0.5, 0.5])

    def test_matches_naive_mean(self):
        rng = np.random.default_rng(3)
        vecs = [rng.standard_normal(6) for _ in range(12)]
        expected = sum(vecs) / 12
        np.testing.assert_allclose(average_pool(vecs), expected, atol=1e-12)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            average_pool(np.zeros((0, 3)))


class TestClassify:
    def _clf(self):
        centroids = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0],
                              [4.0, 4.0], [2.0, -4.0], [-4.0, 2.0],
                              [8.0, 8.0], [6.0, -6.0]], dtype=float)
        return MarginClassifier(centroids, compute_margin(centroids))

    def test_exact_centroid(self):
        clf = self._clf()
        assert classify(clf.centroids[7], clf) == 7

    def test_tie_breaks_to_lowest_index(self):
        centroids = np.zeros((6, 2))
        centroids[2] = [2.0, 0.0]
        centroids[5] = [-2.0, 0.0]
        centroids[0] = [0.0, 50.0]
        centroids[1] = [0.0, 60.0]
        centroids[3] = [0.0, 70.0]
        centroids[4] = [0.0, 80.0]
        clf = MarginClassifier(centroids, 1.0)
        # origin is equidistant from centroids 2 and 5
        assert classify(np.zeros(2), clf) == 2

    def test_within_margin_is_correct(self):
        clf = self._clf()
        delta = clf.margin_delta
        f = clf.centroids[1] + np.array([0.0, 0.9 * delta])
        assert classify(f, clf) == 1

    def test_batch_matches_scalar(self):
        clf = self._clf()
        rng = np.random.default_rng(4)
        fs = rng.standard_normal((50, 2)) * 5
        batch = classify_batch(fs, clf)
        for i in range(50):
            assert batch[i] == classify(fs[i], clf)


class TestMargin:
    def test_two_centroids_distance_two(self):
        c = np.array([[0.0], [2.0]])
        assert compute_margin(c) == pytest.approx(1.0)

    def test_colinear_three(self):
        c = np.array([[0.0], [3.0], [10.0]])
        assert compute_margin(c) == pytest.approx(1.5)

    def test_matches_brute_force_pair_scan(self):
        rng = np.random.default_rng(5)
        c = rng.standard_normal((40, 8)) * 10
        best = min(
            np.linalg.norm(c[i] - c[j])
            for i in range(40) for j in range(i + 1, 40)
        )
        assert compute_margin(c) == pytest.approx(best / 2, rel=1e-12)

    def test_duplicates_raise(self):
        with pytest.raises(ValueError):
            compute_margin(np.zeros((2, 3)))

    def test_single_centroid_raises(self):
        with pytest.raises(ValueError):
            compute_margin(np.ones((1, 3)))


class TestBuildClassifier:
    def test_margin_equals_target_exactly(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        clf = build_classifier(cfg, enc)
        assert clf.centroids.shape == (40, cfg.d)
        assert compute_margin(clf.centroids) == pytest.approx(
            cfg.classifier.target_margin, rel=1e-12)

    def test_rowspace_centroids_survive_round_trip(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        clf = build_classifier(cfg, enc)
        dec = build_decoder(cfg, enc)
        recon = (clf.centroids @ enc[0].T) @ dec.T
        np.testing.assert_allclose(recon, clf.centroids, atol=1e-9)

    def test_deterministic(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        a = build_classifier(cfg, enc)
        b = build_classifier(cfg, enc)
        np.testing.assert_array_equal(a.centroids, b.centroids)


class TestRunServer:
    def test_noiseless_degenerate_recovers_label(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        dec = build_decoder(cfg, enc)
        clf = build_classifier(cfg, enc)
        y = enc[0] @ clf.centroids[13]
        f_hat, label = run_server(y, cfg.gamma, dec, clf)
        assert label == 13
        np.testing.assert_allclose(f_hat, clf.centroids[13], atol=1e-9)

    def test_same_input_same_output(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        dec = build_decoder(cfg, enc)
        clf = build_classifier(cfg, enc)
        y = np.random.default_rng(6).standard_normal(cfg.r)
        a = run_server(y, 1.0, dec, clf)
        b = run_server(y, 1.0, dec, clf)
        np.testing.assert_array_equal(a[0], b[0])
        assert a[1] == b[1]

    def test_gamma_scaling_inverse(self):
        cfg = paper_default_config()
        enc = build_encoders(cfg)
        dec = build_decoder(cfg, enc)
        clf = build_classifier(cfg, enc)
        y = np.random.default_rng(7).standard_normal(cfg.r)
        f1, l1 = run_server(y, 1.0, dec, clf)
        f2, l2 = run_server(2.5 * y, 2.5, dec, clf)
        np.testing.assert_allclose(f1, f2, atol=1e-12)
        assert l1 == l2
