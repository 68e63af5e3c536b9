import math

import numpy as np
import pytest
from scipy.optimize import brentq

from roadcov.descriptor import (CovarianceDescriptor, FeatureSet, covariance,
                                covariance_matrix, feature_tensor,
                                generalized_eigenvalues, spd_distance)


def covariance_two_pass_oracle(planes, sample=False):
    """Naive two-pass covariance: means first, then accumulate products."""
    h, w, d = planes.shape
    n = h * w
    flat = planes.reshape(n, d)
    means = [math.fsum(flat[:, u]) / n for u in range(d)]
    out = np.zeros((d, d))
    for u in range(d):
        for v in range(d):
            total = math.fsum((flat[i, u] - means[u]) * (flat[i, v] - means[v])
                              for i in range(n))
            out[u, v] = total / (n - 1 if sample else n)
    return out


def geneig_sign_sweep_oracle(c1, c2):
    """Roots of det(c1 - lam*c2) located by sign changes, then bisection.

    Returns None when the grid cannot isolate all d roots (near-multiple
    eigenvalues); callers resample in that case.
    """
    d = c1.shape[0]
    bound = float(np.trace(np.linalg.solve(c2, c1)))  # sum of the (positive) roots
    grid = np.linspace(0.0, bound * 1.0001, 20001)
    dets = np.linalg.det(c1[None, :, :] - grid[:, None, None] * c2[None, :, :])
    signs = np.sign(dets)
    brackets = [(grid[i], grid[i + 1])
                for i in range(len(grid) - 1)
                if signs[i] != 0 and signs[i + 1] != 0 and signs[i] != signs[i + 1]]
    if len(brackets) != d:
        return None
    roots = [brentq(lambda lam: np.linalg.det(c1 - lam * c2), lo, hi, xtol=1e-13)
             for lo, hi in brackets]
    return np.array(sorted(roots))


def random_spd(rng, d=5, ridge=0.1):
    m = rng.normal(size=(d, d))
    return m @ m.T + ridge * np.eye(d)


class TestFeatureTensor:
    def test_constant_region_has_zero_derivatives(self):
        ft = feature_tensor(np.full((6, 6), 50.0), FeatureSet.XY_GRAD_LAP)
        names = FeatureSet.XY_GRAD_LAP.channels
        for channel in ("grad_x", "grad_y", "laplacian"):
            assert np.array_equal(ft.planes[:, :, names.index(channel)],
                                  np.zeros((6, 6)))

    def test_ramp_gradient_value(self):
        # I(x, y) = x gives a constant 8 in the x-derivative interior.
        img = np.tile(np.arange(1.0, 8.0), (7, 1))
        ft = feature_tensor(img, FeatureSet.XY_GRAD_LAP)
        names = FeatureSet.XY_GRAD_LAP.channels
        gx = ft.planes[:, :, names.index("grad_x")]
        gy = ft.planes[:, :, names.index("grad_y")]
        assert np.array_equal(gx[1:-1, 1:-1], np.full((5, 5), 8.0))
        assert np.array_equal(gy[1:-1, 1:-1], np.zeros((5, 5)))

    def test_r2_channel_center_and_corner(self):
        ft = feature_tensor(np.zeros((5, 5)), FeatureSet.R2_GRAD_LAP)
        r2 = ft.planes[:, :, 0]
        assert r2[2, 2] == 0.0   # center (3, 3) in 1-based coordinates
        assert r2[0, 0] == 8.0   # corner: 2*(2^2)

    def test_coordinates_are_one_based(self):
        ft = feature_tensor(np.zeros((4, 6)), FeatureSet.CODE_DEFAULT)
        assert ft.planes[0, 0, 0] == 1.0  # x
        assert ft.planes[0, 5, 0] == 6.0
        assert ft.planes[3, 0, 1] == 4.0  # y

    def test_too_small_region_rejected(self):
        with pytest.raises(ValueError, match="small"):
            feature_tensor(np.zeros((2, 5)), FeatureSet.CODE_DEFAULT)

    def test_dimensions_per_feature_set(self):
        assert FeatureSet.XY_GRAD_LAP.dimension == 5
        assert FeatureSet.R2_GRAD_LAP.dimension == 4
        assert FeatureSet.XY_LAP_EDGE.dimension == 4
        assert FeatureSet.CODE_DEFAULT.dimension == 5


class TestCovariance:
    def test_identical_features_give_zero_matrix(self):
        planes = np.ones((4, 4, 5))
        ft_like = covariance_matrix(planes.reshape(16, 5))
        assert np.array_equal(ft_like, np.zeros((5, 5)))

    def test_two_sample_hand_value(self):
        assert np.array_equal(covariance_matrix(np.array([[0.0], [2.0]])),
                              np.array([[1.0]]))

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            planes = rng.normal(0, 10, size=(12, 9, 5))
            got = covariance_matrix(planes.reshape(-1, 5))
            assert np.abs(got - covariance_two_pass_oracle(planes)).max() < 1e-10

    def test_sample_normalization_flag(self):
        rng = np.random.default_rng(32)
        planes = rng.normal(size=(6, 6, 4))
        pop = covariance_matrix(planes.reshape(-1, 4))
        samp = covariance_matrix(planes.reshape(-1, 4), sample=True)
        n = 36
        assert np.allclose(samp, pop * n / (n - 1), atol=1e-12)

    def test_descriptor_is_psd(self):
        rng = np.random.default_rng(33)
        img = rng.uniform(0, 255, (14, 10))
        desc = covariance(feature_tensor(img, FeatureSet.CODE_DEFAULT))
        eigs = np.linalg.eigvalsh(desc.matrix)
        assert eigs.min() >= -1e-9 * max(np.trace(desc.matrix), 1.0)
        assert desc.n_pixels == 140
        assert desc.normalization == "population"

    def test_single_pixel_rejected(self):
        with pytest.raises(ValueError, match="2 samples"):
            covariance_matrix(np.array([[1.0, 2.0]]))


class TestGeneralizedEigenvalues:
    def test_identity_pair(self):
        lam = generalized_eigenvalues(np.eye(5), np.eye(5))
        assert np.allclose(lam, np.ones(5), atol=1e-12)

    def test_diagonal_case(self):
        lam = generalized_eigenvalues(np.diag([1.0, 4.0]), np.eye(2))
        assert np.allclose(lam, [1.0, 4.0], atol=1e-12)

    def test_matches_sign_sweep_oracle(self):
        rng = np.random.default_rng(34)
        checked = 0
        while checked < 100:
            c1 = random_spd(rng)
            c2 = random_spd(rng)
            expected = geneig_sign_sweep_oracle(c1, c2)
            if expected is None:
                continue
            got = generalized_eigenvalues(c1, c2)
            assert np.abs(got - expected).max() <= 1e-8 * np.abs(expected).max()
            checked += 1

    def test_ascending_and_positive(self):
        rng = np.random.default_rng(35)
        lam = generalized_eigenvalues(random_spd(rng), random_spd(rng))
        assert np.all(np.diff(lam) >= 0)
        assert lam[0] > 0

    def test_singular_input_handled_by_ridge(self):
        # Rank-deficient pair: raw Cholesky path fails, ridge path succeeds.
        c = np.zeros((3, 3))
        c[0, 0] = 1.0
        lam = generalized_eigenvalues(c, c)
        assert np.all(lam > 0)

    def test_indefinite_rejected(self):
        c1 = np.diag([1.0, 1.0])
        c2 = np.diag([1.0, -5.0])
        with pytest.raises(ValueError, match="indefinite"):
            generalized_eigenvalues(c1, c2)

    def test_asymmetric_rejected(self):
        m = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            generalized_eigenvalues(m, np.eye(2))


class TestSpdDistance:
    def test_self_distance_zero(self):
        rng = np.random.default_rng(36)
        for _ in range(5):
            c = random_spd(rng)
            assert spd_distance(c, c) <= 1e-9

    def test_analytic_scaled_identity(self):
        value = spd_distance(np.eye(5), math.e ** 2 * np.eye(5))
        assert abs(value - 2.0 * math.sqrt(5.0)) <= 1e-9

    def test_symmetry(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            a, b = random_spd(rng), random_spd(rng)
            assert abs(spd_distance(a, b) - spd_distance(b, a)) <= 1e-9

    def test_triangle_inequality(self):
        rng = np.random.default_rng(38)
        for _ in range(50):
            a, b, c = (random_spd(rng) for _ in range(3))
            assert spd_distance(a, c) <= spd_distance(a, b) + spd_distance(b, c) + 1e-9

    def test_congruence_invariance(self):
        rng = np.random.default_rng(39)
        for _ in range(20):
            a, b = random_spd(rng), random_spd(rng)
            m = rng.normal(size=(5, 5))
            while abs(np.linalg.det(m)) < 1e-2:
                m = rng.normal(size=(5, 5))
            base = spd_distance(a, b)
            mapped = spd_distance(m.T @ a @ m, m.T @ b @ m)
            assert abs(mapped - base) <= 1e-6 * max(base, 1.0)

    def test_descriptor_tag_mismatch_rejected(self):
        rng = np.random.default_rng(40)
        img = rng.uniform(0, 255, (10, 10))
        a = covariance(feature_tensor(img, FeatureSet.CODE_DEFAULT))
        b = covariance(feature_tensor(img, FeatureSet.XY_GRAD_LAP))
        with pytest.raises(ValueError, match="feature sets"):
            spd_distance(a, b)

    def test_normalization_mismatch_rejected(self):
        rng = np.random.default_rng(41)
        img = rng.uniform(0, 255, (10, 10))
        ft = feature_tensor(img, FeatureSet.CODE_DEFAULT)
        with pytest.raises(ValueError, match="normalizations"):
            spd_distance(covariance(ft), covariance(ft, sample=True))

    def test_gradient_channels_track_finite_differences(self):
        # On a smooth quadratic the Sobel response is 8x the centered
        # finite difference of the same image.
        ys, xs = np.mgrid[1.0:13.0, 1.0:13.0]
        img = 0.5 * xs ** 2 + 10 * xs
        ft = feature_tensor(img, FeatureSet.XY_GRAD_LAP)
        gx = ft.planes[:, :, 2]
        fd = (img[:, 2:] - img[:, :-2]) / 2.0  # centered difference
        assert np.allclose(gx[1:-1, 1:-1], 8.0 * fd[1:-1, :], atol=1e-9)
