"""
Kiểm thử đầu-cuối: các giá trị số của kỳ vọng, oracle Monte-Carlo, giải mã không nhiễu
trên cảnh tổng hợp, so sánh độ bền các bộ giải mã và tính tất định của demo
"""

import math

import numpy as np
import pytest
from scipy.stats import norm

from raydist.decoding import (
    DecoderKind,
    RaySamples,
    SurfaceSet,
    decode_drdf,
    decode_orf,
    decode_sal,
    decode_urdf_gradient,
    decode_urdf_nms,
    decode_volume,
    hit_error,
)
from raydist.expectation import (
    NoiseModel,
    drdf_zero_crossing,
    expected_derivative,
    expected_drdf,
    expected_orf,
    expected_ray_profile,
    expected_single_urdf,
    expected_urdf,
    expected_value,
    mc_expected,
    mc_median_profile,
)
from raydist.geometry import Bvh, camera_ray, default_camera, grid_rays, ray_intersections_batch
from raydist.metrics import chamfer_l1, ray_prf, scene_prf
from raydist.pipeline import DemoPipeline
from raydist.ray_fields import (
    FieldKind,
    Truncation,
    drdf_at,
    evaluate_field,
    ray_receptive_spread,
    receptive_spread,
)
from raydist.scene_io import Plane, SceneSpec, gen_scene, gen_separated_scene

SIGMAS = [0.05, 0.1, 0.2, 0.3]

# Sai lệch MC cho phép: 5 SE (xác suất vượt ~6e-7 mỗi điểm với 101 z x 16 tổ hợp)
MC_SE_FACTOR = 5.0
# cộng thêm MC_FLOOR_EVENTS / N: ORF gần biên có thể không có mẫu nào trúng nên SE = 0
MC_FLOOR_EVENTS = 10.0


class TestExpectedMinimum:
    @pytest.mark.parametrize("sigma", SIGMAS)
    def test_single_hit_minimum(self, sigma):
        target = sigma * math.sqrt(2.0 / math.pi)
        assert expected_single_urdf(0.0, sigma) == pytest.approx(target, abs=1e-4)
        assert expected_urdf(0.0, NoiseModel(sigma)) == pytest.approx(target, abs=1e-4)

    @pytest.mark.parametrize("sigma", [0.05, 0.1])
    def test_far_second_hit_does_not_move_minimum(self, sigma):
        target = sigma * math.sqrt(2.0 / math.pi)
        assert expected_urdf(0.0, NoiseModel(sigma, n=1.0)) == pytest.approx(target, abs=1e-4)

    def test_second_hit_lowers_minimum_for_wide_noise(self):
        # S < -n/2 thì giao thứ hai gần hơn
        single = expected_urdf(0.0, NoiseModel(0.3))
        assert expected_urdf(0.0, NoiseModel(0.3, n=1.0)) < single


@pytest.mark.parametrize("sigma", SIGMAS)
def test_orf_peak_at_half_sigma_radius(sigma):
    assert expected_orf(0.0, sigma / 2.0, NoiseModel(sigma)) == pytest.approx(0.3829, abs=1e-3)


def test_drdf_zero_crossing_thresholds():
    sigmas = np.round(np.arange(0.01, 0.30 + 1e-9, 0.001), 6)
    z_hat = np.array([drdf_zero_crossing(NoiseModel(s, n=1.0)) for s in sigmas])
    first_001 = sigmas[np.argmax(z_hat > 0.01)]
    first_005 = sigmas[np.argmax(z_hat > 0.05)]
    assert 0.20 <= first_001 <= 0.22
    assert 0.26 <= first_005 <= 0.28


@pytest.mark.slow
@pytest.mark.parametrize("kind", ['srdf', 'urdf', 'orf:0.25', 'drdf'])
@pytest.mark.parametrize("sigma", SIGMAS)
def test_monte_carlo_matches_closed_form(kind, sigma):
    num_samples = 1_000_000
    z = np.linspace(-1.0, 2.0, 101)
    model = NoiseModel(sigma, n=1.0)
    mean, se = mc_expected(kind, z, model, num_samples=num_samples, seed=11)
    analytic = np.asarray(expected_value(kind, z, model))
    tolerance = MC_SE_FACTOR * se + MC_FLOOR_EVENTS / num_samples
    assert np.all(np.abs(mean - analytic) <= tolerance)


@pytest.mark.slow
@pytest.mark.parametrize("sigma, gap, tol", [(1.0, 0.135, 0.01), (0.5, 0.067, 0.005)])
def test_median_and_mean_differ_near_hit(sigma, gap, tol):
    z = np.linspace(-3.0, 3.0, 121)
    medians, means = mc_median_profile('urdf', z, [0.0], [sigma], num_samples=1_000_000, seed=2)
    assert np.max(np.abs(means - medians)) == pytest.approx(gap, abs=tol)
    # xa giao thì trung vị và trung bình trùng nhau
    assert abs(means[0] - medians[0]) < 0.01


class TestDerivativeIdentities:
    Z = np.linspace(-1.0, 2.0, 101)

    @staticmethod
    def finite_difference(fn, z, h):
        return (np.asarray(fn(z + h)) - np.asarray(fn(z - h))) / (2.0 * h)

    @staticmethod
    def assert_relative(numeric, analytic):
        tolerance = 1e-5 * np.maximum(np.abs(analytic), 1e-3)
        assert np.all(np.abs(numeric - analytic) <= tolerance)

    @pytest.mark.parametrize("sigma", SIGMAS)
    def test_urdf(self, sigma):
        model = NoiseModel(sigma)
        analytic = expected_derivative('urdf', self.Z, model)
        np.testing.assert_allclose(analytic, 2.0 * norm.cdf(self.Z / sigma) - 1.0, atol=1e-12)
        numeric = self.finite_difference(lambda z: expected_urdf(z, model), self.Z, 1e-4 * sigma)
        self.assert_relative(numeric, analytic)

    @pytest.mark.parametrize("sigma", SIGMAS)
    def test_drdf(self, sigma):
        model = NoiseModel(sigma, n=1.0)
        analytic = expected_derivative('drdf', self.Z, model)
        np.testing.assert_allclose(analytic, norm.pdf(self.Z - 0.5, scale=sigma) - 1.0, atol=1e-12)
        numeric = self.finite_difference(lambda z: expected_drdf(z, model), self.Z, 1e-4 * sigma)
        self.assert_relative(numeric, analytic)


def grid_ground_truth(mesh, camera, height, width):
    grid_camera = camera.resampled(height, width)
    origins, directions = grid_rays(grid_camera, height, width)
    hits = ray_intersections_batch(mesh, Bvh(mesh), origins, directions, camera.far)
    return SurfaceSet.from_intersections(height, width, hits)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_noiseless_round_trip(seed):
    size, depth_count = 64, 128
    camera = default_camera(size)
    step = camera.far / depth_count
    mesh, _ = gen_separated_scene(seed, camera, size, size, depth_count)
    bvh = Bvh(mesh)
    truth = grid_ground_truth(mesh, camera, size, size)
    assert truth.total_hits > 0

    for kind, decoder in (('drdf', DecoderKind.drdf()),
                          ('urdf', DecoderKind.local_minima(4.0 * step)),
                          ('srdf', DecoderKind.sal())):
        volume = evaluate_field(mesh, bvh, camera, size, size, depth_count, FieldKind(kind),
                                truncation=Truncation())
        decoded = decode_volume(volume, decoder)
        assert ray_prf(decoded, truth, t=step, mode='all').f1 == pytest.approx(100.0), kind


class TestRobustnessOrdering:
    HITS = [1.0, 2.0]
    DEPTHS = np.linspace(0.0, 3.0, 601)

    def profile(self, kind, sigma, r=None):
        return expected_ray_profile(kind, self.HITS, self.DEPTHS, sigma, r)

    @pytest.mark.parametrize("sigma", [0.05, 0.1, 0.2])
    def test_drdf_zero_crossing_stays_close(self, sigma):
        decoded = decode_drdf(RaySamples(self.DEPTHS, self.profile('drdf', sigma)))
        assert hit_error(decoded, self.HITS) <= 0.01

    @pytest.mark.parametrize("tau", [0.05, 0.1, 0.15])
    def test_nms_finds_nothing_at_wide_noise(self, tau):
        samples = RaySamples(self.DEPTHS, self.profile('urdf', 0.2))
        assert samples.values.min() > 0.15
        assert decode_urdf_nms(samples, tau).size == 0

    @pytest.mark.parametrize("sigma", [0.05, 0.1, 0.2])
    def test_orf_level_never_reached(self, sigma):
        samples = RaySamples(self.DEPTHS, self.profile(FieldKind.orf(sigma / 2.0), sigma))
        assert decode_orf(samples, level=0.5).size == 0

    @pytest.mark.parametrize("sigma", [0.05, 0.1, 0.2])
    def test_drdf_beats_gradient_under_perturbation(self, sigma):
        drdf = self.profile('drdf', sigma)
        urdf = self.profile('urdf', sigma)
        drdf_errors, gradient_errors = [], []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            noisy_drdf = RaySamples(self.DEPTHS, drdf + rng.normal(0.0, 1e-3, self.DEPTHS.size))
            noisy_urdf = RaySamples(self.DEPTHS, urdf + rng.normal(0.0, 1e-3, self.DEPTHS.size))
            drdf_errors.append(min(hit_error(decode_drdf(noisy_drdf), self.HITS), 3.0))
            gradient_errors.append(min(hit_error(decode_urdf_gradient(noisy_urdf), self.HITS), 3.0))
        assert np.mean(drdf_errors) <= np.mean(gradient_errors)
        assert np.mean(drdf_errors) <= 0.02


def test_sal_phantom_crossing_on_drdf():
    depths = np.linspace(0.0, 4.0, 401)
    samples = RaySamples(depths, drdf_at([1.0, 3.0], depths))
    sal = decode_sal(samples)
    assert sal.size == 3
    assert np.any(np.abs(sal - 2.0) < 0.01)
    np.testing.assert_allclose(decode_drdf(samples), [1.0, 3.0], atol=1e-9)


class TestMetricOracles:
    @staticmethod
    def brute_nearest(a, b):
        return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)).min(axis=1)

    def test_against_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            pred, gt = rng.uniform(size=(100, 3)), rng.uniform(size=(100, 3))
            to_gt, to_pred = self.brute_nearest(pred, gt), self.brute_nearest(gt, pred)
            assert chamfer_l1(pred, gt) == pytest.approx(0.5 * (to_gt.mean() + to_pred.mean()), rel=1e-12)
            score = scene_prf(pred, gt, 0.15)
            assert score.acc == pytest.approx(100.0 * np.mean(to_gt <= 0.15))
            assert score.cmp == pytest.approx(100.0 * np.mean(to_pred <= 0.15))

    def test_worked_occluded_example(self):
        pred = SurfaceSet(1, 1, [[1.0, 2.04, 3.5]])
        gt = SurfaceSet(1, 1, [[1.0, 2.0, 3.0]])
        score = ray_prf(pred, gt, t=0.1, mode='occluded')
        assert (score.acc, score.cmp, score.f1) == pytest.approx((50.0, 50.0, 50.0))


def test_scene_udf_spreads_while_ray_distance_does_not():
    mesh = gen_scene(SceneSpec([Plane(normal=(0, 0, 1), offset=2.0, extent=3.0),
                                Plane(normal=(0, 0, 1), offset=4.0, extent=6.0)]))
    bvh = Bvh(mesh)
    camera = default_camera(64)
    ray = camera_ray(camera, 48.5, 40.5)
    depths = np.linspace(0.5, 5.0, 10)
    assert receptive_spread(mesh, bvh, camera, ray, depths).pixels > 0.0
    assert ray_receptive_spread(mesh, bvh, camera, ray, depths).pixels < 1e-6


@pytest.mark.slow
def test_demo_is_deterministic(tmp_path):
    names = ('demo_table.csv', 'demo_table.json', 'zero_crossing.csv',
             'hit_histogram.csv', 'ground_truth.json')
    outputs = []
    for run in ('a', 'b'):
        DemoPipeline(output_dir=tmp_path / run, scene='room', seed=3, height=8, width=8,
                     depth_count=64).run_full_pipeline()
        outputs.append([(tmp_path / run / name).read_bytes() for name in names])
    assert outputs[0] == outputs[1]
