"""
Metrics Module
Module đánh giá: Chamfer L1 đối xứng, đường cong theo ngưỡng, Acc/Cmp/F1 theo cảnh và theo tia
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from .decoding import SurfaceSet
from .errors import DataError
from .geometry import Camera, grid_rays

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
CHAMFER_POINTS = 30_000
CURVE_STEPS = 101


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Tập điểm 3D (N, 3), toạ độ hữu hạn"""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise DataError("point cloud coordinates must be finite")
        object.__setattr__(self, 'points', pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    def subsample(self, count: int, seed: int = 0) -> 'PointCloud':
        """Lấy ngẫu nhiên đúng `count` điểm (không lặp), xác định theo seed"""
        if len(self) <= count:
            return self
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(len(self), size=count, replace=False))
        return PointCloud(self.points[idx])


def _as_cloud(cloud) -> PointCloud:
    return cloud if isinstance(cloud, PointCloud) else PointCloud(cloud)


def nearest_distances(source: PointCloud, target: PointCloud) -> np.ndarray:
    """Khoảng cách từ mỗi điểm của source tới điểm gần nhất của target"""
    if target.is_empty:
        raise DataError("empty point set")
    if source.is_empty:
        return np.zeros(0)
    dist, _ = cKDTree(target.points).query(source.points, k=1)
    return dist


def chamfer_l1(pred, gt) -> float:
    """
    Chamfer L1 đối xứng: trung bình của hai khoảng cách gần nhất trung bình

    Raises:
        DataError: "empty point set" nếu một trong hai tập rỗng
    """
    pred, gt = _as_cloud(pred), _as_cloud(gt)
    if pred.is_empty or gt.is_empty:
        raise DataError("empty point set")
    return 0.5 * (float(np.mean(nearest_distances(pred, gt)))
                  + float(np.mean(nearest_distances(gt, pred))))


def chamfer_curve(per_scene_errors: Sequence[float], thresholds=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tỉ lệ cảnh có sai số Chamfer < t cho mỗi ngưỡng t

    Args:
        per_scene_errors: Sai số Chamfer của từng cảnh
        thresholds: Lưới ngưỡng (mặc định 101 điểm trên [0, 1])

    Returns:
        (thresholds, fractions), fractions không giảm theo t
    """
    errors = np.asarray(per_scene_errors, dtype=np.float64).reshape(-1)
    t = np.linspace(0.0, 1.0, CURVE_STEPS) if thresholds is None else np.sort(
        np.asarray(thresholds, dtype=np.float64).reshape(-1))
    if errors.size == 0:
        return t, np.zeros(t.size)
    fractions = np.mean(errors[None, :] < t[:, None], axis=1)
    return t, fractions


def chamfer_curve_frame(per_scene_errors: Sequence[float], thresholds=None) -> pd.DataFrame:
    t, fractions = chamfer_curve(per_scene_errors, thresholds)
    return pd.DataFrame({'t': t, 'fraction': fractions})


def _f1(acc: float, cmp: float) -> float:
    if acc + cmp == 0:
        return 0.0
    return 2.0 * acc * cmp / (acc + cmp)


@dataclass(frozen=True)
class PrfScore:
    """Acc / Cmp / F1 (phần trăm) tại ngưỡng t (m)"""

    acc: float
    cmp: float
    f1: float
    t: float

    def to_dict(self) -> Dict:
        return {'acc': self.acc, 'cmp': self.cmp, 'f1': self.f1, 't': self.t}


def scene_prf(pred, gt, t: float = DEFAULT_THRESHOLD) -> PrfScore:
    """
    Acc = % điểm dự đoán cách GT <= t; Cmp = % điểm GT cách dự đoán <= t; F1 điều hoà

    Quy ước tập rỗng: pred rỗng -> acc 0, gt rỗng -> cmp 0, cả hai rỗng -> 100/100/100.
    """
    if not t > 0:
        raise DataError("threshold t must be positive")
    pred, gt = _as_cloud(pred), _as_cloud(gt)
    if pred.is_empty and gt.is_empty:
        return PrfScore(100.0, 100.0, 100.0, t)
    acc = 0.0 if pred.is_empty or gt.is_empty else \
        100.0 * float(np.mean(nearest_distances(pred, gt) <= t))
    cmp = 0.0 if pred.is_empty or gt.is_empty else \
        100.0 * float(np.mean(nearest_distances(gt, pred) <= t))
    return PrfScore(acc, cmp, _f1(acc, cmp), t)


def _ray_scores(pred: np.ndarray, gt: np.ndarray, t: float) -> Tuple[float, float, float]:
    if pred.size == 0 and gt.size == 0:
        return 100.0, 100.0, 100.0
    if pred.size == 0 or gt.size == 0:
        return 0.0, 0.0, 0.0
    gap = np.abs(pred[:, None] - gt[None, :])
    acc = 100.0 * float(np.mean(np.any(gap <= t, axis=1)))
    cmp = 100.0 * float(np.mean(np.any(gap <= t, axis=0)))
    return acc, cmp, _f1(acc, cmp)


def ray_prf(pred: SurfaceSet, gt: SurfaceSet, t: float = DEFAULT_THRESHOLD,
            mode: str = 'all') -> PrfScore:
    """
    Acc/Cmp/F1 trên từng tia (so khớp 1 chiều |Δ độ sâu| <= t), trung bình không trọng số

    mode='occluded' bỏ giao đầu tiên của mỗi tia ở cả pred và gt trước khi so khớp.
    """
    if not t > 0:
        raise DataError("threshold t must be positive")
    if mode not in ('all', 'occluded'):
        raise DataError(f"unknown ray metric mode '{mode}'")
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise DataError("surface grids do not match")
    skip = 1 if mode == 'occluded' else 0
    scores = np.array([_ray_scores(np.sort(p)[skip:], np.sort(g)[skip:], t)
                       for p, g in zip(pred.hits, gt.hits)])
    if scores.size == 0:
        return PrfScore(100.0, 100.0, 100.0, t)
    acc, cmp, f1 = scores.mean(axis=0)
    return PrfScore(float(acc), float(cmp), float(f1), t)


def surface_points(surfaces: SurfaceSet, camera: Camera,
                   subsample: Optional[int] = None, seed: int = 0) -> PointCloud:
    """
    Nâng độ sâu theo tia thành điểm 3D: origin + depth * direction

    camera là camera của lưới (kích thước ảnh bất kỳ, lưới lấy theo surfaces).
    """
    origins, directions = grid_rays(camera, surfaces.height, surfaces.width)
    counts = np.array([h.size for h in surfaces.hits], dtype=np.int64)
    if counts.sum() == 0:
        return PointCloud(np.zeros((0, 3)))
    ray_index = np.repeat(np.arange(len(counts)), counts)
    depths = np.concatenate(surfaces.hits)
    cloud = PointCloud(origins[ray_index] + depths[:, None] * directions[ray_index])
    if subsample is not None:
        cloud = cloud.subsample(subsample, seed)
    return cloud


@dataclass(frozen=True)
class MetricsReport:
    """Tập hợp các chỉ số cho một cặp dự đoán / ground truth"""

    chamfer_mean: float
    chamfer_curve: Tuple[Tuple[float, float], ...]
    scene: PrfScore
    ray_all: PrfScore
    ray_occluded: PrfScore

    def to_dict(self) -> Dict:
        out = {
            'chamfer_mean': self.chamfer_mean,
            'chamfer_curve': [list(p) for p in self.chamfer_curve],
            'scene': self.scene.to_dict(),
            'ray_all': self.ray_all.to_dict(),
            'ray_occluded': self.ray_occluded.to_dict(),
        }
        return out

    def curve_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.chamfer_curve), columns=['t', 'fraction'])


def evaluate_surfaces(pred: SurfaceSet, gt: SurfaceSet, camera: Camera,
                      t: float = DEFAULT_THRESHOLD, thresholds=None,
                      num_points: int = CHAMFER_POINTS, seed: int = 0) -> MetricsReport:
    """
    Tính toàn bộ chỉ số cho một cảnh

    Args:
        pred, gt: Bề mặt giải mã và ground truth trên cùng lưới tia
        camera: Camera của lưới
        t: Ngưỡng Acc/Cmp/F1 (m)
        thresholds: Lưới ngưỡng cho đường cong Chamfer
        num_points: Số điểm lấy mẫu cho Chamfer
        seed: Seed lấy mẫu

    Returns:
        MetricsReport; chamfer_mean là NaN khi một trong hai tập điểm rỗng
    """
    pred_cloud = surface_points(pred, camera, num_points, seed)
    gt_cloud = surface_points(gt, camera, num_points, seed)
    try:
        chamfer = chamfer_l1(pred_cloud, gt_cloud)
    except DataError:
        logger.warning("Chamfer undefined: empty point set")
        chamfer = float('nan')
    ts, fractions = chamfer_curve([chamfer] if np.isfinite(chamfer) else [], thresholds)
    report = MetricsReport(
        chamfer_mean=chamfer,
        chamfer_curve=tuple(zip(ts.tolist(), fractions.tolist())),
        scene=scene_prf(pred_cloud, gt_cloud, t),
        ray_all=ray_prf(pred, gt, t, 'all'),
        ray_occluded=ray_prf(pred, gt, t, 'occluded'),
    )
    logger.info("Metrics: chamfer %.4f, ray F1 %.2f", chamfer, report.ray_all.f1)
    return report
