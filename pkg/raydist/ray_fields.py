"""
Ray Fields Module
Module tính các hàm khoảng cách / chiếm chỗ dọc theo tia (URDF, SRDF, DRDF, ORF, UDF cảnh)
trên lưới frustum, lấy mẫu điểm huấn luyện và thống kê số giao
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import DataError
from .geometry import (
    DEFAULT_FAR,
    Bvh,
    Camera,
    IntersectionSet,
    Ray,
    TriangleMesh,
    grid_depths,
    grid_rays,
    nearest_point,
    nearest_points,
    project,
    project_points,
    ray_intersections_batch,
    rays_to_arrays,
)

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 1.0
TRAIN_SIGMA = 0.1
TRAIN_SAMPLES = 512

HitsLike = Union[IntersectionSet, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class FieldKind:
    """Loại trường: udf (UDF cảnh), urdf, srdf, drdf, orf (kèm bán kính r)"""

    name: str
    radius: Optional[float] = None

    NAMES = ('udf', 'urdf', 'srdf', 'drdf', 'orf')

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise DataError(f"unknown field kind '{self.name}'")
        if self.name == 'orf':
            if self.radius is None or not self.radius > 0:
                raise DataError("ORF radius must be positive")
        elif self.radius is not None:
            raise DataError(f"field kind '{self.name}' takes no radius")

    @classmethod
    def orf(cls, radius: float) -> 'FieldKind':
        return cls('orf', float(radius))

    @classmethod
    def parse(cls, text: str) -> 'FieldKind':
        """Đọc 'udf', 'urdf', 'srdf', 'drdf' hoặc 'orf:R'"""
        name, _, arg = text.strip().lower().partition(':')
        if name == 'orf':
            if not arg:
                raise DataError("ORF kind requires a radius, e.g. 'orf:0.25'")
            try:
                return cls.orf(float(arg))
            except ValueError:
                raise DataError(f"invalid ORF radius '{arg}'") from None
        if arg:
            raise DataError(f"field kind '{name}' takes no argument")
        return cls(name)

    @property
    def code(self) -> int:
        return self.NAMES.index(self.name)

    @property
    def label(self) -> str:
        return f"orf:{self.radius:g}" if self.name == 'orf' else self.name

    @property
    def is_ray_function(self) -> bool:
        return self.name != 'udf'


class TruncationMode(Enum):
    HARD = 'hard'
    LOG = 'log'


@dataclass(frozen=True)
class Truncation:
    bound: float = DEFAULT_TRUNCATION
    mode: TruncationMode = TruncationMode.HARD

    def __post_init__(self):
        if not self.bound > 0:
            raise DataError("truncation bound must be positive")

    def apply(self, d):
        return truncate(d, self.bound, self.mode)


def truncate(d, bound: float, mode: TruncationMode = TruncationMode.HARD):
    """
    Cắt ngưỡng giá trị khoảng cách, giữ dấu

    HARD: sign(d) * min(|d|, bound)
    LOG:  sign(d) * bound * (1 + ln(|d| / bound)) khi |d| > bound
    """
    if not bound > 0:
        raise DataError("truncation bound must be positive")
    arr = np.asarray(d, dtype=np.float64)
    mag = np.abs(arr)
    if TruncationMode(mode) is TruncationMode.HARD:
        out_mag = np.minimum(mag, bound)
    else:
        with np.errstate(divide='ignore'):
            compressed = bound * (1.0 + np.log(np.maximum(mag, bound) / bound))
        out_mag = np.where(mag > bound, np.minimum(mag, compressed), mag)
    out = np.sign(arr) * out_mag
    return float(out) if out.ndim == 0 else out


def _hits_array(hits: HitsLike) -> np.ndarray:
    if isinstance(hits, IntersectionSet):
        return hits.hits
    return IntersectionSet(hits).hits


def _require_hits(hits: HitsLike) -> np.ndarray:
    arr = _hits_array(hits)
    if arr.size == 0:
        raise DataError("no intersections on ray")
    return arr


def _scalar_or_array(out: np.ndarray, z):
    return float(out) if np.ndim(z) == 0 else out


def urdf_at(hits: HitsLike, z):
    """Khoảng cách nhỏ nhất từ z tới các giao: min_i |s_i - z|"""
    s = _require_hits(hits)
    zz = np.asarray(z, dtype=np.float64)
    out = np.min(np.abs(s[None, :] - zz.reshape(-1)[:, None]), axis=1).reshape(zz.shape)
    return _scalar_or_array(out, z)


def srdf_at(hits: HitsLike, z):
    """URDF mang dấu âm khi số giao nằm tại hoặc trước z là số lẻ"""
    s = _require_hits(hits)
    zz = np.asarray(z, dtype=np.float64)
    mag = np.asarray(urdf_at(s, zz))
    parity = np.searchsorted(s, zz, side='right') % 2
    out = np.where(parity == 1, -mag, mag)
    return _scalar_or_array(out, z)


def drdf_at(hits: HitsLike, z):
    """
    Khoảng cách có hướng tới giao gần nhất: dương trước giao, âm sau giao

    Tại đúng trung điểm giữa hai giao, giao phía sau được chọn (giá trị +gap/2).
    """
    s = _require_hits(hits)
    zz = np.asarray(z, dtype=np.float64)
    flat = zz.reshape(-1)
    i = np.searchsorted(s, flat, side='left')
    prev = s[np.clip(i - 1, 0, s.size - 1)]
    nxt = s[np.clip(i, 0, s.size - 1)]
    use_next = (i == 0) | ((i < s.size) & ((flat - prev) >= (nxt - flat)))
    nearest = np.where(use_next, nxt, prev)
    out = (nearest - flat).reshape(zz.shape)
    return _scalar_or_array(out, z)


def orf_at(hits: HitsLike, z, r: float):
    """1 nếu có giao cách z nhỏ hơn r (bất đẳng thức chặt), ngược lại 0"""
    if not r > 0:
        raise DataError("ORF radius must be positive")
    s = _hits_array(hits)
    zz = np.asarray(z, dtype=np.float64)
    if s.size == 0:
        out = np.zeros(zz.shape)
    else:
        out = (np.asarray(urdf_at(s, zz)) < r).astype(np.float64)
    return _scalar_or_array(out, z)


def scene_udf_at(mesh: TriangleMesh, bvh: Bvh, p) -> float:
    """UDF cảnh: khoảng cách tới điểm gần nhất trên toàn mesh"""
    return nearest_point(mesh, bvh, p)[1]


def no_hit_value(kind: FieldKind, truncation: Optional[Truncation], far: float) -> float:
    """Giá trị gán cho tia không có giao"""
    if kind.name in ('orf', 'srdf'):
        return 0.0
    return truncation.bound if truncation is not None else far


def evaluate_ray(kind: FieldKind, hits: HitsLike, depths,
                 truncation: Optional[Truncation] = None,
                 far: float = DEFAULT_FAR) -> np.ndarray:
    """
    Giá trị trường tia tại các độ sâu của một tia

    Args:
        kind: Loại trường (không gồm udf)
        hits: Các giao của tia
        depths: Các độ sâu lấy mẫu
        truncation: Cắt ngưỡng (bỏ qua với ORF)
        far: Dùng cho tia không giao khi không cắt ngưỡng

    Returns:
        Mảng giá trị cùng độ dài với depths
    """
    if not kind.is_ray_function:
        raise DataError("scene UDF needs the mesh; use evaluate_field")
    depths = np.asarray(depths, dtype=np.float64)
    s = _hits_array(hits)
    if s.size == 0:
        return np.full(depths.shape, no_hit_value(kind, truncation, far))
    if kind.name == 'urdf':
        values = urdf_at(s, depths)
    elif kind.name == 'srdf':
        values = srdf_at(s, depths)
    elif kind.name == 'drdf':
        values = drdf_at(s, depths)
    else:
        return orf_at(s, depths, kind.radius)
    if truncation is not None:
        values = truncation.apply(values)
    return np.asarray(values, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class FieldVolume:
    """
    Khối giá trị H x W x D trên frustum camera

    camera là camera của lưới (kích thước ảnh = H x W), values[v, u, k].
    """

    kind: FieldKind
    camera: Camera
    depths: np.ndarray
    values: np.ndarray
    truncation: Optional[Truncation] = None

    def __post_init__(self):
        depths = np.asarray(self.depths, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[2] != depths.size:
            raise DataError("volume values must have shape (H, W, D)")
        if values.shape[:2] != (self.camera.height, self.camera.width):
            raise DataError("volume grid does not match its camera")
        if depths.size > 1 and np.any(np.diff(depths) <= 0):
            raise DataError("volume depths must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DataError("volume values must be finite")
        object.__setattr__(self, 'depths', depths)
        object.__setattr__(self, 'values', values)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.values.shape)

    @property
    def grid_step(self) -> float:
        return float(self.depths[1] - self.depths[0]) if self.depths.size > 1 else 0.0

    def rays(self) -> Tuple[np.ndarray, np.ndarray]:
        h, w, _ = self.shape
        return grid_rays(self.camera, h, w)

    def ray_values(self, index: int) -> np.ndarray:
        h, w, d = self.shape
        return self.values.reshape(h * w, d)[index]


def resolve_threads(threads: int) -> int:
    """0 = tự động theo số CPU"""
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return int(threads)


def map_chunks(fn: Callable[[int, int], np.ndarray], total: int, threads: int = 1,
               chunk: int = 256) -> List:
    """Chạy fn(start, stop) trên các khối liên tiếp; thứ tự kết quả cố định"""
    bounds = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    workers = resolve_threads(threads)
    if workers == 1 or len(bounds) <= 1:
        return [fn(s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))


def evaluate_field(mesh: TriangleMesh, bvh: Bvh, camera: Camera,
                   height: int, width: int, depth_count: int, kind: FieldKind,
                   truncation: Optional[Truncation] = Truncation(),
                   threads: int = 1) -> FieldVolume:
    """
    Tính trường trên lưới frustum H x W x D

    Args:
        mesh, bvh: Cảnh
        camera: Camera gốc (lưới được lấy mẫu lại thành H x W)
        height, width, depth_count: Kích thước lưới
        kind: Loại trường
        truncation: Cắt ngưỡng (None = không cắt); không áp dụng cho ORF
        threads: Số luồng (0 = tự động)

    Returns:
        FieldVolume
    """
    if min(height, width, depth_count) < 2:
        raise DataError("frustum grid requires H, W, D >= 2")
    grid_camera = camera.resampled(height, width)
    origins, directions = grid_rays(grid_camera, height, width)
    depths = grid_depths(camera.far, depth_count)
    hits = ray_intersections_batch(mesh, bvh, origins, directions, t_max=camera.far)
    if kind.name == 'orf':
        truncation = None

    logger.info("Evaluating %s field on %dx%dx%d grid", kind.label, height, width, depth_count)

    def rows(start: int, stop: int) -> np.ndarray:
        if kind.is_ray_function:
            return np.stack([evaluate_ray(kind, hits[i], depths, truncation, camera.far)
                             for i in range(start, stop)])
        pts = (origins[start:stop, None, :]
               + depths[None, :, None] * directions[start:stop, None, :])
        _, dist = nearest_points(mesh, bvh, pts.reshape(-1, 3))
        block = dist.reshape(stop - start, depth_count)
        if truncation is not None:
            block = truncation.apply(block)
        missing = np.array([hits[i].is_empty for i in range(start, stop)])
        block[missing] = no_hit_value(kind, truncation, camera.far)
        return block

    values = np.concatenate(map_chunks(rows, height * width, threads), axis=0)
    return FieldVolume(kind=kind, camera=grid_camera, depths=depths,
                       values=values.reshape(height, width, depth_count),
                       truncation=truncation)


@dataclass(frozen=True, eq=False)
class TrainingSamples:
    """Các độ sâu lấy mẫu, giá trị mục tiêu và (tuỳ chọn) điểm 3D tương ứng"""

    depths: np.ndarray
    targets: np.ndarray
    points: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.depths.size)


def sample_training_points(hits: HitsLike, t_max: float, rng_seed: int,
                           kind: FieldKind = FieldKind('drdf'),
                           ray: Optional[Ray] = None,
                           num_per_hit: int = TRAIN_SAMPLES,
                           num_uniform: int = TRAIN_SAMPLES,
                           sigma: float = TRAIN_SIGMA) -> TrainingSamples:
    """
    Lấy mẫu điểm huấn luyện dọc tia

    Mỗi giao l: num_per_hit mẫu N(l, sigma) kẹp vào [0, t_max];
    thêm num_uniform mẫu đều trên [0, t_max].
    """
    s = _require_hits(hits)
    if not kind.is_ray_function:
        raise DataError("training samples are drawn for ray functions only")
    rng = np.random.default_rng(rng_seed)
    gaussian = [np.clip(rng.normal(l, sigma, size=num_per_hit), 0.0, t_max) for l in s]
    uniform = rng.uniform(0.0, t_max, size=num_uniform)
    depths = np.concatenate(gaussian + [uniform])
    targets = evaluate_ray(kind, s, depths)
    points = ray.point_at(depths) if ray is not None else None
    return TrainingSamples(depths=depths, targets=targets, points=points)


def hit_histogram(mesh: TriangleMesh, bvh: Bvh, rays,
                  t_max: float = DEFAULT_FAR) -> np.ndarray:
    """Số tia theo số giao (chỉ số 0..max)"""
    origins, directions = rays_to_arrays(rays)
    if len(origins) == 0:
        return np.zeros(1, dtype=np.int64)
    hits = ray_intersections_batch(mesh, bvh, origins, directions, t_max)
    return np.bincount([len(h) for h in hits]).astype(np.int64)


def hit_histogram_frame(counts: np.ndarray) -> pd.DataFrame:
    counts = np.asarray(counts, dtype=np.int64)
    total = counts.sum()
    return pd.DataFrame({
        'num_hits': np.arange(counts.size),
        'rays': counts,
        'fraction': counts / total if total else np.zeros(counts.size),
    })


@dataclass(frozen=True)
class SpreadResult:
    pixels: float
    excluded: int


def _ray_pixel(camera: Camera, ray: Ray) -> np.ndarray:
    u, v, _ = project(camera, ray.point_at(1.0))
    return np.array([u, v])


def _spread_of_points(camera: Camera, pixel: np.ndarray, points: np.ndarray) -> SpreadResult:
    if len(points) == 0:
        return SpreadResult(0.0, 0)
    u, v, _, in_front = project_points(camera, points)
    excluded = int(np.count_nonzero(~in_front))
    if excluded:
        logger.warning("Excluded %d defining points behind the camera", excluded)
    if not np.any(in_front):
        return SpreadResult(0.0, excluded)
    offsets = np.stack([u[in_front], v[in_front]], axis=1) - pixel[None, :]
    return SpreadResult(float(np.max(np.linalg.norm(offsets, axis=1))), excluded)


def receptive_spread(mesh: TriangleMesh, bvh: Bvh, camera: Camera, ray: Ray,
                     sample_depths) -> SpreadResult:
    """
    Độ lệch pixel lớn nhất giữa hình chiếu điểm gần nhất trên mesh (UDF cảnh)
    và pixel của chính tia, trên các độ sâu lấy mẫu

    Điểm gần nhất nằm sau camera bị loại và được đếm trong `excluded`.
    """
    pixel = _ray_pixel(camera, ray)
    closest, _ = nearest_points(mesh, bvh, ray.point_at(np.asarray(sample_depths, dtype=np.float64)))
    return _spread_of_points(camera, pixel, closest)


def ray_receptive_spread(mesh: TriangleMesh, bvh: Bvh, camera: Camera, ray: Ray,
                         sample_depths, t_max: float = DEFAULT_FAR) -> SpreadResult:
    """Đại lượng tương tự cho hàm khoảng cách tia: điểm xác định là giao gần nhất trên tia"""
    pixel = _ray_pixel(camera, ray)
    hits = ray_intersections_batch(mesh, bvh, ray.origin[None, :], ray.direction[None, :], t_max)[0]
    if hits.is_empty:
        return SpreadResult(0.0, 0)
    depths = np.asarray(sample_depths, dtype=np.float64)
    # s* = z + drdf(z)
    nearest = depths + np.asarray(drdf_at(hits, depths))
    return _spread_of_points(camera, pixel, ray.point_at(nearest))


def mean_receptive_spread(mesh: TriangleMesh, bvh: Bvh, camera: Camera,
                          height: int, width: int, sample_depths) -> float:
    """Trung bình độ lệch trên các tia lưới, chia cho bề rộng ảnh"""
    origins, directions = grid_rays(camera, height, width)
    spreads = [receptive_spread(mesh, bvh, camera, Ray(o, d), sample_depths).pixels
               for o, d in zip(origins, directions)]
    return float(np.mean(spreads) / camera.width)
