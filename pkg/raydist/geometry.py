"""
Geometry Module
Module hình học: camera pinhole, tia, lưới tam giác, BVH và các truy vấn giao tia / điểm gần nhất
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

DEFAULT_FAR = 8.0
DEFAULT_NEAR = 0.1
MERGE_TOLERANCE = 1e-6
LEAF_SIZE = 4

# tham số t phải dương chặt
_T_MIN = 1e-9
_BARY_EPS = 1e-9
_NEAREST_CHUNK = 65536


def as_vec3(p, name: str = 'point') -> np.ndarray:
    """Chuyển đầu vào thành vector 3 chiều float64, kiểm tra hữu hạn"""
    arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise DataError(f"{name} must have 3 components, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} has non-finite components")
    return arr


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / norms


@dataclass(frozen=True, eq=False)
class Ray:
    """Tia r(z) = origin + z * direction, direction đơn vị"""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        origin = as_vec3(self.origin, 'ray origin')
        direction = as_vec3(self.direction, 'ray direction')
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise DataError("ray direction has zero length")
        object.__setattr__(self, 'origin', origin)
        object.__setattr__(self, 'direction', direction / norm)

    def point_at(self, z) -> np.ndarray:
        """Điểm trên tia tại tham số z (scalar hoặc mảng)"""
        z = np.asarray(z, dtype=np.float64)
        if z.ndim == 0:
            return self.origin + float(z) * self.direction
        return self.origin[None, :] + z[:, None] * self.direction[None, :]


@dataclass(frozen=True, eq=False)
class Camera:
    """
    Camera pinhole (quy ước OpenCV: x phải, y xuống, nhìn theo +z)

    pose là ma trận 4x4 world <- camera.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    near: float = DEFAULT_NEAR
    far: float = DEFAULT_FAR
    pose: np.ndarray = field(default_factory=lambda: np.eye(4))

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise DataError("camera focal lengths must be positive")
        if not (0 <= self.near < self.far):
            raise DataError("camera requires 0 <= near < far")
        if self.width < 1 or self.height < 1:
            raise DataError("camera image size must be positive")
        pose = np.asarray(self.pose, dtype=np.float64)
        if pose.shape != (4, 4):
            raise DataError("camera pose must be a 4x4 matrix")
        object.__setattr__(self, 'pose', pose)

    @property
    def rotation(self) -> np.ndarray:
        return self.pose[:3, :3]

    @property
    def center(self) -> np.ndarray:
        return self.pose[:3, 3]

    def resampled(self, height: int, width: int) -> 'Camera':
        """Camera tương ứng với lưới H x W phủ toàn bộ ảnh"""
        sx = width / self.width
        sy = height / self.height
        return Camera(
            fx=self.fx * sx, fy=self.fy * sy,
            cx=self.cx * sx, cy=self.cy * sy,
            width=int(width), height=int(height),
            near=self.near, far=self.far, pose=self.pose.copy()
        )

    def to_dict(self) -> Dict:
        return {
            'fx': self.fx, 'fy': self.fy, 'cx': self.cx, 'cy': self.cy,
            'width': self.width, 'height': self.height,
            'near': self.near, 'far': self.far,
            'pose': self.pose.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'Camera':
        missing = [k for k in ('fx', 'fy', 'cx', 'cy', 'width', 'height') if k not in data]
        if missing:
            raise DataError(f"camera description missing keys: {', '.join(missing)}")
        return cls(
            fx=float(data['fx']), fy=float(data['fy']),
            cx=float(data['cx']), cy=float(data['cy']),
            width=int(data['width']), height=int(data['height']),
            near=float(data.get('near', DEFAULT_NEAR)),
            far=float(data.get('far', DEFAULT_FAR)),
            pose=np.asarray(data.get('pose', np.eye(4)), dtype=np.float64),
        )


def default_camera(size: int = 128, fov_degrees: float = 60.0) -> Camera:
    """Camera đối xứng, ảnh vuông, nhìn theo +z từ gốc tọa độ"""
    focal = (size / 2.0) / np.tan(np.radians(fov_degrees) / 2.0)
    return Camera(fx=focal, fy=focal, cx=size / 2.0, cy=size / 2.0,
                  width=size, height=size)


def pixel_rays(camera: Camera, u, v) -> Tuple[np.ndarray, np.ndarray]:
    """Gốc và hướng (đơn vị, hệ world) của các tia qua pixel (u, v)"""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    d_cam = np.stack([(u - camera.cx) / camera.fx,
                      (v - camera.cy) / camera.fy,
                      np.ones_like(u)], axis=-1)
    directions = _normalize_rows(d_cam @ camera.rotation.T)
    origins = np.broadcast_to(camera.center, directions.shape).copy()
    return origins, directions


def camera_ray(camera: Camera, u: float, v: float) -> Ray:
    origins, directions = pixel_rays(camera, u, v)
    return Ray(origins[0], directions[0])


def grid_pixels(camera: Camera, height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tâm pixel của lưới H x W (tọa độ ảnh gốc), thứ tự row-major"""
    rows, cols = np.meshgrid(np.arange(height), np.arange(width), indexing='ij')
    u = (cols.reshape(-1) + 0.5) * camera.width / width
    v = (rows.reshape(-1) + 0.5) * camera.height / height
    return u, v


def grid_rays(camera: Camera, height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    u, v = grid_pixels(camera, height, width)
    return pixel_rays(camera, u, v)


def grid_depths(far: float, depth_count: int) -> np.ndarray:
    """D độ sâu cách đều trên [far/D, far]"""
    return np.linspace(far / depth_count, far, depth_count)


def frustum_grid(camera: Camera, height: int, width: int,
                 depth_count: int) -> List[Tuple[Ray, np.ndarray]]:
    """
    Lưới frustum: H*W tia qua tâm pixel, mỗi tia có D độ sâu

    Args:
        camera: Camera
        height, width: Kích thước lưới (có thể khác kích thước ảnh)
        depth_count: Số mẫu độ sâu D

    Returns:
        Danh sách (Ray, depths) theo thứ tự row-major
    """
    if min(height, width, depth_count) < 2:
        raise DataError("frustum grid requires H, W, D >= 2")
    origins, directions = grid_rays(camera, height, width)
    depths = grid_depths(camera.far, depth_count)
    return [(Ray(o, d), depths.copy()) for o, d in zip(origins, directions)]


def project_points(camera: Camera, points) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Chiếu nhiều điểm; trả về u, v, khoảng cách dọc tia và mặt nạ điểm nằm trước camera"""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    p_cam = (pts - camera.center[None, :]) @ camera.rotation
    z = p_cam[:, 2]
    in_front = z > 0
    with np.errstate(divide='ignore', invalid='ignore'):
        u = camera.fx * p_cam[:, 0] / z + camera.cx
        v = camera.fy * p_cam[:, 1] / z + camera.cy
    depth = np.linalg.norm(p_cam, axis=1)
    return u, v, depth, in_front


def project(camera: Camera, p) -> Tuple[float, float, float]:
    """
    Chiếu điểm p lên ảnh

    Returns:
        (u, v, depth) với depth là khoảng cách metric dọc tia
    """
    u, v, depth, in_front = project_points(camera, as_vec3(p)[None, :])
    if not in_front[0]:
        raise DataError("behind camera")
    return float(u[0]), float(v[0]), float(depth[0])


@dataclass(frozen=True, eq=False)
class IntersectionSet:
    """Các tham số giao s_i (tăng chặt, hữu hạn) của một tia với mesh"""

    hits: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        hits = np.asarray(self.hits, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(hits)):
            raise DataError("intersection parameters must be finite")
        if hits.size > 1 and np.any(np.diff(hits) <= 0):
            raise DataError("intersection parameters must be strictly increasing")
        object.__setattr__(self, 'hits', hits)

    def __len__(self) -> int:
        return int(self.hits.size)

    def __iter__(self):
        return iter(self.hits.tolist())

    @property
    def is_empty(self) -> bool:
        return self.hits.size == 0


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Lưới tam giác: vertices (N,3) và triangles (M,3) chỉ số 0-based"""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(vertices)):
            raise DataError("mesh vertices must be finite")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise DataError("triangle index out of range")
        object.__setattr__(self, 'vertices', vertices)
        object.__setattr__(self, 'triangles', triangles)

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    @cached_property
    def corners(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        tri = self.vertices[self.triangles]
        return tri[:, 0, :], tri[:, 1, :], tri[:, 2, :]

    def areas(self) -> np.ndarray:
        a, b, c = self.corners
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    @classmethod
    def empty(cls) -> 'TriangleMesh':
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    @classmethod
    def concatenate(cls, meshes: Sequence['TriangleMesh']) -> 'TriangleMesh':
        vertices, triangles, offset = [], [], 0
        for mesh in meshes:
            vertices.append(mesh.vertices)
            triangles.append(mesh.triangles + offset)
            offset += len(mesh.vertices)
        if not vertices:
            return cls.empty()
        return cls(np.vstack(vertices), np.vstack(triangles))


class Bvh:
    """
    Cây hộp bao trục (AABB) trên các tam giác, lưu dạng mảng phẳng

    Lá giữ các tam giác order[start:start+count]; nút trong có left/right.
    Hộp được nới thêm một khoảng nhỏ để không bỏ sót giao ở mép hộp.
    """

    def __init__(self, mesh: TriangleMesh, leaf_size: int = LEAF_SIZE):
        self.mesh = mesh
        self.leaf_size = max(1, int(leaf_size))
        self._build()

    def _build(self):
        mesh = self.mesh
        n_tri = len(mesh.triangles)
        self.order = np.arange(n_tri, dtype=np.int64)
        if n_tri == 0:
            self.box_min = np.zeros((0, 3))
            self.box_max = np.zeros((0, 3))
            self.left = np.zeros(0, dtype=np.int64)
            self.right = np.zeros(0, dtype=np.int64)
            self.start = np.zeros(0, dtype=np.int64)
            self.count = np.zeros(0, dtype=np.int64)
            return

        a, b, c = mesh.corners
        tri_min = np.minimum(np.minimum(a, b), c)
        tri_max = np.maximum(np.maximum(a, b), c)
        centroids = (a + b + c) / 3.0
        extent = float(np.max(tri_max.max(axis=0) - tri_min.min(axis=0)))
        pad = 1e-9 * (1.0 + extent)

        box_min, box_max, left, right, start, count = [], [], [], [], [], []

        def new_node(lo, hi):
            idx = self.order[lo:hi]
            box_min.append(tri_min[idx].min(axis=0) - pad)
            box_max.append(tri_max[idx].max(axis=0) + pad)
            left.append(-1)
            right.append(-1)
            start.append(lo)
            count.append(0)
            return len(box_min) - 1

        stack = [(new_node(0, n_tri), 0, n_tri)]
        while stack:
            node, lo, hi = stack.pop()
            idx = self.order[lo:hi]
            if hi - lo <= self.leaf_size:
                count[node] = hi - lo
                continue
            c = centroids[idx]
            spread = c.max(axis=0) - c.min(axis=0)
            axis = int(np.argmax(spread))
            if spread[axis] <= 0:
                count[node] = hi - lo
                continue
            # chia theo trung vị của tâm tam giác
            self.order[lo:hi] = idx[np.argsort(c[:, axis], kind='stable')]
            mid = (lo + hi) // 2
            left[node] = new_node(lo, mid)
            right[node] = new_node(mid, hi)
            stack.append((right[node], mid, hi))
            stack.append((left[node], lo, mid))

        self.box_min = np.asarray(box_min)
        self.box_max = np.asarray(box_max)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.start = np.asarray(start, dtype=np.int64)
        self.count = np.asarray(count, dtype=np.int64)
        logger.debug("Built BVH with %d nodes over %d triangles", len(self.count), n_tri)

    @property
    def node_count(self) -> int:
        return int(self.count.size)

    def leaf_triangles(self, node: int) -> np.ndarray:
        s = self.start[node]
        return self.order[s:s + self.count[node]]

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def reachable_triangles(self) -> np.ndarray:
        """Tất cả tam giác đi tới được từ gốc (dùng để kiểm tra)"""
        if self.node_count == 0:
            return np.zeros(0, dtype=np.int64)
        found, stack = [], [0]
        while stack:
            node = stack.pop()
            if self.is_leaf(node):
                found.append(self.leaf_triangles(node))
            else:
                stack.extend([self.left[node], self.right[node]])
        return np.sort(np.concatenate(found))


def _slab_hits(origins, directions, bmin, bmax, t_max) -> np.ndarray:
    parallel = directions == 0.0
    inv = np.divide(1.0, directions, out=np.full_like(directions, np.inf), where=~parallel)
    with np.errstate(invalid='ignore'):
        t1 = (bmin[None, :] - origins) * inv
        t2 = (bmax[None, :] - origins) * inv
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    inside = (origins >= bmin[None, :]) & (origins <= bmax[None, :])
    lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
    hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
    t_near = lo.max(axis=1)
    t_far = hi.min(axis=1)
    return (t_near <= t_far) & (t_far >= 0.0) & (t_near <= t_max)


def _moller_trumbore(origins, directions, a, b, c, t_max) -> np.ndarray:
    """Giao k tia với m tam giác; trả về t (k, m), NaN nếu trượt"""
    e1 = b - a
    e2 = c - a
    pvec = np.cross(directions[:, None, :], e2[None, :, :])
    det = np.einsum('mj,kmj->km', e1, pvec)
    scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    ok = np.abs(det) > 1e-14 * scale[None, :]
    with np.errstate(divide='ignore', invalid='ignore'):
        inv_det = np.where(ok, 1.0 / det, 0.0)
        tvec = origins[:, None, :] - a[None, :, :]
        bu = np.einsum('kmj,kmj->km', tvec, pvec) * inv_det
        qvec = np.cross(tvec, e1[None, :, :])
        bv = np.einsum('kj,kmj->km', directions, qvec) * inv_det
        t = np.einsum('mj,kmj->km', e2, qvec) * inv_det
    ok &= (bu >= -_BARY_EPS) & (bv >= -_BARY_EPS) & (bu + bv <= 1.0 + _BARY_EPS)
    ok &= (t > _T_MIN) & (t <= t_max)
    return np.where(ok, t, np.nan)


def _merge_hits(ts: np.ndarray, t_max: float) -> IntersectionSet:
    ts = np.sort(ts[np.isfinite(ts)])
    if ts.size == 0:
        return IntersectionSet()
    tol = MERGE_TOLERANCE * t_max
    keep = [ts[0]]
    for t in ts[1:]:
        if t - keep[-1] > tol:
            keep.append(t)
    return IntersectionSet(np.asarray(keep))


def _as_ray_arrays(origins, directions) -> Tuple[np.ndarray, np.ndarray]:
    origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    directions = _normalize_rows(np.atleast_2d(np.asarray(directions, dtype=np.float64)))
    if origins.shape != directions.shape:
        origins = np.broadcast_to(origins, directions.shape)
    return origins, directions


def ray_intersections_batch(mesh: TriangleMesh, bvh: Bvh, origins, directions,
                            t_max: float = DEFAULT_FAR) -> List[IntersectionSet]:
    """
    Giao nhiều tia với mesh, duyệt BVH theo gói tia

    Args:
        mesh: TriangleMesh
        bvh: Bvh dựng trên mesh
        origins, directions: Mảng (k, 3)
        t_max: Giới hạn tham số, giữ các giao trong (0, t_max]

    Returns:
        Danh sách IntersectionSet, mỗi tia một phần tử
    """
    if t_max <= 0:
        raise DataError("t_max must be positive")
    origins, directions = _as_ray_arrays(origins, directions)
    n_rays = len(origins)
    per_ray: List[List[np.ndarray]] = [[] for _ in range(n_rays)]
    if bvh.node_count == 0 or n_rays == 0:
        return [IntersectionSet() for _ in range(n_rays)]

    a_all, b_all, c_all = mesh.corners
    stack = [(0, np.arange(n_rays))]
    while stack:
        node, rays = stack.pop()
        hit = _slab_hits(origins[rays], directions[rays],
                         bvh.box_min[node], bvh.box_max[node], t_max)
        rays = rays[hit]
        if rays.size == 0:
            continue
        if bvh.is_leaf(node):
            tris = bvh.leaf_triangles(node)
            t = _moller_trumbore(origins[rays], directions[rays],
                                 a_all[tris], b_all[tris], c_all[tris], t_max)
            rows, _ = np.nonzero(np.isfinite(t))
            for k in np.unique(rows):
                per_ray[rays[k]].append(t[k][np.isfinite(t[k])])
        else:
            stack.append((bvh.right[node], rays))
            stack.append((bvh.left[node], rays))

    return [_merge_hits(np.concatenate(ts) if ts else np.zeros(0), t_max) for ts in per_ray]


def ray_intersections(mesh: TriangleMesh, bvh: Bvh, ray: Ray,
                      t_max: float = DEFAULT_FAR) -> IntersectionSet:
    """Các giao của một tia với mesh trong (0, t_max], đã gộp giao trùng"""
    return ray_intersections_batch(mesh, bvh, ray.origin[None, :],
                                   ray.direction[None, :], t_max)[0]


def ray_intersections_brute(mesh: TriangleMesh, ray: Ray,
                            t_max: float = DEFAULT_FAR) -> IntersectionSet:
    """Duyệt toàn bộ tam giác, dùng làm oracle"""
    if mesh.is_empty:
        return IntersectionSet()
    a, b, c = mesh.corners
    t = _moller_trumbore(ray.origin[None, :], ray.direction[None, :], a, b, c, t_max)
    return _merge_hits(t[0], t_max)


def closest_points_on_triangles(p, a, b, c) -> np.ndarray:
    """
    Điểm gần nhất trên tam giác (a, b, c) tới p, tính theo từng hàng

    Phân vùng Voronoi theo đỉnh / cạnh / mặt, các mảng có cùng shape (k, 3).
    """
    def dot(x, y):
        return np.einsum('ij,ij->i', x, y)

    ab = b - a
    ac = c - a
    ap = p - a
    d1 = dot(ab, ap)
    d2 = dot(ac, ap)
    bp = p - b
    d3 = dot(ab, bp)
    d4 = dot(ac, bp)
    cp = p - c
    d5 = dot(ab, cp)
    d6 = dot(ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    with np.errstate(divide='ignore', invalid='ignore'):
        v_ab = d1 / (d1 - d3)
        w_ac = d2 / (d2 - d6)
        w_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = 1.0 / (va + vb + vc)
    v_in = vb * denom
    w_in = vc * denom

    regions = [
        (d1 <= 0) & (d2 <= 0),
        (d3 >= 0) & (d4 <= d3),
        (vc <= 0) & (d1 >= 0) & (d3 <= 0),
        (d6 >= 0) & (d5 <= d6),
        (vb <= 0) & (d2 >= 0) & (d6 <= 0),
        (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0),
    ]
    choices = [
        a,
        b,
        a + v_ab[:, None] * ab,
        c,
        a + w_ac[:, None] * ac,
        b + w_bc[:, None] * (c - b),
    ]
    inside = a + v_in[:, None] * ab + w_in[:, None] * ac
    out = inside.copy()
    taken = np.zeros(len(p), dtype=bool)
    for mask, choice in zip(regions, choices):
        use = mask & ~taken
        out[use] = choice[use]
        taken |= use
    return out


def _nearest_chunk(mesh: TriangleMesh, bvh: Bvh, pts: np.ndarray):
    a_all, b_all, c_all = mesh.corners
    n_pts = len(pts)
    best_d2 = np.full(n_pts, np.inf)
    best_pt = np.zeros((n_pts, 3))
    stack = [(0, np.arange(n_pts))]
    while stack:
        node, idx = stack.pop()
        lo = bvh.box_min[node]
        hi = bvh.box_max[node]
        gap = np.maximum(np.maximum(lo[None, :] - pts[idx], 0.0), pts[idx] - hi[None, :])
        box_d2 = np.einsum('ij,ij->i', gap, gap)
        idx = idx[box_d2 < best_d2[idx]]
        if idx.size == 0:
            continue
        if bvh.is_leaf(node):
            tris = bvh.leaf_triangles(node)
            k, m = idx.size, tris.size
            p_rep = np.repeat(pts[idx], m, axis=0)
            cand = closest_points_on_triangles(
                p_rep, np.tile(a_all[tris], (k, 1)),
                np.tile(b_all[tris], (k, 1)), np.tile(c_all[tris], (k, 1)))
            d2 = np.sum((cand - p_rep) ** 2, axis=1).reshape(k, m)
            j = np.argmin(d2, axis=1)
            d2_min = d2[np.arange(k), j]
            better = d2_min < best_d2[idx]
            upd = idx[better]
            best_d2[upd] = d2_min[better]
            best_pt[upd] = cand.reshape(k, m, 3)[np.arange(k), j][better]
        else:
            # duyệt nút con gần hơn trước để tỉa sớm
            children = [bvh.left[node], bvh.right[node]]
            centers = [(bvh.box_min[ch] + bvh.box_max[ch]) / 2.0 for ch in children]
            mean_pt = pts[idx].mean(axis=0)
            dists = [np.sum((ctr - mean_pt) ** 2) for ctr in centers]
            if dists[0] <= dists[1]:
                children.reverse()
            for ch in children:
                stack.append((ch, idx))
    return best_pt, np.sqrt(best_d2)


def nearest_points(mesh: TriangleMesh, bvh: Bvh, points) -> Tuple[np.ndarray, np.ndarray]:
    """
    Điểm gần nhất trên mesh cho nhiều điểm truy vấn

    Returns:
        (closest (k,3), distances (k,))
    """
    if mesh.is_empty:
        raise DataError("empty scene")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    closest = np.zeros_like(pts)
    dist = np.zeros(len(pts))
    for s in range(0, len(pts), _NEAREST_CHUNK):
        closest[s:s + _NEAREST_CHUNK], dist[s:s + _NEAREST_CHUNK] = \
            _nearest_chunk(mesh, bvh, pts[s:s + _NEAREST_CHUNK])
    return closest, dist


def nearest_point(mesh: TriangleMesh, bvh: Bvh, p) -> Tuple[np.ndarray, float]:
    closest, dist = nearest_points(mesh, bvh, as_vec3(p)[None, :])
    return closest[0], float(dist[0])


def nearest_point_brute(mesh: TriangleMesh, p) -> Tuple[np.ndarray, float]:
    if mesh.is_empty:
        raise DataError("empty scene")
    p = as_vec3(p)
    a, b, c = mesh.corners
    cand = closest_points_on_triangles(np.broadcast_to(p, a.shape), a, b, c)
    d = np.linalg.norm(cand - p[None, :], axis=1)
    j = int(np.argmin(d))
    return cand[j], float(d[j])


RayLike = Union[Ray, Tuple[np.ndarray, np.ndarray]]


def rays_to_arrays(rays) -> Tuple[np.ndarray, np.ndarray]:
    """Chấp nhận danh sách Ray hoặc cặp (origins, directions)"""
    if isinstance(rays, tuple) and len(rays) == 2 and not isinstance(rays[0], Ray):
        return _as_ray_arrays(rays[0], rays[1])
    rays = list(rays)
    if not rays:
        return np.zeros((0, 3)), np.zeros((0, 3))
    return (np.stack([r.origin for r in rays]),
            np.stack([r.direction for r in rays]))
