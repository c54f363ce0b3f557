"""
Scene IO Module
Module đọc/ghi dữ liệu: mesh OBJ, sinh cảnh tổng hợp, file khối trường (binary),
xuất CSV/JSON và ghi file nguyên tử
"""

import hashlib
import json
import logging
import math
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .decoding import SurfaceSet
from .errors import DataError, ObjParseError
from .geometry import (
    Bvh,
    Camera,
    TriangleMesh,
    grid_depths,
    grid_rays,
    ray_intersections_batch,
)
from .ray_fields import FieldKind, FieldVolume, Truncation, TruncationMode

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

VOLUME_MAGIC = b'RDFV'
VOLUME_VERSION = 1
VOLUME_HEADER = struct.Struct('<4sIIIIIff4ff')
FLOAT_FORMAT = '%.9g'


# ---------------------------------------------------------------------------
# Ghi file nguyên tử
# ---------------------------------------------------------------------------

def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """Ghi vào file tạm cùng thư mục rồi os.replace"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


def _read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------------------
# OBJ
# ---------------------------------------------------------------------------

class ObjMeshLoader:
    """Loader cho file Wavefront OBJ (chỉ dùng bản ghi v và f)"""

    def __init__(self, file_path: PathLike, clean: bool = True):
        self.file_path = Path(file_path)
        self.clean = clean

    def _index(self, token: str, vertex_count: int, line_number: int) -> int:
        raw = token.split('/')[0]
        try:
            idx = int(raw)
        except ValueError:
            raise ObjParseError(self.file_path, line_number, f"malformed index '{token}'") from None
        if idx == 0:
            raise ObjParseError(self.file_path, line_number, "vertex index 0 is invalid")
        if idx < 0:
            # chỉ số âm tương đối với số đỉnh đã đọc
            idx = vertex_count + idx
            if idx < 0:
                raise ObjParseError(self.file_path, line_number, f"non-existent vertex {token}")
            return idx
        return idx - 1

    def load(self) -> TriangleMesh:
        """Load và parse file OBJ, tam giác hoá mặt đa giác theo kiểu quạt"""
        text = _read_bytes(self.file_path).decode('utf-8', errors='replace')
        vertices: List[Tuple[float, float, float]] = []
        triangles: List[Tuple[int, int, int]] = []
        face_lines: List[int] = []

        for line_number, line in enumerate(text.splitlines(), start=1):
            parts = line.split('#', 1)[0].split()
            if not parts:
                continue
            tag, args = parts[0], parts[1:]
            if tag == 'v':
                if len(args) < 3:
                    raise ObjParseError(self.file_path, line_number, "vertex needs 3 coordinates")
                try:
                    xyz = tuple(float(a) for a in args[:3])
                except ValueError:
                    raise ObjParseError(self.file_path, line_number, "malformed vertex coordinate") from None
                if not all(math.isfinite(c) for c in xyz):
                    raise ObjParseError(self.file_path, line_number, "non-finite vertex coordinate")
                vertices.append(xyz)
            elif tag == 'f':
                if len(args) < 3:
                    raise ObjParseError(self.file_path, line_number, "face needs at least 3 vertices")
                idx = [self._index(a, len(vertices), line_number) for a in args]
                for k in range(1, len(idx) - 1):
                    triangles.append((idx[0], idx[k], idx[k + 1]))
                    face_lines.append(line_number)
            # vt, vn, usemtl, o, g, s ... bỏ qua

        # kiểm tra chỉ số sau khi đọc hết (OBJ cho phép tham chiếu đỉnh khai báo sau)
        for tri, line_number in zip(triangles, face_lines):
            bad = [i for i in tri if i >= len(vertices)]
            if bad:
                raise ObjParseError(self.file_path, line_number, f"non-existent vertex {bad[0] + 1}")

        v = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        if self.clean:
            v, t = MeshCleaner().clean(v, t)
        logger.info("Loaded %d vertices, %d triangles from %s", len(v), len(t), self.file_path)
        return TriangleMesh(v, t)


def load_obj(path: PathLike, clean: bool = True) -> TriangleMesh:
    return ObjMeshLoader(path, clean).load()


def write_obj(mesh: TriangleMesh, path: PathLike) -> Path:
    """Ghi mesh ra OBJ (chỉ số 1-based, số thực đủ 17 chữ số)"""
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    return atomic_write_text(path, '\n'.join(lines) + '\n')


class MeshCleaner:
    """Class để làm sạch lưới tam giác"""

    def __init__(self, area_epsilon: float = 1e-14):
        self.area_epsilon = area_epsilon
        self.cleaning_stats: Dict[str, int] = {}

    def clean(self, vertices: np.ndarray, triangles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Loại tam giác ngoài phạm vi chỉ số, suy biến (trùng đỉnh / diện tích 0) và trùng lặp

        Returns:
            (vertices, triangles) đã làm sạch
        """
        vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        original = len(triangles)

        # 1. Chỉ số ngoài phạm vi
        in_range = np.all((triangles >= 0) & (triangles < len(vertices)), axis=1)
        triangles = triangles[in_range]

        # 2. Suy biến
        a, b, c = (vertices[triangles[:, k]] for k in range(3))
        area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        repeated = ((triangles[:, 0] == triangles[:, 1]) | (triangles[:, 1] == triangles[:, 2])
                    | (triangles[:, 0] == triangles[:, 2]))
        valid = ~repeated & (area > self.area_epsilon)
        degenerate = int(np.count_nonzero(~valid))
        triangles = triangles[valid]

        # 3. Trùng lặp (không phân biệt thứ tự đỉnh)
        if len(triangles):
            _, first = np.unique(np.sort(triangles, axis=1), axis=0, return_index=True)
            keep = np.sort(first)
        else:
            keep = np.zeros(0, dtype=np.int64)
        duplicates = len(triangles) - len(keep)
        triangles = triangles[keep]

        self.cleaning_stats = {
            'original_triangles': original,
            'out_of_range': int(original - np.count_nonzero(in_range)),
            'degenerate': degenerate,
            'duplicates': int(duplicates),
            'final_triangles': len(triangles),
        }
        removed = original - len(triangles)
        if removed:
            logger.warning("Removed %d triangles (%d degenerate, %d duplicate, %d out of range)",
                           removed, degenerate, duplicates, self.cleaning_stats['out_of_range'])
        return vertices, triangles


# ---------------------------------------------------------------------------
# Cảnh tổng hợp
# ---------------------------------------------------------------------------

# mặt hộp: (trục pháp tuyến, dấu, trục u, trục v)
_FACES = {
    '+x': (0, 1.0, 2, 1), '-x': (0, -1.0, 2, 1),
    '+y': (1, 1.0, 0, 2), '-y': (1, -1.0, 0, 2),
    '+z': (2, 1.0, 0, 1), '-z': (2, -1.0, 0, 1),
}


def _vec(values, name: str) -> Tuple[float, float, float]:
    arr = tuple(float(x) for x in values)
    if len(arr) != 3 or not all(math.isfinite(x) for x in arr):
        raise DataError(f"{name} must be 3 finite numbers")
    return arr


def _rect(center, half_u, half_v) -> TriangleMesh:
    c, hu, hv = (np.asarray(x, dtype=np.float64) for x in (center, half_u, half_v))
    vertices = np.stack([c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv])
    return TriangleMesh(vertices, np.array([[0, 1, 2], [0, 2, 3]]))


def _axis(index: int, length: float) -> np.ndarray:
    out = np.zeros(3)
    out[index] = length
    return out


@dataclass(frozen=True)
class Cutout:
    """Lỗ chữ nhật (cửa / cửa sổ) trên một mặt của phòng, toạ độ (u, v) so với tâm mặt"""

    face: str
    center: Tuple[float, float]
    size: Tuple[float, float]

    def __post_init__(self):
        if self.face not in _FACES:
            raise DataError(f"unknown room face '{self.face}'")
        if len(self.size) != 2 or min(self.size) <= 0:
            raise DataError("cutout size must be positive")
        object.__setattr__(self, 'center', tuple(float(x) for x in self.center))
        object.__setattr__(self, 'size', tuple(float(x) for x in self.size))


@dataclass(frozen=True)
class AxisBox:
    center: Tuple[float, float, float]
    size: Tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, 'center', _vec(self.center, 'box center'))
        object.__setattr__(self, 'size', _vec(self.size, 'box size'))
        if min(self.size) <= 0:
            raise DataError("box size must be positive")

    def _face(self, face: str, cutouts: Sequence[Cutout] = ()) -> List[TriangleMesh]:
        axis, sign, ua, va = _FACES[face]
        half = np.asarray(self.size) / 2.0
        center = np.asarray(self.center) + _axis(axis, sign * half[axis])
        hu, hv = half[ua], half[va]
        holes = [c for c in cutouts if c.face == face]
        if not holes:
            return [_rect(center, _axis(ua, hu), _axis(va, hv))]
        if len(holes) > 1:
            raise DataError(f"at most one cutout per face, got {len(holes)} on {face}")
        hole = holes[0]
        u0, u1 = hole.center[0] - hole.size[0] / 2, hole.center[0] + hole.size[0] / 2
        v0, v1 = hole.center[1] - hole.size[1] / 2, hole.center[1] + hole.size[1] / 2
        if not (-hu < u0 and u1 < hu and -hv < v0 and v1 < hv):
            raise DataError(f"cutout on face {face} must lie strictly inside the wall")

        def piece(ulo, uhi, vlo, vhi):
            c = center + _axis(ua, (ulo + uhi) / 2) + _axis(va, (vlo + vhi) / 2)
            return _rect(c, _axis(ua, (uhi - ulo) / 2), _axis(va, (vhi - vlo) / 2))

        # 4 dải bao quanh lỗ
        return [piece(-hu, u0, -hv, hv), piece(u1, hu, -hv, hv),
                piece(u0, u1, -hv, v0), piece(u0, u1, v1, hv)]

    def to_mesh(self) -> TriangleMesh:
        return TriangleMesh.concatenate([m for face in _FACES for m in self._face(face)])


@dataclass(frozen=True)
class Room(AxisBox):
    """Phòng: hộp 6 mặt, có thể khoét cửa/cửa sổ"""

    cutouts: Tuple[Cutout, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, 'cutouts', tuple(self.cutouts))

    def to_mesh(self) -> TriangleMesh:
        return TriangleMesh.concatenate(
            [m for face in _FACES for m in self._face(face, self.cutouts)])


@dataclass(frozen=True)
class Plane:
    """Tấm phẳng vuông cạnh `extent` trên mặt phẳng n.x = offset, dịch `shift` trong mặt phẳng"""

    normal: Tuple[float, float, float]
    offset: float
    extent: float
    shift: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        normal = _vec(self.normal, 'plane normal')
        if not any(normal):
            raise DataError("plane normal must be non-zero")
        if not self.extent > 0:
            raise DataError("plane extent must be positive")
        object.__setattr__(self, 'normal', normal)
        object.__setattr__(self, 'shift', _vec(self.shift, 'plane shift'))
        object.__setattr__(self, 'offset', float(self.offset))
        object.__setattr__(self, 'extent', float(self.extent))

    def to_mesh(self) -> TriangleMesh:
        n = np.asarray(self.normal) / np.linalg.norm(self.normal)
        helper = np.eye(3)[int(np.argmin(np.abs(n)))]
        u = np.cross(n, helper)
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        shift = np.asarray(self.shift)
        center = self.offset * n + shift - np.dot(shift, n) * n
        half = self.extent / 2.0
        return _rect(center, half * u, half * v)


Primitive = Union[AxisBox, Room, Plane]


@dataclass(frozen=True)
class SceneSpec:
    """Mô tả cảnh tổng hợp: danh sách primitive và seed đã sinh ra nó"""

    primitives: Tuple[Primitive, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'primitives', tuple(self.primitives))

    def to_dict(self) -> Dict:
        def describe(p):
            d = {'type': type(p).__name__}
            for key, value in p.__dict__.items():
                if key == 'cutouts':
                    value = [c.__dict__ for c in value]
                d[key] = value
            return d
        return {'seed': self.seed, 'primitives': [describe(p) for p in self.primitives]}


def gen_scene(spec: SceneSpec) -> TriangleMesh:
    """
    Dựng mesh từ SceneSpec (tất định)

    Raises:
        DataError: cảnh rỗng hoặc primitive trùng nhau
    """
    if not spec.primitives:
        raise DataError("scene has no primitives")
    for i, p in enumerate(spec.primitives):
        if p in spec.primitives[:i]:
            raise DataError("overlapping degenerate primitives")
    cleaner = MeshCleaner()
    mesh = TriangleMesh.concatenate([p.to_mesh() for p in spec.primitives])
    vertices, triangles = cleaner.clean(mesh.vertices, mesh.triangles)
    if cleaner.cleaning_stats['degenerate']:
        raise DataError("overlapping degenerate primitives")
    return TriangleMesh(vertices, triangles)


def demo_room_spec() -> SceneSpec:
    """Phòng 4 x 3 x 4 (tâm z = 4) và hộp 1 m ở giữa: tia trục quang cắt 4 lần (2, 3.5, 4.5, 6)"""
    return SceneSpec((Room(center=(0.0, 0.0, 4.0), size=(4.0, 3.0, 4.0)),
                      AxisBox(center=(0.0, 0.0, 4.0), size=(1.0, 1.0, 1.0))))


def random_room_spec(seed) -> SceneSpec:
    """
    Phòng ngẫu nhiên bao quanh camera (gốc toạ độ, nhìn +z) với 1-3 tấm song song mặt ảnh

    Các tấm cách tường >= 0.5 m và cách nhau >= 0.6 m theo z; tường xa có thể có cửa sổ.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    hx, hy = rng.uniform(1.6, 2.4), rng.uniform(1.4, 2.0)
    far_wall = rng.uniform(3.6, 5.2)
    back_wall = -1.0

    cutouts = ()
    if rng.random() < 0.5:
        w, h = rng.uniform(0.5, 1.2), rng.uniform(0.5, 1.0)
        cu = rng.uniform(-(hx - w / 2 - 0.2), hx - w / 2 - 0.2)
        cv = rng.uniform(-(hy - h / 2 - 0.2), hy - h / 2 - 0.2)
        cutouts = (Cutout('+z', (cu, cv), (w, h)),)
    room = Room(center=(0.0, 0.0, (far_wall + back_wall) / 2),
                size=(2 * hx, 2 * hy, far_wall - back_wall), cutouts=cutouts)

    count = int(rng.integers(1, 4))
    near_z, far_z, spacing = 1.0, far_wall - 0.7, 0.6
    while count > 1 and far_z - near_z < spacing * (count - 1):
        count -= 1
    slack = far_z - near_z - spacing * (count - 1)
    offsets = np.sort(rng.uniform(0.0, slack, count))
    panels = []
    for i in range(count):
        extent = rng.uniform(0.6, 1.4)
        sx = rng.uniform(-1.0, 1.0) * (hx - 0.5 - extent / 2)
        sy = rng.uniform(-1.0, 1.0) * (hy - 0.5 - extent / 2)
        panels.append(Plane(normal=(0.0, 0.0, 1.0), offset=near_z + spacing * i + offsets[i],
                            extent=extent, shift=(sx, sy, 0.0)))
    return SceneSpec((room, *panels), seed=int(seed) if not isinstance(seed, np.random.Generator) else 0)


def scene_gaps_ok(mesh: TriangleMesh, camera: Camera, height: int, width: int,
                  depth_count: int, min_gap_steps: float = 4) -> bool:
    """Mọi tia lưới: giao đầu, khoảng cách giữa các giao và khoảng tới far đều > min_gap_steps bước"""
    bvh = Bvh(mesh)
    grid_camera = camera.resampled(height, width)
    origins, directions = grid_rays(grid_camera, height, width)
    depths = grid_depths(camera.far, depth_count)
    gap = min_gap_steps * float(depths[1] - depths[0])
    for hits in ray_intersections_batch(mesh, bvh, origins, directions, camera.far):
        if hits.is_empty:
            continue
        h = hits.hits
        if h[0] <= gap or camera.far - h[-1] <= gap or np.any(np.diff(h) <= gap):
            return False
    return True


def gen_separated_scene(seed: int, camera: Camera, height: int, width: int, depth_count: int,
                        min_gap_steps: float = 4, max_tries: int = 50) -> Tuple[TriangleMesh, SceneSpec]:
    """
    Sinh cảnh phòng ngẫu nhiên, sinh lại tới khi các giao trên mọi tia cách nhau đủ xa

    Raises:
        DataError: không tìm được cảnh sau max_tries lần
    """
    rng = np.random.default_rng(seed)
    for attempt in range(max_tries):
        spec = random_room_spec(rng)
        spec = SceneSpec(spec.primitives, seed=seed)
        mesh = gen_scene(spec)
        if scene_gaps_ok(mesh, camera, height, width, depth_count, min_gap_steps):
            if attempt:
                logger.info("Scene seed %d accepted after %d redraws", seed, attempt)
            return mesh, spec
    raise DataError(f"could not generate a separated scene for seed {seed}")


def mesh_hash(mesh: TriangleMesh) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(mesh.vertices, dtype='<f8').tobytes())
    h.update(np.ascontiguousarray(mesh.triangles, dtype='<i8').tobytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# File khối trường
# ---------------------------------------------------------------------------

def _encode_trunc(volume: FieldVolume) -> float:
    if volume.kind.name == 'orf':
        return volume.kind.radius
    if volume.truncation is None:
        return 0.0
    sign = -1.0 if volume.truncation.mode is TruncationMode.LOG else 1.0
    return sign * volume.truncation.bound


def save_volume(volume: FieldVolume, path: PathLike) -> Path:
    """
    Ghi khối trường: header little-endian + payload f32 theo thứ tự (H, W, D)

    Trường trunc: bán kính với ORF, 0 khi không cắt ngưỡng, âm khi cắt kiểu LOG.
    """
    h, w, d = volume.shape
    cam = volume.camera
    expected = grid_depths(cam.far, d)
    if not np.allclose(volume.depths, expected, rtol=1e-6, atol=1e-9):
        raise DataError("volume depths must be the uniform frustum grid")
    header = VOLUME_HEADER.pack(VOLUME_MAGIC, VOLUME_VERSION, volume.kind.code, h, w, d,
                                cam.near, cam.far, cam.fx, cam.fy, cam.cx, cam.cy,
                                _encode_trunc(volume))
    payload = np.ascontiguousarray(volume.values, dtype='<f4').tobytes()
    out = atomic_write_bytes(path, header + payload)
    logger.info("Saved %s volume %dx%dx%d to %s", volume.kind.label, h, w, d, out)
    return out


def load_volume(path: PathLike) -> FieldVolume:
    """
    Đọc khối trường đã lưu bằng save_volume

    Raises:
        DataError: "not a volume file", "truncated payload", phiên bản / loại không hỗ trợ
    """
    data = _read_bytes(path)
    if len(data) < VOLUME_HEADER.size:
        raise DataError("not a volume file")
    (magic, version, code, h, w, d, near, far,
     fx, fy, cx, cy, trunc) = VOLUME_HEADER.unpack_from(data)
    if magic != VOLUME_MAGIC:
        raise DataError("not a volume file")
    if version != VOLUME_VERSION:
        raise DataError(f"unsupported volume version {version}")
    if code >= len(FieldKind.NAMES):
        raise DataError(f"unknown field kind code {code}")
    if len(data) - VOLUME_HEADER.size != 4 * h * w * d:
        raise DataError("truncated payload")

    name = FieldKind.NAMES[code]
    truncation = None
    if name == 'orf':
        kind = FieldKind.orf(trunc)
    else:
        kind = FieldKind(name)
        if trunc != 0:
            mode = TruncationMode.LOG if trunc < 0 else TruncationMode.HARD
            truncation = Truncation(abs(trunc), mode)
    values = np.frombuffer(data, dtype='<f4', offset=VOLUME_HEADER.size).reshape(h, w, d)
    camera = Camera(fx=fx, fy=fy, cx=cx, cy=cy, width=w, height=h, near=near, far=far)
    logger.debug("Volume %s stores intrinsics only, pose set to identity", path)
    return FieldVolume(kind=kind, camera=camera, depths=grid_depths(far, d),
                       values=values.astype(np.float64), truncation=truncation)


# ---------------------------------------------------------------------------
# CSV / JSON
# ---------------------------------------------------------------------------

def _round_sig(value):
    """Làm tròn số thực về 9 chữ số có nghĩa; NaN/inf -> None"""
    if isinstance(value, dict):
        return {str(k): _round_sig(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_sig(v) for v in value]
    if isinstance(value, np.ndarray):
        return _round_sig(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.9g}")
    return value


def to_json_text(obj) -> str:
    if hasattr(obj, 'to_dict') and not isinstance(obj, pd.DataFrame):
        obj = obj.to_dict()
    elif isinstance(obj, pd.DataFrame):
        obj = obj.to_dict(orient='records')
    return json.dumps(_round_sig(obj), sort_keys=True, indent=2) + '\n'


def export_json(obj, path: PathLike) -> Path:
    """Ghi JSON: khoá sắp xếp, số thực 9 chữ số có nghĩa"""
    return atomic_write_text(path, to_json_text(obj))


def export_csv(table, path: PathLike) -> Path:
    """
    Ghi CSV có dòng tiêu đề

    Args:
        table: DataFrame, hoặc đối tượng có curve_frame() (MetricsReport)
        path: File đích
    """
    if hasattr(table, 'curve_frame'):
        table = table.curve_frame()
    if not isinstance(table, pd.DataFrame):
        table = pd.DataFrame(table)
    text = table.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return atomic_write_text(path, text)


def read_json(path: PathLike):
    try:
        return json.loads(_read_bytes(path).decode('utf-8'))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def save_surfaces(surfaces: SurfaceSet, path: PathLike) -> Path:
    return export_json(surfaces, path)


def load_surfaces(path: PathLike) -> SurfaceSet:
    return SurfaceSet.from_dict(read_json(path))


def load_camera(path: PathLike) -> Camera:
    data = read_json(path)
    if not isinstance(data, dict):
        raise DataError(f"{path}: camera JSON must be an object")
    return Camera.from_dict(data)
