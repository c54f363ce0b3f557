"""
Decoding Module
Module giải mã bề mặt: chuyển giá trị trường lấy mẫu dọc tia thành các độ sâu giao
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import DataError
from .ray_fields import FieldVolume, map_chunks

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 1.0
DEFAULT_LEVEL = 0.5
DEFAULT_PAIR_GAP = 0.5


@dataclass(frozen=True, eq=False)
class RaySamples:
    """Giá trị trường tại các độ sâu tăng chặt của một tia"""

    depths: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        depths = np.asarray(self.depths, dtype=np.float64).reshape(-1)
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if depths.size != values.size:
            raise DataError("depths and values must have equal length")
        if depths.size < 2:
            raise DataError("ray samples need at least 2 points")
        if np.any(np.diff(depths) <= 0):
            raise DataError("sample depths must be strictly increasing")
        object.__setattr__(self, 'depths', depths)
        object.__setattr__(self, 'values', values)


def _finish(samples: RaySamples, depths) -> np.ndarray:
    """Sắp xếp, kẹp vào dải độ sâu và bỏ trùng"""
    out = np.sort(np.asarray(depths, dtype=np.float64).reshape(-1))
    out = np.clip(out, samples.depths[0], samples.depths[-1])
    if out.size > 1:
        out = out[np.r_[True, np.diff(out) > 0]]
    return out


def _interpolate(d: np.ndarray, a: np.ndarray, b: np.ndarray, i: np.ndarray,
                 level: float = 0.0) -> np.ndarray:
    """Nội suy tuyến tính vị trí đạt `level` giữa mẫu i và i+1 (a = giá trị tại i, b tại i+1)"""
    frac = (level - a) / (b - a)
    return d[i] + frac * (d[i + 1] - d[i])


def decode_drdf(samples: RaySamples) -> np.ndarray:
    """
    Điểm cắt 0 từ dương sang âm của DRDF

    Bỏ qua cắt từ âm sang dương (bước nhảy ở trung điểm giữa hai giao).
    """
    d, v = samples.depths, samples.values
    i = np.nonzero((v[:-1] > 0) & (v[1:] <= 0))[0]
    hits = _interpolate(d, v[i], v[i + 1], i)
    if v[0] == 0 and v[1] < 0:
        hits = np.r_[d[0], hits]
    return _finish(samples, hits)


def _parabola_vertex(x0, x1, x2, y0, y1, y2) -> float:
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0:
        return x1
    return float(np.clip(x1 - 0.5 * num / den, x0, x2))


def decode_udf_local_minima(samples: RaySamples, window: float = DEFAULT_WINDOW) -> np.ndarray:
    """
    Cực tiểu địa phương chặt trong cửa sổ +-window/2

    Cực tiểu dạng bình nguyên trả về tâm; cực tiểu một mẫu được tinh chỉnh bằng parabol
    qua 3 mẫu. Cực tiểu chạm hai đầu lưới bị loại.
    """
    if not window > 0:
        raise DataError("window must be positive")
    d, v = samples.depths, samples.values
    change = np.nonzero(np.diff(v) != 0)[0] + 1
    starts = np.r_[0, change]
    ends = np.r_[change, v.size] - 1
    run_vals = v[starts]
    if run_vals.size < 3:
        return np.zeros(0)
    # run k là cực tiểu nếu thấp hơn hai run kề
    k = np.nonzero((run_vals[1:-1] < run_vals[:-2]) & (run_vals[1:-1] < run_vals[2:]))[0] + 1
    hits = []
    for run in k:
        lo, hi = starts[run], ends[run]
        center = 0.5 * (d[lo] + d[hi])
        near = np.abs(d - center) <= window / 2.0
        near[lo:hi + 1] = False
        if not np.all(v[near] > run_vals[run]):
            continue
        if lo == hi:
            hits.append(_parabola_vertex(d[lo - 1], d[lo], d[lo + 1], v[lo - 1], v[lo], v[lo + 1]))
        else:
            hits.append(center)
    return _finish(samples, hits)


def _components(mask: np.ndarray):
    """Các đoạn liên tiếp True: danh sách (start, stop)"""
    edges = np.diff(np.r_[0, mask.astype(np.int8), 0])
    return list(zip(np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0]))


def decode_urdf_nms(samples: RaySamples, tau: float, keep: str = 'min') -> np.ndarray:
    """
    Thành phần liên thông có giá trị < tau; mỗi thành phần giữ một độ sâu

    keep='min': mẫu có giá trị nhỏ nhất (hoà lấy mẫu đầu); keep='first': mẫu đầu thành phần.
    """
    if not tau > 0:
        raise DataError("tau must be positive")
    if keep not in ('min', 'first'):
        raise DataError("keep must be 'min' or 'first'")
    d, v = samples.depths, samples.values
    hits = []
    for start, stop in _components(v < tau):
        j = start if keep == 'first' else start + int(np.argmin(v[start:stop]))
        hits.append(d[j])
    return _finish(samples, hits)


def decode_urdf_threshold(samples: RaySamples, tau: float) -> np.ndarray:
    """Mọi mẫu có giá trị <= tau"""
    if tau < 0:
        raise DataError("tau must be non-negative")
    return _finish(samples, samples.depths[samples.values <= tau])


decode_udf_threshold = decode_urdf_threshold


def decode_urdf_gradient(samples: RaySamples) -> np.ndarray:
    """Điểm gradient (sai phân trung tâm) đổi dấu từ âm sang dương"""
    d = samples.depths
    g = np.gradient(samples.values, d)
    i = np.nonzero((g[:-1] < 0) & (g[1:] >= 0))[0]
    return _finish(samples, _interpolate(d, g[i], g[i + 1], i))


def gradient_flat_width(samples: RaySamples, slope: float = 0.9) -> float:
    """
    Bề rộng vùng quanh cực tiểu giải mã được mà |gradient| < slope

    Đo độ "cùn" của cực tiểu; 0 nếu không có điểm cắt gradient.
    """
    d = samples.depths
    g = np.gradient(samples.values, d)
    crossings = np.nonzero((g[:-1] < 0) & (g[1:] >= 0))[0]
    if crossings.size == 0:
        return 0.0
    flat = np.abs(g) < slope
    for start, stop in _components(flat):
        if start <= crossings[0] + 1 and crossings[0] < stop:
            return float(d[stop - 1] - d[start])
    return 0.0


def _level_crossings(samples: RaySamples, level: float):
    d, v = samples.depths, samples.values
    above = v >= level
    up = np.nonzero(~above[:-1] & above[1:])[0]
    down = np.nonzero(above[:-1] & ~above[1:])[0]
    onsets = _interpolate(d, v[up], v[up + 1], up, level)
    offsets = _interpolate(d, v[down], v[down + 1], down, level)
    return onsets, offsets


def decode_orf(samples: RaySamples, level: float = DEFAULT_LEVEL,
               pair_gap: float = DEFAULT_PAIR_GAP) -> np.ndarray:
    """
    Ghép cặp onset (cắt lên) với offset (cắt xuống) kế tiếp trong pair_gap, lấy trung điểm

    Các điểm cắt không ghép được giữ nguyên.
    """
    if not 0 < level < 1:
        raise DataError("level must be in (0, 1)")
    if not pair_gap > 0:
        raise DataError("pair_gap must be positive")
    onsets, offsets = _level_crossings(samples, level)
    events = sorted([(x, 0) for x in onsets] + [(x, 1) for x in offsets])
    hits, i = [], 0
    while i < len(events):
        depth, kind = events[i]
        if kind == 0 and i + 1 < len(events):
            nxt_depth, nxt_kind = events[i + 1]
            if nxt_kind == 1 and nxt_depth - depth <= pair_gap:
                hits.append(0.5 * (depth + nxt_depth))
                i += 2
                continue
        hits.append(depth)
        i += 1
    return _finish(samples, hits)


def decode_orf_single(samples: RaySamples, level: float = DEFAULT_LEVEL) -> np.ndarray:
    """Chỉ lấy điểm cắt lên đầu tiên của mỗi vùng vượt ngưỡng"""
    if not 0 < level < 1:
        raise DataError("level must be in (0, 1)")
    onsets, _ = _level_crossings(samples, level)
    hits = list(onsets)
    # vùng bắt đầu ngay từ mẫu đầu không có điểm cắt lên
    if samples.values[0] >= level:
        hits.append(samples.depths[0])
    return _finish(samples, hits)


def decode_sal(samples: RaySamples) -> np.ndarray:
    """Mọi điểm cắt 0 theo cả hai chiều"""
    d, v = samples.depths, samples.values
    sign = np.sign(v)
    i = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    hits = list(_interpolate(d, v[i], v[i + 1], i))
    for start, stop in _components(v == 0):
        left = sign[start - 1] if start > 0 else 0.0
        right = sign[stop] if stop < v.size else 0.0
        if left != right:
            hits.append(0.5 * (d[start] + d[stop - 1]))
    return _finish(samples, hits)


def decode_ldi(layer_depths, confidences, level: float = DEFAULT_LEVEL) -> np.ndarray:
    """Giữ các lớp có độ tin cậy >= level, sắp xếp tăng dần"""
    depths = np.asarray(layer_depths, dtype=np.float64).reshape(-1)
    conf = np.asarray(confidences, dtype=np.float64).reshape(-1)
    if depths.size != conf.size:
        raise DataError("layer depths and confidences must have equal length")
    return np.sort(depths[conf >= level])


@dataclass(frozen=True)
class DecoderKind:
    """
    Chiến lược giải mã và tham số

    name: drdf | minima | nms | threshold | gradient | orf | orf_single | sal | ldi
    """

    name: str
    tau: Optional[float] = None
    window: Optional[float] = None
    level: Optional[float] = None
    pair_gap: Optional[float] = None
    keep: str = 'min'

    COMPATIBLE = {
        'drdf': ('drdf',),
        'minima': ('udf', 'urdf'),
        'nms': ('urdf',),
        'threshold': ('urdf', 'udf'),
        'gradient': ('urdf', 'udf'),
        'orf': ('orf',),
        'orf_single': ('orf',),
        'sal': ('srdf', 'drdf'),
        'ldi': (),
    }

    def __post_init__(self):
        if self.name not in self.COMPATIBLE:
            raise DataError(f"unknown decoder '{self.name}'")
        for attr in ('tau', 'window', 'pair_gap'):
            value = getattr(self, attr)
            if value is not None and not value > 0:
                raise DataError(f"decoder {attr} must be positive")
        if self.level is not None and not 0 < self.level < 1:
            raise DataError("decoder level must be in (0, 1)")
        if self.name in ('nms', 'threshold') and self.tau is None:
            raise DataError(f"decoder '{self.name}' requires tau")

    @classmethod
    def drdf(cls):
        return cls('drdf')

    @classmethod
    def local_minima(cls, window: float = DEFAULT_WINDOW):
        return cls('minima', window=window)

    @classmethod
    def nms(cls, tau: float, keep: str = 'min'):
        return cls('nms', tau=tau, keep=keep)

    @classmethod
    def threshold(cls, tau: float):
        return cls('threshold', tau=tau)

    @classmethod
    def gradient(cls):
        return cls('gradient')

    @classmethod
    def orf(cls, level: float = DEFAULT_LEVEL, pair_gap: float = DEFAULT_PAIR_GAP):
        return cls('orf', level=level, pair_gap=pair_gap)

    @classmethod
    def sal(cls):
        return cls('sal')

    @classmethod
    def parse(cls, text: str) -> 'DecoderKind':
        """
        Đọc chuỗi mô tả: 'drdf', 'minima[:W]', 'nms:TAU', 'threshold:TAU', 'gradient',
        'orf[:LEVEL[:GAP]]', 'orf_single[:LEVEL]', 'sal', 'ldi[:LEVEL]'
        """
        parts = text.strip().lower().split(':')
        name, args = parts[0], parts[1:]
        try:
            nums = [float(a) for a in args]
        except ValueError:
            raise DataError(f"invalid decoder '{text}'") from None
        if name == 'minima':
            return cls.local_minima(*nums[:1]) if nums else cls.local_minima()
        if name in ('nms', 'threshold'):
            if len(nums) != 1:
                raise DataError(f"decoder '{name}' requires tau, e.g. '{name}:0.1'")
            return cls(name, tau=nums[0])
        if name == 'orf':
            return cls.orf(*nums[:2])
        if name in ('orf_single', 'ldi'):
            return cls(name, level=nums[0] if nums else DEFAULT_LEVEL)
        if nums:
            raise DataError(f"decoder '{name}' takes no arguments")
        return cls(name)

    @property
    def label(self) -> str:
        if self.name == 'minima':
            return f"minima:{self.window:g}"
        if self.name in ('nms', 'threshold'):
            suffix = '' if self.keep == 'min' else f":{self.keep}"
            return f"{self.name}:{self.tau:g}{suffix}"
        if self.name == 'orf':
            return f"orf:{self.level:g}:{self.pair_gap:g}"
        if self.name in ('orf_single', 'ldi'):
            return f"{self.name}:{self.level:g}"
        return self.name

    def accepts(self, field_kind: str) -> bool:
        return field_kind in self.COMPATIBLE[self.name]

    def decode(self, samples: RaySamples) -> np.ndarray:
        if self.name == 'drdf':
            return decode_drdf(samples)
        if self.name == 'minima':
            return decode_udf_local_minima(samples, self.window)
        if self.name == 'nms':
            return decode_urdf_nms(samples, self.tau, self.keep)
        if self.name == 'threshold':
            return decode_urdf_threshold(samples, self.tau)
        if self.name == 'gradient':
            return decode_urdf_gradient(samples)
        if self.name == 'orf':
            return decode_orf(samples, self.level, self.pair_gap)
        if self.name == 'orf_single':
            return decode_orf_single(samples, self.level)
        if self.name == 'sal':
            return decode_sal(samples)
        raise DataError("LDI decoding works on layer predictions, not ray samples")


@dataclass(frozen=True, eq=False)
class SurfaceSet:
    """Danh sách độ sâu giao (tăng chặt) cho từng tia của lưới H x W, thứ tự row-major"""

    height: int
    width: int
    hits: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        hits = [np.asarray(h, dtype=np.float64).reshape(-1) for h in self.hits]
        if len(hits) != self.height * self.width:
            raise DataError("surface set must hold one hit list per grid ray")
        for h in hits:
            if h.size > 1 and np.any(np.diff(h) <= 0):
                raise DataError("surface hit depths must be strictly increasing")
        object.__setattr__(self, 'hits', hits)

    def __len__(self) -> int:
        return len(self.hits)

    @property
    def total_hits(self) -> int:
        return int(sum(h.size for h in self.hits))

    def ray(self, row: int, col: int) -> np.ndarray:
        return self.hits[row * self.width + col]

    def to_dict(self) -> Dict:
        return {
            'height': self.height,
            'width': self.width,
            'hits': [[float(f"{x:.9g}") for x in h] for h in self.hits],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'SurfaceSet':
        """Đọc từ JSON; độ sâu mỗi tia được sắp tăng dần"""
        try:
            return cls(int(data['height']), int(data['width']),
                       [np.sort(np.asarray(h, dtype=np.float64).reshape(-1)) for h in data['hits']])
        except (KeyError, TypeError) as exc:
            raise DataError(f"invalid surface set description: {exc}") from None

    @classmethod
    def from_intersections(cls, height: int, width: int, intersections) -> 'SurfaceSet':
        return cls(height, width, [np.asarray(getattr(h, 'hits', h)) for h in intersections])


def decode_volume(volume: FieldVolume, kind: DecoderKind, threads: int = 1) -> SurfaceSet:
    """
    Áp dụng bộ giải mã cho mọi tia của khối

    Raises:
        DataError: "decoder incompatible with field kind"
    """
    if not kind.accepts(volume.kind.name):
        raise DataError("decoder incompatible with field kind")
    h, w, d = volume.shape
    flat = volume.values.reshape(h * w, d)

    def rows(start: int, stop: int):
        return [kind.decode(RaySamples(volume.depths, flat[i])) for i in range(start, stop)]

    hits = [h_ for block in map_chunks(rows, h * w, threads) for h_ in block]
    logger.info("Decoded %d hits with %s on %s volume",
                sum(x.size for x in hits), kind.label, volume.kind.label)
    return SurfaceSet(h, w, hits)


def hit_error(decoded: Sequence[float], true_hits: Sequence[float]) -> float:
    """
    Sai số giải mã: mỗi độ sâu giải mã được gán cho giao thật gần nhất,
    sai số của một giao là độ lệch lớn nhất trong các độ sâu được gán (inf nếu không có);
    kết quả là giá trị lớn nhất trên các giao thật
    """
    decoded = np.asarray(decoded, dtype=np.float64).reshape(-1)
    truth = np.asarray(true_hits, dtype=np.float64).reshape(-1)
    if truth.size == 0:
        return 0.0 if decoded.size == 0 else np.inf
    if decoded.size == 0:
        return np.inf
    owner = np.argmin(np.abs(decoded[:, None] - truth[None, :]), axis=1)
    worst = 0.0
    for k in range(truth.size):
        mine = decoded[owner == k]
        if mine.size == 0:
            return np.inf
        worst = max(worst, float(np.max(np.abs(mine - truth[k]))))
    return worst
