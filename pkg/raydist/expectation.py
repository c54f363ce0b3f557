"""
Expectation Module
Module tính kỳ vọng dạng đóng của các hàm khoảng cách tia khi vị trí bề mặt có nhiễu Gauss,
đạo hàm, điểm cắt 0 của DRDF và các oracle Monte-Carlo (trung bình, trung vị)

Mọi công thức dùng tọa độ đã tâm hoá (z - mu); p và Phi là mật độ và CDF của N(0, sigma^2).
Giao thứ hai nằm tại S + n (n xác định); n = inf nghĩa là chỉ có một giao.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import ndtr

from .errors import DataError, NumericError
from .ray_fields import FieldKind

logger = logging.getLogger(__name__)

ZERO_CROSSING_TOL = 1e-10
MC_MIN_SAMPLES = 10_000
_SQRT_2PI = np.sqrt(2.0 * np.pi)

KindLike = Union[FieldKind, str]


@dataclass(frozen=True)
class NoiseModel:
    """Vị trí giao S ~ N(mu, sigma), giao kế tiếp tại S + n"""

    sigma: float
    n: float = np.inf
    mu: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DataError("sigma must be positive")
        if not self.n > 0:
            raise DataError("gap to next intersection must be positive")

    @property
    def single(self) -> bool:
        return not np.isfinite(self.n)


@dataclass(frozen=True, eq=False)
class ExpectationCurve:
    """Đường kỳ vọng theo z, tuỳ chọn kèm ước lượng MC"""

    kind: str
    z: np.ndarray
    analytic: np.ndarray
    derivative: Optional[np.ndarray] = None
    mc: Optional[np.ndarray] = None
    mc_se: Optional[np.ndarray] = None
    median: Optional[np.ndarray] = None

    def to_frame(self) -> pd.DataFrame:
        data = {'z': self.z, 'analytic': self.analytic}
        for name in ('derivative', 'mc', 'mc_se', 'median'):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        return pd.DataFrame(data)


def _kind(kind: KindLike) -> FieldKind:
    return kind if isinstance(kind, FieldKind) else FieldKind.parse(kind)


def gaussian_cdf(x, sigma: float):
    return ndtr(np.asarray(x, dtype=np.float64) / sigma)


def gaussian_pdf(x, sigma: float):
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * (x / sigma) ** 2) / (sigma * _SQRT_2PI)


def _out(value, z):
    return float(value) if np.ndim(z) == 0 else value


def expected_single_urdf(z, sigma: float):
    """E|S - z| với một giao: z Phi(z) - z (1 - Phi(z)) + 2 sigma^2 p(z)"""
    zz = np.asarray(z, dtype=np.float64)
    cdf = gaussian_cdf(zz, sigma)
    value = zz * cdf - zz * (1.0 - cdf) + 2.0 * sigma ** 2 * gaussian_pdf(zz, sigma)
    return _out(value, z)


def expected_srdf(z, model: NoiseModel):
    zz = np.asarray(z, dtype=np.float64) - model.mu
    if model.single:
        return _out(-zz, z)
    n, s2 = model.n, model.sigma ** 2
    t = zz - n / 2.0
    value = -zz + (2.0 * zz - n) * gaussian_cdf(t, model.sigma) + 2.0 * s2 * gaussian_pdf(t, model.sigma)
    return _out(value, z)


def expected_urdf(z, model: NoiseModel):
    """
    Kỳ vọng URDF với hai giao {S, S + n}

    Gồm phần một giao, phần chuyển tiếp ở trung điểm t = z - n/2
    và phần sau giao thứ hai u = z - n.
    """
    zz = np.asarray(z, dtype=np.float64) - model.mu
    sigma = model.sigma
    value = np.asarray(expected_single_urdf(zz, sigma))
    if not model.single:
        n, s2 = model.n, sigma ** 2
        t = zz - n / 2.0
        u = zz - n
        value = (value
                 + (n - 2.0 * zz) * gaussian_cdf(t, sigma) - 2.0 * s2 * gaussian_pdf(t, sigma)
                 + 2.0 * (zz - n) * gaussian_cdf(u, sigma) + 2.0 * s2 * gaussian_pdf(u, sigma))
    return _out(value, z)


def expected_orf(z, r: float, model: NoiseModel):
    """Xác suất có giao cách z nhỏ hơn r"""
    if not r > 0:
        raise DataError("ORF radius must be positive")
    zz = np.asarray(z, dtype=np.float64) - model.mu
    sigma = model.sigma
    value = gaussian_cdf(zz + r, sigma) - gaussian_cdf(zz - r, sigma)
    if not model.single:
        u = zz - model.n
        value = value + gaussian_cdf(u + r, sigma) - gaussian_cdf(u - r, sigma)
        if 2.0 * r > model.n:
            value = value - (gaussian_cdf(u + r, sigma) - gaussian_cdf(zz - r, sigma))
    return _out(np.clip(value, 0.0, 1.0), z)


def expected_drdf(z, model: NoiseModel):
    """n Phi(z - n/2) - z"""
    zz = np.asarray(z, dtype=np.float64) - model.mu
    if model.single:
        return _out(-zz, z)
    value = model.n * gaussian_cdf(zz - model.n / 2.0, model.sigma) - zz
    return _out(value, z)


def expected_plane_udf(p, normal, offset: float, sigma: float) -> float:
    """
    Kỳ vọng UDF tới mặt phẳng n.x + o = 0 khi mặt phẳng dịch theo pháp tuyến với nhiễu sigma

    Chỉ thành phần nhiễu theo pháp tuyến có ảnh hưởng.
    """
    normal = np.asarray(normal, dtype=np.float64)
    if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
        raise DataError("plane normal must be unit length")
    q = abs(float(np.dot(normal, np.asarray(p, dtype=np.float64)) + offset))
    return float(expected_single_urdf(q, sigma))


def expected_value(kind: KindLike, z, model: NoiseModel, r: Optional[float] = None):
    kind = _kind(kind)
    if kind.name == 'urdf':
        return expected_urdf(z, model)
    if kind.name == 'srdf':
        return expected_srdf(z, model)
    if kind.name == 'drdf':
        return expected_drdf(z, model)
    if kind.name == 'orf':
        return expected_orf(z, r if r is not None else kind.radius, model)
    # UDF: mặt phẳng vuông góc với tia tại mu, bỏ qua giao thứ hai
    zz = np.asarray(z, dtype=np.float64) - model.mu
    return _out(expected_single_urdf(zz, model.sigma), z)


def expected_derivative(kind: KindLike, z, model: NoiseModel):
    """
    Đạo hàm theo z của kỳ vọng

    URDF: 2 Phi(z) - 1 (+ các hạng giao thứ hai); DRDF: n p(z - n/2) - 1;
    SRDF: 2 Phi(z - n/2) - 1; UDF (mặt phẳng): 2 Phi(z) - 1.
    """
    kind = _kind(kind)
    if kind.name == 'orf':
        raise NumericError("use density form")
    zz = np.asarray(z, dtype=np.float64) - model.mu
    sigma = model.sigma
    if kind.name == 'urdf':
        value = 2.0 * gaussian_cdf(zz, sigma) - 1.0
        if not model.single:
            value = (value - 2.0 * gaussian_cdf(zz - model.n / 2.0, sigma)
                     + 2.0 * gaussian_cdf(zz - model.n, sigma))
    elif kind.name == 'srdf':
        if model.single:
            value = -np.ones_like(zz)
        else:
            value = 2.0 * gaussian_cdf(zz - model.n / 2.0, sigma) - 1.0
    elif kind.name == 'drdf':
        if model.single:
            value = -np.ones_like(zz)
        else:
            value = model.n * gaussian_pdf(zz - model.n / 2.0, sigma) - 1.0
    else:
        value = 2.0 * gaussian_cdf(zz, sigma) - 1.0
    return _out(value, z)


def expected_orf_derivative(z, r: float, model: NoiseModel):
    """Dạng mật độ: p(z + r) - p(z - r) (+ giao thứ hai)"""
    zz = np.asarray(z, dtype=np.float64) - model.mu
    sigma = model.sigma
    value = gaussian_pdf(zz + r, sigma) - gaussian_pdf(zz - r, sigma)
    if not model.single:
        u = zz - model.n
        value = value + gaussian_pdf(u + r, sigma) - gaussian_pdf(u - r, sigma)
        if 2.0 * r > model.n:
            value = value - (gaussian_pdf(u + r, sigma) - gaussian_pdf(zz - r, sigma))
    return _out(value, z)


def drdf_zero_crossing(model: NoiseModel) -> float:
    """
    Nghiệm nhỏ nhất của n Phi(z - n/2) - z = 0 bằng chia đôi

    Khoảng chặn [-n/4, z*], z* là điểm cực tiểu của hàm (n p(z* - n/2) = 1).

    Raises:
        NumericError: "crossing lost" khi không có đổi dấu
    """
    if model.single:
        return model.mu
    n, sigma = model.n, model.sigma
    peak = n / (sigma * _SQRT_2PI)
    if sigma >= n or peak <= 1.0:
        raise NumericError("crossing lost")

    def f(z):
        return n * float(gaussian_cdf(z - n / 2.0, sigma)) - z

    lo = -n / 4.0
    hi = n / 2.0 - sigma * np.sqrt(2.0 * np.log(peak))
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0 and f_hi < 0):
        raise NumericError("crossing lost")
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < ZERO_CROSSING_TOL or hi - lo < 1e-15:
            break
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    return mid + model.mu


def zero_crossing_curve(sigmas: Sequence[float], n: float = 1.0) -> pd.DataFrame:
    """Bảng sigma -> z_hat; NaN khi mất điểm cắt"""
    rows = []
    for sigma in sigmas:
        try:
            z_hat = drdf_zero_crossing(NoiseModel(sigma=float(sigma), n=n))
        except NumericError:
            z_hat = np.nan
        rows.append({'sigma': float(sigma), 'z_hat': z_hat})
    return pd.DataFrame(rows, columns=['sigma', 'z_hat'])


def sampled_field(kind: KindLike, z: float, hit_matrix: np.ndarray,
                  r: Optional[float] = None) -> np.ndarray:
    """
    Giá trị trường tia chính xác tại z cho từng mẫu vị trí giao

    Args:
        hit_matrix: (N, k) vị trí giao của N mẫu, mỗi hàng đã sắp xếp
    """
    kind = _kind(kind)
    d = hit_matrix - z
    mag = np.abs(d)
    if kind.name == 'urdf':
        return mag.min(axis=1)
    if kind.name == 'srdf':
        parity = np.count_nonzero(hit_matrix <= z, axis=1) % 2
        return np.where(parity == 1, -mag.min(axis=1), mag.min(axis=1))
    if kind.name == 'drdf':
        # hoà thì lấy giao phía sau
        k = hit_matrix.shape[1]
        j = k - 1 - np.argmin(mag[:, ::-1], axis=1)
        return d[np.arange(len(d)), j]
    if kind.name == 'orf':
        radius = r if r is not None else kind.radius
        return (mag.min(axis=1) < radius).astype(np.float64)
    # UDF tới mặt phẳng: chỉ giao đầu tiên
    return mag[:, 0]


def _streams(seed: int, count: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _model_samples(rng, model: NoiseModel, num_samples: int) -> np.ndarray:
    s = rng.normal(model.mu, model.sigma, size=num_samples)
    if model.single:
        return s[:, None]
    return np.stack([s, s + model.n], axis=1)


def mc_expected(kind: KindLike, z, model: NoiseModel, num_samples: int = 1_000_000,
                seed: int = 0, r: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ước lượng Monte-Carlo của kỳ vọng và sai số chuẩn tại từng z

    Mỗi z dùng một luồng ngẫu nhiên độc lập sinh từ seed.
    """
    if num_samples < MC_MIN_SAMPLES:
        raise DataError(f"Monte-Carlo oracle needs at least {MC_MIN_SAMPLES} samples")
    zs = np.atleast_1d(np.asarray(z, dtype=np.float64))
    means = np.zeros(zs.size)
    errors = np.zeros(zs.size)
    for i, (zi, rng) in enumerate(zip(zs, _streams(seed, zs.size))):
        values = sampled_field(kind, zi, _model_samples(rng, model, num_samples), r)
        means[i] = values.mean()
        errors[i] = values.std(ddof=1) / np.sqrt(num_samples)
    return means, errors


def mc_median(kind: KindLike, z, model: NoiseModel, num_samples: int = 1_000_000,
              seed: int = 0, r: Optional[float] = None) -> np.ndarray:
    """Trung vị mẫu của d(z; S) tại từng z (cùng luồng ngẫu nhiên với mc_expected)"""
    if num_samples < MC_MIN_SAMPLES:
        raise DataError(f"Monte-Carlo oracle needs at least {MC_MIN_SAMPLES} samples")
    zs = np.atleast_1d(np.asarray(z, dtype=np.float64))
    medians = np.zeros(zs.size)
    for i, (zi, rng) in enumerate(zip(zs, _streams(seed, zs.size))):
        medians[i] = np.median(sampled_field(kind, zi, _model_samples(rng, model, num_samples), r))
    return medians


def mc_median_profile(kind: KindLike, z, hits: Sequence[float], sigmas: Sequence[float],
                      num_samples: int = 100_000, seed: int = 0,
                      r: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Trung vị và trung bình của trường tia khi mỗi giao có sigma riêng

    Returns:
        (medians, means) theo z
    """
    hits = np.asarray(hits, dtype=np.float64)
    sigmas = np.broadcast_to(np.asarray(sigmas, dtype=np.float64), hits.shape)
    if hits.size == 0:
        raise DataError("no intersections on ray")
    if np.any(sigmas <= 0):
        raise DataError("sigma must be positive")
    zs = np.atleast_1d(np.asarray(z, dtype=np.float64))
    medians = np.zeros(zs.size)
    means = np.zeros(zs.size)
    for i, (zi, rng) in enumerate(zip(zs, _streams(seed, zs.size))):
        matrix = np.sort(rng.normal(hits, sigmas, size=(num_samples, hits.size)), axis=1)
        values = sampled_field(kind, zi, matrix, r)
        medians[i] = np.median(values)
        means[i] = values.mean()
    return medians, means


def expected_ray_profile(kind: KindLike, hits: Sequence[float], depths, sigma: float,
                         r: Optional[float] = None) -> np.ndarray:
    """
    Trường kỳ vọng dọc một tia có nhiều giao

    Đoạn [s_k, s_{k+1}) dùng mô hình hai giao của giao k với n = s_{k+1} - s_k
    (giao cuối: n = inf); trước giao đầu dùng mô hình của giao đầu.
    SRDF đổi dấu theo chẵn lẻ của k.
    """
    kind = _kind(kind)
    depths = np.asarray(depths, dtype=np.float64)
    s = np.asarray(hits, dtype=np.float64)
    if s.size == 0:
        raise DataError("no intersections on ray")
    segment = np.clip(np.searchsorted(s, depths, side='right') - 1, 0, s.size - 1)
    values = np.zeros(depths.shape)
    for k in np.unique(segment):
        gap = s[k + 1] - s[k] if k + 1 < s.size else np.inf
        model = NoiseModel(sigma=sigma, n=gap, mu=s[k])
        mask = segment == k
        part = np.asarray(expected_value(kind, depths[mask], model, r))
        if kind.name == 'srdf' and k % 2 == 1:
            part = -part
        values[mask] = part
    return values


def expectation_curve(kind: KindLike, z, model: NoiseModel, r: Optional[float] = None,
                      mc_samples: Optional[int] = None, with_median: bool = False,
                      seed: int = 0) -> ExpectationCurve:
    """Gom kỳ vọng, đạo hàm và (tuỳ chọn) MC cho một loại trường"""
    kind = _kind(kind)
    zs = np.asarray(z, dtype=np.float64)
    radius = r if r is not None else kind.radius
    analytic = np.asarray(expected_value(kind, zs, model, radius))
    if kind.name == 'orf':
        derivative = np.asarray(expected_orf_derivative(zs, radius, model))
    else:
        derivative = np.asarray(expected_derivative(kind, zs, model))
    mc = mc_se = median = None
    if mc_samples:
        mc, mc_se = mc_expected(kind, zs, model, mc_samples, seed, radius)
        if with_median:
            median = mc_median(kind, zs, model, mc_samples, seed, radius)
    return ExpectationCurve(kind=kind.label, z=zs, analytic=analytic, derivative=derivative,
                            mc=mc, mc_se=mc_se, median=median)
