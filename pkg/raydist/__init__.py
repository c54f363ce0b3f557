"""
Ray Distance Functions
Thư viện hàm khoảng cách tia trên lưới tam giác: tính trường, kỳ vọng dưới nhiễu Gauss,
giải mã bề mặt và đánh giá
"""

from .errors import DataError, NumericError, ObjParseError, RayDistError
from .geometry import (
    Bvh,
    Camera,
    IntersectionSet,
    Ray,
    TriangleMesh,
    camera_ray,
    default_camera,
    frustum_grid,
    nearest_point,
    project,
    ray_intersections,
)
from .ray_fields import (
    FieldKind,
    FieldVolume,
    Truncation,
    TruncationMode,
    drdf_at,
    evaluate_field,
    hit_histogram,
    orf_at,
    receptive_spread,
    sample_training_points,
    scene_udf_at,
    srdf_at,
    truncate,
    urdf_at,
)
from .expectation import (
    NoiseModel,
    drdf_zero_crossing,
    expected_derivative,
    expected_drdf,
    expected_orf,
    expected_srdf,
    expected_urdf,
    mc_expected,
    mc_median,
)
from .decoding import DecoderKind, RaySamples, SurfaceSet, decode_volume
from .metrics import MetricsReport, PointCloud, chamfer_curve, chamfer_l1, ray_prf, scene_prf, surface_points
from .scene_io import (
    AxisBox,
    Cutout,
    Plane,
    Room,
    SceneSpec,
    export_csv,
    export_json,
    gen_scene,
    load_obj,
    load_volume,
    save_volume,
)
from .pipeline import DemoPipeline

__all__ = [
    'RayDistError', 'DataError', 'ObjParseError', 'NumericError',
    'Ray', 'Camera', 'TriangleMesh', 'IntersectionSet', 'Bvh',
    'default_camera', 'camera_ray', 'frustum_grid', 'project',
    'ray_intersections', 'nearest_point',
    'FieldKind', 'FieldVolume', 'Truncation', 'TruncationMode', 'truncate',
    'urdf_at', 'srdf_at', 'drdf_at', 'orf_at', 'scene_udf_at',
    'evaluate_field', 'sample_training_points', 'hit_histogram', 'receptive_spread',
    'NoiseModel', 'expected_srdf', 'expected_urdf', 'expected_orf', 'expected_drdf',
    'expected_derivative', 'drdf_zero_crossing', 'mc_expected', 'mc_median',
    'RaySamples', 'SurfaceSet', 'DecoderKind', 'decode_volume',
    'PointCloud', 'MetricsReport', 'chamfer_l1', 'chamfer_curve', 'scene_prf', 'ray_prf',
    'surface_points',
    'AxisBox', 'Plane', 'Room', 'Cutout', 'SceneSpec', 'gen_scene', 'load_obj',
    'save_volume', 'load_volume', 'export_csv', 'export_json',
    'DemoPipeline',
]
