"""
Command Line Interface
Giao diện dòng lệnh: giao tia, tính trường, kỳ vọng, giải mã, đánh giá, demo và vẽ đồ thị
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .decoding import DecoderKind, SurfaceSet, decode_volume
from .errors import EXIT_DATA, EXIT_OK, EXIT_USAGE, DataError, RayDistError
from .expectation import NoiseModel, expectation_curve, zero_crossing_curve
from .geometry import Bvh, Camera, default_camera, grid_rays, ray_intersections_batch
from .metrics import chamfer_curve_frame, evaluate_surfaces
from .ray_fields import (
    FieldKind,
    Truncation,
    TruncationMode,
    evaluate_field,
    hit_histogram_frame,
    resolve_threads,
)
from .scene_io import (
    export_csv,
    export_json,
    load_camera,
    load_obj,
    load_surfaces,
    load_volume,
    save_surfaces,
    save_volume,
)

logger = logging.getLogger(__name__)

THREADS_ENV = 'RDF_THREADS'
DEFAULT_GRID = (32, 32, 128)


def parse_grid(text: str) -> Tuple[int, int, int]:
    """'HxWxD' -> (H, W, D), mỗi chiều >= 2"""
    parts = text.lower().split('x')
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid '{text}', expected HxWxD") from None
    if len(dims) != 3 or min(dims) < 2:
        raise argparse.ArgumentTypeError(f"invalid grid '{text}', expected HxWxD with each >= 2")
    return dims


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got '{text}'") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got '{text}'")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got '{text}'") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got '{text}'")
    return value


def _camera(args) -> Camera:
    return load_camera(args.camera) if args.camera else default_camera()


def _banner(title: str):
    print("=" * 60)
    print(title)
    print("=" * 60)


# ---------------------------------------------------------------------------
# Các lệnh con
# ---------------------------------------------------------------------------

def cmd_intersect(args) -> int:
    """Giao tia - mesh trên lưới: hits.json + hit_histogram.csv"""
    _banner("INTERSECT")
    mesh = load_obj(args.mesh)
    camera = _camera(args)
    h, w, _ = args.grid
    grid_camera = camera.resampled(h, w)
    origins, directions = grid_rays(grid_camera, h, w)
    hits = ray_intersections_batch(mesh, Bvh(mesh), origins, directions, camera.far)
    surfaces = SurfaceSet.from_intersections(h, w, hits)
    histogram = hit_histogram_frame(np.bincount([len(x) for x in hits]))
    print(f"  Rays: {h * w}, hits: {surfaces.total_hits}")
    print(f"  Saved {save_surfaces(surfaces, args.out / 'hits.json')}")
    print(f"  Saved {export_csv(histogram, args.out / 'hit_histogram.csv')}")
    return EXIT_OK


def cmd_field(args) -> int:
    """Tính khối trường và ghi file volume"""
    _banner(f"FIELD {args.kind.label.upper()}")
    mesh = load_obj(args.mesh)
    camera = _camera(args)
    h, w, d = args.grid
    truncation = None if args.trunc == 0 else Truncation(args.trunc, TruncationMode(args.trunc_mode))
    volume = evaluate_field(mesh, Bvh(mesh), camera, h, w, d, args.kind, truncation, args.threads)
    print(f"  Grid {h}x{w}x{d}, value range [{volume.values.min():.4g}, {volume.values.max():.4g}]")
    print(f"  Saved {save_volume(volume, args.out / args.output)}")
    return EXIT_OK


def cmd_expect(args) -> int:
    """Đường kỳ vọng (giải tích, đạo hàm, tuỳ chọn MC / trung vị) hoặc đường điểm cắt 0"""
    if args.zero_crossing:
        _banner("DRDF ZERO CROSSING")
        curve = zero_crossing_curve(args.sigma, args.n)
        print(f"  Lost crossings: {int(curve['z_hat'].isna().sum())} / {len(curve)}")
        print(f"  Saved {export_csv(curve, args.out / 'zero_crossing.csv')}")
        return EXIT_OK

    _banner(f"EXPECTED {args.kind.label.upper()}")
    z = np.linspace(args.z_range[0], args.z_range[1], args.points)
    frames = []
    for i, sigma in enumerate(args.sigma):
        model = NoiseModel(sigma=sigma, n=args.n)
        curve = expectation_curve(args.kind, z, model, mc_samples=args.mc,
                                  with_median=args.median, seed=args.seed + i)
        frame = curve.to_frame()
        frame.insert(0, 'n', args.n)
        frame.insert(0, 'sigma', sigma)
        frame.insert(0, 'kind', args.kind.label)
        frames.append(frame)
        print(f"  sigma={sigma:g}: min {frame['analytic'].min():.6f}, max {frame['analytic'].max():.6f}")
    table = pd.concat(frames, ignore_index=True)
    print(f"  Saved {export_csv(table, args.out / 'expect.csv')}")
    return EXIT_OK


def cmd_decode(args) -> int:
    """Giải mã khối trường thành SurfaceSet JSON"""
    _banner(f"DECODE {args.decoder.label.upper()}")
    volume = load_volume(args.volume)
    surfaces = decode_volume(volume, args.decoder, args.threads)
    print(f"  Decoded {surfaces.total_hits} hits on {len(surfaces)} rays")
    print(f"  Saved {save_surfaces(surfaces, args.out / 'surfaces.json')}")
    return EXIT_OK


def _ground_truth(args, pred: SurfaceSet, camera: Camera) -> SurfaceSet:
    if Path(args.gt).suffix.lower() == '.obj':
        mesh = load_obj(args.gt)
        origins, directions = grid_rays(camera, pred.height, pred.width)
        hits = ray_intersections_batch(mesh, Bvh(mesh), origins, directions, camera.far)
        return SurfaceSet.from_intersections(pred.height, pred.width, hits)
    return load_surfaces(args.gt)


def cmd_eval(args) -> int:
    """Đánh giá dự đoán so với ground truth: metrics.json + chamfer_curve.csv"""
    _banner("EVALUATE")
    pred = load_surfaces(args.pred)
    if not args.camera:
        logger.warning("No --camera given: default intrinsics with identity pose assumed for %s", args.pred)
    camera = _camera(args).resampled(pred.height, pred.width)
    gt = _ground_truth(args, pred, camera)
    report = evaluate_surfaces(pred, gt, camera, t=args.t, seed=args.seed)
    chosen = report.ray_all if args.mode == 'all' else report.ray_occluded
    out = report.to_dict()
    out.update({'mode': args.mode, 'ray': chosen.to_dict()})
    print(f"  Chamfer L1: {report.chamfer_mean:.4f}")
    print(f"  Ray ({args.mode}) Acc/Cmp/F1: {chosen.acc:.2f} / {chosen.cmp:.2f} / {chosen.f1:.2f}")
    print(f"  Saved {export_json(out, args.out / 'metrics.json')}")
    errors = [report.chamfer_mean] if np.isfinite(report.chamfer_mean) else []
    print(f"  Saved {export_csv(chamfer_curve_frame(errors), args.out / 'chamfer_curve.csv')}")
    return EXIT_OK


def cmd_demo(args) -> int:
    """Thí nghiệm đầu-cuối so sánh các bộ giải mã"""
    from .pipeline import DemoPipeline

    h, w, d = args.grid
    camera = load_camera(args.camera) if args.camera else None
    pipeline = DemoPipeline(output_dir=str(args.out), scene=args.scene, seed=args.seed,
                            sigmas=args.sigma, kinds=args.kinds, height=h, width=w,
                            depth_count=d, camera=camera, threads=args.threads)
    table = pipeline.run_full_pipeline()
    print(table.head(10).to_string(index=False))
    return EXIT_OK


def cmd_plot(args) -> int:
    """Vẽ CSV thành SVG"""
    from .plotting import plot_csv

    _banner("PLOT")
    out = plot_csv(args.csv, args.out / args.svg, x=args.x, y=args.y, hue=args.hue,
                   title=args.title)
    print(f"  Saved {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_non_negative_int, default=0,
                        help="Seed cho mọi thành phần ngẫu nhiên (mặc định: 0)")
    common.add_argument("--out", type=Path, default=Path("out"),
                        help="Thư mục kết quả; mọi file đầu ra nằm trong đây (mặc định: out)")
    common.add_argument("--threads", type=_non_negative_int, default=0,
                        help=f"Số luồng, 0 = tự động; biến môi trường {THREADS_ENV} ghi đè")
    common.add_argument("--verbose", action="store_true", help="Log chi tiết (DEBUG)")

    parser = argparse.ArgumentParser(
        prog="raydist",
        description="Hàm khoảng cách tia (URDF/SRDF/DRDF/ORF): tính toán, kỳ vọng dưới nhiễu, "
                    "giải mã bề mặt và đánh giá",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Ví dụ sử dụng:
  # Giao tia với mesh, thống kê số giao
  python -m raydist intersect --mesh scene.obj --grid 64x64x128 --out out/

  # Tính khối DRDF rồi giải mã
  python -m raydist field --mesh scene.obj --kind drdf --out out/
  python -m raydist decode --volume out/field.rdfv --decoder drdf --out out/

  # Đường kỳ vọng URDF kèm Monte-Carlo
  python -m raydist expect --kind urdf --sigma 0.05 0.1 0.2 --mc 100000 --out out/

  # Thí nghiệm so sánh các bộ giải mã
  python -m raydist demo --scene room --sigma 0.05 0.1 0.2 --out out/demo
""",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("intersect", parents=[common], help="Giao tia - mesh trên lưới frustum")
    p.add_argument("--mesh", required=True, help="File OBJ")
    p.add_argument("--camera", default=None, help="File JSON camera (mặc định: 128x128, FOV 60)")
    p.add_argument("--grid", type=parse_grid, default=DEFAULT_GRID, help="Lưới HxWxD (mặc định: 32x32x128)")
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("field", parents=[common], help="Tính khối trường")
    p.add_argument("--mesh", required=True, help="File OBJ")
    p.add_argument("--camera", default=None, help="File JSON camera")
    p.add_argument("--kind", type=_field_kind, required=True, help="udf | urdf | srdf | drdf | orf:R")
    p.add_argument("--grid", type=parse_grid, default=DEFAULT_GRID, help="Lưới HxWxD")
    p.add_argument("--trunc", type=float, default=1.0, help="Ngưỡng cắt (0 = không cắt; mặc định: 1.0)")
    p.add_argument("--trunc-mode", choices=["hard", "log"], default="hard", help="Kiểu cắt ngưỡng")
    p.add_argument("--output", default="field.rdfv", help="Tên file volume (mặc định: field.rdfv)")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("expect", parents=[common], help="Đường kỳ vọng dưới nhiễu Gauss")
    p.add_argument("--kind", type=_field_kind, default=FieldKind('drdf'), help="udf (mặt phẳng) | urdf | srdf | drdf | orf:R")
    p.add_argument("--sigma", type=_positive_float, nargs="+", default=[0.05, 0.1, 0.2, 0.3],
                   help="Danh sách sigma")
    p.add_argument("--n", type=_positive_float, default=1.0, help="Khoảng cách tới giao thứ hai (inf = một giao)")
    p.add_argument("--z-range", type=float, nargs=2, default=[-1.0, 2.0], metavar=("LO", "HI"),
                   help="Khoảng z (mặc định: -1 2)")
    p.add_argument("--points", type=_non_negative_int, default=101, help="Số điểm z (mặc định: 101)")
    p.add_argument("--mc", type=_non_negative_int, default=None, help="Số mẫu Monte-Carlo")
    p.add_argument("--median", action="store_true", help="Thêm trung vị mẫu (cần --mc)")
    p.add_argument("--zero-crossing", action="store_true", help="Ghi đường sigma -> z_hat của DRDF")
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("decode", parents=[common], help="Giải mã khối trường")
    p.add_argument("--volume", required=True, help="File volume")
    p.add_argument("--decoder", type=_decoder_kind, required=True,
                   help="drdf | minima[:W] | nms:T | threshold:T | gradient | orf[:L[:G]] | orf_single[:L] | sal")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", parents=[common], help="Đánh giá bề mặt dự đoán")
    p.add_argument("--pred", required=True, help="SurfaceSet JSON dự đoán")
    p.add_argument("--gt", required=True, help="SurfaceSet JSON hoặc mesh OBJ ground truth")
    p.add_argument("--camera", default=None, help="File JSON camera")
    p.add_argument("--t", type=_positive_float, default=0.5, help="Ngưỡng Acc/Cmp/F1 (m, mặc định: 0.5)")
    p.add_argument("--mode", choices=["all", "occluded"], default="all", help="Chỉ số theo tia")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo", parents=[common], help="Thí nghiệm so sánh các bộ giải mã")
    p.add_argument("--scene", default="room", help="room | random | đường dẫn OBJ")
    p.add_argument("--sigma", type=_positive_float, nargs="+", default=[0.05, 0.1, 0.2], help="Danh sách sigma")
    p.add_argument("--kinds", nargs="+", default=["drdf", "urdf", "srdf", "orf"],
                   choices=["drdf", "urdf", "srdf", "orf"], help="Loại trường")
    p.add_argument("--grid", type=parse_grid, default=DEFAULT_GRID, help="Lưới HxWxD")
    p.add_argument("--camera", default=None, help="File JSON camera")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("plot", parents=[common], help="Vẽ CSV thành SVG")
    p.add_argument("--csv", required=True, help="File CSV đầu vào")
    p.add_argument("--svg", default="plot.svg", help="Tên file SVG (mặc định: plot.svg)")
    p.add_argument("--x", default=None, help="Cột trục hoành")
    p.add_argument("--y", nargs="+", default=None, help="Các cột trục tung")
    p.add_argument("--hue", default=None, help="Cột phân nhóm")
    p.add_argument("--title", default=None, help="Tiêu đề")
    p.set_defaults(func=cmd_plot)

    return parser


def _field_kind(text: str) -> FieldKind:
    try:
        return FieldKind.parse(text)
    except DataError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _decoder_kind(text: str) -> DecoderKind:
    try:
        return DecoderKind.parse(text)
    except DataError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config_echo(args) -> dict:
    config = {}
    for key, value in sorted(vars(args).items()):
        if key == 'func':
            continue
        if isinstance(value, (FieldKind, DecoderKind)):
            value = value.label
        elif isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple):
            value = list(value)
        config[key] = value
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Điểm vào CLI

    Returns:
        Mã thoát: 0 ok, 2 sai cú pháp, 3 lỗi dữ liệu, 4 lỗi số học
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    env_threads = os.environ.get(THREADS_ENV)
    if env_threads is not None:
        try:
            args.threads = _non_negative_int(env_threads)
        except argparse.ArgumentTypeError as exc:
            print(f"ERROR: {THREADS_ENV}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    args.threads = resolve_threads(args.threads)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == 'expect' and args.median and not args.mc:
        print("ERROR: --median requires --mc", file=sys.stderr)
        return EXIT_USAGE

    try:
        export_json(_config_echo(args), args.out / 'config.json')
        return args.func(args)
    except RayDistError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
