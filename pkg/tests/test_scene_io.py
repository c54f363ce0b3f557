"""
Tests cho scene_io: đọc OBJ, làm sạch mesh, cảnh tổng hợp, file khối trường, CSV/JSON
"""

import json

import numpy as np
import pandas as pd
import pytest

from raydist.decoding import SurfaceSet
from raydist.errors import DataError, ObjParseError
from raydist.geometry import Bvh, default_camera, ray_intersections
from raydist.ray_fields import FieldKind, Truncation, TruncationMode, evaluate_field
from raydist.scene_io import (
    VOLUME_HEADER,
    AxisBox,
    Cutout,
    MeshCleaner,
    Plane,
    Room,
    SceneSpec,
    demo_room_spec,
    export_csv,
    export_json,
    gen_scene,
    gen_separated_scene,
    load_camera,
    load_obj,
    load_surfaces,
    load_volume,
    mesh_hash,
    random_room_spec,
    save_surfaces,
    save_volume,
    scene_gaps_ok,
    write_obj,
)

SQUARE_OBJ = """# hình vuông z = 2
v -0.5 -0.5 2
v 0.5 -0.5 2
v 0.5 0.5 2
v -0.5 0.5 2
vn 0 0 -1
f 1//1 2//1 3//1 4//1
"""


def write(tmp_path, text, name='scene.obj'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


class TestObjMeshLoader:
    def test_quad_is_fan_triangulated(self, tmp_path, axis_ray):
        mesh = load_obj(write(tmp_path, SQUARE_OBJ))
        assert mesh.triangles.tolist() == [[0, 1, 2], [0, 2, 3]]
        np.testing.assert_allclose(ray_intersections(mesh, Bvh(mesh), axis_ray).hits, [2.0])

    def test_negative_indices(self, tmp_path):
        mesh = load_obj(write(tmp_path, "v 0 0 1\nv 1 0 1\nv 0 1 1\nf -3 -2 -1\n"))
        assert mesh.triangles.tolist() == [[0, 1, 2]]

    def test_zero_index(self, tmp_path):
        with pytest.raises(ObjParseError) as info:
            load_obj(write(tmp_path, "v 0 0 1\nv 1 0 1\nv 0 1 1\nf 0 1 2\n"))
        assert info.value.line_number == 4

    def test_missing_vertex(self, tmp_path):
        with pytest.raises(ObjParseError, match="non-existent vertex 7"):
            load_obj(write(tmp_path, "v 0 0 1\nv 1 0 1\nv 0 1 1\nf 1 2 7\n"))

    def test_malformed_coordinate(self, tmp_path):
        with pytest.raises(ObjParseError, match=":2: malformed vertex coordinate"):
            load_obj(write(tmp_path, "v 0 0 1\nv 1 x 1\n"))

    def test_non_finite_coordinate(self, tmp_path):
        with pytest.raises(ObjParseError, match="non-finite"):
            load_obj(write(tmp_path, "v 0 0 nan\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="file not found"):
            load_obj(tmp_path / 'nope.obj')

    def test_parse_error_is_data_error(self):
        assert issubclass(ObjParseError, DataError)

    def test_write_then_load_keeps_geometry(self, tmp_path, room_mesh):
        path = write_obj(room_mesh, tmp_path / 'room.obj')
        again = load_obj(path)
        np.testing.assert_array_equal(again.vertices, room_mesh.vertices)
        np.testing.assert_array_equal(again.triangles, room_mesh.triangles)


class TestMeshCleaner:
    def test_removes_degenerate_and_duplicate(self):
        vertices = np.array([[0, 0, 1], [1, 0, 1], [0, 1, 1], [2, 0, 1]], dtype=float)
        triangles = np.array([[0, 1, 2], [2, 1, 0], [0, 1, 3], [0, 0, 2], [0, 1, 9]])
        cleaner = MeshCleaner()
        _, out = cleaner.clean(vertices, triangles)
        assert out.tolist() == [[0, 1, 2]]
        assert cleaner.cleaning_stats == {
            'original_triangles': 5,
            'out_of_range': 1,
            'degenerate': 2,
            'duplicates': 1,
            'final_triangles': 1,
        }

    def test_loader_cleans_by_default(self, tmp_path):
        text = "v 0 0 1\nv 1 0 1\nv 0 1 1\nf 1 2 3\nf 3 2 1\n"
        assert len(load_obj(write(tmp_path, text)).triangles) == 1
        assert len(load_obj(write(tmp_path, text), clean=False).triangles) == 2


class TestSyntheticScenes:
    def test_plane(self, axis_ray):
        mesh = gen_scene(SceneSpec([Plane(normal=(0, 0, 1), offset=2.0, extent=1.0)]))
        np.testing.assert_allclose(ray_intersections(mesh, Bvh(mesh), axis_ray).hits, [2.0])

    def test_shifted_plane_is_missed(self, axis_ray):
        plane = Plane(normal=(0, 0, 1), offset=2.0, extent=1.0, shift=(2.0, 0.0, 0.0))
        mesh = gen_scene(SceneSpec([plane]))
        assert ray_intersections(mesh, Bvh(mesh), axis_ray).is_empty

    def test_window_cutout(self, axis_ray):
        closed = gen_scene(SceneSpec([Room(center=(0, 0, 4), size=(4, 3, 4))]))
        opened = gen_scene(SceneSpec([Room(center=(0, 0, 4), size=(4, 3, 4),
                                           cutouts=[Cutout('+z', (0.0, 0.0), (1.0, 1.0))])]))
        np.testing.assert_allclose(ray_intersections(closed, Bvh(closed), axis_ray).hits, [2.0, 6.0])
        np.testing.assert_allclose(ray_intersections(opened, Bvh(opened), axis_ray).hits, [2.0])

    def test_cutout_validation(self):
        with pytest.raises(DataError, match="unknown room face"):
            Cutout('top', (0.0, 0.0), (1.0, 1.0))
        room = Room(center=(0, 0, 4), size=(4, 3, 4), cutouts=[Cutout('+z', (1.8, 0.0), (1.0, 1.0))])
        with pytest.raises(DataError, match="strictly inside"):
            room.to_mesh()

    def test_invalid_primitives(self):
        with pytest.raises(DataError):
            AxisBox(center=(0, 0, 0), size=(1, 0, 1))
        with pytest.raises(DataError):
            Plane(normal=(0, 0, 0), offset=1.0, extent=1.0)
        with pytest.raises(DataError):
            gen_scene(SceneSpec([]))

    def test_duplicate_primitive(self):
        box = AxisBox(center=(0, 0, 3), size=(1, 1, 1))
        with pytest.raises(DataError, match="overlapping degenerate primitives"):
            gen_scene(SceneSpec([box, box]))

    def test_demo_room_is_deterministic(self, room_mesh):
        assert mesh_hash(gen_scene(demo_room_spec())) == mesh_hash(room_mesh)

    def test_random_room_spec_per_seed(self):
        assert random_room_spec(3).to_dict() == random_room_spec(3).to_dict()
        assert random_room_spec(3).to_dict() != random_room_spec(4).to_dict()
        json.dumps(random_room_spec(3).to_dict())

    def test_separated_scene(self):
        camera = default_camera(16)
        mesh, spec = gen_separated_scene(1, camera, 16, 16, 64)
        assert spec.seed == 1
        assert scene_gaps_ok(mesh, camera, 16, 16, 64)
        again, _ = gen_separated_scene(1, camera, 16, 16, 64)
        assert mesh_hash(again) == mesh_hash(mesh)


class TestVolumeFile:
    @pytest.fixture
    def drdf_volume(self, box_mesh):
        return evaluate_field(box_mesh, Bvh(box_mesh), default_camera(64), 4, 5, 16, FieldKind('drdf'))

    def test_save_and_load(self, tmp_path, drdf_volume):
        path = save_volume(drdf_volume, tmp_path / 'field.rdfv')
        assert path.stat().st_size == VOLUME_HEADER.size + 4 * 4 * 5 * 16
        again = load_volume(path)
        assert again.kind.name == 'drdf'
        assert again.shape == (4, 5, 16)
        assert again.truncation == Truncation(1.0, TruncationMode.HARD)
        np.testing.assert_allclose(again.values, drdf_volume.values, atol=1e-6)
        np.testing.assert_allclose(again.depths, drdf_volume.depths, rtol=1e-6)
        assert again.camera.fx == pytest.approx(drdf_volume.camera.fx, rel=1e-6)

    def test_orf_radius_and_log_truncation(self, tmp_path, box_mesh):
        bvh = Bvh(box_mesh)
        camera = default_camera(64)
        orf = evaluate_field(box_mesh, bvh, camera, 3, 3, 8, FieldKind.orf(0.25))
        assert load_volume(save_volume(orf, tmp_path / 'orf.rdfv')).kind.radius == 0.25
        log = evaluate_field(box_mesh, bvh, camera, 3, 3, 8, FieldKind('urdf'),
                             truncation=Truncation(0.5, TruncationMode.LOG))
        again = load_volume(save_volume(log, tmp_path / 'log.rdfv'))
        assert again.truncation.mode is TruncationMode.LOG
        assert again.truncation.bound == 0.5

    def test_not_a_volume(self, tmp_path):
        path = tmp_path / 'junk.rdfv'
        path.write_bytes(b'JUNK' + bytes(60))
        with pytest.raises(DataError, match="not a volume file"):
            load_volume(path)

    def test_truncated_payload(self, tmp_path, drdf_volume):
        path = save_volume(drdf_volume, tmp_path / 'field.rdfv')
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(DataError, match="truncated payload"):
            load_volume(path)


class TestTables:
    def test_csv_header_and_precision(self, tmp_path):
        path = export_csv(pd.DataFrame({'z': [0.1, 1.0 / 3.0], 'value': [1, 2]}), tmp_path / 'a.csv')
        assert path.read_text() == "z,value\n0.1,1\n0.333333333,2\n"

    def test_json_sorted_and_rounded(self, tmp_path):
        path = export_json({'b': 2.0 / 3.0, 'a': [np.float64(0.5), np.inf], 'c': np.int64(3)},
                           tmp_path / 'a.json')
        data = json.loads(path.read_text())
        assert list(data) == ['a', 'b', 'c']
        assert data == {'a': [0.5, None], 'b': 0.666666667, 'c': 3}

    def test_surfaces_file(self, tmp_path):
        surfaces = SurfaceSet(1, 2, [[1.0, 2.5], []])
        again = load_surfaces(save_surfaces(surfaces, tmp_path / 'surfaces.json'))
        assert again.total_hits == 2
        np.testing.assert_allclose(again.ray(0, 0), [1.0, 2.5])

    def test_invalid_json(self, tmp_path):
        path = write(tmp_path, '{"height": ', 'bad.json')
        with pytest.raises(DataError, match="invalid JSON"):
            load_surfaces(path)

    def test_no_temporary_files_left(self, tmp_path):
        export_json({'a': 1}, tmp_path / 'a.json')
        assert [p.name for p in tmp_path.iterdir()] == ['a.json']

    def test_camera_file(self, tmp_path):
        camera = default_camera(32)
        again = load_camera(export_json(camera, tmp_path / 'camera.json'))
        assert (again.width, again.height) == (32, 32)
        assert again.fx == pytest.approx(camera.fx, rel=1e-8)
        np.testing.assert_array_equal(again.pose, np.eye(4))
        bad = write(tmp_path, '{"fx": 1.0}', 'bad_camera.json')
        with pytest.raises(DataError, match="camera description missing keys"):
            load_camera(bad)
