"""
Tests cho CLI: các lệnh con, file đầu ra, mã thoát
"""

import json
import logging
import subprocess
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import raydist.cli as cli
from raydist.errors import NumericError
from raydist.geometry import default_camera
from raydist.scene_io import AxisBox, export_json, write_obj

from conftest import square_mesh

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = Path(__file__).resolve().parent / 'golden'


@pytest.fixture
def square_obj(tmp_path):
    return write_obj(square_mesh(), tmp_path / 'square.obj')


@pytest.fixture
def box_obj(tmp_path):
    return write_obj(AxisBox(center=(0.0, 0.0, 3.0), size=(1.0, 1.0, 1.0)).to_mesh(), tmp_path / 'box.obj')


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_json(path):
    return json.loads(Path(path).read_text())


class TestIntersect:
    def test_square_center_ray_only(self, tmp_path, square_obj):
        out = tmp_path / 'out'
        assert run('intersect', '--mesh', square_obj, '--grid', '3x3x8', '--out', out) == 0
        hits = read_json(out / 'hits.json')
        assert (hits['height'], hits['width']) == (3, 3)
        assert hits['hits'][4] == [2.0]
        assert sum(len(h) for h in hits['hits']) == 1
        histogram = pd.read_csv(out / 'hit_histogram.csv')
        assert histogram['rays'].tolist() == [8, 1]

    def test_config_echo(self, tmp_path, square_obj):
        out = tmp_path / 'out'
        run('intersect', '--mesh', square_obj, '--grid', '3x3x8', '--seed', '7', '--out', out)
        config = read_json(out / 'config.json')
        assert config['command'] == 'intersect'
        assert config['grid'] == [3, 3, 8]
        assert config['seed'] == 7
        assert config['threads'] >= 1


class TestFieldDecodeEval:
    def test_box_pipeline(self, tmp_path, box_obj):
        out = tmp_path / 'out'
        assert run('field', '--mesh', box_obj, '--kind', 'drdf', '--grid', '9x9x64', '--out', out) == 0
        assert (out / 'field.rdfv').exists()

        assert run('decode', '--volume', out / 'field.rdfv', '--decoder', 'drdf', '--out', out) == 0
        surfaces = read_json(out / 'surfaces.json')
        np.testing.assert_allclose(surfaces['hits'][4 * 9 + 4], [2.5, 3.5], atol=1e-6)
        assert surfaces['hits'][0] == []

        assert run('eval', '--pred', out / 'surfaces.json', '--gt', box_obj, '--out', out) == 0
        metrics = read_json(out / 'metrics.json')
        assert metrics['mode'] == 'all'
        assert metrics['ray']['f1'] == pytest.approx(100.0)
        assert metrics['scene']['f1'] == pytest.approx(100.0)
        assert metrics['chamfer_mean'] == pytest.approx(0.0, abs=1e-5)
        curve = pd.read_csv(out / 'chamfer_curve.csv')
        assert list(curve.columns) == ['t', 'fraction']

    def test_incompatible_decoder(self, tmp_path, box_obj, capsys):
        out = tmp_path / 'out'
        run('field', '--mesh', box_obj, '--kind', 'drdf', '--grid', '4x4x16', '--out', out)
        code = run('decode', '--volume', out / 'field.rdfv', '--decoder', 'nms:0.1', '--out', out)
        assert code == 3
        assert "ERROR: decoder incompatible with field kind" in capsys.readouterr().err

    def test_occluded_mode(self, tmp_path):
        pred = tmp_path / 'pred.json'
        gt = tmp_path / 'gt.json'
        pred.write_text(json.dumps({'height': 1, 'width': 2, 'hits': [[1.0, 2.04, 3.5], [1.0]]}))
        gt.write_text(json.dumps({'height': 1, 'width': 2, 'hits': [[1.0, 2.0, 3.0], [1.0]]}))
        out = tmp_path / 'out'
        assert run('eval', '--pred', pred, '--gt', gt, '--t', '0.1', '--mode', 'occluded', '--out', out) == 0
        ray = read_json(out / 'metrics.json')['ray']
        # tia thứ hai không còn giao nào sau khi bỏ giao đầu: 100
        assert ray['f1'] == pytest.approx(75.0)


class TestExpect:
    def test_curve_table(self, tmp_path):
        out = tmp_path / 'out'
        assert run('expect', '--kind', 'urdf', '--sigma', '0.1', '0.2', '--points', '11', '--out', out) == 0
        table = pd.read_csv(out / 'expect.csv')
        assert list(table.columns) == ['kind', 'sigma', 'n', 'z', 'analytic', 'derivative']
        assert len(table) == 22

    def test_monte_carlo_columns(self, tmp_path):
        out = tmp_path / 'out'
        assert run('expect', '--kind', 'drdf', '--sigma', '0.1', '--points', '5',
                   '--mc', '10000', '--median', '--out', out) == 0
        table = pd.read_csv(out / 'expect.csv')
        assert {'mc', 'mc_se', 'median'} <= set(table.columns)

    def test_zero_crossing(self, tmp_path):
        out = tmp_path / 'out'
        assert run('expect', '--zero-crossing', '--sigma', '0.1', '0.5', '--out', out) == 0
        curve = pd.read_csv(out / 'zero_crossing.csv')
        assert curve['z_hat'].isna().tolist() == [False, True]

    def test_plane_udf_curve(self, tmp_path):
        out = tmp_path / 'out'
        assert run('expect', '--kind', 'udf', '--sigma', '0.2', '--points', '31', '--out', out) == 0
        table = pd.read_csv(out / 'expect.csv')
        assert set(table['kind']) == {'udf'}
        assert table['analytic'].min() >= 0.2 * np.sqrt(2.0 / np.pi) - 1e-9
        assert table['derivative'].between(-1.0, 1.0).all()

    def test_median_requires_monte_carlo(self, tmp_path, capsys):
        assert run('expect', '--median', '--out', tmp_path) == 2
        assert "ERROR: --median requires --mc" in capsys.readouterr().err


def test_demo_command(tmp_path):
    out = tmp_path / 'demo'
    assert run('demo', '--grid', '8x8x64', '--sigma', '0.1', '--kinds', 'drdf', '--out', out) == 0
    table = pd.read_csv(out / 'demo_table.csv')
    assert set(table['decoder']) == {'drdf', 'sal'}
    assert read_json(out / 'config.json')['kinds'] == ['drdf']


def test_plot_command(tmp_path):
    out = tmp_path / 'out'
    run('expect', '--kind', 'drdf', '--points', '11', '--out', out)
    assert run('plot', '--csv', out / 'expect.csv', '--out', out) == 0
    assert (out / 'plot.svg').read_text().lstrip().startswith('<?xml')


class TestExitCodes:
    def test_usage_errors(self, tmp_path, square_obj):
        assert run('unknown') == 2
        assert run('intersect', '--mesh', square_obj, '--grid', '3x3', '--out', tmp_path) == 2
        assert run('field', '--mesh', square_obj, '--kind', 'orf', '--out', tmp_path) == 2
        assert run('expect', '--sigma', '-0.1', '--out', tmp_path) == 2

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        assert run('intersect', '--mesh', tmp_path / 'none.obj', '--out', tmp_path) == 3
        err = capsys.readouterr().err
        assert "ERROR:" in err
        assert "file not found" in err

    def test_numeric_error(self, tmp_path, monkeypatch, capsys):
        def failing(args):
            raise NumericError("crossing lost")

        monkeypatch.setattr(cli, 'cmd_expect', failing)
        assert run('expect', '--out', tmp_path) == 4
        assert "ERROR: crossing lost" in capsys.readouterr().err

    def test_thread_override(self, tmp_path, square_obj, monkeypatch):
        monkeypatch.setenv(cli.THREADS_ENV, '2')
        run('intersect', '--mesh', square_obj, '--grid', '3x3x8', '--out', tmp_path)
        assert read_json(tmp_path / 'config.json')['threads'] == 2
        monkeypatch.setenv(cli.THREADS_ENV, 'many')
        assert run('intersect', '--mesh', square_obj, '--out', tmp_path) == 2


def test_module_entry_point(tmp_path):
    result = subprocess.run([sys.executable, '-m', 'raydist', 'unknown'], cwd=ROOT,
                            capture_output=True, text=True)
    assert result.returncode == 2
    result = subprocess.run([sys.executable, '-m', 'raydist', '--help'], cwd=ROOT,
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert 'intersect' in result.stdout


class TestEvalCamera:
    @pytest.fixture
    def surfaces_pair(self, tmp_path):
        path = tmp_path / 'surfaces.json'
        path.write_text(json.dumps({'height': 1, 'width': 1, 'hits': [[2.0]]}))
        return path

    def test_warns_without_camera(self, tmp_path, surfaces_pair, caplog):
        with caplog.at_level(logging.WARNING, logger='raydist.cli'):
            assert run('eval', '--pred', surfaces_pair, '--gt', surfaces_pair, '--out', tmp_path / 'out') == 0
        assert "identity pose" in caplog.text

    def test_camera_file_silences_warning(self, tmp_path, surfaces_pair, caplog):
        camera = tmp_path / 'camera.json'
        export_json(default_camera(), camera)
        with caplog.at_level(logging.WARNING, logger='raydist.cli'):
            assert run('eval', '--pred', surfaces_pair, '--gt', surfaces_pair, '--camera', camera,
                       '--out', tmp_path / 'out') == 0
        assert "identity pose" not in caplog.text


class TestGoldenOutputs:
    @staticmethod
    def assert_matches(out, case, *names):
        for name in names:
            assert (out / name).read_bytes() == (GOLDEN / case / name).read_bytes(), name

    def test_intersect(self, tmp_path, square_obj):
        out = tmp_path / 'out'
        assert run('intersect', '--mesh', square_obj, '--grid', '3x3x8', '--out', out) == 0
        self.assert_matches(out, 'intersect', 'hits.json', 'hit_histogram.csv')

    def test_field(self, tmp_path, box_obj):
        out = tmp_path / 'out'
        assert run('field', '--mesh', box_obj, '--kind', 'drdf', '--grid', '3x3x10', '--out', out) == 0
        self.assert_matches(out, 'field', 'field.rdfv')

    def test_decode(self, tmp_path):
        out = tmp_path / 'out'
        assert run('decode', '--volume', GOLDEN / 'field' / 'field.rdfv', '--decoder', 'drdf', '--out', out) == 0
        self.assert_matches(out, 'decode', 'surfaces.json')

    def test_expect(self, tmp_path):
        out = tmp_path / 'out'
        assert run('expect', '--kind', 'drdf', '--sigma', '0.1', '--n', '1', '--points', '4',
                   '--z-range', '0', '0.75', '--out', out) == 0
        self.assert_matches(out, 'expect', 'expect.csv')

    def test_eval(self, tmp_path):
        pred = tmp_path / 'pred.json'
        gt = tmp_path / 'gt.json'
        pred.write_text(json.dumps({'height': 1, 'width': 2, 'hits': [[1.0, 2.04, 3.5], [1.0]]}))
        gt.write_text(json.dumps({'height': 1, 'width': 2, 'hits': [[1.0, 2.0, 3.0], [1.0]]}))
        out = tmp_path / 'out'
        assert run('eval', '--pred', pred, '--gt', gt, '--t', '0.1', '--mode', 'occluded', '--out', out) == 0
        self.assert_matches(out, 'eval', 'metrics.json', 'chamfer_curve.csv')


def output_files(root):
    return sorted(p.relative_to(root) for p in root.rglob('*') if p.is_file())


def test_demo_is_byte_reproducible(tmp_path):
    runs = [tmp_path / 'a', tmp_path / 'b']
    for out in runs:
        assert run('demo', '--grid', '8x8x64', '--sigma', '0.1', '0.2', '--kinds', 'drdf',
                   '--seed', '3', '--out', out) == 0
        assert run('plot', '--csv', out / 'hit_histogram.csv', '--x', 'num_hits', '--y', 'fraction',
                   '--out', out / 'plot') == 0
    first, second = runs
    files = output_files(first)
    assert files == output_files(second)
    assert {Path('demo_table.csv'), Path('demo_table.json'), Path('plot/plot.svg')} <= set(files)
    for name in files:
        if name.name == 'config.json':
            a, b = read_json(first / name), read_json(second / name)
            for config in (a, b):
                config.pop('out')
                config.pop('csv', None)
            assert a == b, name
        else:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name
