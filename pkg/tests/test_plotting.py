"""
Tests cho plotting: đồ thị SVG từ CSV
"""

import pandas as pd
import pytest

from raydist.errors import DataError
from raydist.plotting import _pick_columns, plot_csv, plot_frame


@pytest.fixture
def curve_csv(tmp_path):
    path = tmp_path / 'expect.csv'
    pd.DataFrame({
        'z': [0.0, 0.5, 1.0, 0.0, 0.5, 1.0],
        'analytic': [0.1, 0.4, 0.1, 0.2, 0.3, 0.2],
        'sigma': [0.1, 0.1, 0.1, 0.2, 0.2, 0.2],
    }).to_csv(path, index=False)
    return path


def test_writes_svg(tmp_path, curve_csv):
    out = plot_csv(curve_csv, tmp_path / 'plot.svg')
    text = out.read_text()
    assert text.lstrip().startswith('<?xml')
    assert '<svg' in text


def test_output_is_reproducible(tmp_path, curve_csv):
    a = plot_csv(curve_csv, tmp_path / 'a.svg').read_bytes()
    b = plot_csv(curve_csv, tmp_path / 'b.svg').read_bytes()
    assert a == b


def test_explicit_columns_without_hue():
    df = pd.DataFrame({'t': [0.0, 0.5, 1.0], 'fraction': [0.0, 0.5, 1.0]})
    assert plot_frame(df, x='t', y=['fraction']).startswith(b'<?xml')


def test_unknown_column(curve_csv):
    df = pd.read_csv(curve_csv)
    with pytest.raises(DataError, match="column 'depth' not in CSV"):
        plot_frame(df, x='depth')


def test_no_numeric_columns():
    df = pd.DataFrame({'kind': ['drdf', 'urdf'], 'decoder': ['drdf', 'nms']})
    with pytest.raises(DataError, match="no numeric columns"):
        plot_frame(df)


def test_missing_and_empty_csv(tmp_path):
    with pytest.raises(DataError, match="file not found"):
        plot_csv(tmp_path / 'none.csv', tmp_path / 'plot.svg')
    empty = tmp_path / 'empty.csv'
    empty.write_text('z,value\n')
    with pytest.raises(DataError, match="no rows"):
        plot_csv(empty, tmp_path / 'plot.svg')


def test_default_axes_follow_table_layout():
    df = pd.DataFrame({'kind': ['drdf'] * 4, 'sigma': [0.1, 0.1, 0.2, 0.2], 'n': [1.0] * 4,
                       'z': [0.0, 1.0, 0.0, 1.0], 'analytic': [0.5, -0.5, 0.4, -0.4]})
    x, y_cols, hue = _pick_columns(df, None, None, None)
    assert (x, y_cols, hue) == ('z', ['analytic'], 'sigma')
