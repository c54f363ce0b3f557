"""
Plotting Module
Module vẽ đồ thị đường từ file CSV ra SVG (không nhúng thời gian, tái lập được)
"""

import io
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from .errors import DataError  # noqa: E402
from .scene_io import atomic_write_bytes  # noqa: E402

logger = logging.getLogger(__name__)

# Cấu hình seaborn
sns.set_style("whitegrid")

# id phần tử SVG cố định giữa các lần chạy
plt.rcParams['svg.hashsalt'] = 'raydist'
plt.rcParams['svg.fonttype'] = 'none'

X_CANDIDATES = ('z', 't', 'sigma')
HUE_CANDIDATES = ('kind', 'sigma', 'decoder')


def _read_csv(csv_path: Union[str, Path]) -> pd.DataFrame:
    try:
        df = pd.read_csv(csv_path)
    except FileNotFoundError:
        raise DataError(f"{csv_path}: file not found") from None
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise DataError(f"{csv_path}: cannot parse CSV ({exc})") from None
    df.columns = df.columns.str.strip()
    if df.empty:
        raise DataError(f"{csv_path}: CSV has no rows")
    return df


def _pick_columns(df: pd.DataFrame, x: Optional[str], y: Optional[Sequence[str]],
                  hue: Optional[str]):
    for name in [x, hue, *(y or [])]:
        if name is not None and name not in df.columns:
            raise DataError(f"column '{name}' not in CSV (have: {', '.join(df.columns)})")
    if x is None:
        x = next((c for c in X_CANDIDATES if c in df.columns), df.columns[0])
    if hue is None:
        hue = next((c for c in HUE_CANDIDATES if c in df.columns and c != x
                    and df[c].nunique() > 1), None)
    if y:
        y_cols = list(y)
    else:
        skip = {x, hue, 'n'}
        y_cols = [c for c in df.select_dtypes(include=[np.number]).columns
                  if c not in skip and not df[c].isna().all()]
    if not y_cols:
        raise DataError("no numeric columns to plot")
    return x, y_cols, hue


def plot_frame(df: pd.DataFrame, x: Optional[str] = None, y: Optional[Sequence[str]] = None,
               hue: Optional[str] = None, title: Optional[str] = None) -> bytes:
    """
    Vẽ đồ thị đường và trả về nội dung SVG

    Args:
        df: Bảng dữ liệu
        x: Cột trục hoành (mặc định cột đầu)
        y: Các cột trục tung (mặc định mọi cột số còn lại)
        hue: Cột phân nhóm (tự chọn trong kind/sigma/decoder nếu có)
        title: Tiêu đề

    Returns:
        Bytes của file SVG
    """
    x, y_cols, hue = _pick_columns(df, x, y, hue)
    fig, ax = plt.subplots(figsize=(8, 5))
    try:
        if hue is not None:
            long = df.melt(id_vars=[x, hue], value_vars=y_cols, var_name='series')
            style = 'series' if len(y_cols) > 1 else None
            sns.lineplot(data=long, x=x, y='value', hue=hue, style=style,
                         estimator=None, sort=True, ax=ax)
            ax.set_ylabel(y_cols[0] if len(y_cols) == 1 else 'value')
        else:
            ordered = df.sort_values(x, kind='mergesort')
            for col in y_cols:
                ax.plot(ordered[x], ordered[col], label=col)
            ax.set_ylabel(y_cols[0] if len(y_cols) == 1 else 'value')
            ax.legend()
        ax.set_xlabel(x)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        buffer = io.BytesIO()
        fig.savefig(buffer, format='svg', metadata={'Date': None})
    finally:
        plt.close(fig)
    return buffer.getvalue()


def plot_csv(csv_path: Union[str, Path], svg_path: Union[str, Path],
             x: Optional[str] = None, y: Optional[List[str]] = None,
             hue: Optional[str] = None, title: Optional[str] = None) -> Path:
    """Đọc CSV và ghi đồ thị SVG (ghi nguyên tử)"""
    df = _read_csv(csv_path)
    svg = plot_frame(df, x, y, hue, title or Path(csv_path).stem)
    out = atomic_write_bytes(svg_path, svg)
    logger.info("Plotted %s -> %s", csv_path, out)
    return out
