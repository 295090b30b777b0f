"""
SVG heatmaps of scan grids.

Cells are drawn with reportlab graphics shapes and serialized through
``renderSVG``; identical grids give byte-identical documents.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from reportlab.graphics import renderSVG
from reportlab.graphics.shapes import Drawing, Group, Rect, String
from reportlab.lib.colors import Color, HexColor

from ..exceptions import EmptyGrid
from ..models.scan import ScanGrid

logger = logging.getLogger(__name__)

QUANTITY_LABELS = {"Gamma": "Gamma", "OneMinusF": "1 - F"}


class HeatmapStyle(BaseModel):
    """Canvas size, palette and labels of a heatmap"""
    model_config = ConfigDict(frozen=True)

    width: int = Field(480, ge=100)
    height: int = Field(400, ge=100)
    stops: Tuple[str, str, str, str, str] = (
        "#1e3a8a",  # deep blue
        "#0f766e",  # teal
        "#16a34a",  # green
        "#eab308",  # yellow
        "#dc2626",  # red
    )
    nan_color: str = "#9ca3af"
    margin_left: int = 60
    margin_bottom: int = 48
    margin_top: int = 28
    legend_width: int = 70
    x_label: str = "gamma1(T)"
    y_label: str = "d gamma1(T)"
    value_range: Optional[Tuple[float, float]] = None
    font_name: str = "Helvetica"
    font_size: int = 10

    @field_validator("stops")
    @classmethod
    def _hex(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        for stop in value:
            HexColor(stop)
        return value


def interpolate_color(fraction: float, style: HeatmapStyle) -> Color:
    """Linear interpolation between the five colour stops; ``fraction`` in [0, 1]."""
    stops = [HexColor(s) for s in style.stops]
    pos = min(max(fraction, 0.0), 1.0) * (len(stops) - 1)
    k = min(int(math.floor(pos)), len(stops) - 2)
    frac = pos - k
    a, b = stops[k], stops[k + 1]
    return Color(
        round(a.red + (b.red - a.red) * frac, 6),
        round(a.green + (b.green - a.green) * frac, 6),
        round(a.blue + (b.blue - a.blue) * frac, 6),
    )


def _value_range(values: np.ndarray, style: HeatmapStyle) -> Optional[Tuple[float, float]]:
    if style.value_range is not None:
        return style.value_range
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return None
    return float(finite.min()), float(finite.max())


def _fraction(value: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    return (value - lo) / (hi - lo)


def heatmap_drawing(grid: ScanGrid, which: str = "Gamma", style: Optional[HeatmapStyle] = None) -> Drawing:
    """
    Build the heatmap as a reportlab ``Drawing``.

    gamma1(T) runs along x and d gamma1(T) along y. The cell rectangles
    are collected in the ``cells`` group (one per grid cell, gamma1 outer),
    the colour bar in ``legend``.

    Raises:
        EmptyGrid: If either axis is empty
    """
    style = style or HeatmapStyle()
    n1, n2 = grid.shape
    if n1 == 0 or n2 == 0:
        raise EmptyGrid("Cannot render an empty grid", field="grid")
    values = grid.values(which)
    bounds = _value_range(values, style)
    nan_fill = HexColor(style.nan_color)

    drawing = Drawing(style.width, style.height)
    plot_w = style.width - style.margin_left - style.legend_width
    plot_h = style.height - style.margin_bottom - style.margin_top
    cell_w = plot_w / n1
    cell_h = plot_h / n2

    cells = Group()
    for i in range(n1):
        for j in range(n2):
            v = float(values[i, j])
            if bounds is None or not math.isfinite(v):
                fill = nan_fill
            else:
                fill = interpolate_color(_fraction(v, *bounds), style)
            cells.add(
                Rect(
                    style.margin_left + i * cell_w,
                    style.margin_bottom + j * cell_h,
                    cell_w,
                    cell_h,
                    fillColor=fill,
                    strokeColor=None,
                )
            )
    drawing.add(cells, name="cells")

    legend = Group()
    bar_x = style.width - style.legend_width + 16
    bar_w = 14
    bands = 50
    band_h = plot_h / bands
    for b in range(bands):
        legend.add(
            Rect(
                bar_x,
                style.margin_bottom + b * band_h,
                bar_w,
                band_h,
                fillColor=interpolate_color((b + 0.5) / bands, style),
                strokeColor=None,
            )
        )
    lo_text, hi_text = ("n/a", "n/a") if bounds is None else (f"{bounds[0]:.3g}", f"{bounds[1]:.3g}")
    legend.add(String(bar_x, style.margin_bottom - 12, lo_text, fontName=style.font_name, fontSize=style.font_size))
    legend.add(String(bar_x, style.margin_bottom + plot_h + 4, hi_text, fontName=style.font_name, fontSize=style.font_size))
    drawing.add(legend, name="legend")

    labels = Group()
    labels.add(
        String(
            style.margin_left + plot_w / 2,
            12,
            f"{style.x_label}  [{grid.gamma1_T[0]:.3g}, {grid.gamma1_T[-1]:.3g}]",
            fontName=style.font_name,
            fontSize=style.font_size,
            textAnchor="middle",
        )
    )
    y_text = String(
        0,
        0,
        f"{style.y_label}  [{grid.dgamma1_T[0]:.3g}, {grid.dgamma1_T[-1]:.3g}]",
        fontName=style.font_name,
        fontSize=style.font_size,
        textAnchor="middle",
    )
    y_group = Group(y_text)
    y_group.translate(18, style.margin_bottom + plot_h / 2)
    y_group.rotate(90)
    labels.add(y_group)
    labels.add(
        String(
            style.margin_left,
            style.height - style.margin_top + 10,
            QUANTITY_LABELS.get(which, which),
            fontName=style.font_name,
            fontSize=style.font_size + 2,
        )
    )
    drawing.add(labels, name="labels")
    return drawing


def render_heatmap(grid: ScanGrid, which: str = "Gamma", style: Optional[HeatmapStyle] = None) -> str:
    """Render ``grid`` as an SVG document string"""
    drawing = heatmap_drawing(grid, which, style)
    logger.debug(f"Rendering {which} heatmap for a {grid.shape[0]}x{grid.shape[1]} grid")
    return renderSVG.drawToString(drawing)
