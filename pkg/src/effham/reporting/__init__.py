"""
effham reporting package
"""
from .heatmap import HeatmapStyle, heatmap_drawing, render_heatmap
from .tables import trajectory_frame, two_band_frame

__all__ = [
    "HeatmapStyle",
    "heatmap_drawing",
    "render_heatmap",
    "trajectory_frame",
    "two_band_frame",
]
