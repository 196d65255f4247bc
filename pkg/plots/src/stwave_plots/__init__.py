"""Figure scripts for the space-time denoising benchmark's output files."""

from .data import ResultRow, Volume, read_result_csv, read_volume
from .figures import (
    BoxplotData,
    FigureRequest,
    TemporalCutData,
    TrajectoryData,
    default_cut_index,
    make_boxplot,
    make_temporal_cut,
    make_trajectory,
    render,
)

__version__ = "0.1.0"
