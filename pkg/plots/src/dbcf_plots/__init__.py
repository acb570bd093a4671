"""Figure rendering for dual-band cell-free sweep outputs."""

from .figures import (
    FIGURE_KINDS,
    FigureSpec,
    SchemaError,
    aggregate_sweep,
    build_figure,
    find_crossing,
    load_beammap,
    load_sweep,
    render,
)

__all__ = [
    "FIGURE_KINDS",
    "FigureSpec",
    "SchemaError",
    "aggregate_sweep",
    "build_figure",
    "find_crossing",
    "load_beammap",
    "load_sweep",
    "render",
]

__version__ = "0.1.0"
