"""Batch figure emission from the bitemper harness CSV files."""
from .figures import CLOCKS, KINDS, PlotError, compute_ladder, render

__all__ = ["CLOCKS", "KINDS", "PlotError", "compute_ladder", "render"]
