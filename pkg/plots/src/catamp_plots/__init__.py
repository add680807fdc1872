"""catamp-plots: offline rendering of catamp CSV artifacts."""

__version__ = "0.1.0"

from .render import render_trajectory, render_wigner  # noqa: F401
