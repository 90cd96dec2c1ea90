"""Pseudo-spectral Dirac-Klein-Gordon simulator on the 2D torus with numerical
checks of the multilinear estimates behind small-data scattering."""
from .fields import MassPair, ScalarField, SpinorField, Trajectory
from .grid import SpaceTimeGrid, SpatialGrid, make_grid, make_spacetime_grid
from .report import LemmaReport

__all__ = ["MassPair", "ScalarField", "SpinorField", "Trajectory", "SpaceTimeGrid",
           "SpatialGrid", "make_grid", "make_spacetime_grid", "LemmaReport"]
__version__ = "0.1.0"
