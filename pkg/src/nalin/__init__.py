"""Finite-group Max-k-LIN toolkit: groups, irreps, Fourier analysis on G^n, solvers,
the three-query dictatorship test and the Label Cover reduction with folded long codes."""
from .errors import NalinError
from .group import FiniteGroup, catalog_group, load_group
from .reps import IrrepSet, irreps_of

__version__ = "0.1.0"

__all__ = ["FiniteGroup", "IrrepSet", "NalinError", "catalog_group", "irreps_of", "load_group",
           "__version__"]
