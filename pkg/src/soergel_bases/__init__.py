"""Soergel bimodules, their idempotents, and the Hecke-algebra bases they produce."""

__version__ = "0.1.0"

from .coxeter import CoxeterSystem, build_system, dihedral  # noqa: E402
from .polyring import PolyRing  # noqa: E402
from .hecke import HeckeAlgebra, HeckeElement, LaurentPoly  # noqa: E402
from .bsmod import BSContext, BSModule, BSMorphism, StandardTarget  # noqa: E402
from .catbases import Workspace, build_D, build_E, decategorify  # noqa: E402

__all__ = ["CoxeterSystem", "build_system", "dihedral", "PolyRing", "HeckeAlgebra", "HeckeElement",
           "LaurentPoly", "BSContext", "BSModule", "BSMorphism", "StandardTarget", "Workspace",
           "build_D", "build_E", "decategorify"]
