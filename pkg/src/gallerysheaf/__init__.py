"""Equivariant cohomology of Bott-Samelson varieties, done combinatorially.

The package computes with combinatorial galleries attached to a word in
simple reflections of a finite Weyl group.  All arithmetic is exact: Weyl
group elements are integer matrices on the root lattice, cohomology classes
are sparse polynomials over Q in the simple roots, and every structural
identity (localization matrices, congruence descriptions of restriction
images, fibre bases, sheaves on the Bruhat graph and their decompositions)
is verified by exact computation rather than floating point.
"""

from gallerysheaf.rootsys import RootSystem, WeylElement, build_root_system
from gallerysheaf.symalg import Polynomial, RationalFunction
from gallerysheaf.galleries import Gallery, WordData

__all__ = [
    "RootSystem",
    "WeylElement",
    "build_root_system",
    "Polynomial",
    "RationalFunction",
    "Gallery",
    "WordData",
]

__version__ = "0.1.0"
