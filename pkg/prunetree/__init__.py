"""Generalized dynamical pruning of binary trees, critical Galton-Watson
trees, and the one-dimensional ballistic annihilation they describe.
"""

from prunetree.exceptions import PruneTreeError
from prunetree.tree import PlaneTree, TreeBuilder
from prunetree.pruning import prune, prune_mass_equipped
from prunetree.harris import harris_path, level_set_tree
from prunetree.potential import Potential


__version__ = (1, 0)

__all__ = ('PlaneTree', 'TreeBuilder', 'prune', 'prune_mass_equipped',
           'harris_path', 'level_set_tree', 'Potential', 'PruneTreeError')
