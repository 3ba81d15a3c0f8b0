"""Generalized dynamical pruning.

``prune(tree, phi, t)`` keeps the root together with every point whose
descendant tree has a ``phi`` value of at least ``t``, and returns the
series-reduced result along with the set of cut points::

    >>> tree = PlaneTree.from_nested((3.0, 1.0, 2.0))
    >>> pruned, cuts = prune(tree, 'length', 1.5)
    >>> length(pruned)
    3.5

Functionals are looked up by name from a registry, like filters in an
asset pipeline; ``height``, ``horton``, ``length`` and ``leaves`` are
built in, and :class:`Custom` wraps user supplied callables.
"""

import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Optional

from scipy.optimize import brentq

from prunetree.exceptions import (
    AdmissibilityError, DomainError, InvalidTreeError,
    NonMonotoneFunctionalError)
from prunetree.tree import (
    LEFT, RIGHT, PlaneTree, TreeBuilder, TreePoint, descendant_subtree,
    height, horton_order, length, num_leaves, strahler_numbers,
    subtree_heights, subtree_leaf_counts, subtree_lengths)


__all__ = (
    'PruningFunctional', 'Height', 'HortonOrder', 'Length', 'LeafCount',
    'Custom', 'register_functional', 'get_functional', 'RemovedPart', 'Cut',
    'CutSet', 'PruneResult', 'prune', 'horton_prune', 'edge_crossing',
    'SingleMass', 'DoubleMass', 'InteriorMass', 'MassTree',
    'prune_mass_equipped',
)


class PruningFunctional(object):
    """A functional on trees that does not decrease towards the root.

    ``value(tree)`` evaluates the functional on a whole tree. During
    pruning it is needed at every point of an edge; ``edge_profile``
    gives ``phi`` of the descendant tree of the point at ``offset`` above
    a vertex, from the value at that vertex.
    """

    name = None
    # Custom functionals get the descendant tree of each vertex handed to
    # edge_profile; the built-ins only look at the vertex value.
    needs_subtrees = False

    def value(self, tree):
        raise NotImplementedError()

    def vertex_values(self, tree):
        return [self.value(descendant_subtree(tree, TreePoint(node, 0.0)))
                for node in tree.preorder()]

    def edge_profile(self, child_value, child_subtree, offset):
        raise NotImplementedError()

    def threshold(self, t):
        return t

    def crossing(self, child_value, child_subtree, edge_length, threshold):
        """Smallest offset at which the profile reaches ``threshold``, or
        ``None`` if the edge stays below it."""
        if child_value >= threshold:
            return 0.0

        def gap(offset):
            return self.edge_profile(child_value, child_subtree,
                                     offset) - threshold

        top = edge_length
        if math.isinf(top):
            top = 1.0
            for _ in range(64):
                if gap(top) >= 0:
                    break
                top *= 2
            else:
                return None
        if gap(top) < 0:
            return None
        offset = brentq(gap, 0.0, top, xtol=1e-13)
        # Step profiles: move past the jump if brentq stopped just short.
        while gap(offset) < 0 and offset < top:
            offset = min(top, offset + 1e-13)
        return offset

    def __repr__(self):
        return '<%s %s>' % (type(self).__name__, self.name)


class _LinearProfile(PruningFunctional):
    """Functionals growing by the offset along an edge."""

    def edge_profile(self, child_value, child_subtree, offset):
        return child_value + offset

    def crossing(self, child_value, child_subtree, edge_length, threshold):
        offset = threshold - child_value
        if offset <= 0:
            return 0.0
        if offset > edge_length:
            return None
        return offset


class Height(_LinearProfile):
    name = 'height'

    def value(self, tree):
        return height(tree)

    def vertex_values(self, tree):
        return subtree_heights(tree)


class Length(_LinearProfile):
    name = 'length'

    def value(self, tree):
        return length(tree)

    def vertex_values(self, tree):
        return subtree_lengths(tree)


class _ConstantProfile(PruningFunctional):
    """Integer valued functionals, constant on edge interiors.

    The value at a leaf vertex is that of the empty tree; just above it
    the descendant tree is a single edge, whose value is ``edge_floor``.
    """

    edge_floor = None

    def edge_profile(self, child_value, child_subtree, offset):
        if offset > 0:
            return max(child_value, self.edge_floor)
        return child_value

    def crossing(self, child_value, child_subtree, edge_length, threshold):
        if max(child_value, self.edge_floor) >= threshold:
            return 0.0
        return None


class HortonOrder(_ConstantProfile):
    """``k(T) - 1``. The threshold is rounded down, so that pruning at
    time ``t`` is ``floor(t)`` Horton prunings."""

    name = 'horton'
    edge_floor = 0

    def value(self, tree):
        return horton_order(tree) - 1

    def vertex_values(self, tree):
        orders = strahler_numbers(tree)
        return [-1 if tree.is_leaf(n) else orders[n] - 1
                for n in tree.preorder()]

    def threshold(self, t):
        return math.floor(t)


class LeafCount(_ConstantProfile):
    name = 'leaves'
    edge_floor = 1

    def value(self, tree):
        return num_leaves(tree)

    def vertex_values(self, tree):
        counts = subtree_leaf_counts(tree)
        return [0 if tree.is_leaf(n) else counts[n]
                for n in tree.preorder()]


class Custom(PruningFunctional):
    """Functional given by ``value(tree)`` and
    ``edge_profile(child_value, child_subtree, offset)``.

    Crossings are found numerically; monotonicity is spot-checked at the
    ends of every edge while pruning.
    """

    name = 'custom'
    needs_subtrees = True

    def __init__(self, value, edge_profile, name=None):
        self._value = value
        self._edge_profile = edge_profile
        if name:
            self.name = name

    def value(self, tree):
        return self._value(tree)

    def edge_profile(self, child_value, child_subtree, offset):
        return self._edge_profile(child_value, child_subtree, offset)


_FUNCTIONALS = {}


def register_functional(klass):
    """Make a functional class available by its ``name``."""
    if not klass.name:
        raise ValueError('functional %s has no name' % klass)
    _FUNCTIONALS[klass.name] = klass
    return klass


for _klass in (Height, HortonOrder, Length, LeafCount):
    register_functional(_klass)


def get_functional(f):
    """Resolve a name or class to a functional instance."""
    if isinstance(f, PruningFunctional):
        return f
    if isinstance(f, type) and issubclass(f, PruningFunctional):
        return f()
    try:
        return _FUNCTIONALS[f]()
    except KeyError:
        raise ValueError('Pruning functional "%s" is not registered' % f)


@dataclass(frozen=True)
class RemovedPart:
    """A piece of the original tree erased at a cut.

    ``node`` is the original edge; ``offset`` how much of it (from its
    lower end) was erased together with everything below. ``side`` is
    the plane side of the erased subtree at a vertex cut, ``None`` for
    a cut inside an edge.
    """
    node: int
    offset: float
    side: Optional[str]
    length: float
    value: float


@dataclass(frozen=True)
class Cut:
    point: TreePoint
    removed: tuple

    @property
    def kind(self):
        """``'leaf'`` for a cut inside an edge, ``'double'`` when both
        subtrees of a vertex went, ``'interior'`` when one of them did,
        ``'root'`` when the whole tree went."""
        if self.point.is_root and len(self.removed) == 1 and \
                self.removed[0].side is None:
            return 'root'
        if len(self.removed) == 2:
            return 'double'
        if self.removed[0].side is None:
            return 'leaf'
        return 'interior'

    @property
    def removed_length(self):
        return sum(part.length for part in self.removed)


@dataclass(frozen=True)
class CutSet:
    cuts: tuple = ()

    def __iter__(self):
        return iter(self.cuts)

    def __len__(self):
        return len(self.cuts)

    @property
    def removed_length(self):
        return sum(cut.removed_length for cut in self.cuts)

    def to_list(self):
        return [{'edge': cut.point.edge, 'offset': cut.point.offset,
                 'kind': cut.kind,
                 'removed': [{'node': p.node, 'offset': p.offset,
                              'side': p.side, 'length': p.length,
                              'value': p.value} for p in cut.removed]}
                for cut in self.cuts]


PruneResult = namedtuple('PruneResult', 'tree cuts')


def _check_monotone(phi, tree, values, subtrees):
    for node in tree.preorder():
        record = tree.nodes[node]
        top = phi.edge_profile(values[node], subtrees(node), record.length)
        slack = 1e-12 * max(1.0, abs(top))
        if values[node] > top + slack or (
                record.parent is not None and top > values[record.parent] +
                slack):
            raise NonMonotoneFunctionalError(
                'functional %r decreases towards the root on edge %d' %
                (phi, node))


def prune(tree, phi, t):
    """Apply the pruning operator at time ``t``.

    Returns ``PruneResult(tree, cuts)``. Points with a value equal to
    ``t`` are kept, but an edge that would keep only its upper end point
    goes. A planted tree stays planted, with a possibly shorter stem; it
    becomes empty once no positive length of the stem is left.
    """
    phi = get_functional(phi)
    if not t >= 0:
        raise DomainError('pruning time must be non-negative, got %r' % t)
    if tree.is_empty:
        return PruneResult(tree, CutSet())

    threshold = phi.threshold(t)
    values = phi.vertex_values(tree)
    if phi.needs_subtrees:
        def subtrees(node):
            return descendant_subtree(tree, TreePoint(node, 0.0))
    else:
        def subtrees(node):
            return None
    _check_monotone(phi, tree, values, subtrees)
    below = subtree_lengths(tree)

    builder = TreeBuilder()
    pending = []
    work = [(None, None)]
    while work:
        old, new = work.pop()
        kids = tree.children(old)
        if old is None and tree.planted:
            sides = [None]
        else:
            sides = [LEFT, RIGHT]
        removed, kept = [], []
        for kid, side in zip(kids, sides):
            edge = tree.nodes[kid].length
            sub = subtrees(kid)
            offset = phi.crossing(values[kid], sub, edge, threshold)
            if offset is None or offset >= edge:
                removed.append(RemovedPart(
                    kid, edge, side, below[kid] + edge,
                    phi.edge_profile(values[kid], sub, edge)))
            else:
                kept.append((kid, side, offset, sub))
        if removed:
            pending.append((new, tuple(removed)))
        descend = []
        for kid, side, offset, sub in kept:
            new_kid = builder.add(new, tree.nodes[kid].length - offset, side)
            if offset > 0:
                pending.append((new_kid, (RemovedPart(
                    kid, offset, None, below[kid] + offset,
                    phi.edge_profile(values[kid], sub, offset)),)))
            elif not tree.is_leaf(kid):
                descend.append((kid, new_kid))
        work.extend(reversed(descend))

    pruned, points = builder.reduce()
    cuts = []
    for new, removed in pending:
        if new is not None:
            point = points[new]
        elif pruned.is_empty:
            point = TreePoint.root()
        else:
            # A stemless root lost a subtree: the root now sits on top of
            # the surviving edge.
            top = pruned.root_child
            point = TreePoint(top, pruned.nodes[top].length)
        cuts.append(Cut(point, removed))
    return PruneResult(pruned, CutSet(tuple(cuts)))


def horton_prune(tree):
    """Cut all leaves, then series-reduce."""
    builder = TreeBuilder()
    for top in tree.root_children:
        builder.add_subtree(None, tree, top, side=tree.side(top))
    for node in _builder_leaves(builder):
        builder.remove(node)
    return builder.reduce()[0]


def _builder_leaves(builder):
    return [n for n in range(len(builder))
            if builder.alive[n] and not builder.children(n)]


def edge_crossing(child_subtree, phi, t, edge_length=math.inf):
    """Offset above the root of ``child_subtree`` at which the descendant
    tree reaches ``phi >= t``, or ``None`` within ``edge_length``."""
    phi = get_functional(phi)
    return phi.crossing(phi.value(child_subtree), child_subtree,
                        edge_length, phi.threshold(t))


@dataclass(frozen=True)
class SingleMass:
    mass: float

    @property
    def total(self):
        return self.mass


@dataclass(frozen=True)
class DoubleMass:
    left: float
    right: float

    @property
    def total(self):
        return self.left + self.right


@dataclass(frozen=True)
class InteriorMass:
    """A point mass inside an edge of the base tree.

    ``orientation`` is the plane side on which the erased subtree used
    to hang: ``'L'`` masses sit on the way down the Harris path.
    """
    edge: int
    offset: float
    mass: float
    orientation: str


@dataclass(frozen=True)
class MassTree:
    """A plane tree with point masses at leaves and inside edges.

    ``root_mass`` is set when the whole tree has been pruned away and
    its mass sits at the root.
    """
    base: PlaneTree
    leaf_masses: dict = field(default_factory=dict)
    interior_masses: tuple = ()
    root_mass: Optional[float] = None

    @property
    def total_mass(self):
        total = sum(m.total for m in self.leaf_masses.values())
        total += sum(m.mass for m in self.interior_masses)
        return total + (self.root_mass or 0.0)

    def masses_on_edge(self, edge):
        return sorted((m for m in self.interior_masses if m.edge == edge),
                      key=lambda m: m.offset)

    def admissibility_errors(self, t, tol=1e-9):
        errors = []
        slack = tol * max(1.0, 2 * t)
        for m in self.interior_masses:
            if not m.mass < 2 * t + slack or m.mass < 0:
                errors.append('interior mass %r on edge %d is not in '
                              '[0, 2t)' % (m.mass, m.edge))
        for leaf in self.base.leaves():
            m = self.leaf_masses.get(leaf)
            if m is None:
                if t > 0:
                    errors.append('leaf %d carries no mass' % leaf)
            elif isinstance(m, SingleMass):
                if abs(m.mass - 2 * t) > slack:
                    errors.append('single leaf mass %r at leaf %d differs '
                                  'from 2t' % (m.mass, leaf))
            elif not m.total > 2 * t - slack or min(m.left, m.right) < 0:
                errors.append('double leaf mass %r at leaf %d does not '
                              'exceed 2t' % ((m.left, m.right), leaf))
        extra = set(self.leaf_masses) - set(self.base.leaves())
        if extra:
            errors.append('leaf masses attached to non-leaves %s' %
                          sorted(extra))
        if self.root_mass is not None and not self.base.is_empty:
            errors.append('root mass on a non-empty tree')
        return errors

    def is_admissible(self, t, tol=1e-9):
        return not self.admissibility_errors(t, tol)

    def check_admissible(self, t, tol=1e-9):
        errors = self.admissibility_errors(t, tol)
        if errors:
            raise AdmissibilityError(
                'mass tree is not %r-admissible: %s' % (t, '; '.join(errors)))

    def newick_annotations(self):
        notes = {}
        for leaf, m in self.leaf_masses.items():
            if isinstance(m, SingleMass):
                notes[leaf] = 'mass=%r' % m.mass
            else:
                notes[leaf] = 'mL=%r,mR=%r' % (m.left, m.right)
        for edge in {m.edge for m in self.interior_masses}:
            inner = '|'.join('%r:%r:%s' % (m.offset, m.mass, m.orientation)
                             for m in self.masses_on_edge(edge))
            notes[edge] = ','.join(filter(None, (notes.get(edge),
                                                 'interior=' + inner)))
        return notes


def prune_mass_equipped(tree, t):
    """Prune by length and record twice each erased length as a mass at
    the cut where it was erased."""
    pruned, cuts = prune(tree, Length(), t)
    leaf_masses = {}
    interior = []
    root_mass = None
    if t == 0:
        return MassTree(pruned)
    for cut in cuts:
        kind = cut.kind
        if kind == 'root':
            root_mass = 2 * cut.removed_length
        elif kind == 'leaf':
            leaf_masses[cut.point.edge] = SingleMass(2 * cut.removed_length)
        elif kind == 'double':
            sides = {p.side: 2 * p.length for p in cut.removed}
            if cut.point.is_root:
                root_mass = sum(sides.values())
            else:
                leaf_masses[cut.point.edge] = DoubleMass(sides[LEFT],
                                                         sides[RIGHT])
        else:
            part = cut.removed[0]
            interior.append(InteriorMass(cut.point.edge, cut.point.offset,
                                         2 * part.length, part.side))
    if root_mass is not None and not pruned.is_empty:
        raise InvalidTreeError('root mass left on a non-empty pruned tree')
    interior.sort(key=lambda m: (m.edge, m.offset))
    return MassTree(pruned, leaf_masses, tuple(interior), root_mass)
