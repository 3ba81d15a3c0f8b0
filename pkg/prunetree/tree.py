"""Finite rooted binary plane trees with edge lengths.

A :class:`PlaneTree` is an immutable arena. Every entry is a
:class:`NodeRecord` describing one non-root vertex together with the
edge above it; the root itself has no record. Its children are listed in
``root_children``:

* no children: the empty tree,
* one child: a planted tree (the root child's edge is the stem),
* two children: a stemless tree.

Nodes are always numbered in depth-first preorder, left before right,
so two trees with the same plane shape have the same arena layout and
can be compared entry by entry.

Trees are built with :class:`TreeBuilder`, which supports tombstoned
deletion and compacts into a fresh :class:`PlaneTree`::

    >>> tree = PlaneTree.from_nested((3.0, 1.0, 2.0))
    >>> length(tree), height(tree), num_leaves(tree)
    (6.0, 5.0, 2)
"""

from dataclasses import dataclass
from typing import Optional

from prunetree.exceptions import InvalidTreeError, TreeSizeError


__all__ = (
    'NodeRecord', 'TreePoint', 'PlaneTree', 'TreeBuilder',
    'CombinatorialShape', 'length', 'height', 'num_leaves', 'horton_order',
    'strahler_numbers', 'descendant_subtree', 'series_reduce',
    'check_positive_lengths', 'is_embeddable', 'shape', 'trees_close',
    'node_depths',
    'subtree_lengths', 'subtree_heights', 'subtree_leaf_counts',
)


LEFT = 'L'
RIGHT = 'R'

EMBEDDING_SIZE_LIMIT = 12


@dataclass(frozen=True)
class NodeRecord:
    parent: Optional[int]
    left: Optional[int]
    right: Optional[int]
    length: float

    @property
    def is_leaf(self):
        return self.left is None and self.right is None

    @property
    def children(self):
        return tuple(c for c in (self.left, self.right) if c is not None)


@dataclass(frozen=True)
class TreePoint:
    """A point of a tree: the point at distance ``offset`` above the
    lower endpoint of the edge leading into node ``edge``.

    ``edge=None`` denotes the root.
    """
    edge: Optional[int]
    offset: float = 0.0

    @classmethod
    def root(cls):
        return cls(None, 0.0)

    @property
    def is_root(self):
        return self.edge is None


class PlaneTree(object):

    __slots__ = ('nodes', 'root_children')

    def __init__(self, nodes, root_children):
        self.nodes = tuple(nodes)
        self.root_children = tuple(root_children)
        self._validate()

    def _validate(self):
        if len(self.root_children) > 2:
            raise InvalidTreeError(
                'the root has at most two children, got %d' %
                len(self.root_children))
        if not self.nodes and self.root_children:
            raise InvalidTreeError('root children of an empty arena')

        expected = 0
        stack = list(reversed(self.root_children))
        while stack:
            node = stack.pop()
            if node != expected:
                raise InvalidTreeError(
                    'nodes must be numbered in depth-first preorder '
                    '(found %s at position %d)' % (node, expected))
            expected += 1
            record = self.nodes[node]
            if record.parent is None:
                if node not in self.root_children:
                    raise InvalidTreeError(
                        'node %d claims the root as parent' % node)
                # zero for the descendant tree of a vertex
                if record.length < 0:
                    raise InvalidTreeError(
                        'edge lengths must be non-negative (node %d)' % node)
            else:
                parent = self.nodes[record.parent]
                if node not in (parent.left, parent.right):
                    raise InvalidTreeError(
                        'parent link of node %d is not reciprocated' % node)
                if not record.length > 0:
                    raise InvalidTreeError(
                        'edge lengths must be positive (node %d has %r)' %
                        (node, record.length))
            if (record.left is None) != (record.right is None):
                raise InvalidTreeError(
                    'tree is not reduced binary: node %d has one child' %
                    node)
            stack.extend(reversed(record.children))
        if expected != len(self.nodes):
            raise InvalidTreeError(
                'arena holds %d records but only %d are reachable' %
                (len(self.nodes), expected))

    @classmethod
    def empty(cls):
        return cls((), ())

    @classmethod
    def from_nested(cls, spec):
        """Build a planted tree from a nested description.

        A number is a leaf edge of that length; ``(length, left, right)``
        is an edge of that length above a vertex with two subtrees.
        """
        builder = TreeBuilder()
        builder.add_nested(None, spec)
        return check_positive_lengths(builder.compact())

    @classmethod
    def stemless(cls, left, right):
        builder = TreeBuilder()
        builder.add_nested(None, left, side=LEFT)
        builder.add_nested(None, right, side=RIGHT)
        return check_positive_lengths(builder.compact())

    @property
    def is_empty(self):
        return not self.root_children

    @property
    def planted(self):
        return len(self.root_children) == 1

    @property
    def root_child(self):
        return self.root_children[0] if self.planted else None

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, PlaneTree):
            return NotImplemented
        return (self.root_children == other.root_children and
                self.nodes == other.nodes)

    def __hash__(self):
        return hash((self.root_children, self.nodes))

    def __repr__(self):
        from prunetree.formats import to_newick
        return '<PlaneTree %s>' % to_newick(self)

    def children(self, node):
        if node is None:
            return self.root_children
        return self.nodes[node].children

    def is_leaf(self, node):
        return self.nodes[node].is_leaf

    def edge_length(self, node):
        return self.nodes[node].length

    def side(self, node):
        """Plane side of ``node`` among its siblings, ``None`` for a stem."""
        parent = self.nodes[node].parent
        if parent is None:
            if self.planted:
                return None
            return LEFT if self.root_children[0] == node else RIGHT
        return LEFT if self.nodes[parent].left == node else RIGHT

    def preorder(self):
        return range(len(self.nodes))

    def postorder(self):
        # Children follow their parent in preorder.
        return range(len(self.nodes) - 1, -1, -1)

    def leaves(self):
        """Leaf ids in plane (left to right) order."""
        return [n for n in self.preorder() if self.nodes[n].is_leaf]

    def check_point(self, point):
        if point.is_root:
            return
        if not 0 <= point.edge < len(self.nodes):
            raise InvalidTreeError('point on unknown edge %r' % point.edge)
        if not 0 <= point.offset <= self.nodes[point.edge].length:
            raise InvalidTreeError(
                'point offset %r outside edge %d of length %r' % (
                    point.offset, point.edge,
                    self.nodes[point.edge].length))


class TreeBuilder(object):
    """Mutable arena used while constructing or pruning a tree.

    Nodes may temporarily have a single child; :meth:`reduce` removes
    such vertices, :meth:`compact` requires a reduced tree.
    """

    def __init__(self):
        self.parent = []
        self.left = []
        self.right = []
        self.length = []
        self.alive = []
        self.root_children = []

    def __len__(self):
        return len(self.parent)

    def add(self, parent, length, side=None):
        node = len(self.parent)
        self.parent.append(parent)
        self.left.append(None)
        self.right.append(None)
        self.length.append(float(length))
        self.alive.append(True)
        if parent is None:
            if side == RIGHT:
                self.root_children.append(node)
            elif side == LEFT:
                self.root_children.insert(0, node)
            else:
                if self.root_children:
                    raise InvalidTreeError('a planted root has one child')
                self.root_children.append(node)
        elif side == RIGHT:
            self.right[parent] = node
        else:
            self.left[parent] = node
        return node

    def add_nested(self, parent, spec, side=None):
        if isinstance(spec, (tuple, list)):
            edge, left, right = spec
            node = self.add(parent, edge, side)
            self.add_nested(node, left, LEFT)
            self.add_nested(node, right, RIGHT)
        else:
            node = self.add(parent, spec, side)
        return node

    def add_subtree(self, parent, tree, node, side=None, length=None):
        """Copy the subtree of ``tree`` below (and including) ``node``."""
        top = self.add(parent, tree.nodes[node].length
                       if length is None else length, side)
        stack = [(top, node)]
        while stack:
            new, old = stack.pop()
            record = tree.nodes[old]
            if record.is_leaf:
                continue
            left = self.add(new, tree.nodes[record.left].length, LEFT)
            right = self.add(new, tree.nodes[record.right].length, RIGHT)
            stack.append((right, record.right))
            stack.append((left, record.left))
        return top

    def children(self, node):
        if node is None:
            kids = self.root_children
        else:
            kids = (self.left[node], self.right[node])
        return [c for c in kids if c is not None and self.alive[c]]

    def remove(self, node):
        """Tombstone ``node`` and everything below it."""
        parent = self.parent[node]
        if parent is None:
            self.root_children.remove(node)
        elif self.left[parent] == node:
            self.left[parent] = None
        else:
            self.right[parent] = None
        stack = [node]
        while stack:
            n = stack.pop()
            self.alive[n] = False
            stack.extend(c for c in (self.left[n], self.right[n])
                         if c is not None)

    def reduce(self):
        """Series-reduce and compact.

        Returns the reduced tree and a mapping from every live builder
        node to the :class:`TreePoint` where its lower vertex ended up.
        """
        nodes = []
        points = {}
        stack = [(c, None, side) for c, side in
                 reversed(self._root_sides())]
        while stack:
            top, new_parent, side = stack.pop()
            chain = [top]
            total = self.length[top]
            kids = self.children(top)
            while len(kids) == 1:
                chain.append(kids[0])
                total += self.length[kids[0]]
                kids = self.children(kids[0])
            new = len(nodes)
            nodes.append([new_parent, None, None, total])
            if new_parent is not None:
                nodes[new_parent][1 if side == LEFT else 2] = new
            below = 0.0
            for old in reversed(chain):
                points[old] = TreePoint(new, below)
                below += self.length[old]
            if kids:
                stack.append((kids[1], new, RIGHT))
                stack.append((kids[0], new, LEFT))
        tree = PlaneTree(
            [NodeRecord(*n) for n in nodes],
            [i for i, n in enumerate(nodes) if n[0] is None])
        return tree, points

    def _root_sides(self):
        kids = self.children(None)
        if len(kids) == 2:
            return [(kids[0], LEFT), (kids[1], RIGHT)]
        return [(k, None) for k in kids]

    def compact(self):
        tree, points = self.reduce()
        if any(p.offset for p in points.values()):
            raise InvalidTreeError(
                'builder holds degree-two vertices; series-reduce first')
        return tree


def node_depths(tree):
    """Distance from the root to the lower endpoint of every edge."""
    depths = [0.0] * len(tree)
    for node in tree.preorder():
        record = tree.nodes[node]
        above = 0.0 if record.parent is None else depths[record.parent]
        depths[node] = above + record.length
    return depths


def _bottom_up(tree, leaf_value, combine):
    values = [None] * len(tree)
    for node in tree.postorder():
        record = tree.nodes[node]
        if record.is_leaf:
            values[node] = leaf_value(node)
        else:
            values[node] = combine(node, values[record.left],
                                   values[record.right])
    return values


def subtree_lengths(tree):
    """Total length of the subtree hanging below each node (its own edge
    excluded)."""
    nodes = tree.nodes
    return _bottom_up(
        tree, lambda n: 0.0,
        lambda n, l, r: l + r + nodes[nodes[n].left].length +
        nodes[nodes[n].right].length)


def subtree_heights(tree):
    nodes = tree.nodes
    return _bottom_up(
        tree, lambda n: 0.0,
        lambda n, l, r: max(l + nodes[nodes[n].left].length,
                            r + nodes[nodes[n].right].length))


def subtree_leaf_counts(tree):
    return _bottom_up(tree, lambda n: 1, lambda n, l, r: l + r)


def _strahler(a, b):
    return a + 1 if a == b else max(a, b)


def strahler_numbers(tree):
    """Horton-Strahler order of the subtree below each vertex."""
    return _bottom_up(tree, lambda n: 1, lambda n, l, r: _strahler(l, r))


def length(tree):
    return float(sum(record.length for record in tree.nodes))


def height(tree):
    if tree.is_empty:
        return 0.0
    return max(node_depths(tree))


def num_leaves(tree):
    return sum(1 for record in tree.nodes if record.is_leaf)


def horton_order(tree):
    """Number of Horton prunings that eliminate a planted tree; for a
    stemless tree that number plus one. The empty tree has order 0."""
    if tree.is_empty:
        return 0
    orders = strahler_numbers(tree)
    kids = tree.root_children
    if len(kids) == 1:
        return orders[kids[0]]
    return _strahler(orders[kids[0]], orders[kids[1]])


def check_positive_lengths(tree):
    """Return ``tree`` if all its edges, the stem included, are longer
    than zero. Trees read from user input must pass this."""
    for node, record in enumerate(tree.nodes):
        if not record.length > 0:
            raise InvalidTreeError(
                'edge lengths must be positive (node %d has %r)' %
                (node, record.length))
    return tree


def descendant_subtree(tree, at):
    """The descendant tree of a point, planted at that point.

    The part of the edge below the point becomes the stem. A point at a
    leaf vertex has an empty descendant tree; a point at an internal
    vertex yields a tree with a zero-length stem.
    """
    tree.check_point(at)
    if at.is_root:
        return tree
    record = tree.nodes[at.edge]
    if at.offset == 0 and record.is_leaf:
        return PlaneTree.empty()
    builder = TreeBuilder()
    builder.add_subtree(None, tree, at.edge, length=at.offset)
    tree, _ = builder.reduce()
    return tree


def series_reduce(tree):
    """Merge the two edges at every degree-two non-root vertex.

    Accepts a :class:`TreeBuilder` (which may hold such vertices) or a
    :class:`PlaneTree` (already reduced, returned unchanged).
    """
    if isinstance(tree, PlaneTree):
        return tree
    reduced, _ = tree.reduce()
    return reduced


def trees_close(a, b, tol=1e-9):
    """Same plane shape and edge lengths equal up to a relative ``tol``."""
    if a.root_children != b.root_children or len(a) != len(b):
        return False
    for ra, rb in zip(a.nodes, b.nodes):
        if (ra.parent, ra.left, ra.right) != (rb.parent, rb.left, rb.right):
            return False
        if abs(ra.length - rb.length) > tol * max(1.0, abs(ra.length)):
            return False
    return True


@dataclass(frozen=True)
class CombinatorialShape:
    """Tree shape without lengths.

    ``code`` is a parenthesised encoding, ``()`` for a leaf and
    ``(<left><right>)`` for a vertex with two children. Without plane
    order the two children are written in sorted order.
    """
    code: str
    planted: bool
    plane: bool = True


def shape(tree, plane=True):
    def combine(node, left, right):
        if not plane and right < left:
            left, right = right, left
        return '(' + left + right + ')'
    codes = _bottom_up(tree, lambda n: '()', combine)
    kids = tree.root_children
    if not kids:
        code = ''
    elif len(kids) == 1:
        code = codes[kids[0]]
    else:
        code = combine(None, codes[kids[0]], codes[kids[1]])
    return CombinatorialShape(code, tree.planted, plane)


def is_embeddable(small, big, tol=1e-9):
    """Whether ``small`` maps isometrically into ``big``, the root of
    ``small`` going to a point of ``big`` and the image lying in the
    descendant tree of that point. The embedding is metric only and
    may swap siblings.

    Exhaustive search; both trees are limited to
    ``EMBEDDING_SIZE_LIMIT`` edges.
    """
    for tree in (small, big):
        if len(tree) > EMBEDDING_SIZE_LIMIT:
            raise TreeSizeError(
                'is_embeddable is limited to %d edges, got %d' %
                (EMBEDDING_SIZE_LIMIT, len(tree)))
    if small.is_empty:
        return True
    if big.is_empty:
        return False

    def fits(u, remaining, w, available):
        # Lay the lower ``remaining`` length of edge u downward from the
        # point at distance ``available`` above vertex w of ``big``.
        record = small.nodes[u]
        if remaining < available - tol:
            return record.is_leaf
        if remaining <= available + tol:
            return record.is_leaf or branches(u, w)
        target = big.nodes[w]
        if target.is_leaf:
            return False
        rest = remaining - available
        return any(fits(u, rest, c, big.nodes[c].length)
                   for c in target.children)

    def branches(u, w):
        # The two subtrees of vertex u go down the two branches of w.
        target = big.nodes[w]
        if target.is_leaf:
            return False
        ul, ur = small.nodes[u].children
        wl, wr = target.children
        return ((fits(ul, small.nodes[ul].length, wl, big.nodes[wl].length)
                 and fits(ur, small.nodes[ur].length, wr,
                          big.nodes[wr].length)) or
                (fits(ul, small.nodes[ul].length, wr, big.nodes[wr].length)
                 and fits(ur, small.nodes[ur].length, wl,
                          big.nodes[wl].length)))

    depths = node_depths(big)
    stem_targets = list(big.preorder())
    if small.planted:
        stem = small.root_child
        record = small.nodes[stem]
        if record.is_leaf:
            return height(big) >= record.length - tol
        # The stem ends at a branching vertex of ``big`` that sits deep
        # enough below the root.
        return any(depths[w] >= record.length - tol and branches(stem, w)
                   for w in stem_targets if not big.nodes[w].is_leaf)

    # Stemless: the root maps to a branching point of ``big``.
    ul, ur = small.root_children
    candidates = []
    if len(big.root_children) == 2:
        candidates.append(tuple(big.root_children))
    candidates.extend(big.nodes[w].children for w in stem_targets
                      if not big.nodes[w].is_leaf)
    for wl, wr in candidates:
        for a, b in ((wl, wr), (wr, wl)):
            if (fits(ul, small.nodes[ul].length, a, big.nodes[a].length) and
                    fits(ur, small.nodes[ur].length, b,
                         big.nodes[b].length)):
                return True
    return False
