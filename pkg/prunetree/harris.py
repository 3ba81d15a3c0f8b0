"""Harris paths and level-set trees.

The Harris path of a planted tree records the distance from the root
while the tree is traversed depth first at unit speed; it is a
piecewise linear excursion with slopes +1 and -1. The level-set tree
of such an excursion inverts the construction::

    >>> ex = harris_path(PlaneTree.from_nested((3.0, 1.0, 2.0)))
    >>> ex.extrema
    (0.0, 4.0, 3.0, 5.0, 0.0)
    >>> level_set_tree(ex) == PlaneTree.from_nested((3.0, 1.0, 2.0))
    True

Since the slopes are fixed, an excursion is stored as the sequence of
its extreme values only; segment durations equal value differences.
"""

import math
from dataclasses import dataclass

from prunetree.exceptions import ExcursionError, InvalidTreeError
from prunetree.tree import LEFT, RIGHT, TreeBuilder, node_depths


__all__ = ('Excursion', 'harris_path', 'level_set_tree',
           'excursion_from_lengths')


@dataclass(frozen=True)
class Excursion:
    """Positive excursion ``0 = v0 < v1 > v2 < ... > v2n = 0``.

    Odd positions hold the local maxima, even interior positions the
    local minima. ``start`` is the left end of the time domain.
    """
    extrema: tuple
    start: float = 0.0

    def __post_init__(self):
        values = tuple(float(v) for v in self.extrema)
        object.__setattr__(self, 'extrema', values)
        if len(values) < 3 or len(values) % 2 == 0:
            raise ExcursionError(
                'an excursion has an odd number (>= 3) of extrema, got %d'
                % len(values))
        if values[0] != 0 or values[-1] != 0:
            raise ExcursionError('an excursion starts and ends at zero')
        if not all(math.isfinite(v) for v in values):
            raise ExcursionError('extrema must be finite')
        for i in range(1, len(values), 2):
            if not (values[i] > values[i - 1] and values[i] > values[i + 1]):
                raise ExcursionError(
                    'extrema must alternate: position %d (%r) is not a '
                    'strict local maximum' % (i, values[i]))
        for i in range(2, len(values) - 1, 2):
            if not values[i] > 0:
                raise ExcursionError(
                    'interior minimum at position %d must be positive' % i)

    @property
    def num_maxima(self):
        return len(self.extrema) // 2

    @property
    def length(self):
        """Horizontal extent of the excursion."""
        return sum(abs(b - a) for a, b in
                   zip(self.extrema, self.extrema[1:]))

    def maxima(self):
        return self.extrema[1::2]

    def minima(self):
        return self.extrema[2:-1:2]

    def times(self):
        times = [self.start]
        for a, b in zip(self.extrema, self.extrema[1:]):
            times.append(times[-1] + abs(b - a))
        return times

    def breakpoints(self):
        return list(zip(self.times(), self.extrema))


def harris_path(tree):
    """Depth-first distance profile of a non-empty planted tree."""
    if not tree.planted:
        raise InvalidTreeError(
            'the Harris path is defined for non-empty planted trees')
    depths = node_depths(tree)
    extrema = [0.0]
    stack = [tree.root_child]
    while stack:
        item = stack.pop()
        if isinstance(item, tuple):
            # Back at a branching vertex between its two subtrees.
            extrema.append(depths[item[0]])
            continue
        record = tree.nodes[item]
        if record.is_leaf:
            extrema.append(depths[item])
        else:
            stack.append(record.right)
            stack.append((item,))
            stack.append(record.left)
    extrema.append(0.0)
    return Excursion(tuple(extrema))


def level_set_tree(ex):
    """Planted tree describing how the level sets of ``ex`` merge.

    Leaves correspond to local maxima and internal vertices to interior
    local minima, in time order. Two equal minima with no lower minimum
    between them would form a vertex of degree four and are rejected.
    """
    values = ex.extrema
    n = ex.num_maxima

    # Min-Cartesian tree over the interior minima 1..n-1; minimum j sits
    # between the maxima j-1 and j.
    left_of, right_of = {}, {}
    stack = []
    for j in range(1, n):
        value = values[2 * j]
        last = None
        while stack and values[2 * stack[-1]] > value:
            last = stack.pop()
        if stack and values[2 * stack[-1]] == value:
            raise ExcursionError(
                'equal minima %r at positions %d and %d produce a '
                'non-binary vertex' % (value, 2 * stack[-1], 2 * j))
        if last is not None:
            left_of[j] = last
        if stack:
            right_of[stack[-1]] = j
        stack.append(j)

    builder = TreeBuilder()
    # Work items: (is_minimum, index, parent id, parent value, side).
    if stack:
        work = [(True, stack[0], None, 0.0, None)]
    else:
        work = [(False, 0, None, 0.0, None)]
    while work:
        is_minimum, index, parent, base, side = work.pop()
        if not is_minimum:
            builder.add(parent, values[2 * index + 1] - base, side)
            continue
        value = values[2 * index]
        node = builder.add(parent, value - base, side)
        if index in right_of:
            work.append((True, right_of[index], node, value, RIGHT))
        else:
            work.append((False, index, node, value, RIGHT))
        if index in left_of:
            work.append((True, left_of[index], node, value, LEFT))
        else:
            work.append((False, index - 1, node, value, LEFT))
    return builder.compact()


def excursion_from_lengths(rises_and_falls, start=0.0):
    """Excursion from alternating rise and fall magnitudes.

    The sequence starts and ends with a rise; the closing fall back to
    zero is added.
    """
    steps = [float(s) for s in rises_and_falls]
    if len(steps) % 2 == 0:
        raise ExcursionError(
            'rises and falls must start and end with a rise')
    if any(not s > 0 for s in steps):
        raise ExcursionError('rises and falls must be positive')
    extrema = [0.0]
    for i, step in enumerate(steps):
        value = extrema[-1] + step if i % 2 == 0 else extrema[-1] - step
        if i % 2 == 1 and not value > 0:
            raise ExcursionError(
                'premature zero-crossing after step %d' % (i + 1))
        extrema.append(value)
    extrema.append(0.0)
    return Excursion(tuple(extrema), start)
