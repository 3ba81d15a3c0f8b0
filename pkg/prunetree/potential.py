"""Unit-slope potentials and their evolved states.

A :class:`Potential` is a negative excursion ``psi0`` on ``[a, b]`` with
slopes -1 and +1, stored by the values at its breakpoints::

    >>> psi = Potential((0.0, -2.0, -1.0, -3.0, 0.0))
    >>> psi.b, psi.t_max
    (8.0, 4.0)

The particle at ``x`` starts with velocity ``-psi0'(x)``; sinks form at
the local minima. An :class:`EvolvedPotential` is the state at a later
time ``t``, written in Lagrangian coordinates: every annihilated
interval has been flattened into a plateau at the level of its ends,
and the surviving sinks are listed with their positions, masses and
velocities.
"""

import math
from dataclasses import dataclass

import numpy as np

from prunetree.exceptions import ExcursionError, GenericityError
from prunetree.harris import Excursion


__all__ = ('Potential', 'Basin', 'Plateau', 'Sink', 'EvolvedPotential')


@dataclass(frozen=True)
class Basin:
    """The shortest interval around an interior local maximum on which
    the potential stays below the value at that maximum."""
    peak: int
    x: float
    level: float
    left: float
    right: float

    @property
    def length(self):
        return self.right - self.left

    @property
    def center(self):
        return (self.left + self.right) / 2.0


@dataclass(frozen=True)
class Potential:
    """Initial potential ``psi0``.

    ``extrema`` alternates ``0, min, max, ..., min, 0``; all interior
    values are negative. Minima, maxima and basin lengths must all be
    distinct.
    """
    extrema: tuple
    a: float = 0.0

    def __post_init__(self):
        values = tuple(float(v) for v in self.extrema)
        object.__setattr__(self, 'extrema', values)
        if len(values) < 3 or len(values) % 2 == 0:
            raise ExcursionError(
                'a potential has an odd number (>= 3) of extrema')
        if values[0] != 0 or values[-1] != 0:
            raise ExcursionError('a potential vanishes at both ends')
        if not all(math.isfinite(v) for v in values):
            raise ExcursionError('extrema must be finite')
        for i in range(1, len(values) - 1):
            if not values[i] < 0:
                raise ExcursionError(
                    'a potential is negative inside its domain '
                    '(position %d is %r)' % (i, values[i]))
            lower = i % 2 == 1
            neighbours = (values[i - 1], values[i + 1])
            if lower and not values[i] < min(neighbours) or \
                    not lower and not values[i] > max(neighbours):
                raise ExcursionError(
                    'extrema must alternate starting with a minimum '
                    '(position %d)' % i)
        self._check_generic()

    def _check_generic(self):
        for name, group in (('minima', self.extrema[1::2]),
                            ('maxima', self.extrema[2:-1:2])):
            if len(set(group)) != len(group):
                raise GenericityError('tied local %s' % name)
        lengths = [basin.length for basin in self.basins()]
        if len(set(lengths)) != len(lengths):
            raise GenericityError('tied basin lengths')

    @classmethod
    def from_excursion(cls, ex, a=0.0):
        return cls(tuple(-v for v in ex.extrema), a)

    @classmethod
    def v_shape(cls, a, b):
        return cls((0.0, -(b - a) / 2.0, 0.0), a)

    def to_excursion(self):
        return Excursion(tuple(-v for v in self.extrema), self.a)

    @property
    def positions(self):
        xs = [self.a]
        for u, w in zip(self.extrema, self.extrema[1:]):
            xs.append(xs[-1] + abs(w - u))
        return xs

    @property
    def b(self):
        return self.positions[-1]

    @property
    def t_max(self):
        return (self.b - self.a) / 2.0

    def breakpoints(self):
        return list(zip(self.positions, self.extrema))

    def value_at(self, x):
        return np.interp(x, self.positions, self.extrema)

    def local_minima(self):
        """``(extremum index, position, value)`` of every local minimum."""
        xs = self.positions
        return [(i, xs[i], self.extrema[i])
                for i in range(1, len(self.extrema), 2)]

    def local_maxima(self):
        xs = self.positions
        return [(i, xs[i], self.extrema[i])
                for i in range(2, len(self.extrema) - 1, 2)]

    def basins(self):
        """Basins of all interior local maxima, in positional order."""
        xs = self.positions
        values = self.extrema
        peaks = list(range(0, len(values), 2))

        def nearest_higher(order):
            found = {}
            stack = []
            for i in order:
                while stack and values[stack[-1]] <= values[i]:
                    stack.pop()
                if stack:
                    found[i] = stack[-1]
                stack.append(i)
            return found

        before = nearest_higher(peaks)
        after = nearest_higher(list(reversed(peaks)))
        basins = []
        for i in peaks[1:-1]:
            level = values[i]
            p, q = before[i], after[i]
            basins.append(Basin(i, xs[i], level,
                                xs[p] + (values[p] - level),
                                xs[q] - (values[q] - level)))
        return basins


@dataclass(frozen=True)
class Plateau:
    x0: float
    length: float
    level: float

    @property
    def x1(self):
        return self.x0 + self.length


@dataclass(frozen=True)
class Sink:
    x: float
    mass: float
    velocity: int


def _clean(points):
    """Drop repeated points and merge collinear segments."""
    out = []
    for x, v in points:
        if out and x == out[-1][0]:
            if v != out[-1][1]:
                raise ExcursionError('discontinuous potential at %r' % x)
            continue
        if len(out) >= 2:
            (x0, v0), (x1, v1) = out[-2], out[-1]
            slope_a = (v1 - v0) / (x1 - x0)
            slope_b = (v - v1) / (x - x1)
            if abs(slope_a - slope_b) < 1e-9:
                out[-1] = (x, v)
                continue
        out.append((x, v))
    return tuple(out)


@dataclass(frozen=True)
class EvolvedPotential:
    """Potential at time ``t`` in Lagrangian coordinates.

    ``points`` are the breakpoints ``(x, value)``; segments have slope
    -1, 0 or +1 and the flat ones are listed in ``plateaus``. ``sinks``
    are sorted by position.
    """
    t: float
    points: tuple
    plateaus: tuple = ()
    sinks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'points', _clean(
            (float(x), float(v)) for x, v in self.points))
        object.__setattr__(self, 'plateaus', tuple(
            sorted(self.plateaus, key=lambda p: p.x0)))
        object.__setattr__(self, 'sinks', tuple(
            sorted(self.sinks, key=lambda s: s.x)))

    @property
    def a(self):
        return self.points[0][0]

    @property
    def b(self):
        return self.points[-1][0]

    @property
    def total_mass(self):
        return sum(s.mass for s in self.sinks)

    @property
    def surviving_length(self):
        return (self.b - self.a) - sum(p.length for p in self.plateaus)

    def value_at(self, x):
        xs, vs = zip(*self.points)
        return np.interp(x, xs, vs)

    def to_dict(self):
        return {
            'a': self.a, 'b': self.b, 't': self.t,
            'extrema': [v for _, v in self.points],
            'positions': [x for x, _ in self.points],
            'plateaus': [{'x0': p.x0, 'len': p.length, 'level': p.level}
                         for p in self.plateaus],
            'sinks': [{'x': s.x, 'mass': s.mass, 'v': s.velocity}
                      for s in self.sinks],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            float(data.get('t', 0.0)),
            tuple(zip(data['positions'], data['extrema'])),
            tuple(Plateau(p['x0'], p['len'], p.get('level', 0.0))
                  for p in data.get('plateaus', ())),
            tuple(Sink(s['x'], s['mass'], int(s.get('v', 0)))
                  for s in data.get('sinks', ())))
