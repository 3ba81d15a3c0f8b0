"""Ballistic annihilation seen through trees.

The evolution of a unit-slope potential ``psi0`` under annihilation
with sinks is computed here without simulating particles: prune the
level-set tree of ``-psi0`` by length with mass, then draw the
resulting mass tree back as a potential with plateaus. The event
driven simulator in :mod:`prunetree.sinks` gives the same answer
the slow way; :func:`compare_evolved` checks the two against each
other.

The genealogy of sinks is summarised by the :class:`ShockTree`, built
by repeatedly unfolding the shortest remaining basin of a local
maximum.
"""

from dataclasses import dataclass

from prunetree.exceptions import (
    AdmissibilityError, DomainError, ExcursionError)
from prunetree.gw import Draws, RandomSinkState
from prunetree.harris import Excursion, level_set_tree
from prunetree.potential import (
    EvolvedPotential, Plateau, Potential, Sink)
from prunetree.pruning import (
    DoubleMass, InteriorMass, MassTree, SingleMass, prune_mass_equipped)
from prunetree.sinks import SinkSimulation, simulate_sinks
from prunetree.tree import LEFT, RIGHT, PlaneTree, TreeBuilder, node_depths


__all__ = (
    'ShockTree', 'shock_tree', 'vertical_tree', 'potential_to_mass_tree',
    'mass_tree_to_potential', 'evolve', 'collision_time', 'h2_distance',
    'compare_evolved', 'sample_sink_window', 'simulate_sinks',
    'MassTree', 'SingleMass', 'DoubleMass', 'InteriorMass',
)


@dataclass(frozen=True)
class ShockTree:
    """Genealogy of sinks with per-node rest and travel times.

    ``base`` has edge lengths ``v + h``: a sink rests for ``v`` after it
    forms and then travels for ``h`` until it merges. Per node, ``x`` is
    the position where the sink forms, ``level`` the value of ``psi0``
    at the extremum the node comes from and ``birth`` the time the sink
    forms.
    """
    base: PlaneTree
    v: tuple
    h: tuple
    x: tuple
    level: tuple
    birth: tuple
    psi0: Potential

    def mass_at(self, node, offset):
        """Mass of the sink at ``offset`` above the lower end of edge
        ``node``: twice the vertical length below that point."""
        return 2.0 * (self.birth[node] + min(offset, self.v[node]))

    def time_at(self, node, offset):
        return self.birth[node] + offset

    def _parent_x(self, node):
        parent = self.base.nodes[node].parent
        return self.x[node] if parent is None else self.x[parent]

    def phase_space_segments(self):
        """Segments of the drawing in the ``(x, psi)`` plane."""
        segments = []
        for node in self.base.preorder():
            x = self.x[node]
            segments.append(((x, self.level[node]),
                             (x, self.level[node] + self.v[node])))
            record = self.base.nodes[node]
            if not record.is_leaf:
                segments.append(((self.x[record.left], self.level[node]),
                                 (self.x[record.right], self.level[node])))
        return segments

    def space_time_segments(self):
        """Sink world lines in the ``(x, t)`` plane."""
        segments = []
        for node in self.base.preorder():
            x, born = self.x[node], self.birth[node]
            rest = born + self.v[node]
            segments.append(((x, born), (x, rest)))
            if self.h[node] > 0:
                segments.append(((x, rest), (self._parent_x(node),
                                             rest + self.h[node])))
        return segments


def shock_tree(psi0):
    """Unfold basins, shortest first, into the shock tree of ``psi0``."""
    minima = psi0.local_minima()
    n = len(minima)

    # Proto nodes: leaves are 0..n-1, the basin of the maximum between
    # minima g and g+1 is node n+g.
    kids = {}
    v = [0.0] * (2 * n - 1)
    h = [0.0] * (2 * n - 1)
    x = [m[1] for m in minima] + [0.0] * (n - 1)
    level = [m[2] for m in minima] + [0.0] * (n - 1)
    birth = [0.0] * (2 * n - 1)

    block_of = list(range(n))
    node_of = list(range(n))
    depth_of = [m[2] for m in minima]

    def find(i):
        while block_of[i] != i:
            block_of[i] = block_of[block_of[i]]
            i = block_of[i]
        return i

    for basin in sorted(psi0.basins(), key=lambda b: b.length):
        g = basin.peak // 2 - 1
        left, right = find(g), find(g + 1)
        ln, rn = node_of[left], node_of[right]
        vl = basin.level - depth_of[left]
        vr = basin.level - depth_of[right]
        node = n + g
        for child, other in ((ln, vr), (rn, vl)):
            v[child] = basin.level - level[child]
            h[child] = other
        kids[node] = (ln, rn)
        x[node] = basin.center
        level[node] = basin.level
        birth[node] = basin.length / 2.0
        block_of[right] = left
        node_of[left] = node
        depth_of[left] = basin.level - basin.length / 2.0

    top = node_of[find(0)]
    v[top] = -level[top]
    h[top] = 0.0

    builder = TreeBuilder()
    order = []
    work = [(top, None, None)]
    while work:
        proto, up, side = work.pop()
        order.append(proto)
        node = builder.add(up, v[proto] + h[proto], side)
        if proto in kids:
            ln, rn = kids[proto]
            work.append((rn, node, RIGHT))
            work.append((ln, node, LEFT))
    return ShockTree(builder.compact(),
                     tuple(v[p] for p in order), tuple(h[p] for p in order),
                     tuple(x[p] for p in order),
                     tuple(level[p] for p in order),
                     tuple(birth[p] for p in order), psi0)


def vertical_tree(st):
    """The shock tree with its horizontal parts removed."""
    builder = TreeBuilder()
    for node in st.base.preorder():
        record = st.base.nodes[node]
        builder.add(record.parent, st.v[node], st.base.side(node))
    return builder.compact()


def mass_tree_to_potential(mt, t, a=0.0):
    """Draw a ``t``-admissible mass tree as an evolved potential.

    The Harris path of the base tree is traversed and every mass is
    inserted as a plateau of its own length: at a leaf for leaf masses,
    on the way down for ``L`` interior masses and on the way up for
    ``R`` ones.
    """
    mt.check_admissible(t)
    if mt.base.is_empty:
        if mt.root_mass is None:
            raise AdmissibilityError('an empty mass tree needs a root mass')
        total = float(mt.root_mass)
        return EvolvedPotential(
            t, ((a, 0.0), (a + total, 0.0)), (Plateau(a, total, 0.0),),
            (Sink(a + total / 2.0, total, 0),))
    tree = mt.base
    if not tree.planted:
        raise AdmissibilityError('mass trees are planted')
    depths = node_depths(tree)
    by_edge = {}
    for m in mt.interior_masses:
        by_edge.setdefault(m.edge, []).append(m)

    state = {'x': a, 'level': 0.0}
    points = [(a, 0.0)]
    plateaus = []
    sinks = []

    def go_to(level):
        state['x'] += abs(level - state['level'])
        state['level'] = level
        points.append((state['x'], level))

    def flat(mass):
        x0 = state['x']
        plateaus.append(Plateau(x0, mass, state['level']))
        state['x'] += mass
        points.append((state['x'], state['level']))
        return x0

    def upper(node):
        up = tree.nodes[node].parent
        return 0.0 if up is None else depths[up]

    work = [('down', tree.root_child)]
    while work:
        step, node = work.pop()
        record = tree.nodes[node]
        masses = by_edge.get(node, [])
        if step == 'down':
            for m in sorted(masses, key=lambda m: -m.offset):
                if m.orientation != LEFT:
                    continue
                go_to(-(depths[node] - m.offset))
                x0 = flat(m.mass)
                sinks.append(Sink(x0 + t, m.mass, 1))
            go_to(-depths[node])
            if record.is_leaf:
                _leaf_plateau(mt.leaf_masses.get(node), t, flat, state,
                              sinks)
                work.append(('up', node))
            else:
                work.append(('up', node))
                work.append(('down', record.right))
                work.append(('down', record.left))
        else:
            for m in sorted(masses, key=lambda m: m.offset):
                if m.orientation == LEFT:
                    continue
                go_to(-(depths[node] - m.offset))
                x0 = flat(m.mass)
                sinks.append(Sink(x0 + m.mass - t, m.mass, -1))
            go_to(-upper(node))
    return EvolvedPotential(t, tuple(points), tuple(plateaus), tuple(sinks))


def _leaf_plateau(mass, t, flat, state, sinks):
    if mass is None:
        sinks.append(Sink(state['x'], 0.0, 0))
    elif isinstance(mass, SingleMass):
        x0 = flat(mass.mass)
        sinks.append(Sink(x0 + mass.mass / 2.0, mass.mass, 0))
    else:
        x0 = flat(mass.total)
        sinks.append(Sink(x0 + t, mass.left, 1))
        sinks.append(Sink(x0 + mass.total - t, mass.right, -1))


def _glue(psi_t, tol):
    """Remove the plateaus of an evolved potential.

    Returns the extrema (as heights, i.e. ``-psi``) of the glued path
    and the plateaus found, each with the directions of the glued path
    on both sides of it.
    """
    points = psi_t.points
    scale = max(1.0, psi_t.b - psi_t.a)
    extrema = [-points[0][1]]
    direction = None
    flats = []
    pending = []
    for (x0, v0), (x1, v1) in zip(points, points[1:]):
        dx, rise = x1 - x0, v0 - v1
        if dx <= 0:
            continue
        if abs(rise) <= tol * scale:
            if pending and abs(pending[-1]['x1'] - x0) <= tol * scale:
                pending[-1]['x1'] = x1
            else:
                pending.append({'x0': x0, 'x1': x1, 'height': -v0,
                                'before': direction, 'after': None,
                                'index': len(extrema) - 1})
                flats.append(pending[-1])
            continue
        if abs(abs(rise) - dx) > tol * scale:
            raise AdmissibilityError(
                'slope %r at x=%r is not 0 or +-1' % (-rise / dx, x0))
        step = 1 if rise > 0 else -1
        for f in pending:
            f['after'] = step
        pending = []
        if step != direction:
            extrema.append(-v1)
            direction = step
        else:
            extrema[-1] = -v1
    return extrema, flats


def potential_to_mass_tree(psi_t, t, tol=1e-9):
    """Read a mass tree off an evolved potential.

    Plateaus at local maxima of ``-psi`` become leaf masses, single if
    they are ``2t`` long and double if longer; those on monotone
    stretches become interior masses. Double masses are split as the
    sinks on them say, evenly if there are none.
    """
    extrema, flats = _glue(psi_t, tol)
    if len(extrema) == 1:
        if len(flats) != 1:
            raise AdmissibilityError('a flat potential has one plateau')
        total = flats[0]['x1'] - flats[0]['x0']
        mt = MassTree(PlaneTree.empty(), root_mass=total)
        mt.check_admissible(t, tol)
        return mt
    extrema = [0.0 if abs(e) <= tol else e for e in extrema]
    try:
        base = level_set_tree(Excursion(tuple(extrema)))
    except ExcursionError as e:
        raise AdmissibilityError('glued path is not an excursion: %s' % e)
    depths = node_depths(base)
    leaves = base.leaves()
    slack = tol * max(1.0, 2 * t)

    leaf_masses = {}
    interior = []
    for f in flats:
        mass = f['x1'] - f['x0']
        before, after = f['before'], f['after']
        if before is None or after is None:
            raise AdmissibilityError(
                'plateau at x=%r touches the boundary' % f['x0'])
        if before == -1 and after == 1:
            raise AdmissibilityError(
                'plateau at x=%r sits in a valley of -psi' % f['x0'])
        if before == 1 and after == -1:
            leaf = leaves[(f['index'] - 1) // 2]
            if abs(mass - 2 * t) <= slack:
                leaf_masses[leaf] = SingleMass(mass)
            elif mass > 2 * t:
                leaf_masses[leaf] = _split(psi_t, f, mass, t, tol)
            else:
                raise AdmissibilityError(
                    'leaf plateau at x=%r is shorter than 2t' % f['x0'])
            continue
        if before == 1:
            leaf = leaves[(f['index'] - 1) // 2]
            orientation = LEFT
        else:
            leaf = leaves[(f['index'] - 2) // 2]
            orientation = RIGHT
        node = leaf
        record = base.nodes[node]
        while record.parent is not None and \
                depths[record.parent] >= f['height']:
            node = record.parent
            record = base.nodes[node]
        offset = min(max(depths[node] - f['height'], 0.0), record.length)
        interior.append(InteriorMass(node, offset, mass, orientation))

    interior.sort(key=lambda m: (m.edge, m.offset))
    mt = MassTree(base, leaf_masses, tuple(interior))
    mt.check_admissible(t, tol)
    return mt


def _split(psi_t, f, total, t, tol):
    inside = [s for s in psi_t.sinks
              if f['x0'] - tol <= s.x <= f['x1'] + tol]
    if len(inside) == 2 and \
            abs(inside[0].mass + inside[1].mass - total) <= tol * max(
                1.0, total):
        return DoubleMass(inside[0].mass, inside[1].mass)
    return DoubleMass(total / 2.0, total / 2.0)


def evolve(psi0, t):
    """``psi0`` after time ``t`` of annihilation, computed on the tree."""
    if not 0 <= t <= psi0.t_max:
        raise DomainError('time %r outside [0, %r]' % (t, psi0.t_max))
    tree = level_set_tree(psi0.to_excursion())
    return mass_tree_to_potential(prune_mass_equipped(tree, t), t, psi0.a)


def _check_inside(psi0, *xs):
    for x in xs:
        if not psi0.a <= x <= psi0.b:
            raise DomainError('%r outside [%r, %r]' % (x, psi0.a, psi0.b))


def _max_between(psi0, x, y):
    top = max(psi0.value_at(x), psi0.value_at(y))
    for bx, bv in psi0.breakpoints():
        if x < bx < y:
            top = max(top, bv)
    return float(top)


def collision_time(psi0, x, y):
    """When the particles starting at ``x`` and ``y`` annihilate
    together: half the length of the shortest basin around both."""
    _check_inside(psi0, x, y)
    if x > y:
        x, y = y, x
    if x == y:
        return 0.0
    level = _max_between(psi0, x, y)
    points = psi0.breakpoints()

    def reach(start, forward):
        if psi0.value_at(start) >= level:
            return start
        here, value = start, float(psi0.value_at(start))
        stops = [p for p in points if (p[0] > start if forward
                                       else p[0] < start)]
        if not forward:
            stops.reverse()
        for bx, bv in stops:
            if bv >= level:
                return here + (bx - here) * (level - value) / (bv - value)
            here, value = bx, bv
        return here

    return (reach(y, True) - reach(x, False)) / 2.0


def h2_distance(psi0, x, y):
    """``2 max psi0 - psi0(x) - psi0(y)`` over the interval between."""
    _check_inside(psi0, x, y)
    if x > y:
        x, y = y, x
    return 2 * _max_between(psi0, x, y) - float(psi0.value_at(x)) - \
        float(psi0.value_at(y))


def compare_evolved(p, q, tol=1e-9):
    """Differences between two evolved potentials, empty if they agree
    on profile, plateaus and sinks up to ``tol``."""
    scale = tol * max(1.0, p.b - p.a)
    problems = []
    if abs(p.a - q.a) > scale or abs(p.b - q.b) > scale:
        return ['domains differ: [%r, %r] and [%r, %r]' %
                (p.a, p.b, q.a, q.b)]
    xs = sorted({x for x, _ in p.points} | {x for x, _ in q.points})
    worst = max(abs(float(p.value_at(x)) - float(q.value_at(x)))
                for x in xs)
    if worst > scale:
        problems.append('profiles differ by %r' % worst)
    if len(p.plateaus) != len(q.plateaus):
        problems.append('%d plateaus against %d' %
                        (len(p.plateaus), len(q.plateaus)))
    else:
        for u, w in zip(p.plateaus, q.plateaus):
            if abs(u.x0 - w.x0) > scale or abs(u.length - w.length) > scale:
                problems.append('plateau at %r differs' % u.x0)
    if len(p.sinks) != len(q.sinks):
        problems.append('%d sinks against %d' %
                        (len(p.sinks), len(q.sinks)))
    else:
        for u, w in zip(p.sinks, q.sinks):
            if abs(u.x - w.x) > scale or abs(u.mass - w.mass) > scale or \
                    u.velocity != w.velocity:
                problems.append('sink at %r differs' % u.x)
    return problems


class _Walk(object):
    """Extrema of an exponential walk leaving a local minimum at zero,
    generated lazily in one direction."""

    def __init__(self, draws, sign):
        self.draws = draws
        self.sign = sign
        self.positions = [0.0]
        self.values = [0.0]
        self.records = []

    def extend(self):
        for rising in (True, False):
            step = self.draws.exp()
            self.positions.append(self.positions[-1] + self.sign * step)
            self.values.append(self.values[-1] + (step if rising else -step))
        peak = len(self.values) - 2
        if not self.records or \
                self.values[peak] > self.values[self.records[-1]]:
            self.records.append(peak)

    def record(self, k):
        while len(self.records) <= k:
            self.extend()
        return self.records[k]

    def crossing(self, level):
        """Distance from zero at which the walk first reaches ``level``."""
        i = 1
        while True:
            while i >= len(self.values):
                self.extend()
            if self.values[i] >= level:
                rise = self.values[i] - self.values[i - 1]
                back = (self.values[i] - level) / rise
                return abs(self.positions[i] -
                           back * (self.positions[i] - self.positions[i - 1]))
            i += 2


def sample_sink_window(params, t, rng=None):
    """State of the sink at a typical local minimum after time ``t``,
    by simulating the smallest basin around it longer than ``2t``."""
    if not t >= 0:
        raise DomainError('time must be non-negative, got %r' % t)
    if rng is None:
        rng = params.rng()
    draws = Draws(rng, 2.0 / params.lam)
    walks = (_Walk(draws, -1), _Walk(draws, 1))
    index = [0, 0]
    while True:
        candidates = [w.values[w.record(k)] for w, k in zip(walks, index)]
        side = 0 if candidates[0] < candidates[1] else 1
        level = candidates[side]
        near = walks[side]
        reach = abs(near.positions[near.record(index[side])])
        far = walks[1 - side].crossing(level)
        if reach + far > 2 * t:
            break
        index[side] += 1

    left_reach = reach if side == 0 else far
    right_reach = far if side == 0 else reach
    extrema = [0.0]
    for walk, limit, backwards in ((walks[0], left_reach, True),
                                   (walks[1], right_reach, False)):
        inner = [walk.values[i] - level
                 for i in range(len(walk.values))
                 if abs(walk.positions[i]) < limit]
        if backwards:
            extrema.extend(reversed(inner[1:]))
        else:
            extrema.extend(inner)
    extrema.append(0.0)
    psi = Potential(tuple(extrema))
    sim = SinkSimulation(psi, t).run()
    sink = _home_minimum(walks[0], left_reach)
    while sim.trajectories[sink].died is not None and \
            sim.trajectories[sink].died <= t:
        sink = sim.trajectories[sink].parent
    _, mass, velocity, _, _ = sim.trajectories[sink].state_at(t)
    return RandomSinkState(velocity == 0, mass, t, len(sim.trajectories))


def _home_minimum(left_walk, limit):
    """Index, among the local minima of the window, of the one at zero."""
    return sum(1 for i in range(2, len(left_walk.values), 2)
               if abs(left_walk.positions[i]) < limit)
