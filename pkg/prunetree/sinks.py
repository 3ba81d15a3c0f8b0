"""Event-driven simulation of ballistic annihilation with sinks.

Particles start with velocity ``-psi0'(x)``, which is +1 or -1. Sinks
form at the local minima of ``psi0`` and absorb every particle that
reaches them. A sink is at rest while particles arrive from both sides;
once one side is exhausted it moves with unit speed towards the other
side, and two colliding sinks merge. Between events everything moves
linearly, so the run only needs a priority queue of the next
exhaustion or collision::

    >>> sim = SinkSimulation(Potential((0.0, -1.0, -0.5, -2.0, 0.0))).run()
    >>> [round(t, 6) for t, _ in sim.merges]
    [2.0]
"""

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

from prunetree.exceptions import DomainError
from prunetree.potential import EvolvedPotential, Plateau, Sink
from prunetree.tree import LEFT, RIGHT, TreeBuilder


__all__ = ('SinkTrajectory', 'SinkSimulation', 'simulate_sinks')


log = logging.getLogger('prunetree.sinks')


@dataclass
class SinkTrajectory:
    """History of one sink.

    ``breakpoints`` holds ``(t, x, mass)`` at every change of motion;
    ``velocities`` and ``spans`` run parallel to it and give the
    velocity and the absorbed Lagrangian interval ``(L, R)`` from that
    breakpoint on. ``merges`` lists ``(t, partner id)``.
    """
    sink_id: int
    born: float
    children: tuple = ()
    parent: Optional[int] = None
    died: Optional[float] = None
    breakpoints: list = field(default_factory=list)
    velocities: list = field(default_factory=list)
    spans: list = field(default_factory=list)
    rates: list = field(default_factory=list)
    merges: list = field(default_factory=list)

    def alive_at(self, t):
        return self.born <= t and (self.died is None or t < self.died)

    @property
    def moved(self):
        """Time the sink started to move, ``None`` if it never did."""
        for (t, _, _), v in zip(self.breakpoints, self.velocities):
            if v:
                return t
        return None

    def state_at(self, t):
        """``(x, mass, velocity, L, R)`` at time ``t``."""
        k = len(self.breakpoints) - 1
        while k > 0 and self.breakpoints[k][0] > t:
            k -= 1
        t0, x0, _ = self.breakpoints[k]
        left, right = self.spans[k]
        grow_left, grow_right = self.rates[k]
        dt = t - t0
        left -= grow_left * dt
        right += grow_right * dt
        return (x0 + self.velocities[k] * dt, right - left,
                self.velocities[k], left, right)


class _Live(object):
    """Mutable state of a sink while the simulation runs."""

    __slots__ = ('id', 't0', 'x0', 'left', 'right', 'left_in', 'right_in',
                 'left_stop', 'right_stop', 'version', 'prev', 'next')

    def __init__(self, sink_id, t0, x0, left, right, left_in, right_in,
                 left_stop, right_stop):
        self.id = sink_id
        self.t0 = t0
        self.x0 = x0
        self.left = left
        self.right = right
        self.left_in = left_in
        self.right_in = right_in
        self.left_stop = left_stop
        self.right_stop = right_stop
        self.version = 0
        self.prev = None
        self.next = None

    @property
    def absorbing(self):
        return self.left_in and self.right_in

    @property
    def velocity(self):
        if self.left_in == self.right_in:
            return 0
        return 1 if self.left_in else -1

    def position(self, t):
        return self.x0 + self.velocity * (t - self.t0)

    def span(self, t):
        if self.absorbing:
            dt = t - self.t0
            return self.left - dt, self.right + dt
        return self.left, self.right

    def advance(self, t):
        self.x0 = self.position(t)
        self.left, self.right = self.span(t)
        self.t0 = t
        self.version += 1


class SinkSimulation(object):
    """Runs the sink dynamics of ``psi0`` up to ``t_max``.

    After :meth:`run`, ``trajectories`` is indexed by sink id. The first
    ids belong to the sinks at the local minima, left to right; merged
    sinks get fresh ids. ``merges`` is the log of ``(t, new id)``.
    """

    def __init__(self, psi0, t_max=None):
        self.psi0 = psi0
        self.t_max = psi0.t_max if t_max is None else float(t_max)
        if not 0 <= self.t_max <= psi0.t_max * (1 + 1e-12):
            raise DomainError('simulation horizon %r outside [0, %r]' %
                              (t_max, psi0.t_max))
        self.trajectories = []
        self.merges = []
        self._live = {}
        self._heap = []
        self._counter = itertools.count()
        self._done = False

    def run(self):
        if self._done:
            return self
        xs = self.psi0.positions
        for index, x, _ in self.psi0.local_minima():
            sink = self._spawn(0.0, x, x, x, True, True,
                               xs[index - 1], xs[index + 1])
            if self._live:
                last = self._live[sink.id - 1]
                last.next, sink.prev = sink, last
            self._live[sink.id] = sink
        for sink in list(self._live.values()):
            self._schedule(sink)

        # Events at the horizon itself are not applied.
        horizon = self.t_max - 1e-12 * max(1.0, self.psi0.b - self.psi0.a)
        events = 0
        while self._heap:
            time, _, kind, ids, versions = heapq.heappop(self._heap)
            sinks = [self._live.get(i) for i in ids]
            if any(s is None or s.version != v
                   for s, v in zip(sinks, versions)):
                continue
            if time >= horizon:
                break
            events += 1
            if kind == 'merge':
                self._merge(time, *sinks)
            else:
                self._exhaust(time, sinks[0], kind)

        for sink in self._live.values():
            sink.advance(self.t_max)
            self._record(sink)
        log.debug('Simulated %d sinks through %d events up to t=%r',
                  len(self.trajectories), events, self.t_max)
        self._done = True
        return self

    def _spawn(self, t, x, left, right, left_in, right_in, left_stop,
               right_stop, children=()):
        sink = _Live(len(self.trajectories), t, x, left, right, left_in,
                     right_in, left_stop, right_stop)
        self.trajectories.append(SinkTrajectory(sink.id, t, children))
        self._record(sink)
        return sink

    def _record(self, sink):
        trajectory = self.trajectories[sink.id]
        grow = 1 if sink.absorbing else 0
        point = (sink.t0, sink.x0, sink.right - sink.left)
        if trajectory.breakpoints and trajectory.breakpoints[-1][0] == \
                sink.t0:
            del trajectory.breakpoints[-1], trajectory.velocities[-1], \
                trajectory.spans[-1], trajectory.rates[-1]
        trajectory.breakpoints.append(point)
        trajectory.velocities.append(sink.velocity)
        trajectory.spans.append((sink.left, sink.right))
        trajectory.rates.append((grow, grow))

    def _push(self, time, kind, sinks):
        heapq.heappush(self._heap, (
            time, next(self._counter), kind, tuple(s.id for s in sinks),
            tuple(s.version for s in sinks)))

    def _schedule(self, sink):
        if sink.absorbing:
            self._push(sink.t0 + (sink.left - sink.left_stop), LEFT, [sink])
            self._push(sink.t0 + (sink.right_stop - sink.right), RIGHT,
                       [sink])
        for pair in ((sink.prev, sink), (sink, sink.next)):
            self._schedule_merge(*pair)

    def _schedule_merge(self, a, b):
        if a is None or b is None or a.right_in or b.left_in:
            return
        closing = a.velocity - b.velocity
        if closing <= 0:
            return
        now = max(a.t0, b.t0)
        gap = max(0.0, b.position(now) - a.position(now))
        self._push(now + gap / closing, 'merge', [a, b])

    def _exhaust(self, time, sink, side):
        sink.advance(time)
        if side == LEFT:
            sink.left_in = False
        else:
            sink.right_in = False
        self._record(sink)
        self._schedule(sink)

    def _merge(self, time, a, b):
        a.advance(time)
        b.advance(time)
        x = (a.x0 + b.x0) / 2.0
        new = self._spawn(time, x, a.left, b.right, a.left_in, b.right_in,
                          a.left_stop, b.right_stop, children=(a.id, b.id))
        for old, partner in ((a, b), (b, a)):
            trajectory = self.trajectories[old.id]
            self._record(old)
            trajectory.died = time
            trajectory.parent = new.id
            trajectory.merges.append((time, partner.id))
            del self._live[old.id]
        new.prev, new.next = a.prev, b.next
        if new.prev is not None:
            new.prev.next = new
        if new.next is not None:
            new.next.prev = new
        self._live[new.id] = new
        self.merges.append((time, new.id))
        self._schedule(new)

    def snapshot(self, t):
        """The :class:`EvolvedPotential` at time ``t``."""
        self.run()
        if not 0 <= t <= self.t_max:
            raise DomainError('time %r outside [0, %r]' % (t, self.t_max))
        states = []
        for trajectory in self.trajectories:
            if trajectory.alive_at(t):
                states.append(trajectory.state_at(t))
        states.sort(key=lambda s: s[3])
        scale = max(1.0, self.psi0.b - self.psi0.a)

        intervals = []
        for _, _, _, left, right in states:
            if right <= left:
                continue
            if intervals and left - intervals[-1][1] <= 1e-12 * scale:
                intervals[-1][1] = right
            else:
                intervals.append([left, right])

        plateaus = []
        points = []
        breakpoints = self.psi0.breakpoints()
        k = 0
        for left, right in intervals:
            level = float(self.psi0.value_at(left))
            while k < len(breakpoints) and breakpoints[k][0] < left:
                points.append(breakpoints[k])
                k += 1
            while k < len(breakpoints) and breakpoints[k][0] <= right:
                k += 1
            points.extend([(left, level), (right, level)])
            plateaus.append(Plateau(left, right - left, level))
        points.extend(breakpoints[k:])
        sinks = tuple(Sink(x, mass, velocity)
                      for x, mass, velocity, _, _ in states)
        return EvolvedPotential(t, tuple(points), tuple(plateaus), sinks)

    def merge_tree(self):
        """Genealogy of the sinks as a planted tree.

        Returns ``(tree, sink_ids)`` with ``sink_ids[node]`` the sink of
        each node; edge lengths are lifetimes.
        """
        self.run()
        roots = [tr.sink_id for tr in self.trajectories if tr.parent is None]
        if len(roots) != 1:
            raise DomainError('sinks have not merged into one by t=%r' %
                              self.t_max)
        builder = TreeBuilder()
        ids = []
        work = [(roots[0], None, None)]
        while work:
            sink_id, parent, side = work.pop()
            trajectory = self.trajectories[sink_id]
            end = self.t_max if trajectory.died is None else trajectory.died
            node = builder.add(parent, end - trajectory.born, side)
            ids.append(sink_id)
            if trajectory.children:
                left, right = trajectory.children
                work.append((right, node, RIGHT))
                work.append((left, node, LEFT))
        return builder.compact(), ids

    def rest_and_travel(self):
        """Per sink, the time spent at rest and the time spent moving."""
        self.run()
        out = []
        for trajectory in self.trajectories:
            end = self.t_max if trajectory.died is None else trajectory.died
            moved = trajectory.moved
            if moved is None or trajectory.died is None:
                moved = end
            out.append((moved - trajectory.born, end - moved))
        return out


def simulate_sinks(psi0):
    """Trajectories of all sinks up to the final merge."""
    return SinkSimulation(psi0).run().trajectories
