import pytest

from prunetree.exceptions import DomainError
from prunetree.formats import TRAJECTORY_CSV_HEADER, trajectories_to_csv
from prunetree.potential import Potential
from prunetree.sinks import SinkSimulation, simulate_sinks
from prunetree.tree import PlaneTree, trees_close


# Two minima, at x=1 and x=3, separated by a maximum at x=1.5.
TWO_SINKS = (0.0, -1.0, -0.5, -2.0, 0.0)


class TestSinkSimulation(object):

    def setup_method(self, method):
        self.psi0 = Potential(TWO_SINKS)
        self.sim = SinkSimulation(self.psi0).run()

    def test_merges(self):
        assert [(pytest.approx(t), sink) for t, sink in self.sim.merges] == \
            [(2.0, 2)]
        left, right, merged = self.sim.trajectories
        assert left.died == right.died == pytest.approx(2.0)
        assert left.parent == right.parent == 2
        assert merged.children == (0, 1)
        assert merged.died is None

    def test_motion(self):
        left, right, _ = self.sim.trajectories
        # The left sink runs out of particles on its right first.
        assert left.moved == pytest.approx(0.5)
        assert right.moved == pytest.approx(1.5)
        x, mass, velocity, _, _ = left.state_at(1.0)
        assert (x, mass, velocity) == (pytest.approx(1.5), pytest.approx(1.0),
                                       1)
        x, mass, velocity, _, _ = right.state_at(1.8)
        assert (x, mass, velocity) == (pytest.approx(2.7), pytest.approx(3.0),
                                       -1)

    def test_rest_and_travel(self):
        times = self.sim.rest_and_travel()
        assert times[0] == (pytest.approx(0.5), pytest.approx(1.5))
        assert times[1] == (pytest.approx(1.5), pytest.approx(0.5))
        assert times[2] == (pytest.approx(0.5), pytest.approx(0.0))

    def test_merge_tree(self):
        tree, ids = self.sim.merge_tree()
        assert trees_close(tree, PlaneTree.from_nested((0.5, 2.0, 2.0)))
        assert ids == [2, 0, 1]

    def test_snapshot(self):
        state = self.sim.snapshot(1.0)
        assert [(p.x0, p.length) for p in state.plateaus] == \
            [(0.5, 1.0), (2.0, 2.0)]
        assert [(s.x, s.mass, s.velocity) for s in state.sinks] == \
            [(1.5, 1.0, 1), (3.0, 2.0, 0)]
        assert state.value_at(5.0) == 0.0

        # The two absorbed intervals touch just before the merge.
        state = self.sim.snapshot(1.8)
        assert len(state.plateaus) == 1
        assert state.plateaus[0].x0 == pytest.approx(0.5)
        assert state.plateaus[0].length == pytest.approx(4.0)
        assert len(state.sinks) == 2

    def test_mass_is_conserved(self):
        state = self.sim.snapshot(self.psi0.t_max)
        assert state.total_mass == pytest.approx(self.psi0.b - self.psi0.a)
        assert state.surviving_length == pytest.approx(0.0)

    def test_horizon(self):
        with pytest.raises(DomainError):
            SinkSimulation(self.psi0, t_max=3.0)
        with pytest.raises(DomainError):
            self.sim.snapshot(3.0)
        partial = SinkSimulation(self.psi0, t_max=1.0).run()
        assert partial.merges == []
        with pytest.raises(DomainError):
            partial.merge_tree()

    def test_single_sink(self):
        sim = SinkSimulation(Potential.v_shape(0.0, 4.0)).run()
        assert sim.merges == []
        assert len(sim.trajectories) == 1
        # Exhaustion at the horizon itself is not applied.
        assert sim.trajectories[0].moved is None
        state = sim.snapshot(2.0)
        assert state.sinks[0].mass == pytest.approx(4.0)

    def test_simulate_sinks(self):
        trajectories = simulate_sinks(self.psi0)
        assert [t.sink_id for t in trajectories] == [0, 1, 2]

    def test_trajectories_csv(self):
        lines = trajectories_to_csv(self.sim.trajectories).splitlines()
        assert lines[0] == ','.join(TRAJECTORY_CSV_HEADER)
        assert len(lines) == 1 + 8
        assert lines[1] == '0,0.0,1.0,0.0'
