import json

import pytest

from prunetree.annihilation import (
    collision_time, compare_evolved, evolve, h2_distance,
    mass_tree_to_potential, potential_to_mass_tree, sample_sink_window,
    shock_tree, vertical_tree)
from prunetree.exceptions import (
    AdmissibilityError, DomainError, ExcursionError, GenericityError,
    TreeSizeError)
from prunetree.formats import (
    mass_tree_from_dict, mass_tree_to_dict, potential_from_dict,
    potential_to_dict)
from prunetree.gw import GwParams, make_rng, sample_exp_excursion
from prunetree.harris import level_set_tree
from prunetree.potential import EvolvedPotential, Potential
from prunetree.pruning import (
    DoubleMass, InteriorMass, MassTree, SingleMass, prune_mass_equipped)
from prunetree.sinks import SinkSimulation
from prunetree.svg import render_svg
from prunetree.tree import LEFT, PlaneTree, trees_close


TWO_SINKS = (0.0, -1.0, -0.5, -2.0, 0.0)


def sampled_potentials(seed, count, node_cap=200):
    for stream in range(count):
        params = GwParams(1.0, seed=seed, stream=stream, node_cap=node_cap)
        try:
            ex = sample_exp_excursion(params)
        except TreeSizeError:
            continue
        yield Potential.from_excursion(ex)


def sinks_of(state):
    return [(pytest.approx(s.x), pytest.approx(s.mass), s.velocity)
            for s in state.sinks]


class TestPotential(object):

    def test_geometry(self):
        psi = Potential((0.0, -2.0, -1.0, -3.0, 0.0))
        assert psi.positions == [0.0, 2.0, 3.0, 5.0, 8.0]
        assert psi.b == 8.0
        assert psi.t_max == 4.0
        assert psi.local_minima() == [(1, 2.0, -2.0), (3, 5.0, -3.0)]
        basin, = psi.basins()
        assert (basin.left, basin.right, basin.center) == (1.0, 7.0, 4.0)

    def test_v_shape(self):
        psi = Potential.v_shape(1.0, 5.0)
        assert psi.extrema == (0.0, -2.0, 0.0)
        assert (psi.a, psi.b) == (1.0, 5.0)
        assert psi.basins() == []

    def test_validation(self):
        with pytest.raises(ExcursionError):
            Potential((0.0, -1.0))
        with pytest.raises(ExcursionError):
            Potential((0.0, 1.0, 0.0))
        with pytest.raises(ExcursionError):
            Potential((0.0, -1.0, -2.0, -3.0, 0.0))
        with pytest.raises(GenericityError):
            Potential((0.0, -1.0, -0.5, -1.0, 0.0))
        with pytest.raises(GenericityError):
            Potential((0.0, -2.0, -1.0, -3.0, -1.0, -2.5, 0.0))

    def test_excursion(self):
        psi = Potential(TWO_SINKS, a=2.0)
        ex = psi.to_excursion()
        assert ex.extrema == (0.0, 1.0, 0.5, 2.0, 0.0)
        assert Potential.from_excursion(ex, 2.0) == psi

    def test_documents(self):
        psi = Potential(TWO_SINKS, a=1.0)
        data = json.loads(json.dumps(potential_to_dict(psi)))
        assert data['b'] == 6.0
        assert potential_from_dict(data) == psi
        with pytest.raises(ExcursionError):
            potential_from_dict({'a': 0.0})


class TestEvolve(object):

    def setup_method(self, method):
        self.psi0 = Potential(TWO_SINKS)

    def test_single_sink(self):
        state = evolve(Potential.v_shape(0.0, 4.0), 1.0)
        assert state.points == ((0.0, 0.0), (1.0, -1.0), (3.0, -1.0),
                                (4.0, 0.0))
        assert [(p.x0, p.length, p.level) for p in state.plateaus] == \
            [(1.0, 2.0, -1.0)]
        assert sinks_of(state) == [(2.0, 2.0, 0)]

    def test_moving_and_resting_sink(self):
        state = evolve(self.psi0, 1.0)
        assert [(p.x0, p.length) for p in state.plateaus] == \
            [(0.5, 1.0), (2.0, 2.0)]
        assert sinks_of(state) == [(1.5, 1.0, 1), (3.0, 2.0, 0)]

    def test_sinks_about_to_merge(self):
        state = evolve(self.psi0, 1.8)
        assert len(state.plateaus) == 1
        assert sinks_of(state) == [(2.3, 1.0, 1), (2.7, 3.0, -1)]

    def test_after_merge(self):
        state = evolve(self.psi0, 2.2)
        assert sinks_of(state) == [(2.5, 4.4, 0)]
        assert state.total_mass == pytest.approx(4.4)

    def test_matches_simulation(self):
        sim = SinkSimulation(self.psi0).run()
        for t in (0.0, 0.25, 1.0, 1.6, 1.8, 2.2, 2.45):
            assert compare_evolved(evolve(self.psi0, t), sim.snapshot(t)) == []

    def test_matches_simulation_on_a_longer_path(self):
        psi0 = Potential((0.0, -1.3, -0.4, -2.1, -0.9, -3.7, -1.6, -2.4,
                          -0.2, -1.1, 0.0))
        sim = SinkSimulation(psi0).run()
        for t in (0.37, 1.13, 2.71, 4.49, 6.93):
            assert compare_evolved(evolve(psi0, t), sim.snapshot(t)) == []

    def test_compare_reports_differences(self):
        p = evolve(self.psi0, 1.0)
        q = evolve(self.psi0, 1.8)
        assert compare_evolved(p, q)
        moved = EvolvedPotential(1.0, p.points, p.plateaus, ())
        assert compare_evolved(p, moved) == ['2 sinks against 0']

    def test_time_out_of_range(self):
        with pytest.raises(DomainError):
            evolve(self.psi0, 3.0)

    def test_document(self):
        state = evolve(self.psi0, 1.0)
        data = json.loads(json.dumps(state.to_dict()))
        assert data['t'] == 1.0
        assert compare_evolved(EvolvedPotential.from_dict(data), state) == []


class TestMassTreeConversions(object):

    def setup_method(self, method):
        self.psi0 = Potential(TWO_SINKS)
        self.tree = level_set_tree(self.psi0.to_excursion())

    def test_interior_mass(self):
        mt = potential_to_mass_tree(evolve(self.psi0, 1.0), 1.0)
        assert trees_close(mt.base, PlaneTree.from_nested(1.0))
        assert mt.leaf_masses == {0: SingleMass(pytest.approx(2.0))}
        m, = mt.interior_masses
        assert (m.edge, m.orientation) == (0, LEFT)
        assert (m.offset, m.mass) == (pytest.approx(0.5), pytest.approx(1.0))

    def test_double_mass(self):
        mt = potential_to_mass_tree(evolve(self.psi0, 1.8), 1.8)
        mass = mt.leaf_masses[0]
        assert isinstance(mass, DoubleMass)
        assert (mass.left, mass.right) == (pytest.approx(1.0),
                                           pytest.approx(3.0))

    def test_round_trip(self):
        for t in (0.25, 1.0, 1.8, 2.2):
            mt = prune_mass_equipped(self.tree, t)
            state = mass_tree_to_potential(mt, t)
            back = potential_to_mass_tree(state, t)
            assert trees_close(back.base, mt.base)
            assert back.total_mass == pytest.approx(mt.total_mass)
            assert compare_evolved(mass_tree_to_potential(back, t),
                                   state) == []

    def test_double_mass_without_sinks_splits_evenly(self):
        state = evolve(self.psi0, 1.8)
        bare = EvolvedPotential(state.t, state.points, state.plateaus, ())
        mass = potential_to_mass_tree(bare, 1.8).leaf_masses[0]
        assert (mass.left, mass.right) == (pytest.approx(2.0),
                                           pytest.approx(2.0))

    def test_root_mass(self):
        mt = MassTree(PlaneTree.empty(), root_mass=3.0)
        state = mass_tree_to_potential(mt, 1.5, a=1.0)
        assert state.points == ((1.0, 0.0), (4.0, 0.0))
        assert sinks_of(state) == [(2.5, 3.0, 0)]
        assert potential_to_mass_tree(state, 1.5).root_mass == \
            pytest.approx(3.0)

    def test_inadmissible(self):
        base = PlaneTree.from_nested(1.0)
        with pytest.raises(AdmissibilityError):
            mass_tree_to_potential(MassTree(base, {0: SingleMass(1.0)}), 1.0)
        with pytest.raises(AdmissibilityError):
            potential_to_mass_tree(evolve(self.psi0, 1.0), 1.2)

    def test_document(self):
        mt = prune_mass_equipped(self.tree, 1.8)
        data = json.loads(json.dumps(mass_tree_to_dict(mt)))
        assert data['leaf_masses']['0'] == {'mass': 4.0, 'mL': 1.0,
                                            'mR': 3.0}
        assert mass_tree_from_dict(data) == mt
        mt = prune_mass_equipped(self.tree, 1.0)
        assert mass_tree_from_dict(mass_tree_to_dict(mt)) == mt
        assert mt.interior_masses == (InteriorMass(0, 0.5, 1.0, LEFT),)


class TestShockTree(object):

    def setup_method(self, method):
        self.psi0 = Potential(TWO_SINKS)
        self.st = shock_tree(self.psi0)

    def test_rest_and_travel(self):
        assert trees_close(self.st.base,
                           PlaneTree.from_nested((0.5, 2.0, 2.0)))
        assert self.st.v == (0.5, 0.5, 1.5)
        assert self.st.h == (0.0, 1.5, 0.5)
        assert self.st.x == (2.5, 1.0, 3.0)
        assert self.st.birth == (2.0, 0.0, 0.0)

    def test_agrees_with_simulation(self):
        sim = SinkSimulation(self.psi0).run()
        tree, ids = sim.merge_tree()
        assert trees_close(tree, self.st.base)
        times = sim.rest_and_travel()
        for node, sink in enumerate(ids):
            assert times[sink] == (pytest.approx(self.st.v[node]),
                                   pytest.approx(self.st.h[node]))

    def test_vertical_tree(self):
        assert trees_close(vertical_tree(self.st),
                           level_set_tree(self.psi0.to_excursion()))

    def test_masses(self):
        assert self.st.mass_at(1, 0.2) == pytest.approx(0.4)
        assert self.st.mass_at(1, 1.0) == pytest.approx(1.0)
        assert self.st.mass_at(0, 0.5) == pytest.approx(5.0)

    def test_svg(self):
        phase = render_svg(self.st)
        assert phase.startswith('<svg ')
        assert phase.count('<polyline') == 5
        assert phase.count('<circle') == 4
        space_time = render_svg(self.st, view='space-time')
        assert space_time.count('<polyline') == 5
        assert space_time.rstrip().endswith('</svg>')
        with pytest.raises(DomainError):
            render_svg(self.st, view='plan')


class TestParticles(object):

    def setup_method(self, method):
        self.psi0 = Potential(TWO_SINKS)

    def test_collision_time(self):
        assert collision_time(self.psi0, 0.8, 1.2) == pytest.approx(0.2)
        assert collision_time(self.psi0, 2.8, 1.2) == pytest.approx(2.0)
        assert collision_time(self.psi0, 1.0, 1.0) == 0.0

    def test_h2_distance(self):
        assert h2_distance(self.psi0, 1.2, 2.8) == pytest.approx(1.6)
        with pytest.raises(DomainError):
            h2_distance(self.psi0, -1.0, 2.0)

    def test_collision_time_is_an_ultrametric(self):
        rng = make_rng(5)
        for psi0 in sampled_potentials(3, 60):
            tol = 1e-9 * max(1.0, psi0.b - psi0.a)
            for _ in range(10):
                x, y, z = psi0.a + (psi0.b - psi0.a) * rng.random(3)
                xz = collision_time(psi0, x, z)
                xy = collision_time(psi0, x, y)
                yz = collision_time(psi0, y, z)
                assert xz <= max(xy, yz) + tol
                assert xy == collision_time(psi0, y, x)
                assert xy <= psi0.t_max + tol

    def test_h2_distance_is_a_tree_metric(self):
        rng = make_rng(6)
        for psi0 in sampled_potentials(4, 60):
            tol = 1e-9 * max(1.0, psi0.b - psi0.a)

            def d(u, v):
                return h2_distance(psi0, u, v)

            for _ in range(10):
                w, x, y, z = psi0.a + (psi0.b - psi0.a) * rng.random(4)
                sums = sorted([d(w, x) + d(y, z), d(w, y) + d(x, z),
                               d(w, z) + d(x, y)])
                assert sums[2] - sums[1] <= tol


class TestSinkWindow(object):

    def test_mass_rule(self):
        t = 0.8
        for stream in range(25):
            state = sample_sink_window(GwParams(1.0, seed=9, stream=stream), t)
            if state.growing:
                assert state.mass == pytest.approx(2 * t)
            else:
                assert state.mass < 2 * t + 1e-9

    def test_negative_time(self):
        with pytest.raises(DomainError):
            sample_sink_window(GwParams(1.0), -1.0)
