import pytest

from prunetree.exceptions import (
    DomainError, NonMonotoneFunctionalError, TreeSizeError)
from prunetree.gw import GwParams, sample_gw
from prunetree.pruning import (
    Custom, DoubleMass, InteriorMass, Length, MassTree, PruningFunctional,
    SingleMass, edge_crossing, get_functional, horton_prune, prune,
    prune_mass_equipped, register_functional)
from prunetree.tree import (
    EMBEDDING_SIZE_LIMIT, LEFT, PlaneTree, TreePoint, is_embeddable, length,
    num_leaves, trees_close)


def sampled_trees(seed, count, node_cap=200):
    for stream in range(count):
        params = GwParams(1.0, seed=seed, stream=stream, node_cap=node_cap)
        try:
            yield sample_gw(params)
        except TreeSizeError:
            continue


class TestPrune(object):

    def setup_method(self):
        self.tree = PlaneTree.from_nested((3.0, 1.0, 2.0))

    def test_length(self):
        pruned, cuts = prune(self.tree, 'length', 1.5)
        assert pruned == PlaneTree.from_nested(3.5)
        assert sorted(cut.kind for cut in cuts) == ['interior', 'leaf']
        assert cuts.removed_length == pytest.approx(2.5)

    def test_height(self):
        pruned, _ = prune(self.tree, 'height', 1.5)
        assert pruned == PlaneTree.from_nested(3.5)
        pruned, _ = prune(self.tree, 'height', 0.5)
        assert pruned == PlaneTree.from_nested((3.0, 0.5, 1.5))

    def test_zero_is_identity(self):
        for name in ('length', 'height', 'horton', 'leaves'):
            assert prune(self.tree, name, 0.0).tree == self.tree

    def test_whole_tree_goes(self):
        pruned, cuts = prune(self.tree, 'length', 7.0)
        assert pruned.is_empty
        assert [cut.kind for cut in cuts] == ['root']
        assert cuts.cuts[0].point.is_root

    def test_leaves(self):
        pruned, cuts = prune(self.tree, 'leaves', 2)
        assert pruned == PlaneTree.from_nested(3.0)
        assert [cut.kind for cut in cuts] == ['double']

    def test_horton_counts_whole_prunings(self):
        tree = PlaneTree.from_nested(
            (1.0, (1.0, (1.0, 1.0, 1.0), (1.0, 1.0, 1.0)), (1.0, 1.0, 1.0)))
        assert prune(tree, 'horton', 1).tree == horton_prune(tree)
        twice = horton_prune(horton_prune(tree))
        assert twice == PlaneTree.from_nested(2.0)
        assert prune(tree, 'horton', 2).tree == twice
        assert prune(tree, 'horton', 2.9).tree == twice

    def test_height_is_a_semigroup(self):
        tree = PlaneTree.from_nested((3.0, (1.0, 0.5, 0.8), 2.0))
        twice = prune(prune(tree, 'height', 0.3).tree, 'height', 0.4).tree
        assert trees_close(twice, prune(tree, 'height', 0.7).tree)

    def test_stemless_tree(self):
        tree = PlaneTree.stemless(1.0, (2.0, 1.0, 1.0))
        pruned, cuts = prune(tree, 'height', 1.5)
        assert pruned == PlaneTree.from_nested(1.5)
        # The root now sits on top of the surviving edge.
        assert [cut.point for cut in cuts] == [TreePoint(0, 1.5),
                                               TreePoint(0, 0.0)]

    def test_negative_time(self):
        with pytest.raises(DomainError):
            prune(self.tree, 'length', -1.0)

    def test_nothing_but_the_root_left(self):
        pruned, cuts = prune(self.tree, 'length', length(self.tree))
        assert pruned.is_empty
        assert [cut.kind for cut in cuts] == ['root']
        edge = PlaneTree.from_nested(2.0)
        assert prune(edge, 'height', 2.0).tree.is_empty
        assert prune(edge, 'height', 1.5).tree == PlaneTree.from_nested(0.5)

    def test_empty_tree(self):
        pruned, cuts = prune(PlaneTree.empty(), 'length', 1.0)
        assert pruned.is_empty
        assert len(cuts) == 0


class TestSampledTrees(object):
    """Properties of pruning over sampled GW(1) trees."""

    def test_height_semigroup_on_samples(self):
        for tree in sampled_trees(1, 100):
            for s, t in ((0.3, 0.4), (0.5, 1.0), (1.2, 0.25)):
                twice = prune(prune(tree, 'height', s).tree, 'height', t).tree
                assert trees_close(twice, prune(tree, 'height', s + t).tree)

    def test_length_is_not_a_semigroup(self):
        tree = PlaneTree.from_nested((3.0, 1.0, 2.0))
        once = prune(tree, 'length', 2.5).tree
        twice = prune(prune(tree, 'length', 1.0).tree, 'length', 1.5).tree
        assert once == PlaneTree.from_nested(3.0)
        assert twice == PlaneTree.from_nested(2.5)

    def test_monotone_in_time(self):
        small = [tree for tree in sampled_trees(2, 200)
                 if len(tree) <= EMBEDDING_SIZE_LIMIT]
        assert len(small) > 50
        times = (0.0, 0.2, 0.7, 1.5, 3.0)
        for tree in small:
            for name in ('length', 'height', 'horton', 'leaves'):
                pruned = [prune(tree, name, t).tree for t in times]
                for earlier, later in zip(pruned, pruned[1:]):
                    assert is_embeddable(later, earlier)


class TestFunctionals(object):

    def test_registry(self):
        assert isinstance(get_functional('length'), Length)
        assert isinstance(get_functional(Length), Length)
        with pytest.raises(ValueError):
            get_functional('no-such-functional')

    def test_register(self):
        class Doubled(Length):
            name = 'doubled-length'

            def value(self, tree):
                return 2 * length(tree)

        register_functional(Doubled)
        assert isinstance(get_functional('doubled-length'), Doubled)
        with pytest.raises(ValueError):
            register_functional(PruningFunctional)

    def test_custom_matches_builtin(self):
        custom = Custom(length, lambda value, sub, offset: value + offset,
                        name='my-length')
        tree = PlaneTree.from_nested((3.0, (1.0, 0.5, 0.8), 2.0))
        for t in (0.3, 1.0, 2.5):
            assert trees_close(prune(tree, custom, t).tree,
                               prune(tree, 'length', t).tree)

    def test_custom_must_be_monotone(self):
        custom = Custom(lambda tree: -length(tree),
                        lambda value, sub, offset: value - offset)
        with pytest.raises(NonMonotoneFunctionalError):
            prune(PlaneTree.from_nested((3.0, 1.0, 2.0)), custom, 1.0)

    def test_edge_crossing(self):
        empty = PlaneTree.empty()
        assert edge_crossing(empty, 'length', 1.5, 2.0) == 1.5
        assert edge_crossing(empty, 'length', 1.5, 1.0) is None
        two = PlaneTree.from_nested((0.5, 1.0, 1.0))
        assert edge_crossing(two, 'leaves', 2) == 0.0
        assert edge_crossing(two, 'leaves', 3) is None


class TestMassEquippedPruning(object):

    def test_leaf_and_interior_masses(self):
        tree = PlaneTree.from_nested((3.0, 1.0, 2.0))
        mt = prune_mass_equipped(tree, 1.5)
        assert mt.base == PlaneTree.from_nested(3.5)
        assert mt.leaf_masses == {0: SingleMass(3.0)}
        assert mt.interior_masses == (InteriorMass(0, 0.5, 2.0, LEFT),)
        assert mt.total_mass == pytest.approx(5.0)
        assert mt.is_admissible(1.5)

    def test_double_mass(self):
        tree = PlaneTree.from_nested((2.0, 0.6, 0.7))
        mt = prune_mass_equipped(tree, 1.0)
        assert mt.base == PlaneTree.from_nested(2.0)
        mass = mt.leaf_masses[0]
        assert isinstance(mass, DoubleMass)
        assert mass.left == pytest.approx(1.2)
        assert mass.right == pytest.approx(1.4)
        assert mt.interior_masses == ()

    def test_root_mass(self):
        tree = PlaneTree.from_nested((1.0, 0.5, 0.5))
        for t in (2.0, 5.0):
            mt = prune_mass_equipped(tree, t)
            assert mt.base.is_empty
            assert mt.root_mass == pytest.approx(4.0)

    def test_mass_is_twice_the_removed_length(self):
        tree = PlaneTree.from_nested(
            (0.7, (1.1, (0.3, 0.9, 0.2), 1.7), (0.4, 0.6, (0.8, 0.5, 1.3))))
        for t in (0.1, 0.45, 1.0, 2.0):
            mt = prune_mass_equipped(tree, t)
            removed = length(tree) - length(mt.base)
            assert mt.total_mass == pytest.approx(2 * removed)
            assert mt.is_admissible(t)
            assert num_leaves(mt.base) == len(mt.leaf_masses)

    def test_admissibility(self):
        base = PlaneTree.from_nested(1.0)
        assert MassTree(base, {0: SingleMass(2.0)}).is_admissible(1.0)
        assert not MassTree(base, {0: SingleMass(1.0)}).is_admissible(1.0)
        assert not MassTree(base, {0: DoubleMass(0.5, 1.0)}).is_admissible(
            1.0)
        assert not MassTree(base, {0: SingleMass(2.0)},
                            (InteriorMass(0, 0.5, 3.0, LEFT),)
                            ).is_admissible(1.0)
        assert not MassTree(base).is_admissible(1.0)

    def test_cut_points(self):
        _, cuts = prune(PlaneTree.from_nested((3.0, 1.0, 2.0)), 'length', 1.5)
        points = {cut.kind: cut.point for cut in cuts}
        assert points['interior'] == TreePoint(0, 0.5)
        assert points['leaf'] == TreePoint(0, 0.0)
