import json

import pytest

from prunetree.exceptions import DomainError, InsufficientSamplesError
from prunetree.verify import (
    SUITES, McConfig, Report, run_suites, verify_annihilation_equivalence,
    verify_invariance, verify_random_sink, verify_theorem8,
    with_overrides)


def small_config(**changes):
    values = dict(n=1000, node_cap=200, grid=3, window_samples=200, seed=11)
    values.update(changes)
    return McConfig(**values)


def outcome(report):
    """Everything in a report except the configuration."""
    data = report.to_dict()
    del data['config']
    return data


class TestConfig(object):

    def test_defaults(self):
        cfg = McConfig()
        assert (cfg.lam, cfg.t, cfg.n, cfg.alpha) == (1.0, 1.0, 10000, 0.01)
        assert cfg.to_dict()['phi_kinds'] == ['length', 'height', 'horton',
                                              'leaves']

    def test_validation(self):
        with pytest.raises(DomainError):
            McConfig(n=500)
        with pytest.raises(DomainError):
            McConfig(alpha=1.0)
        with pytest.raises(DomainError):
            McConfig(lam=0.0)
        with pytest.raises(DomainError):
            McConfig(grid=1)

    def test_overrides(self):
        cfg = with_overrides(small_config(), t=2.0, n=None)
        assert cfg.t == 2.0
        assert cfg.n == 1000

    def test_replicate_streams(self):
        params = small_config().params(5)
        assert (params.seed, params.stream, params.node_cap) == (11, 5, 200)


class TestInvariance(object):

    def test_report(self):
        report = verify_invariance(small_config(), 'length')
        assert report.suite == 'invariance:length'
        assert [c.name for c in report.checks] == [
            'survival frequency', 'stem length law',
            'branching at the first vertex', 'leaf count law']
        assert report.censored > 0
        data = json.loads(report.to_json())
        assert data['suite'] == 'invariance:length'
        assert data['config']['n'] == 1000
        assert report.render_text().startswith('invariance:length: ')

    def test_leaf_count_has_no_reference(self):
        report = verify_invariance(small_config(), 'leaves')
        skipped = [c.name for c in report.checks if c.kind == 'skipped']
        assert skipped == ['survival frequency', 'stem length law']

    def test_reproducible(self):
        cfg = small_config(t=0.5)
        first = verify_invariance(cfg, 'height')
        assert outcome(verify_invariance(cfg, 'height')) == outcome(first)
        parallel = verify_invariance(with_overrides(cfg, workers=2), 'height')
        assert outcome(parallel) == outcome(first)

    def test_too_few_survivors(self):
        with pytest.raises(InsufficientSamplesError):
            verify_invariance(small_config(t=1000.0), 'length')


class TestMassLaws(object):

    def test_exact_checks(self):
        report = verify_theorem8(small_config(t=0.5))
        assert report.suite == 'theorem8'
        exact = [c for c in report.checks if c.kind == 'exact']
        assert [c.name for c in exact] == ['single leaf masses equal 2t']
        assert all(c.passed for c in exact)
        json.loads(report.to_json())

    def test_needs_positive_time(self):
        with pytest.raises(DomainError):
            verify_theorem8(small_config(t=0.0))


class TestRandomSink(object):

    def test_exact_checks(self):
        report = verify_random_sink(small_config(t=0.8))
        check, = [c for c in report.checks if c.kind == 'exact']
        assert check.name == 'mass at most 2t, equal iff growing'
        assert check.passed
        assert check.n == 1000
        names = [c.name for c in report.checks]
        assert 'window mass law agrees' in names


class TestEquivalence(object):

    def test_routes_agree(self):
        report = verify_annihilation_equivalence(small_config())
        exact = {c.name: c for c in report.checks if c.kind == 'exact'}
        assert sorted(exact) == [
            'evolve matches simulation', 'mass conserved at t_max',
            'merge log matches shock tree', 'shock tree isometry']
        for check in exact.values():
            assert check.passed, check.note
            assert check.n + report.censored == 1000


class TestSuites(object):

    def test_names(self):
        assert SUITES == ('invariance', 'theorem8', 'sink', 'equivalence',
                          'all')

    def test_combined(self):
        cfg = small_config(phi_kinds=('length', 'height'))
        report = run_suites(['invariance'], cfg)
        assert isinstance(report, Report)
        assert report.suite == 'invariance'
        names = [c.name for c in report.checks]
        assert names[0] == 'invariance:length: survival frequency'
        assert names[4] == 'invariance:height: survival frequency'
        assert len(names) == 8

    def test_single_suite(self):
        report = run_suites('theorem8', small_config(t=0.5))
        assert report.suite == 'theorem8'

    def test_unknown(self):
        with pytest.raises(DomainError):
            run_suites(['bogus'], small_config())
