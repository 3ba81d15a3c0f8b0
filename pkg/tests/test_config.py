from io import StringIO

import pytest
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError

from prunetree.env import DjangoConfigStorage, Environment, get_env, reset
from prunetree.exceptions import DomainError


class TestConfig(object):
    """The configuration is backed by the Django settings object."""

    def setup_method(self, method):
        reset()

    def teardown_method(self, method):
        storage = DjangoConfigStorage()
        for key in DjangoConfigStorage._mapping:
            del storage[key]
        reset()

    def test_settings_names(self):
        """Options carry a PRUNETREE_ prefix in the Django settings."""
        settings.PRUNETREE_SEED = 42
        assert get_env().config['seed'] == 42
        assert get_env().seed == 42
        # Also, we are caseless.
        assert get_env().config['SeEd'] == 42

        get_env().workers = 3
        assert settings.PRUNETREE_WORKERS == 3
        assert get_env().workers == 3

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv('PRUNETREE_SEED', raising=False)
        env = Environment()
        assert 'seed' not in env.config
        assert env.resolved() == {
            'seed': 1, 'node_cap': 10 ** 7, 'mc_node_cap': 10 ** 5,
            'workers': 1, 'alpha': 0.01, 'sigma_band': 3.0,
            'tolerance': 1e-9}
        with pytest.raises(KeyError):
            env.config['colour']
        assert env.config.get('colour', 'blue') == 'blue'

    def test_seed_from_environment_variable(self, monkeypatch):
        monkeypatch.setenv('PRUNETREE_SEED', '17')
        assert Environment().seed == 17
        # The settings win over the process environment.
        settings.PRUNETREE_SEED = 3
        assert Environment().seed == 3

    def test_overrides(self, monkeypatch):
        monkeypatch.delenv('PRUNETREE_SEED', raising=False)
        settings.PRUNETREE_WORKERS = 2
        env = get_env().with_overrides(seed=5, workers=None)
        assert env.seed == 5
        assert env.workers == 2
        assert get_env().seed == 1

    def test_validation(self):
        settings.PRUNETREE_ALPHA = 1.5
        with pytest.raises(DomainError):
            get_env().alpha
        settings.PRUNETREE_SEED = 'abc'
        with pytest.raises(DomainError):
            get_env().seed
        settings.PRUNETREE_WORKERS = 0
        with pytest.raises(DomainError):
            get_env().workers
        with pytest.raises(DomainError):
            Environment({'node_cap': 2.5}).node_cap

    def test_mc_config(self):
        settings.PRUNETREE_MC_NODE_CAP = 500
        settings.PRUNETREE_SIGMA_BAND = 4.0
        cfg = get_env().mc_config(n=2000, t=None)
        assert cfg.n == 2000
        assert cfg.t == 1.0
        assert cfg.node_cap == 500
        assert cfg.sigma_band == 4.0

    def test_global_environment(self):
        env = get_env()
        assert get_env() is env
        reset()
        assert get_env() is not env


class TestManagementCommand(object):

    def run(self, *args):
        out, err = StringIO(), StringIO()
        call_command('prunetree', *args, stdout=out, stderr=err)
        return out.getvalue()

    def test_eval(self):
        assert self.run('eval', '--formula', 'p-height', '--lambda', '2',
                        '--t', '1') == '0.500000\n'

    def test_failure(self):
        with pytest.raises(CommandError) as excinfo:
            self.run('eval', '--formula', 'mu', '--lambda', '1')
        assert excinfo.value.returncode == 64
