import os
import threading

from django.conf import settings

from prunetree import settings as defaults
from prunetree.exceptions import DomainError


__all__ = ('DjangoConfigStorage', 'Environment', 'get_env', 'reset')


SEED_VARIABLE = 'PRUNETREE_SEED'


class DjangoConfigStorage(object):
    """Reads configuration values from the Django settings, falling back
    to the documented defaults in :mod:`prunetree.settings`.
    """

    _mapping = {
        'seed': 'PRUNETREE_SEED',
        'node_cap': 'PRUNETREE_NODE_CAP',
        'mc_node_cap': 'PRUNETREE_MC_NODE_CAP',
        'workers': 'PRUNETREE_WORKERS',
        'alpha': 'PRUNETREE_ALPHA',
        'sigma_band': 'PRUNETREE_SIGMA_BAND',
        'tolerance': 'PRUNETREE_TOLERANCE',
    }

    def _transform_key(self, key):
        return self._mapping.get(key.lower(), key.upper())

    def __contains__(self, key):
        return hasattr(settings, self._transform_key(key))

    def __getitem__(self, key):
        name = self._transform_key(key)
        if hasattr(settings, name):
            return getattr(settings, name)
        if key.lower() == 'seed' and SEED_VARIABLE in os.environ:
            return os.environ[SEED_VARIABLE]
        if key.lower() in defaults.DEFAULTS:
            return defaults.DEFAULTS[key.lower()]
        raise KeyError("Django settings doesn't define %s" % name)

    def __setitem__(self, key, value):
        setattr(settings, self._transform_key(key), value)

    def __delitem__(self, key):
        try:
            delattr(settings, self._transform_key(key))
        except AttributeError:
            pass

    def get(self, key, default=None):
        try:
            return self[key]
        except KeyError:
            return default


def _integer(name, value, minimum):
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise DomainError('%s must be an integer, got %r' % (name, value))
    if number != float(value) or number < minimum:
        raise DomainError('%s must be an integer >= %d, got %r' %
                          (name, minimum, value))
    return number


def _real(name, value, lo=0.0, hi=None):
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise DomainError('%s must be a number, got %r' % (name, value))
    if not number > lo or hi is not None and not number < hi:
        raise DomainError('%s out of range: %r' % (name, value))
    return number


class Environment(object):
    """Typed view of the configuration.

    Values come from ``overrides`` first, then from the storage. Setting
    an attribute writes through to the Django settings, like the storage
    itself does.
    """

    config_storage_class = DjangoConfigStorage

    def __init__(self, overrides=None):
        self.config = self.config_storage_class()
        self.overrides = {k: v for k, v in (overrides or {}).items()
                          if v is not None}

    def _value(self, key):
        if key in self.overrides:
            return self.overrides[key]
        return self.config[key]

    def with_overrides(self, **values):
        """A new environment on the same storage; ``None`` values are
        ignored."""
        merged = dict(self.overrides)
        merged.update((k, v) for k, v in values.items() if v is not None)
        return type(self)(merged)

    def _set(self, key, value):
        self.overrides.pop(key, None)
        self.config[key] = value

    def _get_seed(self):
        return _integer('seed', self._value('seed'), 0)
    def _set_seed(self, value):
        self._set('seed', value)
    seed = property(_get_seed, _set_seed, doc="""
    Master seed of the random streams.""")

    def _get_node_cap(self):
        return _integer('node_cap', self._value('node_cap'), 1)
    def _set_node_cap(self, value):
        self._set('node_cap', value)
    node_cap = property(_get_node_cap, _set_node_cap)

    def _get_mc_node_cap(self):
        return _integer('mc_node_cap', self._value('mc_node_cap'), 1)
    def _set_mc_node_cap(self, value):
        self._set('mc_node_cap', value)
    mc_node_cap = property(_get_mc_node_cap, _set_mc_node_cap)

    def _get_workers(self):
        return _integer('workers', self._value('workers'), 1)
    def _set_workers(self, value):
        self._set('workers', value)
    workers = property(_get_workers, _set_workers)

    def _get_alpha(self):
        return _real('alpha', self._value('alpha'), 0.0, 1.0)
    def _set_alpha(self, value):
        self._set('alpha', value)
    alpha = property(_get_alpha, _set_alpha, doc="""
    Significance level of the statistical checks.""")

    def _get_sigma_band(self):
        return _real('sigma_band', self._value('sigma_band'))
    def _set_sigma_band(self, value):
        self._set('sigma_band', value)
    sigma_band = property(_get_sigma_band, _set_sigma_band)

    def _get_tolerance(self):
        return _real('tolerance', self._value('tolerance'))
    def _set_tolerance(self, value):
        self._set('tolerance', value)
    tolerance = property(_get_tolerance, _set_tolerance)

    def resolved(self):
        """All values, validated, as a plain dict."""
        return {key: getattr(self, key)
                for key in DjangoConfigStorage._mapping}

    def mc_config(self, **values):
        """A Monte Carlo configuration seeded from this environment.

        Keyword arguments override single fields; ``None`` is ignored.
        """
        from prunetree.verify import McConfig
        fields = {
            'seed': self.seed, 'workers': self.workers,
            'alpha': self.alpha, 'sigma_band': self.sigma_band,
            'tolerance': self.tolerance, 'node_cap': self.mc_node_cap,
        }
        fields.update((k, v) for k, v in values.items() if v is not None)
        return McConfig(**fields)


# Django has a global state, a global configuration, and so we need a
# global instance of an environment.
env = None
env_lock = threading.RLock()


def get_env():
    # Worker threads may race to configure Django on first use.
    with env_lock:
        global env
        if env is None:
            if not settings.configured:
                settings.configure()
            env = Environment()
    return env


def reset():
    global env
    env = None
