"""Exponential critical binary Galton-Watson trees.

A GW(lam) tree starts with a stem; at the end of every edge the tree
either stops or branches in two, with probability one half each, and
edge lengths are independent exponentials of rate ``lam``::

    >>> tree = sample_gw(GwParams(1.0, seed=7))

The module also evaluates the closed forms attached to the model: the
density of the total length, survival probabilities under pruning, the
growth probability and mass law of a random sink, and the laws of the
masses left behind by mass-equipped pruning.

Randomness comes from :func:`make_rng`, a Philox generator keyed by
``(seed, stream)`` so that parallel replicates are independent and
reproducible.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from prunetree.exceptions import (
    DomainError, NoClosedFormError, TreeSizeError)
from prunetree.harris import Excursion
from prunetree.special import bessel_i, bessel_ie
from prunetree.tree import LEFT, RIGHT, NodeRecord, PlaneTree


__all__ = (
    'GwParams', 'make_rng', 'sample_gw', 'sample_gw_length',
    'sample_exp_excursion', 'RandomSinkState', 'sample_random_sink',
    'bessel_i', 'bessel_ie', 'length_pdf', 'survival_prob', 'pruned_rate',
    'growth_probability', 'sink_mass_pdf', 'sink_mass_cdf',
    'leaf_count_pmf', 'single_mass_probability', 'double_mass_pdf',
    'interior_mass_pdf', 'interior_mass_cdf', 'interior_count_pmf',
    'ClosedForm', 'Draws', 'DEFAULT_NODE_CAP',
)


DEFAULT_NODE_CAP = 10 ** 7


@dataclass(frozen=True)
class GwParams:
    lam: float
    seed: int = 0
    stream: int = 0
    node_cap: int = DEFAULT_NODE_CAP

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError('lambda must be positive, got %r' % self.lam)
        if self.seed < 0 or self.stream < 0:
            raise DomainError('seed and stream must be non-negative')

    def rng(self):
        return make_rng(self.seed, self.stream)


def make_rng(seed, stream=0):
    """Generator for replicate ``stream`` of the run seeded with ``seed``."""
    sequence = np.random.SeedSequence([int(seed), int(stream)])
    return np.random.Generator(np.random.Philox(sequence))


class Draws(object):
    """Buffered exponential and fair-coin draws from one generator.

    Buffers start small and double, so that short samples do not pay
    for large blocks.
    """

    first_block = 16
    max_block = 4096

    def __init__(self, rng, scale):
        self.rng = rng
        self.scale = scale
        self._exp = np.empty(0)
        self._coin = np.empty(0, dtype=bool)
        self._i = self._j = 0

    def _next_size(self, current):
        return min(self.max_block, max(self.first_block, 2 * len(current)))

    def exp(self):
        if self._i == len(self._exp):
            self._exp = self.rng.exponential(self.scale,
                                             self._next_size(self._exp))
            self._i = 0
        self._i += 1
        return float(self._exp[self._i - 1])

    def coin(self):
        if self._j == len(self._coin):
            self._coin = self.rng.random(self._next_size(self._coin)) < 0.5
            self._j = 0
        self._j += 1
        return bool(self._coin[self._j - 1])


def sample_gw(params, rng=None):
    """Sample a planted GW(lam) tree.

    The two subtrees of a branching vertex are independent copies, so
    their plane order is already uniformly random.
    """
    draws = Draws(rng if rng is not None else params.rng(),
                   1.0 / params.lam)
    parents, lefts, rights, lengths = [], [], [], []
    stack = [(None, None)]
    while stack:
        parent, side = stack.pop()
        node = len(lengths)
        if node >= params.node_cap:
            raise TreeSizeError('GW sample exceeded the node cap of %d' %
                                params.node_cap)
        parents.append(parent)
        lefts.append(None)
        rights.append(None)
        lengths.append(draws.exp())
        if parent is not None:
            (lefts if side == LEFT else rights)[parent] = node
        if draws.coin():
            stack.append((node, RIGHT))
            stack.append((node, LEFT))
    return PlaneTree(
        [NodeRecord(p, l, r, x) for p, l, r, x in
         zip(parents, lefts, rights, lengths)], [0])


def sample_gw_length(params, rng=None, budget=math.inf):
    """Total length of ``sample_gw(params, rng)`` without building the tree.

    Consumes the generator exactly as :func:`sample_gw` does, so equal
    generators give equal lengths. Stops early, returning a value above
    ``budget``, once the running total exceeds it.
    """
    draws = Draws(rng if rng is not None else params.rng(),
                   1.0 / params.lam)
    pending = 1
    nodes = 0
    total = 0.0
    while pending:
        pending -= 1
        nodes += 1
        if nodes > params.node_cap:
            raise TreeSizeError('GW sample exceeded the node cap of %d' %
                                params.node_cap)
        total += draws.exp()
        if total > budget:
            return total
        if draws.coin():
            pending += 2
    return total


def sample_exp_excursion(params, rng=None):
    """Excursion of the symmetric random walk with Exp(lam/2) steps.

    Rises and falls alternate; the first fall that would cross zero is
    cut short at zero and ends the excursion.
    """
    draws = Draws(rng if rng is not None else params.rng(),
                   2.0 / params.lam)
    extrema = [0.0]
    value = 0.0
    while True:
        value += draws.exp()
        extrema.append(value)
        fall = draws.exp()
        if fall >= value:
            extrema.append(0.0)
            return Excursion(tuple(extrema))
        value -= fall
        extrema.append(value)
        if len(extrema) > 2 * params.node_cap:
            raise TreeSizeError('excursion exceeded the node cap of %d' %
                                params.node_cap)


@dataclass(frozen=True)
class RandomSinkState:
    """State of the sink started at a given local minimum at time ``t``."""
    growing: bool
    mass: float
    t: float
    steps: int = 0


def sample_random_sink(params, t, rng=None):
    """Run the alternating rest/motion sequence of a random sink to time t.

    Resting periods are Exp(lam); each motion period lasts the total
    length of an independent GW(lam) tree, the sibling subtree of the
    shock tree. While resting the mass is ``2t``; a moving sink carries
    twice the time elapsed before it started moving.
    """
    if not t > 0:
        raise DomainError('time must be positive, got %r' % t)
    rng = rng if rng is not None else params.rng()
    elapsed = 0.0
    steps = 0
    while True:
        steps += 1
        elapsed += rng.exponential(1.0 / params.lam)
        if elapsed >= t:
            return RandomSinkState(True, 2.0 * t, t, steps)
        moving = sample_gw_length(params, rng, budget=t - elapsed)
        if elapsed + moving > t:
            return RandomSinkState(False, 2.0 * elapsed, t, steps)
        elapsed += moving


def _positive(name, value):
    value = np.asarray(value, dtype=float)
    if np.any(~(value > 0)):
        raise DomainError('%s must be positive' % name)
    return value


def _nonnegative(name, value):
    value = np.asarray(value, dtype=float)
    if np.any(~(value >= 0)):
        raise DomainError('%s must be non-negative' % name)
    return value


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def length_pdf(x, lam):
    """Density of the total length of a GW(lam) tree,
    ``exp(-lam x) I_1(lam x) / x``."""
    x = _positive('x', x)
    lam = float(_positive('lambda', lam))
    return _out(bessel_ie(1, lam * x) / x)


_KINDS = {'length': 'length', 'height': 'height', 'horton': 'horton',
          'leaves': 'leaves', 'horton_order': 'horton',
          'leaf_count': 'leaves'}


def _kind(phi_kind):
    name = getattr(phi_kind, 'name', phi_kind)
    try:
        return _KINDS[str(name).lower()]
    except KeyError:
        raise DomainError('unknown pruning functional %r' % (phi_kind,))


def survival_prob(phi_kind, lam, delta):
    """Probability that a GW(lam) tree survives pruning at ``delta``."""
    kind = _kind(phi_kind)
    delta = _nonnegative('delta', delta)
    lam = float(_positive('lambda', lam))
    if kind == 'length':
        z = lam * delta
        return _out(bessel_ie(0, z) + bessel_ie(1, z))
    if kind == 'height':
        return _out(2.0 / (lam * delta + 2.0))
    if kind == 'horton':
        return _out(2.0 ** -np.floor(delta))
    raise NoClosedFormError(
        'the survival probability under leaf-count pruning has no '
        'closed form')


def pruned_rate(phi_kind, lam, delta):
    """Edge rate of the pruned tree, which is again GW."""
    return lam * survival_prob(phi_kind, lam, delta)


def growth_probability(t, lam):
    """Probability that the sink started at a local minimum still grows
    at time ``t``: ``exp(-lam t) I_0(lam t)``."""
    t = _nonnegative('t', t)
    lam = float(_positive('lambda', lam))
    return _out(bessel_ie(0, lam * t))


def sink_mass_pdf(a, t, lam):
    """Law of the sink mass at time ``t``.

    Returns ``(density, atom)``: the density of the continuous part at
    ``a`` and the weight of the atom at ``a = 2t``.
    """
    t = float(_positive('t', t))
    lam = float(_positive('lambda', lam))
    a = np.asarray(a, dtype=float)
    if np.any(~((a >= 0) & (a <= 2 * t))):
        raise DomainError('sink mass must lie in [0, 2t]')
    u = lam * (t - a / 2.0)
    w = lam * a / 2.0
    density = lam / 2.0 * (bessel_ie(0, u) + bessel_ie(1, u)) * \
        bessel_ie(0, w)
    return _out(density), growth_probability(t, lam)


def sink_mass_cdf(a, t, lam):
    """Probability that the mass is at most ``a`` (atom included at 2t)."""
    a = float(a)
    if a >= 2 * t:
        return 1.0
    value, _ = integrate.quad(
        lambda x: sink_mass_pdf(x, t, lam)[0], 0.0, max(a, 0.0),
        epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


def leaf_count_pmf(n):
    """Probability that a critical binary GW tree has ``n`` leaves,
    ``C_{n-1} / 2^(2n-1)``."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise DomainError('leaf count must be at least one')
    log = (gammaln(2 * n - 1) - gammaln(n) - gammaln(n + 1) -
           (2 * n - 1) * math.log(2.0))
    return _out(np.exp(log))


def single_mass_probability(t, lam):
    """Probability that a leaf of the mass-equipped pruned tree carries a
    single mass."""
    p = survival_prob('length', lam, t)
    return 2.0 / lam * length_pdf(t, lam) / p ** 2


def double_mass_pdf(a, b, t, lam):
    """Joint density of a double leaf mass ``(m_L, m_R)``, supported on
    ``max(a, b) <= 2t < a + b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = survival_prob('length', lam, t)
    norm = p ** 2 - 2.0 / lam * length_pdf(t, lam)
    inside = (np.maximum(a, b) <= 2 * t) & (a + b > 2 * t) & (a > 0) & \
        (b > 0)
    safe_a = np.where(inside, a, 1.0)
    safe_b = np.where(inside, b, 1.0)
    value = 0.25 * length_pdf(safe_a / 2.0, lam) * \
        length_pdf(safe_b / 2.0, lam) / norm
    return _out(np.where(inside, value, 0.0))


def interior_mass_pdf(a, t, lam):
    """Density of a mass left inside an edge, ``l(a/2) / (2 (1 - p_t))``
    on ``(0, 2t)``."""
    a = np.asarray(a, dtype=float)
    p = survival_prob('length', lam, t)
    inside = (a > 0) & (a < 2 * t)
    safe = np.where(inside, a, 1.0)
    value = length_pdf(safe / 2.0, lam) / (2.0 * (1.0 - p))
    return _out(np.where(inside, value, 0.0))


def interior_mass_cdf(a, t, lam):
    a = np.clip(np.asarray(a, dtype=float), 0.0, 2 * t)
    p = survival_prob('length', lam, t)
    return _out((1.0 - survival_prob('length', lam, a / 2.0)) / (1.0 - p))


def interior_count_pmf(k, t, lam):
    """Number of masses inside one edge of the pruned tree: geometric,
    ``p_t (1 - p_t)^k``."""
    p = survival_prob('length', lam, t)
    return _out(p * (1.0 - p) ** np.asarray(k, dtype=float))


class ClosedForm(object):
    """All closed-form evaluators for one value of ``lam``."""

    def __init__(self, lam):
        self.lam = float(lam)

    def i0(self, z):
        return bessel_i(0, z)

    def i1(self, z):
        return bessel_i(1, z)

    def ell(self, x):
        return length_pdf(x, self.lam)

    def p(self, phi_kind, delta):
        return survival_prob(phi_kind, self.lam, delta)

    def p_length(self, delta):
        return survival_prob('length', self.lam, delta)

    def p_height(self, delta):
        return survival_prob('height', self.lam, delta)

    def p_horton(self, delta):
        return survival_prob('horton', self.lam, delta)

    def xi(self, t):
        return growth_probability(t, self.lam)

    def mu(self, a, t):
        return sink_mass_pdf(a, t, self.lam)

    def evaluate(self, formula, x, t=None):
        """Evaluate a formula by its command line name."""
        if formula == 'ell':
            return self.ell(x)
        if formula in ('p-length', 'p-height', 'p-horton'):
            return self.p(formula[2:], x)
        if formula == 'xi':
            return self.xi(x)
        if formula == 'mu':
            if t is None:
                raise DomainError('the mass law needs a time t')
            return self.mu(x, t)[0]
        raise DomainError('unknown formula %r' % formula)
