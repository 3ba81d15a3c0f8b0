"""Monte Carlo verification of the distributional results.

Each suite samples replicates, compares them with the closed forms of
:mod:`prunetree.gw` and returns a :class:`Report`. Replicate ``r`` draws
from stream ``r`` of the configured seed, so a report depends only on
its :class:`McConfig`, whatever the number of workers.

Frequencies are z-tested against a band of ``sigma_band`` standard
deviations; distributions are checked by KS or chi-square at level
``alpha``.
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate, stats

from prunetree.annihilation import (
    compare_evolved, evolve, sample_sink_window, shock_tree, vertical_tree)
from prunetree.exceptions import (
    DomainError, InsufficientSamplesError, PruneTreeError, TreeSizeError)
from prunetree.gw import (
    GwParams, double_mass_pdf, growth_probability, interior_mass_cdf,
    leaf_count_pmf, pruned_rate, sample_gw, sample_random_sink,
    single_mass_probability, sink_mass_pdf, survival_prob)
from prunetree.harris import harris_path
from prunetree.potential import Potential
from prunetree.pruning import (
    DoubleMass, SingleMass, get_functional, prune, prune_mass_equipped)
from prunetree.sinks import SinkSimulation
from prunetree.tree import num_leaves, trees_close


__all__ = (
    'McConfig', 'CheckResult', 'Report', 'SUITES', 'verify_invariance',
    'verify_theorem8', 'verify_random_sink',
    'verify_annihilation_equivalence', 'run_suites', 'with_overrides',
)


log = logging.getLogger('prunetree.verify')


MIN_SAMPLES = 30
MIN_EXPECTED = 5.0
DOUBLE_MASS_BINS = 4


@dataclass(frozen=True)
class McConfig:
    """Parameters of a Monte Carlo run.

    ``t`` is the pruning time ``delta`` for the invariance suite and the
    time for the others. ``grid`` is the number of evenly spaced times in
    ``[0, t_max]`` at which the equivalence suite compares its routes.
    """
    lam: float = 1.0
    t: float = 1.0
    n: int = 10000
    seed: int = 1
    alpha: float = 0.01
    sigma_band: float = 3.0
    workers: int = 1
    node_cap: int = 10 ** 5
    tolerance: float = 1e-9
    phi_kinds: tuple = ('length', 'height', 'horton', 'leaves')
    grid: int = 8
    window_samples: int = 2000

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError('lambda must be positive, got %r' % self.lam)
        if not self.t >= 0:
            raise DomainError('t must be non-negative, got %r' % self.t)
        if self.n < 1000:
            raise DomainError('Monte Carlo runs need at least 1000 samples, '
                              'got %d' % self.n)
        if not 0 < self.alpha < 1:
            raise DomainError('alpha must lie in (0, 1), got %r' % self.alpha)
        if self.grid < 2:
            raise DomainError('the time grid needs at least two points')

    def params(self, stream):
        return GwParams(self.lam, self.seed, stream, self.node_cap)

    def to_dict(self):
        data = asdict(self)
        data['phi_kinds'] = list(self.phi_kinds)
        return data


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one statistical check.

    ``kind`` is ``z``, ``ks``, ``chisquare``, ``binomial``, ``exact`` or
    ``skipped``; ``statistic`` is the z-score, test statistic or number
    of failures accordingly.
    """
    name: str
    reference: str
    kind: str
    statistic: Optional[float]
    p_value: Optional[float]
    passed: bool
    n: int
    expected: Optional[float] = None
    observed: Optional[float] = None
    note: str = ''

    def to_dict(self):
        return {k: _plain(v) for k, v in asdict(self).items()}


def _plain(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass
class Report:
    suite: str
    config: dict
    checks: list = field(default_factory=list)
    censored: int = 0

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    @property
    def failures(self):
        return [check for check in self.checks if not check.passed]

    def add(self, check):
        log.info('%s %s: %s (statistic=%r, p=%r, n=%d)',
                 'PASS' if check.passed else 'FAIL', self.suite, check.name,
                 check.statistic, check.p_value, check.n)
        self.checks.append(check)
        return check

    def to_dict(self):
        return {'suite': self.suite, 'config': self.config,
                'censored': self.censored, 'passed': self.passed,
                'checks': [check.to_dict() for check in self.checks]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def render_text(self):
        lines = ['%s: %s (%d checks, %d censored replicates)' % (
            self.suite, 'passed' if self.passed else 'FAILED',
            len(self.checks), self.censored)]
        for check in self.checks:
            value = '-' if check.statistic is None else \
                '%.6g' % check.statistic
            p = '' if check.p_value is None else ' p=%.4g' % check.p_value
            lines.append('  [%s] %-40s %-9s stat=%s%s n=%d%s' % (
                'ok' if check.passed else 'XX', check.name, check.kind,
                value, p, check.n,
                ' (%s)' % check.note if check.note else ''))
        return '\n'.join(lines)

    @classmethod
    def combine(cls, suite, config, reports):
        combined = cls(suite, config)
        for report in reports:
            combined.checks.extend(
                replace(check, name='%s: %s' % (report.suite, check.name))
                for check in report.checks)
            combined.censored += report.censored
        return combined


# Replicate plumbing.

def _run_chunk(job):
    func, cfg, ids, args = job
    return [func(cfg, r, *args) for r in ids]


def _map_replicates(cfg, func, count, *args, first=0):
    """``[func(cfg, r, *args) for r in range(first, first + count)]``,
    spread over ``cfg.workers`` processes in order."""
    ids = range(first, first + count)
    if cfg.workers <= 1 or count < 2:
        return [func(cfg, r, *args) for r in ids]
    size = max(1, -(-count // (cfg.workers * 4)))
    jobs = [(func, cfg, ids[i:i + size], args)
            for i in range(0, count, size)]
    out = []
    with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
        for chunk in executor.map(_run_chunk, jobs):
            out.extend(chunk)
    return out


# Checks.

def _z_check(cfg, name, reference, successes, n, p, note=''):
    if not n:
        return _skipped(name, reference, 0, 'no samples')
    freq = successes / n
    sd = math.sqrt(p * (1 - p) / n)
    if sd > 0:
        z = (freq - p) / sd
    else:
        z = 0.0 if abs(freq - p) <= 1e-12 else math.inf
    return CheckResult(name, reference, 'z', z, None,
                       abs(z) <= cfg.sigma_band, n, p, freq, note)


def _skipped(name, reference, n, note):
    return CheckResult(name, reference, 'skipped', None, None, True, n,
                       note=note)


def _ks_check(cfg, name, reference, sample, cdf):
    if len(sample) < MIN_SAMPLES:
        return _skipped(name, reference, len(sample),
                        'only %d samples' % len(sample))
    result = stats.kstest(np.asarray(sample, dtype=float), cdf)
    return CheckResult(name, reference, 'ks', result.statistic,
                       result.pvalue, result.pvalue >= cfg.alpha,
                       len(sample))


def _chisquare(cfg, name, reference, observed, probabilities):
    """Chi-square of ``observed`` counts against ``probabilities``,
    pooling bins expected to hold fewer than ``MIN_EXPECTED``."""
    observed = np.asarray(observed, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    total = observed.sum()
    if total < MIN_SAMPLES:
        return _skipped(name, reference, int(total),
                        'only %d samples' % total)
    probabilities = probabilities / probabilities.sum()
    order = np.argsort(probabilities, kind='stable')
    obs_bins, exp_bins = [], []
    pool_obs = pool_exp = 0.0
    for i in order:
        pool_obs += observed[i]
        pool_exp += probabilities[i] * total
        if pool_exp >= MIN_EXPECTED:
            obs_bins.append(pool_obs)
            exp_bins.append(pool_exp)
            pool_obs = pool_exp = 0.0
    if pool_exp or pool_obs:
        if exp_bins:
            obs_bins[-1] += pool_obs
            exp_bins[-1] += pool_exp
        else:
            obs_bins.append(pool_obs)
            exp_bins.append(pool_exp)
    if len(exp_bins) < 2:
        return _skipped(name, reference, int(total), 'fewer than two bins')
    result = stats.chisquare(obs_bins, exp_bins)
    return CheckResult(name, reference, 'chisquare', result.statistic,
                       result.pvalue, result.pvalue >= cfg.alpha, int(total),
                       note='%d bins' % len(exp_bins))


def _count_law_check(cfg, name, reference, values, pmf, start, top=0):
    """Chi-square of integer ``values`` (plus ``top`` entries known to be
    large) against ``pmf`` on ``start, start + 1, ...``."""
    total = len(values) + top
    if total < MIN_SAMPLES:
        return _skipped(name, reference, total, 'only %d samples' % total)
    k = start
    probabilities = []
    while total * pmf(k) >= MIN_EXPECTED or k == start:
        probabilities.append(float(pmf(k)))
        k += 1
    probabilities.append(max(0.0, 1.0 - sum(probabilities)))
    observed = np.zeros(len(probabilities))
    for value in values:
        observed[min(int(value) - start, len(probabilities) - 1)] += 1
    observed[-1] += top
    return _chisquare(cfg, name, reference, observed, probabilities)


def _fair_coin_check(cfg, name, reference, heads, n):
    if n < MIN_SAMPLES:
        return _skipped(name, reference, n, 'only %d samples' % n)
    p_value = stats.binomtest(heads, n, 0.5).pvalue
    # Two-sided level matching the sigma band.
    level = 2 * stats.norm.sf(cfg.sigma_band)
    return CheckResult(name, reference, 'binomial', heads / n, p_value,
                       p_value >= level, n, 0.5, heads / n)


def _exact_check(name, reference, failures, n, note=''):
    return CheckResult(name, reference, 'exact', float(failures), None,
                       failures == 0, n, 0.0, float(failures), note)


def _tabulated_cdf(pdf, lo, hi, points=4001):
    grid = np.linspace(lo, hi, points)
    values = integrate.cumulative_trapezoid(pdf(grid), grid, initial=0.0)
    values /= values[-1]
    return lambda x: np.interp(x, grid, values)


# Prune invariance.

def _invariance_replicate(cfg, r, kind):
    try:
        tree = sample_gw(cfg.params(r))
    except TreeSizeError:
        return None
    pruned, _ = prune(tree, kind, cfg.t)
    if pruned.is_empty:
        return ()
    stem = pruned.root_child
    return (pruned.nodes[stem].length, not pruned.is_leaf(stem),
            num_leaves(pruned))


def verify_invariance(cfg, phi_kind):
    """Pruned GW trees, conditioned on surviving, are GW again."""
    kind = get_functional(phi_kind).name
    report = Report('invariance:%s' % kind, cfg.to_dict())
    records = _map_replicates(cfg, _invariance_replicate, cfg.n, kind)
    censored = sum(1 for rec in records if rec is None)
    survivors = [rec for rec in records if rec]
    report.censored = censored
    if len(survivors) < MIN_SAMPLES:
        raise InsufficientSamplesError(
            'only %d of %d trees survived pruning at %r' %
            (len(survivors), cfg.n, cfg.t))
    alive = len(survivors) + censored
    reference = 'pruned GW tree is GW(lam p)'
    if kind == 'leaves':
        report.add(_skipped(
            'survival frequency', reference, cfg.n,
            'no closed form; observed %.6f' % (alive / cfg.n)))
        report.add(_skipped('stem length law', reference, len(survivors),
                            'rate unknown without a closed form'))
    else:
        p = float(survival_prob(kind, cfg.lam, cfg.t))
        report.add(_z_check(cfg, 'survival frequency', reference, alive,
                            cfg.n, p))
        rate = float(pruned_rate(kind, cfg.lam, cfg.t))
        report.add(_ks_check(cfg, 'stem length law', reference,
                             [rec[0] for rec in survivors],
                             stats.expon(scale=1.0 / rate).cdf))
    branched = sum(1 for rec in survivors if rec[1]) + censored
    report.add(_z_check(cfg, 'branching at the first vertex', reference,
                        branched, alive, 0.5))
    report.add(_count_law_check(cfg, 'leaf count law', reference,
                                [rec[2] for rec in survivors],
                                leaf_count_pmf, 1, top=censored))
    return report


# Mass-equipped pruning.

def _masses_replicate(cfg, r):
    try:
        tree = sample_gw(cfg.params(r))
    except TreeSizeError:
        return None
    mt = prune_mass_equipped(tree, cfg.t)
    if mt.base.is_empty:
        return ()
    singles = [m.mass for m in mt.leaf_masses.values()
               if isinstance(m, SingleMass)]
    doubles = [(m.left, m.right) for m in mt.leaf_masses.values()
               if isinstance(m, DoubleMass)]
    counts = [len(mt.masses_on_edge(e)) for e in mt.base.preorder()]
    interior = [(m.mass, m.offset / mt.base.nodes[m.edge].length,
                 m.orientation) for m in mt.interior_masses]
    return singles, doubles, counts, interior


def _double_mass_probabilities(t, lam, bins):
    width = 2.0 * t / bins
    cells, probabilities = [], []
    for i in range(bins):
        for j in range(bins):
            a0, a1 = i * width, (i + 1) * width
            b0, b1 = j * width, (j + 1) * width
            if a1 + b1 <= 2 * t:
                continue

            def lower(a, b0=b0, b1=b1):
                return min(max(b0, 2 * t - a), b1)

            value, _ = integrate.dblquad(
                lambda b, a: double_mass_pdf(a, b, t, lam), a0, a1, lower,
                lambda a, b1=b1: b1, epsabs=1e-10)
            cells.append((i, j))
            probabilities.append(value)
    return cells, probabilities


def verify_theorem8(cfg):
    """Laws of the masses left by mass-equipped length pruning."""
    if not cfg.t > 0:
        raise DomainError('mass laws need t > 0')
    report = Report('theorem8', cfg.to_dict())
    records = _map_replicates(cfg, _masses_replicate, cfg.n)
    report.censored = sum(1 for rec in records if rec is None)
    survivors = [rec for rec in records if rec]
    if len(survivors) < MIN_SAMPLES:
        raise InsufficientSamplesError(
            'only %d trees survived pruning at %r' % (len(survivors), cfg.t))
    lam, t = cfg.lam, cfg.t
    p = float(survival_prob('length', lam, t))
    reference = 'masses of the mass-equipped pruned GW tree'

    singles = [m for rec in survivors for m in rec[0]]
    doubles = [m for rec in survivors for m in rec[1]]
    counts = [k for rec in survivors for k in rec[2]]
    interior = [m for rec in survivors for m in rec[3]]

    leaves = len(singles) + len(doubles)
    report.add(_z_check(cfg, 'single leaf mass fraction', reference,
                        len(singles), leaves,
                        float(single_mass_probability(t, lam))))
    off = sum(1 for m in singles if abs(m - 2 * t) > cfg.tolerance * 2 * t)
    report.add(_exact_check('single leaf masses equal 2t', reference, off,
                            len(singles)))
    report.add(_z_check(cfg, 'edges without interior masses', reference,
                        sum(1 for k in counts if k == 0), len(counts), p))
    report.add(_count_law_check(
        cfg, 'interior mass count law', reference, counts,
        lambda k: p * (1.0 - p) ** k, 0))
    report.add(_ks_check(
        cfg, 'interior mass size law', reference, [m[0] for m in interior],
        lambda a: interior_mass_cdf(a, t, lam)))
    report.add(_ks_check(cfg, 'interior mass positions uniform', reference,
                         [m[1] for m in interior], 'uniform'))
    report.add(_fair_coin_check(
        cfg, 'interior mass orientation fair', reference,
        sum(1 for m in interior if m[2] == 'L'), len(interior)))

    cells, probabilities = _double_mass_probabilities(t, lam,
                                                      DOUBLE_MASS_BINS)
    width = 2.0 * t / DOUBLE_MASS_BINS
    index = {cell: k for k, cell in enumerate(cells)}
    observed = np.zeros(len(cells))
    for a, b in doubles:
        i = min(int(a / width), DOUBLE_MASS_BINS - 1)
        j = min(int(b / width), DOUBLE_MASS_BINS - 1)
        observed[index[(i, j)]] += 1
    report.add(_chisquare(cfg, 'double leaf mass joint law', reference,
                          observed, probabilities))
    return report


# Random sink.

def _sink_replicate(cfg, r):
    state = sample_random_sink(cfg.params(r), cfg.t)
    return state.growing, state.mass


def _window_replicate(cfg, r):
    state = sample_sink_window(cfg.params(r), cfg.t)
    return state.growing, state.mass


def verify_random_sink(cfg):
    """Growth probability and mass law of a typical sink."""
    if not cfg.t > 0:
        raise DomainError('the random sink needs t > 0')
    report = Report('sink', cfg.to_dict())
    lam, t = cfg.lam, cfg.t
    xi = float(growth_probability(t, lam))
    reference = 'random sink growth and mass law'
    records = _map_replicates(cfg, _sink_replicate, cfg.n)
    growing = sum(1 for g, _ in records if g)
    report.add(_z_check(cfg, 'growing frequency', reference, growing,
                        cfg.n, xi))
    slack = cfg.tolerance * 2 * t
    atoms = sum(1 for _, m in records if abs(m - 2 * t) <= slack)
    report.add(_z_check(cfg, 'atom at 2t', reference, atoms, cfg.n, xi))
    bad = sum(1 for g, m in records
              if m > 2 * t + slack or (abs(m - 2 * t) <= slack) != g)
    report.add(_exact_check('mass at most 2t, equal iff growing', reference,
                            bad, cfg.n))
    moving = [m for g, m in records if not g]
    cdf = _tabulated_cdf(lambda a: sink_mass_pdf(a, t, lam)[0], 0.0, 2 * t)
    report.add(_ks_check(cfg, 'continuous mass law', reference, moving,
                         cdf))

    count = min(cfg.window_samples, cfg.n)
    window = _map_replicates(cfg, _window_replicate, count, first=cfg.n)
    report.add(_z_check(cfg, 'window growing frequency', reference,
                        sum(1 for g, _ in window if g), count, xi))
    window_moving = [m for g, m in window if not g]
    if min(len(moving), len(window_moving)) < MIN_SAMPLES:
        report.add(_skipped('window mass law agrees', reference,
                            len(window_moving), 'too few moving sinks'))
    else:
        result = stats.ks_2samp(moving, window_moving)
        report.add(CheckResult(
            'window mass law agrees', reference, 'ks', result.statistic,
            result.pvalue, result.pvalue >= cfg.alpha, len(window_moving)))
    return report


# Annihilation through pruning against the simulator.

def _equivalence_replicate(cfg, r):
    try:
        tree = sample_gw(cfg.params(r))
    except TreeSizeError:
        return None
    tol = cfg.tolerance
    problems = []
    try:
        psi0 = Potential.from_excursion(harris_path(tree))
        sim = SinkSimulation(psi0).run()
        for k in range(cfg.grid):
            t = psi0.t_max * k / (cfg.grid - 1)
            for issue in compare_evolved(evolve(psi0, t), sim.snapshot(t),
                                         tol):
                problems.append('t=%r: %s' % (t, issue))
        st = shock_tree(psi0)
        isometric = trees_close(vertical_tree(st), tree, tol)
        merged, ids = sim.merge_tree()
        timing = sim.rest_and_travel()
        scale = max(1.0, psi0.t_max)
        logged = trees_close(merged, st.base, tol) and all(
            abs(timing[s][0] - st.v[node]) <= tol * scale and
            abs(timing[s][1] - st.h[node]) <= tol * scale
            for node, s in enumerate(ids))
        final = sim.snapshot(psi0.t_max)
        conserved = abs(final.total_mass - (psi0.b - psi0.a)) <= \
            tol * max(1.0, psi0.b - psi0.a)
    except PruneTreeError as e:
        return (['%s: %s' % (type(e).__name__, e)], False, False, False,
                num_leaves(tree))
    return problems, isometric, logged, conserved, num_leaves(tree)


def verify_annihilation_equivalence(cfg):
    """Evolution through pruning agrees with the sink simulator."""
    report = Report('equivalence', cfg.to_dict())
    records = _map_replicates(cfg, _equivalence_replicate, cfg.n)
    report.censored = sum(1 for rec in records if rec is None)
    done = [(r, rec) for r, rec in enumerate(records) if rec is not None]
    reference = 'annihilation is mass-equipped pruning'

    def first(failing):
        return 'first failure at stream %d of seed %d' % (failing[0],
                                                          cfg.seed) \
            if failing else ''

    mismatched = [r for r, rec in done if rec[0]]
    note = first(mismatched)
    if mismatched:
        note += ': ' + records[mismatched[0]][0][0]
    report.add(_exact_check('evolve matches simulation', reference,
                            len(mismatched), len(done), note))
    for name, slot in (('shock tree isometry', 1),
                       ('merge log matches shock tree', 2),
                       ('mass conserved at t_max', 3)):
        failing = [r for r, rec in done if not rec[slot]]
        report.add(_exact_check(name, reference, len(failing), len(done),
                                first(failing)))
    report.add(_count_law_check(cfg, 'shock tree leaf count law', reference,
                                [rec[4] for _, rec in done], leaf_count_pmf,
                                1, top=report.censored))
    return report


SUITES = ('invariance', 'theorem8', 'sink', 'equivalence', 'all')


def run_suites(names, cfg):
    """Run the named suites; ``all`` expands to every suite and the
    invariance suite runs once per functional in ``cfg.phi_kinds``."""
    if isinstance(names, str):
        names = [names]
    if 'all' in names:
        names = SUITES[:-1]
    reports = []
    for name in names:
        if name == 'invariance':
            reports.extend(verify_invariance(cfg, kind)
                           for kind in cfg.phi_kinds)
        elif name == 'theorem8':
            reports.append(verify_theorem8(cfg))
        elif name == 'sink':
            reports.append(verify_random_sink(cfg))
        elif name == 'equivalence':
            reports.append(verify_annihilation_equivalence(cfg))
        else:
            raise DomainError('unknown suite %r' % name)
    if len(reports) == 1:
        return reports[0]
    return Report.combine('+'.join(names), cfg.to_dict(), reports)


def with_overrides(cfg, **changes):
    return replace(cfg, **{k: v for k, v in changes.items()
                           if v is not None})
