"""Default values of the ``PRUNETREE_*`` settings.

Define any of these in your Django ``settings`` module to change them;
the values here are only used when the setting is missing. The seed can
also be given through the ``PRUNETREE_SEED`` environment variable, which
wins over the default but not over an explicit setting.
"""

#: Master seed of all random streams. Replicate ``i`` of a Monte Carlo
#: run always uses stream ``i`` of this seed, whatever the worker count.
PRUNETREE_SEED = 1

#: Largest number of vertices a sampled Galton-Watson tree may reach
#: before sampling gives up with a ``TreeSizeError``.
PRUNETREE_NODE_CAP = 10 ** 7

#: Node cap used by the Monte Carlo harness. Replicates that hit it are
#: counted as censored.
PRUNETREE_MC_NODE_CAP = 10 ** 5

#: Number of worker processes for Monte Carlo runs.
PRUNETREE_WORKERS = 1

#: Significance level of the goodness-of-fit tests.
PRUNETREE_ALPHA = 0.01

#: Width, in standard errors, of the acceptance band of probability
#: estimates.
PRUNETREE_SIGMA_BAND = 3.0

#: Absolute tolerance of the deterministic comparisons.
PRUNETREE_TOLERANCE = 1e-9


DEFAULTS = {
    'seed': PRUNETREE_SEED,
    'node_cap': PRUNETREE_NODE_CAP,
    'mc_node_cap': PRUNETREE_MC_NODE_CAP,
    'workers': PRUNETREE_WORKERS,
    'alpha': PRUNETREE_ALPHA,
    'sigma_band': PRUNETREE_SIGMA_BAND,
    'tolerance': PRUNETREE_TOLERANCE,
}
