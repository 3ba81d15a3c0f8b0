"""Modified Bessel functions of the first kind, orders 0 and 1.

The closed forms of the GW model always combine ``I_nu(z)`` with
``exp(-z)``, so the scaled function ``bessel_ie(nu, z) = exp(-z) I_nu(z)``
is the primary evaluator. It uses the power series up to ``z = 20`` and
the large-argument expansion above, where the exponential factor is
cancelled analytically.

Both functions accept scalars or numpy arrays.
"""

import math

import numpy as np

from prunetree.exceptions import DomainError


__all__ = ('bessel_i', 'bessel_ie', 'SERIES_LIMIT')


SERIES_LIMIT = 20.0
_MAX_TERMS = 200
_EPS = 1e-17


def _check(nu, z):
    if nu not in (0, 1):
        raise DomainError('only orders 0 and 1 are supported, got %r' % nu)
    z = np.asarray(z, dtype=float)
    if np.any(np.isnan(z)) or np.any(z < 0):
        raise DomainError('Bessel argument must be non-negative')
    return z


def _series(nu, z):
    """Sum of (z/2)^(2k+nu) / (k! (k+nu)!)."""
    half = z / 2.0
    quarter = half * half
    term = half ** nu
    total = np.array(term, dtype=float, copy=True)
    for k in range(1, _MAX_TERMS):
        term = term * quarter / (k * (k + nu))
        total += term
        if np.all(term <= _EPS * total):
            break
    return total


def _asymptotic(nu, z):
    """exp(-z) I_nu(z) from the expansion in powers of 1/z; each element
    stops at its smallest term."""
    mu = 4.0 * nu * nu
    term = np.ones_like(z)
    total = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, _MAX_TERMS):
        step = term * ((2 * k - 1) ** 2 - mu) / (8.0 * k * z)
        active &= np.abs(step) < np.abs(term)
        if not active.any():
            break
        term = np.where(active, step, term)
        total = np.where(active, total + step, total)
        active &= np.abs(step) > _EPS * np.abs(total)
    return total / np.sqrt(2.0 * math.pi * z)


def _evaluate(nu, z, scaled):
    z = _check(nu, z)
    out = np.empty_like(z)
    small = z <= SERIES_LIMIT
    if small.any():
        values = _series(nu, z[small])
        out[small] = values * np.exp(-z[small]) if scaled else values
    if (~small).any():
        values = _asymptotic(nu, z[~small])
        out[~small] = values if scaled else values * np.exp(z[~small])
    if out.ndim == 0:
        return float(out)
    return out


def bessel_ie(nu, z):
    """``exp(-z) * I_nu(z)``."""
    return _evaluate(nu, z, scaled=True)


def bessel_i(nu, z):
    """``I_nu(z)``; overflows to ``inf`` beyond ``z`` of about 700."""
    return _evaluate(nu, z, scaled=False)
