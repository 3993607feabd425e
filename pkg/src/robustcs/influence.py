"""Bounded logarithmic influence functions.

``phi`` is Catoni's narrowest influence function; ``phi_p`` replaces the
quadratic term by ``|x|**p / p`` for data with only a bounded p-th central
moment, 1 < p <= 2. Both saturate at ``+/- log p`` once ``|x| >= 1``.
"""
import math

import numpy as np


def check_order(p):
    """Validate a moment order and return it as a float."""
    p = float(p)
    if not (1.0 < p <= 2.0):
        raise ValueError(f"moment order p must lie in (1, 2], got {p!r}")
    return p


def _as_finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("influence function requires finite input")
    return x


def _inner(a, p):
    # 1 - a + a**p / p on 0 <= a <= 1; stays in [1/p, 1]
    if p == 2.0:
        return 1.0 - a + 0.5 * a * a
    return 1.0 - a + a ** p / p


def phi_p(x, p=2.0):
    """Influence function for bounded p-th central moment.

    Parameters
    ----------
    x : float or array_like
        Finite argument(s).
    p : float
        Moment order in (1, 2].

    Returns
    -------
    float or ndarray
        ``log p`` for ``x >= 1``, ``-log(1 - x + x**p/p)`` on ``[0, 1)``,
        the mirror image for negative ``x``.
    """
    p = check_order(p)
    x = _as_finite(x)
    a = np.abs(x)
    saturated = a >= 1.0
    ac = np.where(saturated, 0.0, a)
    val = np.where(saturated, math.log(p), -np.log(_inner(ac, p)))
    out = np.sign(x) * val
    return float(out) if out.ndim == 0 else out


def phi(x):
    """Catoni's narrowest influence function, i.e. ``phi_p(x, 2)``."""
    return phi_p(x, 2.0)


def exp_phi_p(x, p=2.0):
    """``exp(phi_p(x, p))`` from the closed-form branches.

    Values lie in ``[1/p, p]``. Avoids the exp/log round trip so that
    expectations built from it are exact up to one rounding per term.
    """
    p = check_order(p)
    x = _as_finite(x)
    a = np.abs(x)
    saturated = a >= 1.0
    ac = np.where(saturated, 0.0, a)
    inner = _inner(ac, p)
    pos = np.where(saturated, p, 1.0 / inner)
    neg = np.where(saturated, 1.0 / p, inner)
    out = np.where(x >= 0, pos, neg)
    return float(out) if out.ndim == 0 else out


def catoni_lower(x, p=2.0):
    """Lower sandwich bound ``-log(1 - x + |x|**p / p)``."""
    x = np.asarray(x, dtype=float)
    return -np.log(1.0 - x + np.abs(x) ** p / p)


def catoni_upper(x, p=2.0):
    """Upper sandwich bound ``log(1 + x + |x|**p / p)``."""
    x = np.asarray(x, dtype=float)
    return np.log(1.0 + x + np.abs(x) ** p / p)
