"""Scalar tail kernel for the Gaussian failure-deficit map.

Everything in this module refers to the standard normal distribution.
The central object is the deficit map

    D(b) = E[Z - b | Z > b] = pdf(b) / cdf(-b) - b,    b > 0,

the mean overshoot of a standard normal variate above a level b. For a
Gaussian safety margin with reliability index b this is exactly the
normalized expected failure deficit, so inverting D converts an observed
deficit into the index of the Gaussian margin that would produce it.
D is strictly decreasing, with supremum 2/sqrt(2*pi) as b -> 0+ and
limit 0 as b -> inf; deficits at or beyond that supremum have no
Gaussian counterpart and are reported through :class:`OutOfGaussianDomain`.

The module is deliberately scalar: vectorized sampling lives elsewhere,
while root finding and report assembly need well behaved scalars deep in
the tail. The upper tail cdf(-b) is evaluated through erfc, which keeps
full relative precision out to b of roughly 37. At and beyond b = 8 the
overshoot is computed from the Laplace continued fraction

    D(b) = 1 / (b + 2 / (b + 3 / (b + 4 / ...))),

which is immune to underflow and to the cancellation in pdf/cdf - b.
Both branches agree to better than 1e-12 at the switch point.
"""

from __future__ import annotations

import math
from statistics import NormalDist

__all__ = [
    "DEFICIT_ENDPOINT",
    "OutOfGaussianDomain",
    "norm_pdf",
    "norm_cdf",
    "norm_quantile",
    "tail_mean",
    "deficit",
    "deficit_slope",
    "invert_deficit",
]

#: Supremum of the deficit map: lim(b -> 0+) D(b) = 2/sqrt(2*pi).
DEFICIT_ENDPOINT = 2.0 / math.sqrt(2.0 * math.pi)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_2 = math.sqrt(2.0)
_CF_SWITCH = 8.0          # direct ratio below, continued fraction at and above
_INVERT_TOL = 1e-12       # absolute tolerance on the deficit residual
_INVERT_MAX_ITER = 100
_STD_NORMAL = NormalDist()


class OutOfGaussianDomain(ValueError):
    """Requested deficit lies at or beyond 2/sqrt(2*pi).

    No finite Gaussian reliability index produces such a deficit. This is
    a diagnostic condition, not a numerical failure: callers typically map
    it to the extreme severity class instead of aborting.
    """


def norm_pdf(x: float) -> float:
    """Standard normal density at ``x``."""
    x = float(x)
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_cdf(x: float) -> float:
    """Standard normal cumulative probability at ``x``.

    Evaluated as ``0.5 * erfc(-x / sqrt(2))`` so the lower tail keeps full
    relative precision instead of cancelling against 1. The result stays
    strictly positive until x is near -37 and satisfies
    ``norm_cdf(x) + norm_cdf(-x) == 1`` to machine precision.
    """
    return 0.5 * math.erfc(-float(x) / _SQRT_2)


def norm_quantile(p: float) -> float:
    """Inverse of :func:`norm_cdf` on the open interval (0, 1).

    Raises
    ------
    ValueError
        If ``p`` is outside (0, 1). Exact 0 and 1 are rejected: the
        quantile diverges there and a caller that reaches this point with
        a degenerate probability has a bookkeeping bug upstream.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile requires 0 < p < 1, got {p!r}")
    return _STD_NORMAL.inv_cdf(p)


def _deficit_cf(b: float) -> float:
    # Laplace continued fraction for the overshoot, evaluated with the
    # modified Lentz scheme. Converges in under 20 levels for b >= 8.
    tiny = 1e-300
    f = b if b != 0.0 else tiny
    c = f
    d = 0.0
    for k in range(2, 400):
        a = float(k)
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return 1.0 / f


def tail_mean(b: float) -> float:
    """Conditional mean ``E[Z | Z > b]`` of a standard normal variate.

    This is the reciprocal Mills ratio ``pdf(b) / cdf(-b)``. Defined for
    any real ``b``; always strictly greater than ``max(b, 0)``. For large
    positive ``b`` it behaves like ``b + 1/b - 2/b**3``.
    """
    b = float(b)
    if b >= _CF_SWITCH:
        return b + _deficit_cf(b)
    return norm_pdf(b) / norm_cdf(-b)


def deficit(b: float) -> float:
    """Gaussian deficit map: mean overshoot ``E[Z - b | Z > b]`` for b > 0.

    Equals the normalized expected failure deficit of a Gaussian margin
    whose reliability index is ``b``. Strictly decreasing in ``b``, with
    range ``(0, DEFICIT_ENDPOINT)``.

    Raises
    ------
    ValueError
        If ``b <= 0``; the map is only used on the positive axis.
    """
    b = float(b)
    if b <= 0.0:
        raise ValueError(f"deficit map requires b > 0, got {b!r}")
    if b >= _CF_SWITCH:
        # The continued fraction yields the overshoot directly, avoiding
        # the tail_mean(b) - b cancellation entirely.
        return _deficit_cf(b)
    return norm_pdf(b) / norm_cdf(-b) - b


def deficit_slope(b: float) -> float:
    """Derivative of :func:`deficit`, strictly negative on b > 0.

    Uses the identity D'(b) = tail_mean(b) * D(b) - 1, a consequence of
    the truncated normal variance being positive.
    """
    d = deficit(b)
    return (float(b) + d) * d - 1.0


def invert_deficit(y: float) -> float:
    """Index ``b > 0`` with ``deficit(b) == y``, the severity-aware index.

    Solved by a Newton iteration safeguarded inside a shrinking bisection
    bracket, so a wild Newton step can never escape. The returned value
    satisfies ``abs(deficit(b) - y) <= 1e-12``.

    Parameters
    ----------
    y : float
        Target deficit, ``0 < y < DEFICIT_ENDPOINT``.

    Raises
    ------
    ValueError
        If ``y <= 0``.
    OutOfGaussianDomain
        If ``y >= DEFICIT_ENDPOINT``: the deficit is too deep for any
        Gaussian margin. Callers treat this as the extreme diagnostic.
    """
    y = float(y)
    if y <= 0.0:
        raise ValueError(f"deficit must be positive, got {y!r}")
    if y >= DEFICIT_ENDPOINT:
        raise OutOfGaussianDomain(
            f"deficit {y!r} is at or beyond the Gaussian endpoint {DEFICIT_ENDPOINT!r}"
        )

    lo = 0.0                     # deficit(0+) = DEFICIT_ENDPOINT > y, virtual bracket end
    hi = 40.0
    if y < deficit(hi):
        # Root sits beyond 40. deficit(b) < 1/b on this range, so 2/y is
        # a guaranteed upper bracket and 1/y an excellent starting point.
        hi = 2.0 / y
    b = 1.0 / y if y < 0.2 else 0.5 * (1e-8 + 40.0)

    for _ in range(_INVERT_MAX_ITER):
        f = deficit(b) - y
        if abs(f) <= _INVERT_TOL:
            return b
        if f > 0.0:              # deficit too large: b is left of the root
            lo = b
        else:
            hi = b
        step = f / deficit_slope(b)
        nb = b - step
        if not lo < nb < hi:
            nb = 0.5 * (lo + hi)
        b = nb
    raise ArithmeticError(
        f"deficit inversion did not reach {_INVERT_TOL} after {_INVERT_MAX_ITER} iterations"
    )
