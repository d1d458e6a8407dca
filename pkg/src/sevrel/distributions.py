"""Input random variables for limit state models.

Five families: Normal, Lognormal, Gumbel (largest value), Pareto, and a
finite Mixture of the scalar families. Each is an immutable spec object
exposing analytic moments, quantiles, cdf, and seeded vectorized
sampling. Heavy tails are first-class: moments report infinite variance
(or mean) honestly instead of raising, and downstream code keys off
``MomentReport.variance_finite``.

Sampling conventions, fixed so that streams are reproducible:

* Normal draws come from the generator's own Gaussian method; Lognormal
  exponentiates a Normal draw.
* Gumbel and Pareto invert their quantile functions on one uniform each.
* A Mixture consumes exactly two uniform arrays per batch, in fixed
  order: first the branch selector, then the value fed through the
  selected component's quantile. The consumption pattern never depends
  on which branch was chosen, so chunked runs merge reproducibly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "MomentReport",
    "Normal",
    "Lognormal",
    "Gumbel",
    "Pareto",
    "Mixture",
    "Distribution",
    "lognormal_from_median_cov",
]

_TINY = float(np.finfo(float).tiny)


@dataclass(frozen=True)
class MomentReport:
    """Analytic mean and variance; either may be ``math.inf``."""

    mean: float
    variance: float

    @property
    def variance_finite(self) -> bool:
        return math.isfinite(self.variance)


def _check_probability(p):
    arr = np.asarray(p, dtype=float)
    if arr.size and (np.any(arr <= 0.0) or np.any(arr >= 1.0)):
        raise ValueError("quantile requires probabilities strictly inside (0, 1)")
    return arr


def _match(p, values):
    # scalar in, scalar out; arrays pass through
    if np.ndim(p) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class Normal:
    mean: float
    stddev: float

    def __post_init__(self):
        if not self.stddev > 0.0:
            raise ValueError(f"stddev must be positive, got {self.stddev!r}")

    def moments(self) -> MomentReport:
        return MomentReport(self.mean, self.stddev**2)

    def quantile(self, p):
        q = _check_probability(p)
        return _match(p, self.mean + self.stddev * ndtri(q))

    def cdf(self, x):
        return _match(x, ndtr((np.asarray(x, dtype=float) - self.mean) / self.stddev))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(self.mean, self.stddev, n)


@dataclass(frozen=True)
class Lognormal:
    """Lognormal given the mean and stddev of the underlying normal."""

    log_mean: float
    log_std: float

    def __post_init__(self):
        if not self.log_std > 0.0:
            raise ValueError(f"log_std must be positive, got {self.log_std!r}")

    def moments(self) -> MomentReport:
        m, s2 = self.log_mean, self.log_std**2
        return MomentReport(math.exp(m + 0.5 * s2), math.expm1(s2) * math.exp(2.0 * m + s2))

    def quantile(self, p):
        q = _check_probability(p)
        return _match(p, np.exp(self.log_mean + self.log_std * ndtri(q)))

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(arr, where=arr > 0.0, out=np.full(arr.shape, -np.inf)) - self.log_mean) / self.log_std
        return _match(x, np.where(arr > 0.0, ndtr(z), 0.0))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.exp(rng.normal(self.log_mean, self.log_std, n))


def lognormal_from_median_cov(median: float, cov: float) -> Lognormal:
    """Lognormal from its median and coefficient of variation.

    ``log_mean = ln(median)`` and ``log_std = sqrt(ln(1 + cov**2))``, the
    usual resistance-model parameterization.
    """
    if not median > 0.0:
        raise ValueError(f"median must be positive, got {median!r}")
    if not cov > 0.0:
        raise ValueError(f"cov must be positive, got {cov!r}")
    return Lognormal(math.log(median), math.sqrt(math.log1p(cov * cov)))


@dataclass(frozen=True)
class Gumbel:
    """Largest-value (maximum domain) Gumbel, the loads convention."""

    location: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale!r}")

    def moments(self) -> MomentReport:
        return MomentReport(
            self.location + np.euler_gamma * self.scale,
            (math.pi**2 / 6.0) * self.scale**2,
        )

    def quantile(self, p):
        q = _check_probability(p)
        return _match(p, self.location - self.scale * np.log(-np.log(q)))

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return _match(x, np.exp(-np.exp(-z)))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = np.maximum(rng.random(n), _TINY)
        return self.location - self.scale * np.log(-np.log(u))


@dataclass(frozen=True)
class Pareto:
    """Type I Pareto on [x_min, inf) with tail exponent alpha.

    Mean is infinite for alpha <= 1, variance infinite for alpha <= 2;
    moments() reports that rather than raising.
    """

    x_min: float
    alpha: float

    def __post_init__(self):
        if not self.x_min > 0.0:
            raise ValueError(f"x_min must be positive, got {self.x_min!r}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    def moments(self) -> MomentReport:
        a, xm = self.alpha, self.x_min
        mean = a * xm / (a - 1.0) if a > 1.0 else math.inf
        if a > 2.0:
            variance = xm * xm * a / ((a - 1.0) ** 2 * (a - 2.0))
        else:
            variance = math.inf
        return MomentReport(mean, variance)

    def quantile(self, p):
        q = _check_probability(p)
        return _match(p, self.x_min * np.power(1.0 - q, -1.0 / self.alpha))

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        ratio = np.where(arr >= self.x_min, self.x_min / np.maximum(arr, self.x_min), 1.0)
        return _match(x, 1.0 - np.power(ratio, self.alpha))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = np.maximum(rng.random(n), _TINY)
        return self.x_min * np.power(u, -1.0 / self.alpha)


@dataclass(frozen=True)
class Mixture:
    """Finite mixture of scalar families (no nesting).

    ``components`` is a tuple of (weight, distribution) pairs; weights
    must be positive and sum to 1 within 1e-12.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), d) for w, d in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        for w, d in comps:
            if not w > 0.0:
                raise ValueError(f"mixture weights must be positive, got {w!r}")
            if isinstance(d, Mixture):
                raise ValueError("nested mixtures are not supported")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {total!r}")

    def moments(self) -> MomentReport:
        means = [d.moments().mean for _, d in self.components]
        variances = [d.moments().variance for _, d in self.components]
        if any(not math.isfinite(m) for m in means):
            return MomentReport(math.inf, math.inf)
        mean = math.fsum(w * m for (w, _), m in zip(self.components, means))
        if any(not math.isfinite(v) for v in variances):
            return MomentReport(mean, math.inf)
        second = math.fsum(
            w * (v + m * m)
            for (w, _), m, v in zip(self.components, means, variances)
        )
        return MomentReport(mean, second - mean * mean)

    def quantile(self, p):
        raise NotImplementedError("mixture quantiles are not supported; sample instead")

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        acc = np.zeros(arr.shape)
        for w, d in self.components:
            acc = acc + w * np.asarray(d.cdf(arr))
        return _match(x, acc)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # Two stream consumptions per batch, fixed order: branch then value.
        u_branch = rng.random(n)
        u_value = np.maximum(rng.random(n), _TINY)
        cuts = np.cumsum([w for w, _ in self.components])[:-1]
        idx = np.searchsorted(cuts, u_branch, side="right")
        out = np.empty(n)
        for k, (_, d) in enumerate(self.components):
            sel = idx == k
            if sel.any():
                out[sel] = d.quantile(u_value[sel])
        return out


Distribution = Normal | Lognormal | Gumbel | Pareto | Mixture
