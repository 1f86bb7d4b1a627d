"""Cumulative distribution function representations.

Two concrete families are provided: weighted step functions (``SteppedCDF``)
and classical parametric families (``ParametricCDF``).  ``EnvelopeCDF`` and
``AverageCDF`` combine existing CDFs pointwise and are used to realize p-box
bounds and condensed auxiliary distributions.

Conventions:
  * ``evaluate`` is right-continuous and maps into [0, 1],
  * ``inverse`` is the generalized inverse ``inf{x : F(x) >= c}``
    (left-continuous convention, so step functions invert deterministically),
  * unbounded families clamp ``inverse(0)`` / ``inverse(1)`` to configurable
    truncation quantiles (1% / 99% by default) so that every CDF yields a
    finite working support.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .errors import InvalidCdfParameter, UnsupportedFamily

# Default quantile levels used to truncate unbounded supports.
TRUNC_LO = 0.01
TRUNC_HI = 0.99

# Euler-Mascheroni constant, for the Gumbel moment relations.
_EULER_GAMMA = 0.5772156649015329


def lognormal_params_from_mean_cov(mean, cov):
    """Convert (mean, coefficient of variation) to log-scale (mu, sigma)."""
    if mean <= 0.0 or cov <= 0.0:
        raise InvalidCdfParameter("lognormal requires mean > 0 and cov > 0")
    sigma2 = math.log1p(cov * cov)
    mu = math.log(mean) - 0.5 * sigma2
    return mu, math.sqrt(sigma2)


def gumbel_params_from_mean_cov(mean, cov):
    """Convert (mean, coefficient of variation) to Gumbel (loc, scale)."""
    std = abs(mean) * cov
    if std <= 0.0:
        raise InvalidCdfParameter("gumbel requires mean != 0 and cov > 0")
    scale = std * math.sqrt(6.0) / math.pi
    loc = mean - _EULER_GAMMA * scale
    return loc, scale


class CDF:
    """Abstract CDF interface."""

    def evaluate(self, x):
        raise NotImplementedError

    def inverse(self, c):
        raise NotImplementedError

    def support(self):
        """Finite working support (possibly quantile-truncated)."""
        return float(self.inverse(0.0)), float(self.inverse(1.0))

    def to_dict(self):
        raise NotImplementedError


class ParametricCDF(CDF):
    """CDF from a classical family: gaussian, lognormal, gumbel or uniform.

    Lognormal is stored with log-scale parameters; use
    :meth:`lognormal_meancov` when moments are given instead.
    """

    def __init__(self, family, params, trunc_lo=TRUNC_LO, trunc_hi=TRUNC_HI):
        family = family.lower()
        params = dict(params)
        if family == "gaussian":
            if params["sigma"] <= 0.0:
                raise InvalidCdfParameter("gaussian requires sigma > 0")
            dist = stats.norm(params["mu"], params["sigma"])
        elif family == "lognormal":
            if params["sigma_log"] <= 0.0:
                raise InvalidCdfParameter("lognormal requires sigma_log > 0")
            dist = stats.lognorm(params["sigma_log"], scale=math.exp(params["mu_log"]))
        elif family == "gumbel":
            if params["scale"] <= 0.0:
                raise InvalidCdfParameter("gumbel requires scale > 0")
            dist = stats.gumbel_r(params["loc"], params["scale"])
        elif family == "uniform":
            if not params["lower"] < params["upper"]:
                raise InvalidCdfParameter("uniform requires lower < upper")
            dist = stats.uniform(params["lower"], params["upper"] - params["lower"])
        else:
            raise UnsupportedFamily(family)
        self.family = family
        self.params = params
        self.trunc_lo = trunc_lo
        self.trunc_hi = trunc_hi
        self._dist = dist

    # -- constructors -----------------------------------------------------
    @classmethod
    def gaussian(cls, mu, sigma, **kw):
        return cls("gaussian", {"mu": mu, "sigma": sigma}, **kw)

    @classmethod
    def lognormal(cls, mu_log, sigma_log, **kw):
        return cls("lognormal", {"mu_log": mu_log, "sigma_log": sigma_log}, **kw)

    @classmethod
    def lognormal_meancov(cls, mean, cov, **kw):
        mu, sig = lognormal_params_from_mean_cov(mean, cov)
        return cls.lognormal(mu, sig, **kw)

    @classmethod
    def gumbel(cls, loc, scale, **kw):
        return cls("gumbel", {"loc": loc, "scale": scale}, **kw)

    @classmethod
    def gumbel_meancov(cls, mean, cov, **kw):
        loc, scale = gumbel_params_from_mean_cov(mean, cov)
        return cls.gumbel(loc, scale, **kw)

    @classmethod
    def uniform(cls, lower, upper, **kw):
        return cls("uniform", {"lower": lower, "upper": upper}, **kw)

    # -- CDF interface ----------------------------------------------------
    def evaluate(self, x):
        return self._dist.cdf(x)

    def inverse(self, c):
        c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
        out = self._dist.ppf(c)
        # non-uniform families are truncated at the 1%/99% quantile levels so
        # that inverse(0)/inverse(1) always yield a finite working support
        if self.family != "uniform":
            out = np.where(c <= 0.0, self._dist.ppf(self.trunc_lo), out)
            out = np.where(c >= 1.0, self._dist.ppf(self.trunc_hi), out)
        if np.ndim(c) == 0:
            return float(out)
        return out

    def mean(self):
        return float(self._dist.mean())

    def to_dict(self):
        return {"kind": "parametric", "family": self.family, "params": dict(self.params)}

    def __repr__(self):
        return f"ParametricCDF({self.family}, {self.params})"


class SteppedCDF(CDF):
    """Weighted empirical (step-function) CDF.

    Stored in canonical form: strictly increasing abscissae with duplicate
    values merged (masses summed) and final cumulative equal to 1.
    """

    def __init__(self, xs, cum):
        xs = np.asarray(xs, dtype=float)
        cum = np.asarray(cum, dtype=float)
        if xs.size == 0:
            raise InvalidCdfParameter("stepped CDF needs at least one step")
        if np.any(np.diff(xs) <= 0):
            raise InvalidCdfParameter("stepped CDF abscissae must be strictly increasing")
        if np.any(np.diff(cum) < -1e-12) or abs(cum[-1] - 1.0) > 1e-12:
            raise InvalidCdfParameter("cumulative values must be non-decreasing and end at 1")
        self.xs = xs
        self.cum = cum
        self.cum[-1] = 1.0

    @classmethod
    def from_samples(cls, values, weights=None):
        """Build a weighted empirical CDF, merging duplicate abscissae."""
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise InvalidCdfParameter("empty sample set")
        if weights is None:
            weights = np.full(values.size, 1.0 / values.size)
        else:
            weights = np.asarray(weights, dtype=float)
            total = weights.sum()
            if abs(total - 1.0) > 1e-9:
                weights = weights / total
        order = np.argsort(values, kind="stable")
        xs = values[order]
        w = weights[order]
        uniq, start = np.unique(xs, return_index=True)
        mass = np.add.reduceat(w, start)
        cum = np.cumsum(mass)
        cum[-1] = 1.0
        return cls(uniq, cum)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.xs, x, side="right")
        padded = np.concatenate(([0.0], self.cum))
        out = padded[idx]
        if x.ndim == 0:
            return float(out)
        return out

    def inverse(self, c):
        c = np.asarray(c, dtype=float)
        idx = np.searchsorted(self.cum, np.clip(c, 0.0, 1.0), side="left")
        idx = np.minimum(idx, self.xs.size - 1)
        out = self.xs[idx]
        if c.ndim == 0:
            return float(out)
        return out

    def step_count(self):
        return int(self.xs.size)

    def to_dict(self):
        return {"kind": "stepped", "x": self.xs.tolist(), "cum": self.cum.tolist()}

    def __repr__(self):
        return f"SteppedCDF({self.xs.size} steps on [{self.xs[0]:g}, {self.xs[-1]:g}])"


class EnvelopeCDF(CDF):
    """Pointwise min or max envelope of a family of member CDFs.

    The generalized inverse of a min-envelope is the pointwise max of the
    member inverses (and vice versa), so both directions stay exact.
    """

    def __init__(self, members, mode):
        if not members:
            raise InvalidCdfParameter("envelope needs at least one member")
        if mode not in ("min", "max"):
            raise InvalidCdfParameter("mode must be 'min' or 'max'")
        self.members = list(members)
        self.mode = mode

    def evaluate(self, x):
        vals = np.stack([m.evaluate(x) for m in self.members])
        out = vals.min(axis=0) if self.mode == "min" else vals.max(axis=0)
        if np.ndim(x) == 0:
            return float(out)
        return out

    def inverse(self, c):
        inv = np.stack([np.asarray(m.inverse(c), dtype=float) for m in self.members])
        out = inv.max(axis=0) if self.mode == "min" else inv.min(axis=0)
        if np.ndim(c) == 0:
            return float(out)
        return out

    def to_dict(self):
        return {
            "kind": "envelope",
            "mode": self.mode,
            "members": [m.to_dict() for m in self.members],
        }


class AverageCDF(CDF):
    """Mid curve (F_lower + F_upper) / 2 of two bounding CDFs."""

    def __init__(self, lower, upper):
        self.lower = lower
        self.upper = upper

    def evaluate(self, x):
        out = 0.5 * (np.asarray(self.lower.evaluate(x)) + np.asarray(self.upper.evaluate(x)))
        if np.ndim(x) == 0:
            return float(out)
        return out

    def inverse(self, c):
        c_arr = np.atleast_1d(np.asarray(c, dtype=float))
        lo = np.minimum(np.atleast_1d(self.lower.inverse(c_arr)),
                        np.atleast_1d(self.upper.inverse(c_arr)))
        hi = np.maximum(np.atleast_1d(self.lower.inverse(c_arr)),
                        np.atleast_1d(self.upper.inverse(c_arr)))
        # bisection for inf{x : F(x) >= c}; F is monotone so this converges
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            ge = self.evaluate(mid) >= c_arr
            hi = np.where(ge, mid, hi)
            lo = np.where(ge, lo, mid)
        out = hi
        if np.ndim(c) == 0:
            return float(out[0])
        return out

    def to_dict(self):
        return {
            "kind": "average",
            "members": [self.lower.to_dict(), self.upper.to_dict()],
        }


def cdf_from_dict(spec):
    """Rebuild a CDF object from its ``to_dict`` representation.

    Also accepts the user-facing parametric shorthand used in CLI configs,
    e.g. ``{"family": "lognormal", "mean": 2.0, "cov": 0.1}``.
    """
    kind = spec.get("kind", "parametric")
    if kind == "stepped":
        return SteppedCDF(spec["x"], spec["cum"])
    if kind == "envelope":
        return EnvelopeCDF([cdf_from_dict(m) for m in spec["members"]], spec["mode"])
    if kind == "average":
        lo, hi = (cdf_from_dict(m) for m in spec["members"])
        return AverageCDF(lo, hi)
    if kind == "parametric":
        family = spec["family"].lower()
        if "params" in spec:
            return ParametricCDF(family, spec["params"])
        if family == "gaussian":
            return ParametricCDF.gaussian(spec["mu"], spec["sigma"])
        if family == "lognormal":
            if "mean" in spec:
                return ParametricCDF.lognormal_meancov(spec["mean"], spec["cov"])
            return ParametricCDF.lognormal(spec["mu_log"], spec["sigma_log"])
        if family == "gumbel":
            if "mean" in spec:
                return ParametricCDF.gumbel_meancov(spec["mean"], spec["cov"])
            return ParametricCDF.gumbel(spec["loc"], spec["scale"])
        if family == "uniform":
            return ParametricCDF.uniform(spec["lower"], spec["upper"])
        raise UnsupportedFamily(family)
    raise UnsupportedFamily(str(kind))
