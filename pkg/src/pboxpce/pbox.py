"""Probability-boxes: construction, querying, discretization, condensation.

A p-box is a pair of CDFs bounding an unknown distribution.  ``lower`` is
the lower probability bound (rightmost curve) and ``upper`` the upper
probability bound (leftmost curve), so ``lower(x) <= upper(x)`` everywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cdfs import CDF, AverageCDF, EnvelopeCDF, ParametricCDF, SteppedCDF
from .errors import (
    EmptyInput,
    InvalidCdfParameter,
    UnboundedPBox,
    UnsupportedFamily,
    WeightSumViolation,
)

PBOX_CHECK_GRID = 1024


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidCdfParameter(f"interval requires lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class ExpertInterval:
    lo: float
    hi: float
    weight: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidCdfParameter("expert interval requires lo <= hi")
        if not 0.0 < self.weight <= 1.0:
            raise InvalidCdfParameter("expert weight must lie in (0, 1]")


class PBox:
    """Pair of bounding CDFs, optionally with a declared support.

    ``meta`` carries construction provenance (expert intervals, parametric
    family info) used by propagation shortcuts; it does not affect queries.
    """

    def __init__(self, lower, upper, support_hint=None, meta=None):
        self.lower = lower
        self.upper = upper
        self.support_hint = tuple(support_hint) if support_hint is not None else None
        self.meta = dict(meta) if meta else {}
        self._check_ordering()

    def _check_ordering(self):
        lo0, hi0 = self.lower.support()
        lo1, hi1 = self.upper.support()
        a, b = min(lo0, lo1), max(hi0, hi1)
        if b <= a:
            b = a + 1.0
        grid = np.linspace(a, b, PBOX_CHECK_GRID)
        fl = np.asarray(self.lower.evaluate(grid))
        fu = np.asarray(self.upper.evaluate(grid))
        if np.any(fl > fu + 1e-9):
            raise InvalidCdfParameter("p-box bound ordering violated: lower(x) > upper(x)")

    @property
    def degenerate(self):
        return self.lower is self.upper

    def inverse_lower(self, c):
        """Smallest consistent quantile x_lo(c) = upper^{-1}(c)."""
        out = self.upper.inverse(c)
        return self._clip_hint(out)

    def inverse_upper(self, c):
        """Largest consistent quantile x_hi(c) = lower^{-1}(c)."""
        out = self.lower.inverse(c)
        return self._clip_hint(out)

    def _clip_hint(self, x):
        if self.support_hint is None:
            return x
        lo, hi = self.support_hint
        out = np.clip(x, lo, hi)
        if np.ndim(x) == 0:
            return float(out)
        return out

    def support(self):
        return float(self.inverse_lower(0.0)), float(self.inverse_upper(1.0))


def mixture_aggregate(opinions):
    """Aggregate weighted expert intervals into a stepped p-box.

    The step CDF of the interval lower endpoints is the leftmost curve and
    becomes the ``upper`` (plausibility) bound; the CDF of the upper
    endpoints becomes the ``lower`` (belief) bound.
    """
    if not opinions:
        raise EmptyInput("no expert opinions given")
    ops = [o if isinstance(o, ExpertInterval) else ExpertInterval(*o) for o in opinions]
    weights = np.array([o.weight for o in ops])
    if abs(weights.sum() - 1.0) > 1e-12:
        raise WeightSumViolation(f"weights sum to {weights.sum()!r}, expected 1")
    los = np.array([o.lo for o in ops])
    his = np.array([o.hi for o in ops])
    upper = SteppedCDF.from_samples(los, weights)
    lower = SteppedCDF.from_samples(his, weights)
    return PBox(
        lower,
        upper,
        support_hint=(float(los.min()), float(his.max())),
        meta={"construction": "mixture", "expert_intervals": [(o.lo, o.hi, o.weight) for o in ops]},
    )


def envelope_aggregate(cdfs):
    """P-box as the pointwise envelope of a set of expert CDFs."""
    if not cdfs:
        raise EmptyInput("no CDFs given")
    if len(cdfs) == 1:
        only = cdfs[0]
        return PBox(only, only, meta={"construction": "envelope"})
    lower = EnvelopeCDF(cdfs, "min")
    upper = EnvelopeCDF(cdfs, "max")
    return PBox(lower, upper, meta={"construction": "envelope"})


# Parameter grids per family for the envelope over interval-valued parameters.
# Gaussian/uniform CDFs are monotone in each parameter for fixed x, so the
# corner set is exact.  The moment-parametrized families get a grid refinement
# because the (mean, cov) -> shape map is not coordinate-monotone everywhere.
_FAMILY_PARAM_NAMES = {
    "gaussian": ("mu", "sigma"),
    "lognormal": ("mean", "cov"),
    "gumbel": ("mean", "cov"),
    "uniform": ("lower", "upper"),
}
_GRID_REFINED_FAMILIES = ("lognormal", "gumbel")
_PARAM_GRID_POINTS = 9


def _member_cdf(family, values):
    if family == "gaussian":
        return ParametricCDF.gaussian(*values)
    if family == "lognormal":
        return ParametricCDF.lognormal_meancov(*values)
    if family == "gumbel":
        return ParametricCDF.gumbel_meancov(*values)
    if family == "uniform":
        return ParametricCDF.uniform(*values)
    raise UnsupportedFamily(family)


def parametric_envelope_members(family, param_intervals, grid_points=None):
    """Member CDFs whose envelope realizes the interval-parameter p-box."""
    family = family.lower()
    if family not in _FAMILY_PARAM_NAMES:
        raise UnsupportedFamily(family)
    intervals = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in param_intervals]
    if len(intervals) != len(_FAMILY_PARAM_NAMES[family]):
        raise InvalidCdfParameter(
            f"{family} expects {len(_FAMILY_PARAM_NAMES[family])} parameter intervals"
        )
    axes = []
    if grid_points is None:
        grid_points = _PARAM_GRID_POINTS if family in _GRID_REFINED_FAMILIES else 2
    for iv in intervals:
        if iv.width == 0.0:
            axes.append([iv.lo])
        else:
            axes.append(list(np.linspace(iv.lo, iv.hi, max(grid_points, 2))))
    return [_member_cdf(family, combo) for combo in itertools.product(*axes)]


def parametric_envelope(family, param_intervals):
    """P-box from a distribution family with interval-valued parameters."""
    members = parametric_envelope_members(family, param_intervals)
    intervals = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in param_intervals]
    meta = {
        "construction": "parametric_envelope",
        "family": family.lower(),
        "param_intervals": [(iv.lo, iv.hi) for iv in intervals],
    }
    if len(members) == 1:
        only = members[0]
        return PBox(only, only, meta=meta)
    return PBox(EnvelopeCDF(members, "min"), EnvelopeCDF(members, "max"), meta=meta)


def inverse_lower(pbox, c):
    return pbox.inverse_lower(c)


def inverse_upper(pbox, c):
    return pbox.inverse_upper(c)


def discretize_outer(pbox, n):
    """Outer discretization into ``n`` equal-mass conservative intervals."""
    if n < 1:
        raise EmptyInput("n must be >= 1")
    edges = np.linspace(0.0, 1.0, n + 1)
    los = np.atleast_1d(pbox.inverse_lower(edges[:-1]))
    his = np.atleast_1d(pbox.inverse_upper(edges[1:]))
    mass = 1.0 / n
    return [(Interval(float(lo), float(hi)), mass) for lo, hi in zip(los, his)]


def condense_uniform(pbox):
    """Uniform auxiliary distribution over the full p-box support."""
    lo, hi = pbox.support()
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise UnboundedPBox("cannot condense an unbounded p-box to a uniform")
    if hi <= lo:
        # degenerate support collapses to a point; widen marginally
        hi = lo + max(1e-12, abs(lo) * 1e-12)
    return ParametricCDF.uniform(lo, hi)


def condense_average(pbox):
    """Auxiliary CDF as the average of the two bound curves."""
    if pbox.degenerate:
        return pbox.lower
    return AverageCDF(pbox.lower, pbox.upper)


def pbox_from_dict(spec):
    """Parse the JSON p-box description used by CLI configs."""
    from .cdfs import cdf_from_dict

    kind = spec.get("kind")
    if kind == "mixture":
        return mixture_aggregate([ExpertInterval(*iv) for iv in spec["intervals"]])
    if kind == "envelope":
        return envelope_aggregate([cdf_from_dict(c) for c in spec["cdfs"]])
    if kind == "parametric_envelope":
        family = spec["family"].lower()
        names = _FAMILY_PARAM_NAMES.get(family)
        if names is None:
            raise UnsupportedFamily(family)
        intervals = [Interval(*spec[name]) for name in names]
        return parametric_envelope(family, intervals)
    if kind == "precise":
        cdf = cdf_from_dict({**{k: v for k, v in spec.items() if k != "kind"},
                             "kind": "parametric"})
        return PBox(cdf, cdf, meta={"construction": "precise"})
    raise UnsupportedFamily(f"unknown p-box kind: {kind!r}")
