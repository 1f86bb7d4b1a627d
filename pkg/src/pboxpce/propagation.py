"""Propagation of input p-boxes to a response p-box.

Three routes are provided:
  * ``slice_propagate``: full-factorial outer discretization (conservative),
  * ``convert_sample_propagate``: sampling-based problem conversion via the
    auxiliary uniform vector on the unit hypercube,
  * ``two_level_propagate``: the surrogate workflow (first-level PCE of the
    model over condensed auxiliary inputs, interval optimization on that
    surrogate, second-level PCEs of the bound maps).

Throughout, a sampled point ``u`` in [0, 1]^M indexes one interval per input
through the generalized inverses of the p-box bounds; the minimum over the
resulting hyperrectangle feeds the *upper* response CDF and the maximum the
*lower* one.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cdfs import CDF, ParametricCDF, SteppedCDF, cdf_from_dict
from .errors import (
    FactorialCapExceeded,
    FirstLevelAccuracyWarning,
    InvalidCdfParameter,
    UnsupportedFamily,
)
from .optimize import (
    OptimizerConfig,
    batch_minmax,
    monotone_corner_bounds,
    probe_directions,
)
from .pbox import PBox, condense_average, condense_uniform, discretize_outer
from .pce import (
    InputTransform,
    err_gen_estimate,
    fit_sparse_lar,
    lhs_sample,
    mc_sample,
)


@dataclass
class ResponsePBox:
    """Weighted empirical bound CDFs of the quantity of interest."""

    lower: SteppedCDF
    upper: SteppedCDF
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.union1d(self.lower.xs, self.upper.xs)
        fl = self.lower.evaluate(grid)
        fu = self.upper.evaluate(grid)
        if np.any(fl > fu + 1e-9):
            raise InvalidCdfParameter("response p-box bound ordering violated")


@dataclass
class PropagationConfig:
    """Knobs for the propagation workflows (counts, seeds, condensation)."""

    n_slices: int = 10
    n1: int = 100
    n2: int = 200
    n_pred: int = 100_000
    n_val: int = 0
    sampler: str = "lhs"
    condensation: object = "auto"
    aux_override: list = None
    second_level_space: str = "auto"
    second_level: str = "auto"
    monotone: bool = None
    p_max: int = 30
    q: float = 0.75
    seed: int = 0
    slice_cap: int = 100_000
    exact_enum_cap: int = 10_000
    first_level_warn: float = 1e-1


def iso_transform(from_cdf, to_cdf, x):
    """Rank-preserving map z = G^{-1}(F(x)) between two distributions."""
    lo, hi = from_cdf.support()
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < lo - 1e-12) or np.any(x_arr > hi + 1e-12):
        warnings.warn(
            "point outside source support; clamping to the support bounds",
            UserWarning,
        )
        x_arr = np.clip(x_arr, lo, hi)
    out = to_cdf.inverse(from_cdf.evaluate(x_arr))
    if np.ndim(x) == 0:
        return float(out)
    return out


def _boxes_from_u(pboxes, u):
    u = np.atleast_2d(np.asarray(u, dtype=float))
    lows = np.empty_like(u)
    highs = np.empty_like(u)
    for i, pb in enumerate(pboxes):
        lows[:, i] = pb.inverse_lower(u[:, i])
        highs[:, i] = pb.inverse_upper(u[:, i])
    return lows, highs


def _weighted_response(ymin, ymax, masses, provenance):
    upper = SteppedCDF.from_samples(ymin, masses)
    lower = SteppedCDF.from_samples(ymax, masses)
    return ResponsePBox(lower, upper, provenance)


def _dim_intervals(pbox, n):
    """Interval/mass pairs for one input: expert intervals when they match
    the requested resolution, outer discretization otherwise."""
    experts = pbox.meta.get("expert_intervals")
    if experts is not None and len(experts) == n:
        return [((lo, hi), w) for lo, hi, w in experts]
    return [((iv.lo, iv.hi), m) for iv, m in discretize_outer(pbox, n)]


def _factorial_boxes(pboxes, n_per_dim, cap):
    per_dim = [_dim_intervals(pb, n) for pb, n in zip(pboxes, n_per_dim)]
    total = int(np.prod([len(d) for d in per_dim]))
    if total > cap:
        raise FactorialCapExceeded(
            f"{total} interval combinations exceed the cap of {cap}"
        )
    lows = np.empty((total, len(pboxes)))
    highs = np.empty((total, len(pboxes)))
    masses = np.empty(total)
    for k, combo in enumerate(itertools.product(*per_dim)):
        masses[k] = np.prod([m for _, m in combo])
        for i, ((lo, hi), _) in enumerate(combo):
            lows[k, i] = lo
            highs[k, i] = hi
    return lows, highs, masses


def slice_propagate(model, pboxes, n, opt_cfg=None, cap=None, seed=0):
    """Full-factorial slicing: discretize, propagate every hyperrectangle,
    merge into weighted empirical bound CDFs."""
    opt_cfg = opt_cfg or OptimizerConfig()
    M = len(pboxes)
    n_per_dim = [n] * M if np.isscalar(n) else list(n)
    lows, highs, masses = _factorial_boxes(pboxes, n_per_dim, cap or 100_000)
    ymin, ymax, nev = batch_minmax(model, lows, highs, opt_cfg, seed=seed)
    prov = {
        "method": "slicing",
        "n_slices": n_per_dim,
        "n_boxes": int(masses.size),
        "optimizer_evals": int(nev),
        "seed": int(seed),
    }
    return _weighted_response(ymin, ymax, masses, prov)


def convert_sample_propagate(
    model, pboxes, n, sampler="mc", opt_cfg=None, seed=0, monotone=False
):
    """Sampling-based problem conversion: one interval problem per sample of
    the auxiliary uniform vector, equal-weight empirical bound CDFs."""
    opt_cfg = opt_cfg or OptimizerConfig()
    M = len(pboxes)
    design = (lhs_sample if sampler == "lhs" else mc_sample)(n, M, seed)
    lows, highs = _boxes_from_u(pboxes, design.points)
    if monotone:
        dirs = probe_directions(model, lows, highs)
        ymin, ymax, nev = monotone_corner_bounds(model, lows, highs, dirs)
        nev += 2 * M
    else:
        ymin, ymax, nev = batch_minmax(model, lows, highs, opt_cfg, seed=seed + 1)
    prov = {
        "method": "conversion",
        "n_samples": int(n),
        "sampler": sampler,
        "optimizer_evals": int(nev),
        "seed": int(seed),
        "monotone": bool(monotone),
    }
    return _weighted_response(ymin, ymax, None, prov)


def reference_propagate(model, pboxes, n=100_000, opt_cfg=None, seed=0, monotone=None):
    """Reference solution: problem conversion with the exact model and a
    large plain Monte Carlo sample, no surrogates."""
    if monotone is None:
        monotone = getattr(model, "fully_monotone", False)
    resp = convert_sample_propagate(
        model, pboxes, n, sampler="mc", opt_cfg=opt_cfg, seed=seed, monotone=monotone
    )
    resp.provenance["method"] = "reference"
    return resp


# --- condensation --------------------------------------------------------

def _family_midrange_aux(pbox):
    family = pbox.meta.get("family")
    ivs = pbox.meta.get("param_intervals")
    if family is None or ivs is None:
        raise UnsupportedFamily("p-box carries no parametric family info")
    mid = [0.5 * (lo + hi) for lo, hi in ivs]
    top = [hi for _, hi in ivs]
    if family == "gaussian":
        return ParametricCDF.gaussian(mid[0], top[1])
    if family == "lognormal":
        return ParametricCDF.lognormal_meancov(mid[0], top[1])
    if family == "gumbel":
        return ParametricCDF.gumbel_meancov(mid[0], top[1])
    if family == "uniform":
        return condense_uniform(pbox)
    raise UnsupportedFamily(family)


def _auto_aux(pbox):
    if pbox.degenerate:
        return pbox.lower
    if pbox.meta.get("construction") == "mixture":
        return condense_uniform(pbox)
    if pbox.meta.get("family") is not None:
        return _family_midrange_aux(pbox)
    return condense_average(pbox)


def resolve_condensation(pboxes, cfg):
    """Auxiliary input CDF per dimension from the condensation config."""
    rules = cfg.condensation
    if isinstance(rules, str):
        rules = [rules] * len(pboxes)
    aux = []
    for i, (pb, rule) in enumerate(zip(pboxes, rules)):
        override = cfg.aux_override[i] if cfg.aux_override else None
        if override is not None:
            aux.append(override if isinstance(override, CDF) else cdf_from_dict(override))
        elif rule == "auto":
            aux.append(_auto_aux(pb))
        elif rule == "uniform":
            aux.append(condense_uniform(pb))
        elif rule == "average":
            aux.append(condense_average(pb))
        elif rule == "family_midrange":
            aux.append(_family_midrange_aux(pb))
        else:
            raise UnsupportedFamily(f"unknown condensation rule {rule!r}")
    return aux


def _aux_family(aux):
    """Basis family matched to one auxiliary marginal: Legendre for bounded
    distributions, Hermite (via the normal-score map) otherwise."""
    if isinstance(aux, ParametricCDF) and aux.family == "uniform":
        return "legendre"
    if isinstance(aux, SteppedCDF):
        return "legendre"
    return "hermite"


def _all_stepped(pboxes):
    return all(
        isinstance(pb.lower, SteppedCDF) and isinstance(pb.upper, SteppedCDF)
        for pb in pboxes
    )


def _enumeration_size(pboxes):
    total = 1
    for pb in pboxes:
        experts = pb.meta.get("expert_intervals")
        total *= len(experts) if experts else pb.lower.step_count()
    return total


# --- two-level workflow --------------------------------------------------

def two_level_propagate(
    model,
    pboxes,
    cfg,
    opt_cfg=None,
    first_level_model=None,
    second_level_validation=None,
):
    """Two-level surrogate propagation.

    Returns ``(ResponsePBox, diagnostics)``.  ``first_level_model`` may be
    supplied to reuse a fitted first-level surrogate; in that case no true
    model evaluations occur.  ``second_level_validation`` is an optional
    ``(u_val, ymin_truth, ymax_truth)`` triple reused across calls when
    studying second-level convergence.
    """
    opt_cfg = opt_cfg or OptimizerConfig()
    M = len(pboxes)
    seeds = np.random.SeedSequence(cfg.seed).generate_state(8)
    aux = resolve_condensation(pboxes, cfg)
    fams1 = tuple(_aux_family(a) for a in aux)
    tf1 = InputTransform(aux, fams1)
    diagnostics = {"seeds": [int(s) for s in seeds], "aux_families": list(fams1)}

    # level 1: surrogate of the model over the condensed auxiliary inputs
    if first_level_model is None:
        design1 = (lhs_sample if cfg.sampler == "lhs" else mc_sample)(
            cfg.n1, M, int(seeds[0])
        )
        x1 = tf1.from_uniform(design1.points)
        count_before = getattr(model, "eval_count", 0)
        y1 = model(x1)
        diagnostics["true_model_evals"] = getattr(model, "eval_count", 0) - count_before
        m1 = fit_sparse_lar(x1, y1, fams1, tf1, p_max=cfg.p_max, q=cfg.q)
    else:
        m1 = first_level_model
        diagnostics["true_model_evals"] = 0
    diagnostics["first_level"] = m1

    if cfg.n_val:
        u_val = mc_sample(cfg.n_val, M, int(seeds[1])).points
        x_val = tf1.from_uniform(u_val)
        y_val = np.asarray(model(x_val), dtype=float)
        err1 = err_gen_estimate(y_val, m1.predict(x_val))
        diagnostics["err_gen_first"] = err1
        diagnostics["validation_evals"] = int(cfg.n_val)
        if err1 > cfg.first_level_warn:
            warnings.warn(
                f"first-level generalization error {err1:.3g} exceeds "
                f"{cfg.first_level_warn:.3g}",
                FirstLevelAccuracyWarning,
            )

    surrogate = m1.predict
    monotone = cfg.monotone
    if monotone is None:
        monotone = getattr(model, "fully_monotone", False)

    # prediction sample, shared by every second-level route
    u_pred = mc_sample(cfg.n_pred, M, int(seeds[2])).points

    if monotone:
        # monotone shortcut: bound maps evaluated at sign-selected corners
        lows, highs = _boxes_from_u(pboxes, u_pred)
        dirs = probe_directions(surrogate, lows, highs)
        ymin, ymax, nev = monotone_corner_bounds(surrogate, lows, highs, dirs)
        diagnostics["second_level"] = "monotone_corners"
        diagnostics["surrogate_evals"] = int(nev)
        prov = _provenance(cfg, diagnostics, "two_level_monotone")
        return _weighted_response(ymin, ymax, None, prov), diagnostics

    mode = cfg.second_level
    if mode == "auto":
        if _all_stepped(pboxes) and _enumeration_size(pboxes) <= cfg.exact_enum_cap:
            mode = "enumeration"
        else:
            mode = "pce"

    if mode == "enumeration":
        # small stepped inputs: propagate every interval combination exactly
        n_per_dim = [
            len(pb.meta.get("expert_intervals") or []) or pb.lower.step_count()
            for pb in pboxes
        ]
        lows, highs, masses = _factorial_boxes(pboxes, n_per_dim, cfg.exact_enum_cap)
        ymin, ymax, nev = batch_minmax(
            surrogate, lows, highs, opt_cfg, seed=int(seeds[3])
        )
        diagnostics["second_level"] = "enumeration"
        diagnostics["surrogate_evals"] = int(nev)
        prov = _provenance(cfg, diagnostics, "two_level_enumeration")
        return _weighted_response(ymin, ymax, masses, prov), diagnostics

    # second-level surrogates of the bound maps
    design2 = (lhs_sample if cfg.sampler == "lhs" else mc_sample)(
        cfg.n2, M, int(seeds[4])
    )
    lows2, highs2 = _boxes_from_u(pboxes, design2.points)
    ymin2, ymax2, nev = batch_minmax(
        surrogate, lows2, highs2, opt_cfg, seed=int(seeds[3])
    )
    diagnostics["surrogate_evals"] = int(nev)

    space = cfg.second_level_space
    if space == "auto":
        space = "aux" if "hermite" in fams1 else "c"
    if space == "c":
        tf2 = InputTransform(
            [ParametricCDF.uniform(0.0, 1.0) for _ in range(M)], ("legendre",) * M
        )
        to_inputs = lambda u: u
    else:
        tf2 = tf1
        to_inputs = tf1.from_uniform
    pts2 = to_inputs(design2.points)
    m_lower = fit_sparse_lar(pts2, ymax2, tf2.families, tf2, p_max=cfg.p_max, q=cfg.q)
    m_upper = fit_sparse_lar(pts2, ymin2, tf2.families, tf2, p_max=cfg.p_max, q=cfg.q)
    diagnostics["second_level"] = (m_lower, m_upper)
    diagnostics["second_level_space"] = space

    if second_level_validation is not None or cfg.n_val:
        if second_level_validation is not None:
            u_val2, ymin_t, ymax_t = second_level_validation
        else:
            u_val2 = mc_sample(cfg.n_val, M, int(seeds[5])).points
            lv, hv = _boxes_from_u(pboxes, u_val2)
            ymin_t, ymax_t, _ = batch_minmax(
                surrogate, lv, hv, opt_cfg, seed=int(seeds[6])
            )
        pts_val = to_inputs(u_val2)
        diagnostics["err_gen_lower"] = err_gen_estimate(ymax_t, m_lower.predict(pts_val))
        diagnostics["err_gen_upper"] = err_gen_estimate(ymin_t, m_upper.predict(pts_val))

    pts_pred = to_inputs(u_pred)
    y_lo_curve = m_upper.predict(pts_pred)  # min-map samples -> upper CDF
    y_hi_curve = m_lower.predict(pts_pred)  # max-map samples -> lower CDF
    # surrogate noise may flip individual pairs; restore the ordering
    ymin_pred = np.minimum(y_lo_curve, y_hi_curve)
    ymax_pred = np.maximum(y_lo_curve, y_hi_curve)
    prov = _provenance(cfg, diagnostics, "two_level")
    return _weighted_response(ymin_pred, ymax_pred, None, prov), diagnostics


def _provenance(cfg, diagnostics, method):
    prov = {
        "method": method,
        "n1": int(cfg.n1),
        "n2": int(cfg.n2),
        "n_pred": int(cfg.n_pred),
        "seed": int(cfg.seed),
        "true_model_evals": int(diagnostics.get("true_model_evals", 0)),
        "surrogate_evals": int(diagnostics.get("surrogate_evals", 0)),
    }
    for key in ("err_gen_first", "err_gen_lower", "err_gen_upper"):
        if key in diagnostics:
            prov[key] = float(diagnostics[key])
    return prov
