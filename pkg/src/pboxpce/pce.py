"""Sparse polynomial chaos surrogates: designs, fitting, selection, prediction.

The fitting pipeline follows the hybrid pattern: least angle regression ranks
candidate regressors, each nested active set is re-fitted by least squares,
and the analytic leave-one-out error selects the final basis.  An outer loop
adapts the maximal total degree.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm as _std_norm
from sklearn.linear_model import lars_path

from .cdfs import cdf_from_dict
from .errors import (
    DimensionMismatch,
    RankDeficientWarning,
    Underdetermined,
    ZeroVariance,
)
from .orthopoly import BasisSpec, basis_eval, hyperbolic_index_set

_PPF_EPS = 1e-14
_MAX_CANDIDATES = 6000


@dataclass(frozen=True)
class ExperimentalDesign:
    """Sample set in the unit hypercube used to train a surrogate."""

    points: np.ndarray
    seed: int
    scheme: str


def lhs_sample(n, M, seed, midpoint=False):
    """Latin hypercube design in [0, 1]^M, one point per 1/n stratum per dim.

    Strata are jittered uniformly (McKay construction) unless ``midpoint``.
    """
    if n < 1:
        raise Underdetermined("need at least one design point")
    rng = np.random.default_rng(seed)
    pts = np.empty((n, M))
    for j in range(M):
        perm = rng.permutation(n)
        offset = 0.5 if midpoint else rng.uniform(size=n)
        pts[:, j] = (perm + offset) / n
    return ExperimentalDesign(pts, seed, "lhs")


def mc_sample(n, M, seed):
    """Plain Monte Carlo design in [0, 1]^M."""
    rng = np.random.default_rng(seed)
    return ExperimentalDesign(rng.random((n, M)), seed, "mc")


class InputTransform:
    """Per-dimension isoprobabilistic map to the standardized basis domains.

    Legendre dimensions map x -> 2 F_i(x) - 1 (exactly affine for uniform
    marginals); Hermite dimensions map x -> Phi^{-1}(F_i(x)) (exactly linear
    for Gaussian marginals).
    """

    def __init__(self, marginals, families):
        if len(marginals) != len(families):
            raise DimensionMismatch("one marginal per family required")
        self.marginals = list(marginals)
        self.families = tuple(f.lower() for f in families)

    @property
    def M(self):
        return len(self.marginals)

    def to_std(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.M:
            raise DimensionMismatch(
                f"points have dimension {points.shape[1]}, transform expects {self.M}"
            )
        z = np.empty_like(points)
        for i, (marg, fam) in enumerate(zip(self.marginals, self.families)):
            u = np.clip(np.asarray(marg.evaluate(points[:, i])), _PPF_EPS, 1.0 - _PPF_EPS)
            if fam == "legendre":
                z[:, i] = 2.0 * u - 1.0
            else:
                z[:, i] = _std_norm.ppf(u)
        return z

    def from_uniform(self, u):
        """Map unit-hypercube samples to the physical marginal domains."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        x = np.empty_like(u)
        for i, marg in enumerate(self.marginals):
            x[:, i] = marg.inverse(u[:, i])
        return x

    def to_dict(self):
        return {
            "marginals": [m.to_dict() for m in self.marginals],
            "families": list(self.families),
        }

    @classmethod
    def from_dict(cls, spec):
        return cls([cdf_from_dict(m) for m in spec["marginals"]], spec["families"])


@dataclass
class PceModel:
    """Fitted polynomial chaos surrogate."""

    indices: list
    families: tuple
    coefficients: np.ndarray
    transform: InputTransform
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.indices) == 0:
            raise Underdetermined("a PCE model needs at least one basis term")
        if len(self.indices) != len(self.coefficients):
            raise DimensionMismatch("one coefficient per basis term required")

    def predict(self, points):
        z = self.transform.to_std(points)
        psi = basis_eval(self.indices, self.families, z)
        return psi @ self.coefficients

    def to_dict(self):
        return {
            "basis": [list(a) for a in self.indices],
            "coefficients": np.asarray(self.coefficients).tolist(),
            "families": list(self.families),
            "transform": self.transform.to_dict(),
            "diagnostics": self.diagnostics,
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def from_dict(cls, spec):
        return cls(
            [tuple(a) for a in spec["basis"]],
            tuple(spec["families"]),
            np.asarray(spec["coefficients"], dtype=float),
            InputTransform.from_dict(spec["transform"]),
            dict(spec.get("diagnostics", {})),
        )


def predict(model, points):
    return model.predict(points)


def _solve_ls(psi, y):
    coeffs, _, rank, _ = np.linalg.lstsq(psi, y, rcond=None)
    if rank < psi.shape[1]:
        warnings.warn(
            f"rank-deficient regression ({rank} < {psi.shape[1]}); "
            "minimum-norm solution used",
            RankDeficientWarning,
            stacklevel=3,
        )
    return coeffs


def loo_error(psi, y, coeffs):
    """Analytic leave-one-out MSE normalized by the response variance.

    Uses the hat-matrix diagonals from a thin QR factorization, so no
    refitting is required.  Matches brute-force leave-one-out refits for
    full-rank problems.
    """
    resid = y - psi @ coeffs
    q, _ = np.linalg.qr(psi)
    h = np.clip(np.einsum("ij,ij->i", q, q), 0.0, 1.0 - 1e-12)
    loo = np.mean((resid / (1.0 - h)) ** 2)
    var = np.var(y)
    if var <= 0.0:
        return 0.0 if loo < 1e-300 else float("inf")
    return float(loo / var)


def fit_least_squares(points, responses, indices, families, transform):
    """Fit PCE coefficients on a fixed basis by ordinary least squares."""
    responses = np.asarray(responses, dtype=float)
    z = transform.to_std(points)
    psi = basis_eval(indices, families, z)
    if psi.shape[0] < psi.shape[1]:
        raise Underdetermined(
            f"{psi.shape[0]} samples cannot determine {psi.shape[1]} coefficients"
        )
    coeffs = _solve_ls(psi, responses)
    resid = responses - psi @ coeffs
    var = np.var(responses)
    diags = {
        "loo_error": loo_error(psi, responses, coeffs),
        "empirical_error": float(np.mean(resid**2) / var) if var > 0 else 0.0,
    }
    return PceModel(list(indices), tuple(families), coeffs, transform, diags)


def _constant_model(responses, families, transform):
    M = len(families)
    model = PceModel(
        [tuple([0] * M)],
        tuple(families),
        np.array([float(np.mean(responses))]),
        transform,
        {"loo_error": 0.0, "empirical_error": 0.0, "selected_degree": 0},
    )
    return model


def _lar_ranking(psi, y):
    """Order in which LAR activates the non-constant regressors."""
    xc = psi[:, 1:] - psi[:, 1:].mean(axis=0)
    scale = np.linalg.norm(xc, axis=0)
    keep = np.flatnonzero(scale > 1e-13)
    if keep.size == 0:
        return []
    yc = y - y.mean()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, active, _ = lars_path(xc[:, keep] / scale[keep], yc, method="lar")
    return [int(keep[a]) + 1 for a in active]


def _loo_path(psi, y, order):
    """Leave-one-out errors along a nested sequence of active sets.

    Maintains an incremental orthonormal basis (modified Gram-Schmidt with
    reorthogonalization), so each step costs O(N k) instead of a fresh
    factorization.  Yields (loo_error, sorted column list) per active set;
    near-collinear additions are skipped.
    """
    n = psi.shape[0]
    var = np.var(y)
    q_cols = [np.full(n, 1.0 / np.sqrt(n))]
    resid = y - q_cols[0] * (q_cols[0] @ y)
    h = np.full(n, 1.0 / n)
    active = [0]
    for col in order:
        v = psi[:, col].astype(float, copy=True)
        scale = np.linalg.norm(v)
        for _ in range(2):
            for qc in q_cols:
                v -= qc * (qc @ v)
        nrm = np.linalg.norm(v)
        if nrm <= 1e-10 * max(scale, 1.0):
            continue  # collinear with the current active set
        qc = v / nrm
        q_cols.append(qc)
        resid = resid - qc * (qc @ resid)
        h = np.minimum(h + qc * qc, 1.0 - 1e-12)
        active.append(col)
        loo = float(np.mean((resid / (1.0 - h)) ** 2) / var)
        # inflate by N/(N - P): penalizes models whose size approaches the
        # sample count, where the raw leave-one-out estimate turns optimistic
        p_act = len(active)
        factor = n / (n - p_act) if p_act < n else np.inf
        yield loo * factor, sorted(active)


def fit_sparse_lar(
    points,
    responses,
    families,
    transform,
    p_max=30,
    q=0.75,
    max_active=150,
    patience=2,
):
    """Degree-adaptive hybrid LAR fit with leave-one-out model selection.

    For each total degree p the hyperbolic candidate set is ranked by LAR;
    every nested active set (constant always included) is re-fitted by least
    squares and scored by the analytic leave-one-out error.  The overall best
    model across degrees is returned.  Degree adaptation stops early after
    ``patience`` consecutive degrees without improvement.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    responses = np.asarray(responses, dtype=float)
    n, M = points.shape
    if n < 3:
        raise Underdetermined("sparse fitting needs at least 3 samples")
    if np.var(responses) <= 1e-300 * max(1.0, np.mean(responses) ** 2):
        return _constant_model(responses, families, transform)

    z = transform.to_std(points)
    best = None  # (loo, indices, coeffs, p)
    stale = 0
    for p in range(1, p_max + 1):
        indices = hyperbolic_index_set(BasisSpec(M, p, q, families))
        if len(indices) > _MAX_CANDIDATES:
            break
        psi = basis_eval(indices, families, z)
        order = _lar_ranking(psi, responses)
        limit = min(len(order), max(1, int(0.8 * n)), max_active)
        improved = False
        for err, cols in _loo_path(psi, responses, order[:limit]):
            if best is None or err < best[0]:
                best = (err, [indices[c] for c in cols], [psi[:, cols]], p)
                improved = True
        if best is not None and best[0] < 1e-14:
            break
        stale = 0 if improved else stale + 1
        if stale >= patience:
            break

    if best is None:
        return _constant_model(responses, families, transform)
    err, idx, (psi_sel,), p_sel = best
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficientWarning)
        coeffs = _solve_ls(psi_sel, responses)
    var = np.var(responses)
    resid = responses - psi_sel @ coeffs
    diags = {
        "loo_error": float(err),
        "empirical_error": float(np.mean(resid**2) / var),
        "selected_degree": int(p_sel),
        "n_terms": len(idx),
    }
    return PceModel(idx, tuple(families), coeffs, transform, diags)


def err_gen_estimate(y_true, y_pred):
    """Relative generalization error: MSE normalized by validation variance."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.size == 0:
        raise ZeroVariance("empty validation set")
    denom = np.sum((y_true - y_true.mean()) ** 2)
    if denom <= 0.0:
        raise ZeroVariance("validation responses have zero variance")
    return float(np.sum((y_true - y_pred) ** 2) / denom)
