"""Orthonormal polynomial bases and hyperbolic truncation index sets.

Univariate families:
  * Legendre, orthonormal under Uniform(-1, 1): psi_n = sqrt(2n+1) P_n,
  * probabilists' Hermite, orthonormal under N(0, 1): psi_n = He_n / sqrt(n!).

Both are evaluated with the classical three-term recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidCdfParameter

FAMILIES = ("legendre", "hermite")

# Relative slack applied to the q-norm comparison so boundary indices are
# retained reproducibly across platforms.
_QNORM_SLACK = 1e-12


@dataclass(frozen=True)
class BasisSpec:
    """Dimension, maximal total degree, q-norm and per-dimension families."""

    M: int
    p: int
    q: float = 1.0
    families: tuple = field(default=None)

    def __post_init__(self):
        if self.p < 0 or self.M < 1:
            raise InvalidCdfParameter("basis spec requires M >= 1 and p >= 0")
        if not 0.0 < self.q <= 1.0:
            raise InvalidCdfParameter("q must lie in (0, 1]")
        fams = self.families
        if fams is None:
            fams = ("legendre",) * self.M
        if isinstance(fams, str):
            fams = (fams,) * self.M
        fams = tuple(f.lower() for f in fams)
        if len(fams) != self.M or any(f not in FAMILIES for f in fams):
            raise InvalidCdfParameter(f"families must be {FAMILIES} per dimension")
        object.__setattr__(self, "families", fams)


def legendre_table(max_degree, z):
    """Orthonormal Legendre values, shape (len(z), max_degree + 1)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty((z.size, max_degree + 1))
    p_prev = np.ones_like(z)
    out[:, 0] = p_prev
    if max_degree == 0:
        return out
    p_cur = z.copy()
    out[:, 1] = math.sqrt(3.0) * p_cur
    for n in range(1, max_degree):
        p_next = ((2 * n + 1) * z * p_cur - n * p_prev) / (n + 1)
        out[:, n + 1] = math.sqrt(2 * (n + 1) + 1) * p_next
        p_prev, p_cur = p_cur, p_next
    return out


def hermite_table(max_degree, z):
    """Orthonormal probabilists' Hermite values, shape (len(z), max_degree + 1)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty((z.size, max_degree + 1))
    he_prev = np.ones_like(z)
    out[:, 0] = he_prev
    if max_degree == 0:
        return out
    he_cur = z.copy()
    out[:, 1] = he_cur
    fact = 1.0
    for n in range(1, max_degree):
        he_next = z * he_cur - n * he_prev
        fact *= n + 1
        out[:, n + 1] = he_next / math.sqrt(fact)
        he_prev, he_cur = he_cur, he_next
    return out


_TABLES = {"legendre": legendre_table, "hermite": hermite_table}


def legendre_orthonormal(degree, z):
    """Degree-n orthonormal Legendre polynomial at z in [-1, 1]."""
    vals = legendre_table(degree, z)[:, degree]
    return float(vals[0]) if np.ndim(z) == 0 else vals


def hermite_orthonormal(degree, z):
    """Degree-n orthonormal probabilists' Hermite polynomial at z."""
    vals = hermite_table(degree, z)[:, degree]
    return float(vals[0]) if np.ndim(z) == 0 else vals


def hyperbolic_index_set(spec):
    """All multi-indices alpha with ||alpha||_q <= p, deterministically ordered.

    Ordering is (total degree, lexicographic) so coefficient vectors are
    reproducible across runs and platforms.
    """
    p, q, M = spec.p, spec.q, spec.M
    budget = float(p) ** q * (1.0 + _QNORM_SLACK) if p > 0 else 0.0
    out = []
    alpha = [0] * M

    def recurse(dim, used):
        if dim == M:
            out.append(tuple(alpha))
            return
        a = 0
        while True:
            cost = used + (float(a) ** q if a else 0.0)
            if a and cost > budget:
                break
            alpha[dim] = a
            recurse(dim + 1, cost)
            a += 1
        alpha[dim] = 0

    recurse(0, 0.0)
    out.sort(key=lambda idx: (sum(idx), idx))
    return out


def basis_eval(indices, families, points):
    """Tensor-product basis matrix Psi, shape (n_points, len(indices)).

    ``points`` must already live in the standardized domains of the given
    families ([-1, 1] for Legendre, the real line for Hermite).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    M = points.shape[1]
    if any(len(idx) != M for idx in indices):
        raise DimensionMismatch("multi-index length does not match point dimension")
    if len(families) != M:
        raise DimensionMismatch("one family per dimension required")
    idx_arr = np.asarray(indices, dtype=int)
    psi = np.ones((points.shape[0], idx_arr.shape[0]))
    for i in range(M):
        max_deg = int(idx_arr[:, i].max(initial=0))
        table = _TABLES[families[i].lower()](max_deg, points[:, i])
        psi *= table[:, idx_arr[:, i]]
    return psi
