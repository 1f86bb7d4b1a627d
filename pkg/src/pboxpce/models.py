"""Benchmark computational models and the external black-box adapter.

All built-in models are vectorized: they accept an (n, M) array of input
rows and return an (n,) array of responses.  :class:`ModelHandle` wraps a
model with dimension checking, monotonicity flags and an evaluation counter.
"""

from __future__ import annotations

import json
import subprocess
from importlib import resources

import numpy as np

from .errors import (
    DimensionMismatch,
    NonPositiveParameter,
    ParseFailure,
    ProcessFailure,
    SingularStiffness,
)


def linear_demo(x):
    """Scalar demonstration model y = x/2 + 4."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = x[:, 0]
    return x / 2.0 + 4.0


def rosenbrock(x):
    """Rosenbrock function 100 (x2 - x1^2)^2 + (1 - x1)^2, rows (n, 2)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x1, x2 = x[:, 0], x[:, 1]
    return 100.0 * (x2 - x1 * x1) ** 2 + (1.0 - x1) ** 2


# --- two-degree-of-freedom damped oscillator -----------------------------
# Input columns: m_p, m_s, k_p, k_s, zeta_p, zeta_s, S0.
OSCILLATOR_COLUMNS = ("m_p", "m_s", "k_p", "k_s", "zeta_p", "zeta_s", "S0")


def oscillator_peak_force(x):
    """Stationary peak force in the secondary spring of the 2-dof oscillator.

    Closed-form white-noise response: P_s = 3 k_s sqrt(E[x_s^2]) with the
    mean-square secondary displacement assembled from the averaged modal
    quantities omega_a, zeta_a and the detuning ratio.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 7:
        raise DimensionMismatch("oscillator expects 7 input columns")
    if np.any(x <= 0.0):
        raise NonPositiveParameter("all oscillator parameters must be positive")
    m_p, m_s, k_p, k_s, z_p, z_s, s0 = (x[:, i] for i in range(7))
    w_p = np.sqrt(k_p / m_p)
    w_s = np.sqrt(k_s / m_s)
    gamma = m_s / m_p
    w_a = 0.5 * (w_p + w_s)
    z_a = 0.5 * (z_p + z_s)
    xi = (w_p - w_s) / w_a
    msq = (
        np.pi * s0 / (4.0 * z_s * w_s**3)
        * (z_a * z_s) / (z_p * z_s * (4.0 * z_a**2 + xi**2) + gamma * z_a**2)
        * (z_p * w_p**3 + z_s * w_s**3) * w_p / (4.0 * z_a * w_a**4)
    )
    return 3.0 * k_s * np.sqrt(msq)


# --- 23-bar planar truss -------------------------------------------------
# Input columns: A1, A2, E1, E2, P1..P6.
TRUSS_COLUMNS = ("A1", "A2", "E1", "E2", "P1", "P2", "P3", "P4", "P5", "P6")


def load_truss_geometry():
    """Node/bar table of the 23-bar benchmark truss (versioned data file)."""
    with resources.files("pboxpce.data").joinpath("truss_geometry.json").open() as fh:
        return json.load(fh)


class _TrussAssembler:
    """Precomputed geometry for batched direct-stiffness solves."""

    def __init__(self):
        geo = load_truss_geometry()
        nodes = np.asarray(geo["nodes"], dtype=float)
        bars = np.asarray(geo["bars"], dtype=int)
        self.n_nodes = nodes.shape[0]
        self.groups = bars[:, 2]
        d = nodes[bars[:, 1]] - nodes[bars[:, 0]]
        self.lengths = np.linalg.norm(d, axis=1)
        cos = d[:, 0] / self.lengths
        sin = d[:, 1] / self.lengths
        # 4x4 geometric stiffness pattern per bar (unit EA/L)
        self.blocks = np.empty((bars.shape[0], 4, 4))
        for b, (c, s) in enumerate(zip(cos, sin)):
            t = np.array([[c * c, c * s], [c * s, s * s]])
            self.blocks[b, :2, :2] = t
            self.blocks[b, 2:, 2:] = t
            self.blocks[b, :2, 2:] = -t
            self.blocks[b, 2:, :2] = -t
        self.dofs = np.hstack(
            [2 * bars[:, :1], 2 * bars[:, :1] + 1, 2 * bars[:, 1:2], 2 * bars[:, 1:2] + 1]
        )
        fixed = []
        for node in geo["supports"]["pinned"]:
            fixed += [2 * node, 2 * node + 1]
        for node in geo["supports"]["roller"]:
            fixed += [2 * node + 1]
        all_dofs = np.arange(2 * self.n_nodes)
        self.free = np.setdiff1d(all_dofs, np.asarray(fixed, dtype=int))
        self.load_dofs = np.asarray([2 * n + 1 for n in geo["load_nodes"]], dtype=int)
        self.mid_dof = 2 * geo["midspan_node"] + 1

    def deflections(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != 10:
            raise DimensionMismatch("truss expects 10 input columns")
        if np.any(x[:, :4] <= 0.0):
            raise NonPositiveParameter("areas and moduli must be positive")
        n = x.shape[0]
        ea = np.where(
            self.groups[None, :] == 0,
            (x[:, 0] * x[:, 2])[:, None],
            (x[:, 1] * x[:, 3])[:, None],
        )
        coef = ea / self.lengths[None, :]
        ndof = 2 * self.n_nodes
        k_full = np.zeros((n, ndof, ndof))
        for b in range(self.lengths.size):
            d = self.dofs[b]
            k_full[:, d[:, None], d[None, :]] += coef[:, b, None, None] * self.blocks[b]
        k_red = k_full[:, self.free[:, None], self.free[None, :]]
        f = np.zeros((n, ndof))
        f[:, self.load_dofs] = -x[:, 4:]
        f_red = f[:, self.free]
        try:
            u = np.linalg.solve(k_red, f_red[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise SingularStiffness("stiffness matrix is singular") from exc
        if not np.all(np.isfinite(u)):
            raise SingularStiffness("non-finite displacement solution")
        mid_idx = int(np.searchsorted(self.free, self.mid_dof))
        return -u[:, mid_idx]  # positive downward


_TRUSS = None


def truss_deflection(x, chunk=4096):
    """Downward midspan deflection of the 23-bar truss, rows (n, 10)."""
    global _TRUSS
    if _TRUSS is None:
        _TRUSS = _TrussAssembler()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] <= chunk:
        return _TRUSS.deflections(x)
    parts = [
        _TRUSS.deflections(x[i : i + chunk]) for i in range(0, x.shape[0], chunk)
    ]
    return np.concatenate(parts)


class ExternalModel:
    """Line-protocol adapter for an external black-box executable.

    Each batch is streamed to the child process as one whitespace-separated
    input row per line on stdin; one numeric output per line is expected on
    stdout, in order.
    """

    def __init__(self, command, dimension, timeout=60.0):
        self.command = list(command)
        self.dimension = int(dimension)
        self.timeout = timeout

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dimension:
            raise DimensionMismatch(
                f"external model declared dimension {self.dimension}, got {x.shape[1]}"
            )
        payload = "\n".join(" ".join(f"{v:.17g}" for v in row) for row in x) + "\n"
        try:
            proc = subprocess.run(
                self.command,
                input=payload,
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ProcessFailure(f"external model failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise ProcessFailure(
                f"external model exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        lines = proc.stdout.strip().splitlines()
        if len(lines) != x.shape[0]:
            raise ParseFailure(
                f"expected {x.shape[0]} output lines, got {len(lines)}"
            )
        out = np.empty(x.shape[0])
        for i, line in enumerate(lines):
            try:
                out[i] = float(line.strip())
            except ValueError as exc:
                raise ParseFailure(f"malformed output on line {i + 1}: {line!r}") from exc
        return out


class ModelHandle:
    """A computational model with dimension, monotonicity flags and counter."""

    def __init__(self, kind, fn, dimension, monotone):
        self.kind = kind
        self.fn = fn
        self.dimension = dimension
        self.monotone = tuple(monotone)
        self.eval_count = 0

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dimension:
            raise DimensionMismatch(
                f"model '{self.kind}' expects dimension {self.dimension}, got {x.shape[1]}"
            )
        self.eval_count += x.shape[0]
        return np.asarray(self.fn(x), dtype=float)

    @property
    def fully_monotone(self):
        return all(self.monotone)

    def reset_counter(self):
        self.eval_count = 0

    # -- builders ---------------------------------------------------------
    @classmethod
    def linear(cls):
        return cls("linear", linear_demo, 1, (True,))

    @classmethod
    def rosenbrock(cls):
        return cls("rosenbrock", rosenbrock, 2, (False, False))

    @classmethod
    def oscillator(cls):
        return cls("oscillator", oscillator_peak_force, 7, (False,) * 7)

    @classmethod
    def truss(cls):
        return cls("truss", truss_deflection, 10, (True,) * 10)

    @classmethod
    def external(cls, command, dimension, monotone=None, timeout=60.0):
        flags = tuple(monotone) if monotone is not None else (False,) * dimension
        return cls("external", ExternalModel(command, dimension, timeout), dimension, flags)


def model_from_spec(spec):
    """Build a ModelHandle from the CLI config model block."""
    kind = spec.get("kind")
    if kind == "linear":
        return ModelHandle.linear()
    if kind == "rosenbrock":
        return ModelHandle.rosenbrock()
    if kind == "oscillator":
        return ModelHandle.oscillator()
    if kind == "truss":
        return ModelHandle.truss()
    if kind == "external":
        return ModelHandle.external(
            spec["command"],
            spec["dimension"],
            spec.get("monotone"),
            spec.get("timeout", 60.0),
        )
    raise DimensionMismatch(f"unknown model kind: {kind!r}")
