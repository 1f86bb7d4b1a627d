"""Tests for the benchmark models, including independent physics oracles."""

import sys

import numpy as np
import pytest

from pboxpce.errors import (
    DimensionMismatch,
    NonPositiveParameter,
    ParseFailure,
    ProcessFailure,
)
from pboxpce.models import (
    ExternalModel,
    ModelHandle,
    linear_demo,
    load_truss_geometry,
    model_from_spec,
    oscillator_peak_force,
    rosenbrock,
    truss_deflection,
)


class TestLinearDemo:
    def test_hand_values(self):
        assert linear_demo(0.0) == 4.0
        assert linear_demo(2.0) == 5.0
        assert np.allclose(linear_demo(np.array([[0.0], [2.0]])), [4.0, 5.0])


class TestRosenbrock:
    def test_hand_values(self):
        assert rosenbrock([[1.0, 1.0]])[0] == 0.0
        # 100 (2 - 1)^2 + (1 + 1)^2 = 104
        assert rosenbrock([[-1.0, 2.0]])[0] == pytest.approx(104.0)
        assert rosenbrock([[0.0, 0.0]])[0] == pytest.approx(1.0)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(-2, 2, (50, 2))
        batch = rosenbrock(pts)
        single = [rosenbrock(p[None, :])[0] for p in pts]
        assert np.allclose(batch, single)


def _oscillator_scalar_reference(m_p, m_s, k_p, k_s, z_p, z_s, s0):
    """Independent scalar re-derivation of the peak secondary force.

    Written with different grouping and plain Python floats so shared bugs
    with the vectorized implementation are unlikely.
    """
    import math

    w_p = math.sqrt(k_p / m_p)
    w_s = math.sqrt(k_s / m_s)
    gamma = m_s / m_p
    w_a = (w_p + w_s) / 2.0
    z_a = (z_p + z_s) / 2.0
    theta = (w_p - w_s) / w_a
    term1 = math.pi * s0 / (4.0 * z_s * w_s * w_s * w_s)
    term2 = (z_a * z_s) / (
        z_p * z_s * (4.0 * z_a * z_a + theta * theta) + gamma * z_a * z_a
    )
    term3 = (z_p * w_p**3 + z_s * w_s**3) * w_p / (4.0 * z_a * w_a**4)
    return 3.0 * k_s * math.sqrt(term1 * term2 * term3)


class TestOscillator:
    NOMINAL = (1.5, 0.01, 1.0, 0.05, 0.04, 0.02, 100.0)

    def test_matches_scalar_reference(self):
        rng = np.random.default_rng(1)
        base = np.array(self.NOMINAL)
        pts = base[None, :] * rng.uniform(0.5, 1.5, (40, 7))
        vec = oscillator_peak_force(pts)
        for row, got in zip(pts, vec):
            assert got == pytest.approx(
                _oscillator_scalar_reference(*row), rel=1e-12
            )

    def test_sqrt_s0_homogeneity(self):
        base = np.array(self.NOMINAL)
        doubled = base.copy()
        doubled[6] *= 4.0
        assert oscillator_peak_force(doubled[None, :])[0] == pytest.approx(
            2.0 * oscillator_peak_force(base[None, :])[0], rel=1e-12
        )

    def test_positive_response(self):
        rng = np.random.default_rng(2)
        pts = np.array(self.NOMINAL)[None, :] * rng.uniform(0.5, 2.0, (100, 7))
        assert np.all(oscillator_peak_force(pts) > 0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DimensionMismatch):
            oscillator_peak_force(np.ones((1, 6)))
        bad = np.array(self.NOMINAL)
        bad[2] = 0.0
        with pytest.raises(NonPositiveParameter):
            oscillator_peak_force(bad[None, :])


def _truss_oracle_deflection(x):
    """Virtual-work oracle for the midspan deflection.

    The truss is statically determinate, so the 23 bar forces plus 3 support
    reactions follow from nodal equilibrium alone (no stiffness assembly).
    The downward midspan deflection is then sum(N n L / (E A)) with n the bar
    forces under a unit downward load at midspan.
    """
    geo = load_truss_geometry()
    nodes = np.asarray(geo["nodes"], dtype=float)
    bars = np.asarray(geo["bars"], dtype=int)
    nb = bars.shape[0]
    nn = nodes.shape[0]
    eq = np.zeros((2 * nn, nb + 3))
    lengths = np.empty(nb)
    for b, (i, j, _) in enumerate(bars):
        d = nodes[j] - nodes[i]
        lengths[b] = np.hypot(*d)
        c, s = d / lengths[b]
        # a bar in tension pulls each end node toward the other
        eq[2 * i, b] = c
        eq[2 * i + 1, b] = s
        eq[2 * j, b] = -c
        eq[2 * j + 1, b] = -s
    pin = geo["supports"]["pinned"][0]
    rol = geo["supports"]["roller"][0]
    eq[2 * pin, nb] = 1.0
    eq[2 * pin + 1, nb + 1] = 1.0
    eq[2 * rol + 1, nb + 2] = 1.0
    # right-hand side = minus the external nodal forces
    rhs = np.zeros(2 * nn)
    for k, node in enumerate(geo["load_nodes"]):
        rhs[2 * node + 1] = x[4 + k]  # load of magnitude P acts downward
    forces = np.linalg.solve(eq, rhs)[:nb]
    rhs_virtual = np.zeros(2 * nn)
    rhs_virtual[2 * geo["midspan_node"] + 1] = 1.0  # unit downward load
    virtual = np.linalg.solve(eq, rhs_virtual)[:nb]
    ea = np.where(bars[:, 2] == 0, x[0] * x[2], x[1] * x[3])
    return float(np.sum(forces * virtual * lengths / ea))


TRUSS_REFERENCE_POINT = np.array(
    [2e-3, 1e-3, 2.1e11, 2.1e11, 5e4, 5e4, 5e4, 5e4, 5e4, 5e4]
)


class TestTruss:
    def test_matches_virtual_work_oracle_at_reference(self):
        got = truss_deflection(TRUSS_REFERENCE_POINT[None, :])[0]
        want = _truss_oracle_deflection(TRUSS_REFERENCE_POINT)
        assert got == pytest.approx(want, rel=1e-9)
        assert got > 0  # downward deflection is positive

    def test_matches_oracle_at_random_points(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = TRUSS_REFERENCE_POINT * rng.uniform(0.7, 1.3, 10)
            got = truss_deflection(x[None, :])[0]
            assert got == pytest.approx(_truss_oracle_deflection(x), rel=1e-9)

    def test_load_linearity(self):
        x = TRUSS_REFERENCE_POINT.copy()
        doubled = x.copy()
        doubled[4:] *= 2.0
        assert truss_deflection(doubled[None, :])[0] == pytest.approx(
            2.0 * truss_deflection(x[None, :])[0], rel=1e-12
        )

    def test_stiffness_scaling(self):
        x = TRUSS_REFERENCE_POINT.copy()
        stiffer = x.copy()
        stiffer[:2] *= 2.0  # doubling the areas doubles EA and halves deflection
        assert truss_deflection(stiffer[None, :])[0] == pytest.approx(
            0.5 * truss_deflection(x[None, :])[0], rel=1e-12
        )

    def test_chunked_equals_unchunked(self):
        rng = np.random.default_rng(4)
        pts = TRUSS_REFERENCE_POINT[None, :] * rng.uniform(0.8, 1.2, (50, 10))
        assert np.allclose(
            truss_deflection(pts, chunk=7), truss_deflection(pts), rtol=0
        )

    def test_rejects_bad_inputs(self):
        with pytest.raises(DimensionMismatch):
            truss_deflection(np.ones((1, 9)))
        bad = TRUSS_REFERENCE_POINT.copy()
        bad[0] = -1.0
        with pytest.raises(NonPositiveParameter):
            truss_deflection(bad[None, :])

    def test_monotone_directions(self):
        # stiffer members -> smaller deflection, larger loads -> larger
        base = truss_deflection(TRUSS_REFERENCE_POINT[None, :])[0]
        for j in range(10):
            x = TRUSS_REFERENCE_POINT.copy()
            x[j] *= 1.1
            moved = truss_deflection(x[None, :])[0]
            if j < 4:
                assert moved < base
            else:
                assert moved > base


_ECHO_LINEAR = (
    "import sys\n"
    "for line in sys.stdin:\n"
    "    line = line.strip()\n"
    "    if line:\n"
    "        print(float(line.split()[0]) / 2 + 4)\n"
)


class TestExternalModel:
    def test_observationally_equivalent_to_builtin(self):
        ext = ExternalModel([sys.executable, "-c", _ECHO_LINEAR], 1)
        x = np.linspace(-3, 3, 20)[:, None]
        assert np.allclose(ext(x), linear_demo(x), rtol=1e-12)

    def test_order_preserved_on_large_batch(self):
        script = (
            "import sys\n"
            "for line in sys.stdin:\n"
            "    if line.strip():\n"
            "        print(line.split()[0])\n"
        )
        ext = ExternalModel([sys.executable, "-c", script], 2)
        rng = np.random.default_rng(5)
        x = rng.standard_normal((100, 2))
        assert np.allclose(ext(x), x[:, 0], rtol=0)

    def test_malformed_output_line(self):
        script = "print('1.0'); print('oops'); print('3.0')"
        ext = ExternalModel([sys.executable, "-c", script], 1)
        with pytest.raises(ParseFailure, match="line 2"):
            ext(np.zeros((3, 1)))

    def test_wrong_line_count(self):
        ext = ExternalModel([sys.executable, "-c", "print(1.0)"], 1)
        with pytest.raises(ParseFailure):
            ext(np.zeros((3, 1)))

    def test_nonzero_exit(self):
        ext = ExternalModel([sys.executable, "-c", "import sys; sys.exit(3)"], 1)
        with pytest.raises(ProcessFailure):
            ext(np.zeros((1, 1)))

    def test_missing_executable(self):
        ext = ExternalModel(["/nonexistent/prog"], 1)
        with pytest.raises(ProcessFailure):
            ext(np.zeros((1, 1)))


class TestModelHandle:
    def test_eval_counter(self):
        model = ModelHandle.rosenbrock()
        model(np.zeros((5, 2)))
        model(np.zeros((3, 2)))
        assert model.eval_count == 8
        model.reset_counter()
        assert model.eval_count == 0

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            ModelHandle.oscillator()(np.ones((1, 3)))

    def test_monotone_flags(self):
        assert ModelHandle.truss().fully_monotone
        assert not ModelHandle.rosenbrock().fully_monotone

    def test_model_from_spec(self):
        assert model_from_spec({"kind": "linear"}).dimension == 1
        assert model_from_spec({"kind": "truss"}).dimension == 10
        ext = model_from_spec(
            {"kind": "external", "command": ["true"], "dimension": 2}
        )
        assert ext.dimension == 2
        with pytest.raises(DimensionMismatch):
            model_from_spec({"kind": "mystery"})
