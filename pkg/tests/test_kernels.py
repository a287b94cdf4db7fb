import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gshalf.distribution import rel_velocity
from gshalf.geometry import PARITY
from gshalf.kernels import (
    TB_all,
    TE_all,
    aB_all,
    aE_all,
    denom,
    initial_B_all,
    initial_B_long_all,
    kernel_aB,
    kernel_aE,
    kernel_boundary_B,
    kernel_boundary_E,
    kernel_initial_B,
    kernel_initial_E,
    kernel_TB,
    kernel_TE,
    verify_divergence_identities,
    verify_gradient_identities,
)

E1, E2, E3 = np.eye(3)
S3 = math.sqrt(3)


def unit_vectors():
    return st.tuples(*(st.floats(-1, 1),) * 3).filter(lambda w: np.linalg.norm(w) > 0.1).map(
        lambda w: np.array(w) / np.linalg.norm(w)
    )


velocities = st.tuples(*(st.floats(-2, 2),) * 3).map(np.array)


def test_denom_examples():
    assert denom((0, 0, 0), (0.6, 0, 0.8)) == 1.0
    assert denom((0, 0, S3), (0, 0, -1)) == pytest.approx(1 - S3 / 2)
    assert denom((0, 0, S3), (0, 0, 1)) == pytest.approx(1 + S3 / 2)


def test_aE_at_rest():
    np.testing.assert_allclose(kernel_aE(3, (0, 0, 0), E3), 0.0, atol=1e-15)
    w = np.array([0.36, 0.48, 0.8])
    for i in (1, 2, 3):
        np.testing.assert_allclose(kernel_aE(i, (0, 0, 0), w), np.eye(3)[i - 1] - w[i - 1] * w, atol=1e-15)


def test_aB_at_rest():
    np.testing.assert_allclose(kernel_aB(3, (0, 0, 0), E1), (0, 1, 0), atol=1e-15)
    np.testing.assert_allclose(kernel_aB(3, (0, 0, 0), E3), (0, 0, 0), atol=1e-15)


def test_TE_TB_examples():
    assert kernel_TE(1, (0, 0, 0), E1) == pytest.approx(-1.0)
    w = np.array([0.6, 0.0, -0.8])
    for i in (1, 2, 3):
        assert kernel_TE(i, (0, 0, 0), w) == pytest.approx(-w[i - 1])
        assert kernel_TB(i, (0, 0, 0), w) == 0.0
        assert kernel_TB(i, 2.0 * w, w) == pytest.approx(0.0, abs=1e-15)


def test_boundary_kernels():
    w = np.array([0.6, 0.0, 0.8])
    assert kernel_boundary_E(3, (0, 0, 0), w) == 1.0
    assert kernel_boundary_E(1, (0, 0, 0), w) == 0.0
    for om in (w, E3, E1):
        assert kernel_boundary_E(3, (0.4, -1.2, 0.0), om) == pytest.approx(1.0)
        assert kernel_boundary_B(3, (0.4, -1.2, 0.0), om) == pytest.approx(0.0, abs=1e-15)
    for i in (1, 2, 3):
        assert kernel_boundary_B(i, (0, 0, 0), w) == 0.0
    assert kernel_boundary_B(2, (1, 0, 0), E3) == pytest.approx(-1 / math.sqrt(2))


def test_initial_kernels_at_rest():
    w = np.array([0.48, -0.6, 0.64])
    for i in (1, 2, 3):
        assert kernel_initial_E(i, (0, 0, 0), w) == pytest.approx(w[i - 1])
        assert kernel_initial_B(i, (0, 0, 0), w) == 0.0


@given(velocities, unit_vectors())
def test_initial_B_simplification(v, w):
    np.testing.assert_allclose(initial_B_all(v, w), initial_B_long_all(v, w), rtol=1e-10, atol=1e-12)


@given(velocities, unit_vectors())
def test_mirrored_flag_reflects_direction(v, w):
    for i in (1, 2, 3):
        assert kernel_TE(i, v, w, mirrored=True) == kernel_TE(i, v, w * PARITY)
        np.testing.assert_array_equal(kernel_aB(i, v, w, mirrored=True), kernel_aB(i, v, w * PARITY))


@given(velocities, unit_vectors())
def test_denominator_is_bounded_below(v, w):
    vmax = np.linalg.norm(v)
    floor = 1 - vmax / math.sqrt(1 + vmax * vmax)
    assert denom(v, w) >= floor - 1e-12


@given(velocities, unit_vectors())
def test_vectorized_matches_per_component(v, w):
    for i in (1, 2, 3):
        np.testing.assert_array_equal(aE_all(v, w)[i - 1], kernel_aE(i, v, w))
        assert TB_all(v, w)[i - 1] == kernel_TB(i, v, w)
        assert TE_all(v, w)[i - 1] == kernel_TE(i, v, w)


@given(velocities, unit_vectors())
def test_aE_directional_derivative_along_v(v, w):
    """a^E contracted with v matches a radial difference quotient in |v|."""
    u = rel_velocity(v)
    h = 1e-6
    gE = aE_all(v, w)
    f = lambda vv: (w + rel_velocity(vv)) / (1 + rel_velocity(vv) @ w)
    np.testing.assert_allclose(gE @ v, (f(v * (1 + h)) - f(v * (1 - h))) / (2 * h), rtol=1e-5, atol=1e-7)
    assert np.all(np.isfinite(aB_all(v, w))) and np.linalg.norm(u) < 1


def test_unit_direction_required():
    with pytest.raises(ValueError):
        kernel_TE(1, (0, 0, 0), (1, 1, 0))
    with pytest.raises(ValueError):
        kernel_TE(4, (0, 0, 0), E1)


def test_gradient_identities_pass():
    reports = verify_gradient_identities(seed=42, n_samples=1000)
    for r in reports.values():
        assert r.passed, (r.family, r.max_rel_error, r.worst_input)


def test_divergence_identities_pass():
    reports = verify_divergence_identities(seed=7, n_samples=500)
    assert set(reports) == {"E", "E_mirror", "B", "B_mirror"}
    for r in reports.values():
        assert r.passed, (r.family, r.max_rel_error, r.worst_input)


def test_vacuous_reports():
    for r in list(verify_gradient_identities(n_samples=0).values()) + list(
        verify_divergence_identities(n_samples=0).values()
    ):
        assert r.vacuous and r.passed and r.max_rel_error == 0.0


def test_perturbed_kernel_is_caught():
    reports = verify_gradient_identities(seed=42, n_samples=200, perturb=1e-3)
    assert not reports["aE"].passed
    assert reports["aB"].passed
