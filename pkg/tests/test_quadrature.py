import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gshalf.quadrature import (
    DEFAULT_SPEC,
    LOWER,
    UPPER,
    QuadratureSpec,
    gauss_legendre,
    integrate_ball,
    integrate_ball_sector,
    integrate_boundary_disk,
    integrate_sphere,
    integrate_sphere_cap,
    integrate_wall_plane,
)

TOL = 1e-10


def one(y, *rest):
    return np.ones(len(y))


def test_cap_examples():
    x = (0.3, -0.2, 2.0)
    assert integrate_sphere_cap(x, 1.5, UPPER, one) == pytest.approx(4 * math.pi * 1.5**2, abs=TOL)
    assert integrate_sphere_cap(x, 1.5, LOWER, one) == 0.0
    for x3 in (0.0, 0.4, 1.1):
        t = 1.5
        area = integrate_sphere_cap((0.1, 0.2, x3), t, UPPER, one)
        assert area == pytest.approx(2 * math.pi * t * (t + x3), abs=TOL)


def test_ball_examples():
    t = 1.3
    assert integrate_ball_sector((0, 0, 2.0), t, UPPER, lambda y, r, w: np.ones(len(y))) == pytest.approx(
        4 / 3 * math.pi * t**3, abs=TOL
    )
    for half in (UPPER, LOWER):
        assert integrate_ball_sector((0, 0, 0), t, half, lambda y, r, w: np.ones(len(y))) == pytest.approx(
            2 / 3 * math.pi * t**3, abs=TOL
        )
    inv_r2 = integrate_ball_sector((0, 0, 2.0), t, UPPER, lambda y, r, w: 1.0 / r**2)
    assert inv_r2 == pytest.approx(4 * math.pi * t, abs=TOL)
    folded = integrate_ball_sector((0, 0, 2.0), t, UPPER, lambda y, r, w: np.ones(len(y)), singular_power=2)
    assert folded == pytest.approx(4 * math.pi * t, abs=TOL)


def test_disk_examples():
    t = 1.2
    for x3 in (0.0, 0.3, 0.9):
        x = (0.2, -0.1, x3)
        assert integrate_boundary_disk(x, t, one) == pytest.approx(math.pi * (t * t - x3 * x3), abs=TOL)
        assert integrate_boundary_disk(x, t, lambda y, rt, w: 1.0 / rt) == pytest.approx(
            2 * math.pi * (t - x3), abs=TOL
        )
        assert integrate_boundary_disk(x, t, one, singular_power=1) == pytest.approx(
            2 * math.pi * (t - x3), abs=TOL
        )
    assert integrate_boundary_disk((0, 0, 1.2), t, one) == 0.0
    assert integrate_boundary_disk((0, 0, 2.0), t, one) == 0.0


@given(st.floats(-2.0, 2.0), st.floats(0.05, 2.0))
def test_halves_add_up_to_whole(x3, t):
    x = (0.1, 0.2, x3)
    cap = integrate_sphere_cap(x, t, UPPER, one) + integrate_sphere_cap(x, t, LOWER, one)
    assert cap == pytest.approx(4 * math.pi * t * t, rel=1e-12)
    g = lambda y, r, w: y[:, 2] ** 2 + y[:, 0]
    whole = integrate_ball(x, t, g)
    exact = 4 / 3 * math.pi * t**3 * (x3 * x3 + 0.1) + 4 * math.pi * t**5 / 15
    assert whole == pytest.approx(exact, rel=1e-11, abs=1e-12)


@given(st.floats(-2.0, 2.0), st.floats(0.05, 2.0))
def test_sphere_moments(x3, t):
    x = np.array([0.3, -0.4, x3])
    mean = integrate_sphere(x, t, lambda y, w: y) / (4 * math.pi * t * t)
    np.testing.assert_allclose(mean, x, atol=1e-12)
    np.testing.assert_allclose(integrate_sphere(x, t, lambda y, w: w), 0.0, atol=1e-12)


@given(st.floats(-1.0, 1.0), st.floats(0.05, 2.0))
def test_lower_cap_is_reflection_of_upper(x3, t):
    x = np.array([0.1, 0.2, x3])
    xb = x * (1, 1, -1)
    f = lambda y, w: np.exp(y[:, 0]) * (1 + y[:, 2] ** 2)
    assert integrate_sphere_cap(x, t, LOWER, f) == pytest.approx(integrate_sphere_cap(xb, t, UPPER, f), rel=1e-12, abs=1e-14)


def test_multi_component_integrands():
    val = integrate_sphere_cap((0, 0, 0.5), 1.0, UPPER, lambda y, w: np.stack([np.ones(len(y)), 2 * np.ones(len(y))], -1))
    np.testing.assert_allclose(val, [2 * math.pi * 1.5, 4 * math.pi * 1.5], rtol=1e-12)


def test_gauss_legendre_exactness():
    x, w = gauss_legendre(8, 0.0, 2.0)
    assert np.sum(w * x**15) == pytest.approx(2.0**16 / 16, rel=1e-13)


def test_spec_validation_and_scaling():
    with pytest.raises(ValueError, match="n_phi"):
        QuadratureSpec(n_phi=1)
    with pytest.raises(ValueError, match="bd_truncation"):
        QuadratureSpec(bd_truncation=-1.0)
    s = DEFAULT_SPEC.scaled(2)
    assert (s.n_phi, s.n_theta, s.n_r) == (64, 64, 48)
    assert DEFAULT_SPEC.scaled(0.01).n_phi == 2
    assert DEFAULT_SPEC.truncation_for(2.0) == pytest.approx(20.0)


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        integrate_sphere_cap((0, 0, 1), -1.0, UPPER, one)
    with pytest.raises(ValueError):
        integrate_sphere_cap((0, 0, 1), 1.0, "middle", one)


def test_wall_plane_tail_warning():
    slow = lambda y, rt, w: 1.0 / (1.0 + rt**3)
    with pytest.warns(RuntimeWarning, match="tail"):
        integrate_wall_plane((0, 0, 1.0), 2.0, slow, 32, 16)
    fast = lambda y, rt, w: np.exp(-rt)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        val = integrate_wall_plane((0, 0, 1.0), 40.0, fast, 64, 16, singular_power=1)
    assert val == pytest.approx(2 * math.pi * math.exp(-1.0), rel=1e-10)
