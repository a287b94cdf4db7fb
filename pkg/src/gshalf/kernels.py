"""Pointwise kernels of the half-space field representation.

Every ``*_all`` function evaluates the kernel for the three field components at
once and broadcasts over leading axes: ``v`` and ``omega`` have shape (..., 3)
and the result has shape (..., 3) (or (..., 3, 3) for the velocity gradients
``a^E`` and ``a^B``, indexed [..., i, k] with k the velocity-gradient axis).

Mirrored variants are obtained by passing the reflected direction
``omega * PARITY``; the parity signs that multiply mirrored terms are applied
when the representation is assembled, not here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import rel_velocity
from .geometry import PARITY, as_vec3, cross

_EYE = np.eye(3)
_E3 = np.array([0.0, 0.0, 1.0])


def _prep(v, omega, mirrored=False):
    v = np.asarray(v, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if mirrored:
        omega = omega * PARITY
    return rel_velocity(v), omega


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _axis(i: int) -> int:
    if i not in (1, 2, 3):
        raise ValueError(f"axis index must be 1, 2 or 3, got {i!r}")
    return i - 1


# -- vectorized kernels ---------------------------------------------------


def denom(v, omega):
    """1 + v_hat . omega."""
    u, omega = _prep(v, omega)
    return 1.0 + _dot(u, omega)


def aE_all(v, omega):
    """grad_v of (omega_i + v_hat_i) / (1 + v_hat . omega) for i = 1..3."""
    v = np.asarray(v, dtype=float)
    u, omega = _prep(v, omega)
    gamma = np.sqrt(1.0 + _dot(v, v))[..., None, None]
    D = (1.0 + _dot(u, omega))[..., None, None]
    uw = _dot(u, omega)[..., None]
    du_i = _EYE - u[..., :, None] * u[..., None, :]  # rows: e_i - u_i u
    dD = (omega - uw * u)[..., None, :]
    num = du_i * D - (omega + u)[..., :, None] * dD
    return num / (gamma * D * D)


def aB_all(v, omega):
    """grad_v of (omega x v_hat)_i / (1 + v_hat . omega) for i = 1..3."""
    v = np.asarray(v, dtype=float)
    u, omega = _prep(v, omega)
    gamma = np.sqrt(1.0 + _dot(v, v))
    gD = (gamma * (1.0 + _dot(u, omega)))[..., None, None]
    # grad_v (omega x v)_i = e_i x omega
    lin = cross(_EYE, omega[..., None, :])
    wv = cross(omega, v)[..., :, None]
    return lin / gD - wv * (u + omega)[..., None, :] / (gD * gD)


def TE_all(v, omega):
    """(|v_hat|^2 - 1)(v_hat_i + omega_i) / (1 + v_hat . omega)^2."""
    u, omega = _prep(v, omega)
    D = 1.0 + _dot(u, omega)
    return ((_dot(u, u) - 1.0) / (D * D))[..., None] * (u + omega)


def TB_all(v, omega):
    """(omega x v_hat)_i (1 - |v_hat|^2) / (1 + v_hat . omega)^2."""
    u, omega = _prep(v, omega)
    D = 1.0 + _dot(u, omega)
    return ((1.0 - _dot(u, u)) / (D * D))[..., None] * cross(omega, u)


def boundary_E_all(v, omega):
    """delta_i3 - (omega_i + v_hat_i) v_hat_3 / (1 + v_hat . omega)."""
    u, omega = _prep(v, omega)
    D = 1.0 + _dot(u, omega)
    return _E3 - (u[..., 2] / D)[..., None] * (omega + u)


def boundary_B_all(v, omega):
    """-(e3 x v_hat)_i + (omega x v_hat)_i v_hat_3 / (1 + v_hat . omega)."""
    u, omega = _prep(v, omega)
    D = 1.0 + _dot(u, omega)
    return -cross(_E3, u) + (u[..., 2] / D)[..., None] * cross(omega, u)


def initial_E_all(v, omega):
    """omega_j (delta_ij - (omega_i + v_hat_i) v_hat_j / (1 + v_hat . omega))."""
    u, omega = _prep(v, omega)
    uw = _dot(u, omega)
    return omega - (uw / (1.0 + uw))[..., None] * (omega + u)


def initial_B_all(v, omega):
    """(omega x v_hat)_i / (1 + v_hat . omega)."""
    u, omega = _prep(v, omega)
    return cross(omega, u) / (1.0 + _dot(u, omega))[..., None]


def initial_B_long_all(v, omega):
    """Unsimplified form (omega x v_hat)_i (1 - v_hat.omega / (1 + v_hat.omega))."""
    u, omega = _prep(v, omega)
    uw = _dot(u, omega)
    return cross(omega, u) * (1.0 - uw / (1.0 + uw))[..., None]


# -- per-component API ----------------------------------------------------


def kernel_aE(i, v, omega, mirrored=False):
    return aE_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i), :]


def kernel_aB(i, v, omega, mirrored=False):
    return aB_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i), :]


def kernel_TE(i, v, omega, mirrored=False):
    return TE_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i)]


def kernel_TB(i, v, omega, mirrored=False):
    return TB_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i)]


def kernel_boundary_E(i, v, omega, mirrored=False):
    return boundary_E_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i)]


def kernel_boundary_B(i, v, omega, mirrored=False):
    return boundary_B_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i)]


def kernel_initial_E(i, v, omega, mirrored=False):
    return initial_E_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i)]


def kernel_initial_B(i, v, omega, mirrored=False):
    return initial_B_all(v, _maybe_mirror(omega, mirrored))[..., _axis(i)]


def _maybe_mirror(omega, mirrored):
    omega = as_vec3(omega)
    norm = np.linalg.norm(omega, axis=-1)
    if np.any(np.abs(norm - 1.0) > 1e-12):
        raise ValueError("omega must be a unit vector")
    return omega * PARITY if mirrored else omega


# -- finite-difference verifiers -----------------------------------------

FD_STEP = 1e-5


@dataclass
class IdentityReport:
    """Outcome of a randomized identity check."""

    family: str
    n_samples: int
    max_rel_error: float = 0.0
    worst_input: dict | None = None
    tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance

    @property
    def vacuous(self) -> bool:
        return self.n_samples == 0


def _random_units(rng, n):
    w = rng.normal(size=(n, 3))
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def _random_ball(rng, n, radius):
    return _random_units(rng, n) * radius * rng.uniform(size=(n, 1)) ** (1.0 / 3.0)


def _rel_rows(a, b):
    """Row-wise max relative error; absolute when the reference row is ~0."""
    scale = np.max(np.abs(b), axis=-1)
    diff = np.max(np.abs(a - b), axis=-1)
    return np.where(scale > 1e-12, diff / np.where(scale > 1e-12, scale, 1.0), diff)


def _fill(report, errs, samples):
    if len(errs):
        k = int(np.argmax(errs))
        report.max_rel_error = float(errs[k])
        report.worst_input = samples(k)


def _fd_grad_rows(fun, v, h=FD_STEP):
    """Central-difference gradient of a row-wise scalar function, shape (n, 3)."""
    g = np.empty_like(v)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        g[:, k] = (fun(v + e) - fun(v - e)) / (2 * h)
    return g


def verify_gradient_identities(seed=42, n_samples=1000, vmax=2.0, perturb=0.0):
    """Compare ``a^E`` and ``a^B`` against central differences in v.

    ``perturb`` adds a constant to the closed-form ``a^E`` and exists so the
    test-suite can confirm that a corrupted kernel is caught.
    """
    rng = np.random.default_rng(seed)
    reports = {
        "aE": IdentityReport("aE", n_samples),
        "aB": IdentityReport("aB", n_samples),
    }
    n = n_samples
    idx = rng.integers(0, 3, size=n)
    v = _random_ball(rng, n, vmax)
    w = _random_units(rng, n)
    rows = np.arange(n)

    def fE(vv):
        u = rel_velocity(vv)
        return (w[rows, idx] + u[rows, idx]) / (1.0 + _dot(u, w))

    def fB(vv):
        u = rel_velocity(vv)
        return cross(w, u)[rows, idx] / (1.0 + _dot(u, w))

    closed_E = aE_all(v, w)[rows, idx] + perturb
    closed_B = aB_all(v, w)[rows, idx]

    def sample(k):
        return {"i": int(idx[k]) + 1, "v": v[k].tolist(), "omega": w[k].tolist()}

    _fill(reports["aE"], _rel_rows(_fd_grad_rows(fE, v), closed_E), sample)
    _fill(reports["aB"], _rel_rows(_fd_grad_rows(fB, v), closed_B), sample)
    return reports


def _bracket_E(v, x, y, mirrored):
    """Rows [..., i, j] of (delta_ij - (omega_i + u_i) u_j / D) / r."""
    r = np.linalg.norm(y - x, axis=-1)[..., None, None]
    w = (y - x) / r[..., 0]
    u = rel_velocity(v)
    wm = w * PARITY if mirrored else w
    D = (1.0 + _dot(u, wm))[..., None, None]
    return (_EYE - (wm + u)[..., :, None] * u[..., None, :] / D) / r


def _bracket_B(v, x, y, mirrored):
    """Rows [..., i, j] of (eps_ijk u_k - (omega x u)_i u_j / D) / r."""
    r = np.linalg.norm(y - x, axis=-1)[..., None, None]
    w = (y - x) / r[..., 0]
    u = rel_velocity(v)
    wm = w * PARITY if mirrored else w
    D = (1.0 + _dot(u, wm))[..., None, None]
    eps = -cross(_EYE, u[..., None, :])  # [i, j] = eps_ijk u_k
    return (eps - cross(wm, u)[..., :, None] * u[..., None, :] / D) / r


def _fd_divergence(bracket, v, x, y, signs, h=FD_STEP):
    total = 0.0
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        total = total + signs[j] * (bracket(v, x, y + e)[..., j] - bracket(v, x, y - e)[..., j]) / (2 * h)
    return total


def verify_divergence_identities(seed=7, n_samples=500, vmax=2.0, rmin=0.5, rmax=2.0):
    """Check the four y-divergence identities behind the integration by parts.

    Families: ``E`` (whole-space), ``E_mirror`` (signed divergence with the
    reflected direction), ``B`` and ``B_mirror``.  Each closed form is compared
    with the central-difference divergence of the bracketed tensor field.
    """
    rng = np.random.default_rng(seed)
    names = ("E", "E_mirror", "B", "B_mirror")
    reports = {k: IdentityReport(k, n_samples) for k in names}
    n = n_samples
    v = _random_ball(rng, n, vmax)
    x = rng.uniform(-1.0, 1.0, size=(n, 3))
    y = x + _random_units(rng, n) * rng.uniform(rmin, rmax, size=(n, 1))
    r = np.linalg.norm(y - x, axis=-1)[:, None]
    w = (y - x) / r
    ones = np.ones(3)
    closed = {
        "E": TE_all(v, w) / r**2,
        "E_mirror": TE_all(v, w * PARITY) / r**2,
        "B": TB_all(v, w) / r**2,
        "B_mirror": TB_all(v, w * PARITY) / r**2,
    }
    fd = {
        "E": _fd_divergence(lambda *a: _bracket_E(*a, False), v, x, y, ones),
        "E_mirror": _fd_divergence(lambda *a: _bracket_E(*a, True), v, x, y, PARITY),
        "B": -_fd_divergence(lambda *a: _bracket_B(*a, False), v, x, y, ones),
        "B_mirror": -_fd_divergence(lambda *a: _bracket_B(*a, True), v, x, y, PARITY),
    }

    def sample(k):
        return {"v": v[k].tolist(), "x": x[k].tolist(), "y": y[k].tolist()}

    for k in names:
        _fill(reports[k], _rel_rows(fd[k], closed[k]), sample)
    return reports
