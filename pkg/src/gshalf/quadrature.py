"""Gauss-Legendre rules on the light-cone regions of a point x at radius t.

Three region families are supported, each split by the wall plane y3 = 0:

* sphere caps      {|y - x| = t} intersected with {y3 > 0} or {y3 < 0}
* ball sectors     {|y - x| < t} intersected with {y3 > 0} or {y3 < 0}
* boundary disks   {|y - x| < t} intersected with {y3 = 0}

Integrands are vectorized callables.  They receive node arrays and must return
either shape (N,) or (N, ...) arrays; the rule contracts the leading axis so a
single call can integrate several field components at once.

Caps and sectors use u = cos(phi) as the polar variable.  The wall crossing
happens at a single value of u for every radius, so splitting the u-range there
keeps every piece smooth, and the rule is exact for polynomials in cos(phi).
The point ``x`` may lie on either side of the wall; this is what lets mirrored
terms be evaluated as direct terms at the reflected point.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .geometry import as_vec3

UPPER = "upper"
LOWER = "lower"
_HALF_SIGN = {UPPER: 1.0, LOWER: -1.0}


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for every rule plus the truncation radius of plane integrals.

    ``bd_truncation=None`` means "choose 40/p" for Helmholtz boundary integrals
    with transform parameter p.
    """

    n_phi: int = 32
    n_theta: int = 32
    n_r: int = 24
    n_disk_r: int = 32
    n_disk_theta: int = 32
    bd_truncation: float | None = None

    def __post_init__(self):
        for name in ("n_phi", "n_theta", "n_r", "n_disk_r", "n_disk_theta"):
            n = getattr(self, name)
            if int(n) != n or n < 2:
                raise ValueError(f"{name} must be an integer >= 2, got {n!r}")
            object.__setattr__(self, name, int(n))
        if self.bd_truncation is not None and not self.bd_truncation > 0:
            raise ValueError(f"bd_truncation must be > 0, got {self.bd_truncation!r}")

    def scaled(self, factor: float) -> "QuadratureSpec":
        """Multiply every node count by ``factor`` (rounded, at least 2)."""
        if not factor > 0:
            raise ValueError("quadrature scale must be positive")

        def s(n):
            return max(2, int(round(n * factor)))

        return replace(
            self,
            n_phi=s(self.n_phi),
            n_theta=s(self.n_theta),
            n_r=s(self.n_r),
            n_disk_r=s(self.n_disk_r),
            n_disk_theta=s(self.n_disk_theta),
        )

    def truncation_for(self, p: float) -> float:
        return self.bd_truncation if self.bd_truncation is not None else 40.0 / p

    def as_dict(self) -> dict:
        return {
            "n_phi": self.n_phi,
            "n_theta": self.n_theta,
            "n_r": self.n_r,
            "n_disk_r": self.n_disk_r,
            "n_disk_theta": self.n_disk_theta,
            "bd_truncation": self.bd_truncation,
        }


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def _leggauss(n: int):
    z, w = np.polynomial.legendre.leggauss(n)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def gauss_legendre(n: int, a, b):
    """Nodes and weights on [a, b]; ``a`` and ``b`` may be arrays (broadcast on a new last axis)."""
    z, w = _leggauss(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (z + 1.0), half * w


def _theta_rule(n):
    th, wt = gauss_legendre(n, 0.0, 2.0 * math.pi)
    return th, wt


def _check_t(t):
    if not (math.isfinite(t) and t > 0):
        raise ValueError(f"t must be > 0, got {t!r}")


def _half_sign(half):
    try:
        return _HALF_SIGN[half]
    except KeyError:
        raise ValueError(f"half must be 'upper' or 'lower', got {half!r}") from None


def _contract(w, vals):
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 0:
        vals = np.full(w.shape, float(vals))
    out = np.tensordot(w, vals, axes=(0, 0))
    return float(out) if out.ndim == 0 else out


def _directions(u, th):
    u, th = np.broadcast_arrays(u, th)
    s = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    return np.stack([s * np.cos(th), s * np.sin(th), u], axis=-1)


# -- sphere caps ----------------------------------------------------------


def cap_nodes(x, t, half, spec=DEFAULT_SPEC):
    """Nodes ``y``, directions ``omega`` and weights of the cap rule.

    Weights include the area element t^2 du dtheta.  Returns empty arrays when
    the cap is empty.
    """
    _check_t(t)
    x = as_vec3(x)
    sig = _half_sign(half)
    # sig * y3 > 0  <=>  sig * u > -sig * x3 / t
    bstar = min(max(-sig * x[2] / t, -1.0), 1.0)
    if bstar >= 1.0:
        return np.empty((0, 3)), np.empty((0, 3)), np.empty(0)
    b, wb = gauss_legendre(spec.n_phi, bstar, 1.0)
    th, wt = _theta_rule(spec.n_theta)
    u = sig * b
    U, TH = np.meshgrid(u, th, indexing="ij")
    W = np.outer(wb, wt) * t * t
    omega = _directions(U, TH).reshape(-1, 3)
    y = x + t * omega
    return y, omega, W.reshape(-1)


def integrate_sphere_cap(x, t, half, g, spec=DEFAULT_SPEC):
    """Integrate ``g(y, omega)`` over the part of the sphere |y - x| = t in ``half``.

    ``half='upper'`` is {y3 > 0}, ``'lower'`` is {y3 < 0}.  The cap boundary is
    at cos(phi) = -x3/t clamped to [-1, 1].
    """
    y, omega, w = cap_nodes(x, t, half, spec)
    if w.size == 0:
        return 0.0
    return _contract(w, g(y, omega))


def integrate_sphere(x, t, g, spec=DEFAULT_SPEC):
    """Full sphere as upper plus lower caps (each piece smooth)."""
    return integrate_sphere_cap(x, t, UPPER, g, spec) + integrate_sphere_cap(x, t, LOWER, g, spec)


# -- ball sectors ---------------------------------------------------------


def _sector_pieces(a, t):
    """(b_lo, b_hi, kind) pieces of the scaled polar variable b = sig*cos(phi).

    ``a`` is sig*x3.  ``kind`` selects the admissible radial interval:
    'full' r in [0, t], 'inner' r in [0, a/(-b)], 'outer' r in [-a/b, t].
    """
    bstar = -a / t
    if a >= 0.0:
        pieces = []
        if bstar < 1.0:
            pieces.append((max(bstar, -1.0), 1.0, "full"))
        if bstar > -1.0 and a > 0.0:
            pieces.append((-1.0, min(bstar, 1.0), "inner"))
        return pieces
    if bstar >= 1.0:
        return []
    return [(bstar, 1.0, "outer")]


def sector_nodes(x, t, half, spec=DEFAULT_SPEC, singular_power=0):
    """Nodes ``y``, radii ``r``, directions ``omega`` and weights of the sector rule.

    The weights carry the Jacobian r^(2 - singular_power) du dtheta dr, so an
    integrand with a 1/r^k factor is integrated by passing it without that factor
    and ``singular_power=k``.
    """
    _check_t(t)
    if singular_power not in (0, 1, 2):
        raise ValueError("singular_power must be 0, 1 or 2")
    x = as_vec3(x)
    sig = _half_sign(half)
    a = sig * x[2]
    th, wt = _theta_rule(spec.n_theta)
    ys, rs, oms, ws = [], [], [], []
    for lo, hi, kind in _sector_pieces(a, t):
        if hi <= lo:
            continue
        b, wb = gauss_legendre(spec.n_phi, lo, hi)
        if kind == "full":
            r0, r1 = np.zeros_like(b), np.full_like(b, t)
        elif kind == "inner":
            r0, r1 = np.zeros_like(b), np.minimum(a / (-b), t)
        else:
            r0, r1 = -a / b, np.full_like(b, t)
        r, wr = gauss_legendre(spec.n_r, r0, r1)  # (nb, nr)
        wr = wr * r ** (2 - singular_power)
        u = sig * b
        omega = _directions(u[:, None], th[None, :])  # (nb, nth, 3)
        # order (b, theta, r)
        R = np.broadcast_to(r[:, None, :], (b.size, th.size, r.shape[1]))
        W = wb[:, None, None] * wt[None, :, None] * wr[:, None, :]
        OM = np.broadcast_to(omega[:, :, None, :], R.shape + (3,))
        Y = x + R[..., None] * OM
        ys.append(Y.reshape(-1, 3))
        rs.append(R.reshape(-1))
        oms.append(OM.reshape(-1, 3))
        ws.append(W.reshape(-1))
    if not ws:
        return np.empty((0, 3)), np.empty(0), np.empty((0, 3)), np.empty(0)
    return np.concatenate(ys), np.concatenate(rs), np.concatenate(oms), np.concatenate(ws)


def integrate_ball_sector(x, t, half, g, spec=DEFAULT_SPEC, singular_power=0):
    """Integrate ``g(y, r, omega)`` over {|y - x| < t} intersected with ``half``.

    For each ray the radial interval inside the half is computed exactly and the
    u-range is split where the wall crossing changes type, so no node is masked.
    """
    y, r, omega, w = sector_nodes(x, t, half, spec, singular_power)
    if w.size == 0:
        return 0.0
    return _contract(w, g(y, r, omega))


def integrate_ball(x, t, g, spec=DEFAULT_SPEC, singular_power=0):
    return integrate_ball_sector(x, t, UPPER, g, spec, singular_power) + integrate_ball_sector(
        x, t, LOWER, g, spec, singular_power
    )


# -- boundary disks -------------------------------------------------------


def _plane_nodes(x, rt_min, rt_max, n_r, n_theta, singular_power):
    x3 = abs(float(x[2]))
    rt_min = max(rt_min, x3)
    if rt_max <= rt_min:
        return np.empty((0, 3)), np.empty(0), np.empty((0, 3)), np.empty(0)
    rt, wr = gauss_legendre(n_r, rt_min, rt_max)
    wr = wr * rt ** (1 - singular_power)  # s ds = rt drt
    th, wt = _theta_rule(n_theta)
    s = np.sqrt(np.clip(rt * rt - x3 * x3, 0.0, None))
    RT, TH = np.meshgrid(rt, th, indexing="ij")
    S = np.broadcast_to(s[:, None], RT.shape)
    y = np.stack(
        [x[0] + S * np.cos(TH), x[1] + S * np.sin(TH), np.zeros_like(S)], axis=-1
    ).reshape(-1, 3)
    rt_flat = RT.reshape(-1)
    omega = (y - x) / rt_flat[:, None]
    return y, rt_flat, omega, np.outer(wr, wt).reshape(-1)


def disk_nodes(x, t, spec=DEFAULT_SPEC, singular_power=0):
    """Nodes of the disk {y3 = 0, |y - x| < t}; weights include dy_par.

    ``r~ = |y - x|`` runs over [|x3|, t] and the weight is r~^(1 - k) dr~ dtheta
    for ``singular_power=k``.
    """
    _check_t(t)
    if singular_power not in (0, 1):
        raise ValueError("singular_power must be 0 or 1")
    x = as_vec3(x)
    return _plane_nodes(x, 0.0, t, spec.n_disk_r, spec.n_disk_theta, singular_power)


def integrate_boundary_disk(x, t, g, spec=DEFAULT_SPEC, singular_power=0):
    """Integrate ``g(y, r~, omega)`` over the retarded disk on the wall.

    ``y`` is the wall point as a 3-vector (y3 = 0) and ``omega = (y - x)/r~``.
    Returns 0 when |x3| >= t.
    """
    y, rt, omega, w = disk_nodes(x, t, spec, singular_power)
    if w.size == 0:
        return 0.0
    return _contract(w, g(y, rt, omega))


def integrate_wall_plane(x, radius, g, n_r, n_theta, singular_power=0, tail_check=True):
    """Integrate ``g(y, r~, omega)`` over the wall out to |y_par - x_par| <= ``radius``.

    When ``tail_check`` is set, the annulus between ``radius`` and twice the
    radius is integrated as a tail estimate and a RuntimeWarning is raised if it
    exceeds 1e-10 of the value.
    """
    x = as_vec3(x)
    x3 = abs(float(x[2]))
    rt_max = math.hypot(radius, x3)
    y, rt, omega, w = _plane_nodes(x, 0.0, rt_max, n_r, n_theta, singular_power)
    if w.size == 0:
        return 0.0
    value = _contract(w, g(y, rt, omega))
    if tail_check:
        y2, rt2, om2, w2 = _plane_nodes(
            x, rt_max, math.hypot(2 * radius, x3), n_r, n_theta, singular_power
        )
        tail = np.abs(_contract(w2, g(y2, rt2, om2)))
        if np.any(tail > 1e-10 * np.abs(value)):
            warnings.warn(
                f"truncated plane integral tail {float(np.max(tail)):.3e} exceeds 1e-10 of value",
                RuntimeWarning,
                stacklevel=2,
            )
    return value
