"""Cold-beam phase-space densities and their charge/current moments.

Units are normalized (m = e = c = 1, single species).  A distribution is a
finite mixture of Gaussian bunches, each carried along one characteristic
with a single momentum, so that

    f(t, x, v) = sum_k  weight_k * S_k(x - X_k(t)) * delta(v - P_k(t)).

Without gravity X_k is a straight line and P_k is constant (free transport).
With a uniform downward force ``-gravity * e3`` every bunch follows the exact
relativistic ballistic orbit, which keeps f an exact Vlasov solution for that
force.  Components flagged ``reflect_at_wall`` carry a specular mirror bunch so
that the trace at x3 = 0 satisfies f(v) = f(v_bar).

Profiles are Gaussian truncated at ``SUPPORT_SIGMAS`` standard deviations; the
truncation gives every bunch a genuine compact support, which the causality
arguments of the field representation rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import PARITY, as_vec3

SUPPORT_SIGMAS = 6.0
_NORM3 = (2.0 * math.pi) ** 1.5


def rel_velocity(v) -> np.ndarray:
    """Relativistic velocity v / sqrt(1 + |v|^2); works on (..., 3) arrays."""
    v = np.asarray(v, dtype=float)
    gamma = np.sqrt(1.0 + np.sum(v * v, axis=-1, keepdims=True))
    return v / gamma


def _asinhc(z):
    """asinh(z) / z, continuous at z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 - z * z / 6.0, np.arcsinh(safe) / safe)
    return out


@dataclass(frozen=True)
class BeamComponent:
    """One Gaussian bunch moving with a single momentum.

    ``weight`` is the total charge of the untruncated profile and ``width`` the
    spatial standard deviation.
    """

    weight: float
    center0: tuple
    velocity: tuple
    width: float
    reflect_at_wall: bool = False

    def __post_init__(self):
        if not math.isfinite(self.weight) or self.weight < 0:
            raise ValueError(f"weight must be finite and >= 0, got {self.weight!r}")
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValueError(f"width must be > 0, got {self.width!r}")
        object.__setattr__(self, "center0", tuple(float(c) for c in as_vec3(self.center0)))
        object.__setattr__(self, "velocity", tuple(float(c) for c in as_vec3(self.velocity)))


@dataclass(frozen=True)
class Beam:
    """A single characteristic: what a component expands into (one or two beams)."""

    weight: float
    center0: np.ndarray
    velocity: np.ndarray
    width: float
    gravity: float = 0.0
    component: int = 0

    @property
    def support_radius(self) -> float:
        return SUPPORT_SIGMAS * self.width

    def momentum(self, s):
        """Momentum P(s); shape (..., 3) for array ``s``."""
        s = np.asarray(s, dtype=float)
        p = np.broadcast_to(self.velocity, s.shape + (3,)).copy()
        if self.gravity != 0.0:
            p[..., 2] -= self.gravity * s
        return p

    def rel_velocity(self, s):
        return rel_velocity(self.momentum(s))

    def rel_acceleration(self, s):
        """d/ds of the relativistic velocity along the orbit."""
        s = np.asarray(s, dtype=float)
        if self.gravity == 0.0:
            return np.zeros(s.shape + (3,))
        p = self.momentum(s)
        gam = np.sqrt(1.0 + np.sum(p * p, axis=-1, keepdims=True))
        force = np.zeros_like(p)
        force[..., 2] = -self.gravity
        pf = np.sum(p * force, axis=-1, keepdims=True)
        return force / gam - p * pf / gam**3

    def position(self, s):
        """Center X(s) of the bunch; shape (..., 3) for array ``s``."""
        s = np.asarray(s, dtype=float)
        c = self.center0
        if self.gravity == 0.0:
            return c + s[..., None] * rel_velocity(self.velocity)
        g = self.gravity
        p0 = self.velocity
        a2 = 1.0 + p0[0] ** 2 + p0[1] ** 2
        gam0 = math.sqrt(a2 + p0[2] ** 2)
        p3 = p0[2] - g * s
        gams = np.sqrt(a2 + p3 * p3)
        # cancellation-free forms of the closed-form orbit
        x3 = c[2] + s * (p3 + p0[2]) / (gams + gam0)
        d = gam0 - p0[2] * (p3 + p0[2]) / (gams + gam0)
        tperp = s * d / a2 * _asinhc(g * s * d / a2)
        out = np.empty(s.shape + (3,))
        out[..., 0] = c[0] + p0[0] * tperp
        out[..., 1] = c[1] + p0[1] * tperp
        out[..., 2] = x3
        return out

    def _offset(self, s, y):
        y = np.asarray(y, dtype=float)
        s = np.broadcast_to(np.asarray(s, dtype=float), y.shape[:-1])
        return y - self.position(s)

    def density(self, s, y):
        """Truncated Gaussian profile at (s, y); zero beyond the support radius."""
        d = self._offset(s, y)
        q = np.sum(d * d, axis=-1) / self.width**2
        val = self.weight / (_NORM3 * self.width**3) * np.exp(-0.5 * q)
        return np.where(q <= SUPPORT_SIGMAS**2, val, 0.0)

    def density_gradient(self, s, y):
        """Spatial gradient of :meth:`density` (inside the support)."""
        d = self._offset(s, y)
        return -self.density(s, y)[..., None] * d / self.width**2

    def density_rate(self, s, y):
        """Time derivative of :meth:`density` at fixed y."""
        grad = self.density_gradient(s, y)
        vhat = self.rel_velocity(np.broadcast_to(np.asarray(s, dtype=float), grad.shape[:-1]))
        return -np.sum(vhat * grad, axis=-1)

    def mirrored(self) -> "Beam":
        return Beam(
            weight=self.weight,
            center0=self.center0 * PARITY,
            velocity=self.velocity * PARITY,
            width=self.width,
            gravity=self.gravity,
            component=self.component,
        )


@dataclass(frozen=True)
class Distribution:
    """Immutable mixture of beam components plus the uniform downward force."""

    components: tuple = ()
    gravity: float = 0.0
    beams: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not math.isfinite(self.gravity):
            raise ValueError("gravity must be finite")
        beams = []
        for k, comp in enumerate(comps):
            if comp.reflect_at_wall and self.gravity != 0.0:
                raise ValueError(
                    "reflect_at_wall is only supported for force-free transport (gravity = 0)"
                )
            b = Beam(
                weight=comp.weight,
                center0=np.array(comp.center0),
                velocity=np.array(comp.velocity),
                width=comp.width,
                gravity=self.gravity,
                component=k,
            )
            beams.append(b)
            if comp.reflect_at_wall:
                beams.append(b.mirrored())
        object.__setattr__(self, "beams", tuple(beams))

    @property
    def vmax(self) -> float:
        if not self.components:
            return 0.0
        return max(float(np.linalg.norm(c.velocity)) for c in self.components)

    @property
    def denominator_floor(self) -> float:
        """Lower bound of 1 + v_hat . omega over all components at t = 0."""
        v = self.vmax
        return 1.0 - v / math.sqrt(1.0 + v * v)

    @property
    def max_weight(self) -> float:
        return max((c.weight for c in self.components), default=0.0)

    def scaled(self, factor: float) -> "Distribution":
        comps = [
            BeamComponent(c.weight * factor, c.center0, c.velocity, c.width, c.reflect_at_wall)
            for c in self.components
        ]
        return Distribution(tuple(comps), self.gravity)

    def translated(self, shift: Sequence[float]) -> "Distribution":
        shift = as_vec3(shift)
        comps = [
            BeamComponent(
                c.weight, tuple(np.array(c.center0) + shift), c.velocity, c.width, c.reflect_at_wall
            )
            for c in self.components
        ]
        return Distribution(tuple(comps), self.gravity)


def support_margin(dist: Distribution) -> float:
    """Smallest height of a component's support above the wall at t = 0."""
    if not dist.components:
        return math.inf
    return min(c.center0[2] - SUPPORT_SIGMAS * c.width for c in dist.components)


def component_density(comp: BeamComponent, t, x, gravity: float = 0.0):
    """Density of one component, including its mirror bunch when reflecting."""
    dist = Distribution((comp,), gravity)
    return sum(b.density(t, as_vec3(x)) for b in dist.beams)


def charge_density(dist: Distribution, t, x):
    x = as_vec3(x)
    rho = np.zeros(x.shape[:-1])
    for b in dist.beams:
        rho = rho + b.density(t, x)
    return rho if rho.ndim else float(rho)


def current_density(dist: Distribution, t, x):
    x = as_vec3(x)
    J = np.zeros(x.shape)
    s = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1])
    for b in dist.beams:
        J = J + b.rel_velocity(s) * b.density(s, x)[..., None]
    return J


def boundary_trace(dist: Distribution, t, y_par, k: int):
    """Density of component ``k`` on the wall point (y1, y2, 0)."""
    if not 0 <= k < len(dist.components):
        raise IndexError(f"component index {k} out of range")
    y_par = np.asarray(y_par, dtype=float)
    y = np.concatenate([y_par, np.zeros(y_par.shape[:-1] + (1,))], axis=-1)
    out = sum(b.density(t, y) for b in dist.beams if b.component == k)
    return out if np.ndim(out) else float(out)


def continuity_residual(dist: Distribution, t: float, x, h: float) -> float:
    """|d_t rho + div J| estimated with second-order central differences."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = as_vec3(x)
    drho = (charge_density(dist, t + h, x) - charge_density(dist, t - h, x)) / (2 * h)
    div = 0.0
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        div += (current_density(dist, t, x + e)[j] - current_density(dist, t, x - e)[j]) / (2 * h)
    return abs(drho + div)
