"""Reference solvers used to cross-check the half-space representation.

* :func:`fd_scalar_wave` - leapfrog scalar wave equation on a node grid with a
  Dirichlet, Neumann (prescribed flux) or absent wall at x3 = 0.
* :func:`staggered_maxwell_pec` - Yee scheme for Maxwell's equations with a
  perfectly conducting wall at x3 = 0 and a conducting outer box.
* :func:`spherical_means_wave` - Kirchhoff formula for the whole-space wave
  equation, evaluated with the cap/sector rules.
* :func:`kirchhoff_halfspace_fields` - E and B from their second-order wave
  equations with odd/even extension across the wall plus the wall waves.  It
  never uses the light-cone decomposition kernels, so it checks the
  representation independently.
* :func:`error_norms` - relative L2 and L-infinity distances.

Outer boxes are sized so that nothing reflected from the artificial faces can
reach the probes before the final time; no absorbing layers are used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .distribution import Distribution, charge_density, current_density
from .geometry import PARITY, as_vec3
from .quadrature import DEFAULT_SPEC, LOWER, UPPER, cap_nodes, integrate_ball, sector_nodes
from .representation import MIRROR_SIGN, ImageChargeField, Scenario, neumann_wave

MAX_CFL = 0.5


@dataclass(frozen=True)
class GridConfig:
    """Box [-extent, extent]^2 x [0, height] (or [-height, height] without a wall).

    ``height`` defaults to ``extent``.  The time step is the largest value not
    above ``cfl * h`` that divides ``T`` evenly.
    """

    extent: float
    h: float
    cfl: float = 0.5
    T: float = 1.0
    height: float | None = None

    def __post_init__(self):
        if not (self.h > 0 and self.extent > 0 and self.T >= 0):
            raise ValueError("extent, h must be > 0 and T >= 0")
        if not 0 < self.cfl <= MAX_CFL:
            raise ValueError(f"cfl must be in (0, {MAX_CFL}], got {self.cfl!r}")
        if self.height is not None and not self.height > 0:
            raise ValueError("height must be > 0")

    @property
    def z_top(self) -> float:
        return self.extent if self.height is None else self.height

    def n_cells(self, length: float) -> int:
        n = length / self.h
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"length {length} is not a multiple of h={self.h}")
        return int(round(n))

    def time_steps(self):
        if self.T == 0:
            return 0, 0.0
        n = int(math.ceil(self.T / (self.cfl * self.h) - 1e-12))
        return n, self.T / n


# -- scalar wave ----------------------------------------------------------


@dataclass
class ScalarWaveSolution:
    axes: tuple
    u: np.ndarray
    t: float

    def sample(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return RegularGridInterpolator(self.axes, self.u, method="linear")(pts)


def fd_scalar_wave(config: GridConfig, wall="dirichlet", source=None, wall_data=None, u0=None, u1=None):
    """Solve u_tt - Laplacian u = source with the given wall condition.

    ``wall`` is ``'dirichlet'`` (u = 0 at x3 = 0), ``'neumann'`` (d3 u =
    ``wall_data(t, X, Y)`` at x3 = 0, imposed through a mirrored ghost plane) or
    ``'none'`` (no wall; the box spans [-height, height] in x3).  Outer faces
    hold u = 0.  ``source(t, X, Y, Z)``, ``u0(X, Y, Z)``, ``u1(X, Y, Z)`` are
    vectorized callables.  Returns the solution at time ``config.T``.
    """
    if wall not in ("dirichlet", "neumann", "none"):
        raise ValueError(f"unknown wall condition {wall!r}")
    h = config.h
    nx = config.n_cells(2 * config.extent)
    zt = config.z_top
    z0 = -zt if wall == "none" else 0.0
    nz = config.n_cells(zt - z0)
    x = np.linspace(-config.extent, config.extent, nx + 1)
    z = np.linspace(z0, zt, nz + 1)
    X, Y, Z = np.meshgrid(x, x, z, indexing="ij")
    nsteps, dt = config.time_steps()

    def lap(u, t):
        out = np.zeros_like(u)
        c = u[1:-1, 1:-1, 1:-1]
        out[1:-1, 1:-1, 1:-1] = (
            u[2:, 1:-1, 1:-1] + u[:-2, 1:-1, 1:-1] + u[1:-1, 2:, 1:-1] + u[1:-1, :-2, 1:-1]
            + u[1:-1, 1:-1, 2:] + u[1:-1, 1:-1, :-2] - 6.0 * c
        ) / (h * h)
        if wall == "neumann":
            q = wall_data(t, X[1:-1, 1:-1, 0], Y[1:-1, 1:-1, 0]) if wall_data is not None else 0.0
            ghost = u[1:-1, 1:-1, 1] - 2.0 * h * q
            c0 = u[1:-1, 1:-1, 0]
            out[1:-1, 1:-1, 0] = (
                u[2:, 1:-1, 0] + u[:-2, 1:-1, 0] + u[1:-1, 2:, 0] + u[1:-1, :-2, 0]
                + u[1:-1, 1:-1, 1] + ghost - 6.0 * c0
            ) / (h * h)
        return out

    def rhs(u, t):
        r = lap(u, t)
        if source is not None:
            r = r + source(t, X, Y, Z)
        return r

    def enforce(u):
        u[0], u[-1] = 0.0, 0.0
        u[:, 0], u[:, -1] = 0.0, 0.0
        u[:, :, -1] = 0.0
        if wall == "none":
            u[:, :, 0] = 0.0
        elif wall == "dirichlet":
            u[:, :, 0] = 0.0
        return u

    u_prev = enforce(np.asarray(u0(X, Y, Z), dtype=float).copy() if u0 is not None else np.zeros(X.shape))
    if nsteps == 0:
        return ScalarWaveSolution((x, x, z), u_prev, 0.0)
    v0 = np.asarray(u1(X, Y, Z), dtype=float) if u1 is not None else 0.0
    u = enforce(u_prev + dt * v0 + 0.5 * dt * dt * rhs(u_prev, 0.0))
    for n in range(1, nsteps):
        u_next = enforce(2.0 * u - u_prev + dt * dt * rhs(u, n * dt))
        u_prev, u = u, u_next
    return ScalarWaveSolution((x, x, z), u, nsteps * dt)


# -- staggered Maxwell ----------------------------------------------------


@dataclass
class MaxwellSolution:
    E_axes: tuple
    B_axes: tuple
    E: tuple
    B: tuple
    t: float
    max_div_B: float
    gauss_drift: float
    drift_flagged: bool

    def sample(self, points):
        """Packed (E1, E2, E3, B1, B2, B3) at ``points`` by trilinear interpolation.

        Staggered components whose grid starts half a cell above the wall are
        linearly extrapolated for probes closer to it.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        cols = [
            RegularGridInterpolator(a, f, bounds_error=False, fill_value=None)(pts)
            for a, f in zip(self.E_axes + self.B_axes, self.E + self.B)
        ]
        return np.stack(cols, axis=-1)


def _halfspace_current(dist, t, pts):
    J = current_density(dist, t, pts)
    return np.where((pts[..., 2] > 0)[..., None], J, 0.0)


def staggered_maxwell_pec(config: GridConfig, dist: Distribution, initial_field_mode="electrostatic"):
    """Yee-scheme Maxwell solver in [-extent, extent]^2 x [0, height] with conducting faces.

    E lives on cell edges at integer steps, B on faces at half steps.  The wall
    x3 = 0 and the outer box are perfect conductors: tangential E on them is
    held at zero.  The current density J = sum v_hat rho is sampled analytically
    at edge centers and half steps, restricted to x3 > 0.  B at the final time
    is the average of the two neighbouring half steps.
    """
    h = config.h
    nx = config.n_cells(2 * config.extent)
    nz = config.n_cells(config.z_top)
    e = config.extent
    xn = np.linspace(-e, e, nx + 1)
    zn = np.linspace(0.0, config.z_top, nz + 1)
    xc = 0.5 * (xn[1:] + xn[:-1])
    zc = 0.5 * (zn[1:] + zn[:-1])
    E_axes = ((xc, xn, zn), (xn, xc, zn), (xn, xn, zc))
    B_axes = ((xn, xc, zc), (xc, xn, zc), (xc, xc, zn))

    def grid_points(axes):
        A, Bm, C = np.meshgrid(*axes, indexing="ij")
        return np.stack([A, Bm, C], axis=-1)

    E_pts = [grid_points(a) for a in E_axes]
    if initial_field_mode == "electrostatic":
        field = ImageChargeField.from_distribution(dist)
        Ex, Ey, Ez = (field.field(p)[..., k].copy() for k, p in enumerate(E_pts))
    elif initial_field_mode == "zero":
        Ex, Ey, Ez = (np.zeros(p.shape[:-1]) for p in E_pts)
    else:
        raise ValueError(f"unknown initial_field_mode {initial_field_mode!r}")

    def pec(Ex, Ey, Ez):
        Ex[:, 0, :], Ex[:, -1, :], Ex[:, :, 0], Ex[:, :, -1] = 0.0, 0.0, 0.0, 0.0
        Ey[0, :, :], Ey[-1, :, :], Ey[:, :, 0], Ey[:, :, -1] = 0.0, 0.0, 0.0, 0.0
        Ez[0, :, :], Ez[-1, :, :], Ez[:, 0, :], Ez[:, -1, :] = 0.0, 0.0, 0.0, 0.0

    pec(Ex, Ey, Ez)
    Bx = np.zeros((nx + 1, nx, nz))
    By = np.zeros((nx, nx + 1, nz))
    Bz = np.zeros((nx, nx, nz + 1))

    def curl_E(Ex, Ey, Ez):
        cx = (Ez[:, 1:, :] - Ez[:, :-1, :] - Ey[:, :, 1:] + Ey[:, :, :-1]) / h
        cy = (Ex[:, :, 1:] - Ex[:, :, :-1] - Ez[1:, :, :] + Ez[:-1, :, :]) / h
        cz = (Ey[1:, :, :] - Ey[:-1, :, :] - Ex[:, 1:, :] + Ex[:, :-1, :]) / h
        return cx, cy, cz

    def div_B(Bx, By, Bz):
        return (
            (Bx[1:] - Bx[:-1]) / h + (By[:, 1:] - By[:, :-1]) / h + (Bz[:, :, 1:] - Bz[:, :, :-1]) / h
        )

    def div_E(Ex, Ey, Ez):
        return (
            (Ex[1:, 1:-1, 1:-1] - Ex[:-1, 1:-1, 1:-1])
            + (Ey[1:-1, 1:, 1:-1] - Ey[1:-1, :-1, 1:-1])
            + (Ez[1:-1, 1:-1, 1:] - Ez[1:-1, 1:-1, :-1])
        ) / h

    nsteps, dt = config.time_steps()
    div0 = div_E(Ex, Ey, Ez)
    # B at the first half step from Faraday
    cx, cy, cz = curl_E(Ex, Ey, Ez)
    Bx -= 0.5 * dt * cx
    By -= 0.5 * dt * cy
    Bz -= 0.5 * dt * cz
    B_prev = (Bx.copy(), By.copy(), Bz.copy())
    max_div_B = float(np.max(np.abs(div_B(Bx, By, Bz)))) if Bx.size else 0.0
    four_pi = 4.0 * math.pi
    for n in range(nsteps):
        th = (n + 0.5) * dt
        Jx = _halfspace_current(dist, th, E_pts[0][:, 1:-1, 1:-1])[..., 0]
        Jy = _halfspace_current(dist, th, E_pts[1][1:-1, :, 1:-1])[..., 1]
        Jz = _halfspace_current(dist, th, E_pts[2][1:-1, 1:-1, :])[..., 2]
        Ex[:, 1:-1, 1:-1] += dt * (
            (Bz[:, 1:, 1:-1] - Bz[:, :-1, 1:-1] - By[:, 1:-1, 1:] + By[:, 1:-1, :-1]) / h - four_pi * Jx
        )
        Ey[1:-1, :, 1:-1] += dt * (
            (Bx[1:-1, :, 1:] - Bx[1:-1, :, :-1] - Bz[1:, :, 1:-1] + Bz[:-1, :, 1:-1]) / h - four_pi * Jy
        )
        Ez[1:-1, 1:-1, :] += dt * (
            (By[1:, 1:-1, :] - By[:-1, 1:-1, :] - Bx[1:-1, 1:, :] + Bx[1:-1, :-1, :]) / h - four_pi * Jz
        )
        B_prev = (Bx.copy(), By.copy(), Bz.copy())
        cx, cy, cz = curl_E(Ex, Ey, Ez)
        Bx -= dt * cx
        By -= dt * cy
        Bz -= dt * cz
        max_div_B = max(max_div_B, float(np.max(np.abs(div_B(Bx, By, Bz)))))
    if nsteps:
        B_final = tuple(0.5 * (a + b) for a, b in zip(B_prev, (Bx, By, Bz)))
    else:
        B_final = (np.zeros_like(Bx), np.zeros_like(By), np.zeros_like(Bz))
    # Gauss-law drift against the analytic charge change, relative to 4 pi rho scale
    node_pts = np.stack(np.meshgrid(xn[1:-1], xn[1:-1], zn[1:-1], indexing="ij"), axis=-1)
    rho0 = charge_density(dist, 0.0, node_pts)
    rhoT = charge_density(dist, nsteps * dt, node_pts)
    scale = four_pi * max(float(np.max(np.abs(rho0))), float(np.max(np.abs(rhoT))), 0.0)
    drift_field = div_E(Ex, Ey, Ez) - div0 - four_pi * (rhoT - rho0)
    drift = float(np.max(np.abs(drift_field))) / scale if scale > 0 else float(np.max(np.abs(drift_field)))
    # analytic J is not discretely charge conserving, so the drift is O(h^2); it is
    # reported and flagged, not treated as an error
    flagged = drift > 1e-6
    return MaxwellSolution(E_axes, B_axes, (Ex, Ey, Ez), B_final, nsteps * dt, max_div_B, drift, flagged)


# -- Kirchhoff references -------------------------------------------------


def _fd_gradient(fun, y, h=1e-4):
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        cols.append((fun(y + e) - fun(y - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def spherical_means_wave(u0, u1, source, t, x, spec=DEFAULT_SPEC, grad_u0=None):
    """Whole-space solution of u_tt - Laplacian u = source at (t, x).

    Kirchhoff data term over the full sphere of radius t plus the retarded
    volume integral (1/4pi) int_{|y-x|<t} source(t - r, y) / r dy.  ``u0``, ``u1``
    and ``grad_u0`` take (N, 3) arrays; ``source(s, y)`` takes (N,) and (N, 3).
    Any of them may be None for zero.  Without ``grad_u0`` the gradient is
    approximated by central differences.
    """
    if not t > 0:
        raise ValueError("t must be > 0")
    x = as_vec3(x)
    total = 0.0
    if u0 is not None or u1 is not None:
        for half in (UPPER, LOWER):
            y, om, w = cap_nodes(x, t, half, spec)
            if w.size == 0:
                continue
            vals = np.zeros(len(w))
            if u1 is not None:
                vals = vals + t * np.asarray(u1(y), dtype=float)
            if u0 is not None:
                grad = grad_u0(y) if grad_u0 is not None else _fd_gradient(u0, y)
                vals = vals + np.asarray(u0(y), dtype=float) + np.sum(grad * (y - x), axis=-1)
            total += (w @ vals) / (4.0 * math.pi * t * t)
    if source is not None:

        def g(y, r, om):
            return np.asarray(source(t - r, y), dtype=float) / (4.0 * math.pi)

        total += integrate_ball(x, t, g, spec, singular_power=1)
    return float(total)


def _wave_sources(dist, s, y):
    """Packed right-hand sides [-4pi(grad rho + dJ/dt), 4pi curl J] at (s, y), y3 > 0."""
    out = np.zeros(y.shape[:-1] + (6,))
    for b in dist.beams:
        rho = b.density(s, y)
        idx = np.nonzero(rho)[0]
        if idx.size == 0:
            continue
        si, yi = s[idx], y[idx]
        grad = b.density_gradient(si, yi)
        rate = b.density_rate(si, yi)
        u = b.rel_velocity(si)
        acc = b.rel_acceleration(si)
        dJ = acc * rho[idx, None] + u * rate[:, None]
        out[idx, :3] += -4.0 * math.pi * (grad + dJ)
        out[idx, 3:] += 4.0 * math.pi * np.cross(grad, u)
    return out


def kirchhoff_halfspace_fields(t, x, scen: Scenario):
    """Packed (E, B) at (t, x) from the second-order wave equations.

    E1, E2, B3 are odd and E3, B1, B2 even across the wall; the even components
    receive the wall waves that carry the Neumann conditions
    d3 E3 = 4 pi rho, d3 B1 = 4 pi J2, d3 B2 = -4 pi J1.  Only gravity-driven
    forces are supported (no given force fields).
    """
    if scen.force_field is not None:
        raise ValueError("the Kirchhoff reference does not support given force fields")
    x = as_vec3(x)
    if x[2] < 0 or not t > 0:
        raise ValueError("need t > 0 and x3 >= 0")
    spec = scen.spec
    init = scen.initial
    total = np.zeros(6)
    for half in (UPPER, LOWER):
        sign = np.ones(6) if half == UPPER else MIRROR_SIGN
        par = np.ones(3) if half == UPPER else PARITY
        y, om, w = cap_nodes(x, t, half, spec)
        if w.size:
            ys = y * par
            F, G, dF = init.values(ys), init.gradients(ys), init.rates(ys)
            vals = t * dF + F + np.einsum("nij,nj->ni", G, (ys - x * par))
            total += sign * (w @ vals) / (4.0 * math.pi * t * t)
        yv, r, om, wv = sector_nodes(x, t, half, spec, singular_power=1)
        if wv.size:
            src = _wave_sources(scen.dist, t - r, yv * par)
            total += sign * (wv @ src) / (4.0 * math.pi)
    dist = scen.dist

    def wall_moment(k):
        def dens(s, yp):
            y = np.concatenate([yp, np.zeros((len(yp), 1))], axis=1)
            val = np.zeros(len(yp))
            for b in dist.beams:
                rho = b.density(s, y)
                val = val + (rho if k is None else rho * b.rel_velocity(s)[:, k])
            return val

        return dens

    total[2] += neumann_wave(t, x, wall_moment(None), spec)
    total[3] += neumann_wave(t, x, wall_moment(1), spec)
    total[4] -= neumann_wave(t, x, wall_moment(0), spec)
    return total


def coulomb_image_field_quadrature(dist: Distribution, x, spec=DEFAULT_SPEC):
    """E0 at ``x`` by direct quadrature of each bunch against the image-pair kernel.

    Integrates S_k(y - X_k(0)) [(x - y)/|x - y|^3 - (x - y_bar)/|x - y_bar|^3]
    over the ball of radius six widths around each bunch center.  Accurate for
    ``x`` outside the supports, where the kernel is smooth.
    """
    x = as_vec3(x)
    out = np.zeros(3)
    for b in dist.beams:
        c = b.position(0.0)
        if c[2] <= 0:
            continue

        def g(y, r, om, b=b):
            rho = b.density(0.0, y)
            d1 = x - y
            d2 = x - y * PARITY
            k = d1 / np.linalg.norm(d1, axis=-1, keepdims=True) ** 3
            k -= d2 / np.linalg.norm(d2, axis=-1, keepdims=True) ** 3
            return rho[:, None] * k

        out += integrate_ball(c, b.support_radius, g, spec)
    return out


def error_norms(a, b):
    """(||a - b||_2 / ||b||_2, max|a - b| / max|b|) over flattened samples."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("sample sets must have equal length")
    if b.size == 0 or not np.any(b):
        raise ValueError("reference sample set is empty or all zero")
    d = a - b
    return float(np.linalg.norm(d) / np.linalg.norm(b)), float(np.max(np.abs(d)) / np.max(np.abs(b)))
