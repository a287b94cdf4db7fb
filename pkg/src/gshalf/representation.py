"""Half-space retarded representation of (E, B) for cold-beam Vlasov sources.

The fields at (t, x), x3 >= 0, are assembled from term groups over the backward
light cone of x.  Each group exists in a direct form, integrated over
{y3 > 0}, and in a mirrored form, integrated over {y3 < 0} with the source
evaluated at the reflected point y_bar and kernels evaluated at the reflected
direction omega_bar:

========  ===================================================  ==========
group     integrand (per beam, f -> rho_b, v -> P_b(s))        region
========  ===================================================  ==========
data      Kirchhoff data t*dF0 + F0 + grad F0 . (y - x)        cap
T         TE / TB kernels times f / r^2                        sector
force     -a^E . F, +a^B . F times f / r (F = E_f + v x B_f - g e3)  sector
cone      -initial_E, +initial_B times f(0, y) / t             cap
disk      boundary_E / boundary_B times f / r~ on the wall     disk
========  ===================================================  ==========

Mirrored groups carry the sign ``-iota_i`` for E and ``+iota_i`` for B, with
iota = (1, 1, -1).  Two wall terms complete the result: the Neumann wave
-2 int rho / r~ added to E3 and the tangential current waves added to B1, B2.

Components are packed as 6-vectors (E1, E2, E3, B1, B2, B3) throughout.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .distribution import SUPPORT_SIGMAS, Distribution, charge_density, current_density, rel_velocity
from .geometry import PARITY, as_vec3, cross
from .kernels import (
    TB_all,
    TE_all,
    aB_all,
    aE_all,
    boundary_B_all,
    boundary_E_all,
    initial_B_all,
    initial_E_all,
)
from .quadrature import (
    DEFAULT_SPEC,
    LOWER,
    UPPER,
    QuadratureSpec,
    cap_nodes,
    disk_nodes,
    integrate_boundary_disk,
    integrate_wall_plane,
    sector_nodes,
)

#: Sign applied to a mirrored group, per packed component (-iota for E, +iota for B).
MIRROR_SIGN = np.concatenate([-PARITY, PARITY])
#: Parity of each packed component under reflection of the field itself.
FIELD_PARITY = MIRROR_SIGN

GROUPS = ("data", "T", "force", "cone", "disk")
T_MIN = 1e-6



# -- initial data ---------------------------------------------------------


def _series_coeffs(n_terms=14):
    c = np.empty(n_terms)
    for n in range(n_terms):
        c[n] = (-1) ** n / (2.0**n * math.factorial(n) * (2 * n + 3))
    return c * math.sqrt(2.0 / math.pi)


_H_COEFFS = _series_coeffs()
_SERIES_CUT = 0.5


def _enclosed_profile(s):
    """h(s) = Q(s)/s^3 and h'(s)/s for the truncated Gaussian, Q the enclosed fraction."""
    s = np.asarray(s, dtype=float)
    h = np.empty_like(s)
    dh_over_s = np.empty_like(s)
    small = s < _SERIES_CUT
    if np.any(small):
        z = s[small] ** 2
        h[small] = np.polynomial.polynomial.polyval(z, _H_COEFFS)
        k = np.arange(1, _H_COEFFS.size)
        dh_over_s[small] = np.polynomial.polynomial.polyval(z, 2.0 * k * _H_COEFFS[1:])
    big = ~small
    if np.any(big):
        sb = np.minimum(s[big], SUPPORT_SIGMAS)
        q = erf(sb / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * sb * np.exp(-0.5 * sb * sb)
        dq = np.where(
            s[big] < SUPPORT_SIGMAS, math.sqrt(2.0 / math.pi) * sb * sb * np.exp(-0.5 * sb * sb), 0.0
        )
        r = s[big]
        h[big] = q / r**3
        dh_over_s[big] = (dq / r**3 - 3.0 * q / r**4) / r
    return h, dh_over_s


@dataclass(frozen=True)
class ImageChargeField:
    """Closed-form field of truncated Gaussian charges and their negative images."""

    charges: tuple  # (q, center (3,), width)

    @classmethod
    def from_distribution(cls, dist: Distribution) -> "ImageChargeField":
        charges = []
        for b in dist.beams:
            c = np.array(b.position(0.0), dtype=float)
            if c[2] <= 0.0:
                continue  # mirror bunch of a reflecting component lies outside the domain
            charges.append((b.weight, c, b.width))
            charges.append((-b.weight, c * PARITY, b.width))
        return cls(tuple(charges))

    def field(self, y):
        y = as_vec3(y)
        out = np.zeros(y.shape)
        for q, c, w in self.charges:
            d = y - c
            s = np.linalg.norm(d, axis=-1) / w
            h, _ = _enclosed_profile(s)
            out += (q * h / w**3)[..., None] * d
        return out

    def gradient(self, y):
        """d E_i / d y_j, shape (..., 3, 3) indexed [i, j]."""
        y = as_vec3(y)
        out = np.zeros(y.shape + (3,))
        eye = np.eye(3)
        for q, c, w in self.charges:
            d = y - c
            s = np.linalg.norm(d, axis=-1) / w
            h, dh = _enclosed_profile(s)
            out += (q * h / w**3)[..., None, None] * eye
            out += (q * dh / w**5)[..., None, None] * d[..., :, None] * d[..., None, :]
        return out

    def curl(self, y):
        return np.zeros(as_vec3(y).shape)


def electrostatic_initial_field(dist: Distribution) -> ImageChargeField:
    """Constraint-compatible E0 for ``dist``: each bunch plus its negative mirror image.

    E0 is tangentially zero on the wall and satisfies div E0 = 4 pi rho(0, .) in
    the half space as long as every bunch's support lies in {y3 >= 0}.
    """
    return ImageChargeField.from_distribution(dist)


def initial_time_derivatives(E0, B0, J0, x, h=1e-3):
    """(dE/dt, dB/dt) at t = 0 from Ampere and Faraday.

    ``E0`` and ``B0`` are callables or objects with a ``curl`` method; when no
    closed-form curl is available a fourth-order central difference with step
    ``h`` is used.  ``J0`` is a callable returning the current at t = 0.
    """
    x = as_vec3(x)
    return _curl(B0, x, h) - 4.0 * math.pi * np.asarray(J0(x)), -_curl(E0, x, h)


def _curl(F, x, h):
    if F is None:
        return np.zeros(x.shape)
    if hasattr(F, "curl"):
        return np.asarray(F.curl(x), dtype=float)
    jac = np.zeros(x.shape + (3,))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        jac[..., :, j] = (
            -np.asarray(F(x + 2 * e)) + 8 * np.asarray(F(x + e)) - 8 * np.asarray(F(x - e)) + np.asarray(F(x - 2 * e))
        ) / (12 * h)
    return np.stack(
        [jac[..., 2, 1] - jac[..., 1, 2], jac[..., 0, 2] - jac[..., 2, 0], jac[..., 1, 0] - jac[..., 0, 1]],
        axis=-1,
    )


@dataclass(frozen=True)
class InitialData:
    """E0, B0 and their time derivatives packed as 6-vectors.

    ``mode='zero'`` sets E0 = B0 = 0; ``'electrostatic'`` uses the image-charge
    field.  In both modes dE0/dt = curl B0 - 4 pi J(0) and dB0/dt = -curl E0.
    """

    dist: Distribution
    mode: str = "zero"
    e_field: ImageChargeField | None = None

    def __post_init__(self):
        if self.mode not in ("zero", "electrostatic"):
            raise ValueError(f"initial_field_mode must be 'zero' or 'electrostatic', got {self.mode!r}")
        if self.mode == "electrostatic" and self.e_field is None:
            object.__setattr__(self, "e_field", electrostatic_initial_field(self.dist))

    def values(self, y):
        y = as_vec3(y)
        out = np.zeros(y.shape[:-1] + (6,))
        if self.e_field is not None:
            out[..., :3] = self.e_field.field(y)
        return out

    def gradients(self, y):
        y = as_vec3(y)
        out = np.zeros(y.shape[:-1] + (6, 3))
        if self.e_field is not None:
            out[..., :3, :] = self.e_field.gradient(y)
        return out

    def rates(self, y):
        y = as_vec3(y)
        out = np.zeros(y.shape[:-1] + (6,))
        if self.dist.beams:
            dE, dB = initial_time_derivatives(self.e_field, None, lambda z: current_density(self.dist, 0.0, z), y)
            out[..., :3] = dE
            out[..., 3:] = dB
        return out

    def sample(self, y, extended=False):
        """(values, gradients, rates); ``extended`` applies the odd/even extension from y_bar."""
        if not extended:
            return self.values(y), self.gradients(y), self.rates(y)
        yb = as_vec3(y) * PARITY
        F, G, dF = self.values(yb), self.gradients(yb), self.rates(yb)
        return (
            F * MIRROR_SIGN,
            G * MIRROR_SIGN[:, None] * PARITY[None, :],
            dF * MIRROR_SIGN,
        )


# -- force fields ---------------------------------------------------------


@dataclass(frozen=True)
class GivenField:
    """Uniform (E_f, B_f) inside an axis-aligned box, zero outside."""

    E: tuple = (0.0, 0.0, 0.0)
    B: tuple = (0.0, 0.0, 0.0)
    lo: tuple = (-math.inf, -math.inf, -math.inf)
    hi: tuple = (math.inf, math.inf, math.inf)

    def __post_init__(self):
        for name in ("E", "B", "lo", "hi"):
            val = np.asarray(getattr(self, name), dtype=float)
            if val.shape != (3,):
                raise ValueError(f"given field '{name}' must have 3 components")
            object.__setattr__(self, name, tuple(float(v) for v in val))
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("given field support box has lo > hi")

    def at(self, y):
        y = np.asarray(y, dtype=float)
        inside = np.all((y >= np.array(self.lo)) & (y <= np.array(self.hi)), axis=-1)
        m = inside[..., None].astype(float)
        return m * np.array(self.E), m * np.array(self.B)


# -- scenario -------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """Everything the representation needs besides the evaluation point.

    ``g`` must equal ``dist.gravity``: the beams then follow the orbits of the
    force -g e3 exactly, so f solves the transport equation used by the force
    terms.  ``no_contact`` declares that no mass should reach the wall; a
    warning is issued if the boundary trace is nonzero anyway.
    """

    dist: Distribution
    g: float = 0.0
    initial_field_mode: str = "zero"
    force_field: GivenField | None = None
    horizon: float = 1.0
    spec: QuadratureSpec = DEFAULT_SPEC
    no_contact: bool = False
    initial: InitialData = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.g != self.dist.gravity:
            raise ValueError(
                f"g={self.g!r} differs from the distribution's gravity {self.dist.gravity!r}"
            )
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        object.__setattr__(self, "initial", InitialData(self.dist, self.initial_field_mode))

    @property
    def has_force(self) -> bool:
        return self.g != 0.0 or self.force_field is not None

    def with_spec(self, spec: QuadratureSpec) -> "Scenario":
        return Scenario(
            self.dist, self.g, self.initial_field_mode, self.force_field, self.horizon, spec, self.no_contact
        )

    def scaled(self, factor: float) -> "Scenario":
        return Scenario(
            self.dist.scaled(factor),
            self.g,
            self.initial_field_mode,
            self.force_field,
            self.horizon,
            self.spec,
            self.no_contact,
        )


@dataclass(frozen=True)
class FieldSample:
    t: float
    x: tuple
    E: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        if self.x[2] < 0:
            raise ValueError("field samples live in x3 >= 0")

    def as_row(self):
        return [self.t, *self.x, *self.E, *self.B]


# -- raw group evaluators -------------------------------------------------


def _beam_sum(beams, s, y, w, kernel):
    """sum_b sum_nodes w * kernel(b, P_b(s), idx) * rho_b(s, y) over active nodes."""
    out = np.zeros(6)
    for b in beams:
        rho = b.density(s, y)
        idx = np.nonzero(rho)[0]
        if idx.size == 0:
            continue
        P = b.momentum(s[idx])
        out += (w[idx] * rho[idx]) @ kernel(b, P, idx)
    return out


def _data_group(t, y_src, disp, w, scen, extended):
    F, G, dF = scen.initial.sample(y_src, extended)
    if not (np.any(F) or np.any(G) or np.any(dF)):
        return np.zeros(6)
    vals = t * dF + F + np.einsum("nij,nj->ni", G, disp)
    return (w @ vals) / (4.0 * math.pi * t * t)


def _cone_group(t, y_src, om, w, scen):
    s = np.zeros(len(w))

    def kernel(b, P, idx):
        return np.concatenate([-initial_E_all(P, om[idx]), initial_B_all(P, om[idx])], axis=-1)

    return _beam_sum(scen.dist.beams, s, y_src, w / t, kernel)


def _source_groups(t, y_src, r, om, w2, scen):
    s = t - r

    def tkernel(b, P, idx):
        return np.concatenate([TE_all(P, om[idx]), TB_all(P, om[idx])], axis=-1)

    T = _beam_sum(scen.dist.beams, s, y_src, w2, tkernel)
    if not scen.has_force:
        return T, np.zeros(6)

    def fkernel(b, P, idx):
        F = np.zeros((idx.size, 3))
        F[:, 2] = -scen.g
        if scen.force_field is not None:
            Ef, Bf = scen.force_field.at(y_src[idx])
            F = F + Ef + cross(rel_velocity(P), Bf)
        aE = aE_all(P, om[idx])
        aB = aB_all(P, om[idx])
        return np.concatenate(
            [-np.einsum("nik,nk->ni", aE, F), np.einsum("nik,nk->ni", aB, F)], axis=-1
        )

    force = _beam_sum(scen.dist.beams, s, y_src, w2 * r, fkernel)
    return T, force


def _disk_group(t, y, rt, om, w1, scen):
    def kernel(b, P, idx):
        return np.concatenate([boundary_E_all(P, om[idx]), boundary_B_all(P, om[idx])], axis=-1)

    return _beam_sum(scen.dist.beams, t - rt, y, w1, kernel)


def _wall_group(t, y, rt, w1, scen):
    """Neumann wave in E3 and tangential current waves in B1, B2."""

    def kernel(b, P, idx):
        u = rel_velocity(P)
        out = np.zeros((idx.size, 6))
        out[:, 2] = -2.0
        out[:, 3] = -2.0 * u[:, 1]
        out[:, 4] = 2.0 * u[:, 0]
        return out

    return _beam_sum(scen.dist.beams, t - rt, y, w1, kernel)


def _region_groups(t, x_ref, cap, sector, scen, extended=False):
    y_c, disp, om_c, w_c = cap
    y_s, r, om_s, w_s = sector
    out = {}
    out["data"] = _data_group(t, y_c, disp, w_c, scen, extended) if w_c.size else np.zeros(6)
    out["cone"] = _cone_group(t, y_c, om_c, w_c, scen) if w_c.size else np.zeros(6)
    if w_s.size:
        out["T"], out["force"] = _source_groups(t, y_s, r, om_s, w_s, scen)
    else:
        out["T"], out["force"] = np.zeros(6), np.zeros(6)
    return out


def direct_groups(t, z, scen: Scenario, include_disk=True):
    """Direct term groups at ``z`` over {y3 > 0}; ``z`` may lie on either side of the wall.

    Returns a dict mapping group name to a packed 6-vector.
    """
    z = as_vec3(z)
    spec = scen.spec
    y, om, w = cap_nodes(z, t, UPPER, spec)
    ys, r, oms, ws = sector_nodes(z, t, UPPER, spec, singular_power=2)
    out = _region_groups(t, z, (y, y - z, om, w), (ys, r, oms, ws), scen)
    if include_disk:
        yd, rt, omd, wd = disk_nodes(z, t, spec, singular_power=1)
        out["disk"] = _disk_group(t, yd, rt, omd, wd, scen) if wd.size else np.zeros(6)
    return out


def mirrored_groups(t, x, scen: Scenario):
    """Mirrored term groups at ``x``, signs included.

    Integrates over {y3 < 0} with f and the force fields at y_bar and kernels at
    omega_bar, then multiplies by -iota_i (E) or +iota_i (B).
    """
    x = as_vec3(x)
    spec = scen.spec
    xb = x * PARITY
    y, om, w = cap_nodes(x, t, LOWER, spec)
    ys, r, oms, ws = sector_nodes(x, t, LOWER, spec, singular_power=2)
    yb = y * PARITY
    raw = _region_groups(
        t, xb, (yb, yb - xb, om * PARITY, w), (ys * PARITY, r, oms * PARITY, ws), scen
    )
    yd, rt, omd, wd = disk_nodes(x, t, spec, singular_power=1)
    raw["disk"] = _disk_group(t, yd, rt, omd * PARITY, wd, scen) if wd.size else np.zeros(6)
    return {k: MIRROR_SIGN * v for k, v in raw.items()}


def wall_terms(t, x, scen: Scenario):
    """Packed 6-vector of the Neumann and tangential-current wall waves at ``x``."""
    yd, rt, _, wd = disk_nodes(as_vec3(x), t, scen.spec, singular_power=1)
    return _wall_group(t, yd, rt, wd, scen) if wd.size else np.zeros(6)


def term_groups(t, x, scen: Scenario):
    """All term groups at (t, x): {'direct': {...}, 'mirrored': {...}, 'wall': vec6}."""
    return {
        "direct": direct_groups(t, x, scen),
        "mirrored": mirrored_groups(t, x, scen),
        "wall": wall_terms(t, x, scen),
    }


# -- assembled fields -----------------------------------------------------


def _check_point(t, x):
    x = as_vec3(x)
    if x.shape != (3,):
        raise ValueError("x must be a single 3-vector")
    if x[2] < 0:
        raise ValueError(f"x3 must be >= 0, got {x[2]!r}")
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    if 0 < t < T_MIN:
        raise ValueError(f"t must be 0 or > {T_MIN}, got {t!r}")
    return x


def represent_fields(t, x, scen: Scenario) -> np.ndarray:
    """Packed (E1, E2, E3, B1, B2, B3) of the half-space representation at (t, x)."""
    x = _check_point(t, x)
    if t == 0:
        return scen.initial.values(x[None])[0]
    groups = term_groups(t, x, scen)
    total = np.zeros(6)
    for name in GROUPS:
        total = total + groups["direct"][name]
    for name in GROUPS:
        total = total + groups["mirrored"][name]
    if scen.no_contact and np.any(groups["wall"] != 0.0):
        warnings.warn("distribution mass reaches the wall in a no-contact scenario", RuntimeWarning, stacklevel=2)
    return total + groups["wall"]


def represent_E(i, t, x, scen: Scenario) -> float:
    if i not in (1, 2, 3):
        raise ValueError(f"component index must be 1, 2 or 3, got {i!r}")
    return float(represent_fields(t, x, scen)[i - 1])


def represent_B(i, t, x, scen: Scenario) -> float:
    if i not in (1, 2, 3):
        raise ValueError(f"component index must be 1, 2 or 3, got {i!r}")
    return float(represent_fields(t, x, scen)[i + 2])


def represent_sample(t, x, scen: Scenario) -> FieldSample:
    v = represent_fields(t, x, scen)
    return FieldSample(float(t), tuple(float(c) for c in as_vec3(x)), v[:3].copy(), v[3:].copy())


def whole_space_fields(t, x, scen: Scenario) -> np.ndarray:
    """Whole-space retarded formula at (t, x) with no wall terms.

    Integrates over the full sphere and ball; the initial data below the wall
    are the odd (tangential E, normal B) and even (normal E, tangential B)
    extensions, and f is evaluated where it is, with no reflected copy.
    """
    x = _check_point(t, x)
    if t == 0:
        return scen.initial.values(x[None])[0]
    spec = scen.spec
    up = direct_groups(t, x, scen, include_disk=False)
    y, om, w = cap_nodes(x, t, LOWER, spec)
    ys, r, oms, ws = sector_nodes(x, t, LOWER, spec, singular_power=2)
    low = _region_groups(t, x, (y, y - x, om, w), (ys, r, oms, ws), scen, extended=True)
    total = np.zeros(6)
    for name in ("data", "T", "force", "cone"):
        total = total + up[name]
    for name in ("data", "T", "force", "cone"):
        total = total + low[name]
    return total


def whole_space_field(which, i, t, x, scen: Scenario) -> float:
    if which not in ("E", "B") or i not in (1, 2, 3):
        raise ValueError("which must be 'E' or 'B' and i in 1..3")
    return float(whole_space_fields(t, x, scen)[(0 if which == "E" else 3) + i - 1])


def _eval_chunk(args):
    scen, pts = args
    return [represent_fields(p[0], p[1:4], scen) for p in pts]


def evaluate_points(points, scen: Scenario, workers: int = 1) -> np.ndarray:
    """Fields at rows (t, x1, x2, x3); each row is evaluated independently.

    Results are identical for any ``workers`` because no reduction crosses rows.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 4)
    if workers <= 1 or len(pts) < 2:
        return np.array([represent_fields(p[0], p[1:4], scen) for p in pts]).reshape(-1, 6)
    chunks = np.array_split(np.arange(len(pts)), min(workers, len(pts)))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_eval_chunk, [(scen, pts[c]) for c in chunks]))
    return np.array([row for part in parts for row in part]).reshape(-1, 6)


# -- wall machinery -------------------------------------------------------


def helmholtz_phi(p, x) -> float:
    """Fundamental solution exp(-p|x|)/(4 pi |x|) of p^2 - Laplacian."""
    if p < 0:
        raise ValueError("p must be >= 0")
    r = float(np.linalg.norm(as_vec3(x)))
    if r == 0.0:
        raise ValueError("helmholtz_phi is singular at x = 0")
    return math.exp(-p * r) / (4.0 * math.pi * r)


def helmholtz_neumann_boundary_rep(p, x, neumann_data, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Solution at ``x`` of (p^2 - Laplacian) u = 0 in {x3 > 0} from its Neumann data.

    u(x) = int_wall (Phi(y - x) + Phi(y - x_bar)) d_n u(y) dy, with outward
    normal n = -e3.  On the wall both terms coincide, giving 2 Phi(r~).
    ``neumann_data(y_par)`` takes an (N, 2) array.
    """
    x = as_vec3(x)
    if not p > 0:
        raise ValueError("p must be > 0")
    if not x[2] > 0:
        raise ValueError("x3 must be > 0")

    def g(y, rt, om):
        return np.exp(-p * rt) / (2.0 * math.pi) * np.asarray(neumann_data(y[:, :2]), dtype=float)

    radius = spec.truncation_for(p)
    return float(integrate_wall_plane(x, radius, g, spec.n_disk_r, spec.n_disk_theta, singular_power=1))


def neumann_wave(t, x, wall_density, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """w(t, x) = -2 int_{r~ < t} rho(t - r~, y_par) / r~ dy_par.

    ``wall_density(s, y_par)`` takes arrays of shape (N,) and (N, 2).  Values at
    s < 0 are treated as zero, so the wall density switches on at t = 0.
    """
    x = as_vec3(x)
    if x[2] < 0:
        raise ValueError("x3 must be >= 0")
    if t <= 0:
        return 0.0

    def g(y, rt, om):
        s = t - rt
        val = np.asarray(wall_density(s, y[:, :2]), dtype=float)
        return np.where(s >= 0.0, -2.0 * val, 0.0)

    return float(integrate_boundary_disk(x, t, g, spec, singular_power=1))


def surface_diagnostics(t, y_par, E_at_wall, B_at_wall):
    """Surface charge and current from wall fields: sigma = E3/4pi, K = (B2, -B1)/4pi.

    Gaussian-unit analogue with wall normal n = -e3 pointing out of the domain.
    """
    E = as_vec3(E_at_wall)
    B = as_vec3(B_at_wall)
    sigma = E[..., 2] / (4.0 * math.pi)
    K = np.stack([B[..., 1], -B[..., 0]], axis=-1) / (4.0 * math.pi)
    return sigma, K


def maxwell_residuals(scen: Scenario, t, x, h):
    """Central-difference residuals |div E - 4 pi rho|, |curl E + dB/dt|, |div B|, |curl B - 4 pi J - dE/dt|."""
    x = as_vec3(x)
    if not (t > h and x[2] > h):
        raise ValueError("need t > h and x3 > h")
    jac = np.zeros((6, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        jac[:, j] = (represent_fields(t, x + e, scen) - represent_fields(t, x - e, scen)) / (2 * h)
    dt = (represent_fields(t + h, x, scen) - represent_fields(t - h, x, scen)) / (2 * h)
    JE, JB = jac[:3], jac[3:]

    def curl(J):
        return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])

    rho = charge_density(scen.dist, t, x)
    cur = current_density(scen.dist, t, x)
    return {
        "gauss_E": abs(np.trace(JE) - 4.0 * math.pi * rho),
        "faraday": float(np.linalg.norm(curl(JE) + dt[3:])),
        "gauss_B": abs(np.trace(JB)),
        "ampere": float(np.linalg.norm(curl(JB) - 4.0 * math.pi * cur - dt[:3])),
    }


# -- scenario checks ------------------------------------------------------


def gauss_law_check(scen: Scenario, n_probes=50, h=1e-2, seed=0):
    """Max relative residual of div E0 = 4 pi rho(0) and div B0 = 0 at seeded probes.

    Probes are drawn within three widths of each bunch and inside {y3 > 2h}.
    Divergences use fourth-order central differences.  The residual is
    normalized by the peak of 4 pi rho over the probes (1 if that is zero).
    """
    dist = scen.dist
    rng = np.random.default_rng(seed)
    pts = []
    if dist.components:
        for n in range(n_probes):
            comp = dist.components[n % len(dist.components)]
            p = np.array(comp.center0) + rng.normal(size=3) * comp.width
            p[2] = max(p[2], 3 * h)
            pts.append(p)
    else:
        pts = rng.uniform([-1, -1, 3 * h], [1, 1, 2], size=(n_probes, 3))
    pts = np.array(pts).reshape(-1, 3)
    init = scen.initial

    def div(fun):
        total = np.zeros(len(pts))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            total += (
                -fun(pts + 2 * e)[:, j] + 8 * fun(pts + e)[:, j] - 8 * fun(pts - e)[:, j] + fun(pts - 2 * e)[:, j]
            ) / (12 * h)
        return total

    rho4 = 4.0 * math.pi * charge_density(dist, 0.0, pts)
    divE = div(lambda y: init.values(y)[:, :3])
    divB = div(lambda y: init.values(y)[:, 3:])
    peak = float(np.max(np.abs(rho4))) if rho4.size else 0.0
    scale = peak if peak > 0 else 1.0
    return float(np.max(np.abs(divE - rho4)) / scale), float(np.max(np.abs(divB)) / scale)
