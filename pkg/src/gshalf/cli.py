"""Command-line interface: scenario loading, field tables, audits and oracle comparisons.

Verbs
-----
check-kernels   randomized kernel identity checks
eval            field table at the (t, x1, x2, x3) rows of a points file
audit-boundary  conductor boundary conditions on wall probes
compare         representation vs an oracle (wholespace, wave, maxwell)
neumann-demo    Neumann wall wave vs closed form and the FD oracle

Every verb prints a JSON report; the exit status is 0 iff every metric passes
and 2 on input errors.

Scenario files are TOML::

    [scenario]
    g = 0.0                          # downward force on the beams
    initial_field_mode = "electrostatic"   # or "zero"
    horizon = 1.0
    no_contact = false               # warn if mass reaches the wall
    support_margin = 0.5             # optional declared margin d

    [quadrature]                     # optional, any subset
    n_phi = 32

    [[component]]
    weight = 1.0
    center = [0.0, 0.0, 1.5]
    velocity = [0.5, 0.0, -0.75]
    width = 0.25
    reflect_at_wall = false

    [force_field]                    # optional uniform fields in a box
    E = [0.0, 0.0, 0.0]
    B = [0.0, 0.0, 0.0]
    lo = [-1.0, -1.0, 0.0]
    hi = [1.0, 1.0, 2.0]
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .distribution import BeamComponent, Distribution, support_margin
from .kernels import verify_divergence_identities, verify_gradient_identities
from .oracle import GridConfig, error_norms, fd_scalar_wave, staggered_maxwell_pec
from .quadrature import QuadratureSpec
from .representation import (
    GivenField,
    Scenario,
    evaluate_points,
    gauss_law_check,
    neumann_wave,
    represent_fields,
    whole_space_fields,
)

GAUSS_TOL = 1e-4
KERNEL_TOL = 1e-6
WALL_TOL = 0.01
ROUNDOFF_FLOOR = 1e-13
FIELD_HEADER = "t,x1,x2,x3,E1,E2,E3,B1,B2,B3"


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the offending field or rule."""


# -- reports --------------------------------------------------------------


@dataclass
class Metric:
    name: str
    value: float
    tolerance: float | None
    passed: bool
    note: str = ""


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    metrics: list = field(default_factory=list)
    runtime_seconds: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.metrics)

    def add(self, name, value, tolerance=None, passed=None, note=""):
        value = float(value)
        if passed is None:
            passed = tolerance is None or value <= tolerance
        self.metrics.append(Metric(name, value, tolerance, bool(passed), note))

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "passed": self.passed,
            "inputs_digest": self.inputs_digest,
            "runtime_seconds": self.runtime_seconds,
            "metrics": [asdict(m) for m in self.metrics],
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2, sort_keys=False, allow_nan=True)


def code_digest() -> str:
    h = hashlib.sha256()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, Path):
            h.update(p.read_bytes())
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:16]


# -- scenario loading -----------------------------------------------------


def _vec3(obj, where):
    try:
        arr = [float(v) for v in obj]
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}: expected a list of 3 numbers") from None
    if len(arr) != 3 or not all(math.isfinite(v) for v in arr):
        raise ScenarioError(f"{where}: expected 3 finite numbers")
    return tuple(arr)


def _number(section, key, default, where):
    val = section.get(key, default)
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}.{key}: expected a number") from None
    if not math.isfinite(val):
        raise ScenarioError(f"{where}.{key}: must be finite")
    return val


def scenario_from_dict(doc: dict, quadrature_scale: float = 1.0):
    """Build a :class:`Scenario` from a parsed document; returns (scenario, load_metrics)."""
    known = {"scenario", "quadrature", "component", "force_field"}
    unknown = set(doc) - known
    if unknown:
        raise ScenarioError(f"unknown top-level section(s): {', '.join(sorted(unknown))}")
    sec = doc.get("scenario", {})
    g = _number(sec, "g", 0.0, "scenario")
    horizon = _number(sec, "horizon", 1.0, "scenario")
    if horizon <= 0:
        raise ScenarioError("scenario.horizon: must be > 0")
    mode = sec.get("initial_field_mode", "zero")
    if mode not in ("zero", "electrostatic"):
        raise ScenarioError("scenario.initial_field_mode: must be 'zero' or 'electrostatic'")
    no_contact = bool(sec.get("no_contact", False))

    comps = []
    for k, c in enumerate(doc.get("component", [])):
        where = f"component[{k}]"
        width = _number(c, "width", None, where) if "width" in c else None
        if width is None:
            raise ScenarioError(f"{where}.width: missing")
        if width <= 0:
            raise ScenarioError(f"{where}.width: must be > 0, got {width}")
        weight = _number(c, "weight", 1.0, where)
        if weight < 0:
            raise ScenarioError(f"{where}.weight: must be >= 0, got {weight}")
        if "center" not in c:
            raise ScenarioError(f"{where}.center: missing")
        comps.append(
            BeamComponent(
                weight=weight,
                center0=_vec3(c["center"], f"{where}.center"),
                velocity=_vec3(c.get("velocity", (0.0, 0.0, 0.0)), f"{where}.velocity"),
                width=width,
                reflect_at_wall=bool(c.get("reflect_at_wall", False)),
            )
        )
    try:
        dist = Distribution(tuple(comps), g)
    except ValueError as exc:
        raise ScenarioError(f"component: {exc}") from None

    qsec = dict(doc.get("quadrature", {}))
    try:
        spec = QuadratureSpec(**qsec)
    except TypeError as exc:
        raise ScenarioError(f"quadrature: {exc}") from None
    except ValueError as exc:
        raise ScenarioError(f"quadrature.{exc}") from None
    if quadrature_scale != 1.0:
        spec = spec.scaled(quadrature_scale)

    force = None
    if "force_field" in doc:
        f = doc["force_field"]
        try:
            force = GivenField(
                _vec3(f.get("E", (0, 0, 0)), "force_field.E"),
                _vec3(f.get("B", (0, 0, 0)), "force_field.B"),
                _vec3(f.get("lo", (-math.inf,) * 3), "force_field.lo") if "lo" in f else (-math.inf,) * 3,
                _vec3(f.get("hi", (math.inf,) * 3), "force_field.hi") if "hi" in f else (math.inf,) * 3,
            )
        except ValueError as exc:
            raise ScenarioError(f"force_field: {exc}") from None

    if mode == "electrostatic":
        for k, c in enumerate(comps):
            if c.center0[2] < c.width * 6.0:
                raise ScenarioError(
                    f"component[{k}].center: electrostatic data need the support "
                    f"(six widths) above the wall, got center height {c.center0[2]}"
                )
    scen = Scenario(dist, g, mode, force, horizon, spec, no_contact)

    metrics = []
    gauss_E, gauss_B = gauss_law_check(scen)
    if mode == "electrostatic" or not comps:
        if gauss_E > GAUSS_TOL or gauss_B > GAUSS_TOL:
            raise ScenarioError(
                f"initial data violate Gauss's law (relative residuals {gauss_E:.2e}, {gauss_B:.2e})"
            )
        metrics.append(Metric("load.gauss_law", max(gauss_E, gauss_B), GAUSS_TOL, True))
    else:
        metrics.append(
            Metric(
                "load.gauss_law",
                max(gauss_E, gauss_B),
                None,
                True,
                "warning: zero initial field with charges does not satisfy Gauss's law",
            )
        )
    d_decl = sec.get("support_margin")
    d = float(d_decl) if d_decl is not None else support_margin(dist)
    need = (1.0 + dist.vmax) * horizon
    contact_ok = d > need
    metrics.append(
        Metric(
            "load.no_contact_margin",
            d - need,
            None,
            True,
            "" if contact_ok else f"warning: margin d={d:.6g} <= (1 + vmax) T = {need:.6g}; mass may reach the wall",
        )
    )
    return scen, metrics


def load_scenario(path, quadrature_scale: float = 1.0):
    """Parse and validate a TOML scenario file; returns (scenario, load_metrics)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: parse error: {exc}") from None
    return scenario_from_dict(doc, quadrature_scale)


def read_points(path):
    """Rows (t, x1, x2, x3) from a comma- or whitespace-separated file; '#' starts a comment."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in line.replace(",", " ").split()]
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            if not rows and parts and parts[0].lower() == "t":
                continue  # header
            raise ScenarioError(f"{path}:{lineno}: non-numeric entry") from None
        if len(vals) != 4:
            raise ScenarioError(f"{path}:{lineno}: expected 4 columns (t, x1, x2, x3), got {len(vals)}")
        rows.append(vals)
    pts = np.array(rows, dtype=float).reshape(-1, 4)
    for k, r in enumerate(pts):
        if r[3] < 0:
            raise ScenarioError(f"points row {k}: x3 = {r[3]} is below the wall")
        if not r[0] >= 0:
            raise ScenarioError(f"points row {k}: t = {r[0]} must be >= 0")
    return pts


def format_table(points, values) -> str:
    buf = io.StringIO()
    buf.write(FIELD_HEADER + "\n")
    for p, v in zip(points, values):
        buf.write(",".join(format(float(c), ".17g") for c in (*p, *v)) + "\n")
    return buf.getvalue()


# -- commands -------------------------------------------------------------


def cmd_check_kernels(seed=42, n=None, perturb=0.0) -> RunReport:
    """Gradient (default 1000 samples) and divergence (default 500) identity checks."""
    t0 = time.perf_counter()
    n_grad = 1000 if n is None else n
    n_div = 500 if n is None else n
    rep = RunReport("check-kernels", _digest(seed, n, perturb))
    reports = dict(verify_gradient_identities(seed=seed, n_samples=n_grad, perturb=perturb))
    reports.update(verify_divergence_identities(seed=seed, n_samples=n_div))
    for name, r in reports.items():
        rep.add(
            f"max_rel_error.{name}",
            r.max_rel_error,
            KERNEL_TOL,
            r.passed,
            "vacuous" if r.vacuous else "",
        )
    rep.metadata = {"seed": seed, "gradient_samples": n_grad, "divergence_samples": n_div}
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


def _metadata(scen, extra=None):
    meta = {"quadrature": scen.spec.as_dict(), "code_digest": code_digest(), "version": __version__}
    meta["surface_units"] = "sigma = E3/(4 pi), K = (B2, -B1)/(4 pi), Gaussian normalized"
    if extra:
        meta.update(extra)
    return meta


def cmd_eval(config, points, out, workers=1, quadrature_scale=1.0) -> RunReport:
    t0 = time.perf_counter()
    scen, load_metrics = load_scenario(config, quadrature_scale)
    pts = read_points(points)
    rep = RunReport("eval", _digest(Path(config), Path(points), quadrature_scale))
    rep.metrics.extend(load_metrics)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        vals = evaluate_points(pts, scen, workers=workers)
    Path(out).write_text(format_table(pts, vals))
    rep.add("rows_written", len(pts), None, True)
    if caught:
        rep.add("runtime_warnings", len(caught), None, True, "; ".join(sorted({str(w.message) for w in caught})))
    rep.metadata = _metadata(scen, {"workers": workers, "out": str(out)})
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


def _probe_box(scen, n, seed, heights, t=0.0, half_width=1.0):
    """Seeded probes around the mean horizontal bunch position at time t."""
    rng = np.random.default_rng(seed)
    beams = [b for b in scen.dist.beams if b.center0[2] > 0]
    c = np.mean([b.position(t) for b in beams], axis=0) if beams else np.zeros(3)
    xy = c[:2] + rng.uniform(-half_width, half_width, size=(n, 2))
    z = rng.uniform(heights[0], heights[1], size=n)
    return np.column_stack([xy, z])


def _refinement_passes(coarse, fine, scale):
    """Strict decrease, or both values already at the roundoff floor."""
    floor = ROUNDOFF_FLOOR * max(scale, 1e-300)
    return fine < coarse or (coarse <= floor and fine <= floor)


def _wall_fd(scen, t, pts, h):
    """One-sided second-order wall-normal residuals at wall points."""
    from .distribution import charge_density, current_density

    res = np.zeros((len(pts), 3))
    for k, p in enumerate(pts):
        f0 = represent_fields(t, p, scen)
        f1 = represent_fields(t, p + [0, 0, h], scen)
        f2 = represent_fields(t, p + [0, 0, 2 * h], scen)
        d3 = (-3 * f0 + 4 * f1 - f2) / (2 * h)
        rho = charge_density(scen.dist, t, p)
        J = current_density(scen.dist, t, p)
        res[k] = [
            d3[2] - 4 * math.pi * rho,
            d3[3] - 4 * math.pi * J[1],
            d3[4] + 4 * math.pi * J[0],
        ]
    return np.max(np.abs(res), axis=0)


def cmd_audit_boundary(config, t=None, n_probes=20, seed=0, quadrature_scale=1.0, workers=1, fd_probes=6):
    t0 = time.perf_counter()
    scen, load_metrics = load_scenario(config, quadrature_scale)
    t = scen.horizon if t is None else float(t)
    if not 0 < t <= scen.horizon:
        raise ScenarioError(f"--time must be in (0, horizon={scen.horizon}]")
    rep = RunReport("audit-boundary", _digest(Path(config), t, n_probes, seed, quadrature_scale))
    rep.metrics.extend(load_metrics)
    top = max([c.center0[2] for c in scen.dist.components], default=1.0)
    wall = _probe_box(scen, n_probes, seed, (0.0, 0.0), t, 0.5)
    interior = _probe_box(scen, n_probes, seed + 1, (0.05 * top, 1.5 * top), t, 0.5)
    rows_w = np.column_stack([np.full(len(wall), t), wall])
    rows_i = np.column_stack([np.full(len(interior), t), interior])
    fw = evaluate_points(rows_w, scen, workers)
    fi = evaluate_points(rows_i, scen, workers)
    peak_E = float(np.max(np.linalg.norm(fi[:, :3], axis=1))) if n_probes else 0.0
    peak_B = float(np.max(np.linalg.norm(fi[:, 3:], axis=1))) if n_probes else 0.0
    fine_scen = scen.with_spec(scen.spec.scaled(2.0))
    fw2 = evaluate_points(rows_w, fine_scen, workers)

    def rel(v, peak):
        return v / peak if peak > 0 else v

    for name, col, peak in (("E1", 0, peak_E), ("E2", 1, peak_E), ("B3", 5, peak_B)):
        coarse = rel(float(np.max(np.abs(fw[:, col]))) if n_probes else 0.0, peak)
        fine = rel(float(np.max(np.abs(fw2[:, col]))) if n_probes else 0.0, peak)
        rep.add(f"wall_max_abs_{name}_rel", coarse, WALL_TOL)
        rep.add(
            f"wall_max_abs_{name}_rel_refined",
            fine,
            None,
            _refinement_passes(coarse, fine, 1.0),
            "passes if smaller than at base resolution or both at the roundoff floor",
        )
    m = min(fd_probes, n_probes)
    if m:
        wp = wall[:m]
        r1 = _wall_fd(scen, t, wp, 0.04)
        r2 = _wall_fd(scen, t, wp, 0.02)
        scale = 4 * math.pi * max(peak_E, peak_B, 1e-300)
        for k, name in enumerate(("d3E3_minus_4pi_rho", "d3B1_minus_4pi_J2", "d3B2_plus_4pi_J1")):
            if r1[k] <= 1e-9 * scale and r2[k] <= 1e-9 * scale:
                rep.add(f"wall_fd_{name}_h0.04", r1[k], None, True, "residual at floor")
                continue
            slope = math.log2(r1[k] / r2[k]) if r2[k] > 0 else math.inf
            rep.add(f"wall_fd_{name}_h0.04", r1[k], None, True)
            rep.add(f"wall_fd_{name}_h0.02", r2[k], None, True)
            rep.add(f"wall_fd_{name}_slope", slope, None, 1.5 <= slope <= 2.5, "gate: slope in [1.5, 2.5]")
    rep.metadata = _metadata(
        scen,
        {"time": t, "probes": n_probes, "seed": seed, "peak_interior_E": peak_E, "peak_interior_B": peak_B,
         "refined_quadrature": fine_scen.spec.as_dict()},
    )
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


def _compare_rows(out, pts, a, b):
    buf = io.StringIO()
    buf.write(FIELD_HEADER + "," + ",".join(f"ref_{c}" for c in FIELD_HEADER.split(",")[4:]) + "\n")
    for p, u, v in zip(pts, a, b):
        buf.write(",".join(format(float(c), ".17g") for c in (*p, *u, *v)) + "\n")
    Path(out).write_text(buf.getvalue())


def _maxwell_grid(scen, probes, h, cfl=0.5):
    """Box sized so the numerical domain of dependence of every probe avoids the outer faces."""
    T = scen.horizon
    reach = T / cfl + 2 * h
    ext = float(np.max(np.abs(probes[:, :2]))) + reach
    top = float(np.max(probes[:, 2])) + reach
    for c in scen.dist.components:
        r = 6 * c.width + T
        ext = max(ext, abs(c.center0[0]) + r, abs(c.center0[1]) + r)
        top = max(top, c.center0[2] + r)
    ext = math.ceil(ext / h - 1e-9) * h
    top = math.ceil(top / h - 1e-9) * h
    return GridConfig(ext, h, cfl, T, top)


def cmd_compare(config, oracle, out, n_probes=100, seed=0, h=0.05, quadrature_scale=1.0, workers=1):
    t0 = time.perf_counter()
    scen, load_metrics = load_scenario(config, quadrature_scale)
    rep = RunReport("compare", _digest(Path(config), oracle, n_probes, seed, h, quadrature_scale))
    rep.metrics.extend(load_metrics)
    T = scen.horizon
    if oracle == "wholespace":
        d = support_margin(scen.dist)
        if not 2 * T < d:
            raise ScenarioError(f"wholespace oracle needs 2 * horizon < support margin d (2T={2 * T}, d={d})")
        probes = _probe_box(scen, n_probes, seed, (0.0, 2.0))
        rows = np.column_stack([np.full(n_probes, T), probes])
        a = evaluate_points(rows, scen, workers)
        b = np.array([whole_space_fields(T, p, scen) for p in probes]).reshape(-1, 6)
        l2, linf = _safe_norms(a, b)
        rep.add("rel_L2", l2, 1e-10)
        rep.add("rel_Linf", linf, None, True)
        rep.add("max_abs_diff", float(np.max(np.abs(a - b))) if a.size else 0.0, 1e-12)
    elif oracle == "wave":
        a, b, rows, source = _compare_wave(scen, n_probes, seed, h)
        rep.metadata["wall_source"] = source
        l2, linf = _safe_norms(a, b)
        rep.add("rel_L2", l2, 0.05)
        rep.add("rel_Linf", linf, None, True)
        a = np.column_stack([a, np.zeros((len(a), 5))])
        b = np.column_stack([b, np.zeros((len(b), 5))])
    elif oracle == "maxwell":
        if scen.has_force:
            raise ScenarioError("maxwell oracle needs force-free beams (g = 0, no force_field)")
        probes = _probe_box(scen, n_probes, seed, (0.0, 2.0))
        cfg = _maxwell_grid(scen, probes, h)
        sol = staggered_maxwell_pec(cfg, scen.dist, scen.initial_field_mode)
        rows = np.column_stack([np.full(n_probes, sol.t), probes])
        a = evaluate_points(rows, scen, workers)
        b = sol.sample(probes)
        l2, linf = _safe_norms(a, b)
        rep.add("rel_L2", l2, None, True)
        rep.add("rel_Linf", linf, 0.05)
        rep.add("max_div_B", sol.max_div_B, None, True)
        rep.add("gauss_drift", sol.gauss_drift, None, True, "flagged" if sol.drift_flagged else "")
        rep.metadata["grid"] = {"extent": cfg.extent, "height": cfg.z_top, "h": h, "cfl": cfg.cfl}
    else:
        raise ScenarioError(f"unknown oracle {oracle!r}; choose wholespace, wave or maxwell")
    if out is not None:
        _compare_rows(out, rows, a, b)
    rep.metadata.update(_metadata(scen, {"oracle": oracle, "probes": n_probes, "seed": seed}))
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


def _safe_norms(a, b):
    try:
        return error_norms(a, b)
    except ValueError:
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0
        return diff, diff


def _wall_charge(dist):
    def rho(s, yp):
        y = np.concatenate([yp, np.zeros((len(yp), 1))], axis=1)
        return sum((b.density(s, y) for b in dist.beams), np.zeros(len(yp)))

    return rho


def _on_grid(rho, s, X, Y):
    yp = np.column_stack([np.ravel(X), np.ravel(Y)])
    return np.asarray(rho(np.full(len(yp), s), yp)).reshape(np.shape(X))


def _compare_wave(scen, n_probes, seed, h):
    """Neumann wall wave of the scenario's wall charge vs the FD Neumann oracle."""
    T = scen.horizon
    rho = _wall_charge(scen.dist)
    rng = np.random.default_rng(seed)
    comps = scen.dist.components
    c = np.mean([cc.center0 for cc in comps], axis=0) if comps else np.zeros(3)
    probe_s = np.linspace(0.0, T, 9)
    grid = c[:2] + np.stack(np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9)), -1).reshape(-1, 2)
    source = "scenario wall charge"
    if not any(np.any(rho(np.full(len(grid), s), grid) > 0) for s in probe_s):
        # no wall contact: fall back to the reference Gaussian wall pulse
        rho = gaussian_wall_pulse()
        source = "gaussian wall pulse (scenario has no wall charge before the horizon)"
        c = np.zeros(3)
    probes = np.column_stack([c[:2] + rng.uniform(-0.8, 0.8, size=(n_probes, 2)), rng.uniform(0, 1.2, n_probes)])
    reach = T / 0.5 + 2 * h
    ext = math.ceil((float(np.max(np.abs(probes[:, :2]))) + reach) / h) * h
    top = math.ceil((float(np.max(probes[:, 2])) + reach) / h) * h
    cfg = GridConfig(ext, h, 0.5, T, top)
    sol = fd_scalar_wave(cfg, "neumann", wall_data=lambda s, X, Y: 4 * math.pi * _on_grid(rho, s, X, Y))
    a = np.array([neumann_wave(T, p, rho, scen.spec) for p in probes])
    b = sol.sample(probes)
    return a, b, np.column_stack([np.full(n_probes, T), probes]), source


def gaussian_wall_pulse(amplitude=1.0, width=0.3, duration=0.6):
    """Causal wall charge: sin^2 switch-on over ``duration`` times a Gaussian in y_par."""

    def rho(s, yp):
        s = np.asarray(s, dtype=float)
        on = (s >= 0) & (s <= duration)
        b = np.where(on, np.sin(np.pi * np.clip(s, 0, duration) / duration) ** 2, 0.0)
        return amplitude * b * np.exp(-np.sum(np.asarray(yp) ** 2, axis=-1) / (2 * width * width))

    return rho


def cmd_neumann_demo(t=1.0, h=0.05, n_probes=60, seed=0, quadrature_scale=1.0) -> RunReport:
    t0 = time.perf_counter()
    spec = QuadratureSpec().scaled(quadrature_scale)
    rep = RunReport("neumann-demo", _digest(t, h, n_probes, seed, quadrature_scale))
    rho0 = 1.0
    heights = np.linspace(0.0, 1.5 * t, 16)
    exact = -4 * math.pi * rho0 * np.clip(t - heights, 0.0, None)
    step = np.array([neumann_wave(t, (0.0, 0.0, z), lambda s, y: np.full(len(s), rho0), spec) for z in heights])
    err = np.max(np.abs(step - exact)) / np.max(np.abs(exact))
    rep.add("step_charge_rel_error", err, 1e-8)

    pulse = gaussian_wall_pulse()
    rng = np.random.default_rng(seed)
    probes = np.column_stack([rng.uniform(-0.8, 0.8, (n_probes, 2)), rng.uniform(0, 1.2, n_probes)])
    reach = t / 0.5 + 2 * h
    ext = math.ceil((0.8 + reach) / h - 1e-9) * h
    top = math.ceil((1.2 + reach) / h - 1e-9) * h
    cfg = GridConfig(ext, h, 0.5, t, top)
    sol = fd_scalar_wave(cfg, "neumann", wall_data=lambda s, X, Y: 4 * math.pi * _on_grid(pulse, s, X, Y))
    a = np.array([neumann_wave(t, p, pulse, spec) for p in probes])
    l2, linf = error_norms(a, sol.sample(probes))
    rep.add("gaussian_pulse_rel_L2", l2, 0.05)
    rep.add("gaussian_pulse_rel_Linf", linf, None, True)
    rep.metadata = {"t": t, "h": h, "probes": n_probes, "seed": seed, "quadrature": spec.as_dict(),
                    "code_digest": code_digest()}
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


# -- argument parsing -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gshalf", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, type=Path, help="scenario TOML file")
        sp.add_argument("--quadrature-scale", type=float, default=1.0, help="multiply all node counts")
        sp.add_argument("--report", type=Path, help="also write the JSON report here")

    sp = sub.add_parser("check-kernels", help="kernel identity checks")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--samples", type=int, default=None, help="samples per family (default 1000/500)")
    sp.add_argument("--report", type=Path)

    sp = sub.add_parser("eval", help="field table at points")
    common(sp)
    sp.add_argument("--points", required=True, type=Path)
    sp.add_argument("--out", required=True, type=Path)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("audit-boundary", help="conductor boundary audit")
    common(sp)
    sp.add_argument("--time", type=float, default=None)
    sp.add_argument("--probes", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("compare", help="compare against an oracle")
    common(sp)
    sp.add_argument("--oracle", required=True, choices=("wholespace", "wave", "maxwell"))
    sp.add_argument("--out", type=Path)
    sp.add_argument("--probes", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--h", type=float, default=0.05, help="oracle grid spacing")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("neumann-demo", help="Neumann wall wave checks")
    common(sp, config=False)
    sp.add_argument("--time", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=0.05)
    sp.add_argument("--probes", type=int, default=60)
    sp.add_argument("--seed", type=int, default=0)
    return p


def run(args) -> RunReport:
    if args.command == "check-kernels":
        return cmd_check_kernels(args.seed, args.samples)
    if args.command == "eval":
        return cmd_eval(args.config, args.points, args.out, args.workers, args.quadrature_scale)
    if args.command == "audit-boundary":
        return cmd_audit_boundary(
            args.config, args.time, args.probes, args.seed, args.quadrature_scale, args.workers
        )
    if args.command == "compare":
        return cmd_compare(
            args.config, args.oracle, args.out, args.probes, args.seed, args.h, args.quadrature_scale, args.workers
        )
    if args.command == "neumann-demo":
        return cmd_neumann_demo(args.time, args.h, args.probes, args.seed, args.quadrature_scale)
    raise AssertionError(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run(args)
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"gshalf {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = report.to_json()
    print(text)
    if getattr(args, "report", None):
        Path(args.report).write_text(text + "\n")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
