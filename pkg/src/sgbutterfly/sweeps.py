"""Run configurations, parameter sweeps, figure tables and the oracle check.

Config files are flat ``key = value`` text with ``#`` comments. Unknown keys
are errors. Missing keys fall back to ``DEFAULTS`` (the phase-figure setup:
87Rb moments, gravity with a 3e-6 s^-2 gradient, delta_v = 0.02 m/s and the
200 um / 0.44 mm/s Gaussian cloud).
"""

from dataclasses import dataclass, fields, replace
import csv
import io
import json
import math

import numpy as np

from . import model
from .model import (
    AtomSpecies,
    Environment,
    GaussianEnsemble,
    PhaseSpacePoint,
    Purity,
    SimulationError,
)
from .observables import (
    formula_conventional,
    formula_hbark_zero,
    formula_pulse_regime,
    gradient_phase,
    misalignment,
    moment_phase_term,
    populations,
    position_phase_term,
    visibility,
)
from .propagator import (
    harmonic_basis,
    oracle_integrate,
    propagate_segment,
    segment_phase,
)
from .sequences import (
    build_conventional_butterfly,
    build_mach_zehnder,
    build_sg_butterfly,
    run,
)

SCHEMA_VERSION = 1
GEOMETRIES = ("sg_butterfly", "conventional_butterfly", "mach_zehnder")
SWEEP_PARAMS = {"T": "T_s", "t1": "t1_s", "K": "k_grad_N_per_m", "delta_p": "delta_p_kg_m_per_s"}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    geometry: str = "sg_butterfly"
    species: str = "rb87-f2"
    mass: float = None
    mu1: float = None
    mu2: float = None
    hbar_k: float = None
    f0: float = -model.RB_MASS * model.G_EARTH
    k_grad: float = model.RB_MASS * model.FIG3_GAMMA
    z0: float = 0.0
    p0: float = 0.0
    delta_p: float = None
    delta_v: float = model.FIG3_DELTA_V
    T: float = 1.0
    t1: float = 0.0
    gradient_override: float = None
    sigma_z: float = model.FIG5_SIGMA_Z
    sigma_p: float = None
    sigma_v: float = model.FIG5_SIGMA_V
    purity: str = "mixed"
    sweep: str = None
    sweep_start: float = None
    sweep_stop: float = None
    sweep_count: int = None
    sweep_spacing: str = "linear"

    def atom(self):
        base = model.get_species(self.species)
        return AtomSpecies(
            base.mass if self.mass is None else self.mass,
            base.mu1 if self.mu1 is None else self.mu1,
            base.mu2 if self.mu2 is None else self.mu2,
            base.hbar_k if self.hbar_k is None else self.hbar_k,
        )

    def environment(self):
        return Environment(self.f0, self.k_grad)

    def momentum_split(self):
        if self.delta_p is not None:
            return self.delta_p
        return self.atom().mass * self.delta_v

    def ensemble(self):
        sigma_p = self.sigma_p if self.sigma_p is not None else self.atom().mass * self.sigma_v
        return GaussianEnsemble(self.sigma_z, sigma_p, Purity(self.purity))

    def sweep_values(self):
        if self.sweep is None:
            return [None]
        if self.sweep_spacing == "log":
            return list(np.geomspace(self.sweep_start, self.sweep_stop, self.sweep_count))
        return list(np.linspace(self.sweep_start, self.sweep_stop, self.sweep_count))

    def at(self, value):
        """Copy of the config with the sweep parameter set to ``value``."""
        if value is None:
            return self
        key = {"K": "k_grad"}.get(self.sweep, self.sweep)
        return replace(self, **{key: float(value)})


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
PRESETS = {
    "fig3-default": {},
    "fig5-default": {},
    "conventional-default": {"geometry": "conventional_butterfly", "hbar_k": model.HBAR * 8.05e6},
}
CONFIG_KEYS = tuple(_FIELD_TYPES) + ("preset",)


def _coerce(key, raw, line):
    kind = _FIELD_TYPES[key]
    if raw.lower() in ("none", ""):
        return None
    try:
        if kind in (float, "float"):
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind in (int, "int"):
            return int(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as a finite {getattr(kind, '__name__', kind)}", line, key) from None
    return raw


def parse_config(text):
    """Parse ``key = value`` text into a validated :class:`RunConfig`."""
    values = {}
    preset = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key; known keys: {', '.join(CONFIG_KEYS)}", lineno, key)
        if key in values or (key == "preset" and preset is not None):
            raise ConfigError("duplicate key", lineno, key)
        if key == "preset":
            if raw not in PRESETS:
                raise ConfigError(f"unknown preset {raw!r}; known: {', '.join(PRESETS)}", lineno, key)
            preset = raw
            continue
        values[key] = _coerce(key, raw, lineno)
    merged = dict(PRESETS.get(preset, {}))
    merged.update(values)
    cfg = RunConfig(**merged)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if cfg.geometry not in GEOMETRIES:
        raise ConfigError(f"geometry must be one of {GEOMETRIES}", key="geometry")
    if cfg.species not in model.SPECIES_PRESETS:
        raise ConfigError(f"unknown species preset; known: {sorted(model.SPECIES_PRESETS)}", key="species")
    if cfg.purity not in ("pure", "mixed"):
        raise ConfigError("purity must be 'pure' or 'mixed'", key="purity")
    if cfg.sweep is not None:
        if cfg.sweep not in SWEEP_PARAMS:
            raise ConfigError(f"sweep must be one of {sorted(SWEEP_PARAMS)}", key="sweep")
        for key in ("sweep_start", "sweep_stop", "sweep_count"):
            if getattr(cfg, key) is None:
                raise ConfigError("required when sweep is set", key=key)
        if cfg.sweep_count < 2:
            raise ConfigError("sweep_count must be >= 2", key="sweep_count")
        if cfg.sweep_spacing not in ("linear", "log"):
            raise ConfigError("sweep_spacing must be 'linear' or 'log'", key="sweep_spacing")
        if cfg.sweep_spacing == "log" and not (cfg.sweep_start > 0 and cfg.sweep_stop > 0):
            raise ConfigError("log spacing needs positive bounds", key="sweep_start")
    try:
        cfg.atom()
        cfg.environment()
        cfg.ensemble()
    except SimulationError as exc:
        raise ConfigError(str(exc)) from None


RECORD_COLUMNS = (
    "delta_phi_total_rad",
    "delta_phi_gradient_rad",
    "formula_conventional_rad",
    "formula_pulse_regime_rad",
    "formula_hbark_zero_rad",
    "delta_phi_fountain_rad",
    "formula_moment_term_rad",
    "dz_m",
    "dz_evolved_m",
    "dp_kg_m_per_s",
    "dp_evolved_kg_m_per_s",
    "visibility",
    "p1",
    "p2",
)


def build_sequence(cfg):
    species, env = cfg.atom(), cfg.environment()
    if cfg.geometry == "sg_butterfly":
        return build_sg_butterfly(species, env, cfg.momentum_split(), cfg.T, cfg.t1, cfg.gradient_override)
    if cfg.geometry == "conventional_butterfly":
        return build_conventional_butterfly(species, env, cfg.T)
    return build_mach_zehnder(species, env, cfg.momentum_split(), cfg.T)


def _formula_or_nan(fn, *args):
    try:
        return fn(*args)
    except SimulationError:
        return float("nan")


def evaluate(cfg):
    """One output row (without the sweep column) for a single parameter point."""
    species, env = cfg.atom(), cfg.environment()
    seq = build_sequence(cfg)
    initial = PhaseSpacePoint(cfg.z0, cfg.p0)
    phase = gradient_phase(seq, species, env, initial)
    arm1, arm2 = run(seq, species, env, initial)
    mis = misalignment(arm1, arm2, env, species)
    C = visibility(mis, cfg.ensemble())
    p1, p2 = populations(C, phase.total)
    dp = cfg.momentum_split() if cfg.geometry != "conventional_butterfly" else species.hbar_k
    # launched so start and end heights coincide: only the moment term is left
    p_up = -env.f0 * cfg.T / 2
    fountain = gradient_phase(seq, species, env, PhaseSpacePoint(cfg.z0, p_up)).gradient_part
    row = (
        phase.total,
        phase.gradient_part,
        formula_conventional(env, species, cfg.p0, cfg.T),
        _formula_or_nan(formula_pulse_regime, env, species, cfg.p0, dp, cfg.T),
        _formula_or_nan(formula_hbark_zero, env, species, cfg.p0, dp, cfg.T),
        fountain,
        _formula_or_nan(formula_hbark_zero, env, species, p_up, dp, cfg.T),
        mis.dz,
        mis.dz_evolved,
        mis.dp,
        mis.dp_evolved,
        C,
        p1,
        p2,
    )
    return tuple(float(x) for x in row)


def run_config(cfg):
    """Evaluate every sweep point in order. Returns ``(columns, rows)``."""
    # without a sweep the leading column is just T
    columns = (SWEEP_PARAMS[cfg.sweep or "T"],) + RECORD_COLUMNS
    rows = []
    for value in cfg.sweep_values():
        point = cfg.at(value)
        try:
            row = evaluate(point)
        except SimulationError as exc:
            label = f"{cfg.sweep}={float(value)!r}" if cfg.sweep else "run"
            raise SimulationError(f"{label}: {exc}") from exc
        rows.append((point.T if value is None else float(value),) + row)
    return columns, rows


def format_number(x):
    return format(float(x), ".17g")


def to_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else format_number(v) for v in row])
    return buf.getvalue()


def to_json(columns, rows):
    # numbers are written with 17 significant digits, like the CSV
    items = []
    for row in rows:
        parts = []
        for name, v in zip(columns, row):
            if isinstance(v, str):
                val = json.dumps(v)
            elif math.isfinite(v):
                val = format_number(v)
            else:
                val = "null"
            parts.append(f"{json.dumps(name)}: {val}")
        items.append("  {" + ", ".join(parts) + "}")
    return "[\n" + ",\n".join(items) + "\n]\n"


# -- figure tables -----------------------------------------------------------

FIG3_T = tuple(np.round(np.linspace(0.02, 2.0, 100), 12))
FIG4_T = tuple(np.round(np.linspace(0.1, 2.0, 39), 12))
FIG4_T1 = (1e-3, 1e-2)
FIG5_T = tuple(np.round(np.linspace(0.1, 10.0, 100), 12))
FIG3_SPECIES = (("symmetric", 0), ("rb87-f2", 3), ("rydberg-55c-56c", 109))


def fig3_table(T_values=FIG3_T):
    """Phase terms vs T for alpha in {0, 3, 109}, hbar_k -> 0, pulse regime.

    ``drop`` starts at rest (v0 = 0); ``fountain`` launches at v0 = g T / 2
    so the start and end heights coincide and only the moment term survives.
    """
    _, env, delta_p = model.fig3_default()
    columns = (
        "alpha",
        "T_s",
        "dphi1_formula_rad",
        "dphi2_formula_rad",
        "dphi_drop_formula_rad",
        "dphi_drop_sim_rad",
        "dphi_fountain_sim_rad",
    )
    rows = []
    for name, a in FIG3_SPECIES:
        species = model.SPECIES_PRESETS[name]
        for T in T_values:
            seq = build_sg_butterfly(species, env, delta_p, T)
            drop = gradient_phase(seq, species, env, PhaseSpacePoint(0.0, 0.0)).gradient_part
            p_up = -env.f0 * T / 2
            fountain = gradient_phase(seq, species, env, PhaseSpacePoint(0.0, p_up)).gradient_part
            rows.append(
                (
                    float(a),
                    T,
                    position_phase_term(env, species, 0.0, delta_p, T),
                    moment_phase_term(env, species, delta_p, T),
                    formula_hbark_zero(env, species, 0.0, delta_p, T),
                    drop,
                    fountain,
                )
            )
    return columns, rows


def fig4_table(T_values=FIG4_T, t1_values=FIG4_T1, p0=0.0):
    """Finite-duration gradient stages vs the pulse limit (87Rb, hbar_k -> 0)."""
    species, env, delta_p = model.fig3_default()
    columns = ("t1_s", "T_s", "b_T_per_m", "dphi_finite_rad", "dphi_pulse_rad", "rel_diff")
    rows = []
    initial = PhaseSpacePoint(0.0, p0)
    for t1 in t1_values:
        for T in T_values:
            finite_seq = build_sg_butterfly(species, env, delta_p, T, t1)
            finite = gradient_phase(finite_seq, species, env, initial).gradient_part
            pulse = gradient_phase(build_sg_butterfly(species, env, delta_p, T), species, env, initial).gradient_part
            rows.append((t1, T, finite_seq.params["b"], finite, pulse, (finite - pulse) / pulse))
    return columns, rows


def fig5_table(T_values=FIG5_T):
    """Visibility vs T for the SG butterfly (pulse regime) and Mach-Zehnder."""
    species, env, delta_p, ens = model.fig5_default()
    columns = (
        "T_s",
        "visibility_butterfly",
        "visibility_mach_zehnder",
        "dz_butterfly_m",
        "dp_butterfly_kg_m_per_s",
        "dz_mach_zehnder_m",
        "dp_mach_zehnder_kg_m_per_s",
    )
    rows = []
    for T in T_values:
        bf = misalignment(*run(build_sg_butterfly(species, env, delta_p, T), species, env), env, species)
        mz = misalignment(*run(build_mach_zehnder(species, env, delta_p, T), species, env), env, species)
        rows.append((T, visibility(bf, ens), visibility(mz, ens), bf.dz, bf.dp, mz.dz, mz.dp))
    return columns, rows


# -- analytic vs numerical check ---------------------------------------------

ORACLE_TOL = 1e-9
SYMPLECTIC_TOL = 1e-12
CONTINUITY_TOL = 1e-10


def random_segments(n, seed=0):
    """Random constant-force segments with K/m in [-1, 1] s^-2, dt in [1e-6, 10] s."""
    rng = np.random.default_rng(seed)
    mass = 10.0 ** rng.uniform(-26, 0, n)
    w2 = rng.uniform(-1.0, 1.0, n)
    dt = 10.0 ** rng.uniform(-6, 1, n)
    # O(1) trajectory scales in natural units of each case
    z_scale = 10.0 ** rng.uniform(-3, 1, n)
    z0 = z_scale * rng.uniform(-1, 1, n)
    p0 = mass * z_scale * rng.uniform(-1, 1, n)
    force = mass * z_scale * rng.uniform(-1, 1, n)
    return dict(mass=mass, k_grad=w2 * mass, dt=dt, z0=z0, p0=p0, force=force)


def analytic_batch(seg, hbar=model.HBAR):
    start = PhaseSpacePoint(seg["z0"], seg["p0"])
    end = propagate_segment(start, seg["force"], seg["k_grad"], seg["mass"], seg["dt"]).end
    phase = segment_phase(start, seg["force"], seg["k_grad"], seg["mass"], seg["dt"], hbar)
    return end.z, end.p, phase


def term_scales(seg, hbar=model.HBAR):
    """Sum of absolute terms in each closed-form output.

    Relative errors are measured against these, which is the conditioning
    floor of the formulas and stays meaningful when an output passes near 0.
    """
    b = harmonic_basis(seg["k_grad"], seg["mass"], seg["dt"])
    m, F, z0, p0, K = seg["mass"], seg["force"], seg["z0"], seg["p0"], seg["k_grad"]
    z = abs(z0 * b.c) + abs(p0 / m * b.s_over_omega) + abs(F / m * b.q)
    p = abs(p0 * b.c) + abs(F * b.s_over_omega) + abs(K * z0 * b.s_over_omega)
    ph = abs(F) / (2 * hbar) * (abs(z0 * b.s_over_omega) + abs(p0 / m * b.q) + abs(F / m * b.r))
    return z, p, ph


def continuity_check(seg):
    """Behaviour at |u| = (K/m) dt**2 = 1e-8, i.e. just below K = 0.

    Returns ``(vs_free, vs_taylor)``: the largest relative gap to the K = 0
    closed form, and to that form plus its first-order correction in u.
    The first is O(u) by construction; the second exposes cancellation.
    """
    dt, m, F, z0, p0 = seg["dt"], seg["mass"], seg["force"], seg["z0"], seg["p0"]
    u = np.where(seg["k_grad"] >= 0, 1e-8, -1e-8)
    k_small = u * m / dt**2
    near = propagate_segment(PhaseSpacePoint(z0, p0), F, k_small, m, dt).end
    z_terms = (z0, p0 * dt / m, F * dt**2 / (2 * m))
    p_terms = (p0, F * dt)
    z_free, p_free = sum(z_terms), sum(p_terms)
    z_scale = sum(abs(t) for t in z_terms)
    p_scale = sum(abs(t) for t in p_terms) + abs(k_small * z0 * dt)
    # c0 = 1 + u/2, c1 = 1 + u/6, 2 c2 = 1 + u/12 up to O(u**2)
    z_taylor = z_free + u * (z_terms[0] / 2 + z_terms[1] / 6 + z_terms[2] / 12)
    p_taylor = p_free + u * (p0 / 2 + F * dt / 6) + k_small * z0 * dt * (1 + u / 6)
    vs_free = max(np.max(np.abs(near.z - z_free) / z_scale), np.max(np.abs(near.p - p_free) / p_scale))
    vs_taylor = max(np.max(np.abs(near.z - z_taylor) / z_scale), np.max(np.abs(near.p - p_taylor) / p_scale))
    return float(vs_free), float(vs_taylor)


def validate(cases=1000, seed=0, steps=2000):
    """Compare the closed-form propagator with the RK4/Simpson oracle.

    Returns a dict of maximum errors. ``symplectic`` is the raw
    ``|det J - 1|``; ``symplectic_scaled`` divides by ``c**2 + |K/m| s**2``,
    the size of the two products whose difference is the determinant.
    """
    hbar = model.HBAR
    seg = random_segments(cases, seed)
    za, pa, pha = analytic_batch(seg, hbar)
    force = seg["force"]
    oracle = oracle_integrate(
        PhaseSpacePoint(seg["z0"], seg["p0"]), lambda t: force, seg["k_grad"], seg["mass"], seg["dt"], hbar, steps
    )
    zs, ps, phs = term_scales(seg, hbar)
    b = harmonic_basis(seg["k_grad"], seg["mass"], seg["dt"])
    jac_c, jac_s = b.c, b.s_over_omega
    det = jac_c * jac_c - (jac_s / seg["mass"]) * (seg["k_grad"] * jac_s)
    size = jac_c**2 + np.abs(b.omega_sq_signed) * jac_s**2
    vs_free, vs_taylor = continuity_check(seg)
    return {
        "position": float(np.max(np.abs(za - oracle.z) / zs)),
        "momentum": float(np.max(np.abs(pa - oracle.p) / ps)),
        "phase": float(np.max(np.abs(pha - oracle.phase) / phs)),
        "symplectic": float(np.max(np.abs(det - 1.0))),
        "symplectic_scaled": float(np.max(np.abs(det - 1.0) / size)),
        "continuity": vs_free,
        "continuity_taylor": vs_taylor,
    }


def validation_passed(errors):
    """Pass/fail on the well-posed metrics (oracle, scaled determinant, Taylor continuity)."""
    return (
        max(errors["position"], errors["momentum"], errors["phase"]) < ORACLE_TOL
        and errors["symplectic_scaled"] < SYMPLECTIC_TOL
        and errors["continuity_taylor"] < CONTINUITY_TOL
    )
