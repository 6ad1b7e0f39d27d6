"""Scenario files: parsing, unit handling, sweeps and dispatch to the physics modules.

A scenario is a JSON object::

    {
      "name": "fbar",
      "verb": "estimate",
      "unit_system": "SI",
      "params": {"Q": 1e8, "eps": 1e-8, "drive_frequency": {"value": 3, "unit": "GHz"}},
      "sweep": {"eps": [1e-9, 1e-8]},
      "annotations": {"note": "free text copied to the report"}
    }

Bare numbers are read in the scenario's ``unit_system``; ``{"value", "unit"}``
pairs are converted explicitly. Sweep axes form a cartesian product taken in
the order the axes are listed.
"""

from __future__ import annotations

import concurrent.futures as cf
import itertools
import json
import math
import subprocess
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import cavity3d, estimates, friction, mirror_vacuum, moore1d, plasma_sheet
from .domain import (
    AREA,
    C_SI,
    DIMENSIONLESS,
    E_CHARGE_SI,
    FREQUENCY,
    HBAR_SI,
    INVERSE_LENGTH,
    LENGTH,
    MASS,
    MOMENTUM,
    NATURAL,
    SI,
    TIME,
    CircCavity,
    ModeIndex,
    MotionProfile,
    RectCavity,
    UnitSystem,
    spectrum,
)
from .errors import DceError
from .output import atomic_write, to_csv, to_json

VELOCITY = (0, 1, -1)
VERBS = ("mirror", "moore", "cavity", "friction", "plasma", "estimate")
MIRROR_ACTIONS = ("force", "rate", "decoherence")


class ScenarioError(DceError, ValueError):
    """Scenario file cannot be parsed or fails validation."""


# Units -------------------------------------------------------------------------

_TWO_PI = 2.0 * math.pi
UNITS: dict[str, tuple[float, tuple]] = {
    "m": (1.0, LENGTH), "cm": (1e-2, LENGTH), "mm": (1e-3, LENGTH), "um": (1e-6, LENGTH), "nm": (1e-9, LENGTH),
    "m^2": (1.0, AREA), "cm^2": (1e-4, AREA),
    "s": (1.0, TIME), "ms": (1e-3, TIME), "us": (1e-6, TIME), "ns": (1e-9, TIME), "ps": (1e-12, TIME),
    "Hz": (_TWO_PI, FREQUENCY), "kHz": (_TWO_PI * 1e3, FREQUENCY), "MHz": (_TWO_PI * 1e6, FREQUENCY),
    "GHz": (_TWO_PI * 1e9, FREQUENCY), "rad/s": (1.0, FREQUENCY),
    "kg": (1.0, MASS), "kg*m/s": (1.0, MOMENTUM), "m/s": (1.0, VELOCITY), "1/m": (1.0, INVERSE_LENGTH),
    "J": (1.0, (1, 2, -2)), "eV": (E_CHARGE_SI, (1, 2, -2)), "W": (1.0, (1, 2, -3)), "N": (1.0, (1, 1, -2)),
    "1": (1.0, DIMENSIONLESS),
}


def _scenario_units(mode: str) -> UnitSystem:
    return SI if mode == "SI" else NATURAL


def to_core(raw, dims: tuple, scen: UnitSystem, core: UnitSystem, where: str) -> float:
    """Convert a scenario value (bare number or {"value", "unit"}) into the core unit system."""
    if isinstance(raw, dict):
        if set(raw) != {"value", "unit"}:
            raise ScenarioError(f"{where}: quantity objects need exactly the keys 'value' and 'unit'")
        val, unit = raw["value"], raw["unit"]
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ScenarioError(f"{where}: value must be a number")
        if unit == "natural":
            si = NATURAL.to_si(float(val), dims)
        elif unit in UNITS:
            factor, udims = UNITS[unit]
            if tuple(udims) == tuple(dims):
                si = float(val) * factor
            elif unit == "eV" and tuple(dims) == FREQUENCY:
                si = float(val) * E_CHARGE_SI / HBAR_SI
            else:
                raise ScenarioError(f"{where}: unit {unit!r} does not match the expected dimensions {dims}")
        else:
            raise ScenarioError(f"{where}: unknown unit {unit!r}; known: {', '.join(sorted(UNITS))}, natural")
        return float(core.from_si(si, dims))
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {raw!r}")
    return float(core.from_si(scen.to_si(float(raw), dims), dims))


# Parameter schemas ------------------------------------------------------------

REQUIRED = object()


@dataclass(frozen=True)
class Param:
    kind: Any  # a dimension tuple, or one of int, str, bool, list
    default: Any = REQUIRED
    choices: tuple | None = None


def _check_param(name: str, spec: Param, raw, scen: UnitSystem, core: UnitSystem):
    where = f"params.{name}"
    if spec.kind is int:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ScenarioError(f"{where}: expected an integer, got {raw!r}")
        return raw
    if spec.kind is bool:
        if not isinstance(raw, bool):
            raise ScenarioError(f"{where}: expected true/false, got {raw!r}")
        return raw
    if spec.kind is str:
        if not isinstance(raw, str):
            raise ScenarioError(f"{where}: expected a string, got {raw!r}")
        if spec.choices and raw not in spec.choices:
            raise ScenarioError(f"{where}: {raw!r} not one of {', '.join(spec.choices)}")
        return raw
    if spec.kind is list:
        if not (isinstance(raw, list) and len(raw) == 3 and all(isinstance(v, int) and not isinstance(v, bool)
                                                                 for v in raw)):
            raise ScenarioError(f"{where}: expected a list of three integers, got {raw!r}")
        return tuple(raw)
    if isinstance(raw, str) and spec.choices and raw in spec.choices:
        return raw
    value = to_core(raw, spec.kind, scen, core, where)
    if not math.isfinite(value) and value != math.inf:
        raise ScenarioError(f"{where}: value must be finite")
    return value


def _dim(d, default=REQUIRED, choices=None):
    return Param(d, default, choices)


SCHEMAS: dict[str, dict[str, Param]] = {
    "mirror:force": {
        "q0": _dim(LENGTH), "Omega": _dim(FREQUENCY), "T": _dim(TIME, math.inf), "t": _dim(TIME, 0.0),
        "area": _dim(AREA, 1.0), "field": Param(str, "1D", ("1D", "Scalar", "EM")),
    },
    "mirror:rate": {
        "Omega": _dim(FREQUENCY), "T": _dim(TIME), "q0": _dim(LENGTH, None), "v_over_c": _dim(DIMENSIONLESS, None),
        "area": _dim(AREA, None), "area_over_wavelength2": _dim(DIMENSIONLESS, None),
    },
    "mirror:decoherence": {
        "M": _dim(MASS), "Omega": _dim(FREQUENCY), "P0": _dim(MOMENTUM, None), "P0_over_dp": _dim(DIMENSIONLESS, None),
    },
    "moore": {
        "q": Param(int), "eps": _dim(DIMENSIONLESS), "L0": _dim(DIMENSIONLESS, 1.0),
        "method": Param(str, "RG", ("RG", "Numeric")), "t_max": _dim(DIMENSIONLESS, 25.0),
        "dt": _dim(DIMENSIONLESS, 0.01), "profile_time": _dim(DIMENSIONLESS, None), "nx": Param(int, 401),
    },
    "cavity": {
        "shape": Param(str, "rect", ("rect", "circ")), "Lx": _dim(LENGTH, None), "Ly": _dim(LENGTH, None),
        "Lz": _dim(LENGTH), "R": _dim(LENGTH, None), "pol": Param(str, "Scalar", ("Scalar", "TE", "TM")),
        "mode": Param(list), "eps": _dim(DIMENSIONLESS), "Omega": _dim(FREQUENCY, None),
        "t_final": _dim(TIME, None), "search_bound": Param(int, 6), "zero_mode_factor": _dim(DIMENSIONLESS, 2.0),
        "direct": Param(bool, False), "samples": Param(int, 101),
    },
    "friction": {
        "model": Param(str, "Drude", ("Drude", "Lorentz")), "wp": _dim(FREQUENCY), "gamma": _dim(FREQUENCY),
        "w0": _dim(FREQUENCY, 0.0), "d": _dim(LENGTH), "v": _dim(VELOCITY), "monte_carlo": Param(bool, False),
        "mc_samples": Param(int, 2_000_000), "seed": Param(int, 12345),
    },
    "plasma": {
        "V0": _dim(INVERSE_LENGTH), "Vmax": _dim(INVERSE_LENGTH), "Lx": _dim(LENGTH), "Ly": _dim(LENGTH),
        "Lz": Param(LENGTH, REQUIRED, ("match",)), "mode": Param(list, [1, 1, 1]), "j": Param(int, 1),
        "drive_frequency": _dim(FREQUENCY, None), "tau_e_frac": _dim(DIMENSIONLESS, 0.05),
        "tau_r_frac": _dim(DIMENSIONLESS, 0.2), "Q": _dim(DIMENSIONLESS, None), "t": _dim(TIME, None),
        "search_bound": Param(int, 4),
    },
    "estimate": {
        "Q": _dim(DIMENSIONLESS), "eps": _dim(DIMENSIONLESS), "omega": _dim(FREQUENCY, None),
        "drive_frequency": _dim(FREQUENCY, None), "eta": _dim(DIMENSIONLESS, 1.0),
        "chi1": _dim(DIMENSIONLESS, None), "chi2": _dim(DIMENSIONLESS, None), "E_pump": _dim(DIMENSIONLESS, None),
    },
}


def _core_units(verb: str, scen_mode: str) -> UnitSystem:
    # electromagnetic-field solvers run in natural units with a 1 m length unit
    if verb in ("cavity", "plasma", "moore"):
        return NATURAL
    return SI if scen_mode == "SI" else NATURAL


def _schema_key(verb: str, params: dict) -> str:
    if verb == "mirror":
        action = params.get("action")
        if action not in MIRROR_ACTIONS:
            raise ScenarioError(f"params.action: mirror needs one of {', '.join(MIRROR_ACTIONS)}, got {action!r}")
        return f"mirror:{action}"
    return verb


# Scenario ----------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    name: str
    verb: str
    unit_system: str
    params: dict
    sweep: dict = field(default_factory=dict)
    annotations: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, compare=False)

    def points(self) -> list[dict]:
        """Raw parameter dicts for every sweep point, in cartesian-product order."""
        if not self.sweep:
            return [dict(self.params)]
        axes = list(self.sweep.items())
        out = []
        for combo in itertools.product(*(vals for _, vals in axes)):
            p = dict(self.params)
            p.update({k: v for (k, _), v in zip(axes, combo)})
            out.append(p)
        return out

    def sweep_values(self, index: int) -> dict:
        if not self.sweep:
            return {}
        axes = list(self.sweep.items())
        combo = list(itertools.product(*(vals for _, vals in axes)))[index]
        return {k: v for (k, _), v in zip(axes, combo)}


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def parse_scenario(text: str, source: str = "<scenario>", verb_override: str | None = None,
                   action_override: str | None = None) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: top level must be an object")
    unknown = set(data) - {"name", "verb", "unit_system", "params", "sweep", "annotations"}
    if unknown:
        raise ScenarioError(f"{source}: unknown top-level fields {sorted(unknown)}")
    verb = data.get("verb")
    if verb_override is not None:
        if verb is not None and verb != verb_override:
            raise ScenarioError(f"{source}: scenario verb {verb!r} does not match command {verb_override!r}")
        verb = verb_override
    if verb not in VERBS:
        raise ScenarioError(f"{source}: verb must be one of {', '.join(VERBS)}, got {verb!r}")
    mode = data.get("unit_system", "SI")
    if mode not in ("SI", "natural"):
        raise ScenarioError(f"{source}: unit_system must be 'SI' or 'natural', got {mode!r}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError(f"{source}: params must be an object")
    params = dict(params)
    if action_override is not None:
        params["action"] = action_override
    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ScenarioError(f"{source}: sweep must be an object of parameter -> list")
    annotations = data.get("annotations", {})
    if not isinstance(annotations, dict):
        raise ScenarioError(f"{source}: annotations must be an object")
    sc = Scenario(str(data.get("name", Path(source).stem)), verb, mode, params, dict(sweep), dict(annotations),
                  dict(data))
    validate(sc)
    return sc


def validate(sc: Scenario) -> list[dict]:
    """Check every sweep point against the verb schema; returns the converted points."""
    for name, vals in sc.sweep.items():
        if not isinstance(vals, list) or not vals:
            raise ScenarioError(f"sweep.{name}: sweep axis must be a non-empty list")
        for v in vals:
            if isinstance(v, float) and not math.isfinite(v):
                raise ScenarioError(f"sweep.{name}: grid values must be finite")
    scen = _scenario_units(sc.unit_system)
    core = _core_units(sc.verb, sc.unit_system)
    out = []
    for raw in sc.points():
        key = _schema_key(sc.verb, raw)
        schema = SCHEMAS[key]
        extra = set(raw) - set(schema) - {"action"}
        if extra:
            raise ScenarioError(f"params: unknown parameter(s) {sorted(extra)} for {key}")
        conv = {}
        for name, spec in schema.items():
            if name in raw:
                conv[name] = _check_param(name, spec, raw[name], scen, core)
            elif spec.default is REQUIRED:
                raise ScenarioError(f"params.{name}: required for {key}")
            else:
                conv[name] = spec.default
        if "action" in raw:
            conv["action"] = raw["action"]
        out.append(conv)
    return out


def load_scenario(path: str | Path, verb: str | None = None, action: str | None = None) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario(text, str(path), verb, action)


def preset_names() -> list[str]:
    root = resources.files("dcelab") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str, verb: str | None = None, action: str | None = None) -> Scenario:
    if name not in preset_names():
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    text = (resources.files("dcelab") / "presets" / f"{name}.json").read_text(encoding="utf-8")
    return parse_scenario(text, f"{name}.json", verb, action)


# Verb handlers --------------------------------------------------------------------
# Each returns (outputs: dict of JSON-able values, tables: dict name -> (header, rows)).


def _run_mirror(p: dict, units: UnitSystem):
    action = p["action"]
    if action == "force":
        traj = mirror_vacuum.MirrorTrajectory.harmonic(p["q0"], p["Omega"], p["T"], units)
        if p["field"] == "1D":
            f = mirror_vacuum.force_1d(traj, p["t"], units)
        else:
            f = mirror_vacuum.force_3d(traj, p["area"], p["field"], p["t"], units)
        return {"force": f, "field": p["field"]}, {}
    if action == "rate":
        Om = p["Omega"]
        wavelength = 2.0 * math.pi * units.c / Om
        if (p["q0"] is None) == (p["v_over_c"] is None):
            raise ScenarioError("params: give exactly one of q0, v_over_c")
        if (p["area"] is None) == (p["area_over_wavelength2"] is None):
            raise ScenarioError("params: give exactly one of area, area_over_wavelength2")
        q0 = p["q0"] if p["q0"] is not None else p["v_over_c"] * units.c / Om
        area = p["area"] if p["area"] is not None else p["area_over_wavelength2"] * wavelength**2
        E, rate = mirror_vacuum.radiated_energy_and_rate(q0, Om, p["T"], area, units)
        return {"energy": E, "photon_rate": rate, "photons": rate * p["T"], "v_over_c": Om * q0 / units.c,
                "area_over_wavelength2": area / wavelength**2}, {}
    M, Om = p["M"], p["Omega"]
    dp = math.sqrt(M * units.hbar * Om / 2.0)
    if (p["P0"] is None) == (p["P0_over_dp"] is None):
        raise ScenarioError("params: give exactly one of P0, P0_over_dp")
    P0 = p["P0"] if p["P0"] is not None else p["P0_over_dp"] * dp
    prm = mirror_vacuum.MirrorOscillatorParams(M, Om, P0)
    return {"gamma": mirror_vacuum.damping_rate(prm, units), "D1": mirror_vacuum.diffusion_coefficient(prm, units),
            "t_d": mirror_vacuum.decoherence_time(prm, units), "delta_p": dp}, {}


def _run_moore(p: dict, units: UnitSystem):
    q, eps, L0 = p["q"], p["eps"], p["L0"]
    t_max, dt = p["t_max"] * L0, p["dt"] * L0
    t_prof = (p["profile_time"] if p["profile_time"] is not None else p["t_max"]) * L0
    if p["method"] == "RG":
        sol = moore1d.moore_rg(q, eps, L0, t_horizon=max(t_max, t_prof))
    else:
        sol = moore1d.moore_numeric(moore1d.harmonic_profile(q, eps, L0), max(t_max, t_prof) + 1.2 * L0 * (1 + eps))
    n = int(round(t_max / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    R, R1, R2, R3 = sol.derivs(t)
    prof = moore1d.energy_profile(sol, t_prof, p["nx"])
    lo = max(0.0, t_max - 2.0 * L0)
    jumps = moore1d.jump_times(sol, lo, t_max) if eps > 0 else np.array([])
    outputs = {
        "provenance": sol.provenance.value,
        "profile_time": t_prof,
        "profile_peaks": int(len(prof.peaks())),
        "peak_positions": [float(prof.x[i]) for i in prof.peaks()],
        "jump_times_last_window": [float(x) for x in jumps],
        "mirror_force": moore1d.mirror_force(sol, t_prof),
        "static_force": moore1d.static_energy_density(L0),
    }
    tables = {
        "series": (["t", "R", "Rp", "Rpp", "Rppp"], list(zip(t, R, R1, R2, R3))),
        "profile": (["x", "T00"], list(zip(prof.x, prof.values))),
    }
    return outputs, tables


def _geometry(p: dict):
    if p["shape"] == "rect":
        if p["Lx"] is None or p["Ly"] is None:
            raise ScenarioError("params: rect cavity needs Lx, Ly, Lz")
        return RectCavity(p["Lx"], p["Ly"], p["Lz"])
    if p["R"] is None:
        raise ScenarioError("params: circ cavity needs R, Lz")
    return CircCavity(p["R"], p["Lz"])


def _run_cavity(p: dict, units: UnitSystem):
    geom = _geometry(p)
    mode = ModeIndex.of(*p["mode"], pol=p["pol"])
    w = spectrum(geom, mode)
    Om = p["Omega"] if p["Omega"] is not None else 2.0 * w
    eps = p["eps"]
    t_final = p["t_final"] if p["t_final"] is not None else 0.5 / (eps * Om) if eps > 0 else 1.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = cavity3d.find_resonances(geom, Om, p["pol"], max(p["search_bound"], *p["mode"]))
    core = rep.closure(mode)
    prof = MotionProfile(eps=eps, Omega=Om, L0=geom.Lz)
    ts = np.linspace(0.0, t_final, p["samples"])
    states = cavity3d.msa_evolve(geom, prof, core, ts, seeds=None, zero_mode_factor=p["zero_mode_factor"])
    last = states[-1]
    N_msa = last.photon_numbers()
    exponent = cavity3d.msa_growth_exponent(geom, Om, core, p["zero_mode_factor"])
    outputs: dict = {
        "omega_mode": w, "Omega": Om, "t_final": t_final,
        "resonance": rep.kind.value,
        "resonant_modes": [str(m) for m in rep.resonant],
        "coupled_pairs": [[str(a), str(b)] for a, b in rep.coupled_pairs],
        "near_misses": list(rep.near_misses) + [str(c.message) for c in caught if "near-miss" not in str(c.message)],
        "core_modes": [str(m) for m in core],
        "msa_photons": {str(m): float(N_msa[i]) for i, m in enumerate(core)},
        "exponent_per_eps": exponent,
    }
    if rep.kind is cavity3d.ResonanceKind.UNCOUPLED and mode in rep.resonant:
        outputs["closed_form_photons"] = float(cavity3d.photon_number_closed_form(geom, mode, eps, t_final, Om))
        outputs["closed_form_exponent_per_eps"] = 2.0 * cavity3d.growth_rate(geom, mode)
    if p["direct"]:
        trunc = cavity3d.truncation_set(geom, core)
        st = cavity3d.integrate_modes(geom, prof, trunc, t_final, zero_mode_factor=p["zero_mode_factor"])
        bog = cavity3d.extract_bogoliubov(st)
        N = bog.photon_numbers()
        outputs["direct_t_stop"] = st.t
        outputs["direct_photons"] = {str(m): float(N[i]) for i, m in enumerate(st.modes)}
        outputs["unitarity_defect"] = bog.unitarity_defect()
    header = ["t"]
    for m in core:
        header += [f"absA_{m}", f"absB_{m}"]
    rows = []
    for s in states:
        # amplitudes summed in quadrature over seeds
        a = np.sqrt(np.sum(np.abs(s.A) ** 2, axis=1))
        b = np.sqrt(np.sum(np.abs(s.B) ** 2, axis=1))
        rows.append([s.t] + [v for pair in zip(a, b) for v in pair])
    return outputs, {"amplitudes": (header, rows)}


def _run_friction(p: dict, units: UnitSystem):
    if p["model"] == "Drude":
        model = friction.DielectricModel.drude(p["wp"], p["gamma"])
    else:
        model = friction.DielectricModel.lorentz(p["w0"], p["wp"], p["gamma"])
    sc = friction.FrictionScenario(model, p["d"], p["v"])
    res = friction.friction_force(sc, units, detail=True)
    out = {"F_x": res.force, "k_cut": res.k_cut, "abserr": res.abserr, "k_evaluations": res.evaluations}
    if p["monte_carlo"]:
        mc, se = friction.friction_force_mc(sc, p["mc_samples"], p["seed"], units=units)
        out.update({"F_x_mc": mc, "F_x_mc_stderr": se})
    return out, {}


def _run_plasma(p: dict, units: UnitSystem):
    n = ModeIndex.of(*p["mode"])
    Lz = p["Lz"]
    j = p["j"]
    if p["drive_frequency"] is not None:
        Om_j = p["drive_frequency"]
        T = 2.0 * math.pi * j / Om_j
        if Lz == "match":
            Lz = plasma_sheet.length_for_frequency(p["Lx"], p["Ly"], p["V0"], 0.5 * Om_j, n)
    else:
        if Lz == "match":
            raise ScenarioError("params.Lz: 'match' needs drive_frequency")
        T = plasma_sheet.resonant_period(RectCavity(p["Lx"], p["Ly"], Lz), p["V0"], n, j)
    geom = RectCavity(p["Lx"], p["Ly"], Lz)
    pulse = plasma_sheet.PulseShape(T, p["tau_e_frac"] * T, p["tau_r_frac"] * T)
    model = plasma_sheet.SheetModel(p["V0"], p["Vmax"], pulse)
    spec = plasma_sheet.sheet_spectrum(geom, p["V0"], max(n.nx, p["search_bound"]))
    w = spec.omega(n)
    rep = plasma_sheet.resonance_check_sheet(model, geom, j, max(p["search_bound"], *p["mode"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eps_n = plasma_sheet.modulation_depth(model, geom.Lx, n.nx)
    out = {
        "Lz": Lz, "T": T, "T_SI": T / C_SI, "Omega_j": 2.0 * math.pi * j / T, "omega_mode": w,
        "omega_mode_SI": w * C_SI, "k0": float(spec.k[n.nx - 1]),
        "wavenumbers": [float(k) for k in spec.k], "eps_n": eps_n, "f_j": pulse.harmonic(j),
        "perturbative": model.perturbative(geom.Lx), "resonance": rep.kind.value,
        "resonant_modes": [str(m) for m in rep.resonant],
        "coupled_pairs": [[str(a), str(b)] for a, b in rep.coupled_pairs],
    }
    t = p["t"]
    if t is None and p["Q"] is not None:
        t = p["Q"] / w
    if t is not None:
        out["t"] = t
        out["photons"] = float(plasma_sheet.sheet_photon_number(model, geom, n, j, t, max(p["search_bound"], *p["mode"])))
    return out, {}


def _run_estimate(p: dict, units: UnitSystem):
    if (p["omega"] is None) == (p["drive_frequency"] is None):
        raise ScenarioError("params: give exactly one of omega, drive_frequency")
    # a wall driven at Omega pumps photons at Omega / 2
    omega = p["omega"] if p["omega"] is not None else 0.5 * p["drive_frequency"]
    res = estimates.estimate_max_photons(estimates.EstimateInput(p["Q"], p["eps"], omega, p["eta"]), units)
    out = {"omega": omega, "N_max": res.N_max, "t_max": res.t_max, "P_max": res.P_max, "feasible": res.feasible}
    opo = [p["chi1"], p["chi2"], p["E_pump"]]
    if any(v is not None for v in opo):
        if any(v is None for v in opo):
            raise ScenarioError("params: OPO mapping needs chi1, chi2 and E_pump together")
        out["opo_modulation_depth"] = estimates.opo_modulation_depth(*opo)
    return out, {}


HANDLERS: dict[str, Callable] = {
    "mirror": _run_mirror, "moore": _run_moore, "cavity": _run_cavity,
    "friction": _run_friction, "plasma": _run_plasma, "estimate": _run_estimate,
}


# Execution --------------------------------------------------------------------


def run_point(verb: str, unit_mode: str, params: dict) -> tuple[str, Any]:
    """Run one sweep point; returns ("ok", (outputs, tables)) or ("error", message)."""
    core = _core_units(verb, unit_mode)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return "ok", HANDLERS[verb](params, core)
    except (DceError, ArithmeticError, ValueError) as exc:
        return "error", f"{type(exc).__name__}: {exc}"


def git_describe() -> str:
    here = Path(__file__).resolve().parent
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here, capture_output=True,
                             text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return res.stdout.strip() if res.returncode == 0 and res.stdout.strip() else "unknown"


@dataclass(frozen=True)
class RunOutcome:
    report: dict
    files: tuple
    n_ok: int
    n_failed: int


def _scalar_columns(outputs: list[dict]) -> list[str]:
    cols: list[str] = []
    for o in outputs:
        for k, v in o.items():
            if isinstance(v, (int, float, bool, str, np.floating, np.integer)) and k not in cols:
                cols.append(k)
    return cols


def run_scenario(sc: Scenario, out_dir: str | Path, jobs: int = 1) -> RunOutcome:
    """Execute every sweep point and write report.json, summary.csv and per-point tables."""
    points = validate(sc)
    out_dir = Path(out_dir)
    args = [(sc.verb, sc.unit_system, p) for p in points]
    if jobs > 1 and len(points) > 1:
        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_point, *zip(*args)))
    else:
        results = [run_point(*a) for a in args]

    ok_rows, failures, written = [], [], []
    multi = len(points) > 1
    for i, (status, payload) in enumerate(results):
        sweep_vals = sc.sweep_values(i)
        if status == "error":
            failures.append({"index": i, "sweep": sweep_vals, "error": payload})
            continue
        outputs, tables = payload
        files = {}
        for tname, (header, rows) in tables.items():
            fname = f"{sc.name}_{tname}_{i:04d}.csv" if multi else f"{sc.name}_{tname}.csv"
            written.append(atomic_write(out_dir / fname, to_csv(header, rows)))
            files[tname] = fname
        entry = {"index": i, "sweep": sweep_vals, "outputs": outputs}
        if files:
            entry["tables"] = files
        ok_rows.append(entry)

    report = {
        "scenario": {"name": sc.name, "verb": sc.verb, "unit_system": sc.unit_system,
                     "core_units": _core_units(sc.verb, sc.unit_system).mode.value, "source": sc.raw,
                     "annotations": sc.annotations},
        "git_describe": git_describe(),
        "results": ok_rows,
        "failures": failures,
    }
    written.append(atomic_write(out_dir / f"{sc.name}_report.json", to_json(report)))
    axes = list(sc.sweep)
    cols = _scalar_columns([r["outputs"] for r in ok_rows])
    rows = []
    for i, (status, payload) in enumerate(results):
        sv = sc.sweep_values(i)
        axis_vals = [json.dumps(sv[a], sort_keys=True) if isinstance(sv[a], dict) else sv[a] for a in axes]
        if status == "error":
            rows.append([i, "failed"] + axis_vals + [None] * len(cols))
        else:
            o = payload[0]
            rows.append([i, "ok"] + axis_vals + [o.get(c) for c in cols])
    written.append(atomic_write(out_dir / f"{sc.name}_summary.csv", to_csv(["index", "status"] + axes + cols, rows)))
    return RunOutcome(report, tuple(written), len(ok_rows), len(failures))
