"""Run configuration: TOML text -> validated :class:`RunConfig`.

A config names one experiment and carries the sections it needs::

    experiment = "berry"

    [model]
    variant = "EpsilonE"
    Omega = 0.0
    g = 1.0

    [berry]
    radius = 1.0

Sections are ``model``, ``space``, ``loss``, ``evolution``, ``output`` and one
section named after the experiment for its own parameters.  Every omitted
key is filled from the defaults below, so the resolved config is explicit.
"""
from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .dynamics import EvolutionConfig, LossSpec
from .models import ModelError, ModelSpec

EXPERIMENTS = (
    "surface", "minima", "gauge", "berry", "classify", "evolve",
    "nonabelian", "hall", "zitter", "diracjc", "force",
)
EVOLVING = ("evolve", "nonabelian", "hall", "zitter")

_REQ = object()  # marker for required keys

SCHEMA: dict[str, dict[str, Any]] = {
    "model": {"variant": _REQ, "omega": 1.0, "g": None, "Omega": None, "E3": None, "c": None, "m": None},
    "space": {"cutoff": 40},
    "loss": {"kappa": 0.0, "gamma": 0.0, "lowering": [2, 1]},
    "evolution": {
        "t_max": _REQ, "n_steps": _REQ, "method": "rk4", "record_every": 1,
        "tol": 1e-8, "atol": 1e-12, "rtol": 1e-10,
    },
    "output": {"dir": "out", "csv": "results.csv", "manifest": "manifest.json", "hbar_display": 1.0},
    # experiment sections
    "surface": {"p_min": -5.0, "p_max": 5.0, "n_points": 401, "kind": "adiabatic"},
    "minima": {"g_values": []},
    "gauge": {},
    "berry": {"center": [0.0, 0.0], "radius": 1.0, "n_points": 512, "branch": 0, "start_angle": 0.0},
    "classify": {},
    "evolve": {"alpha": 0.0, "phase": 0.0, "mode": "x", "atom_level": 2, "fock": 0},
    "nonabelian": {"alpha_mag": 2.0, "phase_ccw": None, "phase_cw": None},
    "hall": {"alpha_mag": 2.0, "atom_levels": [1, 2], "sense_periods": 4.0},
    "zitter": {"seed_alpha": 0.3},
    "diracjc": {"tol": 1e-8},
    "force": {},
}
_COMMON = ("model", "space", "output")


class ConfigError(ValueError):
    """Invalid configuration text or values."""


def _suggest(key: str, options) -> str:
    close = difflib.get_close_matches(key, list(options), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    sections: dict[str, dict[str, Any]] = field(default_factory=dict)

    def __getitem__(self, name: str) -> dict[str, Any]:
        return self.sections[name]

    @property
    def params(self) -> dict[str, Any]:
        return self.sections[self.experiment]

    def to_dict(self) -> dict[str, Any]:
        """Resolved config; ``None`` values are dropped (absent keys)."""
        out: dict[str, Any] = {"experiment": self.experiment}
        for name, sec in self.sections.items():
            out[name] = {k: v for k, v in sec.items() if v is not None}
        return out

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    # typed views ---------------------------------------------------------

    def model_spec(self) -> ModelSpec:
        m = self["model"]
        omega = m["omega"]
        omega = tuple(omega) if isinstance(omega, list) else omega
        return ModelSpec(m["variant"], omega, m["g"], m["Omega"], m["E3"], m["c"], m["m"])

    def space(self):
        return self.model_spec().space(self["space"]["cutoff"])

    def losses(self) -> LossSpec | None:
        if "loss" not in self.sections:
            return None
        l = self["loss"]
        return LossSpec(l["kappa"], l["gamma"], tuple(l["lowering"]))

    def evolution(self) -> EvolutionConfig:
        e = self["evolution"]
        return EvolutionConfig(
            t_max=e["t_max"], n_steps=e["n_steps"], method=e["method"],
            record_every=e["record_every"], tol=e["tol"], atol=e["atol"], rtol=e["rtol"],
        )


def parse_config(text: str) -> RunConfig:
    """Parse and validate TOML config text."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"syntax error: {exc}") from None
    return config_from_mapping(raw)


def config_from_mapping(raw: dict[str, Any]) -> RunConfig:
    raw = dict(raw)
    exp = raw.pop("experiment", None)
    if exp is None:
        raise ConfigError("missing required key 'experiment'")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}{_suggest(str(exp), EXPERIMENTS)}")
    allowed = set(_COMMON) | {exp}
    if exp in EVOLVING:
        allowed |= {"loss", "evolution"}
    for name in raw:
        if name in EXPERIMENTS and name != exp:
            raise ConfigError(f"section [{name}] selects a second experiment; only [{exp}] is allowed")
        if name not in allowed:
            raise ConfigError(f"unknown section [{name}]{_suggest(name, allowed)}")
        if not isinstance(raw[name], dict):
            raise ConfigError(f"{name!r} must be a section, got a value")
    sections = {}
    for name in sorted(allowed):
        given = dict(raw.get(name, {}))
        if name == "evolution" and name not in raw:
            raise ConfigError(f"experiment {exp!r} needs an [evolution] section")
        if name == "loss" and name not in raw:
            continue
        if name == "model" and name not in raw:
            raise ConfigError("missing required section [model]")
        schema = SCHEMA[name]
        for key in given:
            if key not in schema:
                raise ConfigError(f"unknown key {name}.{key}{_suggest(key, schema)}")
        resolved = {}
        for key, default in schema.items():
            if key in given:
                resolved[key] = given[key]
            elif default is _REQ:
                raise ConfigError(f"missing required field {name}.{key}")
            else:
                resolved[key] = list(default) if isinstance(default, list) else default
        sections[name] = resolved
    cfg = RunConfig(exp, sections)
    _validate(cfg)
    return cfg


def _positive(cfg: RunConfig, section: str, key: str, strict: bool = True):
    val = cfg[section][key]
    vals = val if isinstance(val, list) else [val]
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{section}.{key} must be numeric, got {v!r}")
        if (v <= 0) if strict else (v < 0):
            raise ConfigError(f"{section}.{key} must be {'positive' if strict else 'non-negative'}, got {v!r}")


def _validate(cfg: RunConfig):
    try:
        spec = cfg.model_spec()
    except ModelError as exc:
        msg = str(exc)
        if "omega" in msg:
            msg = f"model.omega: {msg}"
        raise ConfigError(msg) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[model]: {exc}") from None
    cut = cfg["space"]["cutoff"]
    cuts = cut if isinstance(cut, list) else [cut]
    if any(not isinstance(c, int) or c < 2 for c in cuts):
        raise ConfigError(f"space.cutoff must be integer(s) >= 2, got {cut!r}")
    if isinstance(cut, list) and len(cut) != len(spec.mode_labels):
        raise ConfigError(f"space.cutoff lists {len(cut)} cutoffs for {len(spec.mode_labels)} modes")
    _positive(cfg, "output", "hbar_display")
    exp = cfg.experiment
    if "loss" in cfg.sections:
        kappa = cfg["loss"]["kappa"]
        if isinstance(kappa, dict):
            for lab, v in kappa.items():
                if lab not in spec.mode_labels:
                    raise ConfigError(f"loss.kappa names unknown mode {lab!r}")
                if not isinstance(v, (int, float)) or v < 0:
                    raise ConfigError(f"loss.kappa.{lab} must be non-negative")
        else:
            _positive(cfg, "loss", "kappa", strict=False)
        _positive(cfg, "loss", "gamma", strict=False)
    if "evolution" in cfg.sections:
        _positive(cfg, "evolution", "t_max")
        for key in ("tol", "atol", "rtol"):
            _positive(cfg, "evolution", key)
        try:
            cfg.evolution()
            cfg.losses()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[evolution]/[loss]: {exc}") from None
    need = {
        "surface": None, "minima": ("BetaE", "EpsilonE"), "gauge": ("BetaE", "EpsilonE", "RennerTeller"),
        "berry": ("EpsilonE", "RennerTeller"), "classify": ("EpsilonE", "RennerTeller"),
        "evolve": None, "nonabelian": ("EpsilonE",), "hall": ("EpsilonE",), "zitter": ("DiracLimit",),
        "diracjc": ("DiracOscillator",), "force": ("EpsilonE",),
    }[exp]
    if need is not None and spec.variant not in need:
        raise ConfigError(f"experiment {exp!r} needs model.variant in {need}, got {spec.variant!r}")
    p = cfg.params
    if exp == "surface":
        if spec.variant == "DiracOscillator":
            raise ConfigError("experiment 'surface' does not support DiracOscillator")
        if p["kind"] not in ("adiabatic", "diabatic"):
            raise ConfigError(f"surface.kind must be 'adiabatic' or 'diabatic', got {p['kind']!r}")
        if not p["p_max"] > p["p_min"]:
            raise ConfigError("surface.p_max must exceed surface.p_min")
        if p["n_points"] < 3:
            raise ConfigError("surface.n_points must be >= 3")
    elif exp == "berry":
        _positive(cfg, "berry", "radius")
        if p["n_points"] < 16:
            raise ConfigError("berry.n_points must be >= 16")
    elif exp in ("nonabelian", "hall"):
        _positive(cfg, exp, "alpha_mag", strict=False)
        if exp == "hall" and any(l not in (1, 2) for l in p["atom_levels"]):
            raise ConfigError("hall.atom_levels entries must be 1 or 2")
    elif exp == "evolve":
        if p["mode"] not in spec.mode_labels:
            raise ConfigError(f"evolve.mode {p['mode']!r} not in {spec.mode_labels}")
        if not 1 <= p["atom_level"] <= spec.atom_levels:
            raise ConfigError(f"evolve.atom_level must be in 1..{spec.atom_levels}")


# ---------------------------------------------------------------------------
# presets

PRESETS: dict[str, tuple[str, str]] = {
    "betae-double-well": (
        "BetaE lower-surface regime sweep across the Jahn-Teller threshold",
        """\
experiment = "minima"

[model]
variant = "BetaE"
omega = 1.0
Omega = 1.0
g = 1.0

[minima]
g_values = [0.25, 0.5, 0.6, 0.7, 0.72, 0.8, 1.0, 1.5]
""",
    ),
    "nonabelian-loop": (
        "EpsilonE clockwise/anticlockwise coherent-state pair (closed system, desk scale)",
        """\
experiment = "nonabelian"

[model]
variant = "EpsilonE"
omega = 1.0
Omega = 1.0
g = 0.3

[space]
cutoff = 12

[evolution]
t_max = 40.0
n_steps = 8000
record_every = 20

[nonabelian]
alpha_mag = 2.0
""",
    ),
    "hall-desk": (
        "EpsilonE transverse Hall transfer x -> y for both atomic states (desk scale)",
        """\
experiment = "hall"

[model]
variant = "EpsilonE"
omega = 1.0
Omega = 0.2
g = 0.1

[space]
cutoff = 12

[evolution]
t_max = 200.0
n_steps = 50000
record_every = 50

[hall]
alpha_mag = 2.0
atom_levels = [1, 2]
""",
    ),
    "rt-berry-null": (
        "Renner-Teller Berry phase around the glancing intersection (vanishes)",
        """\
experiment = "berry"

[model]
variant = "RennerTeller"
omega = 1.0
E3 = 1.0
g = 1.0

[berry]
radius = 1.0
n_points = 512
branch = 0
""",
    ),
    "conical-berry": (
        "EpsilonE Berry phase around the conical intersection (pi)",
        """\
experiment = "berry"

[model]
variant = "EpsilonE"
omega = 1.0
Omega = 0.0
g = 1.0

[berry]
radius = 1.0
n_points = 512
""",
    ),
    "dirac-jc": (
        "Spin-less Dirac oscillator versus its Jaynes-Cummings image",
        """\
experiment = "diracjc"

[model]
variant = "DiracOscillator"
omega = 1.0
c = 1.0
m = 1.0

[space]
cutoff = 40
""",
    ),
    "zitterbewegung": (
        "Dirac-limit interference frequency against the branch gap",
        """\
experiment = "zitter"

[model]
variant = "DiracLimit"
omega = 1.0
Omega = 1.0
g = 0.2

[space]
cutoff = 12

[evolution]
t_max = 200.0
n_steps = 40000
record_every = 10

[zitter]
seed_alpha = 0.3
""",
    ),
}
