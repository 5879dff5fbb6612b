"""Plain-text run configuration.

Grammar::

    # comment
    [section]
    key = value

Every key belongs to exactly one section and only ``time.t_end`` is
required.  Unknown sections or keys, duplicates, out-of-range values and
malformed numbers are collected and reported together with their line
numbers.  :func:`dump` writes every
key in a fixed order so ``dump(parse(dump(c))) == dump(c)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, make_dataclass, replace


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def _float_list(text):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    return tuple(float(p) for p in parts)


def _windows(text):
    """``"5:35, 10:30"`` -> ((5.0, 35.0), (10.0, 30.0))"""
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        lo, hi = chunk.split(":")
        out.append((float(lo), float(hi)))
    return tuple(out)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{a!r}:{b!r}" for a, b in value)
        return ", ".join(repr(v) for v in value)
    return str(value)


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


# section -> key -> (type, default, check, description of admissible range)
SCHEMA = {
    "run": {
        "phase": (str, "coupled", lambda x: x in ("coupled", "euler", "ns", "kinetic"), "one of coupled, euler, ns, kinetic"),
        "seed": (int, 0, _nonneg, ">= 0"),
        "workers": (int, 1, _positive, ">= 1"),
    },
    "grid": {
        "dim": (int, 3, lambda x: x in (1, 2, 3), "1, 2 or 3"),
        "n": (int, 64, lambda x: x >= 8 and not x & (x - 1), "a power of two >= 8"),
        "length": (float, 50.0, _positive, "> 0"),
    },
    "initial": {
        "kind": (str, "gaussian", lambda x: x in ("gaussian", "taylor_green", "uniform", "sine", "random"),
                 "one of gaussian, taylor_green, uniform, sine, random"),
        "rho_bar": (float, 1.0, _nonneg, ">= 0"),
        "rho_amp": (float, 0.05, _nonneg, ">= 0"),
        "u_amp": (float, 0.05, lambda x: math.isfinite(x), "finite"),
        "v_amp": (float, 0.05, lambda x: math.isfinite(x), "finite"),
        "width": (float, 3.0, _positive, "> 0"),
        "scale": (float, 1.0, _nonneg, ">= 0"),
    },
    "physics": {
        "mu": (float, 1.0, _positive, "> 0"),
        "drag": (str, "explicit", lambda x: x in ("explicit", "exact", "off"), "one of explicit, exact, off"),
        "theta": (float, 1.3, lambda x: 1.0 <= x <= 2.0, "in [1, 2]"),
        "rho_floor_rel": (float, 1e-10, _positive, "> 0"),
    },
    "time": {
        "cfl": (float, 0.4, lambda x: 0.0 < x < 1.0, "in (0, 1)"),
        "dt_max": (float, 0.1, _positive, "> 0"),
        "t_end": (float, 1.0, _nonneg, ">= 0"),
        "energy_dt": (float, 0.0, _nonneg, ">= 0 (0 disables)"),
    },
    "output": {
        "diag_every": (int, 10, _positive, ">= 1"),
        "snapshot_every": (int, 0, _nonneg, ">= 0 (0 disables)"),
        "history_every": (int, 0, _nonneg, ">= 0 (0 disables)"),
        "sobolev_s": (int, 2, _nonneg, ">= 0"),
        "weighted_r": (_float_list, (0.0, 0.5), lambda x: all(r >= 0 for r in x), "nonnegative list"),
        "sample_points": (int, 10, _nonneg, ">= 0"),
        "fit_windows": (_windows, ((5.0, 35.0),), lambda x: all(0 <= a < b for a, b in x), "t0:t1 pairs with 0 <= t0 < t1"),
    },
    "kinetic": {
        "eps": (float, 0.1, _positive, "> 0"),
        "eps_sweep": (_float_list, (0.2, 0.1, 0.05), lambda x: len(x) >= 1 and all(e > 0 for e in x), "positive list"),
        "nx": (int, 128, lambda x: x >= 8, ">= 8"),
        "nxi": (int, 128, lambda x: x >= 8, ">= 8"),
        "length": (float, 10.0, _positive, "> 0"),
        "rho_amp": (float, 0.5, lambda x: 0.0 <= x < 1.0, "in [0, 1)"),
        "u_amp": (float, 0.0, lambda x: math.isfinite(x), "finite"),
        "v_amp": (float, 1.0, lambda x: math.isfinite(x), "finite"),
        "v_omega": (float, 2.0 * math.pi, lambda x: math.isfinite(x), "finite"),
        "v_shear": (float, 0.0, lambda x: math.isfinite(x), "finite"),
        "thermal_width": (float, 0.0, _nonneg, ">= 0"),
        "alignment": (str, "exact", lambda x: x in ("upwind", "exact"), "upwind or exact"),
        "cfl": (float, 0.4, lambda x: 0.0 < x < 1.0, "in (0, 1)"),
        "output_dt": (float, 0.1, _positive, "> 0"),
    },
}

REQUIRED = (("time", "t_end"),)

_TYPE_NAMES = {int: "integer", float: "number", str: "string", _float_list: "number list", _windows: "window list"}


def _section_class(name, spec):
    cls_fields = [(key, object, field(default=default)) for key, (typ, default, _, _) in spec.items()]
    return make_dataclass(name.capitalize() + "Config", cls_fields, frozen=True)


SECTIONS = {name: _section_class(name, spec) for name, spec in SCHEMA.items()}


@dataclass(frozen=True)
class RunConfig:
    run: object = field(default_factory=SECTIONS["run"])
    grid: object = field(default_factory=SECTIONS["grid"])
    initial: object = field(default_factory=SECTIONS["initial"])
    physics: object = field(default_factory=SECTIONS["physics"])
    time: object = field(default_factory=SECTIONS["time"])
    output: object = field(default_factory=SECTIONS["output"])
    kinetic: object = field(default_factory=SECTIONS["kinetic"])


def _convert(section, key, raw, lineno, errors):
    typ, _, check, admissible = SCHEMA[section][key]
    try:
        if typ is int:
            value = int(raw, 10)
        elif typ is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
        else:
            value = typ(raw)
    except ValueError:
        errors.append(f"line {lineno}: {section}.{key}: expected {_TYPE_NAMES[typ]}, got {raw!r}")
        return None
    if not check(value):
        errors.append(f"line {lineno}: {section}.{key} = {raw} is out of range; admissible: {admissible}")
        return None
    return value


def parse(text):
    """Parse and validate config text; raises :class:`ConfigError` with every problem found."""
    errors = []
    values = {name: {} for name in SCHEMA}
    seen = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                errors.append(f"line {lineno}: malformed section header {stripped!r}")
                section = None
                continue
            section = stripped[1:-1].strip()
            if section not in SCHEMA:
                errors.append(f"line {lineno}: unknown section [{section}]")
                section = None
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, raw = (p.strip() for p in stripped.split("=", 1))
        if section is None:
            errors.append(f"line {lineno}: key {key!r} outside a known section")
            continue
        if key not in SCHEMA[section]:
            errors.append(f"line {lineno}: unknown key {section}.{key}")
            continue
        full = f"{section}.{key}"
        if full in seen:
            errors.append(f"line {lineno}: duplicate key {full} (first set on line {seen[full]})")
            continue
        seen[full] = lineno
        value = _convert(section, key, raw, lineno, errors)
        if value is not None:
            values[section][key] = value
    for section, key in REQUIRED:
        if f"{section}.{key}" not in seen:
            errors.append(f"missing required key {section}.{key}")
    if errors:
        raise ConfigError(errors)
    return RunConfig(**{name: SECTIONS[name](**vals) for name, vals in values.items()})


def dump(config):
    lines = []
    for name in SCHEMA:
        lines.append(f"[{name}]")
        sec = getattr(config, name)
        for key in SCHEMA[name]:
            lines.append(f"{key} = {_fmt(getattr(sec, key))}")
        lines.append("")
    return "\n".join(lines)


def override(config, assignments):
    """Apply ``section.key=value`` (or unambiguous ``key=value``) strings."""
    errors = []
    updates = {}
    for item in assignments:
        if "=" not in item:
            errors.append(f"override {item!r}: expected key=value")
            continue
        key, raw = (p.strip() for p in item.split("=", 1))
        if "." in key:
            section, key = key.split(".", 1)
            if section not in SCHEMA or key not in SCHEMA[section]:
                errors.append(f"override: unknown key {section}.{key}")
                continue
        else:
            owners = [s for s in SCHEMA if key in SCHEMA[s]]
            if len(owners) != 1:
                what = "unknown" if not owners else "ambiguous (" + ", ".join(f"{s}.{key}" for s in owners) + ")"
                errors.append(f"override: key {key!r} is {what}")
                continue
            section = owners[0]
        value = _convert(section, key, raw, "--override", errors)
        if value is not None:
            updates.setdefault(section, {})[key] = value
    if errors:
        raise ConfigError(errors)
    return replace(config, **{s: replace(getattr(config, s), **kv) for s, kv in updates.items()})


def section_dict(config, name):
    sec = getattr(config, name)
    return {f.name: getattr(sec, f.name) for f in fields(sec)}
