"""Strict experiment configuration: JSON files in, validated Config out.

Unknown keys are errors (a typo'd parameter silently ignored would
invalidate a numerical experiment), and validation reports every problem
found, not just the first. The normalized config (defaults filled) is what
gets echoed into run manifests, and re-parsing a manifest reproduces it
byte-identically.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from .errors import ConfigError
from .grid import SpectralGrid
from .models import model_from_preset
from .splitting import DynamicM2, SplitConfig, StaticM2
from .steppers import SchemeConfig

__all__ = ["Config", "parse_config", "parse_config_dict", "manifest_json"]

EXPERIMENTS = ("simulate", "converge", "m2sweep", "stabmap")


class _Check:
    """Accumulates validation errors with dotted key paths."""

    def __init__(self):
        self.errors = []

    def fail(self, path, msg):
        self.errors.append(f"{path}: {msg}")

    def section(self, parent, path, *, required=True, default=None):
        if path.split(".")[-1] not in parent:
            if required:
                self.fail(path, "missing required section")
            return dict(default) if default is not None else None
        value = parent[path.split(".")[-1]]
        if not isinstance(value, dict):
            self.fail(path, f"expected an object, got {type(value).__name__}")
            return None
        return value

    def known_keys(self, obj, path, allowed):
        for key in obj:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else key, "unknown key")

    def get(self, obj, path, key, typ, *, required=True, default=None,
            positive=False, nonnegative=False, choices=None):
        full = f"{path}.{key}" if path else key
        if key not in obj:
            if required:
                self.fail(full, "missing required key")
            return default
        value = obj[key]
        if typ is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if typ is int and isinstance(value, bool):
            self.fail(full, "expected an integer, got a boolean")
            return default
        if not isinstance(value, typ):
            self.fail(full, f"expected {typ.__name__}, got {type(value).__name__}")
            return default
        if positive and not value > 0:
            self.fail(full, f"must be positive, got {value}")
        if nonnegative and value < 0:
            self.fail(full, f"must be nonnegative, got {value}")
        if choices is not None and value not in choices:
            self.fail(full, f"must be one of {sorted(choices)}, got {value!r}")
        return value

    def number_list(self, obj, path, key, *, required=True, positive=False,
                    allow_empty=False):
        full = f"{path}.{key}" if path else key
        if key not in obj:
            if required:
                self.fail(full, "missing required key")
            return None
        value = obj[key]
        if (not isinstance(value, list) or (not value and not allow_empty)
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in value)):
            self.fail(full, "expected a nonempty list of numbers")
            return None
        if positive and any(v <= 0 for v in value):
            self.fail(full, "all entries must be positive")
        return [float(v) for v in value]


@dataclass
class Config:
    """Validated, normalized experiment configuration."""

    data: dict

    @property
    def experiment(self):
        return self.data["experiment"]

    def build_grid(self) -> SpectralGrid:
        g = self.data["grid"]
        return SpectralGrid.create(tuple(g["n"]), tuple(g["length"]),
                                   dealias=g["dealias"])

    def build_model(self):
        m = dict(self.data["model"])
        preset = m.pop("preset")
        return model_from_preset(preset, **m)

    def build_scheme(self) -> SchemeConfig:
        s = self.data["scheme"]
        return SchemeConfig(kind=s["kind"], j=s["j"],
                            initial_iterate=s["initial_iterate"])

    def build_split(self) -> SplitConfig:
        s = self.data["split"]
        m2 = s["m2"]
        rule = StaticM2(m2["static"]) if "static" in m2 else DynamicM2(m2["dynamic_alpha"])
        return SplitConfig(m0=s["m0"], m1=s["m1"], m2=rule,
                           allow_explicit=s["allow_explicit"])

    def build_initial_condition(self, grid):
        from .experiments import initial_condition

        return initial_condition(grid, self.data["ic"])


def _validate_model(ck, raw):
    out = {}
    obj = ck.section(raw, "model")
    if obj is None:
        return out
    ck.known_keys(obj, "model", {"preset", "eps", "omega"})
    preset = ck.get(obj, "model", "preset", str,
                    choices={"classic_ch", "thin_film", "chvm", "forced_thin_film"})
    out["preset"] = preset
    if preset == "chvm":
        out["omega"] = ck.get(obj, "model", "omega", float, positive=True)
        out["eps"] = ck.get(obj, "model", "eps", float, required=False,
                            default=1.0, positive=True)
    elif preset is not None:
        if "omega" in obj:
            ck.fail("model.omega", f"not accepted by preset {preset!r}")
        out["eps"] = ck.get(obj, "model", "eps", float, positive=True)
    return out


def _validate_grid(ck, raw):
    out = {}
    obj = ck.section(raw, "grid")
    if obj is None:
        return out
    ck.known_keys(obj, "grid", {"n", "length", "length_pi", "dealias"})
    n = obj.get("n")
    if (not isinstance(n, list) or not 1 <= len(n) <= 3
            or not all(isinstance(m, int) and not isinstance(m, bool) for m in n)):
        ck.fail("grid.n", "expected a list of 1-3 integers")
    else:
        for m in n:
            if m < 2 or (m & (m - 1)) != 0:
                ck.fail("grid.n", f"modes must be powers of two, got {m}")
        out["n"] = n
    if ("length" in obj) == ("length_pi" in obj):
        ck.fail("grid", "exactly one of 'length' or 'length_pi' is required")
    elif "length" in obj:
        out["length"] = ck.number_list(obj, "grid", "length", positive=True)
    else:
        mult = ck.number_list(obj, "grid", "length_pi", positive=True)
        out["length"] = [m * math.pi for m in mult] if mult else None
    if out.get("length") is not None and out.get("n") is not None:
        if len(out["length"]) != len(out["n"]):
            ck.fail("grid", "length and n must have the same dimension")
    out["dealias"] = ck.get(obj, "grid", "dealias", bool, required=False, default=False)
    return out


def _validate_ic(ck, raw):
    obj = ck.section(raw, "ic")
    if obj is None:
        return {}
    kind = ck.get(obj, "ic", "kind", str,
                  choices={"cosine", "random", "manufactured", "snapshot"})
    out = {"kind": kind}
    if kind == "cosine":
        ck.known_keys(obj, "ic", {"kind", "mean", "amp", "mode"})
        out["mean"] = ck.get(obj, "ic", "mean", float)
        out["amp"] = ck.get(obj, "ic", "amp", float)
        out["mode"] = ck.get(obj, "ic", "mode", int, required=False, default=1)
    elif kind == "random":
        ck.known_keys(obj, "ic", {"kind", "mean", "eta", "seed"})
        out["mean"] = ck.get(obj, "ic", "mean", float)
        out["eta"] = ck.get(obj, "ic", "eta", float, nonnegative=True)
        out["seed"] = ck.get(obj, "ic", "seed", int, nonnegative=True)
    elif kind == "manufactured":
        ck.known_keys(obj, "ic", {"kind", "t0"})
        out["t0"] = ck.get(obj, "ic", "t0", float, required=False, default=0.0)
    elif kind == "snapshot":
        ck.known_keys(obj, "ic", {"kind", "path"})
        out["path"] = ck.get(obj, "ic", "path", str)
    return out


def _validate_scheme(ck, raw):
    obj = ck.section(raw, "scheme")
    if obj is None:
        return {}
    ck.known_keys(obj, "scheme", {"kind", "j", "initial_iterate"})
    out = {
        "kind": ck.get(obj, "scheme", "kind", str,
                       choices={"be", "cn", "imex1", "imex2"}),
        "j": ck.get(obj, "scheme", "j", int, required=False, default=1, positive=True),
        "initial_iterate": ck.get(obj, "scheme", "initial_iterate", str,
                                  required=False, default="previous",
                                  choices={"previous", "extrapolated"}),
    }
    return out


def _validate_split(ck, raw):
    obj = ck.section(raw, "split")
    if obj is None:
        return {}
    ck.known_keys(obj, "split", {"m0", "m1", "m2", "allow_explicit"})
    out = {
        "m0": ck.get(obj, "split", "m0", float, required=False, default=0.0,
                     nonnegative=True),
        "m1": ck.get(obj, "split", "m1", float, required=False, default=0.0,
                     nonnegative=True),
        "allow_explicit": ck.get(obj, "split", "allow_explicit", bool,
                                 required=False, default=False),
    }
    m2 = ck.section(obj, "split.m2")
    if m2 is not None:
        ck.known_keys(m2, "split.m2", {"static", "dynamic_alpha"})
        if ("static" in m2) == ("dynamic_alpha" in m2):
            ck.fail("split.m2", "exactly one of 'static' or 'dynamic_alpha' is required")
        elif "static" in m2:
            out["m2"] = {"static": ck.get(m2, "split.m2", "static", float,
                                          nonnegative=True)}
        else:
            out["m2"] = {"dynamic_alpha": ck.get(m2, "split.m2", "dynamic_alpha",
                                                 float, positive=True)}
    return out


def _validate_reference(ck, raw, path="reference"):
    obj = ck.section(raw, path)
    if obj is None:
        return {}
    ck.known_keys(obj, path, {"kind", "h_fine"})
    kind = ck.get(obj, path, "kind", str, choices={"manufactured", "richardson"})
    out = {"kind": kind}
    if kind == "richardson":
        out["h_fine"] = ck.get(obj, path, "h_fine", float, positive=True)
    elif "h_fine" in obj:
        ck.fail(f"{path}.h_fine", "only accepted for the richardson reference")
    return out


_TOP_KEYS = {
    "simulate": {"h", "t_end", "snapshot_times"},
    "converge": {"h_list", "t0", "t_end", "reference"},
    "m2sweep": {"h", "t_end", "m2_values", "reference"},
    "stabmap": {"h_list", "param", "param_values", "n_steps"},
}
_COMMON_KEYS = {"experiment", "model", "grid", "ic", "scheme", "split",
                "out_dir", "seed", "threads", "sample_every"}


def parse_config_dict(raw: dict) -> Config:
    """Validate a config dict; raises ConfigError listing every problem."""
    ck = _Check()
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    exp = ck.get(raw, "", "experiment", str, choices=set(EXPERIMENTS))
    allowed = _COMMON_KEYS | _TOP_KEYS.get(exp, set())
    ck.known_keys(raw, "", allowed)

    data = {"experiment": exp}
    data["model"] = _validate_model(ck, raw)
    data["grid"] = _validate_grid(ck, raw)
    data["ic"] = _validate_ic(ck, raw)
    data["scheme"] = _validate_scheme(ck, raw)
    data["split"] = _validate_split(ck, raw)
    data["out_dir"] = ck.get(raw, "", "out_dir", str, required=False, default="out")
    data["seed"] = ck.get(raw, "", "seed", int, required=False, default=0,
                          nonnegative=True)
    data["threads"] = ck.get(raw, "", "threads", int, required=False, default=0,
                             nonnegative=True)
    data["sample_every"] = ck.get(raw, "", "sample_every", int, required=False,
                                  default=1, nonnegative=True)

    if exp == "simulate":
        data["h"] = ck.get(raw, "", "h", float, positive=True)
        data["t_end"] = ck.get(raw, "", "t_end", float, nonnegative=True)
        times = ck.number_list(raw, "", "snapshot_times", required=False,
                               allow_empty=True)
        data["snapshot_times"] = times if times is not None else []
    elif exp == "converge":
        data["h_list"] = ck.number_list(raw, "", "h_list", positive=True)
        data["t0"] = ck.get(raw, "", "t0", float, required=False, default=0.0)
        data["t_end"] = ck.get(raw, "", "t_end", float, positive=True)
        data["reference"] = _validate_reference(ck, raw)
    elif exp == "m2sweep":
        data["h"] = ck.get(raw, "", "h", float, positive=True)
        data["t_end"] = ck.get(raw, "", "t_end", float, positive=True)
        data["m2_values"] = ck.number_list(raw, "", "m2_values", positive=True)
        if data["m2_values"] and sorted(data["m2_values"], reverse=True) != data["m2_values"]:
            ck.fail("m2_values", "must be in descending order")
        data["reference"] = _validate_reference(ck, raw)
    elif exp == "stabmap":
        data["h_list"] = ck.number_list(raw, "", "h_list", positive=True)
        data["param"] = ck.get(raw, "", "param", str, choices={"m1", "alpha"})
        data["param_values"] = ck.number_list(raw, "", "param_values")
        data["n_steps"] = ck.get(raw, "", "n_steps", int, positive=True)

    if ck.errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(ck.errors))
    return Config(data)


def parse_config(path) -> Config:
    """Load and validate a JSON config file."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config_dict(raw)


def manifest_json(config: Config, **extra) -> str:
    """Canonical JSON echo of a config (plus run metadata) for manifests."""
    doc = {"config": config.data}
    doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)
