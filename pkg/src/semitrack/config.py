"""Scenario files, CSV emission and run metadata.

Scenario files are flat ``key = value`` text.  Lines starting with '#' or
';' are comments; ``[section]`` headers are allowed purely for readability
and carry no meaning.  Unknown keys are rejected (with a suggestion when a
close match exists); missing keys fall back to the benchmark defaults.
All angles are radians internally; any angle-valued number may be written
with a ``deg`` suffix (e.g. ``delta1 = 2 deg``) to convert on input.
"""

from __future__ import annotations

import csv
import difflib
import math
import time
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .errors import ConfigurationError
from .params import VehicleParams

_PARAM_KEYS = tuple(f.name for f in dc_fields(VehicleParams))

#: every recognized scenario key with (type tag, default)
_SCHEMA = {
    **{k: ("param", None) for k in _PARAM_KEYS},
    "carcass": ("choice:rigid,flexible", "flexible"),
    "pressure_kind": ("choice:constant,exponential", "constant"),
    "pressure_rate": ("float", 0.0),
    "n_cells": ("int", 50),
    "dt": ("float", 1e-6),
    "T": ("float", 5.0),
    "sample_stride": ("int", 100),
    "beta0": ("float", 0.0),
    "r0": ("float", 0.0),
    "z0_1": ("float", 0.0),
    "z0_2": ("float", 0.0),
    "xhat_beta0": ("float", 0.0),
    "xhat_r0": ("float", 0.0),
    "delta1": ("float", 0.0),
    "delta2": ("float", 0.0),
    "delay": ("float", 0.02),
    "noise_std": ("float", 0.1),
    "noise_dt": ("float", 0.005),
    "seed": ("int", 7),
    "mode": ("choice:output,state", "output"),
    "F": ("floats4", (2.034, -0.0458, 0.0, 0.0)),
    "L": ("floats2", (-16.02, -147.267)),
}

_INT_PARAM_KEYS = ("chi",)


@dataclass(frozen=True)
class Scenario:
    """Fully resolved run configuration (defaults merged in)."""

    params: VehicleParams
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def echo(self) -> list[str]:
        """Canonical key = value lines describing the effective config."""
        lines = [f"{k} = {getattr(self.params, k)!r}" for k in _PARAM_KEYS]
        lines += [f"{k} = {self.values[k]!r}"
                  for k in sorted(self.values)]
        return lines


def _parse_scalar(text: str, line_no: int, key: str) -> float:
    text = text.strip()
    factor = 1.0
    if text.endswith("deg"):
        text = text[:-3].strip()
        factor = math.pi / 180.0
    try:
        return factor * float(text)
    except ValueError:
        raise ConfigurationError(
            f"line {line_no}: malformed number {text!r} for key '{key}'")


def _convert(key: str, raw: str, line_no: int):
    kind = _SCHEMA[key][0]
    if kind == "param":
        if key == "Lbar_rule":
            return raw.strip()
        if key in _INT_PARAM_KEYS:
            return int(_parse_scalar(raw, line_no, key))
        return _parse_scalar(raw, line_no, key)
    if kind == "int":
        try:
            return int(raw.strip())
        except ValueError:
            raise ConfigurationError(
                f"line {line_no}: malformed integer {raw.strip()!r} "
                f"for key '{key}'")
    if kind == "float":
        return _parse_scalar(raw, line_no, key)
    if kind.startswith("choice:"):
        allowed = kind.split(":", 1)[1].split(",")
        value = raw.strip()
        if value not in allowed:
            raise ConfigurationError(
                f"line {line_no}: key '{key}' must be one of {allowed}, "
                f"got {value!r}")
        return value
    if kind.startswith("floats"):
        want = int(kind[len("floats"):])
        parts = [p for p in raw.split(",") if p.strip()]
        if len(parts) != want:
            raise ConfigurationError(
                f"line {line_no}: key '{key}' needs {want} comma-separated "
                f"numbers, got {len(parts)}")
        return tuple(_parse_scalar(p, line_no, key) for p in parts)
    raise AssertionError(kind)


def _suggest(key: str):
    """Closest known key; prefix relationships beat fuzzy similarity."""
    lowered = key.lower()
    extensions = [k for k in _SCHEMA if k.lower().startswith(lowered)]
    if extensions:
        return min(extensions, key=len)
    stems = [k for k in _SCHEMA if lowered.startswith(k.lower())]
    if stems:
        return max(stems, key=len)
    close = difflib.get_close_matches(key, _SCHEMA, n=1, cutoff=0.5)
    return close[0] if close else None


def parse_scenario_text(text: str) -> Scenario:
    overrides = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            continue   # cosmetic section header
        if "=" not in stripped:
            raise ConfigurationError(
                f"line {line_no}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _SCHEMA:
            hint = f"; did you mean '{_suggest(key)}'?" if _suggest(key) \
                else ""
            raise ConfigurationError(
                f"line {line_no}: unknown key '{key}'{hint}")
        if key in overrides:
            raise ConfigurationError(
                f"line {line_no}: duplicate key '{key}'")
        overrides[key] = _convert(key, raw, line_no)

    param_kwargs = {k: v for k, v in overrides.items() if k in _PARAM_KEYS}
    params = VehicleParams(**param_kwargs)
    values = {k: overrides.get(k, default)
              for k, (_, default) in _SCHEMA.items() if k not in _PARAM_KEYS}
    return Scenario(params=params, values=values)


def parse_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def emit_csv(records, path, header=None):
    """Write homogeneous records as CSV with round-trip-exact floats.

    ``records`` is a sequence of dicts sharing one key set (order taken
    from the first record) or of sequences paired with an explicit
    ``header``.  Floats are printed with 17 significant digits so parsing
    them back reproduces the exact bit pattern.
    """
    records = list(records)
    if header is None:
        if not records:
            raise ConfigurationError(
                "emit_csv needs a header when no records are given")
        header = list(records[0].keys())
        rows = []
        for rec in records:
            if list(rec.keys()) != header:
                raise ConfigurationError(
                    "emit_csv records must share one key set")
            rows.append([rec[k] for k in header])
    else:
        rows = [list(rec) for rec in records]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


VERSION_TAG = "semitrack-1.0.0"


@dataclass
class RunRecord:
    """Metadata sidecar for one CLI run; deterministic apart from timing."""

    command: str
    config_echo: list
    outputs: list
    notes: list = field(default_factory=list)
    version: str = VERSION_TAG
    wall_time_s: float = 0.0

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"command: {self.command}\n")
            fh.write(f"version: {self.version}\n")
            fh.write(f"wall_time_s: {self.wall_time_s:.3f}\n")
            fh.write("outputs:\n")
            for out in self.outputs:
                fh.write(f"  - {out}\n")
            if self.notes:
                fh.write("notes:\n")
                for note in self.notes:
                    fh.write(f"  - {note}\n")
            fh.write("config:\n")
            for line in self.config_echo:
                fh.write(f"  {line}\n")


class Stopwatch:
    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self._start
        return False
