"""Render job files: a strict JSON schema with deterministic echo.

Jobs are fully serializable; two runs of the same job file are
byte-identical.  Unknown fields are errors, not warnings, so schema
drift fails loudly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ConfigError
from .grid import GridSpec

SCHEMA_VERSION = 1

JOB_KINDS = (
    "connectedness_locus",
    "filled_julia",
    "hecke_limit_set",
    "discreteness_scan",
    "mating_limit_set",
)


def _as_complex(value, where):
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


class _Fields:
    """Strict field extractor: every key must be consumed exactly once."""

    def __init__(self, data, where):
        if not isinstance(data, dict):
            raise ConfigError(f"{where}: expected an object")
        self.data = dict(data)
        self.where = where

    def take(self, key, required=True, default=None):
        if key in self.data:
            return self.data.pop(key)
        if required:
            raise ConfigError(f"{self.where}: missing required field {key!r}")
        return default

    def take_int(self, key, required=True, default=None, minimum=None):
        v = self.take(key, required, default)
        if v is None:
            return None
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"{self.where}.{key}: expected an integer")
        if minimum is not None and v < minimum:
            raise ConfigError(f"{self.where}.{key}: must be >= {minimum}")
        return v

    def take_number(self, key, required=True, default=None):
        v = self.take(key, required, default)
        if v is None:
            return None
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"{self.where}.{key}: expected a number")
        return float(v)

    def take_complex(self, key, required=True, default=None):
        v = self.take(key, required, default)
        if v is None:
            return None
        return _as_complex(v, f"{self.where}.{key}")

    def finish(self):
        if self.data:
            extra = ", ".join(sorted(self.data))
            raise ConfigError(f"{self.where}: unknown fields: {extra}")


def _parse_grid(data) -> GridSpec:
    f = _Fields(data, "grid")
    center = f.take_complex("center")
    width = f.take_number("width")
    px = f.take_int("pixels_x", minimum=1)
    py = f.take_int("pixels_y", minimum=1)
    f.finish()
    if width <= 0:
        raise ConfigError("grid.width must be positive")
    return GridSpec(center=center, width=width, pixels_x=px, pixels_y=py)


@dataclass(frozen=True)
class RenderJob:
    kind: str
    grid: GridSpec
    seed: int
    params: dict

    def echo(self) -> dict:
        """Canonical JSON-ready dict echoing the parsed job."""

        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v

        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "grid": {
                "center": [self.grid.center.real, self.grid.center.imag],
                "width": self.grid.width,
                "pixels_x": self.grid.pixels_x,
                "pixels_y": self.grid.pixels_y,
            },
            "seed": self.seed,
            "params": {k: enc(v) for k, v in sorted(self.params.items())},
        }


def job_from_dict(data) -> RenderJob:
    f = _Fields(data, "job")
    version = f.take("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")
    kind = f.take("kind")
    if kind not in JOB_KINDS:
        raise ConfigError(f"unknown job kind {kind!r}; expected one of {JOB_KINDS}")
    grid = _parse_grid(f.take("grid"))
    seed = f.take_int("seed", required=False, default=0)

    params = {}
    if kind == "connectedness_locus":
        fam = _Fields(f.take("family"), "family")
        fam_kind = fam.take("kind")
        if fam_kind == "unicritical":
            params["family"] = "unicritical"
            params["degree"] = fam.take_int("degree", minimum=2)
        elif fam_kind == "parabolic_cubic":
            params["family"] = "parabolic_cubic"
        else:
            raise ConfigError(f"family.kind {fam_kind!r} not renderable")
        fam.finish()
        params["max_iter"] = f.take_int("max_iter", required=False, default=200, minimum=1)
    elif kind == "filled_julia":
        coeffs = f.take("coeffs")
        if not isinstance(coeffs, list) or len(coeffs) < 3:
            raise ConfigError("filled_julia.coeffs: need a degree >= 2 coefficient list")
        parsed = tuple(_as_complex(c, f"coeffs[{i}]") for i, c in enumerate(coeffs))
        if abs(parsed[-1]) == 0:
            raise ConfigError("filled_julia.coeffs: leading coefficient must be nonzero")
        params["coeffs"] = parsed
        params["max_iter"] = f.take_int("max_iter", required=False, default=200, minimum=1)
    elif kind == "hecke_limit_set":
        params["d"] = f.take_int("d", minimum=2)
        # absent kappa renders the classical generator pair
        params["kappa"] = f.take_complex("kappa", required=False, default=None)
        params["n_points"] = f.take_int("n_points", required=False, default=200_000, minimum=0)
        params["max_word_len"] = f.take_int("max_word_len", required=False, default=40, minimum=1)
    elif kind == "discreteness_scan":
        params["d"] = f.take_int("d", minimum=2)
        params["max_word_len"] = f.take_int("max_word_len", required=False, default=6, minimum=1)
        params["parabolic_tol"] = f.take_number("parabolic_tol", required=False, default=0.1)
    elif kind == "mating_limit_set":
        params["a"] = f.take_complex("a")
        params["k"] = f.take_complex("k")
        params["depth"] = f.take_int("depth", required=False, default=32, minimum=0)
        params["max_nodes"] = f.take_int("max_nodes", required=False, default=16, minimum=2)
    f.finish()
    return RenderJob(kind=kind, grid=grid, seed=seed, params=params)


def job_from_file(path) -> RenderJob:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read job file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"job file {path} is not valid JSON: {exc}") from exc
    return job_from_dict(data)
