"""Strict JSON experiment configuration for the command-line front end.

The config is the experiment record: unknown keys are rejected, every
physical parameter must be finite, and a validated config plus a seed fully
determines all emitted artifacts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import algebra as al
from . import epdiff as ep
from .magnetics import InertiaOperator, MagneticSystem


class ConfigError(ValueError):
    pass


_TOP_KEYS = {"group", "group_params", "inertia", "alpha", "kappa",
             "flow", "connect", "epdiff", "mane", "output_dir", "seed"}
_FLOW_KEYS = {"u0", "T", "dt", "tolerance"}
_CONNECT_KEYS = {"x", "y", "N_steps", "seeds"}
_EPDIFF_KEYS = {"u0", "a", "T", "dt", "s", "N", "dealias"}
_GROUP_PARAM_KEYS = {"modes", "grid_size", "bracket_sign"}


def _require_keys(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _finite_array(value, where: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{where} contains non-finite entries")
    return arr


@dataclass
class ExperimentConfig:
    raw: dict
    algebra: al.LieAlgebra
    system: MagneticSystem | None
    kappa_spec: Any
    output_dir: str
    seed: int
    flow: dict | None = None
    connect: dict | None = None
    epdiff: dict | None = field(default=None)

    def resolve_kappa(self, critical_value: float) -> float:
        if self.kappa_spec == "auto":
            return 2.0 * critical_value + 1.0
        return float(self.kappa_spec)


def _build_inertia(spec, alg: al.LieAlgebra) -> InertiaOperator:
    if spec == "identity" or spec is None:
        return InertiaOperator.identity(alg.dim)
    if isinstance(spec, dict):
        _require_keys(spec, {"s", "N"}, "inertia")
        if alg.name != "vect_s1_truncated":
            raise ConfigError("{s, N} inertia requires group vect_s1_truncated")
        return InertiaOperator.sobolev(alg, float(spec["s"]))
    mat = _finite_array(spec, "inertia")
    if mat.shape != (alg.dim, alg.dim):
        raise ConfigError(f"inertia must be {alg.dim}x{alg.dim}")
    return InertiaOperator(mat)


def group_point_from_spec(spec, alg: al.LieAlgebra) -> al.GroupPoint:
    """A group element given as {'exp': coords} or an explicit matrix."""
    if isinstance(spec, dict):
        _require_keys(spec, {"exp"}, "group point")
        return al.group_exp(_finite_array(spec["exp"], "group point"), alg)
    rep = _finite_array(spec, "group point")
    return al.GroupPoint(alg.name, rep)


def field_from_spec(spec, modes: int, grid_size: int) -> ep.FourierField:
    """A spectral field from a shape recipe or raw (re, im) coefficients."""
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "zero":
            _require_keys(spec, {"kind"}, "field")
            return ep.FourierField(np.zeros(2 * modes + 1), grid_size)
        if kind == "constant":
            _require_keys(spec, {"kind", "value"}, "field")
            c = np.zeros(2 * modes + 1, dtype=complex)
            c[modes] = float(spec["value"])
            return ep.FourierField(c, grid_size)
        if kind == "cos":
            _require_keys(spec, {"kind", "amplitude", "wavenumber"}, "field")
            amp = float(spec["amplitude"])
            k = int(spec["wavenumber"])
            return ep.FourierField.from_function(
                lambda x: amp * np.cos(k * x), modes, grid_size)
        if kind == "poisson":
            _require_keys(spec, {"kind", "amplitude", "ratio"}, "field")
            amp = float(spec["amplitude"])
            r = float(spec["ratio"])
            if not 0.0 < r < 1.0:
                raise ConfigError("poisson ratio must lie in (0, 1)")
            return ep.FourierField.from_function(
                lambda x: amp * (r * np.cos(x) - r ** 2)
                / (1.0 - 2.0 * r * np.cos(x) + r ** 2), modes, grid_size)
        raise ConfigError(f"unknown field kind {kind!r}")
    pairs = _finite_array(spec, "field")
    if pairs.shape != (2 * modes + 1, 2):
        raise ConfigError("raw field must be a (2N+1, 2) list of (re, im)")
    return ep.FourierField(pairs[:, 0] + 1j * pairs[:, 1], grid_size)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(raw, _TOP_KEYS, "config")
    group = raw.get("group")
    if group not in al.CATALOG:
        raise ConfigError(f"group must be one of {al.CATALOG}, got {group!r}")
    gp = raw.get("group_params", {})
    _require_keys(gp, _GROUP_PARAM_KEYS, "group_params")
    if group == "vect_s1_truncated":
        if "modes" not in gp:
            raise ConfigError("vect_s1_truncated requires group_params.modes")
        alg = al.vect_s1(int(gp["modes"]),
                         grid_size=gp.get("grid_size"),
                         bracket_sign=float(gp.get("bracket_sign", 1.0)))
    else:
        if gp:
            raise ConfigError(f"group_params not accepted for {group}")
        alg = al.make_algebra(group)

    system = None
    if "alpha" in raw or "inertia" in raw:
        A = _build_inertia(raw.get("inertia"), alg)
        alpha = (_finite_array(raw["alpha"], "alpha") if "alpha" in raw
                 else np.zeros(alg.dim))
        if alpha.shape != (alg.dim,):
            raise ConfigError(f"alpha must have length {alg.dim}")
        system = MagneticSystem(alg, A, alpha)

    kappa = raw.get("kappa", "auto")
    if kappa != "auto":
        kappa = float(kappa)
        if not math.isfinite(kappa):
            raise ConfigError("kappa must be finite or 'auto'")

    for block, keys in (("flow", _FLOW_KEYS), ("connect", _CONNECT_KEYS),
                        ("epdiff", _EPDIFF_KEYS), ("mane", set())):
        if block in raw:
            if not isinstance(raw[block], dict):
                raise ConfigError(f"{block} block must be an object")
            _require_keys(raw[block], keys, block)

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return ExperimentConfig(
        raw=raw, algebra=alg, system=system, kappa_spec=kappa,
        output_dir=raw.get("output_dir", "."), seed=seed,
        flow=raw.get("flow"), connect=raw.get("connect"),
        epdiff=raw.get("epdiff"))
