"""Experiment configuration: a single JSON file per run.

The schema is validated eagerly with field-path error messages and unknown
keys are rejected; arrays are row-major; all physical quantities are in
process-time units. The canonical serialization of the validated dict is
hashed into every output file for reproducibility.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .rates import make_rate
from .samplers import SamplerConfig
from .scaling import ScalingFamily
from .targets import (
    TargetModel,
    gaussian_target,
    product_beta_target,
    radial_beta_target,
    zero_torus_target,
)
from .velocity import VelocityModel


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _check_keys(d: dict, allowed: set, path: str):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(path, f"unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}")


def _get(d: dict, key: str, path: str, kind, required=True, default=None):
    if key not in d:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    val = d[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{path}.{key}", f"expected a number, got {val!r}")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{path}.{key}", f"expected an integer, got {val!r}")
        return val
    if not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def _enum(d: dict, key: str, path: str, choices, required=True, default=None):
    val = _get(d, key, path, str, required=required, default=default)
    if val is not None and val not in choices:
        raise ConfigError(f"{path}.{key}", f"must be one of {sorted(choices)}, got {val!r}")
    return val


def build_target(spec: dict, path: str = "target") -> TargetModel:
    _check_keys(spec, {"kind", "d", "precision", "diagonal", "beta"}, path)
    kind = _enum(spec, "kind", path, {"gaussian", "product_beta", "radial_beta", "zero_torus"})
    d = _get(spec, "d", path, int)
    if d < 1:
        raise ConfigError(f"{path}.d", "dimension must be >= 1")
    if kind == "gaussian":
        if "precision" in spec:
            P = np.asarray(spec["precision"], dtype=float)
            if P.shape != (d, d):
                raise ConfigError(f"{path}.precision", f"must be {d}x{d} row-major")
        elif "diagonal" in spec:
            diag = np.asarray(spec["diagonal"], dtype=float)
            if diag.shape != (d,):
                raise ConfigError(f"{path}.diagonal", f"must have length {d}")
            P = np.diag(diag)
        else:
            P = np.eye(d)
        try:
            return gaussian_target(P)
        except ValueError as exc:
            raise ConfigError(f"{path}.precision", str(exc)) from exc
    if kind in ("product_beta", "radial_beta"):
        beta = _get(spec, "beta", path, float)
        try:
            builder = product_beta_target if kind == "product_beta" else radial_beta_target
            return builder(d, beta)
        except ValueError as exc:
            raise ConfigError(f"{path}.beta", str(exc)) from exc
    return zero_torus_target(d)


def build_velocity(spec: dict, d: int, path: str = "velocity") -> VelocityModel:
    _check_keys(spec, {"kind", "m2", "gamma1", "gamma2"}, path)
    kind = _enum(spec, "kind", path,
                 {"gaussian", "sphere_uniform", "rademacher", "spherically_symmetric"})
    m2 = _get(spec, "m2", path, float, required=False, default=1.0)
    g1 = _get(spec, "gamma1", path, float, required=(kind == "spherically_symmetric"))
    g2 = _get(spec, "gamma2", path, float, required=(kind == "spherically_symmetric"))
    try:
        return VelocityModel(d=d, kind=kind, m2=m2, gamma1=g1, gamma2=g2)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


_SAMPLER_KEYS = {
    "kind", "lambda_ref", "lambda_ref_coords", "horizon", "lookahead",
    "event_time_mode", "rhmc_flow", "leapfrog_step", "init",
}


def build_sampler(config: dict) -> SamplerConfig:
    spec = _get(config, "sampler", "", dict)
    _check_keys(spec, _SAMPLER_KEYS, "sampler")
    kind = _enum(spec, "kind", "sampler", {"zigzag", "bps", "rhmc"})
    lam = _get(spec, "lambda_ref", "sampler", float, required=False, default=1.0)
    if lam < 0:
        raise ConfigError("sampler.lambda_ref", "must be nonnegative")
    horizon = _get(spec, "horizon", "sampler", float)
    if horizon <= 0:
        raise ConfigError("sampler.horizon", "must be positive")
    target = build_target(_get(config, "target", "", dict))
    velocity = build_velocity(_get(config, "velocity", "", dict), target.d)
    rate_spec = _get(config, "rate", "", dict, required=False, default={"kind": "canonical"})
    _check_keys(rate_spec, {"kind"}, "rate")
    rate_kind = _enum(rate_spec, "kind", "rate", {"canonical", "softplus"},
                      required=False, default="canonical")
    rate = make_rate(rate_kind, velocity.m2)
    coords = spec.get("lambda_ref_coords")
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
    try:
        return SamplerConfig(
            sampler=kind,
            target=target,
            velocity=velocity,
            rate=rate,
            lambda_ref=lam,
            lambda_ref_coords=coords,
            horizon=horizon,
            lookahead=_get(spec, "lookahead", "sampler", float, required=False, default=1.0),
            event_time_mode=_enum(spec, "event_time_mode", "sampler",
                                  {"auto", "exact", "thinning"},
                                  required=False, default="auto"),
            rhmc_flow=_enum(spec, "rhmc_flow", "sampler",
                            {"exact_quadratic", "leapfrog"},
                            required=False, default="exact_quadratic"),
            leapfrog_step=_get(spec, "leapfrog_step", "sampler", float, required=False),
            init=_enum(spec, "init", "sampler", {"auto", "stationary", "minimizer"},
                       required=False, default="auto"),
        )
    except ValueError as exc:
        raise ConfigError("sampler", str(exc)) from exc


_TOP_KEYS = {"sampler", "target", "velocity", "rate", "bound", "seed", "replicas", "sweep"}


def validate_config(config: dict) -> dict:
    """Full schema check; returns the config unchanged on success."""
    if not isinstance(config, dict):
        raise ConfigError("", "config must be a JSON object")
    _check_keys(config, _TOP_KEYS, "")
    seed = _get(config, "seed", "", int, required=False, default=0)
    if seed < 0:
        raise ConfigError("seed", "must be nonnegative")
    replicas = _get(config, "replicas", "", int, required=False, default=1)
    if replicas < 1:
        raise ConfigError("replicas", "must be >= 1")
    if "sampler" in config:
        build_sampler(config)
    if "bound" in config:
        bound = _get(config, "bound", "", dict)
        _check_keys(bound, {"source", "c_lambda"}, "bound")
        _enum(bound, "source", "bound", {"theorem1", "theorem17"})
        c_lam = _get(bound, "c_lambda", "bound", float, required=False, default=0.0)
        if c_lam < 0:
            raise ConfigError("bound.c_lambda", "must be nonnegative")
        if "sampler" not in config:
            raise ConfigError("bound", "bound reports need a sampler section")
        if bound.get("source") == "theorem17":
            target = build_target(config["target"])
            if target.constants.c3 is None:
                raise ConfigError(
                    "bound.source",
                    f"theorem17 requires the c3 constant, absent for target "
                    f"{target.name!r}",
                )
            if config["sampler"].get("kind") != "zigzag":
                raise ConfigError("bound.source", "theorem17 is zigzag-specific")
        lam = config["sampler"].get("lambda_ref", 1.0)
        if lam is not None and lam <= 0:
            raise ConfigError(
                "sampler.lambda_ref",
                "bound computation requires a strictly positive refreshment floor",
            )
    if "sweep" in config:
        sweep = _get(config, "sweep", "", dict)
        _check_keys(sweep, {"dims", "lambda_mode", "lambda_fixed", "family"}, "sweep")
        dims = _get(sweep, "dims", "sweep", list)
        if not dims or not all(isinstance(d, int) and d >= 1 for d in dims):
            raise ConfigError("sweep.dims", "must be a non-empty list of positive integers")
        _enum(sweep, "lambda_mode", "sweep", {"fixed", "optimized"},
              required=False, default="optimized")
        fam = _get(sweep, "family", "sweep", dict)
        build_family(fam)
    return config


_FAMILY_KEYS = {
    "sampler", "C_P", "c1", "c2", "varpi", "c3", "a", "C_phi", "c_phi",
    "c_lambda", "m2", "velocity_kind",
}


def build_family(spec: dict, path: str = "sweep.family") -> ScalingFamily:
    _check_keys(spec, _FAMILY_KEYS, path)
    kwargs = {}
    kwargs["sampler"] = _enum(spec, "sampler", path,
                              {"rhmc", "bps", "zigzag", "zigzag_t17"})
    for key in _FAMILY_KEYS - {"sampler", "velocity_kind"}:
        if key in spec:
            kwargs[key] = _get(spec, key, path, float)
    if "velocity_kind" in spec:
        kwargs["velocity_kind"] = _enum(
            spec, "velocity_kind", path,
            {"gaussian", "rademacher", "sphere_uniform"},
        )
    try:
        return ScalingFamily(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_config(path: str) -> dict:
    with open(path) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from exc
    return validate_config(config)
