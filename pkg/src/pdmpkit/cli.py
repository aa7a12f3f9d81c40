"""Configuration-driven experiment runner.

Subcommands: ``bound`` (rate certificates), ``sample`` (trajectories),
``sweep`` (dimension scaling of the certificates), ``verify`` (property
suites). Exit codes: 0 success, 1 validation error, 2 runtime abort,
3 verification failure.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np

from . import __version__
from .bounds import MissingC3, theorem1_constants, theorem17_constants
from .config import ConfigError, build_family, build_sampler, config_hash, load_config
from .diagnostics import ZeroVariance, skeleton_summary
from .flows import EnergyDriftError
from .samplers import simulate
from .scaling import scaling_report
from .skeleton import validate_skeleton, write_skeleton_csv
from .targets import decompose_bps, decompose_rhmc, decompose_zigzag
from .thinning import BoundViolation, MissingLipschitz
from .verify import SUITES, run_suite

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3

_RUNTIME_ERRORS = (BoundViolation, EnergyDriftError, ZeroVariance, RuntimeError)
_VALIDATION_ERRORS = (ConfigError, MissingC3, MissingLipschitz, ValueError)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _stamp(payload: dict, config: dict) -> dict:
    payload["config_hash"] = config_hash(config)
    payload["version"] = __version__
    return payload


def _write_json(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


@click.group()
@click.version_option(__version__)
def main():
    """Piecewise deterministic sampler toolkit."""


@main.command("bound")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default=".", type=click.Path(), show_default=True)
def cmd_bound(config_path, out_dir):
    """Compute the convergence-rate certificate for the configured run."""
    try:
        config = load_config(config_path)
        if "bound" not in config:
            raise ConfigError("bound", "missing section: nothing to compute")
        cfg = build_sampler(config)
        source = config["bound"]["source"]
        cert = (cfg.rate.C_phi, cfg.rate.c_phi)
        if source == "theorem17":
            report = theorem17_constants(cfg.target, cfg.velocity, cert, cfg.lambda_ref)
        else:
            decomp = {
                "zigzag": decompose_zigzag,
                "bps": decompose_bps,
                "rhmc": decompose_rhmc,
            }[cfg.sampler](cfg.target)
            report = theorem1_constants(
                cfg.target, cfg.velocity, cert, decomp, cfg.lambda_ref,
                c_lambda=config["bound"].get("c_lambda", 0.0), sampler=cfg.sampler,
            )
    except _VALIDATION_ERRORS as exc:
        _fail(EXIT_VALIDATION, str(exc))
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "bound_report.json")
    with open(path, "w") as fh:
        fh.write(report.to_json(config_hash=config_hash(config), version=__version__))
        fh.write("\n")
    click.echo(path)


def _run_replica(config: dict, idx: int, out_dir: str) -> dict:
    cfg = build_sampler(config)
    seed = config.get("seed", 0)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(idx,))
    sk = simulate(cfg, rng=np.random.default_rng(ss))
    sk.meta["replica"] = idx
    check = validate_skeleton(sk)
    if not check.passed:
        raise RuntimeError(f"replica {idx} produced an inconsistent skeleton: {check}")
    path = os.path.join(out_dir, f"skeleton_r{idx}.csv")
    write_skeleton_csv(
        sk, path,
        meta_line=f"config_hash={config_hash(config)} version={__version__} replica={idx}",
    )
    summary = skeleton_summary(sk)
    summary["replica"] = idx
    return summary


@main.command("sample")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.option("--replicas", type=int, default=None, help="override the config replica count")
@click.option("--out", "out_dir", default=".", type=click.Path(), show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
def cmd_sample(config_path, seed, replicas, out_dir, jobs):
    """Simulate trajectories; one skeleton CSV per replica plus a summary."""
    try:
        config = load_config(config_path)
        if "sampler" not in config:
            raise ConfigError("sampler", "missing section: nothing to simulate")
        if seed is not None:
            config["seed"] = seed
        if replicas is not None:
            if replicas < 1:
                raise ConfigError("replicas", "must be >= 1")
            config["replicas"] = replicas
        n = config.get("replicas", 1)
        os.makedirs(out_dir, exist_ok=True)
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_run_replica, config, i, out_dir) for i in range(n)]
                summaries = [f.result() for f in futures]  # deterministic order
        else:
            summaries = [_run_replica(config, i, out_dir) for i in range(n)]
    except ConfigError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except _RUNTIME_ERRORS as exc:
        _fail(EXIT_RUNTIME, str(exc))
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    means = np.mean([s["time_average_mean"] for s in summaries], axis=0)
    seconds = np.mean([s["time_average_second_moment"] for s in summaries], axis=0)
    pooled = _stamp(
        {
            "replicas": n,
            "pooled_time_average_mean": [float(v) for v in means],
            "pooled_time_average_second_moment": [float(v) for v in seconds],
            "per_replica": summaries,
        },
        config,
    )
    path = os.path.join(out_dir, "summary.json")
    _write_json(path, pooled)
    click.echo(path)


@main.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default=".", type=click.Path(), show_default=True)
def cmd_sweep(config_path, out_dir):
    """Dimension sweep of the rate certificate for a sampler family."""
    try:
        config = load_config(config_path)
        if "sweep" not in config:
            raise ConfigError("sweep", "missing section: nothing to sweep")
        sweep = config["sweep"]
        family = build_family(sweep["family"])
        report = scaling_report(
            family,
            sweep["dims"],
            lambda_mode=sweep.get("lambda_mode", "optimized"),
            lambda_fixed=sweep.get("lambda_fixed", 1.0),
        )
    except _VALIDATION_ERRORS as exc:
        _fail(EXIT_VALIDATION, str(exc))
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "sweep.csv")
    report.to_csv(csv_path, meta_line=f"config_hash={config_hash(config)} version={__version__}")
    with open(os.path.join(out_dir, "sweep_summary.json"), "w") as fh:
        fh.write(report.to_json(config_hash=config_hash(config), version=__version__))
        fh.write("\n")
    click.echo(csv_path)


@main.command("verify")
@click.argument("suite", required=True)
def cmd_verify(suite):
    """Run a property suite: moments, rates, brackets or thinning."""
    if suite not in SUITES:
        _fail(EXIT_VALIDATION, f"unknown suite {suite!r}; available: {', '.join(sorted(SUITES))}")
    try:
        checks = run_suite(suite)
    except _RUNTIME_ERRORS as exc:
        _fail(EXIT_RUNTIME, str(exc))
    failed = [c for c in checks if not c[1]]
    for name, ok, detail in checks:
        click.echo(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    if failed:
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":
    main()
