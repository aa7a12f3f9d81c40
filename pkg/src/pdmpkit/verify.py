"""Self-contained property suites runnable from the command line.

Each suite returns (check name, passed, detail) triples; they are the same
oracles the test suite uses, packaged for quick field verification of an
installed build.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .bounds import CoercivityConstants, Lambda, alpha_A, epsilon0, lemma6_bracket, maximize_alpha, R0_FLOOR
from .rates import phi_canonical, phi_softplus, verify_rate
from .samplers import SamplerConfig, first_bounce_time
from .targets import gaussian_target
from .thinning import PiecewiseLinearBound, first_arrival_affine_plus, next_event_time
from .velocity import VelocityModel, moments, sample_velocities


def suite_moments(seed: int = 0):
    rng = np.random.default_rng(seed)
    checks = []
    n = 400_000
    for kind in ("gaussian", "rademacher", "sphere_uniform"):
        for d in (2, 5, 10):
            model = VelocityModel(d=d, kind=kind, m2=1.0)
            m2, m4, m22 = moments(model)
            V = sample_velocities(model, n, rng)
            ok = True
            details = []
            for label, expect, series in (
                ("m2", m2, V[:, 0] ** 2),
                ("3*m4", 3.0 * m4, V[:, 0] ** 4),
                ("m22", m22, V[:, 0] ** 2 * V[:, 1] ** 2),
            ):
                est = float(series.mean())
                se = float(series.std() / np.sqrt(n))
                if abs(est - expect) > 5.0 * max(se, 1e-15):
                    ok = False
                    details.append(f"{label}: est {est:.5f} vs {expect:.5f} (se {se:.2g})")
            checks.append(
                (f"moments[{kind},d={d}]", ok, "; ".join(details) or "within 5 s.e.")
            )
    return checks


def suite_rates():
    grid = np.linspace(-1000.0, 1000.0, 20001)
    checks = []
    for rate, m2 in ((phi_canonical(), 1.0), (phi_softplus(1.0), 1.0), (phi_softplus(4.0), 4.0)):
        rep = verify_rate(rate, m2, grid)
        checks.append(
            (
                f"rate[{rate.name},m2={m2}]",
                rep.passed,
                f"identity {rep.max_identity_violation:.2e}, "
                f"lower {rep.max_lower_violation:.2e}, upper {rep.max_upper_violation:.2e}",
            )
        )
    # a deliberately broken certificate must be caught
    broken = phi_softplus(1.0)
    rep = verify_rate(
        type(broken)(broken.name, broken.eval, broken.C_phi, 0.0, 1.0), 1.0,
        np.linspace(-5, 5, 101),
    )
    checks.append(("rate[broken certificate detected]", not rep.passed,
                   f"upper violation {rep.max_upper_violation:.3f}"))
    return checks


def suite_brackets(seed: int = 0, n: int = 300):
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(n):
        lx = rng.uniform(1e-3, 1 - 1e-3)
        R0 = rng.uniform(R0_FLOOR, 1000.0)
        lv = rng.uniform(1e-6, np.sqrt(2.0) * R0)
        m2 = float(rng.choice([0.25, 1.0, 4.0]))
        consts = CoercivityConstants(lv, lx, R0, m2)
        e0 = epsilon0(lx, R0)
        alpha0, A0 = alpha_A(e0, consts)
        lo, hi = lemma6_bracket(consts)
        ok = (
            lx / (1 + R0**2) <= e0 <= 2 / (4 + R0**2) <= 1 / (4 * R0) + 1e-15
            and A0 <= np.sqrt(3.0) + 1e-12
            and lo <= alpha0 <= hi
        )
        _, alpha_star = maximize_alpha(consts)
        ok = ok and alpha0 - 1e-12 <= alpha_star <= 3 * alpha0 + 1e-12
        grid = np.linspace(0.0, 4 * lx / (4 * lx + R0**2), 2049)
        ok = ok and Lambda(e0, lx, R0) >= float(np.max(Lambda(grid, lx, R0))) - 1e-9
        if not ok:
            bad.append((lx, R0, lv, m2))
    return [("brackets[random sweep]", not bad,
             f"{n - len(bad)}/{n} tuples clean" + (f"; first bad {bad[0]}" if bad else ""))]


def suite_thinning(seed: int = 0):
    rng = np.random.default_rng(seed)
    checks = []
    # constant rate: thinning against its own bound reproduces the exponential law
    n = 20_000
    draws = []
    for _ in range(n):
        dt, _ = next_event_time(
            lambda u: 2.0, PiecewiseLinearBound.affine(2.0, 0.0, 50.0), rng
        )
        draws.append(dt)
    mean = float(np.mean(draws))
    se = float(np.std(draws) / np.sqrt(n))
    checks.append(
        ("thinning[constant rate mean]", abs(mean - 0.5) <= 5 * se,
         f"mean {mean:.4f} vs 0.5 (se {se:.2g})")
    )
    # affine inversion against brentq root-finding
    from scipy.optimize import brentq

    ok = True
    worst = 0.0
    for _ in range(200):
        a = rng.uniform(-2, 3)
        b = rng.uniform(-1.5, 2.5)
        e = rng.exponential()
        t = first_arrival_affine_plus(a, b, e)
        if np.isfinite(t):
            func = lambda s: (
                np.trapezoid(np.maximum(a + b * np.linspace(0, s, 4001), 0.0),
                             dx=s / 4000.0) - e
            )
            t_ref = brentq(func, 1e-12, max(2 * t, 1.0) + 10.0)
            worst = max(worst, abs(t - t_ref))
            ok = ok and abs(t - t_ref) < 1e-6
    checks.append(("thinning[affine inversion vs root-finding]", ok, f"worst gap {worst:.2e}"))
    # thinning vs exact inversion on the 1-d standard gaussian zigzag
    t_exact = _first_bounce_times("exact", 4000, seed)
    t_thin = _first_bounce_times("thinning", 4000, seed + 1)
    ks = stats.ks_2samp(t_exact, t_thin)
    checks.append(
        ("thinning[ks vs exact inversion]", ks.pvalue > 0.01, f"p={ks.pvalue:.4f}")
    )
    return checks


def _first_bounce_times(mode: str, n: int, seed: int) -> np.ndarray:
    """First-bounce waiting times from a fixed 1-d state, i.i.d. draws."""
    cfg = SamplerConfig(
        sampler="zigzag",
        target=gaussian_target(np.eye(1)),
        velocity=VelocityModel(d=1, kind="rademacher", m2=1.0),
        rate=phi_canonical(),
        lambda_ref=1.0,
        horizon=1.0,
        event_time_mode=mode,
    )
    rng = np.random.default_rng(seed)
    x0 = np.array([-2.0])
    v0 = np.array([1.0])
    return np.array([first_bounce_time(cfg, x0, v0, rng) for _ in range(n)])


SUITES = {
    "moments": suite_moments,
    "rates": suite_rates,
    "brackets": suite_brackets,
    "thinning": suite_thinning,
}


def run_suite(name: str):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    return SUITES[name]()
