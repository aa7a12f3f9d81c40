import numpy as np
import pytest

from pdmpkit.bounds import (
    BoundReport,
    CoercivityConstants,
    DomainError,
    Lambda,
    MissingC3,
    PreconditionError,
    R0_FLOOR,
    alpha_A,
    eps_domain_sup,
    epsilon0,
    iact_bound,
    kappas,
    lambda_v_from_refresh,
    lambda_v_zigzag_rademacher,
    lambda_x_from_poincare,
    lemma6_bracket,
    maximize_alpha,
    r0_general,
    r0_zigzag,
    theorem1_constants,
    theorem17_constants,
)
from pdmpkit.rates import phi_canonical
from pdmpkit.targets import (
    decompose_bps,
    decompose_rhmc,
    decompose_zigzag,
    gaussian_target,
    product_beta_target,
    radial_beta_target,
)
from pdmpkit.velocity import VelocityModel


GAUSS_V = VelocityModel(d=2, kind="gaussian", m2=1.0)


def test_lambda_x_values():
    assert lambda_x_from_poincare(1.0) == 0.5
    assert lambda_x_from_poincare(3.0) == 0.75
    grid = np.linspace(0.1, 1e6, 1000)
    vals = np.array([lambda_x_from_poincare(c) for c in grid])
    assert np.all(np.diff(vals) > 0) and vals[-1] < 1.0
    with pytest.raises(ValueError):
        lambda_x_from_poincare(0.0)


def test_kappas_closed_forms():
    assert kappas(0.0, 1.0, 1.0, 1, 0.0)[0] == 1.0
    assert kappas(2.0, 1.0, 1.0, 1, 0.0)[0] == pytest.approx(np.sqrt(2.0))
    assert kappas(0.0, 1.0, 1.0, 1, 0.0)[1] == pytest.approx(1.0 / np.sqrt(21.0))


def test_r0_general_no_channel_case():
    # K = 0, c_lambda = 0, c_phi = 0, gaussian velocity, c1 = 0:
    # R0_bar = sqrt(2) * kappa1 + lam / sqrt(2)
    k1, k2 = kappas(0.0, 1.0, 1.0, 3, 0.0)
    lam = 1.0
    R0, r0_bar = r0_general(GAUSS_V, 1.0, 0.0, np.zeros(0), lam, 0.0, k1, k2)
    assert r0_bar == pytest.approx(np.sqrt(2.0) + lam / np.sqrt(2.0))
    assert R0 == pytest.approx(R0_FLOOR)  # the additive floor dominates here


def test_r0_general_refresh_floor_dominates():
    k1, k2 = kappas(0.0, 1.0, 1.0, 1, 0.0)
    R0, _ = r0_general(GAUSS_V, 1.0, 0.0, np.zeros(0), 100.0, 0.0, k1, k2)
    assert R0 == pytest.approx(100.0 / np.sqrt(2.0))


def test_r0_general_floor_value():
    assert R0_FLOOR == pytest.approx(4.0 + 2.0 * np.sqrt(3.0))
    k1, k2 = kappas(0.0, 1.0, 1.0, 1, 0.0)
    R0, r0_bar = r0_general(GAUSS_V, 1.0, 0.0, np.zeros(0), 0.01, 0.0, k1, k2)
    assert r0_bar < R0_FLOOR and R0 == pytest.approx(4.0 + 2.0 * np.sqrt(3.0))


def test_r0_zigzag_worked_example():
    # gaussian m2=1, canonical rate, c1 = c3 = 0, lam = 1:
    # sqrt(6) * 3 * 2 + 1/sqrt(2) = 15.404045237885615
    v = VelocityModel(d=5, kind="gaussian", m2=1.0)
    assert r0_zigzag(v, 1.0, 0.0, 0.0, 0.0, 1.0) == pytest.approx(15.404045237885615)


def test_r0_zigzag_rademacher_and_c3_sensitivity():
    v = VelocityModel(d=5, kind="rademacher", m2=1.0)
    # m4 = 1/3 so the lead coefficient is sqrt(2)
    assert r0_zigzag(v, 1.0, 0.0, 0.0, 0.0, 1.0) == pytest.approx(
        np.sqrt(2.0) * 3.0 * 2.0 + 1.0 / np.sqrt(2.0)
    )
    g = VelocityModel(d=5, kind="gaussian", m2=1.0)
    delta = r0_zigzag(g, 1.0, 0.0, 0.0, 2.0, 1.0) - r0_zigzag(g, 1.0, 0.0, 0.0, 0.0, 1.0)
    assert delta == pytest.approx(np.sqrt(6.0) * 3.0 * 1.0)


def test_lambda_v_from_refresh():
    assert lambda_v_from_refresh(1.0) == 1.0
    assert lambda_v_from_refresh(0.3) == 0.3
    with pytest.raises(ValueError):
        lambda_v_from_refresh(0.0)


def test_lambda_v_zigzag_rademacher():
    assert lambda_v_zigzag_rademacher([0.0, 0.0], [1.0, 2.0]) >= 1.0
    assert lambda_v_zigzag_rademacher([1.0], [0.0]) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="vanishes"):
        lambda_v_zigzag_rademacher([0.0, 1.0], [0.0, 0.0])


def test_Lambda_at_zero_and_derivative():
    assert Lambda(0.0, 0.5, 8.0) == 0.0
    h = 1e-6
    for lx in (0.3, 0.5, 0.9):
        der = (Lambda(h, lx, 8.0) - Lambda(0.0, lx, 8.0)) / h
        assert der == pytest.approx(lx, rel=1e-4)


def test_Lambda_grid_maximum_large_grid():
    lx, R0 = 0.5, 8.0
    e0 = epsilon0(lx, R0)
    grid = np.linspace(0.0, eps_domain_sup(lx, R0), 1_000_001)
    vals = Lambda(grid, lx, R0)
    assert abs(Lambda(e0, lx, R0) - float(np.max(vals))) <= 1e-9


def test_Lambda_domain_error():
    with pytest.raises(DomainError):
        Lambda(1.0, 0.5, 8.0)
    with pytest.raises(DomainError):
        Lambda(-0.1, 0.5, 8.0)


def test_Lambda_concavity():
    lx, R0 = 0.37, 12.0
    grid = np.linspace(0.0, eps_domain_sup(lx, R0), 10_001)
    vals = Lambda(grid, lx, R0)
    assert float(np.max(np.diff(vals, 2))) <= 1e-9


def test_epsilon0_closed_forms():
    R0 = 9.0
    assert epsilon0(1.0, R0) == pytest.approx(2.0 / (4.0 + R0**2))
    e0 = epsilon0(0.5, 10.0)
    assert 0.5 / (1 + 100.0) <= e0 <= 2.0 / 104.0
    assert e0 == pytest.approx(0.0142344, abs=1e-4)


def test_epsilon0_is_stationary_point():
    lx, R0 = 0.5, 10.0
    e0 = epsilon0(lx, R0)
    h = 1e-7
    der = (Lambda(e0 + h, lx, R0) - Lambda(e0 - h, lx, R0)) / (2 * h)
    assert abs(der) < 1e-5


def test_epsilon0_upper_estimate_for_moderate_R0():
    rng = np.random.default_rng(0)
    for _ in range(200):
        lx = rng.uniform(0.01, 0.99)
        R0 = rng.uniform(2.0, 1000.0)
        assert epsilon0(lx, R0) < 3.0 * lx / (4.0 * lx + R0**2)


def test_alpha_A_limits_and_scaling():
    consts = CoercivityConstants(1.0, 0.5, 8.0, 1.0)
    a_small, A_small = alpha_A(1e-12, consts)
    assert a_small == pytest.approx(0.0, abs=1e-10)
    assert A_small == pytest.approx(1.0, abs=1e-10)
    e0 = epsilon0(0.5, 8.0)
    a1, A1 = alpha_A(e0, CoercivityConstants(1.0, 0.5, 8.0, 1.0))
    a4, A4 = alpha_A(e0, CoercivityConstants(1.0, 0.5, 8.0, 4.0))
    assert a4 == pytest.approx(2.0 * a1, rel=1e-15)
    assert A4 == A1
    assert A1 <= np.sqrt(3.0)
    with pytest.raises(DomainError):
        alpha_A(0.9, CoercivityConstants(2.0, 0.5, 8.0, 1.0))


def test_lemma6_bracket_contains_alpha():
    consts = CoercivityConstants(1.0, 0.5, 8.0, 1.0)
    lo, hi = lemma6_bracket(consts)
    alpha, _ = alpha_A(epsilon0(0.5, 8.0), consts)
    assert lo <= alpha <= hi
    with pytest.raises(PreconditionError):
        lemma6_bracket(CoercivityConstants(1.0, 0.5, 1.0, 1.0))


def test_bracket_randomized_sweep():
    rng = np.random.default_rng(1)
    for _ in range(300):
        lx = rng.uniform(1e-3, 1 - 1e-3)
        R0 = rng.uniform(R0_FLOOR, 1000.0)
        lv = rng.uniform(1e-6, np.sqrt(2.0) * R0)
        consts = CoercivityConstants(lv, lx, R0, 1.0)
        e0 = epsilon0(lx, R0)
        assert lx / (1 + R0**2) <= e0 <= 2 / (4 + R0**2) <= 1 / (4 * R0) + 1e-15
        alpha, A = alpha_A(e0, consts)
        assert A <= np.sqrt(3.0) + 1e-12
        lo, hi = lemma6_bracket(consts)
        assert lo <= alpha <= hi


def test_maximize_alpha_structure():
    consts = CoercivityConstants(1.0, 0.5, 8.0, 1.0)
    e0 = epsilon0(0.5, 8.0)
    e_star, a_star = maximize_alpha(consts)
    a0, _ = alpha_A(e0, consts)
    assert 0.0 < e_star < e0
    assert a0 <= a_star <= 3.0 * a0


def test_maximize_alpha_grid_cross_check():
    consts = CoercivityConstants(1.5, 0.4, 9.0, 1.0)
    e0 = epsilon0(0.4, 9.0)
    _, a_star = maximize_alpha(consts)
    grid = np.linspace(1e-12, e0, 1_000_001)
    lam = Lambda(grid, 0.4, 9.0)
    vals = 1.5 * lam / (1.0 + np.sqrt(2.0) * 1.5 * grid)
    assert a_star == pytest.approx(float(np.max(vals)), abs=1e-9)


def test_maximize_alpha_degenerate_lambda_v():
    consts = CoercivityConstants(1e-6, 0.5, 8.0, 1.0)
    e0 = epsilon0(0.5, 8.0)
    _, a_star = maximize_alpha(consts)
    a0, _ = alpha_A(e0, consts)
    assert a_star / a0 == pytest.approx(1.0, rel=1e-5)


def test_iact_bound_values():
    assert iact_bound(1.0, 1.0) == 2.0
    assert iact_bound(0.5, np.sqrt(3.0)) == pytest.approx(4.0 * np.sqrt(3.0))
    assert iact_bound(2.0, 1.0) < iact_bound(1.0, 1.0)
    with pytest.raises(ValueError):
        iact_bound(0.0, 1.0)
    with pytest.raises(ValueError):
        iact_bound(1.0, 0.5)


def test_theorem1_full_report_bps():
    target = gaussian_target(np.eye(2))
    rep = theorem1_constants(
        target, GAUSS_V, (1.0, 0.0), decompose_bps(target), 1.0, sampler="bps"
    )
    assert rep.source == "theorem1"
    assert rep.alpha > 0 and rep.A <= np.sqrt(3.0)
    assert rep.lemma6_lower <= rep.alpha <= rep.lemma6_upper
    assert rep.iact_bound == pytest.approx(2.0 * rep.A / rep.alpha)
    assert rep.R0 >= R0_FLOOR
    parsed = __import__("json").loads(rep.to_json())
    for key in ("kappa1", "kappa2", "R0_bar", "R0", "lambda_x", "lambda_v",
                "epsilon0", "alpha", "A", "iact_bound"):
        assert key in parsed


def test_theorem1_rhmc_channel_sum_vanishes():
    target = gaussian_target(np.eye(3))
    vel = VelocityModel(d=3, kind="gaussian", m2=1.0)
    rep = theorem1_constants(target, vel, (1.0, 0.0), decompose_rhmc(target), 2.0,
                             sampler="rhmc")
    k1, k2 = kappas(0.0, 1.0, 1.0, 3, 0.0)
    expect, _ = r0_general(vel, 1.0, 0.0, np.zeros(0), 2.0, 0.0, k1, k2)
    assert rep.R0 == pytest.approx(expect)


def test_theorem17_beats_theorem1_on_1d_gaussian():
    target = gaussian_target(np.eye(1))
    vel = VelocityModel(d=1, kind="gaussian", m2=1.0)
    rep1 = theorem1_constants(target, vel, (1.0, 0.0), decompose_zigzag(target), 1.0,
                              sampler="zigzag")
    rep17 = theorem17_constants(target, vel, (1.0, 0.0), 1.0)
    assert rep17.alpha > rep1.alpha


def test_theorem17_dimension_free_bit_identical():
    vel_by_d = {d: VelocityModel(d=d, kind="rademacher", m2=1.0) for d in (1, 10, 100)}
    reports = [
        theorem17_constants(product_beta_target(d, 2.0), vel_by_d[d], (1.0, 0.0), 1.0)
        for d in (1, 10, 100)
    ]
    for rep in reports[1:]:
        assert rep.R0 == reports[0].R0
        assert rep.alpha == reports[0].alpha
        assert rep.A == reports[0].A
        assert rep.iact_bound == reports[0].iact_bound


def test_theorem17_needs_c3():
    target = radial_beta_target(2, 2.0)  # declares no c3
    vel = VelocityModel(d=2, kind="rademacher", m2=1.0)
    with pytest.raises(MissingC3):
        theorem17_constants(target, vel, (1.0, 0.0), 1.0)


def test_theorem17_conditioning_penalty():
    # alpha decays like 1/R0^2 as the eigenvalue spread c3 grows
    vel = VelocityModel(d=2, kind="gaussian", m2=1.0)
    t_good = gaussian_target(np.eye(2))
    assert t_good.constants.c3 == 0.0
    rep = theorem17_constants(t_good, vel, (1.0, 0.0), 1.0)
    R0 = rep.R0
    a1, _ = alpha_A(epsilon0(rep.lambda_x, R0),
                    CoercivityConstants(1.0, rep.lambda_x, R0, 1.0))
    a2, _ = alpha_A(epsilon0(rep.lambda_x, 2 * R0),
                    CoercivityConstants(1.0, rep.lambda_x, 2 * R0, 1.0))
    assert a1 / a2 == pytest.approx(4.0, rel=0.15)


def test_m2_homogeneity_exact():
    target = gaussian_target(np.diag([1.0, 3.0]))
    reports = {
        m2: theorem1_constants(
            target,
            VelocityModel(d=2, kind="gaussian", m2=m2),
            (1.0, 0.0),
            decompose_bps(target),
            1.0,
            sampler="bps",
        )
        for m2 in (0.25, 1.0, 4.0)
    }
    base = reports[1.0]
    for m2, rep in reports.items():
        assert rep.R0 == base.R0
        assert rep.epsilon0 == base.epsilon0
        assert abs(rep.alpha - np.sqrt(m2) * base.alpha) <= 1e-12 * base.alpha


def test_coercivity_constants_validation():
    with pytest.raises(ValueError):
        CoercivityConstants(0.0, 0.5, 8.0)
    with pytest.raises(ValueError):
        CoercivityConstants(1.0, 1.5, 8.0)
    with pytest.raises(ValueError):
        CoercivityConstants(1.0, 0.5, -1.0)
