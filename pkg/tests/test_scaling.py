import numpy as np
import pytest

from pdmpkit.scaling import ScalingFamily, family_alpha, optimal_refresh, scaling_report


DIMS = [2**k for k in range(4, 13)]


def test_rhmc_dimension_free():
    fam = ScalingFamily(sampler="rhmc")
    rep = scaling_report(fam, DIMS, lambda_mode="optimized")
    alphas = np.array(rep.alpha)
    assert np.max(np.abs(alphas / alphas[0] - 1.0)) < 1e-4
    lams = np.array(rep.lambda_used)
    assert np.max(np.abs(lams / lams[0] - 1.0)) < 1e-3
    assert abs(rep.fitted_slope) < 1e-3


def test_bps_slope_half():
    fam = ScalingFamily(sampler="bps")
    rep = scaling_report(fam, DIMS, lambda_mode="optimized")
    assert rep.fitted_slope == pytest.approx(0.5, rel=0.1)


def test_crude_zigzag_slope_three_halves():
    fam = ScalingFamily(sampler="zigzag")
    rep = scaling_report(fam, DIMS, lambda_mode="optimized")
    assert rep.fitted_slope == pytest.approx(1.5, rel=0.1)


def test_zigzag_specialized_route_flat():
    fam = ScalingFamily(sampler="zigzag_t17", velocity_kind="rademacher")
    rep = scaling_report(fam, DIMS, lambda_mode="optimized")
    assert len(set(rep.alpha)) == 1  # bit-identical across dimensions
    assert rep.fitted_slope == 0.0


def test_fixed_mode_uses_given_lambda():
    fam = ScalingFamily(sampler="bps")
    rep = scaling_report(fam, [4, 16], lambda_mode="fixed", lambda_fixed=2.0)
    assert rep.lambda_used == [2.0, 2.0]
    a, _ = family_alpha(fam, 4, 2.0)
    assert rep.alpha[0] == pytest.approx(a)


def test_optimized_beats_fixed():
    fam = ScalingFamily(sampler="bps")
    lam_star, a_star = optimal_refresh(fam, 64)
    for lam in (0.1, 1.0, 10.0, 100.0):
        assert a_star >= family_alpha(fam, 64, lam)[0] - 1e-12
    assert lam_star > 0


def test_empty_dims_rejected():
    with pytest.raises(ValueError):
        scaling_report(ScalingFamily(sampler="bps"), [])


def test_csv_roundtrip(tmp_path):
    fam = ScalingFamily(sampler="bps")
    rep = scaling_report(fam, [4, 8, 16], lambda_mode="fixed", lambda_fixed=1.0)
    path = tmp_path / "sweep.csv"
    rep.to_csv(path, meta_line="hash=x")
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "d,lambda_opt,alpha,alpha_inv,slope"
    assert len(lines) == 2 + 3
    row = lines[2].split(",")
    assert int(row[0]) == 4
    assert float(row[2]) == pytest.approx(rep.alpha[0])
