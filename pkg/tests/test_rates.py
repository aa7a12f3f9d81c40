import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdmpkit.rates import RateFunction, make_rate, phi_canonical, phi_softplus, verify_rate


def test_canonical_values():
    phi = phi_canonical()
    assert phi(3.0) == 3.0
    assert phi(-3.0) == 0.0
    assert phi(0.0) == 0.0
    assert phi.C_phi == 1.0 and phi.c_phi == 0.0


def test_canonical_certificate_equality_case():
    phi = phi_canonical()
    s = 7.3
    assert phi(s) + phi(-s) == pytest.approx(7.3)
    assert phi(s) + phi(-s) <= phi.c_phi * 1.0 + phi.C_phi * abs(s)


def test_softplus_values():
    phi = phi_softplus(1.0)
    assert phi(0.0) == pytest.approx(np.log(2.0))
    s = 1.7
    assert phi(s) - phi(-s) == pytest.approx(s, abs=1e-12)
    assert phi(1000.0) == pytest.approx(1000.0, abs=1e-9)
    assert np.isfinite(phi(1e6)) and np.isfinite(phi(-1e6))
    assert phi.c_phi == pytest.approx(2.0 * np.log(2.0))


def test_softplus_certificate_scales_with_m2():
    assert phi_softplus(4.0).c_phi == pytest.approx(np.log(2.0))
    with pytest.raises(ValueError):
        phi_softplus(0.0)


@pytest.mark.parametrize("rate,m2", [(phi_canonical(), 1.0), (phi_softplus(1.0), 1.0)])
def test_identity_and_floor_on_wide_grid(rate, m2):
    s = np.linspace(-1000.0, 1000.0, 100_001)
    up, down = rate(s), rate(-s)
    assert np.max(np.abs(up - down - s)) < 1e-10
    assert np.all(up >= np.maximum(s, 0.0) - 1e-12)
    assert np.all(np.isfinite(rate(np.array([-1e6, 1e6]))))


def test_verify_rate_passes_issued_certificates():
    grid = np.linspace(-100.0, 100.0, 10_001)
    assert verify_rate(phi_canonical(), 1.0, grid).passed
    assert verify_rate(phi_softplus(1.0), 1.0, grid).passed
    assert verify_rate(phi_softplus(0.25), 0.25, grid).passed


def test_verify_rate_catches_wrong_certificate():
    good = phi_softplus(1.0)
    broken = RateFunction(good.name, good.eval, good.C_phi, 0.0, 1.0)
    rep = verify_rate(broken, 1.0, np.array([0.0]))
    # phi(0) + phi(0) = 2 log 2 > 0 exposes the missing additive constant
    assert rep.max_upper_violation == pytest.approx(2.0 * np.log(2.0))
    assert not rep.passed


def test_verify_rate_empty_grid():
    with pytest.raises(ValueError):
        verify_rate(phi_canonical(), 1.0, [])


def test_make_rate_dispatch():
    assert make_rate("canonical", 2.0).name == "canonical"
    assert make_rate("softplus", 4.0).c_phi == pytest.approx(np.log(2.0))
    with pytest.raises(ValueError, match="unknown rate"):
        make_rate("cubic", 1.0)


@given(st.floats(min_value=-50.0, max_value=50.0, allow_nan=False))
def test_identity_property(s):
    for rate in (phi_canonical(), phi_softplus(1.0)):
        assert rate(s) - rate(-s) == pytest.approx(s, abs=1e-10)
        assert rate(s) >= max(s, 0.0) - 1e-12
