"""Explicit convergence-rate certificates for the three samplers.

Computes, in closed form, constants (alpha, A) such that the sampler's
semigroup satisfies ||P_t f|| <= A exp(-alpha t) ||f|| on mean-zero
observables, together with the induced integrated-autocorrelation ceiling
2A/alpha. Two routes are implemented:

* ``theorem1`` -- the general route valid for zigzag, bps and rhmc, built
  from the Poincare constant, Hessian/Laplacian certificates, the velocity
  moments and the rate certificate;
* ``theorem17`` -- the zigzag-specialized route with much tighter, often
  dimension-free constants, requiring the off-diagonal Hessian defect c3.

All quantities are plain double-precision formula evaluations; the stated
tolerances downstream (>= 1e-9) dwarf roundoff at these expression sizes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .targets import FieldDecomposition, TargetModel
from .velocity import VelocityModel, mb_factor, moments

R0_FLOOR = 4.0 + 2.0 * np.sqrt(3.0)


class DomainError(ValueError):
    """Argument outside the validity region of a closed-form expression."""


class PreconditionError(ValueError):
    """A stated precondition of an estimate does not hold."""


class MissingC3(ValueError):
    """The zigzag-specialized route needs the off-diagonal Hessian defect c3."""


@dataclass(frozen=True)
class CoercivityConstants:
    """The (lambda_v, lambda_x, R0, m2) tuple the rate formulas consume."""

    lambda_v: float
    lambda_x: float
    R0: float
    m2: float = 1.0

    def __post_init__(self):
        if self.lambda_v <= 0:
            raise ValueError("lambda_v must be positive")
        if not 0.0 < self.lambda_x < 1.0:
            raise ValueError("lambda_x must lie in (0, 1)")
        if self.R0 < 0:
            raise ValueError("R0 must be nonnegative")
        if self.m2 <= 0:
            raise ValueError("m2 must be positive")


@dataclass(frozen=True)
class BoundReport:
    source: str  # theorem1 | theorem17
    d: int
    sampler: str
    m2: float
    C_phi: float
    c_phi: float
    lambda_lower: float
    c_lambda: float
    kappa1: float | None
    kappa2: float | None
    R0_bar: float | None
    R0: float
    lambda_v: float
    lambda_x: float
    epsilon0: float
    Lambda_at_eps0: float
    alpha: float
    A: float
    iact_bound: float
    lemma6_lower: float | None
    lemma6_upper: float | None

    def to_json(self, **extra) -> str:
        payload = asdict(self)
        payload.update(extra)
        return json.dumps(payload, sort_keys=True, indent=2)

    @property
    def constants(self) -> CoercivityConstants:
        return CoercivityConstants(self.lambda_v, self.lambda_x, self.R0, self.m2)


def lambda_x_from_poincare(C_P: float) -> float:
    """Macroscopic coercivity constant C_P / (1 + C_P) in (0, 1)."""
    if C_P <= 0:
        raise ValueError("C_P must be positive")
    return C_P / (1.0 + C_P)


def lambda_v_from_refresh(lambda_lower: float) -> float:
    """Microscopic coercivity from the refreshment floor (identity map)."""
    if lambda_lower <= 0:
        raise ValueError("the refreshment rate floor must be strictly positive")
    return float(lambda_lower)


def lambda_v_zigzag_rademacher(grad_inf, lambda_ref_k) -> float:
    """Microscopic coercivity for zigzag with coordinate-flip refreshment.

    Takes per-coordinate certificates inf_x |dU/dx_k| and the refreshment
    floors; returns min_k { grad_inf_k / 2 + lambda_ref_k }, a conservative
    lower bound for the joint minimum over (k, x). Refreshment is only needed
    where some coordinate gradient can vanish.
    """
    g = np.asarray(grad_inf, dtype=float)
    r = np.asarray(lambda_ref_k, dtype=float)
    if g.shape != r.shape or g.ndim != 1:
        raise ValueError("grad_inf and lambda_ref_k must be equal-length vectors")
    if np.any(g < 0) or np.any(r < 0):
        raise ValueError("certificates must be nonnegative")
    val = float(np.min(g / 2.0 + r))
    if val <= 0:
        raise ValueError(
            "coercivity vanishes: some coordinate has zero gradient infimum and "
            "zero refreshment"
        )
    return val


def kappas(c1: float, C_P: float, c2: float, d: int, varpi: float) -> tuple[float, float]:
    """Elliptic regularity constants (kappa1, kappa2).

    kappa1 = sqrt(1 + c1/2); 1/kappa2 = sqrt(1 + 4 c2 d^(1+varpi) + 16 C_P^2) / C_P.
    """
    if c1 < 0 or c2 < 0 or varpi < 0 or C_P <= 0 or d < 1:
        raise ValueError("need c1, c2, varpi >= 0, C_P > 0, d >= 1")
    kappa1 = float(np.sqrt(1.0 + c1 / 2.0))
    kappa2 = float(C_P / np.sqrt(1.0 + 4.0 * c2 * d ** (1.0 + varpi) + 16.0 * C_P**2))
    return kappa1, kappa2


def r0_general(
    velocity: VelocityModel,
    C_phi: float,
    c_phi: float,
    a,
    lambda_lower: float,
    c_lambda: float,
    kappa1: float,
    kappa2: float,
) -> tuple[float, float]:
    """General-route boundedness constant; returns (R0, R0_bar).

    R0_bar = mb { sqrt(2)(1+C_phi) kappa1/kappa2 sum_k a_k + kappa1 }
             + lambda_lower/sqrt(2) { 1 + 2 c_lambda kappa1/kappa2 }
             + c_phi K / sqrt(2),
    floored by both 4 + 2 sqrt(3) and lambda_lower/sqrt(2).
    """
    if lambda_lower <= 0:
        raise ValueError("lambda_lower must be strictly positive")
    a = np.asarray(a, dtype=float)
    K = a.size
    mb = mb_factor(velocity)
    sq2 = np.sqrt(2.0)
    r0_bar = (
        mb * (sq2 * (1.0 + C_phi) * kappa1 / kappa2 * float(np.sum(a)) + kappa1)
        + lambda_lower / sq2 * (1.0 + 2.0 * c_lambda * kappa1 / kappa2)
        + c_phi * K / sq2
    )
    return float(max(R0_FLOOR, lambda_lower / sq2, r0_bar)), float(r0_bar)


def r0_zigzag(
    velocity: VelocityModel,
    C_phi: float,
    c_phi: float,
    c1: float,
    c3: float,
    lambda_lower: float,
) -> float:
    """Zigzag-specialized boundedness constant.

    sqrt(6 m4) (2 + C_phi) / m2 * ( sqrt(1 + c1/2) + 1 + sqrt(c3/2) )
    + (lambda_lower + c_phi) / sqrt(2); dimension enters nowhere.
    """
    if lambda_lower <= 0:
        raise ValueError("lambda_lower must be strictly positive")
    if c3 < 0:
        raise ValueError("c3 must be nonnegative")
    m2, m4, _ = moments(velocity)
    return float(
        np.sqrt(6.0 * m4) * (2.0 + C_phi) / m2
        * (np.sqrt(1.0 + c1 / 2.0) + 1.0 + np.sqrt(c3 / 2.0))
        + (lambda_lower + c_phi) / np.sqrt(2.0)
    )


def radicand(eps, lambda_x: float, R0: float):
    """Discriminant inside the spectral-gap factor; positive on the domain."""
    eps = np.asarray(eps, dtype=float)
    return (1.0 - eps * (1.0 - lambda_x)) ** 2 - 4.0 * eps * lambda_x * (1.0 - eps) + (
        eps * R0
    ) ** 2


def eps_domain_sup(lambda_x: float, R0: float) -> float:
    """Upper endpoint 4 lambda_x / (4 lambda_x + R0^2) of the epsilon domain."""
    return 4.0 * lambda_x / (4.0 * lambda_x + R0**2)


def Lambda(eps, lambda_x: float, R0: float):
    """Smallest-eigenvalue factor of the twisted-norm dissipation matrix.

    Vanishes at 0, has right-derivative lambda_x there, is concave, and is
    maximized at epsilon0. Scalar or vectorized in eps.
    """
    eps_arr = np.asarray(eps, dtype=float)
    sup = eps_domain_sup(lambda_x, R0)
    if np.any(eps_arr < 0) or np.any(eps_arr > sup * (1 + 1e-12)):
        raise DomainError(f"eps must lie in [0, {sup}]")
    rad = radicand(eps_arr, lambda_x, R0)
    if np.any(rad < -1e-12):
        raise DomainError("negative discriminant beyond roundoff tolerance")
    rad = np.maximum(rad, 0.0)
    out = (1.0 - eps_arr * (1.0 - lambda_x) - np.sqrt(rad)) / 2.0
    return float(out) if np.isscalar(eps) or np.asarray(eps).ndim == 0 else out


def epsilon0(lambda_x: float, R0: float) -> float:
    """Closed-form maximizer of the spectral-gap factor."""
    if not 0.0 < lambda_x <= 1.0:
        raise ValueError("lambda_x must lie in (0, 1]")
    if R0 <= 0:
        raise ValueError("R0 must be positive")
    num = (1.0 + lambda_x) - (1.0 - lambda_x) * np.sqrt(R0**2 / (R0**2 + 4.0 * lambda_x))
    return float(num / ((1.0 + lambda_x) ** 2 + R0**2))


def alpha_A(eps: float, constants: CoercivityConstants) -> tuple[float, float]:
    """Decay rate and norm-equivalence constant at a given twist epsilon.

    alpha = lambda_v sqrt(m2) Lambda(eps) / (1 + sqrt(2) lambda_v eps),
    A = sqrt( (1 + sqrt(2) lambda_v eps) / (1 - sqrt(2) lambda_v eps) ).
    """
    lv = constants.lambda_v
    z = np.sqrt(2.0) * lv * eps
    if z >= 1.0:
        raise DomainError("sqrt(2) lambda_v eps >= 1: the twisted norm degenerates")
    lam = Lambda(eps, constants.lambda_x, constants.R0)
    alpha = lv * np.sqrt(constants.m2) * lam / (1.0 + z)
    A = np.sqrt((1.0 + z) / (1.0 - z))
    return float(alpha), float(A)


def lemma6_bracket(constants: CoercivityConstants) -> tuple[float, float]:
    """Two-sided estimate of alpha at epsilon0.

    Valid once R0 clears both floors: lower = lambda_v lambda_x sqrt(m2)
    eps0 / 6, upper = 4 lambda_v lambda_x sqrt(m2) eps0.
    """
    floor = max(R0_FLOOR, constants.lambda_v / np.sqrt(2.0))
    if constants.R0 < floor:
        raise PreconditionError(
            f"bracket needs R0 >= {floor:.6f}, got {constants.R0:.6f}"
        )
    e0 = epsilon0(constants.lambda_x, constants.R0)
    base = constants.lambda_v * constants.lambda_x * np.sqrt(constants.m2) * e0
    return float(base / 6.0), float(4.0 * base)


def maximize_alpha(constants: CoercivityConstants, xtol: float = 1e-12) -> tuple[float, float]:
    """Golden-section maximization of alpha over (0, epsilon0].

    alpha is unimodal there with its unique maximizer strictly inside, so
    golden-section converges; absolute tolerance ``xtol`` in epsilon.
    """
    e0 = epsilon0(constants.lambda_x, constants.R0)

    def f(e):
        return alpha_A(e, constants)[0]

    lo, hi = 0.0, e0
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a_, b_ = lo, hi
    c_ = b_ - invphi * (b_ - a_)
    d_ = a_ + invphi * (b_ - a_)
    fc, fd = f(c_), f(d_)
    while b_ - a_ > xtol:
        if fc >= fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - invphi * (b_ - a_)
            fc = f(c_)
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + invphi * (b_ - a_)
            fd = f(d_)
    eps_star = 0.5 * (a_ + b_)
    alpha_star = f(eps_star)
    alpha0 = f(e0)
    if np.sqrt(2.0) * constants.R0 >= constants.lambda_v:
        slack = 1e-9 * max(alpha0, 1e-300)
        if not (alpha0 - slack <= alpha_star <= 3.0 * alpha0 + slack):
            raise RuntimeError(
                f"optimizer left the guaranteed sandwich: "
                f"{alpha0} <= {alpha_star} <= {3 * alpha0} violated"
            )
    return float(eps_star), float(alpha_star)


def iact_bound(alpha: float, A: float) -> float:
    """Integrated-autocorrelation ceiling 2A/alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if A < 1:
        raise ValueError("A must be at least 1")
    return 2.0 * A / alpha


def _finish_report(
    source, d, sampler, m2, C_phi, c_phi, lambda_lower, c_lambda,
    kappa1, kappa2, r0_bar, R0, lambda_v, lambda_x,
) -> BoundReport:
    consts = CoercivityConstants(lambda_v, lambda_x, R0, m2)
    e0 = epsilon0(lambda_x, R0)
    lam0 = Lambda(e0, lambda_x, R0)
    alpha, A = alpha_A(e0, consts)
    try:
        lo, hi = lemma6_bracket(consts)
    except PreconditionError:
        lo = hi = None
    return BoundReport(
        source=source, d=d, sampler=sampler, m2=m2,
        C_phi=C_phi, c_phi=c_phi, lambda_lower=lambda_lower, c_lambda=c_lambda,
        kappa1=kappa1, kappa2=kappa2, R0_bar=r0_bar, R0=R0,
        lambda_v=lambda_v, lambda_x=lambda_x,
        epsilon0=e0, Lambda_at_eps0=lam0, alpha=alpha, A=A,
        iact_bound=iact_bound(alpha, A),
        lemma6_lower=lo, lemma6_upper=hi,
    )


def theorem1_constants(
    target: TargetModel,
    velocity: VelocityModel,
    rate_certificate: tuple[float, float],
    decomp: FieldDecomposition,
    lambda_lower: float,
    c_lambda: float = 0.0,
    sampler: str = "",
) -> BoundReport:
    """General-route bound report for any of the three samplers.

    ``rate_certificate`` is the (C_phi, c_phi) pair of the jump-rate family,
    ``decomp`` fixes the channel count and the per-channel growth constants.
    """
    C_phi, c_phi = rate_certificate
    tc = target.constants
    kappa1, kappa2 = kappas(tc.c1, tc.C_P, tc.c2, target.d, tc.varpi)
    R0, r0_bar = r0_general(
        velocity, C_phi, c_phi, decomp.a, lambda_lower, c_lambda, kappa1, kappa2
    )
    return _finish_report(
        "theorem1", target.d, sampler or f"K={decomp.K}", velocity.m2,
        C_phi, c_phi, lambda_lower, c_lambda,
        kappa1, kappa2, r0_bar, R0,
        lambda_v=lambda_v_from_refresh(lambda_lower),
        lambda_x=lambda_x_from_poincare(tc.C_P),
    )


def theorem17_constants(
    target: TargetModel,
    velocity: VelocityModel,
    rate_certificate: tuple[float, float],
    lambda_lower: float,
) -> BoundReport:
    """Zigzag-specialized bound report; requires the c3 constant."""
    C_phi, c_phi = rate_certificate
    tc = target.constants
    if tc.c3 is None:
        raise MissingC3(
            f"target {target.name!r} declares no off-diagonal Hessian constant c3"
        )
    R0 = r0_zigzag(velocity, C_phi, c_phi, tc.c1, tc.c3, lambda_lower)
    return _finish_report(
        "theorem17", target.d, "zigzag", velocity.m2,
        C_phi, c_phi, lambda_lower, 0.0,
        None, None, None, R0,
        lambda_v=lambda_v_from_refresh(lambda_lower),
        lambda_x=lambda_x_from_poincare(tc.C_P),
    )
