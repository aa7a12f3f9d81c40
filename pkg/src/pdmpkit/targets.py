"""Target potentials with certified constants for the bound calculator.

A target bundles U, its gradient, optionally the Hessian diagonal, and the
constants the convergence bounds consume:

* ``C_P``  -- Poincare constant of the target density,
* ``c1``   -- Hessian lower bound: hess(U) + c1*I psd everywhere,
* ``c2, varpi`` -- Laplacian growth: lap(U) <= c2 d^(1+varpi) + |grad U|^2/2,
* ``c3``   -- off-diagonal Hessian defect used by the zigzag-specialized bound,
* ``L``    -- gradient Lipschitz constant (used by thinning envelopes),
* ``a``    -- channel-field bound: |F_k| <= a (1 + |grad U|).

Built-in families carry constants extracted from their closed forms; user
targets must declare all constants explicitly (the grid verifier checks, it
never infers).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

DOMAINS = ("euclidean", "torus")


@dataclass(frozen=True)
class TargetConstants:
    C_P: float
    c1: float
    c2: float
    varpi: float
    c3: float | None = None
    L: float | None = None
    a: float = 1.0

    def __post_init__(self):
        if self.C_P <= 0:
            raise ValueError("C_P must be positive")
        if self.c1 < 0 or self.c2 <= 0 or self.varpi < 0:
            raise ValueError("need c1 >= 0, c2 > 0, varpi >= 0")
        if self.c3 is not None and self.c3 < 0:
            raise ValueError("c3 must be >= 0 when present")
        if self.a < 0:
            raise ValueError("a must be >= 0")


@dataclass(frozen=True)
class TargetModel:
    d: int
    domain: str
    eval_U: Callable[[np.ndarray], float]
    grad_U: Callable[[np.ndarray], np.ndarray]
    constants: TargetConstants
    hess_diag: Callable[[np.ndarray], np.ndarray] | None = None
    precision: np.ndarray | None = field(default=None)  # quadratic targets only
    name: str = "custom"

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}")
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 1):
            raise ValueError("dimension must be a positive integer")
        if self.precision is not None:
            P = np.asarray(self.precision, dtype=float)
            if P.shape != (self.d, self.d):
                raise ValueError("precision must be d x d")
            object.__setattr__(self, "precision", P)

    @property
    def is_quadratic(self) -> bool:
        return self.precision is not None


def gaussian_target(precision) -> TargetModel:
    """Gaussian target U(x) = x' P x / 2 for symmetric positive definite P."""
    P = np.asarray(precision, dtype=float)
    if P.ndim == 1:
        P = np.diag(P)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("precision must be a square matrix or a diagonal vector")
    if np.linalg.norm(P - P.T) > 1e-12 * max(np.linalg.norm(P), 1e-300):
        raise ValueError("precision must be symmetric")
    eigs = np.linalg.eigvalsh(P)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    if lam_min <= 0:
        raise ValueError(f"precision must be positive definite (min eigenvalue {lam_min})")
    d = P.shape[0]
    diag = np.diag(P).copy()
    consts = TargetConstants(
        C_P=lam_min, c1=0.0, c2=lam_max, varpi=0.0,
        c3=lam_max - lam_min, L=lam_max, a=1.0,
    )
    return TargetModel(
        d=d,
        domain="euclidean",
        eval_U=lambda x: 0.5 * float(x @ (P @ x)),
        grad_U=lambda x: P @ x,
        hess_diag=lambda x: diag,
        constants=consts,
        precision=P,
        name="gaussian",
    )


def _product_beta_c2(beta: float) -> float:
    # constant from the explicit Laplacian bound; the cutoff c makes the
    # |grad U|^2 coefficient at most 1/2
    c = max(2.0 / np.sqrt(beta), 2.0 ** (1.0 / beta))
    c2sq = c * c
    return beta * (
        max(1.0, (1.0 + c2sq) ** (beta - 2.0))
        + (2.0 * beta - 1.0) * (1.0 + c2sq) ** (beta - 2.0) * c2sq
    )


def product_beta_target(d: int, beta: float) -> TargetModel:
    """Separable target U(x) = sum_i (1 + x_i^2)^beta / 2, beta >= 1.

    Strongly convex with Hessian >= beta*I, diagonal Hessian (so c3 = 0) and
    dimension-free constants. Gradient Lipschitz only at beta = 1.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    beta = float(beta)

    def U(x):
        return 0.5 * float(np.sum((1.0 + x**2) ** beta))

    def grad(x):
        return beta * x * (1.0 + x**2) ** (beta - 1.0)

    def hdiag(x):
        return beta * (1.0 + (2.0 * beta - 1.0) * x**2) * (1.0 + x**2) ** (beta - 2.0)

    consts = TargetConstants(
        C_P=beta, c1=0.0, c2=_product_beta_c2(beta), varpi=0.0,
        c3=0.0, L=(beta if beta == 1.0 else None), a=1.0,
    )
    return TargetModel(
        d=d, domain="euclidean", eval_U=U, grad_U=grad, hess_diag=hdiag,
        constants=consts,
        precision=np.eye(d) if beta == 1.0 else None,
        name="product_beta",
    )


def _radial_beta_c2(beta: float, d: int) -> float:
    varpi = 1.0 - 1.0 / beta
    num = 4.0 * (beta - 1.0) * beta + 2.0 ** (beta - 1.0) * beta * d * (
        1.0 + (2.0 * d / beta) ** (1.0 - 1.0 / beta)
    )
    return num / d ** (1.0 + varpi)


def radial_beta_target(d: int, beta: float) -> TargetModel:
    """Radial target U(x) = (1 + |x|^2)^beta, beta >= 1.

    Hessian >= 2*beta*I; the Laplacian growth certificate holds with
    varpi = 1 - 1/beta.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    beta = float(beta)

    def U(x):
        return float((1.0 + x @ x) ** beta)

    def grad(x):
        return 2.0 * beta * (1.0 + x @ x) ** (beta - 1.0) * x

    def hdiag(x):
        r2 = x @ x
        return (
            4.0 * beta * (beta - 1.0) * (1.0 + r2) ** (beta - 2.0) * x**2
            + 2.0 * beta * (1.0 + r2) ** (beta - 1.0)
        )

    consts = TargetConstants(
        C_P=2.0 * beta, c1=0.0, c2=_radial_beta_c2(beta, d), varpi=1.0 - 1.0 / beta,
        c3=None, L=(2.0 * beta if beta == 1.0 else None), a=1.0,
    )
    return TargetModel(
        d=d, domain="euclidean", eval_U=U, grad_U=grad, hess_diag=hdiag,
        constants=consts,
        precision=2.0 * np.eye(d) if beta == 1.0 else None,
        name="radial_beta",
    )


def zero_torus_target(d: int) -> TargetModel:
    """Flat potential on the unit torus; the cleanest sampler test bed.

    The uniform density has spectral gap (2 pi)^2 as Poincare constant.
    """
    zero = np.zeros(d)
    consts = TargetConstants(
        C_P=4.0 * np.pi**2, c1=0.0, c2=1.0, varpi=0.0, c3=0.0, L=0.0, a=0.0,
    )
    return TargetModel(
        d=d, domain="torus",
        eval_U=lambda x: 0.0,
        grad_U=lambda x: zero,
        hess_diag=lambda x: zero,
        constants=consts,
        precision=np.zeros((d, d)),
        name="zero_torus",
    )


def with_constants(target: TargetModel, **updates) -> TargetModel:
    """Copy of the target with some certified constants overridden."""
    return replace(target, constants=replace(target.constants, **updates))


# ---------------------------------------------------------------------------
# channel-field decompositions grad U = F_0 + sum_k F_k

@dataclass(frozen=True)
class FieldDecomposition:
    K: int
    f0: Callable[[np.ndarray], np.ndarray]
    channels: tuple  # K callables x -> F_k(x)
    a: np.ndarray    # per-channel constants, length K


def decompose_zigzag(target: TargetModel) -> FieldDecomposition:
    """K = d coordinate channels F_k(x) = dU/dx_k * e_k, no drift field."""
    d = target.d
    zero = np.zeros(d)

    def channel(k):
        e = np.zeros(d)
        e[k] = 1.0
        return lambda x: target.grad_U(x)[k] * e

    return FieldDecomposition(
        K=d,
        f0=lambda x: zero,
        channels=tuple(channel(k) for k in range(d)),
        a=np.full(d, target.constants.a),
    )


def decompose_bps(target: TargetModel) -> FieldDecomposition:
    """Single channel F_1 = grad U, no drift field."""
    zero = np.zeros(target.d)
    return FieldDecomposition(
        K=1, f0=lambda x: zero, channels=(target.grad_U,),
        a=np.array([target.constants.a]),
    )


def decompose_rhmc(target: TargetModel) -> FieldDecomposition:
    """No jump channels; the whole gradient drives the deterministic drift."""
    return FieldDecomposition(
        K=0, f0=target.grad_U, channels=(), a=np.zeros(0)
    )


@dataclass(frozen=True)
class DecompositionReport:
    max_sum_violation: float      # relative error of F_0 + sum F_k = grad U
    max_channel_violation: float  # (|F_k| - a_k (1 + |grad U|))_+
    n_points: int

    @property
    def passed(self) -> bool:
        return self.max_sum_violation <= 1e-8 and self.max_channel_violation <= 1e-10


def verify_decomposition(
    decomp: FieldDecomposition,
    target: TargetModel,
    n_points: int = 100,
    rng: np.random.Generator | None = None,
    box: float = 5.0,
) -> DecompositionReport:
    """Spot-check the sum identity and per-channel growth bounds at random points."""
    rng = rng or np.random.default_rng(0)
    sum_viol = 0.0
    chan_viol = 0.0
    for _ in range(n_points):
        x = rng.uniform(-box, box, size=target.d)
        if target.domain == "torus":
            x = np.mod(x, 1.0)
        g = target.grad_U(x)
        total = decomp.f0(x) + sum(
            (f(x) for f in decomp.channels), start=np.zeros(target.d)
        )
        scale = max(np.linalg.norm(g), 1.0)
        sum_viol = max(sum_viol, float(np.linalg.norm(total - g) / scale))
        gn = np.linalg.norm(g)
        for f, ak in zip(decomp.channels, decomp.a):
            chan_viol = max(
                chan_viol, float(np.linalg.norm(f(x)) - ak * (1.0 + gn))
            )
    return DecompositionReport(sum_viol, max(chan_viol, 0.0), n_points)


@dataclass(frozen=True)
class CertificateReport:
    max_hessian_violation: float    # (-(hess_diag + c1))_+ worst entry
    max_laplacian_violation: float  # (lap U - c2 d^(1+varpi) - |grad U|^2/2)_+
    max_gradient_error: float       # relative central-difference error of grad U
    n_points: int

    @property
    def passed(self) -> bool:
        return (
            self.max_hessian_violation <= 1e-9
            and self.max_laplacian_violation <= 1e-9
            and self.max_gradient_error <= 1e-5
        )


def verify_certificates(
    target: TargetModel,
    n_points: int = 10_000,
    box: float = 10.0,
    rng: np.random.Generator | None = None,
    n_gradient_points: int = 100,
) -> CertificateReport:
    """Grid verification of the declared constants.

    Checks the Hessian lower bound through the diagonal, the Laplacian growth
    inequality, and gradient consistency against central finite differences.
    """
    rng = rng or np.random.default_rng(0)
    c = target.constants
    hess_viol = 0.0
    lap_viol = 0.0
    budget = c.c2 * target.d ** (1.0 + c.varpi)
    for _ in range(n_points):
        x = rng.uniform(-box, box, size=target.d)
        if target.domain == "torus":
            x = np.mod(x, 1.0)
        g = target.grad_U(x)
        if target.hess_diag is not None:
            h = np.asarray(target.hess_diag(x), dtype=float)
            hess_viol = max(hess_viol, float(np.max(-(h + c.c1))))
            lap_viol = max(lap_viol, float(np.sum(h) - budget - 0.5 * g @ g))
    grad_err = 0.0
    eps = 1e-6
    for _ in range(n_gradient_points):
        x = rng.uniform(-box / 2, box / 2, size=target.d)
        if target.domain == "torus":
            x = np.mod(x, 1.0)
        g = target.grad_U(x)
        fd = np.zeros(target.d)
        for i in range(target.d):
            xp, xm = x.copy(), x.copy()
            xp[i] += eps
            xm[i] -= eps
            fd[i] = (target.eval_U(xp) - target.eval_U(xm)) / (2 * eps)
        grad_err = max(
            grad_err, float(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1.0))
        )
    return CertificateReport(
        max(hess_viol, 0.0), max(lap_viol, 0.0), grad_err, n_points
    )
