"""Velocity laws, their samplers, and the closed-form moment quantities.

Every rate certificate downstream consumes only the marginal moments
``m2 = E[v1^2]``, ``m4 = E[v1^4]/3`` and ``m22 = E[v1^2 v2^2]``, so each
built-in law carries them in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

KINDS = ("gaussian", "sphere_uniform", "rademacher", "spherically_symmetric")


@dataclass(frozen=True)
class VelocityModel:
    """A velocity distribution on R^d with declared second marginal moment.

    For ``spherically_symmetric`` the law is ``V = sqrt(B) * W`` with W
    uniform on the unit hypersphere and B a nonnegative radial variable with
    first/second moments ``gamma1``/``gamma2``; only those two moments enter
    the closed forms, while ``b_sampler`` (rng -> float) is needed to draw.
    """

    d: int
    kind: str
    m2: float = 1.0
    gamma1: float | None = None
    gamma2: float | None = None
    b_sampler: Callable[[np.random.Generator], float] | None = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown velocity kind {self.kind!r}")
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 1):
            raise ValueError(f"dimension must be a positive integer, got {self.d!r}")
        if self.kind == "spherically_symmetric":
            g1, g2 = self.gamma1, self.gamma2
            if g1 is None or g2 is None:
                raise ValueError("spherically_symmetric requires gamma1 and gamma2")
            if not (np.isfinite(g1) and np.isfinite(g2)) or g1 <= 0 or g2 <= 0:
                raise ValueError("gamma1, gamma2 must be finite and positive")
            if g2 < g1**2 * (1 - 1e-12):
                raise ValueError("gamma2 < gamma1^2 is impossible for a radial law")
            object.__setattr__(self, "m2", g1 / self.d)
        if not (np.isfinite(self.m2) and self.m2 > 0):
            raise ValueError(f"m2 must be finite and positive, got {self.m2!r}")

    @property
    def sphere_radius(self) -> float:
        """Radius making the declared m2 exact for the hypersphere law."""
        return float(np.sqrt(self.d * self.m2))


def moments(model: VelocityModel) -> tuple[float, float, float]:
    """Closed-form (m2, m4, m22) for the model's kind."""
    d, m2 = model.d, model.m2
    if model.kind == "gaussian":
        return m2, m2**2, m2**2
    if model.kind == "rademacher":
        return m2, m2**2 / 3.0, m2**2
    if model.kind == "sphere_uniform":
        # radius r: E[v1^4] = 3 r^4 / (d(d+2)), E[v1^2 v2^2] = r^4 / (d(d+2))
        r4 = (d * m2) ** 2
        return m2, r4 / (d * (d + 2)), r4 / (d * (d + 2))
    # spherically symmetric: Lemma-of-radial-laws closed forms in (gamma1, gamma2)
    g1, g2 = model.gamma1, model.gamma2
    return g1 / d, g2 / (d * (d + 2)), g2 / (d * (d + 2))


def _unit_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        z = rng.standard_normal(d)
        n = np.linalg.norm(z)
        if n > 0.0:
            return z / n


def sample_velocity(model: VelocityModel, rng: np.random.Generator) -> np.ndarray:
    """One draw from the velocity law (length-d vector)."""
    d = model.d
    if model.kind == "gaussian":
        return np.sqrt(model.m2) * rng.standard_normal(d)
    if model.kind == "rademacher":
        return np.sqrt(model.m2) * (2.0 * rng.integers(0, 2, size=d) - 1.0)
    if model.kind == "sphere_uniform":
        return model.sphere_radius * _unit_sphere(d, rng)
    if model.b_sampler is None:
        raise ValueError("spherically_symmetric model has no b_sampler to draw from")
    b = float(model.b_sampler(rng))
    if b < 0:
        raise ValueError(f"radial sampler returned negative value {b}")
    return np.sqrt(b) * _unit_sphere(d, rng)


def sample_velocities(model: VelocityModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """(n, d) array of independent draws; vectorized where the kind allows."""
    d = model.d
    if model.kind == "gaussian":
        return np.sqrt(model.m2) * rng.standard_normal((n, d))
    if model.kind == "rademacher":
        return np.sqrt(model.m2) * (2.0 * rng.integers(0, 2, size=(n, d)) - 1.0)
    if model.kind == "sphere_uniform":
        z = rng.standard_normal((n, d))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        bad = norms[:, 0] == 0.0
        for i in np.flatnonzero(bad):
            z[i] = _unit_sphere(d, rng)
            norms[i] = 1.0
        return model.sphere_radius * z / norms
    return np.stack([sample_velocity(model, rng) for _ in range(n)])


def quadratic_form_l2(model: VelocityModel, M: np.ndarray, c: float) -> float:
    """Squared nu-norm of v^T M v - c for symmetric M.

    Equals ``3(m4 - m22) Tr(M*M) + (m2 Tr(M) - c)^2 + 2 m22 Tr(M^2)`` where
    ``*`` is the entrywise product; valid for laws with sign-flip symmetric
    coordinates and vanishing mixed fourth moments (all built-in kinds).
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (model.d, model.d):
        raise ValueError(f"M must be {model.d}x{model.d}, got {M.shape}")
    scale = np.linalg.norm(M)
    if np.linalg.norm(M - M.T) > 1e-12 * max(scale, 1e-300):
        raise ValueError("M must be symmetric (1e-12 relative tolerance)")
    m2, m4, m22 = moments(model)
    tr_hadamard = float(np.sum(np.diag(M) ** 2))
    tr_m2 = float(np.sum(M * M))  # Tr(M^2) for symmetric M
    return (
        3.0 * (m4 - m22) * tr_hadamard
        + (m2 * float(np.trace(M)) - c) ** 2
        + 2.0 * m22 * tr_m2
    )


def mb_factor(model: VelocityModel) -> float:
    """sqrt(2 m22 + 3 (m4 - m22)_+) / m2, the bounce-term moment ratio."""
    m2, m4, m22 = moments(model)
    return float(np.sqrt(2.0 * m22 + 3.0 * max(m4 - m22, 0.0)) / m2)
