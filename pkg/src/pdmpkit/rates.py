"""Event-rate functions with machine-checkable certificates.

A rate function phi maps s = v . F_k(x) to a jump intensity. Validity
requires phi(s) - phi(-s) = s together with the two-sided envelope
|s| <= phi(s) + phi(-s) <= c_phi * sqrt(m2) + C_phi * |s|; (C_phi, c_phi)
is the certificate consumed by the bound calculator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class RateFunction:
    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    C_phi: float
    c_phi: float
    m2: float  # the m2 the certificate was issued for

    def __call__(self, s):
        return self.eval(s)


def phi_canonical() -> RateFunction:
    """phi(s) = max(s, 0); certificate (C_phi, c_phi) = (1, 0) for any m2."""
    return RateFunction("canonical", lambda s: np.maximum(s, 0.0), 1.0, 0.0, 1.0)


def phi_softplus(m2: float) -> RateFunction:
    """Smooth rate phi(s) = log(1 + e^s), evaluated overflow-safely.

    Since log(1 + e^s) <= log 2 + (s)_+, the envelope holds with C_phi = 1
    and c_phi = 2 log(2) / sqrt(m2); the certificate is per-m2 because c_phi
    is paired with sqrt(m2) in the envelope.
    """
    if m2 <= 0:
        raise ValueError("m2 must be positive")
    return RateFunction(
        "softplus",
        lambda s: np.logaddexp(0.0, s),
        1.0,
        2.0 * np.log(2.0) / np.sqrt(m2),
        float(m2),
    )


RATE_FAMILIES = {"canonical": phi_canonical, "softplus": phi_softplus}


def make_rate(name: str, m2: float) -> RateFunction:
    if name == "canonical":
        return phi_canonical()
    if name == "softplus":
        return phi_softplus(m2)
    raise ValueError(f"unknown rate family {name!r}; choose from {sorted(RATE_FAMILIES)}")


@dataclass(frozen=True)
class RateCheckReport:
    max_identity_violation: float   # |phi(s) - phi(-s) - s|
    max_lower_violation: float      # (|s| - phi(s) - phi(-s))_+
    max_upper_violation: float      # (phi(s) + phi(-s) - c sqrt(m2) - C|s|)_+
    n_points: int

    @property
    def passed(self) -> bool:
        tol = 1e-10
        return (
            self.max_identity_violation <= tol
            and self.max_lower_violation <= tol
            and self.max_upper_violation <= tol
        )


def verify_rate(rate: RateFunction, m2: float, grid) -> RateCheckReport:
    """Grid check of the three rate-certificate inequalities."""
    s = np.asarray(grid, dtype=float)
    if s.size == 0:
        raise ValueError("grid must be non-empty")
    up, down = rate(s), rate(-s)
    even = up + down
    return RateCheckReport(
        max_identity_violation=float(np.max(np.abs(up - down - s))),
        max_lower_violation=float(np.max(np.abs(s) - even, initial=0.0)),
        max_upper_violation=float(
            np.max(even - rate.c_phi * np.sqrt(m2) - rate.C_phi * np.abs(s), initial=0.0)
        ),
        n_points=int(s.size),
    )
