"""Poisson event times: closed-form inversion and thinning.

Event times are first arrivals of an inhomogeneous Poisson process along the
current deterministic segment. Two routes:

* exact inversion when the rate is (a + b t)_+ in segment time,
* thinning against a piecewise-linear dominating bound, with closed-form
  inversion of the bound's integrated intensity for candidate draws.

A candidate whose true rate exceeds the claimed bound aborts the run: silent
acceptance would corrupt the invariant law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BoundViolation(RuntimeError):
    """Evaluated rate exceeded its claimed dominating bound."""


class MissingLipschitz(ValueError):
    """No gradient Lipschitz constant available to build a thinning bound."""


def first_arrival_affine_plus(a: float, b: float, e: float) -> float:
    """First arrival time of a Poisson process with intensity (a + b t)_+.

    ``e`` is a unit-exponential draw; returns ``inf`` when the total integrated
    intensity never reaches ``e`` (rate decays to zero before the event).
    """
    if e <= 0:
        return 0.0
    if b == 0.0:
        return e / a if a > 0 else np.inf
    if b > 0:
        if a >= 0:
            return (np.sqrt(a * a + 2.0 * b * e) - a) / b
        # rate is zero until -a/b, then grows linearly
        return -a / b + np.sqrt(2.0 * e / b)
    # b < 0: total mass a^2 / (2|b|) if a > 0, else 0
    if a <= 0:
        return np.inf
    disc = a * a + 2.0 * b * e
    if disc <= 0:
        return np.inf
    return (np.sqrt(disc) - a) / b


@dataclass(frozen=True)
class PiecewiseLinearBound:
    """Nonnegative piecewise-linear function on [0, horizon].

    Defined by breakpoints and values, linear in between; evaluation and
    inversion of the integrated intensity are closed form per piece.
    """

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or b.size < 2 or v.shape != b.shape:
            raise ValueError("breaks and values must be 1-d arrays of equal length >= 2")
        if not np.all(np.diff(b) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if b[0] != 0.0:
            raise ValueError("bound must start at t = 0")
        if np.any(v < 0):
            raise ValueError("bound values must be nonnegative")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def affine(cls, a: float, b: float, horizon: float) -> "PiecewiseLinearBound":
        v0, v1 = a, a + b * horizon
        if min(v0, v1) < 0:
            raise ValueError("affine bound dips below zero on the horizon")
        return cls(np.array([0.0, horizon]), np.array([v0, v1]))

    @property
    def horizon(self) -> float:
        return float(self.breaks[-1])

    def at(self, t: float) -> float:
        return float(np.interp(t, self.breaks, self.values))

    def integral_to(self, t: float) -> float:
        """Integrated intensity on [0, t] (exact trapezoid on linear pieces)."""
        b, v = self.breaks, self.values
        t = min(max(t, 0.0), self.horizon)
        full = np.searchsorted(b, t) - 1
        full = max(full, 0)
        total = float(np.trapezoid(v[: full + 1], b[: full + 1])) if full > 0 else 0.0
        dt = t - b[full]
        if dt > 0:
            total += 0.5 * (v[full] + self.at(t)) * dt
        return total

    def invert_from(self, t0: float, e: float) -> float | None:
        """Earliest t > t0 with integral over [t0, t] equal to e, or None."""
        b, v = self.breaks, self.values
        rem = e
        t_cur = max(t0, 0.0)
        i = max(int(np.searchsorted(b, t_cur, side="right")) - 1, 0)
        while i < len(b) - 1:
            seg_end = b[i + 1]
            a0 = self.at(t_cur)
            slope = (v[i + 1] - v[i]) / (b[i + 1] - b[i])
            seg_len = seg_end - t_cur
            seg_mass = 0.5 * (a0 + self.at(seg_end)) * seg_len
            if rem <= seg_mass:
                u = _invert_affine_mass(a0, slope, rem, seg_len)
                return t_cur + u
            rem -= seg_mass
            t_cur = seg_end
            i += 1
        return None


def _invert_affine_mass(a: float, b: float, e: float, seg_len: float) -> float:
    # solve a u + b u^2 / 2 = e for u in [0, seg_len]; caller guarantees a root
    if e <= 0:
        return 0.0
    if abs(b) < 1e-300:
        return min(e / a, seg_len) if a > 0 else seg_len
    disc = a * a + 2.0 * b * e
    if disc < 0:
        return seg_len
    u = (np.sqrt(disc) - a) / b
    return float(min(max(u, 0.0), seg_len))


@dataclass
class ThinningDiagnostics:
    n_candidates: int = 0
    n_rejected: int = 0


def next_event_time(
    rate,
    bound: PiecewiseLinearBound,
    rng: np.random.Generator,
    rel_tol: float = 1e-9,
) -> tuple[float | None, ThinningDiagnostics]:
    """First arrival on [0, horizon] of a process with intensity ``rate``.

    Candidates come from the dominating ``bound`` by inversion of its
    integrated intensity and are accepted with probability rate/bound;
    rejected candidates restart the clock from the candidate time. Returns
    ``(None, diag)`` when no arrival occurs within the bound's horizon.

    Raises ``BoundViolation`` if an evaluated rate exceeds the claimed bound
    by more than ``rel_tol`` relative.
    """
    diag = ThinningDiagnostics()
    t_cur = 0.0
    while True:
        t_cand = bound.invert_from(t_cur, rng.exponential())
        if t_cand is None:
            return None, diag
        diag.n_candidates += 1
        r = float(rate(t_cand))
        bv = bound.at(t_cand)
        if r > bv * (1.0 + rel_tol) + 1e-14:
            raise BoundViolation(
                f"rate {r!r} exceeds claimed bound {bv!r} at segment time {t_cand!r}"
            )
        if bv > 0 and rng.uniform() * bv <= r:
            return float(t_cand), diag
        diag.n_rejected += 1
        t_cur = t_cand


def default_rate_bound(
    target,
    rate,
    m2: float,
    x: np.ndarray,
    v: np.ndarray,
    h: float,
    channel: int | None = None,
) -> PiecewiseLinearBound:
    """Affine dominating bound for a jump-channel rate along x + t v.

    Uses the gradient Lipschitz constant: along the segment
    |grad U(x + t v)| <= |grad U(x)| + L |v| t, so by the rate envelope
    rate(t) <= c_phi sqrt(m2) + C_phi (|v . grad U(x)| + L |v|^2 t). With
    ``channel`` k the analogue for the single coordinate field is returned,
    with the row norm of the precision matrix replacing L when available.
    """
    L = target.constants.L
    if L is None:
        raise MissingLipschitz(
            f"target {target.name!r} declares no gradient Lipschitz constant; "
            f"supply a custom bound"
        )
    g = target.grad_U(x)
    base = rate.c_phi * np.sqrt(m2)
    vnorm = float(np.linalg.norm(v))
    if channel is None:
        a = base + rate.C_phi * abs(float(v @ g))
        b = rate.C_phi * L * vnorm**2
    else:
        row_l = L
        if target.precision is not None:
            row_l = float(np.linalg.norm(target.precision[channel]))
        a = base + rate.C_phi * abs(v[channel] * g[channel])
        b = rate.C_phi * abs(v[channel]) * row_l * vnorm
    return PiecewiseLinearBound.affine(float(a), float(b), h)


def zigzag_total_bound(
    target, rate, m2: float, x: np.ndarray, v: np.ndarray, h: float
) -> PiecewiseLinearBound:
    """Affine bound dominating the summed coordinate-channel rates."""
    L = target.constants.L
    if L is None:
        raise MissingLipschitz(
            f"target {target.name!r} declares no gradient Lipschitz constant; "
            f"supply a custom bound"
        )
    g = target.grad_U(x)
    d = len(v)
    vnorm = float(np.linalg.norm(v))
    if target.precision is not None:
        rows = np.linalg.norm(target.precision, axis=1)
    else:
        rows = np.full(d, L)
    a = d * rate.c_phi * np.sqrt(m2) + rate.C_phi * float(np.sum(np.abs(v * g)))
    b = rate.C_phi * vnorm * float(np.sum(np.abs(v) * rows))
    return PiecewiseLinearBound.affine(float(a), float(b), h)
