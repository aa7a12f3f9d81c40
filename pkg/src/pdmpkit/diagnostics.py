"""Estimates from event skeletons and their comparison against certificates.

Path averages are computed segment-exactly for polynomial observables on
linear-flow skeletons (fixed-order Gauss-Legendre nodes, exact through
degree 5 in segment time) or by step-quadrature otherwise. The integrated
autocorrelation time is reported in process-time units: the asymptotic
variance of a horizon-T time average is tau * Var(f) / T, so the certificate
reads tau <= 2A/alpha directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import BoundReport
from .skeleton import EventSkeleton

# 3-point Gauss-Legendre on [0, 1]
_GL_NODES = np.array([0.5 - np.sqrt(15.0) / 10.0, 0.5, 0.5 + np.sqrt(15.0) / 10.0])
_GL_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


class ZeroVariance(ValueError):
    """The series is constant; correlation quantities are undefined."""


class InsufficientSignal(ValueError):
    """Too few autocovariance lags clear the noise floor to fit a decay rate."""


@dataclass(frozen=True)
class PathAverage:
    value: float
    exact: bool
    horizon: float
    burn_in: float


def default_burn_in(sk: EventSkeleton) -> float:
    """First 10% of the horizon unless the start was an exact stationary draw."""
    return 0.0 if sk.meta.get("init") == "stationary" else 0.1 * sk.horizon


def path_average(
    sk: EventSkeleton,
    f,
    mode: str = "exact",
    degree: int = 4,
    step: float = 1e-2,
    burn_in: float | None = None,
) -> PathAverage:
    """Time average (1/T) integral of f(position) along the trajectory.

    ``exact`` mode integrates polynomials of total degree <= 4 segment-wise
    in closed form; it requires straight-line flow on euclidean domains.
    ``quadrature`` mode samples each segment at the given step (trapezoid)
    and works for every flow kind.
    """
    if burn_in is None:
        burn_in = default_burn_in(sk)
    t_total = sk.horizon - burn_in
    if t_total <= 0:
        raise ValueError("burn-in swallows the whole horizon")
    if mode == "exact":
        if not getattr(sk.flow, "linear", False):
            raise ValueError("exact mode needs straight-line flow segments")
        if getattr(sk.flow, "torus", False):
            raise ValueError("exact mode is not defined on the torus (wraps)")
        if degree > 4:
            raise ValueError("exact mode covers polynomial degree <= 4")
    elif mode != "quadrature":
        raise ValueError("mode must be 'exact' or 'quadrature'")

    acc = 0.0
    for t0, dt, x0, v0 in sk.segments():
        t1 = t0 + dt
        if t1 <= burn_in:
            continue
        lo = max(burn_in - t0, 0.0)
        length = t1 - max(t0, burn_in)
        if mode == "exact":
            taus = lo + _GL_NODES * length
            vals = [f(x0 + tau * v0) for tau in taus]
            acc += length * float(_GL_WEIGHTS @ vals)
        else:
            n = max(1, int(np.ceil(length / step)))
            taus = lo + np.linspace(0.0, length, n + 1)
            X = sk.flow.positions_at(x0, v0, taus)
            vals = np.array([f(xx) for xx in X])
            acc += float(np.trapezoid(vals, dx=length / n))
    return PathAverage(value=acc / t_total, exact=(mode == "exact"),
                       horizon=sk.horizon, burn_in=burn_in)


def discretize(sk: EventSkeleton, dt: float, burn_in: float | None = None,
               velocities: bool = False):
    """States at times burn_in, burn_in + dt, ... reconstructed exactly.

    Returns (times, positions) or (times, positions, velocities); linear
    segments interpolate, other flows advance from the segment start.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if burn_in is None:
        burn_in = default_burn_in(sk)
    times = np.arange(burn_in, sk.horizon + 1e-12 * max(sk.horizon, 1.0), dt)
    d = sk.d
    X = np.empty((len(times), d))
    V = np.empty((len(times), d)) if velocities else None
    ev_times = sk.times
    idx = np.searchsorted(ev_times, times, side="right") - 1
    idx = np.clip(idx, 0, sk.n_events - 1)
    # group sample times by their containing segment for vectorized flows
    boundaries = np.flatnonzero(np.diff(idx)) + 1
    for start, stop in zip(
        np.concatenate([[0], boundaries]),
        np.concatenate([boundaries, [len(times)]]),
    ):
        if start == stop:
            continue
        seg = idx[start]
        taus = times[start:stop] - ev_times[seg]
        x0, v0 = sk.positions[seg], sk.velocities[seg]
        X[start:stop] = sk.flow.positions_at(x0, v0, taus)
        if V is not None:
            if getattr(sk.flow, "linear", False):
                V[start:stop] = v0
            else:
                for j, tau in enumerate(taus):
                    _, V[start + j] = sk.flow.advance(x0, v0, tau)
    if V is None:
        return times, X
    return times, X, V


def linear_moment_averages(sk: EventSkeleton, burn_in: float | None = None):
    """Exact time-average of x and x**2 per coordinate on linear-flow skeletons.

    Segment integrals of a straight line are closed form, so the whole
    computation is three vectorized passes over the event table.
    """
    if not getattr(sk.flow, "linear", False) or getattr(sk.flow, "torus", False):
        raise ValueError("exact moment averages need euclidean straight-line flow")
    if burn_in is None:
        burn_in = default_burn_in(sk)
    t0 = sk.times[:-1]
    t1 = sk.times[1:]
    lo = np.clip(burn_in - t0, 0.0, t1 - t0)
    X0 = sk.positions[:-1] + lo[:, None] * sk.velocities[:-1]
    V0 = sk.velocities[:-1]
    dts = (t1 - t0) - lo
    first = (
        dts[:, None] * X0 + 0.5 * (dts**2)[:, None] * V0
    ).sum(axis=0)
    second = (
        dts[:, None] * X0**2
        + (dts**2)[:, None] * X0 * V0
        + (dts**3)[:, None] * V0**2 / 3.0
    ).sum(axis=0)
    span = sk.horizon - burn_in
    return first / span, second / span


@dataclass(frozen=True)
class IactEstimate:
    tau_hat: float
    stderr: float
    method: str
    n_batches: int
    dt: float


def iact_batch_means(series, dt: float) -> IactEstimate:
    """Batch-means integrated autocorrelation time in process-time units.

    With N samples at spacing dt split into ~sqrt(N) batches,
    tau_hat = Var(batch means) * batch_length_in_time / Var(series);
    i.i.d. samples give tau_hat ~ dt. Standard error reflects the
    chi-squared spread of the batch-mean variance.
    """
    y = np.asarray(series, dtype=float)
    n = y.size
    if n < 400:
        raise ValueError(f"need at least 400 samples, got {n}")
    var = float(np.var(y))
    if var == 0.0:
        raise ZeroVariance("constant series has no autocorrelation time")
    n_batches = int(np.floor(np.sqrt(n)))
    batch = n // n_batches
    trimmed = y[: n_batches * batch].reshape(n_batches, batch)
    bm = trimmed.mean(axis=1)
    var_bm = float(np.var(bm, ddof=1))
    tau = var_bm * batch * dt / var
    stderr = tau * np.sqrt(2.0 / (n_batches - 1))
    return IactEstimate(float(tau), float(stderr), "batch_means", n_batches, dt)


def autocovariance(series, max_lag: int) -> np.ndarray:
    y = np.asarray(series, dtype=float)
    y = y - y.mean()
    n = y.size
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        out[k] = float(y[k:] @ y[: n - k]) / n
    return out


def decay_rate_fit(series, dt: float, max_lag: int) -> float:
    """Exponential decay rate of the autocovariance, via log least squares.

    Only lags whose autocovariance clears 3 standard errors of the estimator
    noise enter the fit; fewer than 5 usable lags raises InsufficientSignal.
    """
    y = np.asarray(series, dtype=float)
    acov = autocovariance(y, max_lag)
    gamma0 = acov[0]
    if gamma0 <= 0:
        raise ZeroVariance("constant series")
    noise = 3.0 * gamma0 / np.sqrt(y.size)
    lags = np.arange(1, max_lag + 1)
    usable = acov[1:] > noise
    if int(np.sum(usable)) < 5:
        raise InsufficientSignal(
            f"only {int(np.sum(usable))} lags clear the noise floor; need 5"
        )
    ts = lags[usable] * dt
    logs = np.log(acov[1:][usable])
    A = np.vstack([ts, np.ones_like(ts)]).T
    slope, _ = np.linalg.lstsq(A, logs, rcond=None)[0]
    return float(-slope)


@dataclass(frozen=True)
class BoundCheck:
    tau_hat: float
    stderr: float
    bound: float
    ratio: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "tau_hat": self.tau_hat,
            "stderr": self.stderr,
            "bound": self.bound,
            "ratio": self.ratio,
            "pass": self.passed,
        }


def compare_to_bound(iact: IactEstimate, report: BoundReport) -> BoundCheck:
    """One-sided check of the empirical IACT against the certificate 2A/alpha.

    The certificate is an upper bound, not an equality; failure flags either
    a sampler bug or an invalid user-supplied constant.
    """
    ceiling = report.iact_bound
    ok = iact.tau_hat <= ceiling + 3.0 * iact.stderr
    return BoundCheck(
        tau_hat=iact.tau_hat,
        stderr=iact.stderr,
        bound=ceiling,
        ratio=iact.tau_hat / ceiling,
        passed=bool(ok),
    )


def skeleton_summary(sk: EventSkeleton, sample_dt: float = 0.1) -> dict:
    """Event counts plus per-coordinate time-average first and second moments."""
    linear = getattr(sk.flow, "linear", False) and not getattr(sk.flow, "torus", False)
    if linear:
        means, seconds = linear_moment_averages(sk)
        exact = True
    else:
        _, X = discretize(sk, min(sample_dt, sk.horizon / 400.0))
        means, seconds = X.mean(axis=0), (X**2).mean(axis=0)
        exact = False
    return {
        "horizon": sk.horizon,
        "event_counts": sk.event_counts(),
        "time_average_mean": [float(v) for v in means],
        "time_average_second_moment": [float(v) for v in seconds],
        "moments_exact": exact,
        "meta": {k: v for k, v in sk.meta.items() if isinstance(v, (str, int, float, bool))},
    }
