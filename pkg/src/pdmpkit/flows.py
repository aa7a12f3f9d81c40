"""Deterministic dynamics followed between jump events."""

from __future__ import annotations

import numpy as np


class EnergyDriftError(RuntimeError):
    """Leapfrog Hamiltonian drifted beyond tolerance; the step is too coarse."""


class LinearFlow:
    """Straight-line motion x(t) = x + t v with frozen velocity."""

    kind = "linear"
    linear = True

    def __init__(self, torus: bool = False):
        self.torus = torus

    def advance(self, x, v, dt):
        x = x + dt * v
        if self.torus:
            x = np.mod(x, 1.0)
        return x, v

    def positions_at(self, x, v, taus):
        X = x[None, :] + np.asarray(taus)[:, None] * v[None, :]
        if self.torus:
            X = np.mod(X, 1.0)
        return X


class QuadraticFlow:
    """Exact Hamiltonian motion for a quadratic potential x' P x / 2.

    Solves xdot = v, vdot = -m2 P x by harmonic rotation in the eigenbasis of
    P with per-mode frequency sqrt(m2 * eig); zero modes advance linearly.
    Conserves H = m2 U(x) + |v|^2 / 2 to roundoff.
    """

    kind = "quadratic"
    linear = False

    def __init__(self, precision, m2: float, torus: bool = False):
        P = np.asarray(precision, dtype=float)
        eigs, Q = np.linalg.eigh(P)
        eigs = np.where(np.abs(eigs) < 1e-14, 0.0, eigs)
        if np.any(eigs < 0):
            raise ValueError("precision must be positive semidefinite")
        if torus and np.any(eigs > 0):
            raise ValueError("quadratic flow on the torus requires a flat potential")
        self.omega = np.sqrt(m2 * eigs)
        self.Q = Q
        self.torus = torus

    def advance(self, x, v, dt):
        y = self.Q.T @ x
        w = self.Q.T @ v
        om = self.omega
        osc = om > 0
        c = np.where(osc, np.cos(om * dt), 1.0)
        s = np.sin(om * dt)
        y2 = np.where(osc, y * c + np.divide(w * s, om, where=osc, out=np.zeros_like(w)),
                      y + dt * w)
        w2 = np.where(osc, -y * om * s + w * c, w)
        x2, v2 = self.Q @ y2, self.Q @ w2
        if self.torus:
            x2 = np.mod(x2, 1.0)
        return x2, v2

    def positions_at(self, x, v, taus):
        taus = np.asarray(taus, dtype=float)
        y = self.Q.T @ x
        w = self.Q.T @ v
        om = self.omega
        osc = om > 0
        ot = taus[:, None] * om[None, :]
        c = np.where(osc[None, :], np.cos(ot), 1.0)
        s = np.sin(ot)
        inv = np.divide(1.0, om, where=osc, out=np.zeros_like(om))
        Y = np.where(osc[None, :], y[None, :] * c + w[None, :] * s * inv[None, :],
                     y[None, :] + taus[:, None] * w[None, :])
        X = Y @ self.Q.T
        if self.torus:
            X = np.mod(X, 1.0)
        return X


class LeapfrogFlow:
    """Fixed-step leapfrog for xdot = v, vdot = -m2 grad U(x).

    Discretization bias relative to the continuous-time process is a known
    deviation; an energy-drift guard aborts when the relative Hamiltonian
    error within a segment exceeds ``drift_tol``.
    """

    kind = "leapfrog"
    linear = False

    def __init__(self, target, m2: float, step: float, drift_tol: float = 1e-3,
                 torus: bool = False):
        if step <= 0:
            raise ValueError("leapfrog step must be positive")
        self.target = target
        self.m2 = m2
        self.step = step
        self.drift_tol = drift_tol
        self.torus = torus

    def _energy(self, x, v):
        return self.m2 * self.target.eval_U(x) + 0.5 * float(v @ v)

    def advance(self, x, v, dt):
        if dt <= 0:
            return x, v
        n = max(1, int(np.ceil(dt / self.step)))
        h = dt / n
        h0 = self._energy(x, v)
        x = x.copy()
        v = v - 0.5 * h * self.m2 * self.target.grad_U(x)
        for i in range(n):
            x = x + h * v
            if self.torus:
                x = np.mod(x, 1.0)
            g = self.m2 * self.target.grad_U(x)
            v = v - (h if i < n - 1 else 0.5 * h) * g
        drift = abs(self._energy(x, v) - h0) / max(abs(h0), 1e-12)
        if drift > self.drift_tol:
            raise EnergyDriftError(
                f"relative Hamiltonian drift {drift:.3e} exceeds {self.drift_tol:.1e}; "
                f"reduce the leapfrog step"
            )
        return x, v

    def positions_at(self, x, v, taus):
        out = np.empty((len(taus), len(x)))
        t_prev = 0.0
        for i, t in enumerate(np.asarray(taus, dtype=float)):
            x, v = self.advance(x, v, t - t_prev)
            out[i] = x
            t_prev = t
        return out


def make_flow(name: str, *, target=None, m2: float = 1.0, step: float | None = None,
              torus: bool = False):
    if name == "linear":
        return LinearFlow(torus=torus)
    if name == "quadratic":
        if target is None or target.precision is None:
            raise ValueError("quadratic flow needs a target with a precision matrix")
        return QuadraticFlow(target.precision, m2, torus=torus)
    if name == "leapfrog":
        if target is None or step is None:
            raise ValueError("leapfrog flow needs a target and a step")
        return LeapfrogFlow(target, m2, step, torus=torus)
    raise ValueError(f"unknown flow {name!r}")
