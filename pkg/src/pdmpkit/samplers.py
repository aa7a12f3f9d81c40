"""Event-driven simulation of the three jump-process samplers.

zigzag  -- d coordinate bounce channels, straight-line flow, coordinate flips
bps     -- one bounce channel reflecting the velocity across grad U
rhmc    -- no bounce channels; Hamiltonian flow between full refreshments

Event times use exact closed-form inversion whenever the channel rate along a
segment is (affine)_+ (canonical rate, quadratic potential, linear flow) and
thinning against an affine dominating bound otherwise. The refreshment clock
always runs at sqrt(m2) * lambda_ref.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flows import LeapfrogFlow, LinearFlow, QuadraticFlow
from .rates import RateFunction
from .skeleton import (
    KIND_BOUNCE,
    KIND_END,
    KIND_INIT,
    KIND_REFRESH_COORD,
    KIND_REFRESH_FULL,
    EventSkeleton,
)
from .targets import TargetModel
from .thinning import (
    PiecewiseLinearBound,
    default_rate_bound,
    first_arrival_affine_plus,
    next_event_time,
    zigzag_total_bound,
)
from .velocity import VelocityModel, sample_velocity

SAMPLERS = ("zigzag", "bps", "rhmc")


def reflect(v: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Reflect v across the hyperplane orthogonal to F; identity when F = 0."""
    nrm = np.linalg.norm(F)
    if nrm == 0.0:
        return v.copy()
    n = F / nrm
    return v - 2.0 * float(v @ n) * n


def flip_coordinate(v: np.ndarray, k: int) -> np.ndarray:
    """Negate coordinate k (0-based) of the velocity."""
    if not 0 <= k < len(v):
        raise IndexError(f"coordinate {k} out of range for dimension {len(v)}")
    out = v.copy()
    out[k] = -out[k]
    return out


def refresh_full(model: VelocityModel, rng: np.random.Generator) -> np.ndarray:
    """Fresh velocity draw from the invariant marginal."""
    return sample_velocity(model, rng)


@dataclass
class SamplerConfig:
    sampler: str
    target: TargetModel
    velocity: VelocityModel
    rate: RateFunction
    lambda_ref: float = 1.0
    lambda_ref_coords: np.ndarray | None = None  # zigzag coordinate-flip refresh
    horizon: float = 1000.0
    lookahead: float = 1.0
    event_time_mode: str = "auto"  # auto | exact | thinning
    rhmc_flow: str = "exact_quadratic"  # exact_quadratic | leapfrog
    leapfrog_step: float | None = None
    init: str = "auto"  # auto | stationary | minimizer
    max_events: int = 50_000_000
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.lambda_ref < 0:
            raise ValueError("lambda_ref must be nonnegative")
        if self.lookahead <= 0:
            raise ValueError("lookahead must be positive")
        if self.event_time_mode not in ("auto", "exact", "thinning"):
            raise ValueError("event_time_mode must be auto, exact or thinning")
        if self.target.d != self.velocity.d:
            raise ValueError("target and velocity dimensions disagree")
        if self.lambda_ref_coords is not None:
            if self.sampler != "zigzag":
                raise ValueError("per-coordinate refreshment is a zigzag feature")
            arr = np.asarray(self.lambda_ref_coords, dtype=float)
            if arr.shape != (self.target.d,) or np.any(arr < 0):
                raise ValueError("lambda_ref_coords must be d nonnegative rates")
            self.lambda_ref_coords = arr
        if self.sampler == "bps" and self.velocity.kind not in (
            "gaussian", "sphere_uniform", "spherically_symmetric",
        ):
            raise ValueError(
                "bps needs a rotation-invariant velocity law "
                "(gaussian, sphere_uniform or spherically_symmetric)"
            )


def initial_state(cfg: SamplerConfig, rng: np.random.Generator):
    """Exact stationary draw where available, else the potential's minimizer."""
    target = cfg.target
    mode = cfg.init
    if mode == "auto":
        mode = "stationary" if (target.is_quadratic or target.domain == "torus") else "minimizer"
    if mode == "stationary":
        if target.name == "zero_torus" or (
            target.domain == "torus" and target.precision is not None
            and not np.any(target.precision)
        ):
            x = rng.uniform(0.0, 1.0, size=target.d)
        elif target.is_quadratic and np.any(target.precision):
            chol = np.linalg.cholesky(target.precision)
            x = np.linalg.solve(chol.T, rng.standard_normal(target.d))
        else:
            raise ValueError(
                f"no exact stationary draw for target {target.name!r}; use init='minimizer'"
            )
    elif mode == "minimizer":
        x = np.zeros(target.d)
    else:
        raise ValueError(f"unknown init mode {cfg.init!r}")
    v = sample_velocity(cfg.velocity, rng)
    return x, v, mode


class _Recorder:
    def __init__(self, x0, v0):
        self.times = [0.0]
        self.kinds = [KIND_INIT]
        self.channels = [-1]
        self.X = [x0.copy()]
        self.V = [v0.copy()]
        self.VB = [v0.copy()]

    def add(self, t, kind, k, x, v_before, v_after):
        self.times.append(t)
        self.kinds.append(kind)
        self.channels.append(k)
        self.X.append(x.copy())
        self.VB.append(v_before.copy())
        self.V.append(v_after.copy())

    def build(self, horizon, flow, meta) -> EventSkeleton:
        return EventSkeleton(
            horizon=horizon,
            times=np.array(self.times),
            kinds=np.array(self.kinds, dtype=np.int8),
            channels=np.array(self.channels, dtype=np.int32),
            positions=np.array(self.X),
            velocities=np.array(self.V),
            v_before=np.array(self.VB),
            flow=flow,
            meta=meta,
        )


def _exact_mode(cfg: SamplerConfig) -> bool:
    available = cfg.rate.name == "canonical" and cfg.target.is_quadratic
    if cfg.event_time_mode == "exact":
        if not available:
            raise ValueError(
                "exact event times need the canonical rate and a quadratic target"
            )
        return True
    if cfg.event_time_mode == "thinning":
        return False
    return available


def _bounce_candidate_exact(cfg, x, v, rng):
    """Closed-form per-channel first arrivals for (affine)_+ rates."""
    P = cfg.target.precision
    if cfg.sampler == "zigzag":
        a = v * (P @ x)
        b = v * (P @ v)
        e = rng.exponential(size=len(v))
        dts = np.array(
            [first_arrival_affine_plus(a[k], b[k], e[k]) for k in range(len(v))]
        )
        k = int(np.argmin(dts))  # ties resolve to the lowest channel index
        return float(dts[k]), k
    a = float(v @ (P @ x))
    b = float(v @ (P @ v))
    return first_arrival_affine_plus(a, b, rng.exponential()), 0


def _bounce_candidate_thinning(cfg, x, v, window, rng):
    """First bounce arrival within the window via thinning, or (inf, -1).

    Works through consecutive lookahead blocks, doubling the lookahead after
    each empty block; the dominating bound is re-anchored at the advanced
    position so it stays valid block by block.
    """
    target, rate, m2 = cfg.target, cfg.rate, cfg.velocity.m2
    torus = target.domain == "torus"
    zigzag = cfg.sampler == "zigzag"

    def position(tau):
        p = x + tau * v
        return np.mod(p, 1.0) if torus else p

    def total_rate_at(tau):
        g = target.grad_U(position(tau))
        if zigzag:
            return float(np.sum(rate(v * g)))
        return float(rate(float(v @ g)))

    offset = 0.0
    h = cfg.lookahead
    while offset < window:
        h_seg = min(h, window - offset)
        x_off = position(offset)
        if zigzag:
            bound = zigzag_total_bound(target, rate, m2, x_off, v, h_seg)
        else:
            bound = default_rate_bound(target, rate, m2, x_off, v, h_seg)
        dt_local, _ = next_event_time(
            lambda u: total_rate_at(offset + u), bound, rng
        )
        if dt_local is not None:
            tau = offset + dt_local
            if zigzag:
                rates = rate(v * target.grad_U(position(tau)))
                total = float(np.sum(rates))
                if total <= 0:
                    # accepted with probability rate/bound, so total > 0
                    raise RuntimeError("accepted a candidate with zero total rate")
                k = int(rng.choice(len(v), p=rates / total))
            else:
                k = 0
            return tau, k
        offset += h_seg
        h *= 2.0
    return np.inf, -1


def _simulate_jump_sampler(cfg: SamplerConfig, rng: np.random.Generator) -> EventSkeleton:
    target, vel = cfg.target, cfg.velocity
    torus = target.domain == "torus"
    flow = LinearFlow(torus=torus)
    sqrt_m2 = float(np.sqrt(vel.m2))
    use_exact = _exact_mode(cfg)

    coord_refresh = cfg.sampler == "zigzag" and cfg.lambda_ref_coords is not None
    if coord_refresh:
        ref_rates = sqrt_m2 * cfg.lambda_ref_coords
        ref_total = float(np.sum(ref_rates))
    else:
        ref_total = sqrt_m2 * cfg.lambda_ref

    x, v, init_mode = initial_state(cfg, rng)
    rec = _Recorder(x, v)
    t = 0.0
    T = cfg.horizon
    n = 0
    while t < T:
        n += 1
        if n > cfg.max_events:
            raise RuntimeError(f"exceeded max_events={cfg.max_events}")
        remaining = T - t
        dt_ref = rng.exponential() / ref_total if ref_total > 0 else np.inf
        window = min(remaining, dt_ref)
        if use_exact:
            dt_b, k_b = _bounce_candidate_exact(cfg, x, v, rng)
            if dt_b > window:
                dt_b = np.inf
        else:
            dt_b, k_b = _bounce_candidate_thinning(cfg, x, v, window, rng)

        dt = min(remaining, dt_ref, dt_b)
        x, _ = flow.advance(x, v, dt)
        t += dt
        if not np.all(np.isfinite(x)):
            raise RuntimeError(f"non-finite position at t={t}")
        if dt == remaining:
            rec.add(T, KIND_END, -1, x, v, v)
            break
        v_before = v
        if dt == dt_b:
            if cfg.sampler == "zigzag":
                v = flip_coordinate(v, k_b)
            else:
                v = reflect(v, target.grad_U(x))
            rec.add(t, KIND_BOUNCE, k_b, x, v_before, v)
        else:
            if coord_refresh:
                k = int(rng.choice(target.d, p=ref_rates / ref_total))
                v = flip_coordinate(v, k)
                rec.add(t, KIND_REFRESH_COORD, k, x, v_before, v)
            else:
                v = refresh_full(vel, rng)
                rec.add(t, KIND_REFRESH_FULL, -1, x, v_before, v)

    meta = {
        "sampler": cfg.sampler,
        "init": init_mode,
        "event_times": "exact" if use_exact else "thinning",
        "generalized_zigzag": cfg.sampler == "zigzag" and vel.kind != "rademacher",
    }
    meta.update(cfg.meta)
    return rec.build(T, flow, meta)


def _simulate_rhmc(cfg: SamplerConfig, rng: np.random.Generator) -> EventSkeleton:
    target, vel = cfg.target, cfg.velocity
    if vel.kind != "gaussian":
        raise ValueError("rhmc requires a gaussian velocity model")
    torus = target.domain == "torus"
    if cfg.rhmc_flow == "exact_quadratic":
        if not target.is_quadratic:
            raise ValueError(
                "exact rhmc flow needs a quadratic target; use rhmc_flow='leapfrog'"
            )
        flow = QuadraticFlow(target.precision, vel.m2, torus=torus)
    elif cfg.rhmc_flow == "leapfrog":
        step = cfg.leapfrog_step
        if step is None:
            L = target.constants.L
            if L is None or L <= 0:
                raise ValueError("leapfrog needs leapfrog_step or a positive Lipschitz constant")
            step = 0.01 / np.sqrt(vel.m2 * L)
        flow = LeapfrogFlow(target, vel.m2, step, torus=torus)
    else:
        raise ValueError(f"unknown rhmc_flow {cfg.rhmc_flow!r}")

    ref_total = float(np.sqrt(vel.m2)) * cfg.lambda_ref
    x, v, init_mode = initial_state(cfg, rng)
    rec = _Recorder(x, v)
    t, T, n = 0.0, cfg.horizon, 0
    while t < T:
        n += 1
        if n > cfg.max_events:
            raise RuntimeError(f"exceeded max_events={cfg.max_events}")
        remaining = T - t
        dt_ref = rng.exponential() / ref_total if ref_total > 0 else np.inf
        if dt_ref >= remaining:
            x, v = flow.advance(x, v, remaining)
            rec.add(T, KIND_END, -1, x, v, v)
            break
        x, v = flow.advance(x, v, dt_ref)
        t += dt_ref
        if not np.all(np.isfinite(x)):
            raise RuntimeError(f"non-finite position at t={t}")
        v_before = v
        v = refresh_full(vel, rng)
        rec.add(t, KIND_REFRESH_FULL, -1, x, v_before, v)

    meta = {"sampler": "rhmc", "init": init_mode, "flow": flow.kind}
    meta.update(cfg.meta)
    return rec.build(T, flow, meta)


def first_bounce_time(cfg: SamplerConfig, x, v, rng: np.random.Generator,
                      window: float = 1e6) -> float:
    """Waiting time to the first bounce from a fixed state (diagnostic).

    Uses whichever event-time route the config selects, so the thinning and
    exact-inversion paths can be compared on identical laws.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if _exact_mode(cfg):
        dt, _ = _bounce_candidate_exact(cfg, x, v, rng)
        return float(dt)
    dt, _ = _bounce_candidate_thinning(cfg, x, v, window, rng)
    return float(dt)


def simulate(cfg: SamplerConfig, rng: np.random.Generator | None = None,
             seed: int | None = None) -> EventSkeleton:
    """Run one trajectory and return its event skeleton.

    Replay is deterministic given (config, seed); independent replicas should
    derive their generators from spawned seed sequences.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if cfg.sampler == "rhmc":
        return _simulate_rhmc(cfg, rng)
    return _simulate_jump_sampler(cfg, rng)


def run_replicas(cfg: SamplerConfig, replicas: int, seed: int) -> list[EventSkeleton]:
    """Sequential replicas with independent spawned rng streams."""
    seqs = np.random.SeedSequence(seed).spawn(replicas)
    out = []
    for i, ss in enumerate(seqs):
        sk = simulate(cfg, rng=np.random.default_rng(ss))
        sk.meta["replica"] = i
        out.append(sk)
    return out
