"""Event skeletons: the complete record of a PDMP trajectory.

Between events the path is deterministic, so (event times, states, kinds)
plus the flow reconstruct the trajectory exactly. Skeletons serialize to a
columnar CSV holding the post-event state per row.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

KIND_INIT = 0
KIND_BOUNCE = 1
KIND_REFRESH_FULL = 2
KIND_REFRESH_COORD = 3
KIND_END = 4

KIND_NAMES = {
    KIND_INIT: "init",
    KIND_BOUNCE: "bounce",
    KIND_REFRESH_FULL: "refresh_full",
    KIND_REFRESH_COORD: "refresh_coord",
    KIND_END: "end",
}
KIND_CODES = {v: k for k, v in KIND_NAMES.items()}


@dataclass
class EventSkeleton:
    horizon: float
    times: np.ndarray       # (n,) event times, strictly increasing, [0, horizon]
    kinds: np.ndarray       # (n,) kind codes
    channels: np.ndarray    # (n,) channel index, -1 where not applicable
    positions: np.ndarray   # (n, d) post-event positions
    velocities: np.ndarray  # (n, d) post-event velocities
    v_before: np.ndarray    # (n, d) pre-event velocities
    flow: object
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    @property
    def n_events(self) -> int:
        return len(self.times)

    def event_counts(self) -> dict:
        return {
            name: int(np.sum(self.kinds == code))
            for code, name in KIND_NAMES.items()
        }

    def segments(self):
        """Iterate (t_start, duration, x_start, v_start) over flow segments."""
        for i in range(self.n_events - 1):
            dt = self.times[i + 1] - self.times[i]
            if dt > 0:
                yield self.times[i], dt, self.positions[i], self.velocities[i]


@dataclass(frozen=True)
class SkeletonCheck:
    max_time_violation: float       # nonpositive time increments
    max_position_gap: float         # flow-advanced vs recorded pre-event position
    max_speed_change: float         # |v| change across bounce events
    max_event_position_shift: float # positions must not move at jump events
    finite: bool

    @property
    def passed(self) -> bool:
        return (
            self.finite
            and self.max_time_violation <= 0.0
            and self.max_position_gap <= 1e-8
            and self.max_speed_change <= 1e-9
            and self.max_event_position_shift == 0.0
        )


def validate_skeleton(sk: EventSkeleton) -> SkeletonCheck:
    """Structural invariants: ordered times, flow-consistent positions,
    norm-preserving bounces, positions frozen at events."""
    t = sk.times
    finite = bool(
        np.all(np.isfinite(t))
        and np.all(np.isfinite(sk.positions))
        and np.all(np.isfinite(sk.velocities))
    )
    time_viol = float(np.max(-np.diff(t), initial=-np.inf)) if len(t) > 1 else -np.inf
    if sk.kinds[0] != KIND_INIT or sk.kinds[-1] != KIND_END:
        finite = False
    if abs(t[-1] - sk.horizon) > 1e-9 * max(sk.horizon, 1.0):
        finite = False
    pos_gap = 0.0
    speed_change = 0.0
    for i in range(1, sk.n_events):
        dt = t[i] - t[i - 1]
        x_pred, v_pred = sk.flow.advance(sk.positions[i - 1], sk.velocities[i - 1], dt)
        pos_gap = max(pos_gap, float(np.max(np.abs(x_pred - sk.positions[i]))))
        pos_gap = max(pos_gap, float(np.max(np.abs(v_pred - sk.v_before[i]))))
        if sk.kinds[i] == KIND_BOUNCE:
            speed_change = max(
                speed_change,
                abs(
                    float(np.linalg.norm(sk.velocities[i]))
                    - float(np.linalg.norm(sk.v_before[i]))
                ),
            )
    # post-event positions ARE the pre-event positions by construction; the
    # columnar layout cannot represent a shift, recorded as exactly zero
    return SkeletonCheck(time_viol, pos_gap, speed_change, 0.0, finite)


def write_skeleton_csv(sk: EventSkeleton, path, meta_line: str = "") -> None:
    d = sk.d
    cols = ["t", "kind", "k"] + [f"x{i+1}" for i in range(d)] + [
        f"v{i+1}" for i in range(d)
    ]
    buf = io.StringIO()
    if meta_line:
        buf.write(f"# {meta_line}\n")
    buf.write(",".join(cols) + "\n")
    for i in range(sk.n_events):
        row = [repr(float(sk.times[i])), KIND_NAMES[int(sk.kinds[i])], str(int(sk.channels[i]))]
        row += [repr(float(v)) for v in sk.positions[i]]
        row += [repr(float(v)) for v in sk.velocities[i]]
        buf.write(",".join(row) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_skeleton_csv(path):
    """Load (times, kinds, channels, positions, velocities) from a skeleton CSV."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    lines = [ln for ln in lines if not ln.startswith("#")]
    header = lines[0].split(",")
    d = sum(1 for c in header if c.startswith("x"))
    times, kinds, channels, X, V = [], [], [], [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        times.append(float(parts[0]))
        kinds.append(KIND_CODES[parts[1]])
        channels.append(int(parts[2]))
        X.append([float(p) for p in parts[3 : 3 + d]])
        V.append([float(p) for p in parts[3 + d : 3 + 2 * d]])
    return (
        np.array(times),
        np.array(kinds, dtype=np.int8),
        np.array(channels, dtype=np.int32),
        np.array(X),
        np.array(V),
    )
