"""Fixed-step RK4 integration and deterministic trajectory serialization."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Trajectory", "BlowUpError", "rk4_path", "format_float", "emit_csv"]


class BlowUpError(Exception):
    """A state component became non-finite during integration."""

    def __init__(self, time, partial):
        super().__init__(f"non-finite state at t={time:.6g}")
        self.time = time
        self.partial = partial


@dataclass
class Trajectory:
    header: tuple
    times: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, t, row):
        self.times.append(float(t))
        self.rows.append([float(v) for v in row])

    def __len__(self):
        return len(self.rows)

    def array(self):
        return np.asarray(self.rows, dtype=float)

    def to_csv(self, fh):
        fh.write(",".join(self.header) + "\n")
        for t, row in zip(self.times, self.rows):
            fh.write(",".join(format_float(v) for v in (t, *row)) + "\n")

    def csv_bytes(self):
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue().encode("utf-8")


def format_float(v):
    return "%.17g" % float(v)


def emit_csv(traj, path):
    if len(traj) == 0:
        raise ValueError("refusing to write an empty trajectory")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        traj.to_csv(fh)


def rk4_path(field_fn, y0, t_end, step, record):
    """Integrate y' = field_fn(t, y) with classical RK4 at fixed step.

    `record(t, y)` maps each sampled state to a row; rows (including the
    initial state) accumulate into a Trajectory whose header is taken from
    record's `header` attribute if present.

    A `post` attribute on field_fn, when present, is applied to the state
    after each step (e.g. renormalization).
    """
    if step <= 0 or t_end <= 0:
        raise ValueError("step and t_end must be positive")
    header = getattr(record, "header", None)
    traj = Trajectory(header=tuple(header) if header else ())
    y = np.array(y0, dtype=float)
    nsteps = int(round(t_end / step))
    post = getattr(field_fn, "post", None)
    t = 0.0
    traj.append(t, record(t, y))
    for k in range(nsteps):
        h = step
        k1 = field_fn(t, y)
        k2 = field_fn(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = field_fn(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = field_fn(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if post is not None:
            y = post(y)
        t = (k + 1) * step
        if not np.all(np.isfinite(y)):
            raise BlowUpError(t, traj)
        traj.append(t, record(t, y))
    return traj
