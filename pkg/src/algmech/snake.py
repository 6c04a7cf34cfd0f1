"""Discretized snake in R^d: N unit segments with lengths l_k, the end map,
the canonical tangential fields E_i, minimal-norm horizontal lifts tracking
a head curve, singularity detection, the truncated coefficient Lie algebra,
and closed-form extremals."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._snake_kernels import (
    USING_NUMBA,
    control_operator_kernel,
    e_field_kernel,
    horizontal_kernel,
    renormalize_kernel,
)
from .expr import Dual, _split, parse
from .trajectory import Trajectory, rk4_path

__all__ = [
    "SnakeConfig",
    "HeadCurve",
    "GVector",
    "SnakeConfigError",
    "SingularConfigurationError",
    "end_map",
    "e_field",
    "control_operator",
    "horizontal_velocity",
    "charm",
    "singularity_margin",
    "snake_bracket_defect",
    "bracket_sign",
    "g_bracket",
    "extremal_regular",
    "extremal_singular",
    "curve_energy",
    "load_snake",
]


class SnakeConfigError(Exception):
    pass


class SingularConfigurationError(Exception):
    def __init__(self, lam_min, time=None):
        where = "" if time is None else f" at t={time:.6g}"
        super().__init__(
            f"singular configuration{where}: lambda_min(A) = {lam_min:.3e}"
        )
        self.lam_min = lam_min
        self.time = time


@dataclass(frozen=True)
class SnakeConfig:
    d: int
    N: int
    lengths: tuple
    u: tuple  # N rows of d floats

    @classmethod
    def of(cls, d, N, lengths, u):
        lengths = tuple(float(v) for v in lengths)
        u = tuple(tuple(float(c) for c in row) for row in u)
        cfg = cls(d=int(d), N=int(N), lengths=lengths, u=u)
        if cfg.d < 1 or cfg.N < 1:
            raise SnakeConfigError("d and N must be positive")
        if len(lengths) != cfg.N or any(l <= 0 for l in lengths):
            raise SnakeConfigError("need N positive segment lengths")
        if len(u) != cfg.N or any(len(row) != cfg.d for row in u):
            raise SnakeConfigError(f"u must be {cfg.N} vectors in R^{cfg.d}")
        for k, row in enumerate(u):
            norm = float(np.linalg.norm(row))
            if abs(norm - 1.0) >= 1e-9:
                raise SnakeConfigError(
                    f"segment {k + 1} is not unit length (|u| = {norm:.12g})"
                )
        return cfg

    def matrix(self):
        return np.array(self.u, dtype=float)

    def length_array(self):
        return np.array(self.lengths, dtype=float)

    def with_matrix(self, mat):
        return SnakeConfig(
            d=self.d,
            N=self.N,
            lengths=self.lengths,
            u=tuple(tuple(float(c) for c in row) for row in mat),
        )


class HeadCurve:
    """Prescribed head trajectory: expression components of t, or a
    piecewise-linear polyline through time-stamped samples."""

    def __init__(self, exprs=None, samples=None):
        if (exprs is None) == (samples is None):
            raise SnakeConfigError("head curve needs exprs or samples, not both")
        if exprs is not None:
            self.exprs = tuple(parse(s, ("t",)) for s in exprs)
            self.samples = None
            self.d = len(self.exprs)
        else:
            arr = np.array(samples, dtype=float)
            if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
                raise SnakeConfigError("head samples need >= 2 rows of [t, c...]")
            if np.any(np.diff(arr[:, 0]) <= 0):
                raise SnakeConfigError("head sample times must increase")
            self.exprs = None
            self.samples = arr
            self.d = arr.shape[1] - 1

    def value(self, t):
        if self.exprs is not None:
            env = {"t": float(t)}
            return np.array([e.eval_env(env) for e in self.exprs])
        ts = self.samples[:, 0]
        return np.array(
            [np.interp(t, ts, self.samples[:, 1 + j]) for j in range(self.d)]
        )

    def velocity(self, t):
        if self.exprs is not None:
            env = {"t": Dual(float(t), 1.0)}
            return np.array([float(_split(e.eval_env(env))[1]) for e in self.exprs])
        ts = self.samples[:, 0]
        idx = int(np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2))
        dt = ts[idx + 1] - ts[idx]
        return (self.samples[idx + 1, 1:] - self.samples[idx, 1:]) / dt


# ---------------------------------------------------------------------------
# Kinematics


def end_map(cfg):
    return cfg.length_array() @ cfg.matrix()


def e_field(cfg, i):
    if not 0 <= i < cfg.d:
        raise IndexError(f"axis {i} out of range for d={cfg.d}")
    return e_field_kernel(cfg.matrix(), i)


def control_operator(cfg):
    return control_operator_kernel(cfg.length_array(), cfg.matrix())


def singularity_margin(cfg):
    a = control_operator(cfg)
    return float(np.linalg.eigvalsh(a)[0])


def horizontal_velocity(cfg, cdot):
    cdot = np.asarray(cdot, dtype=float)
    v, lam, resid = horizontal_kernel(cfg.length_array(), cfg.matrix(), cdot)
    norm = float(np.linalg.norm(cdot))
    if norm > 0 and resid > 1e-8 * norm:
        raise SingularConfigurationError(singularity_margin(cfg))
    return v, lam


# ---------------------------------------------------------------------------
# Charm control


def charm(cfg0, head, t_end, step):
    margin = singularity_margin(cfg0)
    if margin <= 1e-6:
        raise SingularConfigurationError(margin, time=0.0)
    mismatch = float(np.linalg.norm(end_map(cfg0) - head.value(0.0)))
    if mismatch > 1e-8:
        raise SnakeConfigError(
            f"initial end map misses head curve start by {mismatch:.3e}"
        )
    N, d = cfg0.N, cfg0.d
    lengths = cfg0.length_array()

    def field(t, y):
        u = y.reshape(N, d)
        cdot = head.velocity(t)
        v, lam, resid = horizontal_kernel(lengths, u, cdot)
        norm = float(np.linalg.norm(cdot))
        if norm > 0 and resid > 1e-8 * norm:
            a = control_operator_kernel(lengths, u)
            raise SingularConfigurationError(float(np.linalg.eigvalsh(a)[0]), time=t)
        return v.reshape(-1)

    field.post = lambda y: renormalize_kernel(y.reshape(N, d)).reshape(-1)

    powers = []
    velocities = []
    state = {"energy": 0.0, "t_prev": None, "p_prev": None}

    def record(t, y):
        u = y.reshape(N, d)
        v = field(t, y).reshape(N, d)
        p = 0.5 * float(np.sum(lengths * np.sum(v * v, axis=1)))
        if state["t_prev"] is not None:
            state["energy"] += 0.5 * (p + state["p_prev"]) * (t - state["t_prev"])
        state["t_prev"], state["p_prev"] = t, p
        powers.append(p)
        velocities.append(v.copy())
        track = float(np.linalg.norm(lengths @ u - head.value(t)))
        return [*y, *(lengths @ u), track, state["energy"]]

    record.header = _charm_header(N, d)
    traj = rk4_path(field, cfg0.matrix().reshape(-1), t_end, step, record)
    traj.meta.update(
        {
            "integrator": "rk4",
            "step": step,
            "lengths": lengths,
            "powers": powers,
            "velocities": velocities,
            "d": d,
            "N": N,
        }
    )
    return traj


def _axis_name(j):
    return "xyz"[j] if j < 3 else str(j + 1)


def _charm_header(N, d):
    cols = ["t"]
    cols += [f"u_{k + 1}_{j + 1}" for k in range(N) for j in range(d)]
    cols += [f"e{_axis_name(j)}" for j in range(d)]
    cols += ["track_err", "energy"]
    return tuple(cols)


def curve_energy(traj):
    if len(traj) < 2:
        raise ValueError("trajectory needs at least 2 samples")
    powers = traj.meta["powers"]
    return float(np.trapezoid(powers, traj.times))


# ---------------------------------------------------------------------------
# Bracket relations


_SIGN_CACHE = {}


def _fd_bracket(cfg, i, j, h=1e-5):
    """Finite-difference Lie bracket [E_i, E_j] with tangential projection."""
    u = cfg.matrix()
    lengths = cfg.lengths

    def ef(mat, axis):
        return e_field_kernel(np.asarray(mat, float), axis)

    xi = ef(u, i)
    xj = ef(u, j)
    dj = (ef(u + h * xi, j) - ef(u - h * xi, j)) / (2 * h)
    di = (ef(u + h * xj, i) - ef(u - h * xj, i)) / (2 * h)
    br = dj - di
    dots = np.sum(br * u, axis=1, keepdims=True)
    return br - dots * u


def _claimed_bracket(cfg, i, j):
    u = cfg.matrix()
    ei = e_field_kernel(u, i)
    ej = e_field_kernel(u, j)
    return u[:, [j]] * ei - u[:, [i]] * ej


def bracket_sign():
    """Global sign calibrating the stated relation against the
    finite-difference Lie bracket, computed once per process."""
    if "s" not in _SIGN_CACHE:
        cfg = SnakeConfig.of(3, 1, [1.0], [[1.0, 0.0, 0.0]])
        fd = _fd_bracket(cfg, 0, 1)
        claimed = _claimed_bracket(cfg, 0, 1)
        plus = float(np.max(np.abs(fd - claimed)))
        minus = float(np.max(np.abs(fd + claimed)))
        _SIGN_CACHE["s"] = 1 if plus <= minus else -1
    return _SIGN_CACHE["s"]


def snake_bracket_defect(cfg, i, j):
    if i == j:
        return 0.0
    fd = _fd_bracket(cfg, i, j)
    claimed = bracket_sign() * _claimed_bracket(cfg, i, j)
    return float(np.max(np.abs(fd - claimed)))


# ---------------------------------------------------------------------------
# Truncated coefficient Lie algebra


def _pairs(d):
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def _xi_to_matrix(xi, d):
    x = np.zeros((d, d))
    for idx, (i, j) in enumerate(_pairs(d)):
        x[i, j] = xi[idx]
        x[j, i] = -xi[idx]
    return x


def _matrix_to_xi(x, d):
    return np.array([x[i, j] for (i, j) in _pairs(d)])


@dataclass(frozen=True)
class GVector:
    sigma: tuple
    xi: tuple  # pair-indexed (i<j), lexicographic

    @classmethod
    def of(cls, sigma, xi):
        sigma = tuple(float(v) for v in sigma)
        xi = tuple(float(v) for v in xi)
        d = len(sigma)
        if len(xi) != d * (d - 1) // 2:
            raise ValueError(f"xi must have length {d * (d - 1) // 2} for d={d}")
        return cls(sigma=sigma, xi=xi)

    @property
    def d(self):
        return len(self.sigma)


def g_bracket(a, b):
    """Bracket on the span of eps_i, omega_{ij}:
    [eps_i, eps_j] = omega_{ij};
    [eps_i, omega_{jk}] = delta_{ij} eps_k - delta_{ik} eps_j;
    [omega_{ij}, omega_{kl}] = delta_{il} omega_{jk} + delta_{jk} omega_{il}
                              - delta_{ik} omega_{jl} - delta_{jl} omega_{ik}.
    """
    if a.d != b.d:
        raise ValueError("mismatched dimensions")
    d = a.d
    sa = np.asarray(a.sigma)
    sb = np.asarray(b.sigma)
    xa = _xi_to_matrix(a.xi, d)
    xb = _xi_to_matrix(b.xi, d)
    sigma_out = xa @ sb - xb @ sa
    xi_out = np.outer(sa, sb) - np.outer(sb, sa) + xa @ xb - xb @ xa
    return GVector.of(sigma_out, _matrix_to_xi(xi_out, d))


# ---------------------------------------------------------------------------
# Extremals


def extremal_regular(sigma0, sigmadot0, xi0, xidot0, t):
    s0 = np.asarray(sigma0, dtype=float)
    sd = np.asarray(sigmadot0, dtype=float)
    x0 = np.asarray(xi0, dtype=float)
    xd = np.asarray(xidot0, dtype=float)
    d = len(s0)
    sigma = s0 + sd * t
    xi = np.array(
        [
            x0[idx] + xd[idx] * t + 0.5 * sd[i] * sd[j] * t * t
            for idx, (i, j) in enumerate(_pairs(d))
        ]
    )
    return sigma, xi


def extremal_singular(sigma0, sigmadot0, t):
    return np.asarray(sigma0, dtype=float) + np.asarray(sigmadot0, dtype=float) * t


# ---------------------------------------------------------------------------
# Config files


def load_snake(path):
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    cfg = SnakeConfig.of(obj["d"], obj["N"], obj["lengths"], obj["u"])
    head = None
    if "head" in obj:
        h = obj["head"]
        if "exprs" in h:
            head = HeadCurve(exprs=h["exprs"])
        else:
            head = HeadCurve(samples=h["samples"])
        if head.d != cfg.d:
            raise SnakeConfigError("head curve dimension differs from config")
    return cfg, head
