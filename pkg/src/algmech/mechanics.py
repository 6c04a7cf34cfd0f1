"""Lagrangian mechanics on an algebroid: Legendre transform, energy,
Euler-Lagrange semispray, Riemannian sprays, spray homogeneity, and
constrained systems obtained by metric-orthogonal projection onto a frame.

The Euler-Lagrange field is computed from the basis-form equations

    xdot^i = sum_a rho^i_a u^a
    d/dt (dL/du^a) = sum_i rho^i_a dL/dx^i - sum_{g,b} C^g_{ab} u^b dL/du^g

by expanding the total derivative with exact second-order duals and solving
the m x m system in udot.  The same core serves constrained systems, whose
Lagrangian is a numeric closure over the frame expansion and whose anchor
and structure coefficients are computed pointwise by linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebroid
from .expr import Dual, directional, parse, to_string, _split
from .poisson import PhasePoint
from .trajectory import rk4_path

__all__ = [
    "VelPoint",
    "SingularLagrangianError",
    "RankDeficiencyError",
    "legendre",
    "lagrangian_energy",
    "el_field",
    "riemannian_spray",
    "integrate_el",
    "spray_defect",
    "constrain",
    "ConstrainedSystem",
    "riemannian_lagrangian",
]


class SingularLagrangianError(Exception):
    def __init__(self, smin, smax):
        super().__init__(
            f"fiber Hessian of the Lagrangian is singular "
            f"(singular values {smin:.3e} .. {smax:.3e})"
        )
        self.smin = smin
        self.smax = smax


class RankDeficiencyError(Exception):
    def __init__(self, smin, x):
        super().__init__(
            f"frame is rank deficient at {list(x)} (smallest singular value {smin:.3e})"
        )
        self.smin = smin


@dataclass(frozen=True)
class VelPoint:
    x: tuple
    u: tuple

    @classmethod
    def of(cls, x, u):
        return cls(tuple(float(v) for v in x), tuple(float(v) for v in u))


def vel_env(spec, vp):
    env = {name: float(v) for name, v in zip(spec.base_vars, vp.x)}
    env.update({f"u{a + 1}": float(v) for a, v in enumerate(vp.u)})
    return env


# ---------------------------------------------------------------------------
# Generic-callable derivative helpers (mirror expr.directional for closures)


def _fn_directional(fn, env, seed):
    denv = {k: Dual(float(v), float(seed.get(k, 0.0))) for k, v in env.items()}
    a, b = _split(fn(denv))
    return float(a), float(b)


def _fn_second(fn, env, seed1, seed2):
    denv = {
        k: Dual(
            Dual(float(v), float(seed1.get(k, 0.0))),
            Dual(float(seed2.get(k, 0.0)), 0.0),
        )
        for k, v in env.items()
    }
    _, outer = _split(fn(denv))
    _, mixed = _split(outer)
    return float(mixed)


# ---------------------------------------------------------------------------
# Basic operations on explicit Lagrangians


def legendre(spec, L, vp):
    env = vel_env(spec, vp)
    xi = [directional(L, env, {f"u{a + 1}": 1.0})[1] for a in range(spec.m)]
    return PhasePoint.of(vp.x, xi)


def lagrangian_energy(spec, L, vp):
    env = vel_env(spec, vp)
    d2 = [directional(L, env, {f"u{a + 1}": 1.0})[1] for a in range(spec.m)]
    return float(sum(u * d for u, d in zip(vp.u, d2)) - L.eval_env(env))


# ---------------------------------------------------------------------------
# Euler-Lagrange core


def _el_core(lag, base_vars, rank, rho, c, x, u):
    """Expand the basis-form Euler-Lagrange equations at one point.

    `lag` maps a (possibly dual-valued) environment over base_vars and
    u1..u<rank> to a scalar; rho is n x rank, c is rank^3 dense
    antisymmetric in its last two slots.
    """
    n = len(base_vars)
    env = {name: float(v) for name, v in zip(base_vars, x)}
    env.update({f"u{a + 1}": float(v) for a, v in enumerate(u)})
    unames = [f"u{a + 1}" for a in range(rank)]
    d1 = np.array(
        [_fn_directional(lag, env, {name: 1.0})[1] for name in base_vars]
    )
    d2 = np.array([_fn_directional(lag, env, {nm: 1.0})[1] for nm in unames])
    d22 = np.empty((rank, rank))
    for a in range(rank):
        for b in range(a, rank):
            d22[a, b] = d22[b, a] = _fn_second(
                lag, env, {unames[a]: 1.0}, {unames[b]: 1.0}
            )
    d12 = np.empty((n, rank))
    for i in range(n):
        for a in range(rank):
            d12[i, a] = _fn_second(lag, env, {base_vars[i]: 1.0}, {unames[a]: 1.0})
    uvec = np.asarray(u, dtype=float)
    xdot = rho @ uvec
    rhs = rho.T @ d1 - np.einsum("gab,b,g->a", c, uvec, d2) - d12.T @ xdot
    sv = np.linalg.svd(d22, compute_uv=False)
    smin, smax = float(sv[-1]), float(sv[0])
    if smin < 1e-9 * max(smax, 1e-300):
        raise SingularLagrangianError(smin, smax)
    udot = np.linalg.solve(d22, rhs)
    return xdot, udot


def el_field(spec, L, vp):
    lag = L.eval_env
    return _el_core(
        lag, spec.base_vars, spec.m, spec.rho_at(vp.x), spec.c_at(vp.x), vp.x, vp.u
    )


# ---------------------------------------------------------------------------
# Riemannian spray core (shared by ambient specs and constrained systems)


def _spray_core(g_fn, base_vars, rank, rho, c, dv, x, u):
    """Solve g udot = rhs with

    rhs_a = sum_{b,g} [ -D[a,b,g] + 1/2 D[b,g,a] - sum_d C^d_{ab} g_{dg} ] u^b u^g
            - sum_i rho^i_a dV/dx^i,
    D[a,b,g] = sum_i dg_{ab}/dx^i rho^i_g.
    """
    n = len(base_vars)
    env = {name: float(v) for name, v in zip(base_vars, x)}
    gmat = np.array(
        [[float(_split(v)[0]) for v in row] for row in g_fn(env)]
    )
    dg = np.empty((n, rank, rank))
    for i in range(n):
        denv = {
            k: Dual(v, 1.0 if k == base_vars[i] else 0.0) for k, v in env.items()
        }
        rows = g_fn(denv)
        for a in range(rank):
            for b in range(rank):
                dg[i, a, b] = float(_split(rows[a][b])[1])
    uvec = np.asarray(u, dtype=float)
    d = np.einsum("iab,ig->abg", dg, rho)
    rhs = (
        -np.einsum("abg,b,g->a", d, uvec, uvec)
        + 0.5 * np.einsum("bga,b,g->a", d, uvec, uvec)
        - np.einsum("dab,dg,b,g->a", c, gmat, uvec, uvec)
        - rho.T @ dv
    )
    return rho @ uvec, np.linalg.solve(gmat, rhs)


def _grad_v(spec, x):
    if spec.V is None:
        return np.zeros(spec.n)
    env = spec.env(x)
    return np.array(
        [directional(spec.V, env, {name: 1.0})[1] for name in spec.base_vars]
    )


def riemannian_spray(spec, vp):
    if spec.g is None:
        raise algebroid.MetricError("riemannian_spray requires a metric")

    def g_fn(env):
        return [[e.eval_env(env) for e in row] for row in spec.g]

    return _spray_core(
        g_fn,
        spec.base_vars,
        spec.m,
        spec.rho_at(vp.x),
        spec.c_at(vp.x),
        _grad_v(spec, vp.x),
        vp.x,
        vp.u,
    )


def riemannian_lagrangian(spec):
    """The quadratic Lagrangian 1/2 <g u, u> - V as an expression."""
    if spec.g is None:
        raise algebroid.MetricError("spec has no metric")
    terms = []
    for a in range(spec.m):
        for b in range(spec.m):
            terms.append(f"({to_string(spec.g[a][b])})*u{a + 1}*u{b + 1}")
    text = "0.5*(" + " + ".join(terms) + ")"
    if spec.V is not None:
        text += f" - ({to_string(spec.V)})"
    return parse(text, spec.base_vars + spec.fiber_vars)


# ---------------------------------------------------------------------------
# Flow and homogeneity


def integrate_el(spec, L, vp0, t_end, step):
    n, m = spec.n, spec.m

    def field(t, y):
        xdot, udot = el_field(spec, L, VelPoint.of(y[:n], y[n:]))
        return np.concatenate([xdot, udot])

    def record(t, y):
        vp = VelPoint.of(y[:n], y[n:])
        return [*y, lagrangian_energy(spec, L, vp)]

    record.header = ("t", *spec.base_vars, *spec.fiber_vars, "HL")
    y0 = np.concatenate([np.asarray(vp0.x, float), np.asarray(vp0.u, float)])
    traj = rk4_path(field, y0, t_end, step, record)
    traj.meta.update({"integrator": "rk4", "step": step, "admissibility_defect": 0.0})
    return traj


def spray_defect(spec, L, vp, lam):
    _, udot1 = el_field(spec, L, vp)
    _, udot2 = el_field(spec, L, VelPoint.of(vp.x, [lam * v for v in vp.u]))
    return float(np.linalg.norm(udot2 - lam * lam * udot1))


# ---------------------------------------------------------------------------
# Constrained systems


class ConstrainedSystem:
    """Rank-k system induced on a frame by metric-orthogonal projection.

    All geometric data (anchor, Gram metric, projected structure
    coefficients) are numeric closures evaluated pointwise; fiber
    coordinates u1..uk refer to frame coefficients.
    """

    def __init__(self, spec, frame):
        if spec.g is None:
            raise algebroid.MetricError("constraining requires a metric")
        self.spec = spec
        self.frame = tuple(frame)
        self.k = len(frame)
        self.base_vars = spec.base_vars
        for s in frame:
            if len(s.comps) != spec.m:
                raise algebroid.SpecError("frame section has wrong rank")

    def frame_matrix(self, x):
        env = self.spec.env(x)
        f = np.array(
            [[c.eval_env(env) for c in s.comps] for s in self.frame]
        )
        sv = np.linalg.svd(f, compute_uv=False)
        if float(sv[-1]) <= 1e-9:
            raise RankDeficiencyError(float(sv[-1]), x)
        return f

    def anchor(self, x):
        return self.spec.rho_at(x) @ self.frame_matrix(x).T

    def gram(self, x):
        f = self.frame_matrix(x)
        return f @ self.spec.g_at(x) @ f.T

    def _gram_fn(self, env):
        f = [[c.eval_env(env) for c in s.comps] for s in self.frame]
        g = [[e.eval_env(env) for e in row] for row in self.spec.g]
        m, k = self.spec.m, self.k
        out = [[0.0] * k for _ in range(k)]
        for i in range(k):
            for j in range(k):
                acc = 0.0
                for a in range(m):
                    for b in range(m):
                        acc = acc + f[i][a] * g[a][b] * f[j][b]
                out[i][j] = acc
        return out

    def c_at(self, x):
        """Projected structure coefficients: [f_a, f_b]' = sum_g C'^g_{ab} f_g."""
        f = self.frame_matrix(x)
        g = self.spec.g_at(x)
        gram = f @ g @ f.T
        k = self.k
        c = np.zeros((k, k, k))
        for a in range(k):
            for b in range(a + 1, k):
                amb = algebroid.bracket(self.spec, self.frame[a], self.frame[b], x)
                coeff = np.linalg.solve(gram, f @ g @ amb)
                c[:, a, b] = coeff
                c[:, b, a] = -coeff
        return c

    def bracket(self, s1, s2, x):
        """Bracket of rank-k sections (components in the base variables)."""
        rho = self.anchor(x)
        c = self.c_at(x)
        env = self.spec.env(x)
        a1 = np.array([e.eval_env(env) for e in s1.comps])
        a2 = np.array([e.eval_env(env) for e in s2.comps])
        v1 = rho @ a1
        v2 = rho @ a2
        seed1 = dict(zip(self.base_vars, v1))
        seed2 = dict(zip(self.base_vars, v2))
        d2 = np.array([directional(e, env, seed1)[1] for e in s2.comps])
        d1 = np.array([directional(e, env, seed2)[1] for e in s1.comps])
        return np.einsum("gab,a,b->g", c, a1, a2) + d2 - d1

    def _lag_fn(self, L):
        spec = self.spec
        frame = self.frame
        m, k = spec.m, self.k

        def lag(env):
            fcomp = [[c.eval_env(env) for c in s.comps] for s in frame]
            amb = dict(env)
            for a in range(m):
                acc = 0.0
                for j in range(k):
                    acc = acc + env[f"u{j + 1}"] * fcomp[j][a]
                amb[f"u{a + 1}"] = acc
            return L.eval_env(amb)

        return lag

    def el_field(self, L, vp):
        return _el_core(
            self._lag_fn(L),
            self.base_vars,
            self.k,
            self.anchor(vp.x),
            self.c_at(vp.x),
            vp.x,
            vp.u,
        )

    def riemannian_spray(self, vp):
        return _spray_core(
            self._gram_fn,
            self.base_vars,
            self.k,
            self.anchor(vp.x),
            self.c_at(vp.x),
            _grad_v(self.spec, vp.x),
            vp.x,
            vp.u,
        )

    def lagrangian_energy(self, L, vp):
        lag = self._lag_fn(L)
        env = {name: float(v) for name, v in zip(self.base_vars, vp.x)}
        env.update({f"u{j + 1}": float(v) for j, v in enumerate(vp.u)})
        d2 = [
            _fn_directional(lag, env, {f"u{j + 1}": 1.0})[1] for j in range(self.k)
        ]
        return float(sum(u * d for u, d in zip(vp.u, d2)) - lag(env))

    def integrate_el(self, L, vp0, t_end, step):
        n, k = self.spec.n, self.k

        def field(t, y):
            xdot, udot = self.el_field(L, VelPoint.of(y[:n], y[n:]))
            return np.concatenate([xdot, udot])

        def record(t, y):
            vp = VelPoint.of(y[:n], y[n:])
            return [*y, self.lagrangian_energy(L, vp)]

        record.header = (
            "t",
            *self.base_vars,
            *(f"u{j + 1}" for j in range(k)),
            "HL",
        )
        y0 = np.concatenate([np.asarray(vp0.x, float), np.asarray(vp0.u, float)])
        traj = rk4_path(field, y0, t_end, step, record)
        traj.meta.update({"integrator": "rk4", "step": step})
        return traj


def constrain(spec, frame):
    return ConstrainedSystem(spec, frame)
