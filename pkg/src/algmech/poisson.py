"""Linear almost Poisson structure on the dual bundle of an algebroid.

Phase-space functions live in the variables x1..xn, xi1..xim.  The bracket,
the Hamiltonian vector field and its RK4 flow all use the coordinate
expressions with exact dual-number derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import directional, parse, to_string
from .trajectory import rk4_path

__all__ = [
    "PhasePoint",
    "phi",
    "poisson_bracket",
    "hamiltonian_field",
    "integrate_hamilton",
]


@dataclass(frozen=True)
class PhasePoint:
    x: tuple
    xi: tuple

    @classmethod
    def of(cls, x, xi):
        return cls(tuple(float(v) for v in x), tuple(float(v) for v in xi))


def phase_env(spec, p):
    env = {name: float(v) for name, v in zip(spec.base_vars, p.x)}
    env.update({name: float(v) for name, v in zip(spec.dual_vars, p.xi)})
    return env


def _gradients(spec, f, env):
    """(d/dx^i f, d/dxi_a f) at env via one dual sweep per variable."""
    fx = np.empty(spec.n)
    fxi = np.empty(spec.m)
    free = f.variables
    for i, name in enumerate(spec.base_vars):
        fx[i] = directional(f, env, {name: 1.0})[1] if name in free else 0.0
    for a, name in enumerate(spec.dual_vars):
        fxi[a] = directional(f, env, {name: 1.0})[1] if name in free else 0.0
    return fx, fxi


def phi(s, p):
    env = {f"x{i + 1}": float(v) for i, v in enumerate(p.x)}
    return float(
        sum(xi * c.eval_env(env) for xi, c in zip(p.xi, s.comps))
    )


def phi_function(spec, s):
    """The fiberwise-linear phase function of a section, as an Expr."""
    terms = " + ".join(
        f"xi{a + 1}*({to_string(c)})" for a, c in enumerate(s.comps)
    )
    return parse(terms, spec.base_vars + spec.dual_vars)


def poisson_bracket(spec, F, G, p):
    env = phase_env(spec, p)
    fx, fxi = _gradients(spec, F, env)
    gx, gxi = _gradients(spec, G, env)
    rho = spec.rho_at(p.x)
    out = float(fx @ rho @ gxi - gx @ rho @ fxi)
    c = spec.c_at(p.x)
    xi = np.asarray(p.xi, dtype=float)
    out -= float(np.einsum("gab,g,a,b->", c, xi, fxi, gxi))
    return out


def hamiltonian_field(spec, h, p):
    env = phase_env(spec, p)
    hx, hxi = _gradients(spec, h, env)
    rho = spec.rho_at(p.x)
    c = spec.c_at(p.x)
    xi = np.asarray(p.xi, dtype=float)
    xdot = rho @ hxi
    xidot = -rho.T @ hx - np.einsum("gab,g,b->a", c, xi, hxi)
    return xdot, xidot


def integrate_hamilton(spec, h, p0, t_end, step):
    n, m = spec.n, spec.m

    def field(t, y):
        p = PhasePoint.of(y[:n], y[n:])
        xdot, xidot = hamiltonian_field(spec, h, p)
        return np.concatenate([xdot, xidot])

    def record(t, y):
        p = PhasePoint.of(y[:n], y[n:])
        return [*y, h.eval_env(phase_env(spec, p))]

    record.header = (
        "t",
        *spec.base_vars,
        *spec.dual_vars,
        "h",
    )
    y0 = np.concatenate([np.asarray(p0.x, float), np.asarray(p0.xi, float)])
    traj = rk4_path(field, y0, t_end, step, record)
    traj.meta.update({"integrator": "rk4", "step": step})
    return traj
