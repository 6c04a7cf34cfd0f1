"""Hamilton-Jacobi verification: closedness of a dual section, the
Hamilton-Jacobi residual d_rho(h o omega), and the equivalence between the
projected base flow and the lifted Hamiltonian flow."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .algebroid import d_rho_1
from .expr import Dual, _split
from .poisson import PhasePoint, hamiltonian_field, integrate_hamilton
from .trajectory import rk4_path

__all__ = ["HJReport", "drho_closed_defect", "hj_defect", "hj_equivalence_check"]


@dataclass(frozen=True)
class HJReport:
    closedness_defect: float
    hj_defect: float
    lift_deviation: float
    samples: int
    times: str

    def to_dict(self):
        return asdict(self)


def drho_closed_defect(spec, omega, points):
    basis = [spec.basis_section(a) for a in range(spec.m)]
    worst = 0.0
    for x in points:
        for a in range(spec.m):
            for b in range(a + 1, spec.m):
                worst = max(
                    worst, abs(d_rho_1(spec, omega, basis[a], basis[b], x))
                )
    return worst


def _composite(spec, h, omega):
    """(h o omega)(x) = h(x, omega(x)) as a dual-friendly closure."""

    def comp(env):
        phase = dict(env)
        for a, c in enumerate(omega.comps):
            phase[f"xi{a + 1}"] = c.eval_env(env)
        return h.eval_env(phase)

    return comp


def _composite_grad(spec, comp, x):
    env = {name: float(v) for name, v in zip(spec.base_vars, x)}
    grad = np.empty(spec.n)
    for i, name in enumerate(spec.base_vars):
        denv = {k: Dual(v, 1.0 if k == name else 0.0) for k, v in env.items()}
        grad[i] = float(_split(comp(denv))[1])
    return grad


def hj_defect(spec, h, omega, points):
    comp = _composite(spec, h, omega)
    worst = 0.0
    for x in points:
        grad = _composite_grad(spec, comp, x)
        vals = spec.rho_at(x).T @ grad
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def _base_field(spec, h, omega):
    def field(t, x):
        env = spec.env(x)
        xi = [c.eval_env(env) for c in omega.comps]
        p = PhasePoint.of(x, xi)
        xdot, _ = hamiltonian_field(spec, h, p)
        return xdot

    return field


def hj_equivalence_check(spec, h, omega, x0, t_end, step):
    def record(t, x):
        return list(x)

    record.header = ("t", *spec.base_vars)
    base = rk4_path(_base_field(spec, h, omega), np.asarray(x0, float), t_end, step, record)
    pts = [row for row in base.rows]
    closed = drho_closed_defect(spec, omega, pts)
    residual = hj_defect(spec, h, omega, pts)
    xi0 = [c.eval_env(spec.env(x0)) for c in omega.comps]
    ham = integrate_hamilton(spec, h, PhasePoint.of(x0, xi0), t_end, step)
    dev = 0.0
    for x, hrow in zip(pts, ham.rows):
        env = spec.env(x)
        lift = np.array([*x, *(c.eval_env(env) for c in omega.comps)])
        dev = max(dev, float(np.linalg.norm(lift - np.asarray(hrow[: len(lift)]))))
    return HJReport(
        closedness_defect=closed,
        hj_defect=residual,
        lift_deviation=dev,
        samples=len(pts),
        times=f"0:{t_end}:{step}",
    )
