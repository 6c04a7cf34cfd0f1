"""Canonical example specs and seeded random generators used by the
property suite, the CLI and the tests."""

from __future__ import annotations

import numpy as np

from .algebroid import AlgebroidSpec

__all__ = [
    "tangent",
    "so3_zero_anchor",
    "so3_action",
    "heisenberg_projected",
    "random_polynomial",
    "random_spec",
    "random_section",
    "random_phase_function",
]


def tangent(n, g=None, V=None):
    """Tangent algebroid of the coordinate patch: identity anchor, C = 0."""
    rho = [["1" if j == i else "0" for j in range(n)] for i in range(n)]
    return AlgebroidSpec.build(n, n, rho, {}, g=g, V=V)


def so3_zero_anchor(inertia=None):
    """Zero anchor with so(3) structure constants C^g_{ab} = eps_{abg};
    optional diagonal inertia metric."""
    c = {(2, 0, 1): "1", (1, 0, 2): "-1", (0, 1, 2): "1"}
    g = None
    if inertia is not None:
        g = [
            [str(float(inertia[a])) if a == b else "0" for b in range(3)]
            for a in range(3)
        ]
    return AlgebroidSpec.build(1, 3, [["0", "0", "0"]], c, g=g)


def so3_action():
    """so(3) acting on R^3 by rotations: rho(e_a) = -(e_a x x), C = eps."""
    rho = [
        ["0", "-x3", "x2"],
        ["x3", "0", "-x1"],
        ["-x2", "x1", "0"],
    ]
    c = {(2, 0, 1): "1", (1, 0, 2): "-1", (0, 1, 2): "1"}
    return AlgebroidSpec.build(3, 3, rho, c)


def heisenberg_projected():
    """Rank-2 projection of the tangent algebroid of R^3 onto the frame
    {d1 + x2 d3, d2}: non-involutive, nonzero Jacobiator."""
    rho = [["1", "0"], ["0", "1"], ["x2", "0"]]
    c = {(0, 0, 1): "-x2/(1+x2^2)"}
    return AlgebroidSpec.build(3, 2, rho, c)


def random_polynomial(rng, names, degree=2, scale=1.0):
    """Random polynomial of total degree <= degree with short coefficients."""
    terms = ["1"]
    for nm in names:
        terms.append(nm)
    if degree >= 2:
        for i, a in enumerate(names):
            for b in names[i:]:
                terms.append(f"{a}*{b}")
    parts = []
    for t in terms:
        if rng.random() < 0.6:
            coef = round(float(rng.uniform(-scale, scale)), 3)
            if coef != 0.0:
                parts.append(f"{coef}*{t}")
    if not parts:
        parts = [str(round(float(rng.uniform(-scale, scale)), 3))]
    return " + ".join(parts)


def random_spec(rng, nmax=4, mmax=4, degree=2, with_metric=False):
    n = int(rng.integers(1, nmax + 1))
    m = int(rng.integers(1, mmax + 1))
    names = [f"x{i + 1}" for i in range(n)]
    rho = [
        [random_polynomial(rng, names, degree, 0.5) for _ in range(m)]
        for _ in range(n)
    ]
    c = {}
    for gam in range(m):
        for a in range(m):
            for b in range(a + 1, m):
                if rng.random() < 0.5:
                    c[(gam, a, b)] = random_polynomial(rng, names, degree, 0.5)
    g = None
    if with_metric:
        # diagonally dominant symmetric positive definite on the unit box
        g = [["0"] * m for _ in range(m)]
        for a in range(m):
            g[a][a] = str(round(float(rng.uniform(1.5, 3.0)), 3))
            for b in range(a + 1, m):
                off = str(round(float(rng.uniform(-0.3, 0.3)), 3))
                g[a][b] = g[b][a] = off
    return AlgebroidSpec.build(n, m, rho, c, g=g)


def random_section(rng, spec, degree=2):
    names = list(spec.base_vars)
    return spec.section(
        [random_polynomial(rng, names, degree, 1.0) for _ in range(spec.m)]
    )


def random_phase_function(rng, spec, degree=2):
    names = list(spec.base_vars + spec.dual_vars)
    return spec.phase_function(random_polynomial(rng, names, degree, 1.0))
