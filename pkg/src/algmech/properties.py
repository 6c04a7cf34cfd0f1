"""Seeded invariant suite: every module-level invariant, run from a single
seed with per-check spawned random streams, reported as (defect, threshold,
pass/fail) entries.  All randomness flows from numpy SeedSequence spawning;
no ambient entropy."""

from __future__ import annotations

import numpy as np

from . import algebroid as alg
from . import hj as hjmod
from . import library as lib
from . import mechanics as mech
from . import poisson as poi
from . import snake as snk
from .expr import directional, evaluate, parse, second_directional, to_string
from .mechanics import VelPoint
from .poisson import PhasePoint

__all__ = ["property_suite", "corrupted_report", "CHECKS"]

CHECKS = []


def _check(name, threshold):
    def deco(fn):
        CHECKS.append((name, threshold, fn))
        return fn

    return deco


def property_suite(seed):
    root = np.random.SeedSequence(int(seed))
    children = root.spawn(len(CHECKS))
    report = {"seed": int(seed), "checks": [], "all_pass": True}
    for (name, threshold, fn), child in zip(CHECKS, children):
        rng = np.random.default_rng(child)
        defect = float(fn(rng))
        passed = defect <= threshold
        report["checks"].append(
            {
                "name": name,
                "defect": defect,
                "threshold": threshold,
                "pass": passed,
            }
        )
        if not passed:
            report["all_pass"] = False
    return report


# ---------------------------------------------------------------------------
# expr


def _random_expr(rng, names):
    """Random smooth expression safe on the unit box."""
    atoms = []
    for nm in names:
        atoms += [nm, f"sin({nm})", f"cos({nm})", f"exp(0.3*{nm})", f"tanh({nm})"]
    k = int(rng.integers(2, 6))
    parts = []
    for _ in range(k):
        a = atoms[int(rng.integers(len(atoms)))]
        b = atoms[int(rng.integers(len(atoms)))]
        coef = round(float(rng.uniform(-2, 2)), 3)
        parts.append(f"{coef}*{a}*{b}" if rng.random() < 0.5 else f"{coef}*{a}")
    return " + ".join(parts)


@_check("expr.fd_match", 1e-6)
def _expr_fd(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        names = tuple(f"x{i + 1}" for i in range(n))
        e = parse(_random_expr(rng, names), names)
        x = rng.uniform(-1, 1, n)
        seed_vec = rng.uniform(-1, 1, n)
        env = dict(zip(names, x))
        _, d = directional(e, env, dict(zip(names, seed_vec)))
        h = 1e-5
        ep = dict(zip(names, x + h * seed_vec))
        em = dict(zip(names, x - h * seed_vec))
        fd = (evaluate(e, ep) - evaluate(e, em)) / (2 * h)
        scale = max(abs(d), abs(fd), 1.0)
        worst = max(worst, abs(d - fd) / scale)
    return worst


@_check("expr.seed_linearity", 1e-13)
def _expr_linearity(rng):
    worst = 0.0
    for _ in range(100):
        names = ("x1", "x2")
        e = parse(_random_expr(rng, names), names)
        env = dict(zip(names, rng.uniform(-1, 1, 2)))
        s1 = dict(zip(names, rng.uniform(-1, 1, 2)))
        s2 = dict(zip(names, rng.uniform(-1, 1, 2)))
        a, b = rng.uniform(-2, 2, 2)
        comb = {k: a * s1[k] + b * s2[k] for k in names}
        _, dc = directional(e, env, comb)
        _, d1 = directional(e, env, s1)
        _, d2 = directional(e, env, s2)
        worst = max(worst, abs(dc - (a * d1 + b * d2)))
    return worst


@_check("expr.second_symmetry", 1e-12)
def _expr_second(rng):
    worst = 0.0
    for _ in range(100):
        names = ("x1", "x2")
        e = parse(_random_expr(rng, names), names)
        env = dict(zip(names, rng.uniform(-1, 1, 2)))
        s1 = dict(zip(names, rng.uniform(-1, 1, 2)))
        s2 = dict(zip(names, rng.uniform(-1, 1, 2)))
        worst = max(
            worst,
            abs(
                second_directional(e, env, s1, s2)
                - second_directional(e, env, s2, s1)
            ),
        )
    return worst


@_check("expr.print_roundtrip", 0.0)
def _expr_roundtrip(rng):
    worst = 0.0
    for _ in range(100):
        names = ("x1", "x2", "x3")
        e = parse(_random_expr(rng, names), names)
        e2 = parse(to_string(e), names)
        for _ in range(5):
            env = dict(zip(names, rng.uniform(-1, 1, 3)))
            worst = max(worst, abs(evaluate(e, env) - evaluate(e2, env)))
    return worst


# ---------------------------------------------------------------------------
# algebroid


def _scaled_section(spec, f_text, s):
    return spec.section(
        [f"({f_text})*({to_string(c)})" for c in s.comps]
    )


@_check("algebroid.leibniz", 1e-10)
def _alg_leibniz(rng):
    worst = 0.0
    for _ in range(5):
        spec = lib.random_spec(rng, nmax=3, mmax=3)
        s1 = lib.random_section(rng, spec)
        s2 = lib.random_section(rng, spec)
        f_text = lib.random_polynomial(rng, list(spec.base_vars))
        f = spec.parse_base(f_text)
        fs2 = _scaled_section(spec, f_text, s2)
        for _ in range(20):
            x = rng.uniform(-1, 1, spec.n)
            lhs = alg.bracket(spec, s1, fs2, x)
            fval = evaluate(f, spec.env(x))
            lf = alg.lie_derivative_0(spec, s1, f, x)
            s2v = np.array([evaluate(c, spec.env(x)) for c in s2.comps])
            rhs = fval * alg.bracket(spec, s1, s2, x) + lf * s2v
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


@_check("algebroid.antisymmetry", 1e-13)
def _alg_antisym(rng):
    worst = 0.0
    for _ in range(5):
        spec = lib.random_spec(rng, nmax=3, mmax=3)
        s1 = lib.random_section(rng, spec)
        s2 = lib.random_section(rng, spec)
        for _ in range(20):
            x = rng.uniform(-1, 1, spec.n)
            v = alg.bracket(spec, s1, s2, x) + alg.bracket(spec, s2, s1, x)
            worst = max(worst, float(np.max(np.abs(v))))
    return worst


@_check("algebroid.anchor_morphism", 1e-6)
def _alg_anchor_morphism(rng):
    worst = 0.0
    for spec in (lib.tangent(3), lib.so3_action()):
        for _ in range(5):
            s1 = lib.random_section(rng, spec, degree=1)
            s2 = lib.random_section(rng, spec, degree=1)

            def rho_s(s, x):
                env = {f"x{i + 1}": v for i, v in enumerate(x)}
                vals = np.array([evaluate(c, env) for c in s.comps])
                return spec.rho_at(x) @ vals

            for _ in range(5):
                x = rng.uniform(-1, 1, spec.n)
                lhs = spec.rho_at(x) @ alg.bracket(spec, s1, s2, x)
                h = 1e-5
                v1 = rho_s(s1, x)
                v2 = rho_s(s2, x)
                rhs = (rho_s(s2, x + h * v1) - rho_s(s2, x - h * v1)) / (2 * h) - (
                    rho_s(s1, x + h * v2) - rho_s(s1, x - h * v2)
                ) / (2 * h)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


@_check("algebroid.crochetderiv", 1e-10)
def _alg_crochetderiv(rng):
    worst = 0.0
    for _ in range(5):
        spec = lib.random_spec(rng, nmax=3, mmax=3)
        s1 = lib.random_section(rng, spec)
        s2 = lib.random_section(rng, spec)
        omega = alg.DualSection(
            tuple(
                spec.parse_base(lib.random_polynomial(rng, list(spec.base_vars)))
                for _ in range(spec.m)
            )
        )
        for _ in range(10):
            x = rng.uniform(-1, 1, spec.n)
            env = spec.env(x)
            w = np.array([evaluate(c, env) for c in omega.comps])
            br = alg.bracket(spec, s1, s2, x)
            lhs = float(w @ br)

            def pair(sa, sb):
                return spec.parse_base(
                    " + ".join(
                        f"({to_string(a)})*({to_string(b)})"
                        for a, b in zip(sa, sb)
                    )
                )

            l1 = alg.lie_derivative_0(spec, s1, pair(omega.comps, s2.comps), x)
            l2 = alg.lie_derivative_0(spec, s2, pair(omega.comps, s1.comps), x)
            rhs = l1 - l2 - alg.d_rho_1(spec, omega, s1, s2, x)
            worst = max(worst, abs(lhs - rhs))
    return worst


@_check("algebroid.d_squared", 1e-9)
def _alg_dsq(rng):
    worst = 0.0
    for spec in (lib.tangent(2), lib.so3_action(), lib.so3_zero_anchor()):
        for _ in range(5):
            f = spec.parse_base(lib.random_polynomial(rng, list(spec.base_vars)))
            omega_fn = alg.d_rho_0_fn(spec, f)
            for _ in range(5):
                x = rng.uniform(-1, 1, spec.n)
                for a in range(spec.m):
                    for b in range(a + 1, spec.m):
                        v = alg.d_rho_1_fn(
                            spec,
                            omega_fn,
                            spec.basis_section(a),
                            spec.basis_section(b),
                            x,
                        )
                        worst = max(worst, abs(v))
    return worst


@_check("algebroid.bracket_difference_tensorial", 1e-10)
def _alg_brdiff(rng):
    worst = 0.0
    for _ in range(5):
        spec_a = lib.random_spec(rng, nmax=3, mmax=3)
        rho_src = tuple(tuple(to_string(e) for e in row) for row in spec_a.rho)
        c_src = {}
        for gam in range(spec_a.m):
            for a in range(spec_a.m):
                for b in range(a + 1, spec_a.m):
                    if rng.random() < 0.5:
                        c_src[(gam, a, b)] = lib.random_polynomial(
                            rng, list(spec_a.base_vars)
                        )
        spec_b = alg.AlgebroidSpec.build(spec_a.n, spec_a.m, rho_src, c_src)
        s1 = lib.random_section(rng, spec_a)
        s2 = lib.random_section(rng, spec_a)
        f_text = lib.random_polynomial(rng, list(spec_a.base_vars))
        fs1 = _scaled_section(spec_a, f_text, s1)
        f = spec_a.parse_base(f_text)
        for _ in range(10):
            x = rng.uniform(-1, 1, spec_a.n)
            d0 = alg.bracket_difference(spec_a, spec_b, s1, s2, x)
            d1 = alg.bracket_difference(spec_a, spec_b, fs1, s2, x)
            fval = evaluate(f, spec_a.env(x))
            worst = max(worst, float(np.max(np.abs(d1 - fval * d0))))
    return worst


# ---------------------------------------------------------------------------
# poisson


def _random_phase_point(rng, spec):
    return PhasePoint.of(rng.uniform(-1, 1, spec.n), rng.uniform(-1, 1, spec.m))


@_check("poisson.antisymmetry", 1e-13)
def _poi_antisym(rng):
    worst = 0.0
    for _ in range(5):
        spec = lib.random_spec(rng, nmax=3, mmax=3)
        f = lib.random_phase_function(rng, spec)
        g = lib.random_phase_function(rng, spec)
        for _ in range(10):
            p = _random_phase_point(rng, spec)
            worst = max(
                worst,
                abs(
                    poi.poisson_bracket(spec, f, g, p)
                    + poi.poisson_bracket(spec, g, f, p)
                ),
            )
    return worst


@_check("poisson.leibniz", 1e-10)
def _poi_leibniz(rng):
    worst = 0.0
    for _ in range(5):
        spec = lib.random_spec(rng, nmax=3, mmax=3)
        names = spec.base_vars + spec.dual_vars
        ftxt = lib.random_polynomial(rng, list(names))
        gtxt = lib.random_polynomial(rng, list(names))
        htxt = lib.random_polynomial(rng, list(names))
        f = spec.phase_function(ftxt)
        g = spec.phase_function(gtxt)
        h = spec.phase_function(htxt)
        gh = spec.phase_function(f"({gtxt})*({htxt})")
        for _ in range(10):
            p = _random_phase_point(rng, spec)
            env = poi.phase_env(spec, p)
            lhs = poi.poisson_bracket(spec, f, gh, p)
            rhs = evaluate(g, env) * poi.poisson_bracket(
                spec, f, h, p
            ) + evaluate(h, env) * poi.poisson_bracket(spec, f, g, p)
            worst = max(worst, abs(lhs - rhs))
    return worst


@_check("poisson.correspondence", 1e-10)
def _poi_correspondence(rng):
    """Phi_[s1,s2] = {Phi_s1, Phi_s2}_P and {Phi_s, f o tau} = (L_s f) o tau."""
    worst = 0.0
    for _ in range(5):
        spec = lib.random_spec(rng, nmax=3, mmax=3)
        s1 = lib.random_section(rng, spec)
        s2 = lib.random_section(rng, spec)
        ph1 = poi.phi_function(spec, s1)
        ph2 = poi.phi_function(spec, s2)
        f_text = lib.random_polynomial(rng, list(spec.base_vars))
        f = spec.parse_base(f_text)
        f_phase = spec.phase_function(f_text)
        for _ in range(10):
            p = _random_phase_point(rng, spec)
            br = alg.bracket(spec, s1, s2, np.asarray(p.x))
            phi_br = float(np.asarray(p.xi) @ br)
            pb = poi.poisson_bracket(spec, ph1, ph2, p)
            worst = max(worst, abs(phi_br - pb))
            lhs = poi.poisson_bracket(spec, ph1, f_phase, p)
            rhs = alg.lie_derivative_0(spec, s1, f, np.asarray(p.x))
            worst = max(worst, abs(lhs - rhs))
    return worst


@_check("poisson.flow_bracket", 1e-5)
def _poi_flow_bracket(rng):
    spec = lib.so3_action()
    h = spec.phase_function("0.5*(xi1^2 + xi2^2 + xi3^2) + 0.1*x1*xi2")
    f = spec.phase_function("x1*xi1 + 0.3*x2^2 + 0.2*xi3")
    p0 = PhasePoint.of([0.3, -0.2, 0.4], [0.5, 0.1, -0.3])
    step = 1e-3
    traj = poi.integrate_hamilton(spec, h, p0, 0.2, step)
    rows = traj.array()
    n, m = spec.n, spec.m
    worst = 0.0
    for k in range(1, len(traj) - 1):
        pm = PhasePoint.of(rows[k - 1][:n], rows[k - 1][n : n + m])
        pp = PhasePoint.of(rows[k + 1][:n], rows[k + 1][n : n + m])
        pc = PhasePoint.of(rows[k][:n], rows[k][n : n + m])
        fd = (
            evaluate(f, poi.phase_env(spec, pp))
            - evaluate(f, poi.phase_env(spec, pm))
        ) / (2 * step)
        worst = max(worst, abs(fd - poi.poisson_bracket(spec, f, h, pc)))
    return worst


@_check("poisson.energy_drift", 1e-8)
def _poi_energy(rng):
    worst = 0.0
    cases = [
        (lib.so3_action(), "0.5*(xi1^2 + xi2^2 + xi3^2) + 0.2*x1*x2*xi3"),
        (lib.so3_zero_anchor(), "0.5*(xi1^2 + xi2^2/2 + xi3^2/3)"),
    ]
    for spec, htxt in cases:
        h = spec.phase_function(htxt)
        p0 = _random_phase_point(rng, spec)
        traj = poi.integrate_hamilton(spec, h, p0, 1.0, 1e-3)
        hcol = traj.array()[:, -1]
        worst = max(worst, float(np.max(np.abs(hcol - hcol[0]))))
    return worst


def _coord_bracket_text(spec, a, b):
    """{coord_a, coord_b}_P as a phase expression; coords are x1..xn then
    xi1..xim, indexed 0..n+m-1."""
    n = spec.n
    if a < n and b < n:
        return "0"
    if a < n <= b:
        return to_string(spec.rho[a][b - n])
    if b < n <= a:
        return f"-({to_string(spec.rho[b][a - n])})"
    aa, bb = a - n, b - n
    parts = []
    for (gam, i, j), e in spec.C.items():
        if (i, j) == (aa, bb):
            parts.append(f"-({to_string(e)})*xi{gam + 1}")
        elif (i, j) == (bb, aa):
            parts.append(f"({to_string(e)})*xi{gam + 1}")
    return " + ".join(parts) if parts else "0"


def _coord_callables(spec):
    n, m = spec.n, spec.m

    def coord(idx):
        if idx < n:
            return lambda p: p.x[idx]
        return lambda p: p.xi[idx - n]

    return [coord(i) for i in range(n + m)]


def _pb_oracle(spec, fc, gc, p):
    """Poisson bracket of numeric callables via Richardson-extrapolated
    central differences (independent of the dual-number machinery)."""
    n, m = spec.n, spec.m

    def partials(fn):
        dx = np.empty(n)
        dxi = np.empty(m)
        for kind, out, dim in (("x", dx, n), ("xi", dxi, m)):
            for i in range(dim):
                def at(delta):
                    x = list(p.x)
                    xi = list(p.xi)
                    if kind == "x":
                        x[i] += delta
                    else:
                        xi[i] += delta
                    return fn(PhasePoint.of(x, xi))

                h = 5e-3
                d1 = (at(h) - at(-h)) / (2 * h)
                d2 = (at(h / 2) - at(-h / 2)) / h
                out[i] = (4 * d2 - d1) / 3
        return dx, dxi

    fx, fxi = partials(fc)
    gx, gxi = partials(gc)
    rho = spec.rho_at(p.x)
    c = spec.c_at(p.x)
    xi = np.asarray(p.xi)
    return float(
        fx @ rho @ gxi
        - gx @ rho @ fxi
        - np.einsum("gab,g,a,b->", c, xi, fxi, gxi)
    )


@_check("poisson.jacobi_vs_jacobiator", 1e-8)
def _poi_jacobi(rng):
    worst = 0.0
    for spec, expect_zero in (
        (lib.tangent(2), True),
        (lib.so3_action(), True),
        (lib.heisenberg_projected(), False),
    ):
        n, m = spec.n, spec.m
        names = [f"x{i + 1}" for i in range(n)] + [f"xi{a + 1}" for a in range(m)]
        coord_fns = [spec.phase_function(nm) for nm in names]
        calls = _coord_callables(spec)

        def inner_exact(a, b):
            txt = _coord_bracket_text(spec, a, b)
            e = spec.phase_function(txt)
            return e, lambda p: evaluate(e, poi.phase_env(spec, p))

        saw_nonzero = False
        triples = [
            (a, b, c)
            for a in range(n + m)
            for b in range(a + 1, n + m)
            for c in range(b + 1, n + m)
        ]
        for _ in range(3):
            p = _random_phase_point(rng, spec)
            for (a, b, c) in triples:
                defect = 0.0
                oracle = 0.0
                for (i, j, k) in ((a, b, c), (b, c, a), (c, a, b)):
                    e_in, c_in = inner_exact(i, j)
                    defect += poi.poisson_bracket(spec, e_in, coord_fns[k], p)
                    oracle += _pb_oracle(spec, c_in, calls[k], p)
                worst = max(worst, abs(defect - oracle))
                if expect_zero:
                    worst = max(worst, abs(defect))
                elif abs(defect) > 1e-6:
                    saw_nonzero = True
        if not expect_zero and not saw_nonzero:
            worst = max(worst, 1.0)
    return worst


# ---------------------------------------------------------------------------
# mechanics


@_check("mechanics.legendre_hamilton", 1e-6)
def _mech_leg_ham(rng):
    worst = 0.0
    cases = [
        (lib.tangent(2, V="0.5*(x1^2 + 0.3*x2^2)"), "0.5*(u1^2 + u2^2)", "0.5*(xi1^2 + xi2^2)"),
        (
            lib.tangent(
                2,
                g=[["2", "0"], ["0", "0.5"]],
                V="0.25*x1^2*x2^2",
            ),
            "0.5*(2*u1^2 + 0.5*u2^2)",
            "0.5*(xi1^2/2 + xi2^2/0.5)",
        ),
    ]
    for spec, ktxt, khtxt in cases:
        vtxt = to_string(spec.V)
        L = spec.lagrangian(f"{ktxt} - ({vtxt})")
        h = spec.phase_function(f"{khtxt} + ({vtxt})")
        x0 = rng.uniform(-0.5, 0.5, spec.n)
        u0 = rng.uniform(-0.5, 0.5, spec.m)
        el = mech.integrate_el(spec, L, VelPoint.of(x0, u0), 1.0, 1e-3)
        p0 = mech.legendre(spec, L, VelPoint.of(x0, u0))
        ham = poi.integrate_hamilton(spec, h, p0, 1.0, 1e-3)
        n, m = spec.n, spec.m
        for row_el, row_h in zip(el.rows, ham.rows):
            vp = VelPoint.of(row_el[:n], row_el[n : n + m])
            p = mech.legendre(spec, L, vp)
            pushed = np.array([*p.x, *p.xi])
            worst = max(
                worst,
                float(np.linalg.norm(pushed - np.asarray(row_h[: n + m]))),
            )
    return worst


@_check("mechanics.energy_drift", 1e-8)
def _mech_energy(rng):
    spec = lib.so3_zero_anchor([1.0, 2.0, 3.0])
    L = spec.lagrangian("0.5*(u1^2 + 2*u2^2 + 3*u3^2)")
    traj = mech.integrate_el(spec, L, VelPoint.of([0.0], [0.4, 0.3, -0.5]), 1.0, 1e-3)
    hcol = traj.array()[:, -1]
    return float(np.max(np.abs(hcol - hcol[0])))


@_check("mechanics.spray_matches_el", 1e-9)
def _mech_spray(rng):
    worst = 0.0
    for _ in range(4):
        spec = lib.random_spec(rng, nmax=3, mmax=3, with_metric=True)
        L = mech.riemannian_lagrangian(spec)
        for _ in range(25):
            vp = VelPoint.of(
                rng.uniform(-1, 1, spec.n), rng.uniform(-1, 1, spec.m)
            )
            x1, u1 = mech.el_field(spec, L, vp)
            x2, u2 = mech.riemannian_spray(spec, vp)
            worst = max(
                worst,
                float(np.max(np.abs(u1 - u2))),
                float(np.max(np.abs(x1 - x2))),
            )
    return worst


@_check("mechanics.admissibility", 0.0)
def _mech_admissibility(rng):
    spec = lib.tangent(2, V="0.5*x1^2")
    L = spec.lagrangian("0.5*(u1^2 + u2^2) - 0.5*x1^2")
    traj = mech.integrate_el(spec, L, VelPoint.of([0.3, 0.1], [0.0, 0.2]), 0.1, 1e-2)
    return float(traj.meta["admissibility_defect"])


def _heisenberg_frame(spec3):
    return [
        spec3.section(["1", "0", "x2"]),
        spec3.section(["0", "1", "0"]),
    ]


@_check("mechanics.constrained_energy", 1e-8)
def _mech_constrained_energy(rng):
    flat = [["1" if i == j else "0" for j in range(3)] for i in range(3)]
    spec = lib.tangent(3, g=flat, V="0.1*(x1^2 + x3^2)")
    sys = mech.constrain(spec, _heisenberg_frame(spec))
    L = mech.riemannian_lagrangian(spec)
    traj = sys.integrate_el(
        L, VelPoint.of([0.2, -0.1, 0.3], [0.4, 0.2]), 1.0, 1e-3
    )
    hcol = traj.array()[:, -1]
    return float(np.max(np.abs(hcol - hcol[0])))


@_check("mechanics.constrained_full_frame", 1e-12)
def _mech_constrained_full(rng):
    g = [["2", "0.1", "0"], ["0.1", "1", "0"], ["0", "0", "1.5"]]
    spec = lib.tangent(3, g=g, V="0.2*x1*x2")
    frame = [spec.basis_section(a) for a in range(3)]
    sys = mech.constrain(spec, frame)
    L = mech.riemannian_lagrangian(spec)
    worst = 0.0
    for _ in range(10):
        vp = VelPoint.of(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
        x1, u1 = mech.el_field(spec, L, vp)
        x2, u2 = sys.el_field(L, vp)
        worst = max(worst, float(np.max(np.abs(u1 - u2))))
        worst = max(worst, float(np.max(np.abs(x1 - x2))))
        x3, u3 = mech.riemannian_spray(spec, vp)
        x4, u4 = sys.riemannian_spray(vp)
        worst = max(worst, float(np.max(np.abs(u3 - u4))))
    return worst


# ---------------------------------------------------------------------------
# hj


@_check("hj.two_way", 0.0)
def _hj_two_way(rng):
    violations = 0
    spec = lib.tangent(2)
    for _ in range(10):
        if rng.random() < 0.5:
            a = rng.uniform(-1, 1, 2)
            omega = spec.dual_section([str(a[0]), str(a[1])])
            h = spec.phase_function("0.5*(xi1^2 + xi2^2)")
        else:
            amat = rng.uniform(-0.5, 0.5, (2, 2))
            amat = 0.5 * (amat + amat.T)
            b = rng.uniform(-0.5, 0.5, 2)
            comps = [
                f"{amat[i, 0]}*x1 + {amat[i, 1]}*x2 + {b[i]}" for i in range(2)
            ]
            omega = spec.dual_section(comps)
            h = spec.phase_function("0.5*(xi1^2 + xi2^2) + 0.1*xi1")
        x0 = rng.uniform(-0.5, 0.5, 2)
        rep = hjmod.hj_equivalence_check(spec, h, omega, x0, 0.5, 1e-3)
        if rep.closedness_defect < 1e-8:
            if rep.hj_defect < 1e-8 and rep.lift_deviation > 1e-5:
                violations += 1
            if rep.lift_deviation < 1e-8 and rep.hj_defect > 1e-4:
                violations += 1
    return float(violations)


@_check("hj.constant_composite", 1e-12)
def _hj_constant(rng):
    spec = lib.tangent(2)
    h = spec.phase_function("0.5*(xi1^2 + xi2^2)")
    omega = spec.dual_section(["0.7", "-0.3"])
    pts = [rng.uniform(-1, 1, 2) for _ in range(20)]
    return hjmod.hj_defect(spec, h, omega, pts)


@_check("hj.determinism", 0.0)
def _hj_determinism(rng):
    spec = lib.tangent(2)
    h = spec.phase_function("0.5*(xi1^2 + xi2^2) + 0.2*x1*xi2")
    omega = spec.dual_section(["0.3*x1", "0.1*x2"])
    x0 = rng.uniform(-0.5, 0.5, 2)
    r1 = hjmod.hj_equivalence_check(spec, h, omega, x0, 0.2, 1e-2)
    r2 = hjmod.hj_equivalence_check(spec, h, omega, x0, 0.2, 1e-2)
    return 0.0 if r1 == r2 else 1.0


# ---------------------------------------------------------------------------
# snake


def _random_config(rng, d, N, margin=1e-3):
    while True:
        u = rng.normal(size=(N, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        cfg = snk.SnakeConfig.of(d, N, [1.0] * N, u)
        if snk.singularity_margin(cfg) > margin:
            return cfg


@_check("snake.tangential", 1e-13)
def _snk_tangential(rng):
    worst = 0.0
    for _ in range(10):
        cfg = _random_config(rng, 3, 5)
        u = cfg.matrix()
        for i in range(3):
            e = snk.e_field(cfg, i)
            worst = max(worst, float(np.max(np.abs(np.sum(e * u, axis=1)))))
    return worst


@_check("snake.horizontal", 1e-10)
def _snk_horizontal(rng):
    worst = 0.0
    for _ in range(20):
        cfg = _random_config(rng, 3, 5, margin=1e-2)
        cdot = rng.uniform(-1, 1, 3)
        v, lam = snk.horizontal_velocity(cfg, cdot)
        u = cfg.matrix()
        l = cfg.length_array()
        worst = max(worst, float(np.max(np.abs(l @ v - cdot))))
        worst = max(worst, float(np.max(np.abs(np.sum(v * u, axis=1)))))
        # minimality against random feasible tangential perturbations
        vnorm = float(np.sum(l * np.sum(v * v, axis=1)))
        for _ in range(5):
            w = rng.normal(size=(5, 3))
            w -= np.sum(w * u, axis=1, keepdims=True) * u
            resid = l @ w
            wc, _ = snk.horizontal_velocity(cfg, resid)
            w = w - wc
            pnorm = float(np.sum(l * np.sum((v + w) * (v + w), axis=1)))
            worst = max(worst, max(vnorm - pnorm, 0.0))
    return worst


def _straight_charm(rng, t_end=1.0, step=1e-3):
    cfg = _random_config(rng, 3, 5, margin=1e-1)
    e0 = snk.end_map(cfg)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    exprs = [f"{float(e0[j])!r} + {float(0.5 * direction[j])!r}*t" for j in range(3)]
    head = snk.HeadCurve(exprs=exprs)
    return cfg, head, snk.charm(cfg, head, t_end, step)


@_check("snake.charm_unit_norm", 1e-9)
def _snk_charm_norm(rng):
    cfg, head, traj = _straight_charm(rng, t_end=0.5, step=2e-3)
    N, d = traj.meta["N"], traj.meta["d"]
    worst = 0.0
    for row in traj.rows:
        u = np.asarray(row[: N * d]).reshape(N, d)
        worst = max(worst, float(np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0))))
    return worst


@_check("snake.control_psd", 1e-12)
def _snk_control(rng):
    worst = 0.0
    for _ in range(10):
        cfg = _random_config(rng, 3, 4)
        a = snk.control_operator(cfg)
        worst = max(worst, float(np.max(np.abs(a - a.T))))
        worst = max(worst, max(0.0, -float(np.linalg.eigvalsh(a)[0])))
    u0 = rng.normal(size=3)
    u0 /= np.linalg.norm(u0)
    colinear = snk.SnakeConfig.of(3, 4, [1.0] * 4, [u0, -u0, u0, u0])
    worst = max(worst, abs(snk.singularity_margin(colinear)))
    return worst


@_check("snake.bracket_relation", 1e-5)
def _snk_bracket(rng):
    worst = 0.0
    for _ in range(20):
        cfg = _random_config(rng, 4, 3)
        for i in range(4):
            for j in range(i + 1, 4):
                worst = max(worst, snk.snake_bracket_defect(cfg, i, j))
    return worst


@_check("snake.triple_relation", 1e-4)
def _snk_triple(rng):
    """[E_i,[E_j,E_k]] = s^2 (delta_ij E_k - delta_ik E_j), finite differences."""
    s = snk.bracket_sign()
    h = 1e-4
    ek = snk.e_field_kernel
    worst = 0.0

    def inner(mat, j, k):
        mat = np.asarray(mat, float)
        ej = ek(mat, j)
        ekv = ek(mat, k)
        dk = (ek(mat + h * ej, k) - ek(mat - h * ej, k)) / (2 * h)
        dj = (ek(mat + h * ekv, j) - ek(mat - h * ekv, j)) / (2 * h)
        return dk - dj

    for _ in range(5):
        cfg = _random_config(rng, 3, 2)
        u = cfg.matrix()
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    if j == k:
                        continue
                    xi = ek(u, i)
                    lhs = (
                        inner(u + h * xi, j, k) - inner(u - h * xi, j, k)
                    ) / (2 * h)
                    din = inner(u, j, k)
                    lhs -= (ek(u + h * din, i) - ek(u - h * din, i)) / (2 * h)
                    rhs = np.zeros_like(u)
                    if i == j:
                        rhs += ek(u, k)
                    if i == k:
                        rhs -= ek(u, j)
                    rhs *= s * s
                    dots = np.sum(lhs * u, axis=1, keepdims=True)
                    proj = lhs - dots * u
                    worst = max(worst, float(np.max(np.abs(proj - rhs))))
    return worst


@_check("snake.g_jacobi", 1e-12)
def _snk_gjacobi(rng):
    worst = 0.0
    d = 6
    npairs = d * (d - 1) // 2
    for _ in range(1000):
        a, b, c = (
            snk.GVector.of(rng.uniform(-1, 1, d), rng.uniform(-1, 1, npairs))
            for _ in range(3)
        )
        t1 = snk.g_bracket(snk.g_bracket(a, b), c)
        t2 = snk.g_bracket(snk.g_bracket(b, c), a)
        t3 = snk.g_bracket(snk.g_bracket(c, a), b)
        sig = np.asarray(t1.sigma) + np.asarray(t2.sigma) + np.asarray(t3.sigma)
        xi = np.asarray(t1.xi) + np.asarray(t2.xi) + np.asarray(t3.xi)
        worst = max(worst, float(np.max(np.abs(sig))), float(np.max(np.abs(xi))))
    return worst


@_check("snake.extremal_residuals", 1e-6)
def _snk_extremal(rng):
    d = 3
    npairs = d * (d - 1) // 2
    s0 = rng.uniform(-1, 1, d)
    sd = rng.uniform(-1, 1, d)
    x0 = rng.uniform(-1, 1, npairs)
    xd = rng.uniform(-1, 1, npairs)
    dt = 1e-3
    ts = np.arange(0.0, 1.0 + dt / 2, dt)
    sig = np.array([snk.extremal_regular(s0, sd, x0, xd, t)[0] for t in ts])
    xi = np.array([snk.extremal_regular(s0, sd, x0, xd, t)[1] for t in ts])
    sig_dd = (sig[2:] - 2 * sig[1:-1] + sig[:-2]) / dt**2
    xi_dd = (xi[2:] - 2 * xi[1:-1] + xi[:-2]) / dt**2
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    target = np.array([sd[i] * sd[j] for (i, j) in pairs])
    worst = float(np.max(np.abs(sig_dd)))
    worst = max(worst, float(np.max(np.abs(xi_dd - target))))
    return worst


# ---------------------------------------------------------------------------
# fault injection


def corrupted_report(seed):
    """Run the bracket invariants against a spec whose raw structure-function
    table deliberately breaks antisymmetry; failures are the expected result."""
    rng = np.random.default_rng(seed)
    spec = lib.tangent(2)
    bad = dict(spec.C)
    bad[(0, 0, 1)] = spec.parse_base("1")
    bad[(0, 1, 0)] = spec.parse_base("1")  # breaks C^g_ab = -C^g_ba
    spec._c_override = bad
    s1 = lib.random_section(rng, spec)
    s2 = lib.random_section(rng, spec)
    worst_anti = 0.0
    for _ in range(10):
        x = rng.uniform(-1, 1, 2)
        v = alg.bracket(spec, s1, s2, x) + alg.bracket(spec, s2, s1, x)
        worst_anti = max(worst_anti, float(np.max(np.abs(v))))
    checks = [
        {
            "name": "algebroid.antisymmetry[corrupted]",
            "defect": worst_anti,
            "threshold": 1e-13,
            "pass": worst_anti <= 1e-13,
        }
    ]
    return {"seed": int(seed), "checks": checks, "all_pass": all(c["pass"] for c in checks)}
