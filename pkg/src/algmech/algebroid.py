"""Finite-rank anchored bundles over a coordinate patch with an almost Lie
bracket.

An `AlgebroidSpec` holds the anchor table rho[i][alpha], the antisymmetric
structure-function table C[gamma][alpha][beta] (stored strictly upper
triangular in (alpha, beta)), and optionally a fiber metric and a potential,
all as expression fields in the base variables x1..xn.  Operations evaluate
the bracket, the Jacobiator, the Lie derivative and the degree-0/1 almost
exterior differential pointwise.

Evaluation helpers are generic over dual numbers: every table lookup and
section component is a closure over an environment whose values may be
floats or (nested) duals, so derivative-of-bracket quantities come out
exact rather than finite-differenced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .expr import Dual, Expr, directional, parse, second_directional, to_string

__all__ = [
    "AlgebroidSpec",
    "Section",
    "DualSection",
    "SpecError",
    "MetricError",
    "AnchorMismatchError",
    "validate",
    "anchor_apply",
    "bracket",
    "jacobiator",
    "d_rho_0",
    "d_rho_0_fn",
    "lie_derivative_0",
    "d_rho_1",
    "d_rho_1_fn",
    "reconstruct_from_differential",
    "bracket_difference",
    "differential_from_spec",
    "load_spec",
    "spec_from_dict",
]


class SpecError(Exception):
    pass


class MetricError(SpecError):
    pass


class AnchorMismatchError(SpecError):
    pass


@dataclass(frozen=True)
class Section:
    comps: tuple


@dataclass(frozen=True)
class DualSection:
    comps: tuple


@dataclass(eq=False)
class AlgebroidSpec:
    n: int
    m: int
    rho: tuple  # n rows of m Expr
    C: dict  # (gamma, alpha, beta) with alpha < beta -> Expr
    g: tuple | None = None  # m x m Expr grid, structurally symmetric
    V: Expr | None = None
    _cache: dict = field(default_factory=dict, repr=False)
    _c_override: dict | None = field(default=None, repr=False)  # test hook

    @property
    def base_vars(self):
        return tuple(f"x{i + 1}" for i in range(self.n))

    @property
    def fiber_vars(self):
        return tuple(f"u{a + 1}" for a in range(self.m))

    @property
    def dual_vars(self):
        return tuple(f"xi{a + 1}" for a in range(self.m))

    # -- construction helpers -------------------------------------------------

    @classmethod
    def build(cls, n, m, rho, C=None, g=None, V=None):
        """Build a spec from string tables (0-based C keys, alpha < beta)."""
        base = tuple(f"x{i + 1}" for i in range(n))
        rho_t = tuple(tuple(parse(s, base) for s in row) for row in rho)
        c_t = {}
        for (gam, a, b), s in (C or {}).items():
            if not (0 <= gam < m and 0 <= a < b < m):
                raise SpecError(f"bad structure-function index ({gam},{a},{b})")
            c_t[(gam, a, b)] = parse(s, base)
        g_t = None
        if g is not None:
            g_t = tuple(tuple(parse(s, base) for s in row) for row in g)
        v_t = parse(V, base) if V is not None else None
        return cls(n=n, m=m, rho=rho_t, C=c_t, g=g_t, V=v_t)

    def parse_base(self, text):
        return parse(text, self.base_vars)

    def section(self, comps):
        return Section(tuple(parse(s, self.base_vars) for s in comps))

    def dual_section(self, comps):
        return DualSection(tuple(parse(s, self.base_vars) for s in comps))

    def phase_function(self, text):
        return parse(text, self.base_vars + self.dual_vars)

    def lagrangian(self, text):
        return parse(text, self.base_vars + self.fiber_vars)

    def basis_section(self, a):
        return self.section(["1" if b == a else "0" for b in range(self.m)])

    def basis_dual_section(self, a):
        return self.dual_section(["1" if b == a else "0" for b in range(self.m)])

    # -- pointwise numeric tables (floats, cached per point) ------------------

    def env(self, x):
        return {name: float(v) for name, v in zip(self.base_vars, x)}

    def _tables(self, x):
        key = tuple(float(v) for v in x)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        env = self.env(x)
        rho = np.array(
            [[e.eval_env(env) for e in row] for row in self.rho], dtype=float
        )
        m = self.m
        c = np.zeros((m, m, m))
        if self._c_override is not None:
            for (gam, a, b), e in self._c_override.items():
                c[gam, a, b] = e.eval_env(env)
        else:
            for (gam, a, b), e in self.C.items():
                v = e.eval_env(env)
                c[gam, a, b] = v
                c[gam, b, a] = -v
        gmat = None
        if self.g is not None:
            gmat = np.array(
                [[e.eval_env(env) for e in row] for row in self.g], dtype=float
            )
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = (rho, c, gmat)
        return rho, c, gmat

    def rho_at(self, x):
        return self._tables(x)[0]

    def c_at(self, x):
        return self._tables(x)[1]

    def g_at(self, x):
        gmat = self._tables(x)[2]
        if gmat is None:
            raise MetricError("spec has no metric")
        return gmat

    def v_at(self, x):
        if self.V is None:
            return 0.0
        return self.V.eval_env(self.env(x))

    # -- generic (dual-friendly) evaluation -----------------------------------

    def rho_val(self, env):
        return [[e.eval_env(env) for e in row] for row in self.rho]

    def c_entries(self, env):
        """Upper-triangular structure-function values at a generic env."""
        return {key: e.eval_env(env) for key, e in self.C.items()}


# ---------------------------------------------------------------------------
# Spec files


def spec_from_dict(obj):
    n = int(obj["n"])
    m = int(obj["m"])
    rho = obj["rho"]
    if len(rho) != n or any(len(row) != m for row in rho):
        raise SpecError(f"rho table must be {n}x{m}")
    c = {}
    for entry in obj.get("C", []):
        gam = int(entry["gamma"]) - 1
        a = int(entry["alpha"]) - 1
        b = int(entry["beta"]) - 1
        if a == b:
            raise SpecError("diagonal structure functions are identically zero")
        if a > b:
            a, b = b, a
            c[(gam, a, b)] = f"-({entry['expr']})"
        else:
            c[(gam, a, b)] = entry["expr"]
    g = obj.get("g")
    if g is not None and (len(g) != m or any(len(row) != m for row in g)):
        raise SpecError(f"g table must be {m}x{m}")
    return AlgebroidSpec.build(n, m, rho, c, g, obj.get("V"))


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Validation


def validate(spec, samples=50, seed=0):
    if spec.n < 1 or spec.m < 1:
        raise SpecError("base dimension and fiber rank must be at least 1")
    if len(spec.rho) != spec.n or any(len(row) != spec.m for row in spec.rho):
        raise SpecError(f"rho table must be {spec.n}x{spec.m}")
    if spec.g is not None:
        if len(spec.g) != spec.m or any(len(row) != spec.m for row in spec.g):
            raise SpecError(f"g table must be {spec.m}x{spec.m}")
        for a in range(spec.m):
            for b in range(a + 1, spec.m):
                if to_string(spec.g[a][b]) != to_string(spec.g[b][a]):
                    raise MetricError(
                        f"metric entries ({a + 1},{b + 1}) and ({b + 1},{a + 1}) differ"
                    )
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            x = rng.uniform(-1.0, 1.0, spec.n)
            gmat = spec.g_at(x)
            lam = float(np.linalg.eigvalsh(0.5 * (gmat + gmat.T))[0])
            if lam <= 0.0:
                raise MetricError(
                    f"metric not positive definite at {x.tolist()}: "
                    f"smallest eigenvalue {lam:.3e}"
                )
    return spec


# ---------------------------------------------------------------------------
# Core generic machinery


def _section_fn(s):
    return lambda env: [c.eval_env(env) for c in s.comps]


def _wrap_env(env, seed):
    """Lift every entry one dual level, seeding base variables from `seed`."""
    return {k: Dual(v, seed.get(k, 0.0)) for k, v in env.items()}


def _deriv_part(v):
    return v.b if isinstance(v, Dual) else 0.0


def _vec_directional(fn, env, vec, names):
    """Directional derivative of a generic vector function along `vec`."""
    seed = dict(zip(names, vec))
    out = fn(_wrap_env(env, seed))
    return [_deriv_part(v) for v in out]


def _bracket_val(spec, f1, f2, env):
    """Bracket components at a generic environment.

    f1, f2 map an environment to lists of m scalars; nested duals flow
    through untouched, so this composes with itself for the Jacobiator.
    """
    names = spec.base_vars
    s1 = f1(env)
    s2 = f2(env)
    rho = spec.rho_val(env)
    n, m = spec.n, spec.m
    v1 = [sum(rho[i][a] * s1[a] for a in range(m)) for i in range(n)]
    v2 = [sum(rho[i][a] * s2[a] for a in range(m)) for i in range(n)]
    d2 = _vec_directional(f2, env, v1, names)
    d1 = _vec_directional(f1, env, v2, names)
    out = [d2[g] - d1[g] for g in range(m)]
    for (gam, a, b), e in spec.C.items():
        cval = e.eval_env(env)
        out[gam] = out[gam] + cval * (s1[a] * s2[b] - s1[b] * s2[a])
    if spec._c_override is not None:
        out = [d2[g] - d1[g] for g in range(m)]
        for (gam, a, b), e in spec._c_override.items():
            out[gam] = out[gam] + e.eval_env(env) * s1[a] * s2[b]
    return out


# ---------------------------------------------------------------------------
# Public operations


def anchor_apply(spec, x, u):
    return spec.rho_at(x) @ np.asarray(u, dtype=float)


def bracket(spec, s1, s2, x):
    env = spec.env(x)
    out = _bracket_val(spec, _section_fn(s1), _section_fn(s2), env)
    return np.array([float(v) for v in out])


def jacobiator(spec, s1, s2, s3, x):
    env = spec.env(x)
    f1, f2, f3 = (_section_fn(s) for s in (s1, s2, s3))

    def inner(fa, fb):
        return lambda e: _bracket_val(spec, fa, fb, e)

    total = None
    for fa, fbc in ((f1, inner(f2, f3)), (f2, inner(f3, f1)), (f3, inner(f1, f2))):
        term = _bracket_val(spec, fa, fbc, env)
        total = term if total is None else [t + u for t, u in zip(total, term)]
    return np.array([float(v) for v in total])


def d_rho_0(spec, f, x):
    env = spec.env(x)
    rho = spec.rho_at(x)
    out = np.empty(spec.m)
    for a in range(spec.m):
        seed = dict(zip(spec.base_vars, rho[:, a]))
        out[a] = directional(f, env, seed)[1]
    return out


def lie_derivative_0(spec, s, f, x):
    env = spec.env(x)
    svals = np.array([c.eval_env(env) for c in s.comps], dtype=float)
    return float(d_rho_0(spec, f, x) @ svals)


def d_rho_0_fn(spec, f):
    """(d_rho f) as a generic closure env -> m values (dual-friendly)."""
    names = spec.base_vars
    scalar = lambda e: [f.eval_env(e)]

    def omega_fn(env):
        rho = spec.rho_val(env)
        return [
            _vec_directional(scalar, env, [rho[i][a] for i in range(spec.n)], names)[0]
            for a in range(spec.m)
        ]

    return omega_fn


def d_rho_1_fn(spec, omega_fn, s1, s2, x):
    """d_rho on a 1-form given as a generic closure env -> m values."""
    env = spec.env(x)
    m = spec.m
    rho = spec.rho_at(x)
    w = omega_fn(env)
    a1 = [c.eval_env(env) for c in s1.comps]
    a2 = [c.eval_env(env) for c in s2.comps]
    v1 = rho @ np.array(a1, dtype=float)
    v2 = rho @ np.array(a2, dtype=float)
    names = spec.base_vars

    def pairing(sec):
        comps = sec.comps
        return lambda e: [
            sum(wa * ca.eval_env(e) for wa, ca in zip(omega_fn(e), comps))
        ]

    l1 = _vec_directional(pairing(s2), env, v1, names)[0]
    l2 = _vec_directional(pairing(s1), env, v2, names)[0]
    br = bracket(spec, s1, s2, x)
    return float(l1 - l2 - sum(w[a] * br[a] for a in range(m)))


def d_rho_1(spec, omega, s1, s2, x):
    omega_fn = lambda e: [c.eval_env(e) for c in omega.comps]
    return d_rho_1_fn(spec, omega_fn, s1, s2, x)


def differential_from_spec(spec):
    """Degree-0/1 parts of the almost exterior differential as black boxes."""

    def delta0(f):
        return lambda x: d_rho_0(spec, f, x)

    def delta1(omega):
        return lambda s1, s2, x: d_rho_1(spec, omega, s1, s2, x)

    return delta0, delta1


def reconstruct_from_differential(delta0, delta1, x, n, m):
    """Recover the anchor and structure functions at a point from the
    degree-0/1 parts of an almost exterior differential."""
    base = tuple(f"x{i + 1}" for i in range(n))
    rho = np.empty((n, m))
    for i in range(n):
        coord = parse(base[i], base)
        rho[i, :] = np.asarray(delta0(coord)(x), dtype=float)
    helper = AlgebroidSpec.build(n, m, [["0"] * m for _ in range(n)])
    c = {}
    for gam in range(m):
        eg = helper.basis_dual_section(gam)
        for a in range(m):
            for b in range(a + 1, m):
                c[(gam, a, b)] = -float(delta1(eg)(helper.basis_section(a), helper.basis_section(b), x))
    return rho, c


def _normalized_anchor(spec):
    return tuple(tuple(to_string(e) for e in row) for row in spec.rho)


def bracket_difference(spec_a, spec_b, s1, s2, x):
    if (spec_a.n, spec_a.m) != (spec_b.n, spec_b.m):
        raise AnchorMismatchError("specs have different dimensions")
    if _normalized_anchor(spec_a) != _normalized_anchor(spec_b):
        raise AnchorMismatchError("anchor tables differ")
    return bracket(spec_a, s1, s2, x) - bracket(spec_b, s1, s2, x)
