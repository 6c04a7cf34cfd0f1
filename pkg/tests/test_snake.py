from pathlib import Path

import numpy as np
import pytest

from algmech.snake import (
    GVector,
    HeadCurve,
    SingularConfigurationError,
    SnakeConfig,
    SnakeConfigError,
    charm,
    control_operator,
    curve_energy,
    e_field,
    end_map,
    extremal_regular,
    extremal_singular,
    g_bracket,
    horizontal_velocity,
    load_snake,
    singularity_margin,
    snake_bracket_defect,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _random_config(rng, d, N, min_margin=1e-3):
    while True:
        u = rng.normal(size=(N, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        cfg = SnakeConfig.of(d, N, rng.uniform(0.5, 2.0, N), u)
        if singularity_margin(cfg) > min_margin:
            return cfg


class TestConfig:
    def test_non_unit_rejected(self):
        with pytest.raises(SnakeConfigError):
            SnakeConfig.of(2, 1, [1.0], [[1.0, 1.0]])

    def test_bad_lengths_rejected(self):
        with pytest.raises(SnakeConfigError):
            SnakeConfig.of(2, 2, [1.0, -0.5], [[1, 0], [0, 1]])

    def test_end_map(self):
        cfg = SnakeConfig.of(2, 2, [1.0, 2.0], [[1, 0], [0, 1]])
        assert np.allclose(end_map(cfg), [1.0, 2.0])


class TestFields:
    def test_e_field_tangential(self):
        rng = np.random.default_rng(0)
        cfg = _random_config(rng, 3, 4)
        u = cfg.matrix()
        for i in range(3):
            v = e_field(cfg, i)
            assert v.shape == (4, 3)
            assert np.max(np.abs(np.sum(v * u, axis=1))) < 1e-13

    def test_e_field_explicit(self):
        cfg = SnakeConfig.of(2, 1, [1.0], [[0.0, 1.0]])
        # (I - uu^T) e1 = e1 when u = e2
        assert np.allclose(e_field(cfg, 0), [[1.0, 0.0]])
        assert np.allclose(e_field(cfg, 1), [[0.0, 0.0]])

    def test_axis_out_of_range(self):
        cfg = SnakeConfig.of(2, 1, [1.0], [[1.0, 0.0]])
        with pytest.raises(IndexError):
            e_field(cfg, 2)


class TestControlOperator:
    def test_orthogonal_pair(self):
        cfg = SnakeConfig.of(3, 2, [1.0, 1.0], [[1, 0, 0], [0, 1, 0]])
        assert np.allclose(control_operator(cfg), np.diag([1.0, 1.0, 2.0]))

    def test_symmetry_and_psd(self):
        rng = np.random.default_rng(1)
        cfg = _random_config(rng, 4, 5)
        a = control_operator(cfg)
        assert np.allclose(a, a.T)
        assert np.linalg.eigvalsh(a)[0] >= -1e-12

    def test_margin_rotation_invariant(self):
        rng = np.random.default_rng(2)
        cfg = _random_config(rng, 3, 4)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        rot = cfg.with_matrix(cfg.matrix() @ q.T)
        assert abs(singularity_margin(cfg) - singularity_margin(rot)) < 1e-12


class TestHorizontal:
    def test_orthogonal_pair_lift(self):
        cfg = SnakeConfig.of(3, 2, [1.0, 1.0], [[1, 0, 0], [0, 1, 0]])
        v, lam = horizontal_velocity(cfg, [0.0, 0.0, 1.0])
        assert np.allclose(lam, [0.0, 0.0, 0.5])
        assert np.allclose(v, [[0, 0, 0.5], [0, 0, 0.5]])

    def test_reproduces_end_velocity(self):
        rng = np.random.default_rng(3)
        cfg = _random_config(rng, 4, 6)
        cdot = rng.normal(size=4)
        v, _ = horizontal_velocity(cfg, cdot)
        assert np.max(np.abs(cfg.length_array() @ v - cdot)) < 1e-10
        assert np.max(np.abs(np.sum(v * cfg.matrix(), axis=1))) < 1e-12

    def test_minimal_norm(self):
        rng = np.random.default_rng(4)
        cfg = _random_config(rng, 3, 4)
        lengths = cfg.length_array()
        u = cfg.matrix()
        cdot = rng.normal(size=3)
        v, _ = horizontal_velocity(cfg, cdot)
        base = np.sum(lengths * np.sum(v * v, axis=1))
        for _ in range(50):
            w = rng.normal(size=(4, 3)) * 0.1
            w -= np.sum(w * u, axis=1, keepdims=True) * u  # stay tangential
            w -= horizontal_velocity(cfg, lengths @ w)[0]  # stay in the kernel
            cand = v + w
            assert np.sum(lengths * np.sum(cand * cand, axis=1)) >= base - 1e-12

    def test_colinear_singular(self):
        cfg = SnakeConfig.of(2, 2, [1.0, 1.0], [[1, 0], [1, 0]])
        with pytest.raises(SingularConfigurationError):
            horizontal_velocity(cfg, [1.0, 0.0])


class TestCharm:
    def test_stationary_head(self):
        cfg = SnakeConfig.of(3, 2, [1.0, 1.0], [[1, 0, 0], [0, 1, 0]])
        head = HeadCurve(exprs=["1", "1", "0"])
        traj = charm(cfg, head, 0.5, 1e-2)
        arr = traj.array()
        assert np.max(np.abs(arr[-1, :6] - arr[0, :6])) < 1e-14
        assert np.max(arr[:, -2]) < 1e-14  # track_err
        assert arr[-1, -1] == 0.0  # energy

    def test_tracks_moving_head(self):
        cfg = SnakeConfig.of(3, 2, [1.0, 1.0], [[1, 0, 0], [0, 1, 0]])
        head = HeadCurve(exprs=["1 + 0.3*t", "1 - 0.2*t", "0.1*t"])
        traj = charm(cfg, head, 1.0, 1e-3)
        arr = traj.array()
        assert np.max(arr[:, -2]) < 1e-9
        norms = np.linalg.norm(arr[:, :6].reshape(-1, 2, 3), axis=2)
        assert np.max(np.abs(norms - 1.0)) < 1e-9

    def test_initial_mismatch_rejected(self):
        cfg = SnakeConfig.of(2, 2, [1.0, 1.0], [[1, 0], [0, 1]])
        head = HeadCurve(exprs=["0.5", "0.5"])
        with pytest.raises(SnakeConfigError):
            charm(cfg, head, 1.0, 1e-2)

    def test_starting_singular_rejected(self):
        cfg = SnakeConfig.of(2, 2, [1.0, 1.0], [[1, 0], [1, 0]])
        head = HeadCurve(exprs=["2 + t", "0"])
        with pytest.raises(SingularConfigurationError):
            charm(cfg, head, 1.0, 1e-2)

    def test_energy_quadratic_in_speed(self):
        # same geometric path traversed twice as fast over half the time
        # costs exactly twice the energy
        cfg = SnakeConfig.of(3, 2, [1.0, 1.0], [[1, 0, 0], [0, 1, 0]])
        slow = HeadCurve(exprs=["1 + 0.3*t", "1 - 0.2*t", "0.1*t"])
        fast = HeadCurve(exprs=["1 + 0.6*t", "1 - 0.4*t", "0.2*t"])
        e_slow = curve_energy(charm(cfg, slow, 1.0, 1e-3))
        e_fast = curve_energy(charm(cfg, fast, 0.5, 5e-4))
        assert abs(e_fast - 2.0 * e_slow) < 1e-8
        assert e_slow > 0.0

    def test_energy_column_matches_curve_energy(self):
        cfg = SnakeConfig.of(3, 2, [1.0, 1.0], [[1, 0, 0], [0, 1, 0]])
        head = HeadCurve(exprs=["1 + 0.3*t", "1", "0.2*t"])
        traj = charm(cfg, head, 1.0, 1e-2)
        assert abs(traj.array()[-1, -1] - curve_energy(traj)) < 1e-12

    def test_polyline_head(self):
        cfg = SnakeConfig.of(2, 2, [1.0, 1.0], [[1, 0], [0, 1]])
        head = HeadCurve(samples=[[0.0, 1.0, 1.0], [1.0, 1.2, 1.0]])
        traj = charm(cfg, head, 1.0, 1e-3)
        assert np.max(traj.array()[:, -2]) < 1e-9


class TestBracketRelation:
    def test_random_configs(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            cfg = _random_config(rng, 4, 3)
            for i in range(4):
                for j in range(i + 1, 4):
                    assert snake_bracket_defect(cfg, i, j) < 1e-5

    def test_diagonal_zero(self):
        cfg = SnakeConfig.of(3, 2, [1.0, 1.0], [[1, 0, 0], [0, 1, 0]])
        assert snake_bracket_defect(cfg, 1, 1) == 0.0


class TestGBracket:
    def test_eps_eps(self):
        d = 4
        npairs = d * (d - 1) // 2
        a = GVector.of([1, 0, 0, 0], [0] * npairs)
        b = GVector.of([0, 1, 0, 0], [0] * npairs)
        out = g_bracket(a, b)
        assert np.allclose(out.sigma, 0.0)
        # pair (1,2) is the first lexicographic pair
        expect = np.zeros(npairs)
        expect[0] = 1.0
        assert np.allclose(out.xi, expect)

    def test_eps_omega(self):
        d = 3
        eps1 = GVector.of([1, 0, 0], [0, 0, 0])
        om12 = GVector.of([0, 0, 0], [1, 0, 0])
        out = g_bracket(eps1, om12)
        assert np.allclose(out.sigma, [0, 1, 0])
        assert np.allclose(out.xi, 0.0)

    def test_antisymmetry_and_jacobi(self):
        rng = np.random.default_rng(6)
        d = 5
        npairs = d * (d - 1) // 2

        def rand():
            return GVector.of(rng.normal(size=d), rng.normal(size=npairs))

        def add(p, q, r):
            return np.concatenate(
                [np.asarray(p.sigma) + np.asarray(q.sigma) + np.asarray(r.sigma),
                 np.asarray(p.xi) + np.asarray(q.xi) + np.asarray(r.xi)]
            )

        for _ in range(20):
            a, b, c = rand(), rand(), rand()
            ab = g_bracket(a, b)
            ba = g_bracket(b, a)
            assert np.max(np.abs(np.asarray(ab.sigma) + np.asarray(ba.sigma))) < 1e-12
            assert np.max(np.abs(np.asarray(ab.xi) + np.asarray(ba.xi))) < 1e-12
            jac = add(
                g_bracket(a, g_bracket(b, c)),
                g_bracket(b, g_bracket(c, a)),
                g_bracket(c, g_bracket(a, b)),
            )
            assert np.max(np.abs(jac)) < 1e-10


class TestExtremals:
    def test_regular_closed_form(self):
        sigma, xi = extremal_regular([0, 0], [1, 1], [0], [0], 2.0)
        assert np.allclose(sigma, [2.0, 2.0])
        assert abs(xi[0] - 2.0) < 1e-14

    def test_regular_residuals(self):
        rng = np.random.default_rng(7)
        d = 3
        s0, sd = rng.normal(size=d), rng.normal(size=d)
        x0, xd = rng.normal(size=3), rng.normal(size=3)
        h = 1e-4
        for t in (0.3, 1.1, 2.7):
            sm, xm = extremal_regular(s0, sd, x0, xd, t - h)
            sc, xc = extremal_regular(s0, sd, x0, xd, t)
            sp, xp = extremal_regular(s0, sd, x0, xd, t + h)
            sigma_acc = (sp - 2 * sc + sm) / h**2
            xi_acc = (xp - 2 * xc + xm) / h**2
            assert np.max(np.abs(sigma_acc)) < 1e-6
            # pair-indexed target: xidd_{ij} = sigmadot_i sigmadot_j
            target = np.array([sd[0] * sd[1], sd[0] * sd[2], sd[1] * sd[2]])
            assert np.max(np.abs(xi_acc - target)) < 1e-6

    def test_singular_is_linear(self):
        sigma = extremal_singular([1.0, 2.0], [0.5, -1.0], 4.0)
        assert np.allclose(sigma, [3.0, -2.0])


class TestFallbackKernels:
    def test_fallback_matches_compiled(self):
        import json as jsonlib
        import os
        import subprocess
        import sys

        from algmech._snake_kernels import horizontal_kernel

        lengths = np.array([1.0, 0.5, 2.0])
        u = np.array([[1.0, 0, 0], [0, 1.0, 0], [0.6, 0.8, 0]])
        cdot = np.array([0.3, -0.2, 0.5])
        v, lam, resid = horizontal_kernel(lengths, u, cdot)
        script = (
            "import json, numpy as np\n"
            "from algmech._snake_kernels import horizontal_kernel, USING_NUMBA\n"
            "assert not USING_NUMBA\n"
            "v, lam, resid = horizontal_kernel("
            "np.array([1.0, 0.5, 2.0]),"
            "np.array([[1.0, 0, 0], [0, 1.0, 0], [0.6, 0.8, 0]]),"
            "np.array([0.3, -0.2, 0.5]))\n"
            "print(json.dumps([v.tolist(), lam.tolist(), float(resid)]))\n"
        )
        env = dict(os.environ, ALGMECH_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", script], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        fv, flam, fresid = jsonlib.loads(out.stdout)
        assert np.max(np.abs(np.array(fv) - v)) < 1e-15
        assert np.max(np.abs(np.array(flam) - lam)) < 1e-15
        assert abs(fresid - resid) < 1e-15


class TestLoad:
    def test_snake5(self):
        cfg, head = load_snake(CONFIGS / "snake5.json")
        assert (cfg.d, cfg.N) == (3, 5)
        assert head is not None
        assert np.linalg.norm(end_map(cfg) - head.value(0.0)) < 1e-8

    def test_head_dimension_mismatch(self, tmp_path):
        import json

        obj = {
            "d": 2,
            "N": 1,
            "lengths": [1.0],
            "u": [[1.0, 0.0]],
            "head": {"exprs": ["t", "0", "0"]},
        }
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(obj))
        with pytest.raises(SnakeConfigError):
            load_snake(p)
