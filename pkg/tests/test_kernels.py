import os
import subprocess
import sys

import numpy as np
import pytest

from qichan import kernels


def _simplex_dist(p):
    return max(abs(p.sum(axis=1).max() - 1), abs(p.sum(axis=1).min() - 1), max(0.0, -p.min()))


class TestSimplexProjection:
    def test_points_land_on_simplex(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal((5, 6, 3)) * 3
        p = kernels._project_columns_simplex_numpy(v)
        cols = p.sum(axis=1)
        assert np.allclose(cols, 1.0, atol=1e-12)
        assert p.min() >= 0

    def test_idempotent_on_simplex(self):
        rng = np.random.default_rng(1)
        v = rng.random((4, 5, 2))
        v /= v.sum(axis=1, keepdims=True)
        p = kernels._project_columns_simplex_numpy(v)
        assert np.allclose(p, v, atol=1e-12)

    def test_known_projection(self):
        v = np.array([[[2.0], [0.0]]])  # -> (1, 0)
        p = kernels._project_columns_simplex_numpy(v)
        assert np.allclose(p[0, :, 0], [1.0, 0.0])
        v = np.array([[[0.6], [0.6]]])  # symmetric -> (0.5, 0.5)
        p = kernels._project_columns_simplex_numpy(v)
        assert np.allclose(p[0, :, 0], [0.5, 0.5])


class TestFeasibilitySolver:
    def _problem(self, seed, feasible):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((6, 4))
        if feasible:
            p_true = rng.random((3, 4))
            p_true /= p_true.sum(axis=0, keepdims=True)
            x = p_true @ g.T
        else:
            x = rng.standard_normal((3, 6)) * 4
        return g, x[None, :, :]

    @pytest.mark.parametrize("seed", range(8))
    def test_recovers_feasible_numpy(self, seed):
        g, x = self._problem(seed, feasible=True)
        p, res = kernels.solve_product_simplex_lsq_numpy(g, x, hs_tol=1e-9)
        assert res[0] <= 1e-8
        assert _simplex_dist(p[0].T) < 1e-9

    @pytest.mark.parametrize("seed", range(8))
    def test_backends_agree(self, seed):
        if not kernels.NUMBA_AVAILABLE:
            pytest.skip("numba disabled")
        g, x = self._problem(seed, feasible=True)
        p1, r1 = kernels.solve_product_simplex_lsq_numpy(g, x, hs_tol=1e-9)
        p2, r2 = kernels.solve_product_simplex_lsq_numba(g, x, hs_tol=1e-9)
        assert r1[0] <= 1e-8 and r2[0] <= 1e-8
        assert np.abs(p1 - p2).max() < 1e-5

    def test_infeasible_reports_nonzero_floor(self):
        g, x = self._problem(3, feasible=False)
        p, res = kernels.solve_product_simplex_lsq_numpy(g, x, max_iter=4000)
        assert res[0] > 1e-3
        assert _simplex_dist(p[0].T) < 1e-9

    def test_batched_matches_single(self):
        g, x1 = self._problem(11, feasible=True)
        _, x2 = self._problem(12, feasible=True)
        batch = np.concatenate([x1, x2])
        p_b, r_b = kernels.solve_product_simplex_lsq_numpy(g, batch, hs_tol=1e-9)
        p_1, r_1 = kernels.solve_product_simplex_lsq_numpy(g, x1, hs_tol=1e-9)
        assert abs(r_b[0] - r_1[0]) < 1e-6
        assert np.abs(p_b[0] - p_1[0]).max() < 1e-4


class TestBlahutArimoto:
    def test_identity_channel_bit(self):
        c, r, hist = kernels.blahut_arimoto_numpy(np.eye(2))
        assert abs(c - 1.0) < 1e-9
        assert np.allclose(r, [0.5, 0.5])

    def test_constant_channel_zero(self):
        c, _, _ = kernels.blahut_arimoto_numpy(np.array([[0.3, 0.7], [0.3, 0.7]]))
        assert abs(c) < 1e-12

    def test_bsc_closed_form(self):
        f = 0.25
        h2 = -(f * np.log2(f) + (1 - f) * np.log2(1 - f))
        pyx = np.array([[1 - f, f], [f, 1 - f]])
        c, _, _ = kernels.blahut_arimoto_numpy(pyx, tol=1e-14)
        assert abs(c - (1 - h2)) < 1e-8

    @pytest.mark.parametrize("seed", range(6))
    def test_monotone_iterates(self, seed):
        rng = np.random.default_rng(seed)
        pyx = rng.random((5, 4)) + 0.01
        pyx /= pyx.sum(axis=1, keepdims=True)
        _, _, hist = kernels.blahut_arimoto_numpy(pyx, tol=1e-14)
        assert np.all(np.diff(hist) >= -1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_backends_agree(self, seed):
        if not kernels.NUMBA_AVAILABLE:
            pytest.skip("numba disabled")
        rng = np.random.default_rng(seed)
        pyx = rng.random((4, 6)) + 0.01
        pyx /= pyx.sum(axis=1, keepdims=True)
        c1, r1, _ = kernels.blahut_arimoto_numpy(pyx, tol=1e-13)
        c2, r2, _ = kernels.blahut_arimoto_numba(pyx, tol=1e-13)
        assert abs(c1 - c2) < 1e-8
        assert np.abs(r1 - r2).max() < 1e-5


class TestBackendSelection:
    def test_env_flag_forces_numpy(self):
        env = dict(os.environ, **{kernels.PURE_NUMPY_ENV: "1"})
        out = subprocess.run(
            [sys.executable, "-c", "from qichan import kernels; print(kernels.BACKEND)"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert out.returncode == 0
        assert out.stdout.strip() == "numpy"

    def test_default_backend_reported(self):
        assert kernels.BACKEND in ("numba", "numpy")
        if kernels.NUMBA_AVAILABLE:
            assert kernels.BACKEND == "numba"
