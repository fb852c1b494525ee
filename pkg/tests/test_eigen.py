"""Extreme generalized eigenvalue solver against the dense oracle."""

import numpy as np
import pytest

from spdcone import (
    EigenOptions,
    EigenStats,
    extreme_pair,
    lambda_max_pencil,
    lambda_min_pencil,
    make_spd,
    random_sparse_spd,
    random_spd,
    spectrum_dense,
)
from spdcone.errors import DimensionMismatch, NoConvergence

from conftest import spd_pair


def iter_opts(seed=0, tol=1e-10):
    return EigenOptions(backend="iterative", seed=seed, tol=tol)


class TestLambdaMax:
    def test_diagonal(self):
        Y = make_spd(np.diag([9.0, 4.0, 1.0]))
        X = make_spd(np.eye(3))
        lam, v, info = lambda_max_pencil(Y, X)
        assert lam == pytest.approx(9.0, abs=1e-12)
        assert info.residual <= 1e-10

    def test_scalar_pencil(self, rng):
        X = random_spd(10, rng)
        Y = X.scaled(3.25)
        for backend in ("dense", "iterative"):
            lam, _, info = lambda_max_pencil(Y, X, EigenOptions(backend=backend, seed=4))
            assert lam == pytest.approx(3.25, rel=1e-10)

    def test_sparse_matches_dense_oracle(self, rng):
        X = random_sparse_spd(200, 0.03, rng)
        Y = random_sparse_spd(200, 0.03, rng)
        lam, _, info = lambda_max_pencil(Y, X, iter_opts(seed=1))
        oracle = spectrum_dense(X, Y).max
        assert info.backend == "iterative"
        assert lam == pytest.approx(oracle, rel=1e-8)

    def test_vector_satisfies_pencil(self, rng):
        X, Y = spd_pair(rng, 30)
        lam, v, _ = lambda_max_pencil(Y, X, iter_opts(seed=2))
        r = np.linalg.norm(Y.dense() @ v - lam * (X.dense() @ v))
        assert r <= 1e-9 * np.linalg.norm(Y.dense() @ v)


class TestLambdaMin:
    def test_diagonal(self):
        Y = make_spd(np.diag([9.0, 4.0, 1.0]))
        X = make_spd(np.eye(3))
        lam, _, info = lambda_min_pencil(Y, X)
        assert lam == pytest.approx(1.0, abs=1e-12)

    def test_scalar_pencil(self, rng):
        X = random_spd(7, rng)
        lam, _, _ = lambda_min_pencil(X.scaled(0.4), X, iter_opts(seed=3))
        assert lam == pytest.approx(0.4, rel=1e-10)

    def test_sparse_matches_dense_oracle(self, rng):
        X = random_sparse_spd(200, 0.03, rng)
        Y = random_sparse_spd(200, 0.03, rng)
        lam, _, _ = lambda_min_pencil(Y, X, iter_opts(seed=5))
        assert lam == pytest.approx(spectrum_dense(X, Y).min, rel=1e-8)


class TestExtremePair:
    def test_examples(self, rng):
        X = make_spd(np.eye(3))
        Y = make_spd(np.diag([9.0, 4.0, 1.0]))
        e = extreme_pair(X, Y)
        assert (e.alpha, e.beta) == (pytest.approx(1.0), pytest.approx(9.0))
        Z = random_spd(5, rng)
        e2 = extreme_pair(Z, Z)
        assert e2.alpha == pytest.approx(1.0, abs=1e-12)
        assert e2.beta == pytest.approx(1.0, abs=1e-12)
        # spectrum of [[2,1],[1,2]] is {1,3}; pencil (I, X) inverts it
        W = make_spd(np.array([[2.0, 1.0], [1.0, 2.0]]))
        e3 = extreme_pair(W, make_spd(np.eye(2)))
        assert e3.alpha == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert e3.beta == pytest.approx(1.0, rel=1e-12)

    def test_inversion_duality(self, rng):
        for seed in range(10):
            X, Y = spd_pair(rng, 12, spread=2.0)
            a = extreme_pair(X, Y, iter_opts(seed=seed)).alpha
            b = extreme_pair(Y, X, iter_opts(seed=seed + 100)).beta
            assert a * b == pytest.approx(1.0, abs=1e-9)

    def test_congruence_invariance(self, rng):
        X, Y = spd_pair(rng, 10)
        A = rng.standard_normal((10, 10))
        e0 = extreme_pair(X, Y)
        e1 = extreme_pair(make_spd(A @ X.dense() @ A.T), make_spd(A @ Y.dense() @ A.T))
        assert e1.alpha == pytest.approx(e0.alpha, rel=1e-8)
        assert e1.beta == pytest.approx(e0.beta, rel=1e-8)

    def test_iterative_matches_dense(self, rng):
        for seed in range(25):
            n = int(rng.integers(2, 65))
            X, Y = spd_pair(rng, n, spread=rng.uniform(0.3, 4.0))
            ed = extreme_pair(X, Y, EigenOptions(backend="dense"))
            ei = extreme_pair(X, Y, iter_opts(seed=seed))
            assert ei.alpha == pytest.approx(ed.alpha, rel=1e-8)
            assert ei.beta == pytest.approx(ed.beta, rel=1e-8)

    def test_monotonicity(self, rng):
        # if Y <= c X in the Loewner order then beta <= c
        X, Y = spd_pair(rng, 8)
        c = spectrum_dense(X, Y).max * 1.000001
        assert np.all(np.linalg.eigvalsh(c * X.dense() - Y.dense()) >= -1e-9)
        assert extreme_pair(X, Y).beta <= c + 1e-9

    def test_auto_backend_selection(self, rng):
        Xs = random_sparse_spd(120, 0.02, rng)
        Ys = random_sparse_spd(120, 0.02, rng)
        assert extreme_pair(Xs, Ys, EigenOptions(seed=1)).backend == "iterative"
        Xd, Yd = spd_pair(rng, 16)
        assert extreme_pair(Xd, Yd).backend == "dense"

    def test_clustered_extreme_accepted(self, rng):
        # a nearly multiple top eigenvalue: only the value matters, so the
        # residual test decides and no deflation is attempted
        X = random_spd(12, rng)
        w, V = np.linalg.eigh(X.dense())
        Xh = (V * np.sqrt(w)) @ V.T
        Q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
        d = np.ones(12)
        d[:2] = [3.0, 3.0 * (1 + 1e-10)]
        D = (Q * d) @ Q.T
        Y = make_spd(Xh @ D @ Xh)
        e = extreme_pair(X, Y, iter_opts(seed=9))
        assert e.beta == pytest.approx(3.0, rel=1e-8)
        assert max(e.residuals) <= 1e-10

    def test_alpha_le_beta(self, rng):
        for seed in range(5):
            X = random_spd(6, rng)
            e = extreme_pair(X, X.scaled(1.7), iter_opts(seed=seed))
            assert 0 < e.alpha <= e.beta

    def test_determinism(self, rng):
        X = random_sparse_spd(150, 0.03, rng)
        Y = random_sparse_spd(150, 0.03, rng)
        e1 = extreme_pair(X, Y, iter_opts(seed=11))
        e2 = extreme_pair(X, Y, iter_opts(seed=11))
        assert e1 == e2

    def test_stats_accumulate(self, rng):
        stats = EigenStats()
        X, Y = spd_pair(rng, 20)
        extreme_pair(X, Y, EigenOptions(backend="iterative", seed=0, stats=stats))
        assert stats.solves == 2 and stats.iterations > 0

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            extreme_pair(random_spd(3, rng), random_spd(5, rng))

    def test_no_convergence_payload(self, rng):
        X, Y = spd_pair(rng, 40, spread=3.0)
        with pytest.raises(NoConvergence) as exc:
            lambda_max_pencil(Y, X, EigenOptions(backend="iterative", tol=1e-16, seed=0))
        assert exc.value.best is not None
        lam, v = exc.value.best
        # the best estimate is still an excellent eigenvalue approximation
        assert lam == pytest.approx(spectrum_dense(X, Y).max, rel=1e-9)
        assert exc.value.residual > 1e-16


class TestOptionsValidation:
    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            EigenOptions(tol=0.0)
        with pytest.raises(ValueError):
            EigenOptions(max_iter=0)
        with pytest.raises(ValueError):
            EigenOptions(backend="gpu")


class TestConcurrentInvocation:
    def test_shared_inputs_thread_safe(self, rng):
        from concurrent.futures import ThreadPoolExecutor

        from spdcone import thompson_distance

        X = random_sparse_spd(100, 0.05, rng)
        Y = random_sparse_spd(100, 0.05, rng)
        opts = iter_opts(seed=5)
        reference = thompson_distance(X, Y, opts)
        with ThreadPoolExecutor(max_workers=8) as pool:
            values = list(pool.map(lambda _: thompson_distance(X, Y, opts), range(16)))
        assert all(v == reference for v in values)


class TestResidualDefinition:
    def test_residual_reported_below_tol(self, rng):
        X = random_sparse_spd(300, 0.02, rng)
        Y = random_sparse_spd(300, 0.02, rng)
        e = extreme_pair(X, Y, EigenOptions(seed=3, tol=1e-10))
        assert max(e.residuals) <= 1e-10
        assert e.iterations[0] > 0 and e.iterations[1] > 0
