"""Symmetric positive definite matrix types and dense-spectrum oracle.

An :class:`SpdMatrix` is immutable and certified positive definite at
construction: the Cholesky factorization that performs the certification
is cached on the instance and reused by every downstream pencil solve.
Dense matrices are stored as full symmetric arrays (mirrored exactly from
the lower triangle); sparse matrices are stored canonically as the lower
triangle in sorted coordinate form plus a full CSR mirror for products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, get_lapack_funcs, solve_triangular
from scipy.sparse.linalg import splu

from .errors import (
    AsymmetricInput,
    DenseLimitExceeded,
    DimensionMismatch,
    NotPositiveDefinite,
    NumericalBreakdown,
)

DEFAULT_DENSE_CEILING = 2048

SYMMETRY_RTOL = 1e-12
BREAKDOWN_RTOL = 1e-14


def _as_coo(mat):
    return sp.coo_matrix(mat)


class CholeskyFactor:
    """Lower-triangular factor of an SPD matrix.

    Dense: ``X = L @ L.T`` with ``perm is None``.
    Sparse: ``X[perm][:, perm] = L @ L.T`` where ``perm`` is the
    fill-reducing permutation chosen by the factorization.
    """

    def __init__(self, L, perm=None):
        self.L = L
        self.perm = perm
        self.is_sparse = sp.issparse(L)
        if self.is_sparse:
            # splu of a triangular matrix in natural order reduces to a
            # native substitution sweep; far faster than spsolve_triangular.
            opts = dict(SymmetricMode=True)
            self._lsolve = splu(
                L.tocsc(), permc_spec="NATURAL", diag_pivot_thresh=0.0, options=opts
            )
            self._iperm = np.argsort(perm)

    @property
    def n(self):
        return self.L.shape[0]

    def solve_lower(self, b):
        """Solve L y = b (b in permuted coordinates for sparse)."""
        if self.is_sparse:
            return self._lsolve.solve(np.asarray(b, dtype=float))
        return solve_triangular(self.L, b, lower=True)

    def solve_lower_t(self, b):
        """Solve L^T y = b (permuted coordinates for sparse)."""
        if self.is_sparse:
            return self._lsolve.solve(np.asarray(b, dtype=float), trans="T")
        return solve_triangular(self.L, b, lower=True, trans="T")

    def solve(self, b):
        """Solve X y = b in original coordinates."""
        if self.perm is None:
            return self.solve_lower_t(self.solve_lower(b))
        bp = np.asarray(b, dtype=float)[self.perm]
        yp = self.solve_lower_t(self.solve_lower(bp))
        y = np.empty_like(yp)
        y[self.perm] = yp
        return y

    def reconstruction_error(self, X):
        """Relative Frobenius error of L L^T against (permuted) X."""
        if self.is_sparse:
            Xp = X.tocsr()[self.perm][:, self.perm]
            diff = self.L @ self.L.T - Xp
            return sp.linalg.norm(diff) / max(sp.linalg.norm(Xp), 1e-300)
        diff = self.L @ self.L.T - X
        return np.linalg.norm(diff) / max(np.linalg.norm(X), 1e-300)


def _factor_dense(A):
    """Certifying dense Cholesky. Returns CholeskyFactor or raises."""
    potrf, = get_lapack_funcs(("potrf",), (A,))
    L, info = potrf(A, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefinite(pivot_index=int(info))
    if info < 0:
        raise ValueError(f"internal LAPACK error in potrf: info={info}")
    pivots = np.diag(L) ** 2
    threshold = BREAKDOWN_RTOL * np.max(np.diag(A))
    small = np.nonzero(pivots < threshold)[0]
    if small.size:
        i = int(small[0])
        raise NumericalBreakdown(i + 1, float(pivots[i]), float(threshold))
    return CholeskyFactor(L)


def _factor_sparse(A_csc):
    """Certifying sparse Cholesky via SuperLU in symmetric mode.

    With the diagonal pivot threshold at zero and symmetric mode on,
    SuperLU performs the elimination in a fill-reducing symmetric
    ordering and U equals diag(U) @ L.T up to roundoff, so
    L @ sqrt(diag(U)) is a genuine Cholesky factor of the permuted matrix.
    """
    try:
        lu = splu(
            A_csc,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options=dict(SymmetricMode=True),
        )
    except RuntimeError as exc:  # exactly singular
        raise NotPositiveDefinite(pivot_index=-1, detail=str(exc)) from exc
    pivots = lu.U.diagonal()
    bad = np.nonzero(~(pivots > 0))[0]
    if bad.size:
        raise NotPositiveDefinite(pivot_index=int(bad[0]) + 1)
    threshold = BREAKDOWN_RTOL * A_csc.diagonal().max()
    small = np.nonzero(pivots < threshold)[0]
    if small.size:
        i = int(small[0])
        raise NumericalBreakdown(i + 1, float(pivots[i]), float(threshold))
    L = (lu.L @ sp.diags(np.sqrt(pivots))).tocsc()
    # scipy convention: Pr @ X @ Pc = L @ U with perm_r == perm_c here,
    # which reads X[q][:, q] = L @ L.T for q = argsort(perm_c).
    q = np.argsort(lu.perm_c)
    return CholeskyFactor(L, perm=q)


class SpdMatrix:
    """Certified symmetric positive definite matrix, dense or sparse.

    Construction symmetrizes exactly (the lower triangle is the source of
    truth) and runs a Cholesky factorization; failure raises
    :class:`NotPositiveDefinite` or :class:`NumericalBreakdown` rather
    than producing an invalid instance. Instances are immutable.
    """

    __slots__ = ("_full", "_lower", "_is_sparse", "_factor", "certified")

    def __init__(self, matrix, *, _certify=True):
        if sp.issparse(matrix):
            coo = _as_coo(matrix).astype(float)
            if coo.shape[0] != coo.shape[1]:
                raise DimensionMismatch(coo.shape[0], coo.shape[1])
            coo.sum_duplicates()
            self._check_symmetry_sparse(coo)
            lower = sp.tril(coo, format="coo")
            self._set_from_lower_sparse(lower, certify=_certify)
        else:
            A = np.asarray(matrix, dtype=float)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise DimensionMismatch(A.shape[0], A.shape[-1] if A.ndim else 0)
            self._check_symmetry_dense(A)
            full = np.tril(A) + np.tril(A, -1).T
            full.setflags(write=False)
            self._full = full
            self._lower = None
            self._is_sparse = False
            self._factor = None
            self.certified = False
            if _certify:
                self._certify()

    # -- construction helpers ------------------------------------------------

    def _set_from_lower_sparse(self, lower_coo, *, certify):
        lower = lower_coo.tocsr().tocoo()  # sorts and canonicalizes indices
        strict = sp.tril(lower, k=-1, format="coo")
        full = (lower + strict.T).tocsr()
        full.sort_indices()
        full.data.setflags(write=False)
        lower.data.setflags(write=False)
        self._full = full
        self._lower = lower
        self._is_sparse = True
        self._factor = None
        self.certified = False
        if certify:
            self._certify()

    @classmethod
    def from_lower_sparse(cls, lower, *, _certify=True):
        """Build from a lower-triangle-only sparse matrix (no symmetry check)."""
        coo = _as_coo(lower).astype(float)
        if coo.shape[0] != coo.shape[1]:
            raise DimensionMismatch(coo.shape[0], coo.shape[1])
        coo.sum_duplicates()
        if np.any(coo.row < coo.col):
            raise AsymmetricInput(np.inf, 0.0)
        self = object.__new__(cls)
        self._set_from_lower_sparse(coo, certify=_certify)
        return self

    @classmethod
    def _wrap_unchecked(cls, matrix):
        """Wrap a symmetric matrix without SPD certification.

        Used for geodesic extrapolation outside [0, 1], where the result
        may legitimately leave the cone. ``certified`` stays False; any
        later operation that needs the Cholesky factor will certify (and
        may raise) at that point.
        """
        return cls(matrix, _certify=False)

    @staticmethod
    def _check_symmetry_dense(A):
        scale = np.max(np.abs(A)) if A.size else 0.0
        dev = np.max(np.abs(A - A.T)) if A.size else 0.0
        if dev > SYMMETRY_RTOL * max(scale, 1e-300):
            raise AsymmetricInput(dev, scale)

    @staticmethod
    def _check_symmetry_sparse(coo):
        scale = np.max(np.abs(coo.data)) if coo.nnz else 0.0
        diff = (coo - coo.T).tocoo()
        dev = np.max(np.abs(diff.data)) if diff.nnz else 0.0
        if dev > SYMMETRY_RTOL * max(scale, 1e-300):
            raise AsymmetricInput(dev, scale)

    def _certify(self):
        if self._factor is None:
            if self._is_sparse:
                self._factor = _factor_sparse(self._full.tocsc())
            else:
                self._factor = _factor_dense(self._full)
        self.certified = True

    # -- basic queries ---------------------------------------------------------

    @property
    def n(self):
        return self._full.shape[0]

    @property
    def is_sparse(self):
        return self._is_sparse

    @property
    def nnz(self):
        """Stored nonzeros of the full symmetric representation."""
        if self._is_sparse:
            return int(self._full.nnz)
        return int(np.count_nonzero(self._full))

    def dense(self):
        """Full symmetric ndarray (copy for sparse storage)."""
        if self._is_sparse:
            return self._full.toarray()
        return self._full

    def raw(self):
        """The internal full representation: ndarray or CSR matrix."""
        return self._full

    def lower_pattern(self):
        """Canonical lower-triangle pattern as (rows, cols) index arrays."""
        if self._is_sparse:
            return self._lower.row.copy(), self._lower.col.copy()
        r, c = np.nonzero(np.tril(self._full))
        return r, c

    def matvec(self, v):
        return self._full @ v

    def norm_fro(self):
        if self._is_sparse:
            return sp.linalg.norm(self._full)
        return float(np.linalg.norm(self._full))

    def chol(self):
        """Certifying Cholesky factor (cached)."""
        self._certify()
        return self._factor

    def scaled(self, c):
        """c * X for c > 0 (certification carries over structurally)."""
        if c <= 0:
            raise ValueError("scale must be positive to stay in the cone")
        out = SpdMatrix(self._full * c, _certify=False)
        out.certified = self.certified
        return out

    def __repr__(self):
        kind = "sparse" if self._is_sparse else "dense"
        return f"SpdMatrix(n={self.n}, {kind}, nnz={self.nnz})"


@dataclass(frozen=True)
class Spectrum:
    """Full generalized spectrum, sorted ascending, all entries positive."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, float))

    @property
    def min(self):
        return float(self.eigenvalues[0])

    @property
    def max(self):
        return float(self.eigenvalues[-1])


def make_spd(entries, n=None):
    """Construct a certified SPD matrix from a symmetric value set.

    Parameters
    ----------
    entries : array-like or scipy sparse matrix
        Full symmetric matrix. Sparse input is canonicalized to its
        lower triangle with duplicates summed.
    n : int, optional
        Expected dimension; mismatch raises DimensionMismatch.
    """
    X = SpdMatrix(entries)
    if n is not None and X.n != n:
        raise DimensionMismatch(X.n, n)
    return X


def cholesky(X: SpdMatrix) -> CholeskyFactor:
    """Cholesky factor of X (cached on the instance)."""
    return X.chol()


def _check_dims(X: SpdMatrix, Y: SpdMatrix):
    if X.n != Y.n:
        raise DimensionMismatch(X.n, Y.n)


def whiten(X: SpdMatrix, Y: SpdMatrix) -> np.ndarray:
    """Congruence transform L^-1 Y L^-T with X = L L^T.

    The result is symmetric and isospectral with the pencil Y X^-1.
    Materializes a dense n x n matrix; intended for dense-scale use.
    """
    _check_dims(X, Y)
    f = X.chol()
    if f.perm is not None:
        q = f.perm
        Yp = Y.raw().tocsr()[q][:, q].toarray() if Y.is_sparse else Y.dense()[np.ix_(q, q)]
    else:
        Yp = Y.dense()
    Z = f.solve_lower(Yp)
    W = f.solve_lower(Z.T)
    return (W + W.T) / 2.0


def spectrum_dense(
    X: SpdMatrix, Y: SpdMatrix, *, dense_ceiling: int = DEFAULT_DENSE_CEILING
) -> Spectrum:
    """Full sorted spectrum of the pencil Y X^-1 via a dense solve.

    This is the full-spectrum oracle; it refuses to run above the dense
    ceiling so that callers cannot mistake it for a scalable path.
    """
    _check_dims(X, Y)
    if X.n > dense_ceiling:
        raise DenseLimitExceeded(X.n, dense_ceiling)
    w = eigh(Y.dense(), X.dense(), eigvals_only=True)
    return Spectrum(w)


def random_spd(n, rng, spread=1.0):
    """Random dense SPD matrix Q diag(exp(u)) Q^T with u ~ U[-spread, spread].

    Q is the QR factor of a Gaussian matrix with the sign convention fixed,
    so results are reproducible under a seeded generator. The condition
    number is about exp(2 * spread).
    """
    A = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    u = rng.uniform(-spread, spread, n)
    M = (Q * np.exp(u)) @ Q.T
    return SpdMatrix((M + M.T) / 2.0)


def random_sparse_spd(n, density, rng, shift=0.5):
    """Random sparse SPD matrix with roughly the requested off-diagonal density.

    A symmetric sparse G with entries in [-1, 1] is made strictly
    diagonally dominant: X = G + diag(|G| 1 + s), s ~ U[shift, shift + 1].
    """
    m = int(density * n * (n - 1) / 2)
    i = rng.integers(1, n, size=2 * m)
    j = (rng.random(2 * m) * i).astype(np.int64)  # j < i uniformly
    keep = np.unique(np.stack([i, j], axis=1), axis=0)
    keep = keep[:m]
    vals = rng.uniform(-1.0, 1.0, keep.shape[0])
    G = sp.coo_matrix((vals, (keep[:, 0], keep[:, 1])), shape=(n, n))
    G = (G + G.T).tocsr()
    row_weight = np.asarray(np.abs(G).sum(axis=1)).ravel()
    diag = row_weight + rng.uniform(shift, shift + 1.0, n)
    X = (G + sp.diags(diag)).tocoo()
    return SpdMatrix(X)


def combine(coeff_pairs, *, certify=True):
    """Linear combination sum(c_i * M_i) of SpdMatrix values.

    Sparse inputs yield a sparse result whose pattern is contained in
    the union of the input patterns; any dense input makes the result
    dense. With ``certify=False`` the result is wrapped unchecked.
    """
    mats = [m for _, m in coeff_pairs]
    if not mats:
        raise ValueError("empty combination")
    for m in mats[1:]:
        _check_dims(mats[0], m)
    if all(m.is_sparse for m in mats):
        acc = None
        for c, m in coeff_pairs:
            term = m.raw() * c
            acc = term if acc is None else acc + term
        result = acc
    else:
        acc = np.zeros((mats[0].n, mats[0].n))
        for c, m in coeff_pairs:
            acc += c * m.dense()
        result = acc
    if certify:
        return SpdMatrix(result)
    return SpdMatrix._wrap_unchecked(result)


def arithmetic_mean(points):
    """Entrywise average of SPD matrices (SPD by convexity of the cone)."""
    k = len(points)
    return combine([(1.0 / k, p) for p in points])
