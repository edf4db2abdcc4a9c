"""Dense complex linear-algebra kernel used by every other module.

All operations are pure functions on immutable ndarrays (complex128,
row-major).  Comparisons use the operator norm (largest singular value);
numerical rank is cut at ``rank_rel * sigma_max``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotHermitian, NotPSD, NotSquare


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerance contract.

    abs_eps: absolute operator-norm threshold for equality checks.
    rank_rel: relative singular-value cutoff for support/rank detection.
    """

    abs_eps: float = 1e-9
    rank_rel: float = 1e-10

    def __post_init__(self):
        if self.abs_eps <= 0 or self.rank_rel <= 0:
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def asmatrix(a) -> np.ndarray:
    """Coerce to a C-contiguous complex128 2-d array."""
    m = np.ascontiguousarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimMismatch(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def op_norm(a: np.ndarray) -> float:
    """Operator (spectral) norm: the largest singular value."""
    a = np.atleast_2d(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(a^dag b)."""
    return complex(np.sum(a.conj() * b))


def is_hermitian(a: np.ndarray, eps: float = DEFAULT_TOL.abs_eps) -> bool:
    return a.shape[0] == a.shape[1] and op_norm(a - dagger(a)) <= eps


def require_square(a: np.ndarray) -> np.ndarray:
    a = asmatrix(a)
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected square matrix, got shape {a.shape}")
    return a


def hermitian_eig(a, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary of eigenvectors as columns)
    with ``a = U diag(w) U^dag`` within ``tol.abs_eps``.

    Raises NotSquare / NotHermitian on bad input.
    """
    a = require_square(a)
    herm_residual = op_norm(a - dagger(a))
    if herm_residual > tol.abs_eps:
        raise NotHermitian(herm_residual, tol.abs_eps)
    w, u = np.linalg.eigh((a + dagger(a)) / 2)
    return w, u


def nullspace(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical nullspace of ``a``.

    A direction counts as null when its singular value is at most
    ``rank_rel * sigma_max``; the zero matrix has a full nullspace.
    """
    a = asmatrix(a)
    if a.shape[0] == 0 or a.size == 0:
        return np.eye(a.shape[1], dtype=np.complex128)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    cut = tol.rank_rel * smax
    rank = int(np.sum(s > cut)) if smax > 0 else 0
    return dagger(vh)[:, rank:]


def numerical_rank(a, tol: Tolerance = DEFAULT_TOL) -> int:
    a = asmatrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol.rank_rel * s[0]))


def psd_sqrt_pinv(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """A^(-1/2) on the support of a PSD matrix, zero on its kernel.

    The result R satisfies R A R = P_supp (the support projector)
    within tolerance.  Raises NotPSD if an eigenvalue dips below
    ``-abs_eps``.
    """
    w, u = hermitian_eig(a, tol)
    if w.size and w[0] < -tol.abs_eps:
        raise NotPSD(float(w[0]), tol.abs_eps)
    wmax = float(w[-1]) if w.size else 0.0
    cut = tol.rank_rel * max(wmax, 0.0)
    inv_sqrt = np.where(w > cut, 1.0 / np.sqrt(np.clip(w, cut if cut > 0 else 1.0, None)), 0.0)
    if wmax <= 0:
        inv_sqrt = np.zeros_like(w)
    return (u * inv_sqrt) @ dagger(u)


def support_projector(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Projector onto the range of a Hermitian PSD matrix."""
    w, u = hermitian_eig(a, tol)
    if w.size and w[0] < -tol.abs_eps:
        raise NotPSD(float(w[0]), tol.abs_eps)
    wmax = float(w[-1]) if w.size else 0.0
    keep = w > tol.rank_rel * max(wmax, 0.0) if wmax > 0 else np.zeros_like(w, dtype=bool)
    return (u[:, keep]) @ dagger(u[:, keep])


def kron(a, b) -> np.ndarray:
    return np.kron(asmatrix(a), asmatrix(b))


def partial_trace(a, dims: list[int], keep) -> np.ndarray:
    """Trace out all tensor factors not listed in ``keep``.

    ``a`` must be square of dimension prod(dims); ``keep`` is an iterable
    of factor indices to retain, in their original order.
    """
    a = require_square(a)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if a.shape[0] != total:
        raise DimMismatch(f"matrix dim {a.shape[0]} != prod(dims) {total}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimMismatch(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = a.reshape(dims + dims)
    # contract row/column axes of each traced factor, from the highest
    # axis down so earlier positions stay valid
    for idx in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=idx, axis2=idx + (t.ndim // 2))
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def close(a, b, eps: float = DEFAULT_TOL.abs_eps) -> bool:
    """Operator-norm equality within eps."""
    return op_norm(np.asarray(a) - np.asarray(b)) <= eps


def herm_to_coords(m: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in an orthonormal Hermitian basis.

    Euclidean norm of the coordinates equals the Hilbert-Schmidt norm
    of the matrix, so linear feasibility problems over effects can run
    in real arithmetic.
    """
    m = require_square(m)
    d = m.shape[0]
    iu = np.triu_indices(d, k=1)
    re = np.sqrt(2.0) * m[iu].real
    im = np.sqrt(2.0) * m[iu].imag
    return np.concatenate([np.diag(m).real, re, im])


def coords_to_herm(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`herm_to_coords`."""
    v = np.asarray(v, dtype=np.float64)
    if v.size != d * d:
        raise DimMismatch(f"coordinate vector of length {v.size} != {d * d}")
    m = np.zeros((d, d), dtype=np.complex128)
    np.fill_diagonal(m, v[:d])
    iu = np.triu_indices(d, k=1)
    k = iu[0].size
    off = (v[d : d + k] + 1j * v[d + k :]) / np.sqrt(2.0)
    m[iu] += off
    m[(iu[1], iu[0])] += off.conj()
    return m
