"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Two inner loops dominate runtime in this package: the simplex-constrained
least-squares solver behind coarse-graining feasibility (called once per
sampled observable, tens of thousands of times in a containment scan) and
the alternating-maximization loop for classical channel capacity.  Both are
implemented twice with identical semantics:

* ``*_numba``: explicit loops compiled with ``@njit`` (used by default when
  numba imports cleanly),
* ``*_numpy``: vectorized numpy (always available).

Set ``QICHAN_PURE_NUMPY=1`` in the environment to force the numpy path.
Dense eigen/SVD work stays on LAPACK in :mod:`qichan.numlin`; compiling
those would just re-implement BLAS badly.

The feasibility problem solved here is

    minimize   sum_j || G p_j - x_j ||^2   over rows p_j of P
    subject to each column of P lying in the probability simplex,

which is a convex quadratic over a product of simplices.  FISTA with
per-problem adaptive restart converges linearly on this polyhedral
geometry.
"""

from __future__ import annotations

import os

import numpy as np

PURE_NUMPY_ENV = "QICHAN_PURE_NUMPY"


def _env_forces_numpy() -> bool:
    return os.environ.get(PURE_NUMPY_ENV, "").strip().lower() in ("1", "true", "yes", "on")


NUMBA_AVAILABLE = False
if not _env_forces_numpy():
    try:
        from numba import njit, prange

        NUMBA_AVAILABLE = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if not NUMBA_AVAILABLE:

    def njit(*args, **kwargs):  # noqa: D103 - decorator stub
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range


# ---------------------------------------------------------------------------
# simplex-constrained least squares
# ---------------------------------------------------------------------------


def _project_columns_simplex_numpy(p: np.ndarray) -> np.ndarray:
    """Project every column of every problem onto the probability simplex.

    ``p`` has shape (S, m, n); the simplex constraint runs over axis 1.
    """
    s, m, n = p.shape
    u = np.sort(p, axis=1)[:, ::-1, :]
    css = np.cumsum(u, axis=1)
    k = np.arange(1, m + 1, dtype=np.float64).reshape(1, m, 1)
    cond = u - (css - 1.0) / k > 0.0
    rho = np.maximum(cond.sum(axis=1), 1)  # (S, n)
    idx = rho - 1
    css_rho = np.take_along_axis(css, idx[:, None, :], axis=1)[:, 0, :]
    theta = (css_rho - 1.0) / rho
    return np.maximum(p - theta[:, None, :], 0.0)


def _lsq_objective(p: np.ndarray, gt: np.ndarray, x: np.ndarray) -> np.ndarray:
    r = p @ gt - x
    return np.sum(r * r, axis=(1, 2))


def solve_product_simplex_lsq_numpy(
    g: np.ndarray, x: np.ndarray, max_iter: int = 20000, hs_tol: float = 5e-8
) -> tuple[np.ndarray, np.ndarray]:
    """Batched FISTA for ``min ||P G^T - X||^2`` with simplex columns.

    g: (D, n) real design matrix (coordinates of the reference effects).
    x: (S, m, D) batched targets (coordinates of the effects to explain).
    Returns (P, res) with P of shape (S, m, n) and ``res[s]`` the largest
    per-row Euclidean residual of problem ``s``.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    s_count, m, _ = x.shape
    n = g.shape[1]
    gt = g.T
    lip = 2.0 * (np.linalg.norm(g, 2) ** 2)
    if lip == 0.0:
        p = np.full((s_count, m, n), 1.0 / m)
        return p, np.sqrt(np.sum(x * x, axis=2)).max(axis=1)

    p = np.full((s_count, m, n), 1.0 / m)
    y = p.copy()
    t = 1.0
    f_prev = _lsq_objective(p, gt, x)
    stall = np.zeros(s_count, dtype=np.int64)
    check_every = 32
    for it in range(max_iter):
        grad = 2.0 * ((y @ gt - x) @ g)
        p_next = _project_columns_simplex_numpy(y - grad / lip)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = p_next + ((t - 1.0) / t_next) * (p_next - p)
        f_next = _lsq_objective(p_next, gt, x)
        # adaptive restart: kill momentum on problems whose value went up
        worse = f_next > f_prev
        if np.any(worse):
            y[worse] = p_next[worse]
            t_next = 1.0
        stall = np.where(f_prev - f_next < 1e-18, stall + 1, 0)
        p = p_next
        t = t_next
        f_prev = f_next
        if (it + 1) % check_every == 0:
            res = np.sqrt(np.maximum(f_next, 0.0))
            if np.all((res <= hs_tol) | (stall > 128)):
                break
    row_res = np.sqrt(np.sum((p @ gt - x) ** 2, axis=2))
    return p, row_res.max(axis=1)


@njit(cache=True)
def _solve_one_simplex_lsq_nb(g, x, lip, max_iter, hs_tol, p, y, pn, grad, u):
    # pragma: no cover - compiled
    # workspace: p, y, pn, grad are (m, n); u is (m,).  All loops are
    # allocation free; the simplex projection uses an insertion sort on u.
    m = x.shape[0]
    dim = x.shape[1]
    n = g.shape[1]
    inv = 1.0 / m
    for j in range(m):
        for i in range(n):
            p[j, i] = inv
            y[j, i] = inv
    t = 1.0
    f_prev = 1e300
    f_best = 1e300
    stall = 0
    for _ in range(max_iter):
        # grad = 2 ((y g^T - x) g), fused without storing the residual
        for j in range(m):
            for i in range(n):
                grad[j, i] = 0.0
            for dd in range(dim):
                acc = -x[j, dd]
                for i in range(n):
                    acc += y[j, i] * g[dd, i]
                for i in range(n):
                    grad[j, i] += 2.0 * acc * g[dd, i]
        # gradient step columns projected onto the simplex
        for i in range(n):
            for j in range(m):
                u[j] = y[j, i] - grad[j, i] / lip
            for j in range(m):
                pn[j, i] = u[j]
            # insertion sort descending
            for j in range(1, m):
                key = u[j]
                k = j - 1
                while k >= 0 and u[k] < key:
                    u[k + 1] = u[k]
                    k -= 1
                u[k + 1] = key
            css = 0.0
            theta = 0.0
            for k in range(m):
                css += u[k]
                if u[k] - (css - 1.0) / (k + 1.0) > 0.0:
                    theta = (css - 1.0) / (k + 1.0)
            for j in range(m):
                d = pn[j, i] - theta
                pn[j, i] = d if d > 0.0 else 0.0
        # objective at the new point
        f_next = 0.0
        for j in range(m):
            for dd in range(dim):
                acc = -x[j, dd]
                for i in range(n):
                    acc += pn[j, i] * g[dd, i]
                f_next += acc * acc
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        if f_next > f_prev:
            # adaptive restart: kill the momentum
            for j in range(m):
                for i in range(n):
                    y[j, i] = pn[j, i]
            t_next = 1.0
        else:
            beta = (t - 1.0) / t_next
            for j in range(m):
                for i in range(n):
                    y[j, i] = pn[j, i] + beta * (pn[j, i] - p[j, i])
        if f_best - f_next < 1e-18:
            stall += 1
        else:
            stall = 0
        if f_next < f_best:
            f_best = f_next
        for j in range(m):
            for i in range(n):
                p[j, i] = pn[j, i]
        t = t_next
        f_prev = f_next
        if np.sqrt(f_next) <= hs_tol or stall > 128:
            break
    # largest per-row Euclidean residual at the final point
    worst = 0.0
    for j in range(m):
        acc = 0.0
        for dd in range(dim):
            row = -x[j, dd]
            for i in range(n):
                row += p[j, i] * g[dd, i]
            acc += row * row
        if acc > worst:
            worst = acc
    return np.sqrt(worst)


@njit(parallel=True, cache=True)
def _solve_batch_simplex_lsq_nb(g, x, lip, max_iter, hs_tol):  # pragma: no cover
    s_count = x.shape[0]
    m = x.shape[1]
    n = g.shape[1]
    out = np.empty((s_count, m, n))
    res = np.empty(s_count)
    for s in prange(s_count):
        y = np.empty((m, n))
        pn = np.empty((m, n))
        grad = np.empty((m, n))
        u = np.empty(m)
        res[s] = _solve_one_simplex_lsq_nb(
            g, x[s], lip, max_iter, hs_tol, out[s], y, pn, grad, u
        )
    return out, res


def solve_product_simplex_lsq_numba(
    g: np.ndarray, x: np.ndarray, max_iter: int = 20000, hs_tol: float = 5e-8
) -> tuple[np.ndarray, np.ndarray]:
    """Numba twin of :func:`solve_product_simplex_lsq_numpy`."""
    g = np.ascontiguousarray(g, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    lip = 2.0 * (np.linalg.norm(g, 2) ** 2)
    if lip == 0.0:
        m = x.shape[1]
        p = np.full((x.shape[0], m, g.shape[1]), 1.0 / m)
        return p, np.sqrt(np.sum(x * x, axis=2)).max(axis=1)
    return _solve_batch_simplex_lsq_nb(g, x, lip, max_iter, hs_tol)


# ---------------------------------------------------------------------------
# alternating maximization for classical channel capacity
# ---------------------------------------------------------------------------


def blahut_arimoto_numpy(
    pyx: np.ndarray, tol: float = 1e-12, max_iter: int = 10000
) -> tuple[float, np.ndarray, np.ndarray]:
    """Capacity (bits) of a classical channel by alternating maximization.

    pyx: conditional probabilities, rows indexed by input, columns by
    output (row-stochastic).  Stops when an iteration gains less than
    ``tol`` bits.  Returns (capacity, optimal prior, per-iteration values);
    the value sequence is nondecreasing.
    """
    pyx = np.ascontiguousarray(pyx, dtype=np.float64)
    n_in = pyx.shape[0]
    r = np.full(n_in, 1.0 / n_in)
    history = []
    c_prev = -np.inf
    for _ in range(max_iter):
        qy = r @ pyx
        # d_i = KL(p(.|i) || qy); terms with p = 0 vanish, and qy_j = 0
        # forces p(j|i) = 0 for every supported input
        safe = (pyx > 0) & (qy[None, :] > 0)
        ratio = np.divide(pyx, qy[None, :], out=np.ones_like(pyx), where=safe)
        terms = np.where(safe, pyx * np.log(ratio), 0.0)
        d = terms.sum(axis=1)
        c_now = float(np.sum(r * d) / np.log(2.0))
        history.append(c_now)
        if c_now - c_prev < tol and len(history) > 1:
            break
        c_prev = c_now
        w = r * np.exp(d)
        r = w / w.sum()
    return history[-1], r, np.asarray(history)


@njit(cache=True)
def _ba_nb(pyx, tol, max_iter):  # pragma: no cover - compiled
    n_in, n_out = pyx.shape
    r = np.full(n_in, 1.0 / n_in)
    history = np.empty(max_iter)
    count = 0
    c_prev = -1e300
    for _ in range(max_iter):
        qy = np.zeros(n_out)
        for i in range(n_in):
            for j in range(n_out):
                qy[j] += r[i] * pyx[i, j]
        d = np.zeros(n_in)
        for i in range(n_in):
            acc = 0.0
            for j in range(n_out):
                p = pyx[i, j]
                if p > 0.0 and qy[j] > 0.0:
                    acc += p * np.log(p / qy[j])
            d[i] = acc
        c_now = 0.0
        for i in range(n_in):
            c_now += r[i] * d[i]
        c_now /= np.log(2.0)
        history[count] = c_now
        count += 1
        if count > 1 and c_now - c_prev < tol:
            break
        c_prev = c_now
        w = np.empty(n_in)
        tot = 0.0
        for i in range(n_in):
            w[i] = r[i] * np.exp(d[i])
            tot += w[i]
        for i in range(n_in):
            r[i] = w[i] / tot
    return history[count - 1], r, history[:count]


def blahut_arimoto_numba(
    pyx: np.ndarray, tol: float = 1e-12, max_iter: int = 10000
) -> tuple[float, np.ndarray, np.ndarray]:
    """Numba twin of :func:`blahut_arimoto_numpy`."""
    pyx = np.ascontiguousarray(pyx, dtype=np.float64)
    c, r, hist = _ba_nb(pyx, tol, max_iter)
    return float(c), r, hist


# public dispatch -----------------------------------------------------------

if NUMBA_AVAILABLE:
    solve_product_simplex_lsq = solve_product_simplex_lsq_numba
    blahut_arimoto = blahut_arimoto_numba
    BACKEND = "numba"
else:
    solve_product_simplex_lsq = solve_product_simplex_lsq_numpy
    blahut_arimoto = blahut_arimoto_numpy
    BACKEND = "numpy"
