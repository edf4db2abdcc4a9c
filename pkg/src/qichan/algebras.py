"""Finite-dimensional *-algebra machinery.

Operator spans are stored as stacks of matrices whose vectorizations are
orthonormal in the Hilbert-Schmidt inner product.  Commutants reduce to
nullspaces of stacked commutator superoperators; block structure is read
off the spectrum of a generic central element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecompositionFailed, DimMismatch, NotAnAlgebra
from .numlin import DEFAULT_TOL, Tolerance, asmatrix, dagger, op_norm

# eigenvalue clusters of generic elements merge below this gap
CLUSTER_GAP = 1e-6
# relative norm below which a Gram-Schmidt residual counts as dependent
GS_DROP = 1e-7


@dataclass(frozen=True)
class OperatorBasisSet:
    """Span of operators with a Hilbert-Schmidt orthonormal basis."""

    dim: int
    basis: np.ndarray  # (k, dim, dim), vec rows orthonormal

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def vecs(self) -> np.ndarray:
        return self.basis.reshape(self.dimension, self.dim * self.dim)

    def project(self, x) -> np.ndarray:
        """Orthogonal projection of a matrix onto the span."""
        x = asmatrix(x)
        v = self.vecs()
        coeff = v.conj() @ x.reshape(-1)
        return (coeff @ v).reshape(self.dim, self.dim)

    def contains(self, x, tol: Tolerance = DEFAULT_TOL) -> bool:
        x = asmatrix(x)
        return op_norm(x - self.project(x)) <= tol.abs_eps

    def hermitian_basis(self) -> list[np.ndarray]:
        """Hermitian spanning set (same span when the span is adjoint-closed)."""
        out = []
        for b in self.basis:
            out.append((b + dagger(b)) / 2)
            out.append((b - dagger(b)) / 2j)
        return out


def _gram_schmidt(vecs: np.ndarray, drop: float = GS_DROP) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass per vector.

    Vectors whose residual falls below ``drop`` times the largest input
    norm count as dependent and are discarded.  Projections against the
    kept basis run as single matrix products.
    """
    length = vecs.shape[1]
    if vecs.shape[0] == 0:
        return np.zeros((0, length), dtype=np.complex128)
    norms = np.linalg.norm(vecs, axis=1)
    scale = float(norms.max())
    if scale == 0.0:
        return np.zeros((0, length), dtype=np.complex128)
    floor = drop * scale
    q = np.zeros((0, length), dtype=np.complex128)
    for v, nrm0 in zip(vecs, norms):
        if nrm0 <= floor or q.shape[0] == length:
            continue
        w = v / nrm0
        for _ in range(2):
            if q.shape[0]:
                w = w - q.T @ (q.conj() @ w)
        nrm = np.linalg.norm(w)
        if nrm * nrm0 > floor:
            q = np.vstack([q, w[None, :] / nrm])
    return q


def span_of(mats, dim: int | None = None) -> OperatorBasisSet:
    """Orthonormalized span of a list of matrices."""
    mats = [asmatrix(m) for m in mats]
    if not mats:
        if dim is None:
            raise DimMismatch("empty span needs an explicit dimension")
        return OperatorBasisSet(dim=dim, basis=np.zeros((0, dim, dim), dtype=np.complex128))
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise DimMismatch(f"span elements must share shape {(d, d)}")
    vecs = _gram_schmidt(np.array([m.reshape(-1) for m in mats]))
    return OperatorBasisSet(dim=d, basis=vecs.reshape(-1, d, d))


def _row_span_projector(rows: np.ndarray) -> np.ndarray:
    """Projector onto the span of orthonormal row vectors (sum |v_i><v_i|)."""
    return rows.T @ rows.conj()


def spans_equal(a: OperatorBasisSet, b: OperatorBasisSet, eps: float = 1e-8) -> bool:
    if a.dim != b.dim:
        return False
    return op_norm(_row_span_projector(a.vecs()) - _row_span_projector(b.vecs())) <= eps


def generate_star_algebra(gens, tol: Tolerance = DEFAULT_TOL) -> OperatorBasisSet:
    """Smallest adjoint-closed, multiplication-closed span containing the
    generators and the identity.

    Grows the span by products until a fixed point; terminates at dimension
    d^2 at the latest.
    """
    gens = [asmatrix(g) for g in gens]
    if not gens:
        raise DimMismatch("need at least one generator")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise DimMismatch("generators must be square of equal dimension")
    seed = [np.eye(d, dtype=np.complex128)]
    for g in gens:
        seed.append(g)
        seed.append(dagger(g))
    current = span_of(seed)
    fresh = current.basis  # only products touching new directions can grow the span
    while current.dimension < d * d:
        left = np.einsum("aij,bjk->abik", current.basis, fresh, optimize=True)
        right = np.einsum("aij,bjk->abik", fresh, current.basis, optimize=True)
        products = np.concatenate(
            [left.reshape(-1, d * d), right.reshape(-1, d * d)]
        )
        grown = _gram_schmidt(np.vstack([current.vecs(), products]))
        if grown.shape[0] == current.dimension:
            break
        fresh = grown[current.dimension :].reshape(-1, d, d)
        current = OperatorBasisSet(dim=d, basis=grown.reshape(-1, d, d))
    return current


def commutant(operators, tol: Tolerance = DEFAULT_TOL) -> OperatorBasisSet:
    """All matrices commuting with every given operator and its adjoint.

    Solved as the joint nullspace of the maps A -> [A, S]; the adjoints are
    included so the result is a von Neumann algebra.
    """
    mats = [asmatrix(s) for s in operators]
    if not mats:
        raise DimMismatch("need at least one operator")
    d = mats[0].shape[0]
    for s in mats:
        if s.shape != (d, d):
            raise DimMismatch("operators must be square of equal dimension")
    gens: list[np.ndarray] = []
    for s in mats:
        gens.append(s)
        gens.append(dagger(s))
    eye = np.eye(d)
    blocks = [np.kron(eye, s.T) - np.kron(s, eye) for s in gens]
    stacked = np.vstack(blocks)
    _, sv, vh = np.linalg.svd(stacked, full_matrices=True)
    smax = sv[0] if sv.size else 0.0
    # a normalized direction counts as commuting when its commutator norm is
    # below abs_eps at the generators' scale; the relative cut alone would
    # misread pure roundoff as structure when everything nearly commutes
    scale = max(op_norm(s) for s in gens)
    cut = max(tol.rank_rel * smax, tol.abs_eps * scale)
    rank = int(np.sum(sv > cut)) if smax > 0 else 0
    null_vecs = vh[rank:].conj()
    return OperatorBasisSet(dim=d, basis=null_vecs.reshape(-1, d, d))


def is_multiplication_closed(a: OperatorBasisSet, tol: Tolerance = DEFAULT_TOL) -> bool:
    for x in a.basis:
        for y in a.basis:
            if not a.contains(x @ y, Tolerance(max(tol.abs_eps, 1e-8), tol.rank_rel)):
                return False
    return True


def intersect(a: OperatorBasisSet, b: OperatorBasisSet) -> OperatorBasisSet:
    """Intersection of two spans (nullspace of stacked complement projections)."""
    if a.dim != b.dim:
        raise DimMismatch(f"span dims differ: {a.dim} != {b.dim}")
    d2 = a.dim * a.dim
    eye = np.eye(d2)
    stacked = np.vstack(
        [eye - _row_span_projector(a.vecs()), eye - _row_span_projector(b.vecs())]
    )
    _, sv, vh = np.linalg.svd(stacked, full_matrices=True)
    # complement projections have unit-scale spectra; directions inside both
    # spans sit at singular value ~0
    null = sv <= 1e-7
    rank = int(np.sum(~null))
    basis = vh[rank:].conj()
    return OperatorBasisSet(dim=a.dim, basis=basis.reshape(-1, a.dim, a.dim))


def contains(a: OperatorBasisSet, x, tol: Tolerance = DEFAULT_TOL) -> bool:
    return a.contains(x, tol)


@dataclass(frozen=True)
class AlgebraStructure:
    """A *-algebra with its block decomposition sum_k M_{n_k} (x) 1_{m_k}.

    ``central_projectors[k]`` projects onto the k-th block;
    conjugating a carrier element by ``basis_change`` (columns are the new
    basis) exhibits the block pattern.
    """

    carrier: OperatorBasisSet
    central_projectors: tuple[np.ndarray, ...]
    block_dims: tuple[tuple[int, int], ...]
    basis_change: np.ndarray

    @property
    def dim(self) -> int:
        return self.carrier.dim

    @property
    def dimension(self) -> int:
        return self.carrier.dimension

    def is_commutative(self, eps: float = 1e-8) -> bool:
        return all(n == 1 for n, _ in self.block_dims)


def _generic_hermitian(span: OperatorBasisSet, rng: np.random.Generator) -> np.ndarray:
    h = np.zeros((span.dim, span.dim), dtype=np.complex128)
    for b in span.hermitian_basis():
        h += rng.standard_normal() * b
    return (h + dagger(h)) / 2


def _generic_element(span: OperatorBasisSet, rng: np.random.Generator) -> np.ndarray:
    coeffs = rng.standard_normal(span.dimension) + 1j * rng.standard_normal(span.dimension)
    return np.tensordot(coeffs, span.basis, axes=(0, 0))


def _cluster(values: np.ndarray, gap: float = CLUSTER_GAP) -> list[np.ndarray]:
    """Group sorted eigenvalue indices into clusters separated by more than gap."""
    idx = np.argsort(values)
    groups: list[list[int]] = [[int(idx[0])]]
    for i in idx[1:]:
        if values[i] - values[groups[-1][-1]] < gap:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return [np.array(g) for g in groups]


def center(a: OperatorBasisSet, tol: Tolerance = DEFAULT_TOL) -> OperatorBasisSet:
    """Intersection of an algebra with its commutant."""
    if not is_multiplication_closed(a, tol):
        raise NotAnAlgebra("span is not closed under multiplication")
    return intersect(a, commutant(list(a.basis), tol))


def structure_decompose(
    a: OperatorBasisSet, seed: int = 0, tol: Tolerance = DEFAULT_TOL
) -> AlgebraStructure:
    """Block decomposition of a unital *-algebra.

    Central projectors are the spectral clusters of a generic Hermitian
    central element (seeded); inside each block the factor structure
    M_{n_k} (x) 1_{m_k} is exposed through matrix units built from polar
    parts of a generic algebra element.
    """
    d = a.dim
    eye = np.eye(d)
    if not a.contains(eye, Tolerance(max(tol.abs_eps, 1e-8), tol.rank_rel)):
        raise NotAnAlgebra("algebra must contain the identity")
    rng = np.random.default_rng(seed)
    z = center(a, tol)
    h_central = _generic_hermitian(z, rng)
    w, u = np.linalg.eigh(h_central)
    clusters = _cluster(w)

    blocks = []
    for cluster_idx in clusters:
        cols = u[:, cluster_idx]
        d_k = cols.shape[1]
        proj = cols @ dagger(cols)
        restricted = span_of([dagger(cols) @ b @ cols for b in a.basis], dim=d_k)
        n_sq = restricted.dimension
        n_k = int(round(np.sqrt(n_sq)))
        if n_k * n_k != n_sq or d_k % n_k != 0:
            raise DecompositionFailed(
                f"block of size {d_k} carries a {n_sq}-dimensional factor; "
                "tolerance is too loose or too tight"
            )
        m_k = d_k // n_k
        block_cols = cols @ _factor_basis(restricted, n_k, m_k, rng)
        blocks.append(((n_k, m_k), proj, block_cols))

    order = sorted(
        range(len(blocks)),
        key=lambda i: (
            -blocks[i][0][0],
            -blocks[i][0][1],
            float(np.trace(blocks[i][1] @ np.diag(np.arange(d))).real),
        ),
    )
    dims = tuple(blocks[i][0] for i in order)
    projs = tuple(np.ascontiguousarray(blocks[i][1]) for i in order)
    basis_change = np.hstack([blocks[i][2] for i in order])
    structure = AlgebraStructure(
        carrier=a,
        central_projectors=projs,
        block_dims=dims,
        basis_change=np.ascontiguousarray(basis_change),
    )
    residual = block_pattern_residual(structure)
    if residual > 1e-6:
        raise DecompositionFailed(f"block pattern residual {residual:.3e}")
    return structure


def _factor_basis(
    restricted: OperatorBasisSet, n_k: int, m_k: int, rng: np.random.Generator
) -> np.ndarray:
    """Orthonormal columns of the block subspace ordered so the factor shows
    as M_{n_k} (x) 1_{m_k}."""
    d_k = restricted.dim
    if n_k == 1:
        return np.eye(d_k, dtype=np.complex128)
    h = _generic_hermitian(restricted, rng)
    w, u = np.linalg.eigh(h)
    clusters = _cluster(w)
    if len(clusters) != n_k or any(c.size != m_k for c in clusters):
        raise DecompositionFailed(
            f"generic spectrum split into {[c.size for c in clusters]}, "
            f"expected {n_k} clusters of size {m_k}"
        )
    s = _generic_element(restricted, rng)
    u1 = u[:, clusters[0]]
    cols = [u1]
    for c in clusters[1:]:
        up = u[:, c]
        coeff = dagger(up) @ s @ u1
        uu, _, vvh = np.linalg.svd(coeff)
        cols.append(up @ (uu @ vvh))
    return np.hstack(cols)


def block_pattern_residual(structure: AlgebraStructure) -> float:
    """Largest deviation of a conjugated carrier element from the canonical
    block-diagonal M (x) 1 pattern."""
    u = structure.basis_change
    worst = 0.0
    for b in structure.carrier.basis:
        t = dagger(u) @ b @ u
        model = np.zeros_like(t)
        offset = 0
        for n_k, m_k in structure.block_dims:
            d_k = n_k * m_k
            sub = t[offset : offset + d_k, offset : offset + d_k]
            cells = sub.reshape(n_k, m_k, n_k, m_k)
            m = np.einsum("pjqj->pq", cells) / m_k
            model[offset : offset + d_k, offset : offset + d_k] = np.kron(m, np.eye(m_k))
            offset += d_k
        worst = max(worst, op_norm(t - model))
    return worst
