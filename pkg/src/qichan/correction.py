"""Preserved and correctable structures of a channel.

The algebra of operators commuting with every product E_i^dag E_j collects
all sharp observables that survive the channel; the same data yields a
single correction channel that restores every one of them.  Restricting to
a code subspace turns the construction into standard, subsystem and hybrid
error-correcting codes, plus the operator systems correctable without any
restriction on states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebras import (
    AlgebraStructure,
    OperatorBasisSet,
    block_pattern_residual,
    commutant,
    span_of,
    structure_decompose,
)
from .channels import Channel, apply_dual, require_trace_preserving
from .errors import BadFactorization, DimMismatch
from .numlin import (
    DEFAULT_TOL,
    Tolerance,
    asmatrix,
    dagger,
    nullspace,
    op_norm,
    psd_sqrt_pinv,
)


@dataclass(frozen=True)
class CodeSubspace:
    """Isometry V embedding a code space into the channel input space."""

    v: np.ndarray  # (d, d_code)

    @staticmethod
    def from_isometry(v, tol: Tolerance = DEFAULT_TOL) -> "CodeSubspace":
        v = asmatrix(v)
        res = op_norm(dagger(v) @ v - np.eye(v.shape[1]))
        if res > tol.abs_eps:
            raise DimMismatch(f"columns are not isometric (residual {res:.3e})")
        return CodeSubspace(v=v)

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    @property
    def dim_code(self) -> int:
        return self.v.shape[1]

    def projector(self) -> np.ndarray:
        return self.v @ dagger(self.v)


@dataclass(frozen=True)
class CorrectableReport:
    preserved_algebra: AlgebraStructure
    correction: Channel
    residuals: dict[str, float]


@dataclass(frozen=True)
class KLReport:
    passes: bool
    lam: np.ndarray
    residual: float


@dataclass(frozen=True)
class OQECReport:
    passes: bool
    lambdas: tuple[np.ndarray, ...]
    residual: float


def interaction_span(c: Channel) -> OperatorBasisSet:
    """Orthonormal basis of span{E_i^dag E_j}."""
    prods = [dagger(a) @ b for a in c.elements for b in c.elements]
    return span_of(prods)


def preserved_algebra(c: Channel, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> AlgebraStructure:
    """Block-decomposed algebra of all sharp observables preserved by ``c``."""
    span = interaction_span(c)
    alg = commutant(list(span.basis), tol)
    return structure_decompose(alg, seed=seed, tol=tol)


def correction_channel(c: Channel, tol: Tolerance = DEFAULT_TOL) -> Channel:
    """Channel R with elements E_k^dag E(1)^(-1/2) that fixes every
    preserved sharp observable of ``c`` under E* after R*.

    R is only determined on the support of E(1); the kernel (orthogonal to
    the range of every element) is routed to the first basis state of the
    source so the result is a total trace-preserving channel.
    """
    e_of_one = sum(e @ dagger(e) for e in c.elements)
    k = psd_sqrt_pinv(e_of_one, tol)
    elements = [dagger(e) @ k for e in c.elements]
    kernel = nullspace(e_of_one, tol)
    if kernel.shape[1]:
        sink = np.zeros((c.dim_in, 1), dtype=np.complex128)
        sink[0, 0] = 1.0
        for i in range(kernel.shape[1]):
            elements.append(sink @ dagger(kernel[:, i : i + 1]))
    r = Channel.from_elements(elements)
    require_trace_preserving(r, tol)
    return r


def restrict(c: Channel, code: CodeSubspace) -> Channel:
    """The channel seen by states prepared inside the code subspace."""
    if code.dim != c.dim_in:
        raise DimMismatch(f"code lives in dim {code.dim}, channel input is {c.dim_in}")
    return Channel.from_elements([e @ code.v for e in c.elements])


def fixed_point_residual(c: Channel, r: Channel, span: OperatorBasisSet) -> float:
    """max over basis elements A of ||E*(R*(A)) - A||."""
    worst = 0.0
    for a in span.basis:
        worst = max(worst, op_norm(apply_dual(c, apply_dual(r, a)) - a))
    return worst


def correctable_report(c: Channel, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> CorrectableReport:
    structure = preserved_algebra(c, tol, seed)
    r = correction_channel(c, tol)
    residuals = {
        "fixed_point": fixed_point_residual(c, r, structure.carrier),
        "block_pattern": block_pattern_residual(structure),
    }
    return CorrectableReport(preserved_algebra=structure, correction=r, residuals=residuals)


def correctable_operator_system(
    c: Channel, code: CodeSubspace, tol: Tolerance = DEFAULT_TOL, seed: int = 0
) -> OperatorBasisSet:
    """Span of effects correctable on all states: E*(R_0*(A_0)) for the
    algebra A_0 correctable on the code subspace.

    Each basis element A satisfies E*(R_0*(V^dag A V)) = A, with R_0 the
    correction channel of the restricted channel.
    """
    c0 = restrict(c, code)
    a0 = preserved_algebra(c0, tol, seed)
    r0 = correction_channel(c0, tol)
    images = [apply_dual(c, apply_dual(r0, a)) for a in a0.carrier.basis]
    return span_of(images)


def kl_check(c: Channel, code: CodeSubspace, tol: Tolerance = DEFAULT_TOL) -> KLReport:
    """Scalar correctability condition V^dag E_i^dag E_j V = lambda_ij 1."""
    if code.dim != c.dim_in:
        raise DimMismatch(f"code lives in dim {code.dim}, channel input is {c.dim_in}")
    n = c.n_elements
    d_code = code.dim_code
    lam = np.zeros((n, n), dtype=np.complex128)
    residual = 0.0
    eye = np.eye(d_code)
    for i in range(n):
        for j in range(n):
            m = dagger(code.v) @ dagger(c.elements[i]) @ c.elements[j] @ code.v
            lam[i, j] = np.trace(m) / d_code
            residual = max(residual, op_norm(m - lam[i, j] * eye))
    return KLReport(passes=bool(residual <= tol.abs_eps), lam=lam, residual=float(residual))


def oqec_check(
    c: Channel,
    code: CodeSubspace,
    factorization: tuple[int, int],
    tol: Tolerance = DEFAULT_TOL,
) -> OQECReport:
    """Subsystem correctability condition V^dag E_i^dag E_j V = 1 (x) Lambda_ij
    for a code split H_A (x) H_B with dims ``factorization``."""
    d_a, d_b = factorization
    if d_a * d_b != code.dim_code:
        raise BadFactorization(f"{d_a} * {d_b} != code dimension {code.dim_code}")
    if code.dim != c.dim_in:
        raise DimMismatch(f"code lives in dim {code.dim}, channel input is {c.dim_in}")
    n = c.n_elements
    lambdas = []
    residual = 0.0
    eye_a = np.eye(d_a)
    for i in range(n):
        for j in range(n):
            m = dagger(code.v) @ dagger(c.elements[i]) @ c.elements[j] @ code.v
            blocks = m.reshape(d_a, d_b, d_a, d_b)
            lam_ij = np.einsum("abad->bd", blocks) / d_a
            lambdas.append(lam_ij)
            residual = max(residual, op_norm(m - np.kron(eye_a, lam_ij)))
    return OQECReport(
        passes=bool(residual <= tol.abs_eps), lambdas=tuple(lambdas), residual=float(residual)
    )


def span_equivalent(c1: Channel, c2: Channel, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True when the element lists span the same operator subspace."""
    from .algebras import _gram_schmidt, _row_span_projector

    if (c1.dim_in, c1.dim_out) != (c2.dim_in, c2.dim_out):
        return False
    rows1 = _gram_schmidt(np.array([e.reshape(-1) for e in c1.elements]))
    rows2 = _gram_schmidt(np.array([e.reshape(-1) for e in c2.elements]))
    p1 = _row_span_projector(rows1)
    p2 = _row_span_projector(rows2)
    return op_norm(p1 - p2) <= max(tol.abs_eps, 1e-8)


def homomorphism_residual(
    c: Channel,
    structure: AlgebraStructure,
    tol: Tolerance = DEFAULT_TOL,
    max_pairs: int = 256,
    seed: int = 0,
) -> float:
    """How far E* is from multiplicative on the image of R*.

    Evaluates ||E*(R*(A) R*(B)) - A B|| over (sampled) pairs of basis
    elements of the preserved algebra.
    """
    r = correction_channel(c, tol)
    basis = structure.carrier.basis
    k = basis.shape[0]
    pairs = [(i, j) for i in range(k) for j in range(k)]
    if len(pairs) > max_pairs:
        rng = np.random.default_rng(seed)
        pairs = [pairs[t] for t in rng.choice(len(pairs), size=max_pairs, replace=False)]
    lifted = [apply_dual(r, a) for a in basis]
    worst = 0.0
    for i, j in pairs:
        lhs = apply_dual(c, lifted[i] @ lifted[j])
        worst = max(worst, op_norm(lhs - basis[i] @ basis[j]))
    return worst
