"""Information flow to the environment: pointer observables, classical
coarse-graining feasibility, broadcast analysis and the time-resolved
dephasing model.

The classicality questions all reduce to one solver: is a target
observable a stochastic post-processing of a reference observable?  That
feasibility problem runs in real Hilbert-Schmidt coordinates through the
kernels in :mod:`qichan.kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .algebras import AlgebraStructure, OperatorBasisSet, commutant, intersect, structure_decompose
from .channels import (
    Channel,
    DiscreteObservable,
    apply_dual,
    complement,
    dilate,
)
from .correction import interaction_span
from .errors import (
    BadProjectors,
    DimMismatch,
    Infeasible,
    NotEndomorphic,
    WitnessMismatch,
)
from .numlin import (
    DEFAULT_TOL,
    Tolerance,
    asmatrix,
    dagger,
    herm_to_coords,
    op_norm,
)
from .rand import generator, random_povm, random_sharp_observable

FEASIBILITY_TOL = 1e-7


@dataclass(frozen=True)
class StochasticMap:
    """Classical channel: nonnegative matrix with unit column sums."""

    entries: np.ndarray  # (outputs, inputs)

    @staticmethod
    def from_entries(entries, tol: Tolerance = DEFAULT_TOL) -> "StochasticMap":
        m = np.ascontiguousarray(entries, dtype=np.float64)
        if m.ndim != 2:
            raise DimMismatch("stochastic map must be a matrix")
        if m.min() < -tol.abs_eps:
            raise ValueError(f"negative entry {m.min():.3e}")
        sums = m.sum(axis=0)
        if np.max(np.abs(sums - 1.0)) > max(tol.abs_eps, 1e-8):
            raise ValueError("columns must sum to one")
        return StochasticMap(entries=m)

    @property
    def n_outputs(self) -> int:
        return self.entries.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.entries.shape[1]

    def compose_observable(self, gamma: DiscreteObservable) -> DiscreteObservable:
        """The coarse-grained observable with effects sum_i pi_ji Gamma_i."""
        effects = [
            sum(self.entries[j, i] * gamma.effects[i] for i in range(self.n_inputs))
            for j in range(self.n_outputs)
        ]
        return DiscreteObservable.from_effects(effects)


@dataclass(frozen=True)
class PointerReport:
    """Commutative algebra of information both kept and leaked, with its
    sharp pointer observable (the central projectors)."""

    pointer_algebra: AlgebraStructure
    pointer_effects: DiscreteObservable
    commutativity_residual: float
    composite: DiscreteObservable | None = None


@dataclass(frozen=True)
class SweepResult:
    times: np.ndarray
    gamma: np.ndarray  # (n_times, n_projectors, N)
    snapshots: tuple[Channel, ...]


@dataclass(frozen=True)
class DecoherenceReport:
    samples: int
    feasible: int
    max_residual: float
    residuals: tuple[float, ...]
    explicit_residual: float | None

    @property
    def pass_rate(self) -> float:
        return self.feasible / self.samples if self.samples else 1.0


def _commutativity_residual(span: OperatorBasisSet) -> float:
    worst = 0.0
    for i in range(span.dimension):
        for j in range(i + 1, span.dimension):
            a, b = span.basis[i], span.basis[j]
            worst = max(worst, op_norm(a @ b - b @ a))
    return worst


def pointer_algebra(c: Channel, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> PointerReport:
    """Intersection of the algebras preserved by the channel and by its
    complement; commutative, with the central projectors as the sharp
    pointer observable."""
    kept = commutant(list(interaction_span(c).basis), tol)
    leaked = commutant(list(interaction_span(complement(c)).basis), tol)
    both = intersect(kept, leaked)
    structure = structure_decompose(both, seed=seed, tol=tol)
    effects = DiscreteObservable.from_effects(list(structure.central_projectors))
    return PointerReport(
        pointer_algebra=structure,
        pointer_effects=effects,
        commutativity_residual=_commutativity_residual(both),
    )


def correlation_check(
    c: Channel,
    x: DiscreteObservable,
    y: DiscreteObservable,
    z: DiscreteObservable,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Residual of perfect correlation between the output witness Y and the
    environment witness Z for a duplicated observable X.

    Returns max_{i != j} ||V^dag (Y_i (x) Z_j) V|| plus the worst diagonal
    deviation from X_i; raises WitnessMismatch when the witnesses do not
    reproduce X through the channel and its complement.
    """
    if x.n_outcomes != y.n_outcomes or x.n_outcomes != z.n_outcomes:
        raise DimMismatch("X, Y, Z need matching outcome counts")
    comp = complement(c)
    for i in range(x.n_outcomes):
        res_y = op_norm(apply_dual(c, y.effects[i]) - x.effects[i])
        if res_y > tol.abs_eps:
            raise WitnessMismatch("Y", res_y, tol.abs_eps)
        res_z = op_norm(apply_dual(comp, z.effects[i]) - x.effects[i])
        if res_z > tol.abs_eps:
            raise WitnessMismatch("Z", res_z, tol.abs_eps)
    iso = dilate(c, tol)
    v = iso.v
    off = 0.0
    diag = 0.0
    for i in range(x.n_outcomes):
        for j in range(x.n_outcomes):
            joint = dagger(v) @ np.kron(y.effects[i], z.effects[j]) @ v
            if i == j:
                diag = max(diag, op_norm(joint - x.effects[i]))
            else:
                off = max(off, op_norm(joint))
    return off + diag


def _coordinates(effects) -> np.ndarray:
    return np.array([herm_to_coords((e + dagger(e)) / 2) for e in effects])


def coarse_grain_solve(
    x: DiscreteObservable,
    gamma: DiscreteObservable,
    tol: float = FEASIBILITY_TOL,
    max_iter: int = 20000,
) -> StochasticMap:
    """Find a stochastic map pi with X_j = sum_i pi_ji Gamma_i.

    Solved as a nonnegative least-squares problem over Hilbert-Schmidt
    coordinates with the unit-column-sum constraint built into the
    feasible set.  Raises :class:`Infeasible` carrying the best operator
    norm residual achieved when no such map exists within ``tol``.
    """
    if x.dim != gamma.dim:
        raise DimMismatch(f"observable dims differ: {x.dim} != {gamma.dim}")
    g = _coordinates(gamma.effects).T  # (D, n)
    targets = _coordinates(x.effects)[None, :, :]  # (1, m, D)
    pi, _ = kernels.solve_product_simplex_lsq(g, targets, max_iter=max_iter, hs_tol=0.5 * tol)
    pi = np.clip(pi[0], 0.0, None)
    pi /= pi.sum(axis=0, keepdims=True)
    residual = _coarse_grain_residual(x, gamma, pi)
    if residual > tol:
        raise Infeasible(residual, tol)
    return StochasticMap.from_entries(pi)


def _coarse_grain_residual(
    x: DiscreteObservable, gamma: DiscreteObservable, pi: np.ndarray
) -> float:
    worst = 0.0
    for j in range(x.n_outcomes):
        approx = sum(pi[j, i] * gamma.effects[i] for i in range(gamma.n_outcomes))
        worst = max(worst, op_norm(x.effects[j] - approx))
    return worst


def _rank_one_parts(c: Channel, tol: Tolerance) -> list[tuple[np.ndarray, np.ndarray]] | None:
    """(output state, input state) pairs when every element is rank one."""
    parts = []
    for e in c.elements:
        u, s, vh = np.linalg.svd(e)
        if s.size > 1 and s[1] > tol.rank_rel * s[0] * 100:
            return None
        parts.append((u[:, 0] * s[0], vh[0].conj()))
    return parts


def full_decoherence_check(
    c: Channel,
    gamma: DiscreteObservable,
    samples: int = 64,
    tol: float = FEASIBILITY_TOL,
    seed: int = 0,
    op_tol: Tolerance = DEFAULT_TOL,
) -> DecoherenceReport:
    """Statistical test that every observable preserved by ``c`` is a
    coarse-graining of ``gamma``.

    Pulls ``samples`` randomized output observables back through the dual
    and solves the feasibility problem for each.  For channels with rank
    one elements whose Gamma matches the canonical pointer, the explicit
    stochastic map pi_ji = <psi_i| Y_j |psi_i> is also constructed and its
    reproduction residual reported.
    """
    if gamma.dim != c.dim_in:
        raise DimMismatch(f"gamma dim {gamma.dim} != channel input {c.dim_in}")
    rng = generator(seed)
    g = _coordinates(gamma.effects).T
    residuals = []
    feasible = 0
    explicit_res: float | None = None
    parts = _rank_one_parts(c, op_tol)
    if parts is not None:
        canonical = [dagger(e) @ e for e in c.elements]
        match = len(canonical) == gamma.n_outcomes and all(
            op_norm(canonical[i] - gamma.effects[i]) <= 1e-8 for i in range(len(canonical))
        )
        if not match:
            parts = None
    for _ in range(samples):
        n_out = int(rng.integers(2, c.dim_out + 2))
        if rng.random() < 0.5 and n_out <= c.dim_out:
            y = random_sharp_observable(rng, c.dim_out, n_out)
        else:
            y = random_povm(rng, c.dim_out, n_out)
        x_effects = [apply_dual(c, e) for e in y.effects]
        targets = _coordinates(x_effects)[None, :, :]
        pi, _ = kernels.solve_product_simplex_lsq(g, targets, hs_tol=0.5 * tol)
        x = DiscreteObservable.from_effects(x_effects)
        res = _coarse_grain_residual(x, gamma, np.clip(pi[0], 0.0, None))
        residuals.append(res)
        if res <= tol:
            feasible += 1
        if parts is not None:
            psi_norms = np.array([np.linalg.norm(pout) for pout, _ in parts])
            psis = [pout / n if n > 0 else pout for (pout, _), n in zip(parts, psi_norms)]
            pi_explicit = np.array(
                [[float((psi.conj() @ ye @ psi).real) for psi in psis] for ye in y.effects]
            )
            exp_res = _coarse_grain_residual(x, gamma, pi_explicit)
            explicit_res = exp_res if explicit_res is None else max(explicit_res, exp_res)
    return DecoherenceReport(
        samples=samples,
        feasible=feasible,
        max_residual=float(max(residuals)) if residuals else 0.0,
        residuals=tuple(float(r) for r in residuals),
        explicit_residual=explicit_res,
    )


def _marginal_channels(c: Channel, subsystem_dims: list[int]) -> list[Channel]:
    iso = dilate(c)
    dims = list(subsystem_dims) + [iso.d_env]
    n_factors = len(dims)
    v_tensor = iso.v.reshape(dims + [c.dim_in])
    marginals = []
    for i in range(len(subsystem_dims)):
        order = [i] + [ax for ax in range(n_factors) if ax != i] + [n_factors]
        moved = np.transpose(v_tensor, order)
        d_i = dims[i]
        rest = int(np.prod([dims[ax] for ax in range(n_factors) if ax != i]))
        blocks = moved.reshape(d_i, rest, c.dim_in)
        marginals.append(
            Channel.from_elements([blocks[:, m, :] for m in range(rest)])
        )
    return marginals


def broadcast_pointer(
    c: Channel,
    subsystem_dims: list[int],
    tol: Tolerance = DEFAULT_TOL,
    witnesses: list[DiscreteObservable] | None = None,
    seed: int = 0,
) -> PointerReport:
    """Sharp information preserved by every marginal of a channel into a
    tensor product of destination subsystems.

    Computes each marginal by tracing the dilated action down to one
    factor, intersects their preserved algebras, and reports the result as
    a pointer structure.  When per-factor witness observables are given,
    the composite observable (Y_1 (x) ... (x) Y_n) o E is attached.
    """
    dims = [int(d) for d in subsystem_dims]
    if int(np.prod(dims)) != c.dim_out:
        raise DimMismatch(f"prod{tuple(dims)} != channel output {c.dim_out}")
    if len(dims) < 2:
        raise DimMismatch("broadcast needs at least two subsystems")
    marginals = _marginal_channels(c, dims)
    spans = [commutant(list(interaction_span(m).basis), tol) for m in marginals]
    both = spans[0]
    for s in spans[1:]:
        both = intersect(both, s)
    structure = structure_decompose(both, seed=seed, tol=tol)
    effects = DiscreteObservable.from_effects(list(structure.central_projectors))
    composite = None
    if witnesses is not None:
        if len(witnesses) != len(dims):
            raise DimMismatch("one witness observable per subsystem required")
        effects_joint = []
        from itertools import product as iproduct

        for combo in iproduct(*[range(w.n_outcomes) for w in witnesses]):
            joint = witnesses[0].effects[combo[0]]
            for w, k in zip(witnesses[1:], combo[1:]):
                joint = np.kron(joint, w.effects[k])
            effects_joint.append(apply_dual(c, joint))
        composite = DiscreteObservable.from_effects(effects_joint)
    return PointerReport(
        pointer_algebra=structure,
        pointer_effects=effects,
        commutativity_residual=_commutativity_residual(both),
        composite=composite,
    )


def dephasing_sweep(projectors, n_env: int, total_time: float, times) -> SweepResult:
    """Time-resolved dephasing driven by a cyclic-shift environment.

    The channel at time t has elements
    E_k(t) = N^(-1/2) sum_i exp(-i w k t l_i) P_i with w = 2 pi / N and
    level spacings l_i = i / T, i = 0, 1, ...; at t = T the action reduces
    to the projective pinch sum_i P_i rho P_i.  The weight gamma[i, m] is
    the coefficient of P_i in the environment-basis effect pulled back
    through the complementary channel.
    """
    projs = [asmatrix(p) for p in projectors]
    if not projs:
        raise BadProjectors("need at least one projector")
    d = projs[0].shape[0]
    total = sum(projs)
    if op_norm(total - np.eye(d)) > 1e-9:
        raise BadProjectors("projectors must sum to the identity")
    for i, p in enumerate(projs):
        for j, q in enumerate(projs):
            expect = p if i == j else np.zeros_like(p)
            if op_norm(p @ q - expect) > 1e-9:
                raise BadProjectors("projectors must be orthogonal idempotents")
    n_proj = len(projs)
    if n_env < n_proj:
        raise BadProjectors(f"environment size {n_env} < number of projectors {n_proj}")
    omega = 2 * np.pi / n_env
    lam = np.arange(n_proj) / total_time
    times = np.asarray(list(times), dtype=np.float64)
    snapshots = []
    gamma = np.zeros((times.size, n_proj, n_env))
    for t_idx, t in enumerate(times):
        elements = []
        for k in range(n_env):
            phases = np.exp(-1j * omega * k * t * lam)
            elements.append(sum(ph * p for ph, p in zip(phases, projs)) / np.sqrt(n_env))
        snapshots.append(Channel.from_elements(elements))
        ns = np.arange(n_env)
        for i in range(n_proj):
            for m in range(n_env):
                amp = np.exp(-1j * omega * ns * (t * lam[i] - m)).sum()
                gamma[t_idx, i, m] = (np.abs(amp) / n_env) ** 2
    return SweepResult(times=times, gamma=gamma, snapshots=tuple(snapshots))


def environment_pointer_weights(snapshot: Channel, projectors, n_env: int) -> np.ndarray:
    """Brute-force twin of the sweep's closed-form gamma.

    Pulls each shift-basis environment effect back through the
    complementary channel of the snapshot and decomposes it over the
    projector family.
    """
    projs = [asmatrix(p) for p in projectors]
    iso = dilate(snapshot)
    v = iso.v
    if iso.d_env != n_env:
        raise DimMismatch("snapshot has unexpected environment size")
    omega = 2 * np.pi / n_env
    ks = np.arange(n_env)
    gamma = np.zeros((len(projs), n_env))
    for m in range(n_env):
        # the element order of the dilation indexes the Fourier basis of the
        # environment; convert the shift-basis effect |phi_m><phi_m|
        phi = np.exp(-1j * omega * ks * m) / np.sqrt(n_env)
        q_m = np.outer(phi, phi.conj())
        pulled = dagger(v) @ np.kron(np.eye(snapshot.dim_out), q_m) @ v
        for i, p in enumerate(projs):
            tr_p = np.trace(p).real
            gamma[i, m] = float((np.trace(p @ pulled) / tr_p).real)
    return gamma


def effect_region_sample(c: Channel, grid: int) -> np.ndarray:
    """Coordinates (tr(A s_x), tr(A s_z), tr(A)) of preserved effects
    A = E*(B) over a deterministic grid of output effects B.

    Qubit outputs use a Bloch grid over (b_x, b_z, scale) with boundary
    densification; larger outputs grid the diagonal effect coefficients
    (a low-discrepancy Kronecker sequence plus binary vertices), which
    exhausts the dual image for rank-one element channels.
    """
    if c.dim_in != 2:
        raise DimMismatch(f"region sampling needs a qubit input, got dim {c.dim_in}")
    d_out = c.dim_out
    effects = []
    if d_out == 2:
        bs = np.linspace(-1.0, 1.0, grid)
        ss = np.linspace(0.0, 2.0, grid)
        sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
        sz = np.diag([1.0, -1.0]).astype(np.complex128)
        eye = np.eye(2, dtype=np.complex128)
        for bx in bs:
            for bz in bs:
                r = np.hypot(bx, bz)
                for s in ss:
                    rmax = min(s, 2.0 - s)
                    if rmax < 0:
                        continue
                    if r <= rmax + 1e-12:
                        effects.append((s * eye + bx * sx + bz * sz) / 2)
                    if r > 1e-12 and rmax > 0:
                        f = rmax / r
                        effects.append((s * eye + f * bx * sx + f * bz * sz) / 2)
    else:
        n_pts = grid**3
        primes = np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                           59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
                           127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
                           191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
                           257, 263, 269, 271, 277, 281, 283, 293, 307, 311][:d_out],
                          dtype=np.float64)
        alphas = np.sqrt(primes)
        for j in range(n_pts):
            coeffs = np.mod(j * alphas, 1.0)
            effects.append(np.diag(coeffs).astype(np.complex128))
        if 2**d_out <= n_pts:
            for mask in range(2**d_out):
                bits = [(mask >> b) & 1 for b in range(d_out)]
                effects.append(np.diag(np.array(bits, dtype=np.float64)).astype(np.complex128))
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sz = np.diag([1.0, -1.0]).astype(np.complex128)
    points = np.zeros((len(effects), 3))
    for idx, b in enumerate(effects):
        a = apply_dual(c, b)
        points[idx] = [
            float(np.trace(a @ sx).real),
            float(np.trace(a @ sz).real),
            float(np.trace(a).real),
        ]
    return points


def iterated_fixed_points(
    c: Channel, max_iter: int = 64, tol: Tolerance = DEFAULT_TOL
) -> OperatorBasisSet:
    """Span of operators fixed by the dual map, ||E*(A) - A|| ~ 0.

    Found as the near-nullspace of (M - 1) for the dual superoperator M;
    borderline directions are disambiguated by iterating the dual up to
    ``max_iter`` times, which amplifies any drift away from eigenvalue
    one.
    """
    if c.dim_in != c.dim_out:
        raise NotEndomorphic(f"dual iteration needs dim_in == dim_out, got {c.dim_in}, {c.dim_out}")
    d = c.dim_in
    m = np.zeros((d * d, d * d), dtype=np.complex128)
    for e in c.elements:
        m += np.kron(dagger(e), e.T)
    _, sv, vh = np.linalg.svd(m - np.eye(d * d))
    candidates = vh[sv <= max(tol.abs_eps * 10, 1e-8)].conj()
    kept = []
    for vec in candidates:
        a = vec.reshape(d, d)
        drift = a
        for _ in range(max_iter):
            drift = apply_dual(c, drift)
        if op_norm(drift - a) <= max(tol.abs_eps * max_iter, 1e-7):
            kept.append(a)
    from .algebras import span_of

    return span_of(kept, dim=d) if kept else span_of([], dim=d)
