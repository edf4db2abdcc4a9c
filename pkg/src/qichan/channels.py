"""Quantum channels, observables and instruments in element (Kraus) form.

A channel is stored as its list of element matrices; no canonical form is
imposed, so two channels are compared by their action on a full operator
basis (equivalently, by their Choi matrices), never element-wise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    NotPSD,
    NotTracePreserving,
    ZeroProbabilityOutcome,
)
from .numlin import (
    DEFAULT_TOL,
    Tolerance,
    asmatrix,
    dagger,
    hermitian_eig,
    op_norm,
)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Channel:
    """Completely positive map given by elements E_k, rho -> sum E_k rho E_k^dag."""

    dim_in: int
    dim_out: int
    elements: tuple[np.ndarray, ...]

    @staticmethod
    def from_elements(elements) -> "Channel":
        mats = tuple(_freeze(asmatrix(e)) for e in elements)
        if not mats:
            raise DimMismatch("a channel needs at least one element")
        d_out, d_in = mats[0].shape
        for e in mats:
            if e.shape != (d_out, d_in):
                raise DimMismatch(f"element shape {e.shape} != {(d_out, d_in)}")
        return Channel(dim_in=d_in, dim_out=d_out, elements=mats)

    def stacked(self) -> np.ndarray:
        """Elements as one (n, dim_out, dim_in) array."""
        return np.stack(self.elements)

    @property
    def n_elements(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class DiscreteObservable:
    """Finite-outcome observable: effects X_i summing to the identity."""

    dim: int
    effects: tuple[np.ndarray, ...]

    @staticmethod
    def from_effects(effects) -> "DiscreteObservable":
        mats = tuple(_freeze(asmatrix(x)) for x in effects)
        if not mats:
            raise DimMismatch("an observable needs at least one effect")
        d = mats[0].shape[0]
        for x in mats:
            if x.shape != (d, d):
                raise DimMismatch(f"effect shape {x.shape} != {(d, d)}")
        return DiscreteObservable(dim=d, effects=mats)

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)


@dataclass(frozen=True)
class Instrument:
    """Measurement with state update: one completely positive branch per outcome.

    Branch i is a tuple of element matrices; its effect is
    X_i = sum_k F_ik^dag F_ik, and the branch sum must be trace preserving.
    """

    dim: int
    branches: tuple[tuple[np.ndarray, ...], ...]

    @staticmethod
    def from_branches(branches) -> "Instrument":
        groups = tuple(tuple(_freeze(asmatrix(f)) for f in branch) for branch in branches)
        if not groups or any(not g for g in groups):
            raise DimMismatch("instrument needs at least one element per branch")
        d = groups[0][0].shape[1]
        for g in groups:
            for f in g:
                if f.shape[1] != d or f.shape[0] != g[0].shape[0]:
                    raise DimMismatch("inconsistent branch element shapes")
        return Instrument(dim=d, branches=groups)

    def effect(self, i: int) -> np.ndarray:
        """The effect associated with branch i."""
        return sum(dagger(f) @ f for f in self.branches[i])

    def observable(self) -> DiscreteObservable:
        return DiscreteObservable.from_effects([self.effect(i) for i in range(len(self.branches))])


@dataclass(frozen=True)
class Isometry:
    """V: H_in -> H_out (x) H_env with V^dag V = 1."""

    v: np.ndarray
    d_out: int
    d_env: int

    @property
    def d_in(self) -> int:
        return self.v.shape[1]


@dataclass(frozen=True)
class ChannelReport:
    trace_preserving: bool
    completely_positive: bool
    tp_residual: float
    cp_min_eigenvalue: float


def validate_channel(c: Channel, tol: Tolerance = DEFAULT_TOL) -> ChannelReport:
    """Check trace preservation (sum E^dag E = 1) and complete positivity (PSD Choi)."""
    acc = np.zeros((c.dim_in, c.dim_in), dtype=np.complex128)
    for e in c.elements:
        acc += dagger(e) @ e
    tp_res = op_norm(acc - np.eye(c.dim_in))
    w = np.linalg.eigvalsh(choi_of(c))
    min_eig = float(w[0]) if w.size else 0.0
    return ChannelReport(
        trace_preserving=bool(tp_res <= tol.abs_eps),
        completely_positive=bool(min_eig >= -tol.abs_eps),
        tp_residual=float(tp_res),
        cp_min_eigenvalue=min_eig,
    )


def require_trace_preserving(c: Channel, tol: Tolerance = DEFAULT_TOL) -> None:
    acc = np.zeros((c.dim_in, c.dim_in), dtype=np.complex128)
    for e in c.elements:
        acc += dagger(e) @ e
    res = op_norm(acc - np.eye(c.dim_in))
    if res > tol.abs_eps:
        raise NotTracePreserving(float(res), tol.abs_eps)


def apply(c: Channel, rho) -> np.ndarray:
    """Schroedinger picture: rho -> sum_k E_k rho E_k^dag."""
    rho = asmatrix(rho)
    if rho.shape != (c.dim_in, c.dim_in):
        raise DimMismatch(f"state shape {rho.shape} != {(c.dim_in, c.dim_in)}")
    k = c.stacked()
    return np.einsum("aij,jl,aml->im", k, rho, k.conj(), optimize=True)


def apply_dual(c: Channel, a) -> np.ndarray:
    """Heisenberg picture: A -> sum_k E_k^dag A E_k."""
    a = asmatrix(a)
    if a.shape != (c.dim_out, c.dim_out):
        raise DimMismatch(f"effect shape {a.shape} != {(c.dim_out, c.dim_out)}")
    k = c.stacked()
    return np.einsum("aji,jl,alm->im", k.conj(), a, k, optimize=True)


def compose(c2: Channel, c1: Channel) -> Channel:
    """Channel running c1 first, then c2; elements are all products."""
    if c1.dim_out != c2.dim_in:
        raise DimMismatch(f"compose: {c1.dim_out} != {c2.dim_in}")
    elements = [e2 @ e1 for e1 in c1.elements for e2 in c2.elements]
    return Channel.from_elements(elements)


def tensor(c1: Channel, c2: Channel) -> Channel:
    """Independent parallel action on a tensor product."""
    elements = [np.kron(e1, e2) for e1 in c1.elements for e2 in c2.elements]
    return Channel.from_elements(elements)


def identity_channel(d: int) -> Channel:
    return Channel.from_elements([np.eye(d)])


def unitary_channel(u) -> Channel:
    return Channel.from_elements([asmatrix(u)])


def choi_of(c: Channel) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) E(|i><j|); PSD exactly when the map is CP."""
    d_in, d_out = c.dim_in, c.dim_out
    j = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for e in c.elements:
        w = e.T.reshape(-1)  # w[(i, o)] = E[o, i]
        j += np.outer(w, w.conj())
    return j


def kraus_from_choi(j, dim_in: int, dim_out: int, tol: Tolerance = DEFAULT_TOL) -> Channel:
    """Recover a channel from its Choi matrix via spectral decomposition.

    The number of elements equals the numerical rank of the Choi matrix;
    raises NotPSD when an eigenvalue falls below ``-abs_eps``.
    """
    j = asmatrix(j)
    if j.shape != (dim_in * dim_out, dim_in * dim_out):
        raise DimMismatch(f"Choi shape {j.shape} != {(dim_in * dim_out,) * 2}")
    w, u = hermitian_eig(j, tol)
    if w.size and w[0] < -tol.abs_eps:
        raise NotPSD(float(w[0]), tol.abs_eps)
    wmax = float(w[-1]) if w.size else 0.0
    keep = w > tol.rank_rel * max(wmax, 0.0)
    elements = []
    for lam, vec in zip(w[keep], u[:, keep].T):
        elements.append(np.sqrt(lam) * vec.reshape(dim_in, dim_out).T)
    if not elements:
        raise NotPSD(0.0, tol.abs_eps)
    return Channel.from_elements(elements)


def dilate(c: Channel, tol: Tolerance = DEFAULT_TOL) -> Isometry:
    """Stack the elements into an isometry V with E_k = (1 (x) <k|) V.

    The environment dimension equals the number of elements and its basis
    order follows the element order.
    """
    k = c.stacked()  # (n, d_out, d_in)
    n = k.shape[0]
    v = k.transpose(1, 0, 2).reshape(c.dim_out * n, c.dim_in)
    res = op_norm(dagger(v) @ v - np.eye(c.dim_in))
    if res > tol.abs_eps:
        raise NotTracePreserving(float(res), tol.abs_eps)
    return Isometry(v=_freeze(v), d_out=c.dim_out, d_env=n)


def complement(c: Channel) -> Channel:
    """Channel to the environment of the dilation of ``c``.

    With V from :func:`dilate`, the complement has elements
    F_j = (<j| (x) 1) V, one per output basis vector of ``c``; it is
    fixed only up to a unitary on the environment, and this choice is
    the deterministic one induced by element order.
    """
    k = c.stacked()
    elements = [np.ascontiguousarray(k[:, j, :]) for j in range(c.dim_out)]
    return Channel.from_elements(elements)


def channels_equal(c1: Channel, c2: Channel, eps: float = 1e-8) -> bool:
    """Equality of action on a full operator basis (Choi matrices match)."""
    if (c1.dim_in, c1.dim_out) != (c2.dim_in, c2.dim_out):
        return False
    return op_norm(choi_of(c1) - choi_of(c2)) <= eps


def povm_probabilities(x: DiscreteObservable, rho) -> np.ndarray:
    """Outcome distribution tr(rho X_i)."""
    rho = asmatrix(rho)
    if rho.shape != (x.dim, x.dim):
        raise DimMismatch(f"state shape {rho.shape} != {(x.dim, x.dim)}")
    return np.array([float(np.trace(rho @ xi).real) for xi in x.effects])


def measure_instrument(inst: Instrument, rho, tol: Tolerance = DEFAULT_TOL):
    """All (probability, post-state) branches; post-state is None at probability ~ 0."""
    rho = asmatrix(rho)
    if rho.shape != (inst.dim, inst.dim):
        raise DimMismatch(f"state shape {rho.shape} != {(inst.dim, inst.dim)}")
    results = []
    for branch in inst.branches:
        out = sum(f @ rho @ dagger(f) for f in branch)
        p = float(np.trace(out).real)
        results.append((p, out / p if p > tol.abs_eps else None))
    return results


def luders_collapse(
    x: DiscreteObservable, rho, outcome: int, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """Projective state update P_i rho P_i / tr(P_i rho) for a sharp observable."""
    rho = asmatrix(rho)
    p_i = x.effects[outcome]
    if op_norm(p_i @ p_i - p_i) > tol.abs_eps:
        raise ValueError(f"effect {outcome} is not a projector; collapse needs a sharp observable")
    prob = float(np.trace(p_i @ rho).real)
    if prob <= tol.abs_eps:
        raise ZeroProbabilityOutcome(f"outcome {outcome} has probability {prob:.3e}")
    return p_i @ rho @ p_i / prob


def instrument_from_sharp(x: DiscreteObservable) -> Instrument:
    """The projective instrument F_i(rho) = P_i rho P_i of a sharp observable."""
    return Instrument.from_branches([(p,) for p in x.effects])


def observable_is_sharp(x: DiscreteObservable, eps: float = DEFAULT_TOL.abs_eps) -> bool:
    return all(op_norm(e @ e - e) <= eps for e in x.effects)


def validate_observable(x: DiscreteObservable, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Residuals for the observable invariants (Hermitian effects in [0,1], summing to 1)."""
    herm = max(op_norm(e - dagger(e)) for e in x.effects)
    spec_low = 0.0
    spec_high = 0.0
    for e in x.effects:
        w = np.linalg.eigvalsh((e + dagger(e)) / 2)
        spec_low = min(spec_low, float(w[0]))
        spec_high = max(spec_high, float(w[-1]))
    total = sum(x.effects)
    completeness = op_norm(total - np.eye(x.dim))
    return {
        "hermiticity": float(herm),
        "min_eigenvalue": spec_low,
        "max_eigenvalue": spec_high,
        "completeness": float(completeness),
    }
