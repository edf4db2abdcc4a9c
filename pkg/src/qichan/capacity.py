"""Information capacity of observables via reduction to a classical channel.

Feeding an observable with a fixed ensemble of states turns it into a
classical channel whose capacity is computed by alternating maximization;
the outer search over ensembles (restarts plus coordinate ascent on the
states) yields a certified lower bound together with the witnessing
ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .channels import DiscreteObservable, povm_probabilities
from .decoherence import StochasticMap
from .errors import DimMismatch
from .numlin import asmatrix
from .rand import generator, random_pure_state

_LOG_FLOOR = 1e-30


@dataclass(frozen=True)
class Ensemble:
    """Prior probabilities over a finite family of states."""

    priors: np.ndarray
    states: tuple[np.ndarray, ...]

    @staticmethod
    def from_states(priors, states) -> "Ensemble":
        priors = np.ascontiguousarray(priors, dtype=np.float64)
        states = tuple(asmatrix(s) for s in states)
        if priors.ndim != 1 or priors.size != len(states):
            raise DimMismatch("one prior per state required")
        if abs(priors.sum() - 1.0) > 1e-9 or priors.min() < -1e-12:
            raise ValueError("priors must form a probability vector")
        return Ensemble(priors=priors, states=states)

    @property
    def size(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class CapacityEstimate:
    bits: float
    ensemble: Ensemble


def shannon_capacity(p: StochasticMap, tol: float = 1e-12, max_iter: int = 10000) -> float:
    """Capacity in bits of a classical channel (column-stochastic matrix)."""
    pyx = np.ascontiguousarray(p.entries.T)  # rows become inputs
    value, _, _ = kernels.blahut_arimoto(pyx, tol=tol, max_iter=max_iter)
    return float(value)


def _entropy_bits(dist: np.ndarray) -> float:
    d = dist[dist > 0]
    return float(-(d * np.log2(d)).sum())


def holevo_quantity(x: DiscreteObservable, e: Ensemble) -> float:
    """S(X(avg)) - sum_i mu_i S(X(rho_i)) in bits, for the output distributions."""
    if e.states and e.states[0].shape != (x.dim, x.dim):
        raise DimMismatch(f"state dim {e.states[0].shape} != observable dim {x.dim}")
    avg = sum(mu * rho for mu, rho in zip(e.priors, e.states))
    total = _entropy_bits(np.clip(povm_probabilities(x, avg), 0.0, None))
    conditional = sum(
        mu * _entropy_bits(np.clip(povm_probabilities(x, rho), 0.0, None))
        for mu, rho in zip(e.priors, e.states)
    )
    return float(total - conditional)


def _conditional_matrix(x: DiscreteObservable, states) -> np.ndarray:
    return np.array([np.clip(povm_probabilities(x, rho), 0.0, None) for rho in states])


def _mutual_information(pyx: np.ndarray, priors: np.ndarray) -> float:
    qy = priors @ pyx
    safe = (pyx > 0) & (qy[None, :] > 0)
    ratio = np.divide(pyx, qy[None, :], out=np.ones_like(pyx), where=safe)
    terms = np.where(safe, pyx * np.log2(ratio), 0.0)
    return float(priors @ terms.sum(axis=1))


def _ascend_states(
    x: DiscreteObservable, states: list[np.ndarray], priors: np.ndarray, rounds: int
) -> list[np.ndarray]:
    """Coordinate ascent: push each state toward the maximizer of its
    relative-entropy score against the frozen mixture output."""
    states = list(states)
    for _ in range(rounds):
        pyx = _conditional_matrix(x, states)
        qy = np.clip(priors @ pyx, _LOG_FLOOR, None)
        improved = False
        for i, rho in enumerate(states):
            p_i = np.clip(pyx[i], _LOG_FLOOR, None)
            score = np.log2(p_i / qy)
            g = sum(s * eff for s, eff in zip(score, x.effects))
            w, u = np.linalg.eigh((g + g.conj().T) / 2)
            psi = u[:, -1]
            candidate = np.outer(psi, psi.conj())
            old = float(pyx[i] @ np.log2(p_i / qy))
            p_new = np.clip(povm_probabilities(x, candidate), 0.0, None)
            new = float(p_new @ np.log2(np.clip(p_new, _LOG_FLOOR, None) / qy))
            if new > old + 1e-15:
                states[i] = candidate
                improved = True
        if not improved:
            break
    return states


def observable_capacity(
    x: DiscreteObservable,
    restarts: int = 8,
    tol: float = 1e-9,
    seed: int = 0,
    warm_ensembles: tuple[Ensemble, ...] = (),
    max_rounds: int = 60,
    max_states: int | None = None,
) -> CapacityEstimate:
    """Lower-bound estimate of the capacity of an observable.

    Alternates prior optimization (alternating maximization on the induced
    classical channel) with coordinate ascent on up to dim^2 pure states,
    over several seeded restarts; returns the best value with its witness
    ensemble.  For a sharp observable the eigenstate warm start already
    attains log2(#outcomes).  ``max_states`` caps the ensemble size of the
    search (for comparisons against fixed-size oracles).
    """
    d = x.dim
    cap = d * d if max_states is None else max(2, min(max_states, d * d))
    rng = generator(seed)
    starts: list[list[np.ndarray]] = []
    top_states = []
    bottom_states = []
    for eff in x.effects:
        w, u = np.linalg.eigh((eff + eff.conj().T) / 2)
        top_states.append(np.outer(u[:, -1], u[:, -1].conj()))
        # a state nulling one outcome is maximally distinguishable there
        bottom_states.append(np.outer(u[:, 0], u[:, 0].conj()))
    starts.append(top_states[:cap])
    starts.append(bottom_states[:cap])
    starts.append((top_states + bottom_states)[:cap])
    for top, bottom in zip(top_states, bottom_states):
        starts.append([top, bottom][:cap])
    for _ in range(max(0, restarts - 1)):
        k = int(rng.integers(2, cap + 1))
        starts.append(
            [np.outer(v, v.conj()) for v in (random_pure_state(rng, d) for _ in range(k))]
        )
    for ens in warm_ensembles:
        starts.append([np.array(s) for s in ens.states][:cap])

    best_bits = 0.0
    best: Ensemble | None = None
    for states in starts:
        priors = np.full(len(states), 1.0 / len(states))
        value = 0.0
        for _ in range(max_rounds):
            pyx = _conditional_matrix(x, states)
            ba_bits, priors, _ = kernels.blahut_arimoto(pyx, tol=tol / 10, max_iter=2000)
            states = _ascend_states(x, states, priors, rounds=2)
            new_value = _mutual_information(_conditional_matrix(x, states), priors)
            if new_value - value < tol:
                value = max(value, new_value)
                break
            value = new_value
        if value > best_bits or best is None:
            best_bits = value
            best = Ensemble.from_states(priors, states)
    assert best is not None
    return CapacityEstimate(bits=float(best_bits), ensemble=best)
