"""Two-element-decomposition upper bound on the entanglement of formation
of 2 x N states of rank 2.

A rank-2 state rho_BC is purified by a single ancilla qubit A; sweeping
orthogonal measurements on A generates exactly the two-element ensemble
decompositions of rho_BC, and the probability-weighted entanglement of the
decomposition elements upper-bounds E_F. For N = 2 the bound is tight
(Wootters' optimal decomposition of a rank-2 two-qubit state has two
elements), which the test suite uses as ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discord import StepSchedule
from .gridsearch import Candidate, polish, select_starts
from .linalg import DimensionError, hermitian_eigensystem, von_neumann_entropy
from .states import RankError
from .tolerances import POLICY


@dataclass
class TwoElementDecomposition:
    """rho = p1 |phi1><phi1| + p2 |phi2><phi2| with pure states on B x C."""

    probabilities: np.ndarray
    states: np.ndarray  # (2, 2N), rows are the pure-state amplitudes
    average_entanglement: float

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.states.shape[1],) * 2, dtype=complex)
        for p, phi in zip(self.probabilities, self.states):
            out = out + p * np.outer(phi, phi.conj())
        return out


def _b_marginal_entropy(phi: np.ndarray, n_dim: int) -> float:
    """Entanglement entropy S(tr_C |phi><phi|) of a pure 2 x N state."""
    m = phi.reshape(2, n_dim)
    return von_neumann_entropy(m @ m.conj().T)


def decomposition_average(dec: TwoElementDecomposition) -> float:
    """Probability-weighted entanglement sum p_k S(tr_C of element k)."""
    n_dim = dec.states.shape[1] // 2
    total = 0.0
    for p, phi in zip(dec.probabilities, dec.states):
        if p < POLICY.probability_cutoff:
            continue
        total += p * _b_marginal_entropy(phi, n_dim)
    return float(total)


def _measurement_rows(theta: float, phi: float) -> np.ndarray:
    """Amplitudes e_i(k) = <xi_k|i> for the orthonormal ancilla basis
    xi_1 = (cos t/2, e^{i phi} sin t/2), xi_2 = (-e^{-i phi} sin t/2, cos t/2)."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    e = np.exp(1j * phi)
    return np.array([[c, np.conj(e) * s], [-e * s, c]], dtype=complex)


def _decomposition_at(
    theta: float, phi: float, sqrt_lam: np.ndarray, vecs: np.ndarray, n_dim: int
) -> tuple[float, np.ndarray, np.ndarray]:
    rows = _measurement_rows(theta, phi)
    raw = (rows * sqrt_lam[None, :]) @ vecs.T  # (2, 2N) unnormalized elements
    probs = np.einsum("kd,kd->k", raw, raw.conj()).real
    states = np.zeros_like(raw)
    value = 0.0
    for k in range(2):
        if probs[k] < POLICY.probability_cutoff:
            continue
        states[k] = raw[k] / math.sqrt(probs[k])
        value += probs[k] * _b_marginal_entropy(states[k], n_dim)
    return float(value), probs, states


def eof_two_element_bound(
    rho_bc: np.ndarray,
    schedule: StepSchedule | None = None,
    polish_enabled: bool = True,
    polish_starts: int = 8,
) -> tuple[float, TwoElementDecomposition]:
    """Minimize the two-element decomposition average over orthogonal
    ancilla measurements (theta, phi); returns (bound, minimizing decomposition).

    B must be the 2-dimensional (major) factor and N cannot exceed 8.
    """
    rho_bc = np.asarray(rho_bc, dtype=complex)
    d = rho_bc.shape[0]
    if rho_bc.ndim != 2 or rho_bc.shape[1] != d or d % 2 != 0:
        raise DimensionError(f"expected a 2N x 2N matrix, got shape {rho_bc.shape}")
    n_dim = d // 2
    if n_dim > 8:
        raise DimensionError(f"N = {n_dim} exceeds the supported maximum of 8")
    eig = hermitian_eigensystem(rho_bc)
    if eig.values[2:].max(initial=-np.inf) > POLICY.rank_tol:
        raise RankError(
            f"state has numerical rank > 2 (third eigenvalue {eig.values[2]:.3e})"
        )
    sqrt_lam = np.sqrt(np.clip(eig.values[:2], 0.0, None))
    vecs = eig.vectors[:, :2]

    if schedule is None:
        schedule = StepSchedule.default(2)

    def objective(x):
        return _decomposition_at(x[0], x[1], sqrt_lam, vecs, n_dim)[0]

    pool: list[tuple[int, Candidate]] = []
    best: Candidate | None = None
    for step_order, step in enumerate(schedule.steps):
        n_theta = int(math.floor(math.pi / step + 1e-9)) + 1
        n_phi = int(math.ceil(2.0 * math.pi / step - 1e-9))
        for i in range(n_theta):
            for j in range(n_phi):
                params = (i * step, j * step)
                val = objective(params)
                cand = Candidate(val, i * n_phi + j, params)
                pool.append((step_order, cand))
                if best is None or cand.value < best.value:
                    best = cand

    winner_value, winner_params = best.value, best.params
    if polish_enabled:
        starts = select_starts(pool, polish_starts, 1.5 * schedule.floor)
        for cand in starts:
            x, val, _ = polish(objective, cand.params, schedule.floor)
            if val < winner_value:
                winner_value = val
                winner_params = (float(x[0]), float(x[1]))

    value, probs, states_out = _decomposition_at(
        winner_params[0], winner_params[1], sqrt_lam, vecs, n_dim
    )
    dec = TwoElementDecomposition(
        probabilities=probs, states=states_out, average_entanglement=value
    )
    return value, dec
