"""Dense complex linear algebra for small matrices (dimension <= 16).

Everything here operates on plain ``numpy`` arrays of complex128. The
Hermitian eigensolver is a cyclic Jacobi iteration: unconditionally stable
at these sizes and free of any external solver dependency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tolerances import POLICY


class DimensionError(ValueError):
    pass


class NotPsdError(ValueError):
    pass


@dataclass
class EigenSystem:
    """Eigenvalues sorted descending with matching orthonormal column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values) @ v.conj().T


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (M + M^dagger) / 2."""
    return (m + m.conj().T) / 2.0


def _jacobi(a: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Each (p, q) rotation zeroes the off-diagonal pair with a complex Givens
    rotation; sweeps repeat until the off-diagonal Frobenius mass is at
    round-off level.
    """
    n = a.shape[0]
    a = a.astype(complex, copy=True)
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    if fro == 0.0 or n == 1:
        return np.real(np.diag(a)), v
    stop = (1e-14 * fro) ** 2
    skip = 1e-18 * fro
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if np.sum(off * off) <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                absa = abs(apq)
                if absa <= skip:
                    continue
                phase = apq / absa
                tau = (a[q, q].real - a[p, p].real) / (2.0 * absa)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # A <- J^dagger A J with J[p,p]=c, J[p,q]=s*phase,
                # J[q,p]=-s*conj(phase), J[q,q]=c
                col_p = c * a[:, p] - s * np.conj(phase) * a[:, q]
                col_q = s * phase * a[:, p] + c * a[:, q]
                a[:, p] = col_p
                a[:, q] = col_q
                row_p = c * a[p, :] - s * phase * a[q, :]
                row_q = s * np.conj(phase) * a[p, :] + c * a[q, :]
                a[p, :] = row_p
                a[q, :] = row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vol_p = c * v[:, p] - s * np.conj(phase) * v[:, q]
                vol_q = s * phase * v[:, p] + c * v[:, q]
                v[:, p] = vol_p
                v[:, q] = vol_q
    return np.real(np.diag(a)), v


def hermitian_eigensystem(m: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is hermitized as (M + M^dagger)/2 before solving; callers are
    expected to stay within a hermiticity residual of ~1e-9.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > POLICY.max_eigen_dim:
        raise DimensionError(
            f"dimension {m.shape[0]} exceeds the eigensolver cap {POLICY.max_eigen_dim}"
        )
    values, vectors = _jacobi(hermitize(m))
    order = np.argsort(-values, kind="stable")
    return EigenSystem(values=values[order], vectors=vectors[:, order])


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor (subsystem A) as the major index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(rho: np.ndarray, subsystem: str) -> np.ndarray:
    """Trace a 4x4 two-qubit state down to the kept 2x2 factor.

    ``subsystem`` names the party that is traced OUT: ``"B"`` keeps A,
    ``"A"`` keeps B.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 matrix, got shape {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)
    if subsystem == "B":
        return np.einsum("ijkj->ik", r)
    if subsystem == "A":
        return np.einsum("ijil->jl", r)
    raise ValueError("subsystem must be 'A' or 'B'")


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix.

    Eigenvalues within the PSD clamp of zero are treated as exact zeros:
    sqrt amplifies round-off noise near zero (sqrt(1e-17) ~ 3e-9), which
    would otherwise contaminate rank-deficient inputs.
    """
    eig = hermitian_eigensystem(m)
    if eig.values.min() < -POLICY.psd_clamp:
        raise NotPsdError(f"smallest eigenvalue {eig.values.min():.3e} below PSD tolerance")
    w = np.sqrt(np.where(eig.values > POLICY.psd_clamp, eig.values, 0.0))
    v = eig.vectors
    return (v * w) @ v.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -sum lambda_i log2 lambda_i in bits, with 0 log 0 = 0."""
    w = hermitian_eigensystem(rho).values
    w = w[w > POLICY.entropy_log_cutoff]
    if w.size == 0:
        return 0.0
    return float(max(0.0, -np.sum(w * np.log2(w))))


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2 (1-x) in bits."""
    if x < -1e-12 or x > 1.0 + 1e-12:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    if x <= POLICY.entropy_log_cutoff or 1.0 - x <= POLICY.entropy_log_cutoff:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))
