"""Construction, validation, conversion and random generation of density matrices.

Basis ordering is |00>, |01>, |10>, |11> with party A as the major index
everywhere; the measured party downstream is always B.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, hermitian_eigensystem, hermitize, tensor_product
from .tolerances import POLICY


class RankError(ValueError):
    pass


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

_BELL_VECTORS = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
}


@dataclass
class ValidationReport:
    """Diagnostics of how far a matrix is from being a density matrix."""

    dim: int
    hermiticity_residual: float
    trace_deviation: float
    min_eigenvalue: float
    rank: int

    @property
    def is_valid(self) -> bool:
        return (
            self.hermiticity_residual <= 1e-10
            and self.trace_deviation <= 1e-10
            and self.min_eigenvalue >= -POLICY.psd_clamp
        )


@dataclass
class BlochForm:
    """Local Bloch vectors a, b and the 3x3 correlation matrix T of a two-qubit state.

    T[i, j] = tr(rho sigma_i x sigma_j), so the first index belongs to A and
    the second to B. For a state with diagonal T the diagonal entries are the
    familiar correlation coefficients (c_x, c_y, c_z).
    """

    a: np.ndarray
    b: np.ndarray
    t: np.ndarray


@dataclass
class PureTripartite:
    """Pure state on H_A x H_B x H_C with declared local dimensions."""

    amplitudes: np.ndarray
    dims: tuple[int, int, int]

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def trace_out_ancilla(self) -> np.ndarray:
        """Trace out the last factor C, recovering the original AB state."""
        da, db, dc = self.dims
        psi = self.amplitudes.reshape(da * db, dc)
        return psi @ psi.conj().T


def validate(rho: np.ndarray) -> ValidationReport:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    trace_dev = float(abs(np.trace(rho) - 1.0))
    w = hermitian_eigensystem(rho).values
    rank = int(np.sum(w > POLICY.rank_tol))
    return ValidationReport(
        dim=rho.shape[0],
        hermiticity_residual=herm,
        trace_deviation=trace_dev,
        min_eigenvalue=float(w.min()),
        rank=rank,
    )


def numerical_rank(rho: np.ndarray) -> int:
    w = hermitian_eigensystem(rho).values
    return int(np.sum(w > POLICY.rank_tol))


def to_bloch(rho: np.ndarray) -> BlochForm:
    """Bloch-form parameters (a, b, T) of a two-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 matrix, got shape {rho.shape}")
    eye = np.eye(2, dtype=complex)
    a = np.array([np.trace(rho @ tensor_product(s, eye)).real for s in PAULIS])
    b = np.array([np.trace(rho @ tensor_product(eye, s)).real for s in PAULIS])
    t = np.array(
        [
            [np.trace(rho @ tensor_product(si, sj)).real for sj in PAULIS]
            for si in PAULIS
        ]
    )
    return BlochForm(a=a, b=b, t=t)


def from_bloch(form: BlochForm) -> np.ndarray:
    """Reconstruct rho = (1 + a.sigma x 1 + 1 x b.sigma + sum T_ij sigma_i x sigma_j)/4."""
    eye = np.eye(2, dtype=complex)
    rho = tensor_product(eye, eye)
    for i, s in enumerate(PAULIS):
        rho = rho + form.a[i] * tensor_product(s, eye)
        rho = rho + form.b[i] * tensor_product(eye, s)
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            rho = rho + form.t[i, j] * tensor_product(si, sj)
    rho = rho / 4.0
    w = hermitian_eigensystem(rho).values
    if w.min() < -POLICY.psd_clamp:
        raise ValueError(
            f"Bloch parameters are unphysical: smallest eigenvalue {w.min():.3e}"
        )
    return rho


def random_state(rank: int, seed: int, dim: int = 4) -> np.ndarray:
    """Random fixed-rank density matrix from the Ginibre-induced measure.

    A dim x rank standard complex Gaussian matrix G gives rho = G G^dag / tr(G G^dag).
    The generator is the counter-based Philox stream keyed by ``seed``, so
    results are reproducible across platforms and parallel schedules.
    """
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must be between 1 and {dim}, got {rank}")
    rng = np.random.Generator(np.random.Philox(seed))
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def bell_state(which: str) -> np.ndarray:
    """Bell-state projector; ``which`` is one of phi+, phi-, psi+, psi-."""
    key = which.lower().replace("bell-", "")
    if key not in _BELL_VECTORS:
        raise ValueError(f"unknown Bell state {which!r}; expected one of {sorted(_BELL_VECTORS)}")
    v = _BELL_VECTORS[key]
    return np.outer(v, v.conj())


def product_state(rho_a: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    return tensor_product(rho_a, rho_b)


def classical_correlated(p: float) -> np.ndarray:
    """p |00><00| + (1-p) |11><11|."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = p
    rho[3, 3] = 1.0 - p
    return rho


def maximally_mixed(dim: int = 4) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def mdms_state(m: float, eps: float) -> np.ndarray:
    """Rank-3 mixture (1-eps)(m |00><00| + (1-m) |11><11|) + eps |psi-><psi-|."""
    if not 0.0 < m < 1.0:
        raise ValueError(f"m must lie in (0, 1), got {m}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return (1.0 - eps) * (
        m * classical_correlated(1.0) + (1.0 - m) * classical_correlated(0.0)
    ) + eps * bell_state("psi-")


def perturbed_mdms(base: np.ndarray, lam: float) -> np.ndarray:
    """Convex mixture (1-lambda) base + lambda |phi+><phi+|."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return (1.0 - lam) * np.asarray(base, dtype=complex) + lam * bell_state("phi+")


def purify(rho: np.ndarray, local_dims: tuple[int, int] | None = None) -> PureTripartite:
    """Purification |Psi> = sum_i sqrt(lambda_i) |psi_i> |i>_C over the nonzero eigenpairs.

    The ancilla dimension equals the numerical rank and |i>_C is the
    computational basis (the basis choice is free; this one is fixed for
    determinism).
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if local_dims is None:
        local_dims = (2, d // 2) if d % 2 == 0 else (1, d)
    eig = hermitian_eigensystem(rho)
    keep = eig.values > POLICY.rank_tol
    lam = eig.values[keep]
    vecs = eig.vectors[:, keep]
    r = int(lam.size)
    psi = np.zeros(d * r, dtype=complex)
    for i in range(r):
        psi[i::r] = np.sqrt(lam[i]) * vecs[:, i]
    norm = np.linalg.norm(psi)
    return PureTripartite(amplitudes=psi / norm, dims=(local_dims[0], local_dims[1], r))


def reduced_ac(rho_ab: np.ndarray) -> np.ndarray:
    """tr_B of the canonical rank-2 purification, as a two-qubit A x C state.

    The ancilla C is padded to a qubit when the input is rank 1, keeping the
    output 4x4 either way.
    """
    rho_ab = np.asarray(rho_ab, dtype=complex)
    if rho_ab.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 matrix, got shape {rho_ab.shape}")
    eig = hermitian_eigensystem(rho_ab)
    if eig.values[2:].max(initial=-np.inf) > POLICY.rank_tol:
        raise RankError(
            f"state has numerical rank > 2 (third eigenvalue {eig.values[2]:.3e})"
        )
    lam = np.clip(eig.values[:2], 0.0, None)
    vecs = eig.vectors[:, :2]
    # psi[a, b, c] amplitudes of the purification with C padded to dimension 2
    psi = np.zeros((2, 2, 2), dtype=complex)
    for i in range(2):
        psi[:, :, i] = np.sqrt(lam[i]) * vecs[:, i].reshape(2, 2)
    rho_ac = np.einsum("abc,dbe->acde", psi, psi.conj()).reshape(4, 4)
    return rho_ac


def swap_parties(rho: np.ndarray) -> np.ndarray:
    """Exchange the roles of A and B in a two-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 matrix, got shape {rho.shape}")
    return rho.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


# ---------------------------------------------------------------------------
# File formats


def state_to_dict(rho: np.ndarray) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {
        "dim": rho.shape[0],
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }


def state_from_dict(data: dict) -> np.ndarray:
    try:
        dim = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed state record: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(
            f"state arrays must be {dim}x{dim}; got re {re.shape}, im {im.shape}"
        )
    if not (np.isfinite(re).all() and np.isfinite(im).all()):
        raise ValueError("state entries must be finite doubles")
    return re + 1j * im


def save_state(rho: np.ndarray, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_dict(rho), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_state(path: str) -> np.ndarray:
    with open(path) as fh:
        return state_from_dict(json.load(fh))


BLOCH_CSV_HEADER = "a1,a2,a3,b1,b2,b3,T11,T12,T13,T21,T22,T23,T31,T32,T33"


def bloch_csv_row(form: BlochForm) -> str:
    vals = list(form.a) + list(form.b) + list(form.t.reshape(-1))
    return ",".join(repr(float(v)) for v in vals)
