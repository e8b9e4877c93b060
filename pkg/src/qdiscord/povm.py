"""Extremal rank-1 qubit POVMs with 2, 3 or 4 elements in Bloch form.

An element is E_i = alpha_i (1 + n_i . sigma) with alpha_i > 0 and |n_i| = 1;
completeness requires sum alpha_i = 1 and sum alpha_i n_i = 0. All POVM math
is done on Bloch 3-vectors; 2x2 operators appear only in validation and in
the direct conditional-entropy path.

Constructors return ``None`` ("rejection") for infeasible angle tuples: grid
drivers treat the feasible set as a filter, so rejection is a value rather
than a fault.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import PAULIS
from .tolerances import POLICY


@dataclass
class PovmElement:
    alpha: float
    n: np.ndarray

    def operator(self) -> np.ndarray:
        """The 2x2 operator alpha (1 + n . sigma)."""
        op = np.eye(2, dtype=complex)
        for ni, s in zip(self.n, PAULIS):
            op = op + ni * s
        return self.alpha * op


@dataclass
class ExtremalPovm:
    m: int
    elements: list[PovmElement]

    @property
    def alphas(self) -> np.ndarray:
        return np.array([e.alpha for e in self.elements])

    @property
    def directions(self) -> np.ndarray:
        return np.array([e.n for e in self.elements])

    def operators(self) -> list[np.ndarray]:
        return [e.operator() for e in self.elements]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "elements": [
                {"alpha": float(e.alpha), "n": [float(x) for x in e.n]}
                for e in self.elements
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtremalPovm":
        elements = [
            PovmElement(alpha=float(e["alpha"]), n=np.asarray(e["n"], dtype=float))
            for e in data["elements"]
        ]
        return cls(m=int(data["m"]), elements=elements)


@dataclass
class PovmReport:
    """Residuals against the completeness and extremality constraints."""

    weight_sum_residual: float
    direction_sum_residual: float
    min_alpha: float
    max_unit_norm_residual: float
    coplanarity_det: float | None

    @property
    def is_valid(self) -> bool:
        ok = (
            self.weight_sum_residual <= 1e-10
            and self.direction_sum_residual <= 1e-10
            and self.min_alpha > 0.0
            and self.max_unit_norm_residual <= 1e-12
        )
        if self.coplanarity_det is not None:
            ok = ok and abs(self.coplanarity_det) > POLICY.coplanarity_cutoff
        return ok


def unit_vector(theta: float, phi: float) -> np.ndarray:
    """(sin t cos p, sin t sin p, cos t)."""
    st = np.sin(theta)
    return np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def rotation_from_z(theta: float, phi: float) -> np.ndarray:
    """SO(3) matrix Rz(phi) Ry(theta); maps z-hat to unit_vector(theta, phi)."""
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    ry = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
    rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    return rz @ ry


def plane_basis(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (e1, e2) spanning the plane with normal unit_vector(theta, phi).

    (e1, e2, normal) is the right-handed spherical triad (theta-hat, phi-hat, r-hat).
    """
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    e1 = np.array([ct * cp, ct * sp, -st])
    e2 = np.array([-sp, cp, 0.0])
    return e1, e2


def orthogonal_pair(theta: float, phi: float) -> ExtremalPovm:
    """Two-element POVM of orthogonal projectors along +-(theta, phi)."""
    n = unit_vector(theta, phi)
    return ExtremalPovm(
        m=2, elements=[PovmElement(0.5, n), PovmElement(0.5, -n)]
    )


def planar_three(
    plane_normal: tuple[float, float],
    psi: float,
    gamma2: float,
    gamma3: float,
) -> ExtremalPovm | None:
    """Three-element POVM with coplanar directions at in-plane angles
    (psi, psi + gamma2, psi + gamma3).

    Coplanarity is forced by sum alpha_i n_i = 0 for three unit vectors, so
    restricting to a plane loses nothing and the completeness system becomes
    square: one trace row plus the two in-plane vector rows. Returns None
    when the system is singular or any weight falls at or below the cutoff.
    """
    e1, e2 = plane_basis(*plane_normal)
    angles = np.array([psi, psi + gamma2, psi + gamma3])
    cos_g, sin_g = np.cos(angles), np.sin(angles)
    m = np.vstack([np.ones(3), cos_g, sin_g])
    if np.linalg.cond(m) > POLICY.condition_cutoff:
        return None
    alphas = np.linalg.solve(m, np.array([1.0, 0.0, 0.0]))
    if alphas.min() <= POLICY.weight_cutoff:
        return None
    dirs = np.outer(cos_g, e1) + np.outer(sin_g, e2)
    return ExtremalPovm(
        m=3, elements=[PovmElement(float(a), d) for a, d in zip(alphas, dirs)]
    )


def four_element(
    global_rotation: tuple[float, float],
    angles: tuple[float, float, float, float, float, float],
) -> ExtremalPovm | None:
    """Four-element POVM: n1 = z-hat and n_j = (theta_j, phi_j) for j = 2..4,
    all rotated by the global rotation (Omega, Phi).

    Weights come from the 4x4 completeness system (trace row + three vector
    rows) and do not depend on the global rotation. Returns None when the
    system is singular, a weight falls at or below the cutoff, or the four
    directions are coplanar (not extremal).
    """
    t2, p2, t3, p3, t4, p4 = angles
    u = np.vstack(
        [
            np.array([0.0, 0.0, 1.0]),
            unit_vector(t2, p2),
            unit_vector(t3, p3),
            unit_vector(t4, p4),
        ]
    )
    m = np.vstack([np.ones(4), u.T])
    if np.linalg.cond(m) > POLICY.condition_cutoff:
        return None
    alphas = np.linalg.solve(m, np.array([1.0, 0.0, 0.0, 0.0]))
    if alphas.min() <= POLICY.weight_cutoff:
        return None
    simplex_det = np.linalg.det((u[1:] - u[0]).T)
    if abs(simplex_det) <= POLICY.coplanarity_cutoff:
        return None
    rot = rotation_from_z(*global_rotation)
    dirs = u @ rot.T
    return ExtremalPovm(
        m=4, elements=[PovmElement(float(a), d) for a, d in zip(alphas, dirs)]
    )


def validate_povm(p: ExtremalPovm) -> PovmReport:
    alphas = p.alphas
    dirs = p.directions
    coplanarity = None
    if p.m == 4:
        coplanarity = float(np.linalg.det((dirs[1:] - dirs[0]).T))
    return PovmReport(
        weight_sum_residual=float(abs(alphas.sum() - 1.0)),
        direction_sum_residual=float(np.max(np.abs(alphas @ dirs))),
        min_alpha=float(alphas.min()),
        max_unit_norm_residual=float(
            np.max(np.abs(np.linalg.norm(dirs, axis=1) - 1.0))
        ),
        coplanarity_det=coplanarity,
    )


# ---------------------------------------------------------------------------
# Vectorized weight solvers used by the grid search. Same completeness
# systems as the scalar constructors, solved in closed (Cramer) form so that
# millions of angle tuples can be filtered per second.


def weights_three_batch(gamma2: np.ndarray, gamma3: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weights and feasibility for batches of relative in-plane angles.

    The three-element weights depend only on the relative angles
    (0, gamma2, gamma3), not on the plane orientation or offset. Returns
    (alphas (K, 3), feasible (K,)).
    """
    s2, s3 = np.sin(gamma2), np.sin(gamma3)
    det = np.sin(gamma3 - gamma2) - s3 + s2
    safe = np.where(np.abs(det) > 1e-12, det, 1.0)
    alphas = np.stack(
        [np.sin(gamma3 - gamma2) / safe, -s3 / safe, s2 / safe], axis=-1
    )
    feasible = (np.abs(det) > 1e-12) & (alphas.min(axis=-1) > POLICY.weight_cutoff)
    return alphas, feasible


def weights_four_batch(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weights, simplex determinant and feasibility for direction batches u (K, 4, 3).

    The determinant of the completeness system equals the coplanarity
    determinant det[u2-u1, u3-u1, u4-u1], so singularity and coplanarity are
    one and the same test here.
    """
    u0, u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2], u[:, 3]

    def det3(x, y, z):
        return np.einsum("ki,ki->k", x, np.cross(y, z))

    n0 = det3(u1, u2, u3)
    n1 = -det3(u0, u2, u3)
    n2 = det3(u0, u1, u3)
    n3 = -det3(u0, u1, u2)
    det = n0 + n1 + n2 + n3
    safe = np.where(np.abs(det) > POLICY.coplanarity_cutoff, det, 1.0)
    alphas = np.stack([n0, n1, n2, n3], axis=-1) / safe[:, None]
    feasible = (np.abs(det) > POLICY.coplanarity_cutoff) & (
        alphas.min(axis=-1) > POLICY.weight_cutoff
    )
    return alphas, det, feasible
