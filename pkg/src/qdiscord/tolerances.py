"""Single source of truth for the numerical policy constants used across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericalPolicy:
    """Fixed global cutoffs and thresholds.

    All modules read these from the shared ``POLICY`` instance instead of
    hardcoding their own values, so the numerical policy can be audited in
    one place.
    """

    # eigenvalues above -psd_clamp are clamped to 0; anything below is an error
    psd_clamp: float = 1e-10
    # eigenvalues below this contribute 0 to entropies (0 log 0 = 0 convention)
    entropy_log_cutoff: float = 1e-14
    # eigenvalues above this count toward the numerical rank of a unit-trace state
    rank_tol: float = 1e-9
    # measurement outcomes with probability below this are skipped
    probability_cutoff: float = 1e-14
    # POVM weights at or below this reject the angle tuple as infeasible
    weight_cutoff: float = 1e-10
    # |det| of the 4-element direction simplex must exceed this (non-coplanarity)
    coplanarity_cutoff: float = 1e-8
    # linear systems with condition number above this are treated as singular
    condition_cutoff: float = 1e10
    # deviations delta2 - delta_m below this are reported as zero-deviation events
    deviation_threshold: float = 1e-9
    # ties between POVM element counts are broken toward smaller m at this tolerance
    tie_tol: float = 1e-12
    # hermiticity residual allowed on eigensolver input (hermitized before solving)
    hermiticity_input_tol: float = 1e-9
    # largest matrix dimension the dense eigensolver accepts (2N with N <= 8)
    max_eigen_dim: int = 16


POLICY = NumericalPolicy()
