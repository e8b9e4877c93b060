"""Quantum discord of two-qubit states via extremal POVM minimization."""

from .discord import (
    DeviationResult,
    DiscordResult,
    StepSchedule,
    deviation,
    discord,
    discord_minimize,
    discord_rank2_exact,
)
from .eof_bound import TwoElementDecomposition, decomposition_average, eof_two_element_bound
from .linalg import (
    DimensionError,
    EigenSystem,
    NotPsdError,
    binary_entropy,
    hermitian_eigensystem,
    matrix_sqrt_psd,
    partial_trace,
    tensor_product,
    von_neumann_entropy,
)
from .measures import (
    ConditionalEntropyBreakdown,
    classical_correlation,
    concurrence,
    concurrence_r_matrix,
    conditional_entropy_bloch,
    conditional_entropy_direct,
    eof_from_concurrence,
    mutual_information,
)
from .povm import (
    ExtremalPovm,
    PovmElement,
    four_element,
    orthogonal_pair,
    planar_three,
    validate_povm,
)
from .scan import (
    ProfileRow,
    ScanConfig,
    ScanRecord,
    ScanSummary,
    mdms_transition_search,
    run_scan,
    step_size_profile,
)
from .states import (
    BlochForm,
    PureTripartite,
    RankError,
    ValidationReport,
    bell_state,
    classical_correlated,
    from_bloch,
    load_state,
    maximally_mixed,
    mdms_state,
    perturbed_mdms,
    product_state,
    purify,
    random_state,
    reduced_ac,
    save_state,
    swap_parties,
    to_bloch,
    validate,
)
from .tolerances import POLICY, NumericalPolicy

__version__ = "0.1.0"
