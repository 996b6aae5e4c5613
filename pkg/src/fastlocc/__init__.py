"""fastlocc: construction, simulation and verification of fast LOCC
protocols for bipartite nonlocal unitaries."""

from .linalg import (
    DEFAULT_TOL,
    KakInvariants,
    PermutationCertificate,
    as_complex_permutation,
    equal_up_to_global_phase,
    fourier_matrix,
    is_complex_hadamard,
    is_unitary,
    kak_invariants,
    operator_schmidt_coefficients,
    operator_schmidt_rank,
    phase_gate,
    shift_gate,
    tensor_product,
)
from .groups import (
    AbelianCycleStructure,
    FactorSystem,
    FiniteGroupTable,
    abelian_group,
    character_table,
    dihedral_group,
    dihedral_rep_matrices,
    factor_system_from_rep,
    is_normalized_factor_system,
    weighted_inner,
    weighted_pair_phase,
)
from .hadamard import (
    TCPair,
    StructureReport,
    build_tc,
    rows_form_group,
    certify_structure,
    verify_exchange,
    z_row_gate,
)
from .protocols import (
    BranchTranscript,
    ControlledUnitarySpec,
    DoubleGroupSpec,
    EmbeddingMap,
    InvalidSpec,
    ProtocolViolation,
    compress_controlled,
    correction_map,
    embed_unitary,
    entanglement_cost,
    simulate_fast_controlled,
    simulate_fast_double,
    simulate_slow_controlled,
    simulate_slow_double,
    simulate_symmetrized,
    target_unitary,
)
from .constructions import (
    ApproximationResult,
    ConversionResult,
    FastConditionReport,
    SearchResult,
    approximate_diagonal,
    approximate_phase_subset,
    build_c_matrix,
    check_fast_conditions,
    cyclic_coeffs,
    diagonalize_controlled,
    dihedral_coeffs,
    tc_from_coefficients,
    coefficient_search,
    convert_to_double_group,
)
from .fixtures import builtin_example, builtin_example_names

__version__ = "0.1.0"
