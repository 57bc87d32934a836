"""Generalized subsystems: operator partitions, completely positive
reduction maps, correlation matrices, maximal-entropy embeddings, reduced
dynamics and correlation-matrix entanglement tests."""

from .errors import (
    ClosureError,
    ConsistencyError,
    ConvergenceError,
    DivergenceError,
    RankDeficiencyError,
    ValidationError,
)
from .linalg import (
    BipartiteShape,
    DEFAULT_TOL,
    elem_sym_invariants,
    is_hermitian,
    is_psd,
    matrix_exp,
    partial_trace,
    partial_transpose,
    von_neumann_entropy,
)
from .partitions import (
    CorrelationMatrix,
    MeanFieldReduction,
    Partition,
    PhaseSpaceModel,
    classical_correlation,
    coarse_grain_partition,
    compose,
    open_system_partition,
)
from .spin import (
    SphereGrid,
    SpinRep,
    inf_spin_phi_positive,
    maxent_sphere,
    reduced_membership,
    spin_generators,
    spin_half_pullback,
    spin_one_tilde,
    spin_partition,
    sphere_quadrature,
)
from .embeddings import (
    GibbsParams,
    Symbol,
    gibbs_embedding,
    gibbs_state,
    meanfield_embedding,
    product_embedding,
    quasifree_expectation,
)
from .dynamics import (
    LieAlgebraModel,
    LindbladModel,
    PauliModel,
    QuasiFreeModel,
    apply_superop,
    evolve_symbol,
    hartree_rhs,
    heisenberg_map,
    integrate,
    lie_coefficients,
    lie_corr_rhs,
    lindblad_rhs,
    one_particle_rhs,
    pauli_rhs,
    reduced_dynamics,
)
from .fock import (
    FockRep,
    additive_observable,
    boson_ops,
    fermion_ops,
    quasifree_lindblad_model,
    symbol_of,
    top_occupation_weight,
)
from .entanglement import (
    ComposedCorrelation,
    GMatrix,
    classical_representation_single,
    composed_pullback,
    ppt_test,
    temporal_correlation,
    two_boson_correlation,
    two_boson_pt_spectrum,
)

__version__ = "0.1.0"
