"""Electric-field entanglement witnesses for two-level emitter ensembles.

Natural units: k = 1 (lengths in 1/k), Gamma = 1 (times in 1/Gamma).
"""

from .concurrence import (
    PairReduction,
    global_concurrence,
    reduce_pair,
    wootters_concurrence,
)
from .cumulant import (
    ClosureBlowupError,
    CumulantState,
    cumulant_rhs,
    init_from_product,
    integrate_cumulant,
    moments_from_cumulant,
)
from .dicke import (
    DickeSpec,
    chebyshev_delta,
    chebyshev_interior_roots,
    chebyshev_phases,
    dicke_moments,
    dicke_state,
    s_k,
)
from .dynamics import (
    GreensCouplings,
    IntegrationError,
    Trajectory,
    couplings,
    detect_t_ent,
    first_crossing,
    greens_tensor,
    integrate,
    lindblad_rhs,
    witness_min_series,
)
from .field import (
    OperatorMoments,
    field_operator,
    moments,
    moments_from_phases,
    quadrature_operators,
)
from .geometry import (
    AtomConfig,
    Direction,
    PackingError,
    chain,
    direction_grid,
    plane_sweep,
    sphere_grid,
    spherical_cloud,
)
from .oracle import (
    FuzzReport,
    SeparableSpec,
    fuzz_witnesses,
    random_separable,
    separable_density,
)
from .qstate import (
    EXACT_CAP,
    DensityMatrix,
    Operator,
    PureState,
    antisymmetric_product_state,
    excited_state,
    expectation,
    ground_state,
    maximally_mixed,
    pauli_embed,
    phase_pauli,
    product_state,
    three_atom_phase_state,
)
from .witness import (
    WITNESS_LABELS,
    WitnessReport,
    detection_epsilon,
    phase_vector_moments,
    spin_squeezing_report,
    sweep,
    witness_report,
)

__version__ = "0.1.0"
