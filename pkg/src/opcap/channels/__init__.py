"""Channel representations, VN-channels and the concrete channel families."""

from .algebra import (
    BlockStructure,
    SubalgebraSpec,
    commutant_basis,
    conditional_expectation,
    expectation_onto_commutant,
    infer_subalgebra,
    orthonormalize,
    projection_channel,
    projection_choi,
)
from .core import (
    Channel,
    ChannelError,
    apply,
    apply_extended,
    apply_to_vector,
    channel_from_choi,
    choi,
    choi_distance,
    complementary,
    completely_depolarizing,
    compose,
    compose_reduced,
    direct_sum,
    environment_state,
    identity_channel,
    make_channel,
    partial_trace_channel,
    tensor,
)
from .families import (
    clifford,
    clifford_generators,
    clifford_products,
    clifford_spec,
    clifford_subsets,
    crossed_operators,
    crossed_product,
    crossed_product_spec,
    dephasing,
    depolarizing,
    depolarizing_weights,
    group_random_unitary,
    group_random_unitary_spec,
    group_schur,
    group_schur_spec,
    multiplier_matrix,
    nonunital_spec,
    nonunital_twirl_schur,
    pauli,
    pauli_density,
    pauli_spec,
    shift_clock,
    standard_channels,
    weyl_operators,
)
from .symbols import (
    SymbolAlgebra,
    SymbolDensity,
    SymbolError,
    crossed_local,
    diagonal,
    from_group_coeffs,
    from_weights,
    full_matrix,
    group_algebra,
    parse_symbol,
    point,
    random_symbol,
    uniform,
)
from .vn import (
    ConditionReport,
    VNChannelSpec,
    b_operator,
    b_star_b,
    build_B_and_check,
    direct_vn_apply,
    largest_block_entangled,
    largest_block_input,
    omega_via_B,
    pivoted_cholesky,
    stinespring_isometry,
    vn_channel,
)
