"""Matrix Darboux transformation chains with singular links.

Builds coupled-channel radial Schrodinger potentials and their solutions in
closed determinant form, including the Kohlhoff-von Geramb neutron-proton
potential, and cross-validates everything against a stepwise operator
recursion and a direct scattering integrator.
"""

from .basis import (
    BasisSolution,
    ChannelPotential,
    Constant,
    D_WAVE_CHANNEL,
    FREE_CHANNEL,
    Superposition,
    centrifugal,
    make_basis,
    scaled,
)
from .chain import (
    BlockAssembly,
    ChainSpec,
    OperatorPower,
    TransformationMatrix,
    apply_dm,
    build_w,
    build_w_psi,
    build_w_replaced,
    chain,
    eval_block,
    operator_schedule,
    partial_m,
    regular_link,
    singular_link,
)
from .transform import (
    PotentialTable,
    RealityError,
    SingularPointError,
    StepwiseChain,
    compute_potential,
    solution_derivative,
    superpotential,
    transform_matrix,
    transform_vector,
)
from .scattering import (
    KvGParameters,
    PotentialDecomposition,
    SMatrixValue,
    build_kvg_chain,
    closed_form_smatrix,
    decompose_potential,
    eta_ratio,
    eta_residue_ratio,
    kvg_delta_v,
    kvg_grid,
    numerical_smatrix,
    self_wronskian,
)

__version__ = "0.1.0"
