"""Numerical laboratory for hbar-indexed POVM families and their semiclassical defects."""

from .errors import (
    AsmLabError,
    DegenerateSpectrumError,
    GapViolationError,
    IndeterminateIndexError,
    InvalidInputError,
    NonConvergentError,
    PrecisionError,
)
from .operators import (
    DEFAULT_TOL,
    Tolerance,
    fun_calc,
    hermitian_eig,
    is_positive,
    numerical_rank,
    op_norm,
    spectral_projector,
)
from .measures import (
    Atom,
    DensityOperator,
    EventSet,
    Povm,
    Pvm,
    SampleSpace,
    born_prob,
    indicator,
    is_projective,
    naimark_dilate,
    naimark_residual,
    povm_from_json,
    povm_to_json,
    pvm_from_selfadjoint,
    riesz_bound_residual,
    spectrum,
)
from .asymptotics import (
    AsmFamily,
    DefectReport,
    DefectRow,
    HbarGrid,
    constant_family,
    continuity_profile,
    defect_report,
    equiv_defect,
    injectivity_profile,
    mult_defect,
    norm_recovery_residual,
    proj_defect,
)
from .smearing import (
    ConfidenceKernel,
    deterministic_kernel,
    gaussian_grid,
    kernel_defect,
    smear,
    smear_defect_bound_residual,
    stochastic2,
)
from .quasiprojectors import (
    count_states,
    straighten,
    straighten_bound,
    straighten_family,
    trace_defect,
)
from .spin import (
    BallPoint,
    SpinPath,
    SpinPovm,
    bell_threshold_scan,
    chsh_value,
    constant_path,
    det_distance_residual,
    max_chsh,
    point_from_povm,
    povm_from_point,
    projectivity_identity_residual,
    reality_unsharpness,
    roy_kar_bell_constant,
    roy_kar_path,
    spin_asm,
    symmetric_bell_threshold,
)
from .wick import (
    AngularSymbol,
    AnnulusSymbol,
    ConstantSymbol,
    DiskSymbol,
    FlatSymbol,
    FockTruncation,
    GridSymbol,
    ProductSymbol,
    RadialSymbol,
    cdelta_mult_defect,
    gaussian_radial,
    index_witness,
    toeplitz,
    toeplitz_quadrature,
    wick_asm,
    wick_povm,
)

__version__ = "0.1.0"
