"""Orthogonal-polynomial recurrence data for weights exp(-V) with polynomial
V, the 2x2 derivative system D_n(x) and deformation systems calU_k(x) built
from it, and a verification battery that runs every identity the
construction satisfies as a named residual check.

Quick start:

    from orthoflow import Potential, certified_recurrence
    p = Potential({2: 1, 4: "0.25"})
    cr = certified_recurrence(p, N=16)
    cr.rc.gamma[1]
"""

from .errors import (
    BreakdownAtStep,
    HankelSingular,
    OrthoflowError,
    OutsideTrustWindow,
    PerturbationBreaksConvergence,
    PrecisionUnreachable,
)
from .jacobi import (
    BandedOperator,
    apply_polynomial,
    divided_difference_entry,
    triangular_split,
)
from .laxpair import (
    DerivativeData,
    PolyMatrix2x2,
    cal_u_matrix,
    d_from_flows,
    d_matrix,
    derivative_data,
    eta,
    p_matrix,
    u_k_matrix,
)
from .moments import (
    CertifiedRecurrence,
    MomentTable,
    RecurrenceCoefficients,
    certified_recurrence,
    compute_moments,
    cross_validate,
    discrepancy_profile,
    moment_roundtrip_residual,
    moment_route,
    recurrence_from_moments,
    recurrence_stieltjes,
)
from .polynomials import Poly
from .potential import Potential, hermite_potential, quartic_potential
from .precision import (
    DEFAULT_PRECISION,
    get_default_precision,
    set_default_precision,
    to_str,
    working,
)
from .verify import (
    CheckResult,
    DeformationProbe,
    VerificationReport,
    VerifyConfig,
    chebyshev_grid,
    check_deformation,
    check_deformation_order,
    check_diag_identity,
    check_eta_expansion,
    check_flow_sum,
    check_ode,
    check_power_ladder,
    check_string_equations,
    check_trace_identity,
    check_uv_recurrences,
    run_all,
)
from .wavefunction import (
    WaveState,
    central_difference,
    orthonormality_gram,
    richardson_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "BandedOperator",
    "BreakdownAtStep",
    "CertifiedRecurrence",
    "CheckResult",
    "DEFAULT_PRECISION",
    "DeformationProbe",
    "DerivativeData",
    "HankelSingular",
    "MomentTable",
    "OrthoflowError",
    "OutsideTrustWindow",
    "PerturbationBreaksConvergence",
    "Poly",
    "PolyMatrix2x2",
    "Potential",
    "PrecisionUnreachable",
    "RecurrenceCoefficients",
    "VerificationReport",
    "VerifyConfig",
    "WaveState",
    "apply_polynomial",
    "cal_u_matrix",
    "central_difference",
    "certified_recurrence",
    "chebyshev_grid",
    "check_deformation",
    "check_deformation_order",
    "check_diag_identity",
    "check_eta_expansion",
    "check_flow_sum",
    "check_ode",
    "check_power_ladder",
    "check_string_equations",
    "check_trace_identity",
    "check_uv_recurrences",
    "compute_moments",
    "cross_validate",
    "d_from_flows",
    "d_matrix",
    "derivative_data",
    "discrepancy_profile",
    "divided_difference_entry",
    "eta",
    "get_default_precision",
    "hermite_potential",
    "moment_roundtrip_residual",
    "moment_route",
    "orthonormality_gram",
    "p_matrix",
    "quartic_potential",
    "recurrence_from_moments",
    "recurrence_stieltjes",
    "richardson_derivative",
    "run_all",
    "set_default_precision",
    "to_str",
    "triangular_split",
    "u_k_matrix",
    "working",
]
