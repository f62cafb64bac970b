"""Spin-weighted spheroidal angular problem at spin 1/2: exact-rational
perturbation series, shape-invariant ladder construction, and a spectral
oracle that cross-checks every claim."""

from .algebra import (
    Rational,
    SourceSeries,
    TrigExpr,
    TrigPoly,
    as_rational,
    format_rational,
    sin_odd_antiderivative,
    trig_differentiate,
    trig_product_fold,
    wallis_ratio,
)
from .context import DOUBLE, Context, mp_context
from .eigenfunction import (
    GroundState,
    LadderState,
    equation_residual,
    ground_psi,
    ground_state,
    ground_theta,
    ladder_apply,
    normalize,
    normalized,
    schrodinger_residual,
    state_l2_norm,
    wavefunction_rows,
)
from .errors import (
    DomainError,
    NumericError,
    SingularFlowError,
    StateError,
    SwshError,
    VerificationError,
)
from .oracle import (
    OracleResult,
    SpectralProblem,
    assemble,
    compare_report,
    default_lmax,
    ground_eigenvalue,
    lowest_eigenvalues,
    series_fit,
)
from .series import (
    SPIN,
    SuperpotentialSeries,
    build_series,
    crosscheck_identities,
    energy_correction,
    riccati_residual,
    seed_order0,
    seed_order1,
    seed_order2,
    source_series,
    superpotential_order,
    validate_m,
)
from .shape_invariance import (
    FlowStep,
    PartnerOrder,
    ShapeParamSet,
    excited_energy,
    excited_wavefunction,
    flow_report,
    parameter_flow,
    partner_potential_order,
    printed_flow_comparisons,
    solve_flow_step,
    verify_invariance,
)
from .verify import run_verification

__version__ = "0.1.0"
