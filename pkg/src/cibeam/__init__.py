"""Circular beams: the general paraxial family of beams carrying orbital angular momentum.

The package evaluates normalized circular-beam fields, their Laguerre-Gauss
expansions and pupil-plane generation fields, and computes rms and
encircled-energy divergences.
"""

__version__ = "0.1.0"

from .divergence import (
    DEFAULT_I0,
    DivergenceReport,
    SecondMomentCoupling,
    coupling,
    divergence_report,
    lg_second_moment,
    minimize_im_p_numeric,
    optimal_im_p,
    phi_factor,
    sigma_rms_sq,
    theta_ee,
    theta_rms,
)
from .errors import (
    CibeamError,
    ConvergenceError,
    DivergentSeriesError,
    DomainError,
    DualNotConstructibleError,
    ExpansionInvalidError,
    FieldEvaluationError,
    InvalidBeamError,
    NoBracketError,
    NumericalError,
    PoleError,
    UndefinedMomentError,
)
from .modes import (
    ExpansionCoefficients,
    FieldPoint,
    Grid,
    cib_field,
    expansion_coeffs,
    lg_field,
    psi_norm,
    pupil_field,
    sample_grid,
)
from .params import (
    AT_INFINITY,
    BeamParams,
    Case,
    ModeIndices,
    PropagatedFrame,
    ValidityClass,
    classify,
    dual,
    frame_at,
    make_params,
)
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    gamma_ratio_seq,
    hyp1f1,
    hyp2f1_psi,
    laguerre,
    ln_gamma,
)
