"""Exponent calculus and numerical experiments for anisotropic Hardy-Littlewood inequalities."""

from .errors import (
    DimMismatch,
    DomainError,
    ExponentOverflow,
    HLLabError,
    SpecMismatch,
    TooLarge,
    Unclassified,
    ZeroNorm,
)
from .exponents import (
    INF,
    Classification,
    Constraint,
    RegionLabel,
    XExp,
    anisotropic_ok,
    bh_hl_admissible,
    blowup_exponent,
    blowup_exponents_rect,
    boundary_b,
    classify_grid,
    conj,
    hl_admissible,
    hl_admissible_reversed,
    inclusion_exponent,
    qq2211_tuple,
    region_label,
    rp_exponent,
)
from .forms import MultilinearForm, WitnessKind, closed_form_norm, evaluate, witness
from .optnorm import AscentConfig, Method, NormCertificate, dual_step, estimate_norm, exact_norm_linf, weak_norm
from .tensor import DenseTensor, MixedNormSpec, interp_holder_check, minkowski_check, mixed_norm

__version__ = "0.1.0"
