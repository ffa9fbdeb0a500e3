from .diagnostics import HscReport, check_norm_axioms, hsc_scan
from .gauge import (
    HSConstants,
    estimate_C1_C2,
    hs_norm,
    hs_norm_closed_form,
    hs_proof_slacks,
    hs_r0,
    r0_from_constants,
    verify_hs_proof_inequalities,
)
from .homogeneous import (
    NormSpec,
    distance,
    hebisch_sikora,
    hsc_defect,
    koranyi,
    lee_naor,
    make_norm,
    norm_eval,
    pmax,
)

__all__ = [
    "HSConstants",
    "HscReport",
    "NormSpec",
    "check_norm_axioms",
    "distance",
    "estimate_C1_C2",
    "hebisch_sikora",
    "hs_norm",
    "hs_norm_closed_form",
    "hs_proof_slacks",
    "hs_r0",
    "hsc_defect",
    "hsc_scan",
    "koranyi",
    "lee_naor",
    "make_norm",
    "norm_eval",
    "pmax",
    "r0_from_constants",
    "verify_hs_proof_inequalities",
]
