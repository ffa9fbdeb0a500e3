"""Exact 1-Wasserstein geometry over step-two Carnot groups with homogeneous norms."""

from .carnot_core import GroupSpec, dilate, inverse, is_horizontal, make_heisenberg, make_step2_group, multiply
from .errors import CarnotError, DimensionMismatchError, InvalidParameterError, MassMismatchError, PreconditionError
from .norms import NormSpec, distance, hebisch_sikora, koranyi, lee_naor, make_norm, norm_eval, pmax
from .wasserstein import DiscreteMeasure, Coupling, DualPotential, make_measure, w1_distance

__all__ = [
    "CarnotError",
    "Coupling",
    "DimensionMismatchError",
    "DiscreteMeasure",
    "DualPotential",
    "GroupSpec",
    "InvalidParameterError",
    "MassMismatchError",
    "NormSpec",
    "PreconditionError",
    "dilate",
    "distance",
    "hebisch_sikora",
    "inverse",
    "is_horizontal",
    "koranyi",
    "lee_naor",
    "make_heisenberg",
    "make_measure",
    "make_norm",
    "make_step2_group",
    "multiply",
    "norm_eval",
    "pmax",
    "w1_distance",
]
