"""Cosparse phase-transition and CS-MRI experiment protocols."""

from .mri import (MRI_METHODS, SHEPP_LOGAN_ELLIPSES, MriResult, RadialMask, ellipse_sum,
                  mri_reconstruct, radial_mask, sampling_operator, shepp_logan)
from .signals import (DEFAULT_METHODS, CosparseInstance, PhaseGrid, PhaseResult, gaussian_matrix,
                      gen_cosparse, make_instance, method_label, parse_method, rel_err,
                      run_phase_transition)

__all__ = [
    "CosparseInstance", "PhaseGrid", "PhaseResult", "gen_cosparse", "gaussian_matrix",
    "make_instance", "parse_method", "method_label", "rel_err", "run_phase_transition",
    "DEFAULT_METHODS", "RadialMask", "MriResult", "radial_mask", "shepp_logan",
    "SHEPP_LOGAN_ELLIPSES", "ellipse_sum", "sampling_operator", "mri_reconstruct", "MRI_METHODS",
]
