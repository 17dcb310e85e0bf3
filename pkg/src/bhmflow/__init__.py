"""Pseudo-spectral solvers for thin-film and variable-mobility Cahn-Hilliard
equations, built around biharmonic-modified IMEX splitting schemes."""

__version__ = "0.1.0"

from .grid import (Field, SpectralField, SpectralGrid, apply_biharmonic,
                   apply_laplacian, divergence, forward_transform, gradient,
                   inverse_transform)
from .models import (ModelSpec, chemical_potential, classic_ch, chvm, energy,
                     eval_rhs, forced_thin_film, mass, mobility_max,
                     model_from_preset, thin_film)
from .splitting import (DynamicM2, SplitConfig, StaticM2, amplification_bound,
                        apply_f_ex, apply_f_im, implicit_solve, resolve_m2)
from .steppers import SchemeConfig, StepResult, advance, step
from .diagnostics import (RunRecord, check_energy_stability, l1_error,
                          richardson_reference)

__all__ = [
    "Field", "SpectralField", "SpectralGrid", "apply_biharmonic",
    "apply_laplacian", "divergence", "forward_transform", "gradient",
    "inverse_transform",
    "ModelSpec", "chemical_potential", "classic_ch", "chvm", "energy",
    "eval_rhs", "forced_thin_film", "mass", "mobility_max",
    "model_from_preset", "thin_film",
    "DynamicM2", "SplitConfig", "StaticM2", "amplification_bound",
    "apply_f_ex", "apply_f_im", "implicit_solve", "resolve_m2",
    "SchemeConfig", "StepResult", "advance", "step",
    "RunRecord", "check_energy_stability", "l1_error", "richardson_reference",
]
