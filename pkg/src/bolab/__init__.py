"""Pseudospectral laboratory for Benjamin-Ono decay experiments."""

__version__ = "0.1.0"

from .spectral import (Grid, Field, Spectrum, make_grid, forward, inverse,
                       hilbert, derivative, linear_propagator, dealias,
                       commutator)
from .integrator import (BOParams, InvariantRecord, Trajectory, nonlinear_term,
                         step_ifrk4, evolve, invariants, momentum_law,
                         tstar_quadratic, tstar_general)
from .weights import (WeightSpec, NormReport, TailFit, truncated_weight,
                      z_norm, weighted_l2_truncated, tail_amplitude,
                      boundary_contamination)

__all__ = [
    "Grid", "Field", "Spectrum", "make_grid", "forward", "inverse",
    "hilbert", "derivative", "linear_propagator", "dealias", "commutator",
    "BOParams", "InvariantRecord", "Trajectory", "nonlinear_term",
    "step_ifrk4", "evolve", "invariants", "momentum_law",
    "tstar_quadratic", "tstar_general",
    "WeightSpec", "NormReport", "TailFit", "truncated_weight",
    "z_norm", "weighted_l2_truncated", "tail_amplitude",
    "boundary_contamination",
]
