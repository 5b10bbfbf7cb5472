"""Symmetry analysis and simulation for fully synchronous oblivious robot swarms."""

from .configuration import Configuration, center, classify_structure, collision_classes, diameter, polygon_partition
from .connectivity import ConnectivityGraph, GainClass, automorphisms, build_graph, classify_gain, in_gamma_G
from .protocols import Monitor, Protocol, Trace, gtm, gtm_weights, laplacian_step, reduced_step, run, stationary, step, uniform_average
from .spectral import circulant_eigs, critical_step_sizes, is_invertible, kernel_decompose, shift_spectrum, validate_gathering
from .symmetry import (
    OrthogonalElement,
    SymmetryElement,
    SymmetryGroup,
    apply,
    close_group,
    compose,
    detect_symmetries,
    equivariance_residual,
    fixed_subspace,
    inverse,
    subset_check,
    symmetricity,
)

__version__ = "0.1.0"
