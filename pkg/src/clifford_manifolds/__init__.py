"""Clifford analysis on Hopf manifolds, cylinders, tori and hypercomplex modular quotients.

Modules follow the computational layers: ``algebra`` (Cl_n arithmetic),
``moebius`` (Vahlen matrices), ``kernels`` and ``jets`` (closed-form kernels
and exact derivatives), ``operators`` (finite-difference Dirac, Laplace and
hyperbolic Dirac operators), ``periodization`` (Hopf and lattice series),
``groups`` (modular groups and Eisenstein series), ``integrals``,
``hopf_boundary`` and ``expansions`` (integral formulas and boundary
operators), ``verify`` and ``cli``.
"""
from .algebra import Multivector, basis_blade, conjugate, gp, involution, reverse, scalar_part, star, vec_to_mv
from .expansions import Singularity, laurent_fit, mittag_leffler_construct
from .groups import CosetTable, GroupSpec, automorphy_defect, eisenstein_series, enumerate_cosets, is_member
from .hopf_boundary import (
    cauchy_transform_matrix,
    dirichlet_solve,
    half_hopf_boundary_mesh,
    half_hopf_kernel,
    hardy_project,
    kerzman_stein_matrix,
    szego_projection_matrix,
)
from .integrals import omega, reproduce_integral, sphere_quadrature
from .kernels import cauchy_G, green_H, hyper_kernel, kernel_partial
from .moebius import VahlenMatrix, compose, matrix_inverse, moebius_apply, vahlen_check, weight_factor
from .operators import OperatorKind, apply_operator_fd, residual_scan
from .periodization import (
    HopfParams,
    Lattice,
    TruncationPolicy,
    cot_series,
    epsilon_series,
    hopf_series,
    hyper_cot_series,
    torus_kernel,
)

__version__ = "0.1.0"
