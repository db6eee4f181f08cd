"""Validity, construction and simulation of isotropic covariance matrix
functions on compact two-point homogeneous spaces."""

from .coefficients import (
    CoefficientSequence, b_to_h, compute_H, h_to_b, identity_checks, is_psd, reconstruct_kernel,
    sequence_from_B,
)
from .euclid import (
    divided_difference_moment, euclid_spectral_check, euclid_to_sphere_validate, g_alpha_transform,
    xi_bracket_verify,
)
from .kernels import KernelSpec, MatrixKernel, eval_kernel, hadamard_power, load_kernel, make_kernel
from .simulate import FieldEnsemble, addition_formula_residual, empirical_cov_check, simulate_field
from .spaces import Space, UnsupportedOperation, geodesic_distance, parse_space, sample_uniform
from .special import gauss_jacobi_rule, jacobi_eval, jacobi_norm, jacobi_table, omega_d
from .streams import RandomStream
from .validity import (
    ValidityReport, projective_constructions, transfer_implications, validate_minf, validate_on_space,
)

__version__ = "0.1.0"
