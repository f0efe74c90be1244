"""Rotation Laplace and related distributions on SO(3) and S^3."""

from .distributions import (
    QuatParam,
    So3Param,
    entropy,
    log_normalization_factor,
    log_prob,
    mode,
    nll_loss,
    normalization_factor,
    ql_from_rl,
    s3_normalization_factor,
    sample,
    tangent_covariance,
    tangent_sample,
)
from .fit import FitConfig, FitReport, fit_mle, gradient_magnitude_profile, nll_gradient
from .grid import S3Grid, So3Grid, healpix_sphere_grid, hopf_so3_grid, s3_grid
from .so3 import (
    ProperSvd,
    exp_map,
    geodesic_distance,
    hat,
    log_map,
    proper_svd,
    quat_to_rotmat,
    random_rotation,
    rotmat_to_quat,
    vee,
)

__version__ = "0.1.0"
