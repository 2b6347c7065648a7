"""denoisekit: a numerical toolkit built around denoisers.

Provides closed-form scalar Bayesian denoisers, patch-kernel smoothers
with symmetrization, checks for ideal-denoiser properties, multiscale
decomposition, deterministic probability-flow sampling, and
denoiser-regularized inverse problem solvers, plus a reproducible batch
CLI (``denoisekit``).
"""

from ._accel import available_backends, default_backend_name
from .anomaly import AnomalyReport, detect_anomalies
from .denoisers import make_denoiser, registry_names
from .dps import dps_sample
from .fileio import read_csv, read_pgm, write_csv, write_pgm
from .flow import (
    flow_step,
    sample_probability_flow,
    score_from_denoiser,
    tweedie_denoise_from_score,
    variance_recursion_check,
)
from .handles import DenoiserHandle, linear_handle, with_alpha
from .inverse import (
    DivergenceError,
    InverseProblem,
    SolveResult,
    bridge_iterate,
    gibbs_energy_from_regularizer,
    red_fixed_point,
    red_objective_gradient,
    red_regularizer,
)
from .kernels import KernelMatrix, build_kernel_matrix, kernel_value
from .multiscale import Decomposition, decompose, recombine, reconstruct
from .nlm import nlm_denoise, nlm_weights
from .operators import (
    CircularConvolutionOperator,
    ForwardOperator,
    IdentityOperator,
    MaskOperator,
    MatrixOperator,
)
from .patches import PatchConfig, extract_patches, patch_distance
from .priors import GaussianMixture, Laplacian, prior_from_config
from .properties import (
    PropertyReport,
    affine_combine,
    check_conservative,
    check_homogeneity,
    check_identity,
    check_symmetry,
    estimate_lipschitz,
    jacobian_fd,
    run_standard_checks,
)
from .scalar import (
    ScalarDenoiseResult,
    huber_envelope,
    map_denoise,
    map_l1,
    marginal_log_density,
    mmse_denoise,
    mmse_derivative,
    score_scalar,
)
from .schedule import NoiseSchedule
from .signal import NoiseSpec, add_awgn, as_signal, mse, psnr
from .weights import (
    WeightMatrix,
    apply_pseudo_linear,
    normalize_rows,
    sinkhorn_symmetrize,
    taylor_symmetrize,
)

__version__ = "0.1.0"
