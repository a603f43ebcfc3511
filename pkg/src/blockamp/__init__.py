"""AMP, state evolution and spectral methods for spiked matrices with
block-constant variance profiles."""

from .amp import (
    AmpConfig,
    AmpDivergence,
    AmpRun,
    AmpState,
    amp_step,
    block_overlap,
    blockdiag,
    blockproj,
    matrix_amp_oracle,
    matrix_mse,
    run_amp,
    spectral_init,
)
from .model import SpikedInstance, generate, sample_goe
from .priors import (
    BayesOptimal,
    Gaussian,
    Identity,
    Rademacher,
    SparseRademacher,
    apply_denoiser,
    posterior_mean,
    posterior_mean_derivative,
)
from .profiles import (
    BlockPartition,
    ProfileError,
    VarianceProfile,
    contiguous_partition,
    expand,
    scale_to_snr,
    snr,
)
from .se import (
    FixedPoint,
    QuadratureSpec,
    SeState,
    bayes_fixed_point,
    channel_moments,
    estimate_overlaps,
    linear_threshold,
    run_se,
    se_matrix_mse,
    se_step,
)
from .spectral import (
    SpectralReport,
    bbp_probe,
    full_spectrum,
    naive_pca_probe,
    top_eigenpair,
    transform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
