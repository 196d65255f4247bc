"""Space-time wavelet denoising for time-dependent d-dimensional images."""

from .wavelets import (
    CoeffCube,
    CoeffIndex,
    DAUB4,
    DEFAULT_WAVELET,
    HAAR,
    SYM8,
    SpaceTimeVolume,
    WAVELETS,
    WaveletSpec,
    dwt1d_periodic,
    dwt_space,
    dwt_spacetime,
    get_wavelet,
    idwt1d_periodic,
    idwt_spacetime,
    iter_levels,
)
from .besov import (
    BallReport,
    BesovParams,
    ball_membership,
    besov_norm_space,
    besov_norm_time,
    smoothness_index,
    synthesize_member,
)
from .noise import (
    NoiseModel,
    epsilon_from_sigma,
    mad_sigma_slice,
    mad_sigma_volume,
    make_rng,
    observe_sequence,
    observe_volume,
    snr_to_sigma,
)
from .estimators import (
    BlockPartition,
    DELTA_DEFAULT,
    DELTA_MIN,
    EstimatorConfig,
    block_energy,
    block_length,
    block_levels,
    block_partition,
    block_threshold_estimate,
    denoise,
    linear_estimate,
    linear_levels,
    pixel1d_denoise,
    slice2d_denoise,
)
from .simulation import (
    DeviationResult,
    MseRecord,
    RateResult,
    SimConfig,
    deviation_check,
    phantom,
    rate_experiment,
    run_study,
    study_metadata,
)
from .io_cli import (
    VolumeFormatError,
    read_results,
    read_volume,
    write_results,
    write_volume,
)

__version__ = "0.1.0"
