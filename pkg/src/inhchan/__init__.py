"""Indoor mmWave / sub-THz channel workbench: CI/CIF path loss, PDP statistics
and drop-based channel synthesis at 28, 73 and 142 GHz."""

from .pathloss import (
    BANDS_GHZ,
    CIFParams,
    CIParams,
    Condition,
    MeasurementRecord,
    Mode,
    NotAvailableError,
    channel_targets,
    ci_path_loss,
    cif_path_loss,
    fspl_1m,
    lookup_params,
    measured_path_loss,
    three_gpp_reference,
)
from .fitting import FitError, FitResult, fit_ci, fit_cif, weighted_center_frequency
from .pdp import (
    ChannelStats,
    MultipathComponent,
    PowerDelayProfile,
    TimeCluster,
    channel_stats,
    detect_mpcs,
    ensemble_summary,
    estimate_noise_floor,
    partition_clusters,
    rms_delay_spread,
    synthesize_omni,
)
from .synthesis import (
    CalibratedDecay,
    CalibrationError,
    SynthesisConfig,
    calibrate_decay,
    generate_drop,
    simulate_ensemble,
)

__version__ = "0.1.0"
