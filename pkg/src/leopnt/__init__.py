"""Starlink burst detection, carrier frequency estimation and Doppler
positioning bounds."""

from .signal_model import (
    BurstSpec,
    DownlinkProfile,
    IqSignal,
    SyncSequence,
    UplinkProfile,
    apply_frequency_shift,
    build_sync_sequence,
    synthesize_burst,
    synthesize_train,
)
from .detector import (
    CorrelationSeries,
    DetectionEvent,
    DetectionStatistic,
    detect_bursts,
    detection_statistic,
    partial_correlations,
    xcorr_normalized,
)
from .freq_estimator import (
    FrequencyEstimate,
    coarse_estimate,
    estimate_all,
    fine_estimate,
)
from .orbit_doppler import (
    OverflightScenario,
    ReceiverPosition,
    doppler_curve,
    doppler_shift,
    received_frequency,
    satellite_state,
)
from .bounds import (
    AccuracyMap,
    LinkBudget,
    MeasurementSchedule,
    accuracy_map,
    jacobian,
    mcrb_frequency,
    positioning_crb,
    snr_at_receiver,
)

__version__ = "0.1.0"
