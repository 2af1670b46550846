"""Toolkit for splitting multi-cough recordings into single-cough clips.

Provides two automatic segmenters (hysteresis comparator and fixed RMS
threshold), WAV import/export, a browser-based labeling server, and the
agreement/precision metrics used to score segmentation quality.
"""

__version__ = "0.1.0"

from coughseg.audio import AudioClip, load_audio, peak_normalize, write_wav
from coughseg.metrics import (
    AnnotationMatrix,
    KappaResult,
    PrecisionResult,
    build_matrix,
    fleiss_kappa,
    interpret_kappa,
    majority_vote,
    precision,
    rater_diagnostics,
)
from coughseg.segment import (
    HysteresisParams,
    ManifestEntry,
    RmsThresholdParams,
    SegmentBounds,
    SegmentManifest,
    export_segments,
    global_rms,
    hysteresis_segment,
    rms_envelope,
    rms_threshold_segment,
)

__all__ = [
    "AudioClip",
    "load_audio",
    "peak_normalize",
    "write_wav",
    "SegmentBounds",
    "HysteresisParams",
    "RmsThresholdParams",
    "SegmentManifest",
    "ManifestEntry",
    "global_rms",
    "rms_envelope",
    "hysteresis_segment",
    "rms_threshold_segment",
    "export_segments",
    "AnnotationMatrix",
    "KappaResult",
    "PrecisionResult",
    "build_matrix",
    "fleiss_kappa",
    "interpret_kappa",
    "majority_vote",
    "precision",
    "rater_diagnostics",
    "__version__",
]
