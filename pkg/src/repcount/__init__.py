"""Repetition counting from per-frame feature matrices.

Pipeline: first principal component of the features, adaptive low-pass
filtering in the Fourier domain, then peak counting.
"""

__version__ = "0.1.0"

from .counter import CountReport, Fusion, PeakParams, count_repetitions, detect_peaks
from .errors import RepCountError
from .evaluate import EvalReport, ManifestEntry, ablate_fmf, evaluate, load_manifest, sweep_thresholds
from .matrix_io import (
    FeatureMatrix,
    StreamKind,
    load_binary_matrix,
    load_matrix,
    load_text_matrix,
    save_binary_matrix,
    save_text_matrix,
)
from .pca import PcaModel, Waveform, first_component_waveform, fit_pca, project
from .spectral import (
    FmfConfig,
    FmfTrace,
    Spectrum,
    band_keep_filter,
    dft,
    fmf,
    high_band_count,
    idft,
    select_alpha,
)
from .synth import SynthSpec, generate

__all__ = [
    "CountReport", "EvalReport", "FeatureMatrix", "FmfConfig", "FmfTrace", "Fusion",
    "ManifestEntry", "PcaModel", "PeakParams", "RepCountError", "Spectrum", "StreamKind",
    "SynthSpec", "Waveform", "ablate_fmf", "band_keep_filter", "count_repetitions",
    "detect_peaks", "dft", "evaluate", "first_component_waveform", "fit_pca", "fmf",
    "generate", "high_band_count", "idft", "load_binary_matrix", "load_manifest",
    "load_matrix", "load_text_matrix", "project", "save_binary_matrix", "save_text_matrix",
    "select_alpha", "sweep_thresholds",
]
