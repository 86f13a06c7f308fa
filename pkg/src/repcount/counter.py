"""Peak detection and the end-to-end counting pipeline."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import peak_prominences

from .errors import ConfigError, FrameCountMismatch, MissingStream
from .matrix_io import FeatureMatrix
from .pca import Waveform, first_component_waveform
from .spectral import FmfConfig, FmfTrace, fmf


class Fusion(str, enum.Enum):
    SPATIAL = "spatial"
    TEMPORAL = "temporal"
    CONCAT = "concat"


@dataclass(frozen=True)
class PeakParams:
    gamma: float = 0.15
    min_separation: int = 3

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ConfigError(f"gamma must be in (0, 1), got {self.gamma}")
        if int(self.min_separation) != self.min_separation or self.min_separation < 1:
            raise ConfigError(f"min_separation must be a positive integer, got {self.min_separation}")

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "min_separation": self.min_separation}


@dataclass(frozen=True)
class CountReport:
    count: int
    peaks: tuple[int, ...]
    trace: FmfTrace
    stream: str

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "peaks": list(self.peaks),
            "alpha": self.trace.alpha,
            "band_count": self.trace.band_count,
            "kept_energy_fraction": self.trace.kept_energy_fraction,
            "stream": self.stream,
        }


def prominence_floor(x: np.ndarray, gamma: float) -> float:
    p5, p95 = np.percentile(x, [5.0, 95.0])
    return gamma * (p95 - p5)


def local_maxima(x: np.ndarray) -> np.ndarray:
    """Interior indices with ``x[i-1] < x[i] >= x[i+1]``."""
    mid = x[1:-1]
    return np.flatnonzero((x[:-2] < mid) & (mid >= x[2:])) + 1


def suppress_close(indices: np.ndarray, heights: np.ndarray, min_separation: int) -> np.ndarray:
    """Greedy non-maximum suppression: higher peaks first, lower index on
    ties; a peak is dropped if a kept one lies closer than ``min_separation``."""
    order = np.lexsort((indices, -heights))
    kept = np.zeros(indices.size, dtype=bool)
    blocked = np.zeros(indices.size, dtype=bool)
    for i in order:
        if blocked[i]:
            continue
        kept[i] = True
        blocked |= np.abs(indices - indices[i]) < min_separation
    return indices[kept]


def detect_peaks(w: Waveform | np.ndarray, p: PeakParams = PeakParams()) -> list[int]:
    x = w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)
    if x.size < 3:
        return []
    cand = local_maxima(x)
    if cand.size == 0:
        return []
    with warnings.catch_warnings():
        # zero-prominence shoulders are expected and filtered below
        warnings.simplefilter("ignore")
        prom = peak_prominences(x, cand)[0]
    cand = cand[prom >= prominence_floor(x, p.gamma)]
    if cand.size == 0:
        return []
    return [int(i) for i in suppress_close(cand, x[cand], p.min_separation)]


def working_matrix(
    m_spatial: FeatureMatrix | None,
    m_temporal: FeatureMatrix | None,
    fusion: Fusion | str,
) -> FeatureMatrix:
    fusion = Fusion(fusion)
    if fusion is Fusion.SPATIAL:
        if m_spatial is None:
            raise MissingStream("fusion 'spatial' needs spatial features")
        return m_spatial
    if fusion is Fusion.TEMPORAL:
        if m_temporal is None:
            raise MissingStream("fusion 'temporal' needs temporal features")
        return m_temporal
    missing = [n for n, m in (("spatial", m_spatial), ("temporal", m_temporal)) if m is None]
    if missing:
        raise MissingStream(f"fusion 'concat' needs both streams; missing {', '.join(missing)}")
    if m_spatial.n_frames != m_temporal.n_frames:
        raise FrameCountMismatch(
            f"spatial has {m_spatial.n_frames} frames, temporal has {m_temporal.n_frames}"
        )
    return FeatureMatrix(np.hstack([m_spatial.values, m_temporal.values]))


def count_waveform(w: Waveform, p: PeakParams = PeakParams()) -> list[int]:
    """Peaks of ``w`` or of ``-w``, whichever has more (``w`` on ties)."""
    up = detect_peaks(w, p)
    down = detect_peaks(-w, p)
    return down if len(down) > len(up) else up


def count_repetitions(
    m_spatial: FeatureMatrix | None = None,
    m_temporal: FeatureMatrix | None = None,
    cfg: FmfConfig = FmfConfig(),
    p: PeakParams = PeakParams(),
    fusion: Fusion | str = Fusion.SPATIAL,
) -> CountReport:
    fusion = Fusion(fusion)
    m = working_matrix(m_spatial, m_temporal, fusion)
    if m_spatial is not None and m_temporal is not None and m_spatial.n_frames != m_temporal.n_frames:
        raise FrameCountMismatch(
            f"spatial has {m_spatial.n_frames} frames, temporal has {m_temporal.n_frames}"
        )
    filtered, trace = fmf(first_component_waveform(m), cfg)
    peaks = count_waveform(filtered, p)
    return CountReport(len(peaks), tuple(peaks), trace, fusion.value)
