"""Fourier analysis and multi-stage threshold filtering (FMF).

The filter keeps the ``alpha`` lowest-frequency bins on each side of the
spectrum (DC included) and zeroes the rest, which keeps the result real.
``alpha`` is picked per waveform: the number of significant bins in the
upper part of the spectrum indexes a ladder of thresholds, and the keep-band
is then widened, if needed, so that the strongest non-DC bin survives.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaOutOfRange, ConfigError
from .pca import Waveform

log = logging.getLogger(__name__)

INF = math.inf

DEFAULT_LADDER: tuple[tuple[float, int], ...] = ((1, 15), (3, 20), (6, 25), (INF, 35))
TABLE1_ALPHAS: tuple[int, ...] = (10, 15, 20, 25, 30, 35)

IMAG_WARN = 1e-6


@dataclass(frozen=True, eq=False)
class Spectrum:
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.complex128, copy=True)
        if c.ndim != 1 or c.size < 2:
            raise ValueError(f"spectrum needs at least 2 bins, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("spectrum contains non-finite coefficients")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @property
    def origin_length(self) -> int:
        return self.coefficients.size

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coefficients)


@dataclass(frozen=True)
class FmfConfig:
    """Filter settings.

    ``ladder`` is a sequence of ``(band_count_upper_bound, alpha)`` pairs with
    strictly increasing bounds, the last one infinite.  ``fixed_alpha`` turns
    the adaptive selection off.  With ``keep_dominant`` the chosen alpha is
    raised to at least ``floor(dominant_factor * k_dom) + 1``, where ``k_dom``
    is the strongest non-DC bin.  ``enabled=False`` bypasses the filter.
    """

    ladder: tuple[tuple[float, int], ...] = DEFAULT_LADDER
    beta: float = 0.2
    high_band_start: float = 0.25
    fixed_alpha: int | None = None
    keep_dominant: bool = True
    dominant_factor: float = 1.5
    enabled: bool = True

    def __post_init__(self):
        ladder = tuple((float(b), int(a)) for b, a in self.ladder)
        object.__setattr__(self, "ladder", ladder)
        if not ladder:
            raise ConfigError("ladder must not be empty")
        bounds = [b for b, _ in ladder]
        if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise ConfigError(f"ladder bounds must be strictly increasing: {bounds}")
        if bounds[-1] != INF:
            raise ConfigError("the last ladder bound must be infinity")
        if any(a < 2 for _, a in ladder):
            raise ConfigError("every ladder alpha must be >= 2")
        if not 0 < self.beta < 1:
            raise ConfigError(f"beta must be in (0, 1), got {self.beta}")
        if not 0 < self.high_band_start <= 0.5:
            raise ConfigError(f"high_band_start must be in (0, 0.5], got {self.high_band_start}")
        if self.fixed_alpha is not None and self.fixed_alpha < 1:
            raise ConfigError("fixed_alpha must be a positive integer")
        if not self.dominant_factor >= 1:
            raise ConfigError("dominant_factor must be >= 1")

    def to_dict(self) -> dict:
        return {
            "ladder": [[None if b == INF else int(b), a] for b, a in self.ladder],
            "beta": self.beta,
            "high_band_start": self.high_band_start,
            "fixed_alpha": self.fixed_alpha,
            "keep_dominant": self.keep_dominant,
            "dominant_factor": self.dominant_factor,
            "enabled": self.enabled,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FmfConfig":
        d = dict(d)
        if "ladder" in d:
            d["ladder"] = parse_ladder(d["ladder"])
        return cls(**d)


def parse_ladder(obj) -> tuple[tuple[float, int], ...]:
    """Accept ``[[bound, alpha], ...]`` where the bound may be ``null``,
    ``"inf"`` or a number, or ``[{"max_bands": .., "alpha": ..}, ...]``."""
    out = []
    for item in obj:
        if isinstance(item, dict):
            bound, alpha = item.get("max_bands"), item["alpha"]
        else:
            bound, alpha = item
        if bound is None or (isinstance(bound, str) and bound.lower() in ("inf", "infinity")):
            bound = INF
        out.append((float(bound), int(alpha)))
    return tuple(out)


@dataclass(frozen=True)
class FmfTrace:
    alpha: int
    band_count: int
    kept_energy_fraction: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "band_count": self.band_count,
            "kept_energy_fraction": self.kept_energy_fraction,
        }


def dft(w: Waveform) -> Spectrum:
    return Spectrum(np.fft.fft(w.samples))


def idft(s: Spectrum, with_residue: bool = False):
    """Inverse transform; returns the real part.

    The largest imaginary magnitude is logged when it exceeds 1e-6, which
    only happens for spectra that are not conjugate-symmetric.
    """
    z = np.fft.ifft(s.coefficients)
    residue = float(np.max(np.abs(z.imag)))
    if residue > IMAG_WARN:
        log.warning("inverse transform has imaginary residue %.3g", residue)
    w = Waveform(z.real)
    return (w, residue) if with_residue else w


def max_alpha(n: int) -> int:
    # smallest alpha that keeps every bin, Nyquist included
    return n // 2 + 1


def keep_mask(n: int, alpha: int) -> np.ndarray:
    k = np.arange(n)
    return np.minimum(k, n - k) < alpha


def band_keep_filter(s: Spectrum, alpha: int) -> Spectrum:
    n = s.origin_length
    if not 2 <= alpha <= max_alpha(n):
        raise AlphaOutOfRange(f"alpha={alpha} outside [2, {max_alpha(n)}] for N={n}")
    c = np.array(s.coefficients)
    c[~keep_mask(n, alpha)] = 0
    return Spectrum(c)


def _positive_half(s: Spectrum) -> np.ndarray:
    return np.abs(s.coefficients[1 : s.origin_length // 2 + 1])


def high_band_count(s: Spectrum, cfg: FmfConfig) -> int:
    """Number of bins in the upper band whose magnitude is at least
    ``beta`` times the strongest non-DC bin."""
    n = s.origin_length
    mags = _positive_half(s)
    if mags.size == 0 or mags.max() == 0:
        return 0
    start = max(1, math.ceil(cfg.high_band_start * n))
    upper = mags[start - 1 :]
    return int(np.count_nonzero(upper >= cfg.beta * mags.max()))


def dominant_bin(s: Spectrum) -> int:
    """Index of the strongest non-DC bin in ``[1, N/2]``; 0 if none."""
    mags = _positive_half(s)
    if mags.size == 0 or mags.max() == 0:
        return 0
    return int(np.argmax(mags)) + 1


def _clamp(alpha: int, n: int) -> int:
    return int(min(max(alpha, 2), max_alpha(n)))


def ladder_alpha(band_count: int, ladder) -> int:
    for bound, alpha in ladder:
        if band_count <= bound:
            return alpha
    return ladder[-1][1]


def select_alpha(s: Spectrum, cfg: FmfConfig) -> int:
    n = s.origin_length
    if cfg.fixed_alpha is not None:
        return _clamp(cfg.fixed_alpha, n)
    alpha = ladder_alpha(high_band_count(s, cfg), cfg.ladder)
    if cfg.keep_dominant:
        k_dom = dominant_bin(s)
        if k_dom:
            alpha = max(alpha, math.floor(cfg.dominant_factor * k_dom) + 1)
    return _clamp(alpha, n)


def kept_energy_fraction(s: Spectrum, alpha: int) -> float:
    power = np.abs(s.coefficients) ** 2
    total = power.sum()
    if total == 0:
        return 1.0
    return float(power[keep_mask(s.origin_length, alpha)].sum() / total)


def fmf(w: Waveform, cfg: FmfConfig = FmfConfig()) -> tuple[Waveform, FmfTrace]:
    spec = dft(w)
    band_count = high_band_count(spec, cfg)
    if not cfg.enabled:
        alpha = max_alpha(spec.origin_length)
        return w, FmfTrace(alpha, band_count, 1.0)
    alpha = select_alpha(spec, cfg)
    out = idft(band_keep_filter(spec, alpha))
    out = Waveform(out.samples, w.frame_rate)
    return out, FmfTrace(alpha, band_count, kept_energy_fraction(spec, alpha))
