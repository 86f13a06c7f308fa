"""Synthetic fixtures with known counts, and brute-force reference oracles.

The generator embeds a periodic 1-D signal along a random unit direction of
feature space and adds Gaussian noise.  Randomness comes from numpy's PCG64
generator (``numpy.random.default_rng``), so a seed fixes every bit.

The ``oracle_*`` functions are deliberately naive re-implementations used by
the test-suite to check the production code paths; they share no code with
them.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import SizeExceedsOracleLimit, SpecInvalid
from .matrix_io import FeatureMatrix, save_matrix

SHAPES = ("sine", "triangle", "asymmetric_pulse")

ORACLE_DFT_MAX = 4096
ORACLE_EIG_MAX = 12


@dataclass(frozen=True)
class Distractor:
    period_fraction: float
    relative_amplitude: float


@dataclass(frozen=True)
class SynthSpec:
    n_frames: int
    dim: int
    cycles: float
    waveform_shape: str = "sine"
    amplitude_drift: float = 0.0
    frequency_drift: float = 0.0
    noise_snr_db: float = math.inf
    distractor: Distractor | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.n_frames < 2 or self.dim < 1:
            raise SpecInvalid("n_frames must be >= 2 and dim >= 1")
        if not self.cycles > 0:
            raise SpecInvalid("cycles must be positive")
        if self.n_frames < 8 * self.cycles:
            raise SpecInvalid(
                f"n_frames={self.n_frames} gives fewer than 8 samples per cycle for {self.cycles} cycles"
            )
        if self.waveform_shape not in SHAPES:
            raise SpecInvalid(f"unknown waveform_shape {self.waveform_shape!r}; expected one of {SHAPES}")
        if self.amplitude_drift < 0 or self.frequency_drift < 0:
            raise SpecInvalid("drifts must be non-negative")
        if math.isnan(self.noise_snr_db) or self.noise_snr_db <= 0:
            raise SpecInvalid("noise_snr_db must be positive or infinite")
        if not 0 <= self.seed < 2**64:
            raise SpecInvalid("seed must be a 64-bit unsigned integer")
        d = self.distractor
        if d is not None:
            if self.dim < 2:
                raise SpecInvalid("a distractor needs dim >= 2")
            if not d.period_fraction > 0 or d.relative_amplitude < 0:
                raise SpecInvalid("distractor needs period_fraction > 0 and relative_amplitude >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.noise_snr_db):
            d["noise_snr_db"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        d = dict(d)
        if d.get("noise_snr_db") is None or d.get("noise_snr_db") == "inf":
            d["noise_snr_db"] = math.inf
        if d.get("distractor") is not None:
            d["distractor"] = Distractor(**d["distractor"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise SpecInvalid(str(exc)) from None


def _shape(name: str, phase: np.ndarray) -> np.ndarray:
    """One period per unit of ``phase``; every shape peaks once per cycle."""
    frac = phase - np.floor(phase)
    if name == "sine":
        return np.sin(2 * np.pi * phase)
    if name == "triangle":
        # peak at a quarter cycle, like the sine
        return 1.0 - 4.0 * np.abs(frac - 0.25 - np.round(frac - 0.25))
    # quick linear rise over the first fifth of a cycle, then exponential decay
    rise = 0.2
    return np.where(frac < rise, frac / rise, np.exp(-(frac - rise) / 0.15))


def _drift_phase(t: np.ndarray, cycles: float, drift: float) -> np.ndarray:
    """Cumulative phase reaching ``cycles`` at t=1, with the instantaneous
    frequency growing by ``drift`` per cycle."""
    if drift == 0:
        return cycles * t
    g = math.log1p(drift) * cycles
    return cycles * np.expm1(g * t) / math.expm1(g)


def clean_signal(spec: SynthSpec) -> np.ndarray:
    t = np.arange(spec.n_frames) / spec.n_frames
    phase = _drift_phase(t, spec.cycles, spec.frequency_drift)
    s = _shape(spec.waveform_shape, phase)
    if spec.amplitude_drift:
        # geometric per-cycle growth centred on the middle of the clip
        s = s * (1.0 + spec.amplitude_drift) ** (phase - spec.cycles / 2)
    return s


def generate(spec: SynthSpec) -> tuple[FeatureMatrix, int]:
    """Build the feature matrix for ``spec`` and its ground-truth count."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n_frames, spec.dim

    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    s = clean_signal(spec)
    x = np.outer(s, v)

    if spec.distractor is not None:
        u = rng.standard_normal(d)
        u -= (u @ v) * v
        u /= np.linalg.norm(u)
        period = spec.distractor.period_fraction * n
        ripple = np.sin(2 * np.pi * np.arange(n) / period)
        scale = spec.distractor.relative_amplitude * np.std(s) / np.std(ripple)
        x += np.outer(scale * ripple, u)

    if math.isfinite(spec.noise_snr_db):
        # per-cell power of the embedded signal as PCA sees it (column-centred)
        power = np.var(s) / d
        sigma = math.sqrt(power / 10 ** (spec.noise_snr_db / 10))
        x += sigma * rng.standard_normal((n, d))

    return FeatureMatrix(x), int(math.floor(spec.cycles))


def embedding_directions(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray | None]:
    """The signal direction and (if any) distractor direction of ``spec``."""
    rng = np.random.default_rng(spec.seed)
    v = rng.standard_normal(spec.dim)
    v /= np.linalg.norm(v)
    if spec.distractor is None:
        return v, None
    u = rng.standard_normal(spec.dim)
    u -= (u @ v) * v
    return v, u / np.linalg.norm(u)


def write_fixture(
    spec: SynthSpec,
    directory: str | os.PathLike,
    name: str,
    fmt: str = "bin",
    temporal_seed: int | None = None,
) -> dict:
    """Write ``<name>.<fmt>`` plus a ``<name>.json`` sidecar; return a
    manifest entry with paths relative to ``directory``.

    With ``temporal_seed`` a second stream sharing the same clean signal but
    with its own direction and noise is written as ``<name>_temporal.<fmt>``.
    """
    if fmt not in ("bin", "txt"):
        raise SpecInvalid(f"fixture format must be 'bin' or 'txt', got {fmt!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    m, truth = generate(spec)
    entry = {"id": name, "spatial": f"{name}.{fmt}"}
    save_matrix(m, directory / entry["spatial"])
    sidecar = {"spec": spec.to_dict(), "ground_truth": truth}
    if temporal_seed is not None:
        tspec = SynthSpec(**{**asdict(spec), "distractor": spec.distractor, "seed": temporal_seed})
        mt, _ = generate(tspec)
        entry["temporal"] = f"{name}_temporal.{fmt}"
        save_matrix(mt, directory / entry["temporal"])
        sidecar["temporal_spec"] = tspec.to_dict()
    entry["ground_truth"] = truth
    (directory / f"{name}.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return entry


# -- oracles -----------------------------------------------------------------

def oracle_dft(samples) -> np.ndarray:
    """Literal O(N^2) summation, one row of twiddle factors per output bin."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if n > ORACLE_DFT_MAX:
        raise SizeExceedsOracleLimit(f"oracle_dft handles N <= {ORACLE_DFT_MAX}, got {n}")
    u = np.arange(n)
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        # reduce k*u mod n first so the angle stays small and exact
        out[k] = np.sum(x * np.exp(-2j * np.pi * ((k * u) % n) / n))
    return out


def oracle_eig(a, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Returns ``(eigenvalues, vectors)`` sorted by descending eigenvalue, with
    eigenvectors as the columns of ``vectors`` (lists of lists).
    """
    n = len(a)
    if n > ORACLE_EIG_MAX:
        raise SizeExceedsOracleLimit(f"oracle_eig handles up to {ORACLE_EIG_MAX}x{ORACLE_EIG_MAX}, got {n}")
    a = [[float(a[i][j]) for j in range(n)] for i in range(n)]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]

    def off_norm():
        return math.sqrt(sum(a[i][j] ** 2 for i in range(n) for j in range(n) if i != j))

    for _ in range(max_sweeps):
        if off_norm() <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
                for k in range(n):
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = c * vkp - s * vkq
                    v[k][q] = s * vkp + c * vkq
    order = sorted(range(n), key=lambda i: -a[i][i])
    values = [a[i][i] for i in order]
    vectors = [[v[r][i] for i in order] for r in range(n)]
    return values, vectors


def _percentile(sorted_x: list[float], q: float) -> float:
    # linear interpolation between closest ranks
    pos = q / 100.0 * (len(sorted_x) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(sorted_x) - 1)
    return sorted_x[lo] + (sorted_x[hi] - sorted_x[lo]) * (pos - lo)


def oracle_peaks(samples, gamma: float = 0.15, min_separation: int = 3) -> list[int]:
    """Exhaustive scan: local maxima, topographic prominence by walking out
    to the first strictly higher sample, then pairwise suppression."""
    x = [float(v) for v in samples]
    n = len(x)
    if n < 3:
        return []
    srt = sorted(x)
    floor = gamma * (_percentile(srt, 95.0) - _percentile(srt, 5.0))

    candidates = []
    for i in range(1, n - 1):
        if not (x[i - 1] < x[i] >= x[i + 1]):
            continue
        left_min = x[i]
        j = i
        while j >= 0 and x[j] <= x[i]:
            left_min = min(left_min, x[j])
            j -= 1
        right_min = x[i]
        j = i
        while j < n and x[j] <= x[i]:
            right_min = min(right_min, x[j])
            j += 1
        prominence = x[i] - max(left_min, right_min)
        if prominence >= floor:
            candidates.append(i)

    kept = []
    for i in sorted(candidates, key=lambda i: (-x[i], i)):
        if all(abs(i - j) >= min_separation for j in kept):
            kept.append(i)
    return sorted(kept)
