"""Principal-component projection of feature matrices.

Frames are mean-centred per feature, the population covariance (divide by
N) is eigendecomposed, and frames are projected onto the leading axes.  When
there are fewer frames than features the N x N Gram matrix is decomposed
instead and its eigenvectors are mapped back to feature space; the two routes
give the same axes.

Axis signs are canonicalised: the entry with the largest magnitude is made
positive (lowest index on ties), so outputs do not depend on the solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadComponentIndex, DegenerateMatrix, DimensionMismatch, KTooLarge
from .matrix_io import FeatureMatrix


def _readonly(a, dtype=np.float64) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Waveform:
    """A real 1-D signal with one sample per frame."""

    samples: np.ndarray
    frame_rate: float | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size < 2:
            raise ValueError(f"waveform needs at least 2 samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("waveform contains non-finite samples")
        if self.frame_rate is not None and not self.frame_rate > 0:
            raise ValueError("frame_rate must be positive")
        object.__setattr__(self, "samples", _readonly(s))

    def __len__(self):
        return self.samples.size

    def __neg__(self):
        return Waveform(-self.samples, self.frame_rate)


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Fitted projection: ``axes`` has shape (k, dim), rows sorted by
    descending ``eigenvalues``."""

    mean_vector: np.ndarray
    axes: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean_vector", _readonly(self.mean_vector))
        object.__setattr__(self, "axes", _readonly(np.atleast_2d(self.axes)))
        object.__setattr__(self, "eigenvalues", _readonly(self.eigenvalues))

    @property
    def dim(self) -> int:
        return self.mean_vector.size

    @property
    def k(self) -> int:
        return self.axes.shape[0]


def canonical_sign(axes: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    axes = np.array(axes, dtype=np.float64, copy=True)
    for row in axes:
        # argmax returns the first maximum, which gives the lowest-index tie-break
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return axes


def _covariance_route(centered: np.ndarray, k: int):
    n = centered.shape[0]
    cov = centered.T @ centered / n
    w, v = np.linalg.eigh(cov)
    order = np.argsort(-w, kind="stable")[:k]
    return w[order], v[:, order].T


def _gram_route(centered: np.ndarray, k: int):
    n = centered.shape[0]
    gram = centered @ centered.T / n
    w, u = np.linalg.eigh(gram)
    order = np.argsort(-w, kind="stable")[:k]
    w, u = w[order], u[:, order]
    # centred data has rank <= n-1; axes for null eigenvalues are not recoverable
    if w[-1] <= w[0] * 1e-10:
        return None
    axes = (centered.T @ u) / np.sqrt(n * w)
    axes /= np.linalg.norm(axes, axis=0)
    return w, axes.T


def fit_pca(m: FeatureMatrix, k: int = 1) -> PcaModel:
    """Fit the top-``k`` principal axes of ``m``."""
    if not 1 <= k <= min(m.n_frames, m.dim):
        raise KTooLarge(f"k={k} must be in [1, min(n_frames, dim)={min(m.n_frames, m.dim)}]")
    x = m.values
    if np.all(x == x[0]):
        raise DegenerateMatrix("all frames are identical; covariance is zero")
    mean = x.mean(axis=0)
    centered = x - mean

    result = None
    if m.n_frames < m.dim:
        result = _gram_route(centered, k)
    if result is None:
        result = _covariance_route(centered, k)
    eigenvalues, axes = result

    eigenvalues = np.maximum(eigenvalues, 0.0)
    if eigenvalues[0] <= 0.0:
        raise DegenerateMatrix("covariance has no positive eigenvalue")
    return PcaModel(mean, canonical_sign(axes), eigenvalues)


def project(m: FeatureMatrix, model: PcaModel, component_index: int = 0) -> Waveform:
    if m.dim != model.dim:
        raise DimensionMismatch(f"matrix has dim {m.dim}, model expects {model.dim}")
    if not 0 <= component_index < model.k:
        raise BadComponentIndex(
            f"component {component_index} out of range for a {model.k}-component model"
        )
    return Waveform((m.values - model.mean_vector) @ model.axes[component_index])


def first_component_waveform(m: FeatureMatrix) -> Waveform:
    return project(m, fit_pca(m, 1), 0)


def component_waveforms(m: FeatureMatrix, k: int = 10) -> list[Waveform]:
    """Projections onto the first ``k`` axes (capped by the matrix shape).

    Diagnostic only; counting uses the first component.
    """
    k = min(k, m.n_frames, m.dim)
    model = fit_pca(m, k)
    return [project(m, model, i) for i in range(model.k)]
