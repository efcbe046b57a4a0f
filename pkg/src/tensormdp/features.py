"""Kernel evaluation, random Fourier features, and measure whitening.

The Gaussian kernel here carries the 1/(2*pi*sigma^2) prefactor, so
K(x, x) = 1/(2*pi*sigma^2) regardless of dimension. Random features are
cosine-only: h_i(x) = scale * cos(w_i.x + b_i) with w_i ~ N(0, I/sigma^2),
b_i ~ U[0, 2pi) and scale chosen so sum_i h_i(x) h_i(y) approximates K(x, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "gaussian_kernel",
    "FeatureMap",
    "OneHotFeatures",
    "make_rff",
    "orthogonalize",
]


def gaussian_kernel(x, y, bandwidth: float) -> float:
    """K(x, y) = exp(-|x - y|^2 / (2 sigma^2)) / (2 pi sigma^2)."""
    if bandwidth <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dims mismatch: {x.shape} vs {y.shape}")
    sq = float(np.sum((x - y) ** 2))
    var = bandwidth * bandwidth
    return math.exp(-sq / (2.0 * var)) / (2.0 * math.pi * var)


@dataclass(frozen=True)
class FeatureMap:
    """Random Fourier feature map with an optional whitening transform."""

    frequencies: np.ndarray  # (n_features, input_dim)
    offsets: np.ndarray  # (n_features,) in [0, 2pi)
    scale: float
    whitener: np.ndarray | None = None  # (n_features, n_features)

    @property
    def input_dim(self) -> int:
        return self.frequencies.shape[1]

    @property
    def n_features(self) -> int:
        return self.frequencies.shape[0]

    def evaluate_raw(self, x) -> np.ndarray:
        x = self._check_point(x)
        return self.scale * np.cos(self.frequencies @ x + self.offsets)

    def evaluate(self, x) -> np.ndarray:
        raw = self.evaluate_raw(x)
        if self.whitener is None:
            return raw
        return self.whitener @ raw

    def evaluate_raw_batch(self, points) -> np.ndarray:
        points = self._check_batch(points)
        return self.scale * np.cos(points @ self.frequencies.T + self.offsets)

    def evaluate_batch(self, points) -> np.ndarray:
        raw = self.evaluate_raw_batch(points)
        if self.whitener is None:
            return raw
        return raw @ self.whitener.T

    def with_whitener(self, whitener) -> "FeatureMap":
        return replace(self, whitener=np.asarray(whitener, dtype=np.float64))

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ValueError(f"expected point of dim {self.input_dim}, got {x.shape}")
        return x

    def _check_batch(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self.input_dim:
            raise ValueError(
                f"expected (n, {self.input_dim}) batch, got {points.shape}"
            )
        return points


@dataclass(frozen=True)
class OneHotFeatures:
    """Indicator features over a finite index set, optionally rescaled.

    Points are length-1 vectors holding the index. With
    ``scales=1/sqrt(weights)`` the features are orthonormal in L2 of the
    weighting measure.
    """

    n_values: int
    scales: np.ndarray | None = None  # (n_values,)

    @property
    def input_dim(self) -> int:
        return 1

    @property
    def n_features(self) -> int:
        return self.n_values

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape != (1,):
            raise ValueError(f"expected a length-1 index vector, got shape {x.shape}")
        i = int(round(float(x[0])))
        if not 0 <= i < self.n_values:
            raise ValueError(f"index {i} out of range [0, {self.n_values})")
        out = np.zeros(self.n_values)
        out[i] = 1.0 if self.scales is None else self.scales[i]
        return out

    def evaluate_batch(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 1:
            raise ValueError(f"expected (n, 1) batch, got {points.shape}")
        idx = np.rint(points[:, 0]).astype(np.int64)
        if idx.min(initial=0) < 0 or idx.max(initial=0) >= self.n_values:
            raise ValueError("index out of range in batch")
        out = np.zeros((points.shape[0], self.n_values))
        vals = 1.0 if self.scales is None else self.scales[idx]
        out[np.arange(points.shape[0]), idx] = vals
        return out


def make_rff(input_dim: int, n_features: int, bandwidth: float, seed=None) -> FeatureMap:
    """Draw a random Fourier feature map for the Gaussian kernel.

    Frequencies are iid N(0, 1/bandwidth^2) per coordinate and offsets
    uniform on [0, 2pi); scale = sqrt(2 K(x,x) / n_features) so the feature
    inner products converge to the kernel. Deterministic given `seed`.
    """
    if n_features < 1:
        raise ValueError(f"n_features must be >= 1, got {n_features}")
    if bandwidth <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    rng = np.random.default_rng(seed)
    frequencies = rng.normal(0.0, 1.0 / bandwidth, size=(n_features, input_dim))
    offsets = rng.uniform(0.0, 2.0 * math.pi, size=n_features)
    kxx = 1.0 / (2.0 * math.pi * bandwidth * bandwidth)
    scale = math.sqrt(2.0 * kxx / n_features)
    return FeatureMap(frequencies=frequencies, offsets=offsets, scale=scale)


def orthogonalize(fm: FeatureMap, measure_samples) -> FeatureMap:
    """Whiten a feature map against the empirical measure of `measure_samples`.

    Sets the whitener to G^{-1/2} where G is the empirical second-moment
    matrix of the raw features on the samples, so the whitened features have
    identity empirical Gram on those samples. Replaces any existing whitener.
    """
    samples = np.asarray(measure_samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError(f"expected (n, dim) samples, got shape {samples.shape}")
    if samples.shape[0] < fm.n_features:
        raise ValueError(
            f"need at least {fm.n_features} samples, got {samples.shape[0]}"
        )
    h = fm.evaluate_raw_batch(samples)
    gram = h.T @ h / samples.shape[0]
    trace = float(np.trace(gram))
    if not math.isfinite(trace) or trace <= 0.0:
        raise ValueError(f"degenerate feature second moment (trace={trace})")
    floor = 1e-10 * trace / fm.n_features
    eigvals, eigvecs = np.linalg.eigh(gram)
    if not np.all(np.isfinite(eigvals)):
        raise ValueError("second-moment eigendecomposition failed")
    clipped = np.maximum(eigvals, floor)
    whitener = (eigvecs / np.sqrt(clipped)) @ eigvecs.T
    return fm.with_whitener(whitener)
