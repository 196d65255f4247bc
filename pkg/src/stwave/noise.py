"""Observation synthesis, noise calibration, and MAD noise estimation.

Two observation models are supported and linked by the usual calibration:
adding i.i.d. Gaussian noise of standard deviation ``sigma`` to every grid
sample of a volume is equivalent, after the orthonormal space-time
transform, to the sequence model ``y = alpha + eps * z`` with
``eps = sigma / sqrt(n * N**d)`` once coefficients are expressed in
continuous (unit-grid) normalization.  All randomness flows through a
counter-based Philox generator keyed by (seed, stream id), so replications
are reproducible independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .wavelets import CoeffCube, SpaceTimeVolume, WaveletSpec, _space_levels, get_wavelet

# Phi^{-1}(3/4), the normalizing constant of the Gaussian MAD estimator.
MAD_CONSTANT = 0.6745


def make_rng(seed: int, stream: int | tuple[int, ...] = 0) -> np.random.Generator:
    """Deterministic generator for (seed, stream); distinct streams are
    statistically independent."""
    key = (stream,) if isinstance(stream, (int, np.integer)) else tuple(stream)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def epsilon_from_sigma(sigma: float, d: int, N: int, n: int) -> float:
    """White-noise intensity equivalent to per-sample regression noise
    ``sigma`` on an n x N^d grid: ``sigma / sqrt(n * N**d)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    return sigma / math.sqrt(n * N**d)


@dataclass(frozen=True)
class NoiseModel:
    """Noise configuration: sequence intensity ``epsilon``, per-sample
    ``sigma`` (optional, must be calibration-consistent when both are set),
    and the RNG identity."""

    epsilon: float
    sigma: float | None = None
    seed: int = 0
    rng_stream_id: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    def check_consistency(self, d: int, N: int, n: int) -> None:
        if self.sigma is None:
            return
        want = epsilon_from_sigma(self.sigma, d, N, n)
        if not math.isclose(self.epsilon, want, rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError(
                f"epsilon {self.epsilon} inconsistent with sigma/sqrt(n*N**d) = {want}")

    @classmethod
    def calibrated(cls, sigma: float, d: int, N: int, n: int,
                   seed: int = 0, rng_stream_id: int = 0) -> "NoiseModel":
        return cls(epsilon=epsilon_from_sigma(sigma, d, N, n), sigma=sigma,
                   seed=seed, rng_stream_id=rng_stream_id)


def observe_sequence(truth: CoeffCube, model: NoiseModel) -> CoeffCube:
    """Sequence-space observations ``y = alpha + eps * z`` with i.i.d.
    standard Gaussian z, deterministic under (seed, stream)."""
    model.check_consistency(truth.d, truth.N, truth.n)
    if model.epsilon == 0:
        return truth.with_data(truth.data)
    rng = make_rng(model.seed, model.rng_stream_id)
    z = rng.standard_normal(truth.data.shape)
    return truth.with_data(truth.data + model.epsilon * z)


def observe_volume(truth: SpaceTimeVolume, sigma: float, seed: int = 0,
                   stream: int | tuple[int, ...] = 0) -> SpaceTimeVolume:
    """Add i.i.d. N(0, sigma^2) noise to every sample of the volume."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return SpaceTimeVolume(d=truth.d, N=truth.N, n=truth.n, data=truth.data)
    rng = make_rng(seed, stream)
    w = rng.standard_normal(truth.data.shape)
    return SpaceTimeVolume(d=truth.d, N=truth.N, n=truth.n,
                           data=truth.data + sigma * w)


def snr_to_sigma(truth: SpaceTimeVolume, snr: float) -> float:
    """Noise level realizing a target signal-to-noise ratio, with the
    convention SNR = sd(signal samples) / sigma."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    sd = float(truth.data.std())
    if sd == 0:
        raise ValueError("truth volume is constant; SNR is undefined")
    return sd / snr


def _finest_details(image: np.ndarray, w: WaveletSpec, finest: str) -> np.ndarray:
    """Detail coefficients at the finest resolution of a d-dim image."""
    d = image.ndim
    coeffs = _space_levels(image[None, ...], d, w, depth=1)[0]
    half = image.shape[-1] // 2
    if d == 1:
        return coeffs[half:]
    if finest == "hh":
        return coeffs[half:, half:].ravel()
    return np.concatenate([coeffs[half:, :half].ravel(),
                           coeffs[:half, half:].ravel(),
                           coeffs[half:, half:].ravel()])


def mad_sigma_slice(image, w_space: WaveletSpec | str | None = None,
                    finest: str = "all") -> float:
    """Robust noise-scale estimate of one slice: median absolute value of
    the finest-level detail coefficients divided by 0.6745.

    For d = 2, ``finest="all"`` (default) pools the three finest sub-bands;
    ``finest="hh"`` uses the diagonal sub-band only.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim not in (1, 2):
        raise ValueError("slice must be 1- or 2-dimensional")
    if img.shape[-1] < 4 or (img.ndim == 2 and img.shape[0] != img.shape[1]):
        raise ValueError("slice must be square with side >= 4")
    if finest not in ("all", "hh"):
        raise ValueError("finest must be 'all' or 'hh'")
    details = _finest_details(img, get_wavelet(w_space), finest)
    return float(np.median(np.abs(details)) / MAD_CONSTANT)


def mad_sigma_volume(volume: SpaceTimeVolume,
                     w_space: WaveletSpec | str | None = None,
                     finest: str = "all") -> float:
    """Maximum of :func:`mad_sigma_slice` over all time slices."""
    if volume.N < 4:
        raise ValueError("need N >= 4")
    if finest not in ("all", "hh"):
        raise ValueError("finest must be 'all' or 'hh'")
    w = get_wavelet(w_space)
    coeffs = _space_levels(volume.data, volume.d, w, depth=1)
    half = volume.N // 2
    if volume.d == 1:
        details = coeffs[:, half:]
    elif finest == "hh":
        details = coeffs[:, half:, half:].reshape(volume.n, -1)
    else:
        details = np.concatenate([coeffs[:, half:, :half].reshape(volume.n, -1),
                                  coeffs[:, :half, half:].reshape(volume.n, -1),
                                  coeffs[:, half:, half:].reshape(volume.n, -1)], axis=1)
    per_slice = np.median(np.abs(details), axis=1) / MAD_CONSTANT
    return float(per_slice.max())
