"""Sequence-space estimators and baseline denoisers.

Two estimators act on hybrid coefficient cubes observed as
``y = alpha + eps * z``:

* the non-adaptive linear projection, which keeps all coefficients with
  spatial level ``<= j1`` and time level ``<= m2`` and zeroes the rest;
* the adaptive block-thresholding estimator, which groups each trajectory's
  coefficients at time level m into blocks of length
  ``L_eps = 1 + floor(log(eps**-2))`` (natural log) and keeps a block in
  full iff its empirical energy reaches ``t = delta**2 * eps**2 * L_eps``,
  within cutoff levels ``2**(j1+1) = 2**(m2+1) = floor(eps**-2)``.

Two classical baselines operate directly on volumes: per-pixel 1D and
per-slice d-dimensional wavelet thresholding with the universal threshold
``sigma * sqrt(2 log M)``.

Cutoff formulas set ``2**(level+1)`` to a generally non-dyadic integer; we
round the level down so the estimator never exceeds the theoretical
dimension budget.  When a dyadic band is not divisible by ``L_eps`` the
final block is short, which only sharpens the large-deviation bound behind
the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .besov import smoothness_index
from .noise import epsilon_from_sigma
from .wavelets import (
    CoeffCube,
    SpaceTimeVolume,
    WaveletSpec,
    _space_levels,
    _transform_axis,
    dwt_spacetime,
    idwt_spacetime,
    get_wavelet,
    space_level_map,
    time_bands,
)

# Smallest delta with a proven risk bound for the block estimator.
DELTA_MIN = 2.0 * (2.0 * math.sqrt(2.0) + 1.0)
DELTA_DEFAULT = 7.66

METHODS = ("linear", "block", "pixel1d", "slice2d")


@dataclass(frozen=True)
class EstimatorConfig:
    """Everything the estimators parametrize.

    ``practical=True`` lifts the theoretical floor on ``delta`` (useful for
    figure-quality denoising; the proven constants are conservative).
    ``s1``/``s2`` feed the linear estimator's level choice when explicit
    cutoffs ``j1``/``m2`` are not given.
    """

    method: str = "block"
    epsilon: float | None = None
    delta: float = DELTA_DEFAULT
    d: int | None = None
    j1: int | None = None
    m2: int | None = None
    threshold_mode: str = "hard"
    practical: bool = False
    s1: float | None = None
    s2: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.threshold_mode not in ("hard", "soft"):
            raise ValueError("threshold_mode must be 'hard' or 'soft'")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.method == "block" and not self.practical and self.delta <= DELTA_MIN:
            raise ValueError(
                f"theoretical block mode needs delta > {DELTA_MIN:.4f}; "
                "set practical=True to override")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        for name, lev in (("j1", self.j1), ("m2", self.m2)):
            if lev is not None and lev < -1:
                raise ValueError(f"{name} must be >= -1")


# ---------------------------------------------------------------------------
# Level cutoffs
# ---------------------------------------------------------------------------

def _level_from_power(epsilon: float, exponent: float, cap: int | None) -> int:
    """Level j with ``2**(j+1) = floor(epsilon**-exponent)``, rounded down
    to dyadic and clamped to ``cap``."""
    if epsilon <= 0:
        if cap is None:
            raise ValueError("epsilon must be positive when no level cap is given")
        return cap
    v = -exponent * math.log2(epsilon)  # log2 of the target dimension
    if v <= 0:
        return -1
    if v < 53:  # floor(eps**-exponent) is exactly representable
        x = math.floor(epsilon**-exponent)
        lev = -1 if x < 1 else int(math.floor(math.log2(x))) - 1
    else:
        lev = int(math.floor(v)) - 1
    return lev if cap is None else min(lev, cap)


def linear_levels(epsilon: float, s1: float, s2: float, d: int,
                  max_j1: int | None = None, max_m2: int | None = None) -> tuple[int, int]:
    """Theoretical cutoffs of the linear estimator,
    ``2**(j1+1) = floor(eps**(-2s/((2s+d+1)*s1)))`` and the s2 analogue."""
    s = smoothness_index(s1, s2, d)
    base = 2.0 * s / (2.0 * s + d + 1.0)
    j1 = _level_from_power(epsilon, base / s1, max_j1)
    m2 = _level_from_power(epsilon, base / s2, max_m2)
    return j1, m2


def block_levels(epsilon: float, max_j1: int | None = None,
                 max_m2: int | None = None) -> tuple[int, int]:
    """Adaptive estimator cutoffs: ``2**(j1+1) = 2**(m2+1) = floor(eps**-2)``."""
    j1 = _level_from_power(epsilon, 2.0, max_j1)
    m2 = _level_from_power(epsilon, 2.0, max_m2)
    return j1, m2


# ---------------------------------------------------------------------------
# Linear projection estimator
# ---------------------------------------------------------------------------

def _keep_mask(cube: CoeffCube, j1: int, m2: int) -> np.ndarray:
    slev = space_level_map(cube.N, cube.d, cube.depth_space)
    tlev = np.full(cube.n, -1, dtype=np.int64)
    for m, lo, hi in time_bands(cube.n, cube.depth_time):
        tlev[lo:hi] = m
    tmask = (tlev <= m2).reshape((cube.n,) + (1,) * cube.d)
    return tmask & (slev <= j1)[None, ...]


def linear_estimate(y: CoeffCube, config: EstimatorConfig) -> CoeffCube:
    """Projection onto levels ``|lambda| <= j1`` and ``m <= m2``."""
    if config.j1 is None or config.m2 is None:
        raise ValueError("linear_estimate needs explicit j1 and m2 cutoffs")
    mask = _keep_mask(y, config.j1, config.m2)
    return y.with_data(np.where(mask, y.data, 0.0))


# ---------------------------------------------------------------------------
# Block thresholding
# ---------------------------------------------------------------------------

def block_length(epsilon: float) -> int:
    """Block length ``L_eps = 1 + floor(log(eps**-2))`` (>= 1)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return max(1, 1 + math.floor(math.log(epsilon**-2)))


def _blocks_for_length(length: int, L: int) -> list[tuple[int, int]]:
    """Contiguous cover of [0, length) by blocks of L, short last allowed."""
    return [(lo, min(lo + L, length)) for lo in range(0, length, L)]


@dataclass(frozen=True)
class BlockPartition:
    """Blocking of one time level: block ids A_m are 1-based like r in the
    definitions; ``positions(r)`` gives U_mr."""

    level: int
    L_eps: int
    blocks: tuple[tuple[int, int], ...]

    @property
    def block_ids(self) -> range:
        return range(1, len(self.blocks) + 1)

    def positions(self, r: int) -> range:
        if r not in self.block_ids:
            raise ValueError(f"block id {r} out of range 1..{len(self.blocks)}")
        lo, hi = self.blocks[r - 1]
        return range(lo, hi)


def block_partition(m: int, epsilon: float) -> BlockPartition:
    """Partition of the ``2**m`` positions of time level m (one position
    for the scaling level m = -1) into blocks of ``L_eps``."""
    if m < -1:
        raise ValueError("time level must be >= -1")
    L = block_length(epsilon)
    length = 1 if m < 0 else 1 << m
    return BlockPartition(level=m, L_eps=L,
                          blocks=tuple(_blocks_for_length(length, L)))


def block_energy(y: CoeffCube, space_index: tuple[int, ...] | int, m: int,
                 positions) -> float:
    """Empirical block energy: sum of squared observations over
    the block's positions within time level m of one trajectory."""
    if isinstance(space_index, (int, np.integer)):
        space_index = (int(space_index),)
    if len(space_index) != y.d:
        raise ValueError(f"space index needs {y.d} coordinates")
    band = {mm: (lo, hi) for mm, lo, hi in time_bands(y.n, y.depth_time)}
    if m not in band:
        raise ValueError(f"time level {m} not present in cube")
    lo, hi = band[m]
    total = 0.0
    for ell in positions:
        if not 0 <= ell < hi - lo:
            raise ValueError(f"position {ell} outside time level {m}")
        total += float(y.data[(lo + ell,) + tuple(space_index)]) ** 2
    return total


def block_threshold_estimate(y: CoeffCube, config: EstimatorConfig) -> CoeffCube:
    """Adaptive block-thresholding estimator.

    Within retained levels an entire block survives iff its empirical
    energy is ``>= delta**2 * eps**2 * L_eps`` (boundary kept); everything
    else, including all coefficients beyond the cutoffs, is zeroed.
    ``eps = 0`` degenerates to the identity (zero threshold, full cutoffs).
    """
    if config.epsilon is None:
        raise ValueError("block_threshold_estimate needs config.epsilon")
    eps = config.epsilon
    if eps == 0:
        return y.with_data(y.data)
    max_j = int(math.log2(y.N)) - 1
    max_m = int(math.log2(y.n)) - 1
    j1, m2 = block_levels(eps, max_j, max_m)
    L = block_length(eps)
    threshold = config.delta**2 * eps**2 * L

    slev = space_level_map(y.N, y.d, y.depth_space)
    space_keep = slev <= j1
    out = np.zeros_like(y.data)
    for m, lo, hi in time_bands(y.n, y.depth_time):
        if m > m2:
            continue
        for blo, bhi in _blocks_for_length(hi - lo, L):
            seg = y.data[lo + blo: lo + bhi]
            energy = np.sum(seg * seg, axis=0)
            keep = (energy >= threshold) & space_keep
            out[lo + blo: lo + bhi, keep] = seg[..., keep]
    return y.with_data(out)


# ---------------------------------------------------------------------------
# Baseline denoisers (universal threshold)
# ---------------------------------------------------------------------------

def _apply_threshold(coeffs: np.ndarray, detail: np.ndarray, thr: float,
                     mode: str) -> np.ndarray:
    out = coeffs.copy()
    if mode == "hard":
        out[detail & (np.abs(coeffs) <= thr)] = 0.0
    else:
        d = detail
        out[d] = np.sign(coeffs[d]) * np.maximum(np.abs(coeffs[d]) - thr, 0.0)
    return out


def pixel1d_denoise(volume: SpaceTimeVolume, sigma: float,
                    w_time: WaveletSpec | str | None = None,
                    mode: str = "hard") -> SpaceTimeVolume:
    """Per-pixel 1D wavelet thresholding at ``sigma * sqrt(2 log n)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if mode not in ("hard", "soft"):
        raise ValueError("mode must be 'hard' or 'soft'")
    wt = get_wavelet(w_time)
    depth = int(math.log2(volume.n))
    coeffs = _transform_axis(volume.data, wt, depth, axis=0)
    thr = sigma * math.sqrt(2.0 * math.log(volume.n))
    detail = np.zeros(volume.data.shape, dtype=bool)
    detail[1:] = True  # everything but the time scaling coefficient
    if sigma > 0:
        coeffs = _apply_threshold(coeffs, detail, thr, mode)
    rec = _transform_axis(coeffs, wt, depth, axis=0, inverse=True)
    return SpaceTimeVolume(d=volume.d, N=volume.N, n=volume.n, data=rec)


def slice2d_denoise(volume: SpaceTimeVolume, sigma: float,
                    w_space: WaveletSpec | str | None = None,
                    mode: str = "hard") -> SpaceTimeVolume:
    """Per-slice d-dimensional wavelet thresholding at
    ``sigma * sqrt(2 log N**d)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if mode not in ("hard", "soft"):
        raise ValueError("mode must be 'hard' or 'soft'")
    ws = get_wavelet(w_space)
    depth = int(math.log2(volume.N))
    coeffs = _space_levels(volume.data, volume.d, ws, depth)
    thr = sigma * math.sqrt(2.0 * math.log(float(volume.N) ** volume.d))
    slev = space_level_map(volume.N, volume.d, depth)
    detail = np.broadcast_to((slev >= 0)[None, ...], volume.data.shape)
    if sigma > 0:
        coeffs = _apply_threshold(coeffs, detail, thr, mode)
    rec = _space_levels(coeffs, volume.d, ws, depth, inverse=True)
    return SpaceTimeVolume(d=volume.d, N=volume.N, n=volume.n, data=rec)


# ---------------------------------------------------------------------------
# End-to-end dispatch
# ---------------------------------------------------------------------------

def denoise(volume: SpaceTimeVolume, config: EstimatorConfig, sigma: float,
            w_space: WaveletSpec | str | None = None,
            w_time: WaveletSpec | str | None = None) -> SpaceTimeVolume:
    """Transform, estimate, invert.

    For the sequence-space methods the coefficient cube is rescaled by
    ``1/sqrt(n * N**d)`` so its noise level equals the calibrated
    ``eps = sigma / sqrt(n * N**d)``; the estimate is scaled back before
    inversion.  Baselines operate on the volume directly.
    """
    if config.method == "pixel1d":
        return pixel1d_denoise(volume, sigma, w_time, config.threshold_mode)
    if config.method == "slice2d":
        return slice2d_denoise(volume, sigma, w_space, config.threshold_mode)

    M = volume.n * volume.N**volume.d
    eps = config.epsilon if config.epsilon is not None else \
        epsilon_from_sigma(sigma, volume.d, volume.N, volume.n)
    cube = dwt_spacetime(volume, w_space, w_time)
    seq = cube.with_data(cube.data / math.sqrt(M))

    max_j = int(math.log2(volume.N)) - 1
    max_m = int(math.log2(volume.n)) - 1
    if config.method == "linear":
        j1, m2 = config.j1, config.m2
        if j1 is None or m2 is None:
            if config.s1 is None or config.s2 is None:
                raise ValueError("linear method needs j1/m2 or s1/s2 in the config")
            j1, m2 = linear_levels(eps, config.s1, config.s2, volume.d, max_j, max_m)
        est = linear_estimate(seq, replace(config, epsilon=eps,
                                           j1=min(j1, max_j), m2=min(m2, max_m)))
    else:
        est = block_threshold_estimate(seq, replace(config, epsilon=eps))
    back = est.with_data(est.data * math.sqrt(M))
    return idwt_spacetime(back, w_space, w_time)
