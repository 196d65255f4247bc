"""Periodic orthonormal wavelet transforms for time-dependent image volumes.

Implements the discrete machinery used everywhere else in the package:
1D multilevel transforms on dyadic signals, the isotropic d-dimensional
transform applied per time slice, and the hybrid form that additionally
transforms every spatial-coefficient trajectory along time.  All transforms
use periodic boundary handling and are exactly orthonormal, so energy is
preserved and the inverse is the transpose.

Coefficient layout is in-place Mallat ordering.  Along an axis of length P
transformed to depth J, positions ``0 .. P/2**J - 1`` hold scaling
coefficients and the following bands hold detail coefficients in increasing
scale order; at full depth the detail band of level ``j`` occupies positions
``[2**j, 2**(j+1))``.  For d = 2 the spatial transform recurses on the
low-low quadrant, so the detail coefficients of spatial level ``j`` are the
three sub-bands tagged HL, LH and HH (first letter = filter along the first
spatial axis k1, H meaning high-pass).  Scaling coefficients are labelled
level -1, matching the convention that the coarse level is absorbed into the
detail indexing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

FILTER_TOL = 1e-12


def _is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


# ---------------------------------------------------------------------------
# Filter pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WaveletSpec:
    """An orthonormal compactly supported filter pair (h, g).

    ``h`` is the low-pass (scaling) filter, ``g`` the high-pass filter
    obtained from it by the quadrature-mirror rule ``g[k] = (-1)**k *
    h[L-1-k]``.  ``vanishing_moments`` records the analytic regularity of
    the underlying wavelet family.
    """

    name: str
    h: np.ndarray
    g: np.ndarray
    support_length: int
    vanishing_moments: int

    @classmethod
    def from_lowpass(cls, name: str, taps, vanishing_moments: int) -> "WaveletSpec":
        """Build a spec from low-pass taps, checking the orthonormality rules."""
        h = np.asarray(taps, dtype=np.float64)
        if h.ndim != 1 or h.size < 2 or h.size % 2 != 0:
            raise ValueError(f"{name}: low-pass filter needs an even number of taps >= 2")
        L = h.size
        if abs(h.sum() - math.sqrt(2.0)) > FILTER_TOL:
            raise ValueError(f"{name}: filter taps must sum to sqrt(2)")
        if abs(np.dot(h, h) - 1.0) > FILTER_TOL:
            raise ValueError(f"{name}: filter taps must have unit energy")
        for m in range(1, L // 2):
            if abs(np.dot(h[: L - 2 * m], h[2 * m :])) > FILTER_TOL:
                raise ValueError(f"{name}: double-shift orthogonality fails at shift {m}")
        g = np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])
        h.setflags(write=False)
        g.setflags(write=False)
        return cls(name=name, h=h, g=g, support_length=L,
                   vanishing_moments=vanishing_moments)


_SQRT3 = math.sqrt(3.0)
_D4_NORM = 4.0 * math.sqrt(2.0)

# Symmlet with 8 vanishing moments, 16 taps (standard published values).
_SYM8_TAPS = [
    -0.0033824159510061256, -0.0005421323317911481, 0.03169508781149298,
    0.007607487324917605, -0.1432942383508097, -0.061273359067658524,
    0.4813596512583722, 0.7771857517005235, 0.3644418948353314,
    -0.05194583810770904, -0.027219029917056003, 0.049137179673607506,
    0.003808752013890615, -0.01495225833704823, -0.0003029205147213668,
    0.0018899503327594609,
]

HAAR = WaveletSpec.from_lowpass("haar", [1.0 / math.sqrt(2.0)] * 2, vanishing_moments=1)
DAUB4 = WaveletSpec.from_lowpass(
    "daub4",
    [(1.0 + _SQRT3) / _D4_NORM, (3.0 + _SQRT3) / _D4_NORM,
     (3.0 - _SQRT3) / _D4_NORM, (1.0 - _SQRT3) / _D4_NORM],
    vanishing_moments=2,
)
SYM8 = WaveletSpec.from_lowpass("sym8", _SYM8_TAPS, vanishing_moments=8)

WAVELETS = {"haar": HAAR, "daub4": DAUB4, "sym8": SYM8}
DEFAULT_WAVELET = "sym8"


def get_wavelet(name: str | WaveletSpec | None) -> WaveletSpec:
    """Resolve a wavelet by name; ``None`` gives the package default (sym8)."""
    if name is None:
        return WAVELETS[DEFAULT_WAVELET]
    if isinstance(name, WaveletSpec):
        return name
    try:
        return WAVELETS[name]
    except KeyError:
        raise ValueError(f"unknown wavelet {name!r}; available: {sorted(WAVELETS)}") from None


# ---------------------------------------------------------------------------
# Volume / coefficient containers
# ---------------------------------------------------------------------------

def _check_shape(d: int, N: int, n: int) -> None:
    if d not in (1, 2):
        raise ValueError(f"spatial dimension must be 1 or 2, got {d}")
    if not (_is_pow2(N) and N >= 2):
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if not (_is_pow2(n) and n >= 2):
        raise ValueError(f"n must be a power of two >= 2, got {n}")


def _as_grid(data, d: int, N: int, n: int) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    shape = (n,) + (N,) * d
    if arr.size != n * N**d:
        raise ValueError(f"data has {arr.size} values, expected {n * N**d}")
    arr = np.ascontiguousarray(arr.reshape(shape))
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpaceTimeVolume:
    """An n x N^d grid of real samples, time index slowest, then k1, then k2."""

    d: int
    N: int
    n: int
    data: np.ndarray

    def __post_init__(self):
        _check_shape(self.d, self.N, self.n)
        object.__setattr__(self, "data", _as_grid(self.data, self.d, self.N, self.n))

    def energy(self) -> float:
        return float(np.sum(self.data * self.data))

    @classmethod
    def from_array(cls, arr) -> "SpaceTimeVolume":
        """Wrap an (n, N) or (n, N, N) array as a volume."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim not in (2, 3):
            raise ValueError("expected a 2-d (n, N) or 3-d (n, N, N) array")
        d = arr.ndim - 1
        if d == 2 and arr.shape[1] != arr.shape[2]:
            raise ValueError("spatial axes must be square")
        return cls(d=d, N=arr.shape[1], n=arr.shape[0], data=arr)


@dataclass(frozen=True, eq=False)
class CoeffCube:
    """Hybrid wavelet coefficients of a volume, same shape, Mallat layout.

    ``depth_space``/``depth_time`` record how many transform levels were
    applied along the spatial axes and the time axis (0 = untransformed).
    """

    d: int
    N: int
    n: int
    data: np.ndarray
    depth_space: int
    depth_time: int

    def __post_init__(self):
        _check_shape(self.d, self.N, self.n)
        if not 0 <= self.depth_space <= int(math.log2(self.N)):
            raise ValueError(f"depth_space {self.depth_space} invalid for N={self.N}")
        if not 0 <= self.depth_time <= int(math.log2(self.n)):
            raise ValueError(f"depth_time {self.depth_time} invalid for n={self.n}")
        object.__setattr__(self, "data", _as_grid(self.data, self.d, self.N, self.n))

    def energy(self) -> float:
        return float(np.sum(self.data * self.data))

    def with_data(self, data) -> "CoeffCube":
        """Same metadata, new coefficient values."""
        return CoeffCube(d=self.d, N=self.N, n=self.n, data=data,
                         depth_space=self.depth_space, depth_time=self.depth_time)


@dataclass(frozen=True)
class CoeffIndex:
    """Label of one hybrid coefficient: spatial (j, k, sub-band) x time (m, l).

    ``space_level``/``time_level`` -1 denote scaling coefficients.  Positions
    are band-relative: add ``2**level`` along each high-pass axis to recover
    raw array coordinates.
    """

    space_level: int
    space_orientation: str | None
    space_position: tuple[int, ...]
    time_level: int
    time_position: int


# ---------------------------------------------------------------------------
# Single-axis periodic transform machinery
# ---------------------------------------------------------------------------

def _fold(taps: np.ndarray, P: int) -> np.ndarray:
    """Periodize a filter to length P (exact for any dyadic P >= 2)."""
    if taps.size <= P:
        return taps
    out = np.zeros(P)
    np.add.at(out, np.arange(taps.size) % P, taps)
    return out


def _analyze_pair(x: np.ndarray, w: WaveletSpec):
    """One analysis level along the last axis; returns (approx, detail)."""
    P = x.shape[-1]
    h = _fold(w.h, P)
    g = _fold(w.g, P)
    base = 2 * np.arange(P // 2)
    a = np.zeros(x.shape[:-1] + (P // 2,))
    d = np.zeros_like(a)
    for t in range(h.size):
        col = x[..., (base + t) % P]
        a += h[t] * col
        d += g[t] * col
    return a, d


def _synthesize_pair(a: np.ndarray, d: np.ndarray, w: WaveletSpec) -> np.ndarray:
    """Adjoint of :func:`_analyze_pair` (exact inverse by orthonormality)."""
    P = 2 * a.shape[-1]
    h = _fold(w.h, P)
    g = _fold(w.g, P)
    base = 2 * np.arange(P // 2)
    out = np.zeros(a.shape[:-1] + (P,))
    for t in range(h.size):
        # target positions are distinct for fixed t, so += does not collide
        out[..., (base + t) % P] += h[t] * a + g[t] * d
    return out


def _check_axis_depth(P: int, depth: int, what: str) -> None:
    if not _is_pow2(P):
        raise ValueError(f"{what} length {P} is not a power of two")
    if not isinstance(depth, (int, np.integer)) or depth < 1:
        raise ValueError(f"depth must be a positive integer, got {depth}")
    if P % (1 << depth) != 0:
        raise ValueError(f"depth {depth} too large for {what} length {P}")


def _dwt_last(x: np.ndarray, w: WaveletSpec, depth: int) -> np.ndarray:
    out = np.array(x, dtype=np.float64)
    cur = x.shape[-1]
    for _ in range(depth):
        a, d = _analyze_pair(out[..., :cur], w)
        half = cur // 2
        out[..., :half] = a
        out[..., half:cur] = d
        cur = half
    return out


def _idwt_last(c: np.ndarray, w: WaveletSpec, depth: int) -> np.ndarray:
    out = np.array(c, dtype=np.float64)
    cur = c.shape[-1] >> depth
    for _ in range(depth):
        rec = _synthesize_pair(out[..., :cur], out[..., cur: 2 * cur], w)
        out[..., : 2 * cur] = rec
        cur *= 2
    return out


def _transform_axis(x: np.ndarray, w: WaveletSpec, depth: int, axis: int,
                    inverse: bool = False) -> np.ndarray:
    if depth == 0:
        return np.array(x, dtype=np.float64)
    moved = np.moveaxis(x, axis, -1)
    res = _idwt_last(moved, w, depth) if inverse else _dwt_last(moved, w, depth)
    return np.ascontiguousarray(np.moveaxis(res, -1, axis))


# ---------------------------------------------------------------------------
# Public 1D operations
# ---------------------------------------------------------------------------

def dwt1d_periodic(signal, w: WaveletSpec, depth: int) -> np.ndarray:
    """Multilevel periodic analysis of a dyadic-length signal, Mallat layout.

    The transform is exactly orthonormal at every level (filters longer than
    the current dyadic length are periodized first), so the coefficient
    vector has the same energy as the input.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    _check_axis_depth(x.size, depth, "signal")
    return _dwt_last(x, w, depth)


def idwt1d_periodic(coeffs, w: WaveletSpec, depth: int) -> np.ndarray:
    """Exact inverse of :func:`dwt1d_periodic`."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.ndim != 1:
        raise ValueError("coefficient vector must be one-dimensional")
    _check_axis_depth(c.size, depth, "coefficient vector")
    return _idwt_last(c, w, depth)


# ---------------------------------------------------------------------------
# Spatial (per time slice) and hybrid transforms
# ---------------------------------------------------------------------------

def _space_levels(data: np.ndarray, d: int, w: WaveletSpec, depth: int,
                  inverse: bool = False) -> np.ndarray:
    """Isotropic d-dimensional transform of the trailing d axes."""
    if d == 1:
        return _transform_axis(data, w, depth, axis=-1, inverse=inverse)
    N = data.shape[-1]
    out = np.array(data, dtype=np.float64)
    sizes = [N >> k for k in range(depth)]
    if inverse:
        sizes = [N >> (depth - 1 - k) for k in range(depth)]
    for cur in sizes:
        blk = out[..., : cur, : cur]
        for ax in (-1, -2):
            moved = np.moveaxis(blk, ax, -1)
            if inverse:
                half = moved.shape[-1] // 2
                rec = _synthesize_pair(moved[..., :half], moved[..., half:], w)
            else:
                a, dd = _analyze_pair(moved, w)
                rec = np.concatenate([a, dd], axis=-1)
            blk = np.moveaxis(rec, -1, ax)
        out[..., : cur, : cur] = blk
    return out


def full_space_depth(N: int) -> int:
    return int(math.log2(N))


def full_time_depth(n: int) -> int:
    return int(math.log2(n))


def _resolve_depth(P: int, depth: int | None, what: str) -> int:
    if depth is None:
        return int(math.log2(P))
    if not isinstance(depth, (int, np.integer)) or depth < 0:
        raise ValueError(f"{what} depth must be a non-negative integer, got {depth}")
    if depth > int(math.log2(P)):
        raise ValueError(f"{what} depth {depth} too large for length {P}")
    return int(depth)


def dwt_space(volume: SpaceTimeVolume, w_space: WaveletSpec | str | None = None,
              depth: int | None = None) -> CoeffCube:
    """Transform every time slice by the d-dimensional tensor-product DWT.

    The result holds, for each time sample, the spatial wavelet coefficients
    of that slice; the time axis is left untouched (``depth_time = 0``).
    ``depth=None`` extends to the coarsest dyadic level.
    """
    w = get_wavelet(w_space)
    depth = _resolve_depth(volume.N, depth, "space")
    if depth == 0:
        raise ValueError("space depth must be >= 1")
    data = _space_levels(volume.data, volume.d, w, depth)
    return CoeffCube(d=volume.d, N=volume.N, n=volume.n, data=data,
                     depth_space=depth, depth_time=0)


def dwt_spacetime(volume: SpaceTimeVolume,
                  w_space: WaveletSpec | str | None = None,
                  w_time: WaveletSpec | str | None = None,
                  depth_space: int | None = None,
                  depth_time: int | None = None) -> CoeffCube:
    """Separable space-time analysis: spatial DWT per slice, then a 1D DWT
    of every coefficient trajectory along time.

    Because the two operators act on different tensor factors the order is
    immaterial; this implementation applies space first.  Depths default to
    the coarsest dyadic level on each axis.
    """
    ws = get_wavelet(w_space)
    wt = get_wavelet(w_time)
    ds = _resolve_depth(volume.N, depth_space, "space")
    dt = _resolve_depth(volume.n, depth_time, "time")
    data = _space_levels(volume.data, volume.d, ws, ds) if ds else np.array(volume.data)
    data = _transform_axis(data, wt, dt, axis=0)
    return CoeffCube(d=volume.d, N=volume.N, n=volume.n, data=data,
                     depth_space=ds, depth_time=dt)


def idwt_spacetime(cube: CoeffCube,
                   w_space: WaveletSpec | str | None = None,
                   w_time: WaveletSpec | str | None = None) -> SpaceTimeVolume:
    """Exact inverse of :func:`dwt_spacetime` (depths taken from the cube)."""
    ws = get_wavelet(w_space)
    wt = get_wavelet(w_time)
    data = _transform_axis(cube.data, wt, cube.depth_time, axis=0, inverse=True)
    if cube.depth_space:
        data = _space_levels(data, cube.d, ws, cube.depth_space, inverse=True)
    return SpaceTimeVolume(d=cube.d, N=cube.N, n=cube.n, data=data)


def _invert_time(cube: CoeffCube, w_time: WaveletSpec | str | None = None) -> CoeffCube:
    """Undo only the time transform, recovering spatial-coefficient
    trajectories sampled at the time grid."""
    wt = get_wavelet(w_time)
    data = _transform_axis(cube.data, wt, cube.depth_time, axis=0, inverse=True)
    return CoeffCube(d=cube.d, N=cube.N, n=cube.n, data=data,
                     depth_space=cube.depth_space, depth_time=0)


# ---------------------------------------------------------------------------
# Level maps and coefficient iteration
# ---------------------------------------------------------------------------

def axis_level_map(P: int, depth: int) -> np.ndarray:
    """1D level label of each Mallat position: -1 on the scaling block,
    otherwise floor(log2(position))."""
    lev = np.full(P, -1, dtype=np.int64)
    scal = P >> depth
    idx = np.arange(scal, P)
    lev[scal:] = np.floor(np.log2(idx)).astype(np.int64)
    return lev


def space_level_map(N: int, d: int, depth: int) -> np.ndarray:
    """Spatial level of each position; for d=2 the level of (i1, i2) is the
    max of the axis levels (quadrant structure of the isotropic transform)."""
    lev = axis_level_map(N, depth)
    if d == 1:
        return lev
    return np.maximum(lev[:, None], lev[None, :])


def time_bands(n: int, depth: int) -> list[tuple[int, int, int]]:
    """(level, start, stop) of every time band, scaling block first."""
    scal = n >> depth
    bands = [(-1, 0, scal)]
    size = scal
    while size < n:
        bands.append((int(math.log2(size)), size, 2 * size))
        size *= 2
    return bands


def _space_indices(cube: CoeffCube):
    """Raw spatial indices with their (level, orientation, band position)."""
    lev1 = axis_level_map(cube.N, cube.depth_space)
    if cube.d == 1:
        for i in range(cube.N):
            j = int(lev1[i])
            if j < 0:
                yield (i,), j, None, (i,)
            else:
                yield (i,), j, "H", (i - (1 << j),)
    else:
        for i1 in range(cube.N):
            for i2 in range(cube.N):
                j = int(max(lev1[i1], lev1[i2]))
                if j < 0:
                    yield (i1, i2), j, None, (i1, i2)
                    continue
                hi1 = lev1[i1] == j
                hi2 = lev1[i2] == j
                tag = ("H" if hi1 else "L") + ("H" if hi2 else "L")
                pos = (i1 - (1 << j) if hi1 else i1, i2 - (1 << j) if hi2 else i2)
                yield (i1, i2), j, tag, pos


def iter_levels(cube: CoeffCube) -> Iterator[tuple[CoeffIndex, float]]:
    """Visit every coefficient once with its full (lambda, m, l) label.

    The stream is ordered by spatial raw index, then time raw index;
    counts per (space level, time level) follow the dyadic formulas.
    """
    tlev = axis_level_map(cube.n, cube.depth_time)
    toff = [(int(tlev[i]), i if tlev[i] < 0 else i - (1 << int(tlev[i])))
            for i in range(cube.n)]
    for raw, j, tag, pos in _space_indices(cube):
        col = cube.data[(slice(None),) + raw]
        for i in range(cube.n):
            m, ell = toff[i]
            yield CoeffIndex(space_level=j, space_orientation=tag,
                             space_position=pos, time_level=m,
                             time_position=ell), float(col[i])
