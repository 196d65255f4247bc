"""Besov sequence norms, smoothness balls, and synthetic test functions.

The smoothness class used throughout the package is a ball of functions
whose spatial wavelet coefficients are controlled uniformly over time and
whose coefficient trajectories are controlled per spatial index:

* ``sup_t ||f(t, .)||  <= A1`` for the spatial sequence norm with
  exponent ``s1 + d*(1/2 - 1/p1)`` per level, and
* ``||alpha_lambda|| <= A_lambda`` for the temporal sequence norm with
  exponent ``s2 + 1/2 - 1/p2``, where the radii satisfy
  ``sum_lambda A_lambda**2 <= A2**2``.

Infinite ``p``/``q`` select the max convention.  All norms here operate on
finite-depth coefficient cubes; the infinite level sums of the continuous
definition are truncated at the working depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .wavelets import (
    CoeffCube,
    WaveletSpec,
    _invert_time,
    axis_level_map,
    space_level_map,
    time_bands,
)
from .noise import make_rng


def smoothness_index(s1: float, s2: float, d: int) -> float:
    """Effective smoothness: harmonic combination of the space and time
    parameters, ``1/s = (d/s1 + 1/s2) / (d + 1)``."""
    if s1 <= 0 or s2 <= 0:
        raise ValueError("smoothness parameters must be positive")
    if d < 1:
        raise ValueError("spatial dimension must be >= 1")
    return (d + 1) / (d / s1 + 1 / s2)


def space_level_count(j: int, d: int) -> int:
    """Number of spatial coefficients at level j (full-depth convention)."""
    if j < 0:
        return 1
    return (1 << ((j + 1) * d)) - (1 << (j * d))


def default_radius_constant(A2: float, d: int, j_max: int) -> float:
    """Constant A making ``A_lambda = A * 2**(-d*(j+1)/2)`` exhaust the
    budget ``sum A_lambda**2 = A2**2`` over levels -1..j_max."""
    total = 1.0 + (j_max + 1) * (1.0 - 2.0 ** (-d))
    return A2 / math.sqrt(total)


@dataclass(frozen=True)
class BesovParams:
    """Parameters of the ball: spatial (s1, p1, q1, A1), temporal
    (s2, p2, q2, A2), the per-level radius profile j -> A_lambda, and the
    lower-bound constant A with ``A_lambda * 2**(d*(j+1)/2) >= A``."""

    s1: float
    p1: float
    q1: float
    A1: float
    s2: float
    p2: float
    q2: float
    A2: float
    d: int
    radius_profile: Callable[[int], float]
    A: float | None = None

    def __post_init__(self):
        for name, v in (("p1", self.p1), ("q1", self.q1), ("p2", self.p2), ("q2", self.q2)):
            if not (1 <= v):
                raise ValueError(f"{name} must be in [1, inf], got {v}")
        if self.s1 <= 0 or self.s2 <= 0:
            raise ValueError("smoothness parameters must be positive")
        if self.A1 <= 0 or self.A2 <= 0:
            raise ValueError("radii must be positive")
        if self.d not in (1, 2):
            raise ValueError("d must be 1 or 2")
        if self.space_exponent() <= 0:
            raise ValueError("need s1 + d*(1/2 - 1/p1) > 0")
        if self.time_exponent() <= 0:
            raise ValueError("need s2 + 1/2 - 1/p2 > 0")

    def space_exponent(self) -> float:
        return self.s1 + self.d * (0.5 - _inv(self.p1))

    def time_exponent(self) -> float:
        return self.s2 + 0.5 - _inv(self.p2)

    def validate_radii(self, j_max: int) -> None:
        """Check the radius profile against its two standing constraints,
        over all levels representable up to ``j_max``."""
        total = 0.0
        for j in range(-1, j_max + 1):
            a = self.radius_profile(j)
            if a <= 0:
                raise ValueError(f"radius profile must be positive, got {a} at level {j}")
            if self.A is not None and a * 2.0 ** (self.d * (j + 1) / 2.0) < self.A * (1 - 1e-12):
                raise ValueError(f"radius profile below lower-bound constant at level {j}")
            total += space_level_count(j, self.d) * a * a
        if total > self.A2**2 * (1 + 1e-9):
            raise ValueError(
                f"sum of squared radii {total:.6g} exceeds A2**2 = {self.A2**2:.6g}")

    @classmethod
    def default(cls, s1: float, s2: float, d: int, j_max: int,
                p1: float = 2.0, q1: float = 2.0, p2: float = 2.0, q2: float = 2.0,
                A1: float = 1.0, A2: float = 1.0) -> "BesovParams":
        """Ball with the geometric radius profile ``A * 2**(-d*(j+1)/2)``,
        A chosen so the finite radius budget is met with equality at
        working depth ``j_max``."""
        A = default_radius_constant(A2, d, j_max)
        profile = _GeometricProfile(A=A, d=d)
        return cls(s1=s1, p1=p1, q1=q1, A1=A1, s2=s2, p2=p2, q2=q2, A2=A2,
                   d=d, radius_profile=profile, A=A)


@dataclass(frozen=True)
class _GeometricProfile:
    A: float
    d: int

    def __call__(self, j: int) -> float:
        return self.A * 2.0 ** (-self.d * (j + 1) / 2.0)


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def _inner_lp(values: np.ndarray, p: float, axis: int) -> np.ndarray:
    a = np.abs(values)
    if math.isinf(p):
        return a.max(axis=axis)
    return (a**p).sum(axis=axis) ** (1.0 / p)


def _outer_lq(terms: np.ndarray, q: float, axis: int = 0) -> np.ndarray:
    if math.isinf(q):
        return terms.max(axis=axis)
    return (terms**q).sum(axis=axis) ** (1.0 / q)


def _norm_from_levels(level_coeffs: Mapping[int, np.ndarray], exponent: float,
                      p: float, q: float) -> float:
    if not level_coeffs:
        raise ValueError("empty coefficient input")
    terms = []
    for j, vals in sorted(level_coeffs.items()):
        if j < -1:
            raise ValueError(f"levels start at -1, got {j}")
        vals = np.asarray(vals, dtype=np.float64).ravel()
        inner = _inner_lp(vals, p, axis=0) if vals.size else 0.0
        terms.append(2.0 ** (j * exponent) * inner)
    return float(_outer_lq(np.asarray(terms), q))


def besov_norm_space(level_coeffs: Mapping[int, np.ndarray], params: BesovParams) -> float:
    """Spatial sequence norm of one slice's coefficients grouped by level:
    l^q over levels of ``2**(j*(s1 + d*(1/2-1/p1)))`` times the within-level
    l^p sum (max convention when p or q is infinite)."""
    return _norm_from_levels(level_coeffs, params.space_exponent(), params.p1, params.q1)


def besov_norm_time(level_coeffs: Mapping[int, np.ndarray], params: BesovParams) -> float:
    """Temporal analogue of :func:`besov_norm_space` with per-level weight
    ``2**(m*(s2 + 1/2 - 1/p2))``."""
    return _norm_from_levels(level_coeffs, params.time_exponent(), params.p2, params.q2)


def _space_norms_per_slice(data: np.ndarray, slev: np.ndarray, params: BesovParams) -> np.ndarray:
    """Spatial norm of every time slice at once; data shape (n, space...)."""
    flat = data.reshape(data.shape[0], -1)
    lev = slev.ravel()
    a1 = params.space_exponent()
    terms = []
    for j in range(-1, int(lev.max()) + 1):
        cols = flat[:, lev == j]
        if cols.shape[1] == 0:
            continue
        terms.append(2.0 ** (j * a1) * _inner_lp(cols, params.p1, axis=1))
    return _outer_lq(np.stack(terms), params.q1, axis=0)


def _time_norms_per_position(data: np.ndarray, n: int, depth_time: int,
                             params: BesovParams) -> np.ndarray:
    """Temporal norm of every coefficient trajectory; data shape (n, space...)."""
    a2 = params.time_exponent()
    terms = []
    for m, lo, hi in time_bands(n, depth_time):
        block = data[lo:hi]
        terms.append(2.0 ** (m * a2) * _inner_lp(block, params.p2, axis=0))
    return _outer_lq(np.stack(terms), params.q2, axis=0)


@dataclass(frozen=True)
class LambdaExcess:
    space_index: tuple[int, ...]
    space_level: int
    norm: float
    radius: float


@dataclass(frozen=True)
class BallReport:
    in_ball: bool
    worst_slice_norm: float
    per_lambda_excess: list[LambdaExcess]


def ball_membership(cube: CoeffCube, params: BesovParams,
                    w_time: WaveletSpec | str | None = None) -> BallReport:
    """Check a full-depth coefficient cube against the ball constraints.

    The time transform is inverted (with ``w_time``, package default if
    omitted) to recover the trajectories ``alpha_lambda(t)``; constraint (i)
    takes the sup over the time samples of the spatial norm, constraint (ii)
    compares every trajectory's temporal norm to its level radius.  All
    violations are reported; nothing raises.
    """
    if params.d != cube.d:
        raise ValueError(f"params.d={params.d} does not match cube.d={cube.d}")
    j_top = int(math.log2(cube.N)) - 1
    params.validate_radii(j_top)
    slev = space_level_map(cube.N, cube.d, cube.depth_space)

    traj = _invert_time(cube, w_time)
    worst = float(_space_norms_per_slice(traj.data, slev, params).max())

    tnorms = _time_norms_per_position(cube.data, cube.n, cube.depth_time, params)
    radii = np.empty_like(tnorms)
    for j in range(-1, int(slev.max()) + 1):
        radii[slev == j] = params.radius_profile(j)

    excess = []
    bad = np.argwhere(tnorms > radii)
    for pos in bad:
        pos = tuple(int(v) for v in pos)
        excess.append(LambdaExcess(space_index=pos, space_level=int(slev[pos]),
                                   norm=float(tnorms[pos]), radius=float(radii[pos])))
    return BallReport(in_ball=(worst <= params.A1 and not excess),
                      worst_slice_norm=worst, per_lambda_excess=excess)


def synthesize_member(params: BesovParams, shape: tuple[int, ...], seed: int,
                      w_time: WaveletSpec | str | None = None,
                      margin: float = 0.05, stream: int = 0) -> CoeffCube:
    """Deterministic pseudo-random cube inside the ball with >= ``margin``
    slack on every constraint.

    Coefficient magnitudes decay as ``2**(-j*(s1+d/2)) * 2**(-m*(s2+1/2))``
    with random signs; the whole cube is then rescaled so that both the
    sup-over-time spatial norm and every per-trajectory temporal norm sit
    at ``1 - margin`` of their radii or better.
    """
    n, N = shape[0], shape[1]
    d = len(shape) - 1
    if d != params.d:
        raise ValueError(f"shape implies d={d}, params have d={params.d}")
    if any(s != N for s in shape[1:]):
        raise ValueError("spatial axes must be equal")
    depth_space = int(math.log2(N))
    depth_time = int(math.log2(n))

    slev = space_level_map(N, d, depth_space)
    tlev = axis_level_map(n, depth_time)
    mspace = 2.0 ** (-slev * (params.s1 + d / 2.0))
    mtime = 2.0 ** (-tlev * (params.s2 + 0.5))
    mag = mtime.reshape((n,) + (1,) * d) * mspace[None, ...]

    rng = make_rng(seed, stream)
    signs = rng.integers(0, 2, size=mag.shape) * 2.0 - 1.0
    raw = CoeffCube(d=d, N=N, n=n, data=mag * signs,
                    depth_space=depth_space, depth_time=depth_time)

    worst = float(_space_norms_per_slice(_invert_time(raw, w_time).data, slev, params).max())
    tnorms = _time_norms_per_position(raw.data, n, depth_time, params)
    radii = np.empty_like(tnorms)
    for j in range(-1, int(slev.max()) + 1):
        radii[slev == j] = params.radius_profile(j)
    scale = (1.0 - margin) * min(params.A1 / worst, float((radii / tnorms).min()))
    return raw.with_data(raw.data * scale)
