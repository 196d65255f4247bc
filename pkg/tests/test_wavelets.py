import math

import numpy as np
import pytest

from stwave.wavelets import (
    CoeffCube,
    HAAR,
    SpaceTimeVolume,
    WAVELETS,
    WaveletSpec,
    dwt1d_periodic,
    dwt_space,
    dwt_spacetime,
    idwt1d_periodic,
    idwt_spacetime,
    iter_levels,
    space_level_map,
    _transform_axis,
    _space_levels,
)

RNG = np.random.default_rng(42)


@pytest.mark.parametrize("name", sorted(WAVELETS))
def test_filter_invariants(name):
    w = WAVELETS[name]
    h, g, L = w.h, w.g, w.support_length
    assert abs(h.sum() - math.sqrt(2)) < 1e-12
    assert abs(np.dot(h, h) - 1.0) < 1e-12
    for m in range(1, L // 2):
        assert abs(np.dot(h[: L - 2 * m], h[2 * m:])) < 1e-12
    for k in range(L):
        assert g[k] == (-1) ** k * h[L - 1 - k]


def test_bad_filter_rejected():
    with pytest.raises(ValueError):
        WaveletSpec.from_lowpass("bad", [0.5, 0.5], vanishing_moments=1)
    with pytest.raises(ValueError):
        WaveletSpec.from_lowpass("odd", [1.0, 0.3, 0.1], vanishing_moments=1)


def test_dwt1d_zero_vector():
    assert np.array_equal(dwt1d_periodic(np.zeros(8), HAAR, 3), np.zeros(8))


def test_dwt1d_haar_hand_cascade():
    # (1+1)/sqrt(2) per pair, then (sqrt2+sqrt2)/sqrt(2) = 2
    c = dwt1d_periodic([1.0, 1.0, 1.0, 1.0], HAAR, 2)
    assert np.allclose(c, [2.0, 0.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(idwt1d_periodic([2.0, 0.0, 0.0, 0.0], HAAR, 2), [1, 1, 1, 1])


@pytest.mark.parametrize("name", sorted(WAVELETS))
def test_dwt1d_parseval_random(name):
    x = RNG.standard_normal(64)
    c = dwt1d_periodic(x, WAVELETS[name], 6)
    assert abs(np.sum(c**2) - np.sum(x**2)) < 1e-10 * np.sum(x**2)


@pytest.mark.parametrize("name", sorted(WAVELETS))
@pytest.mark.parametrize("length,depth", [(128, 7), (128, 3), (8, 3), (4, 1)])
def test_dwt1d_roundtrip(name, length, depth):
    x = RNG.standard_normal(length)
    back = idwt1d_periodic(dwt1d_periodic(x, WAVELETS[name], depth), WAVELETS[name], depth)
    assert np.max(np.abs(back - x)) < 1e-10


def test_dwt1d_errors():
    with pytest.raises(ValueError):
        dwt1d_periodic(np.zeros(8), HAAR, 4)  # depth too large
    with pytest.raises(ValueError):
        dwt1d_periodic(np.zeros(12), HAAR, 2)  # not a power of two
    with pytest.raises(ValueError):
        dwt1d_periodic(np.zeros(8), HAAR, 0)


def test_volume_validation():
    with pytest.raises(ValueError):
        SpaceTimeVolume(d=2, N=12, n=8, data=np.zeros(12 * 12 * 8))
    with pytest.raises(ValueError):
        SpaceTimeVolume(d=1, N=8, n=8, data=np.zeros(63))
    v = SpaceTimeVolume(d=1, N=8, n=4, data=np.arange(32, dtype=float))
    assert v.data.shape == (4, 8)
    assert not v.data.flags.writeable


def test_dwt_space_constant_slices():
    # constant in space: all detail zero, scaling = const * 2**(depth*d/2)
    vol = SpaceTimeVolume.from_array(np.full((4, 16, 16), 3.0))
    cube = dwt_space(vol, "haar")
    slev = space_level_map(16, 2, 4)
    assert np.allclose(cube.data[:, slev == -1], 3.0 * 2 ** (4 * 2 / 2))
    assert np.max(np.abs(cube.data[:, slev >= 0])) < 1e-8


def test_dwt_space_zero_and_energy():
    zero = SpaceTimeVolume.from_array(np.zeros((4, 8, 8)))
    assert dwt_space(zero, "sym8").energy() == 0.0
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((4, 16, 16)))
    cube = dwt_space(vol, "daub4")
    for ell in range(4):  # energy preserved per slice
        assert np.isclose(np.sum(cube.data[ell] ** 2), np.sum(vol.data[ell] ** 2),
                          rtol=1e-10)


@pytest.mark.parametrize("name", sorted(WAVELETS))
def test_spacetime_rank_one_separability(name):
    w = WAVELETS[name]
    u = RNG.standard_normal(16)
    v = RNG.standard_normal((8, 8))
    vol = SpaceTimeVolume.from_array(np.einsum("t,ij->tij", u, v))
    cube = dwt_spacetime(vol, w, w)
    cu = dwt1d_periodic(u, w, 4)
    carrier = SpaceTimeVolume.from_array(np.stack([v, v]))
    cv = dwt_space(carrier, w).data[0]
    assert np.max(np.abs(cube.data - np.einsum("t,ij->tij", cu, cv))) < 1e-10


def test_spacetime_commutation():
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((16, 8, 8)))
    space_first = dwt_spacetime(vol, "sym8", "daub4")
    time_first = _space_levels(_transform_axis(vol.data, WAVELETS["daub4"], 4, axis=0),
                               2, WAVELETS["sym8"], 3)
    assert np.max(np.abs(space_first.data - time_first)) < 1e-10


def test_spacetime_roundtrip_and_energy():
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((32, 16, 16)))
    cube = dwt_spacetime(vol)
    assert abs(cube.energy() - vol.energy()) < 1e-10 * vol.energy()
    back = idwt_spacetime(cube)
    assert np.max(np.abs(back.data - vol.data)) < 1e-10
    zero = dwt_spacetime(SpaceTimeVolume.from_array(np.zeros((8, 8))))
    assert zero.energy() == 0.0
    assert idwt_spacetime(zero).energy() == 0.0


def test_unit_coefficient_basis_image():
    # a single unit coefficient inverts to a sampled basis function of unit energy
    for idx in [(0, 0, 0), (3, 5, 2), (7, 7, 7)]:
        data = np.zeros((8, 8, 8))
        data[idx] = 1.0
        cube = CoeffCube(d=2, N=8, n=8, data=data, depth_space=3, depth_time=3)
        vol = idwt_spacetime(cube, "daub4", "sym8")
        assert abs(vol.energy() - 1.0) < 1e-10


def test_iter_levels_counts_d1():
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((8, 8)))
    cube = dwt_spacetime(vol, "haar", "haar")
    entries = list(iter_levels(cube))
    assert len(entries) == 64
    per_band = {}
    for ci, _ in entries:
        key = (ci.space_level, ci.time_level)
        per_band[key] = per_band.get(key, 0) + 1
    # spatial multiplicities {j=-1: 1, j=0: 1, j=1: 2, j=2: 4} per time band
    for m in (-1, 0, 1, 2):
        width = 1 if m < 0 else 2**m
        counts = {j: per_band[(j, m)] for j in (-1, 0, 1, 2)}
        assert counts == {-1: width, 0: width, 1: 2 * width, 2: 4 * width}


def test_iter_levels_counts_d2():
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((4, 8, 8)))
    cube = dwt_spacetime(vol, "haar", "haar")
    counts = {}
    total_sq = 0.0
    for ci, v in iter_levels(cube):
        counts[ci.space_level] = counts.get(ci.space_level, 0) + 1
        total_sq += v * v
        if ci.space_level >= 0:
            assert ci.space_orientation in ("HL", "LH", "HH")
            assert all(0 <= p < 2**ci.space_level for p in ci.space_position)
    # per level j: (2**((j+1)d) - 2**(jd)) spatial slots, times n time slots
    assert counts == {-1: 4, 0: 3 * 4, 1: 12 * 4, 2: 48 * 4}
    assert abs(total_sq - cube.energy()) < 1e-10


def test_iter_levels_minimum_volume():
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((2, 2)))
    cube = dwt_spacetime(vol, "haar", "haar")
    assert len(list(iter_levels(cube))) == 4


@pytest.mark.parametrize("shape", [(4, 4), (16, 4), (4, 8, 8), (16, 32, 32)])
def test_roundtrip_shapes(shape):
    vol = SpaceTimeVolume.from_array(RNG.standard_normal(shape))
    for name in WAVELETS:
        back = idwt_spacetime(dwt_spacetime(vol, name, name), name, name)
        assert np.max(np.abs(back.data - vol.data)) < 1e-10


def test_dwt_space_slicewise_bit_identical():
    # batch transform must equal independent per-slice transforms exactly
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((8, 16, 16)))
    cube = dwt_space(vol, "sym8")
    for ell in range(8):
        single = SpaceTimeVolume.from_array(np.stack([vol.data[ell]] * 2))
        assert np.array_equal(dwt_space(single, "sym8").data[0], cube.data[ell])
