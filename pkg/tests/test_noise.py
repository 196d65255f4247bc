import math

import numpy as np
import pytest

from stwave.noise import (
    NoiseModel,
    epsilon_from_sigma,
    mad_sigma_slice,
    mad_sigma_volume,
    make_rng,
    observe_sequence,
    observe_volume,
    snr_to_sigma,
)
from stwave.wavelets import CoeffCube, SpaceTimeVolume, dwt_spacetime

RNG = np.random.default_rng(3)


def zero_cube(d=1, N=16, n=16):
    shape = (n,) + (N,) * d
    return CoeffCube(d=d, N=N, n=n, data=np.zeros(shape),
                     depth_space=int(math.log2(N)), depth_time=int(math.log2(n)))


def test_observe_sequence_eps_zero_identity():
    truth = zero_cube().with_data(RNG.standard_normal((16, 16)))
    out = observe_sequence(truth, NoiseModel(epsilon=0.0, seed=1))
    assert np.array_equal(out.data, truth.data)


def test_observe_sequence_deterministic():
    truth = zero_cube()
    m = NoiseModel(epsilon=1.0, seed=5, rng_stream_id=2)
    a = observe_sequence(truth, m)
    b = observe_sequence(truth, m)
    assert np.array_equal(a.data, b.data)
    c = observe_sequence(truth, NoiseModel(epsilon=1.0, seed=5, rng_stream_id=3))
    assert not np.array_equal(a.data, c.data)


def test_observe_sequence_moments():
    truth = zero_cube(d=2, N=32, n=128)  # 131072 coefficients
    y = observe_sequence(truth, NoiseModel(epsilon=1.0, seed=0))
    assert abs(y.data.mean()) < 0.02
    assert abs(y.data.var() - 1.0) < 0.02


def test_observe_sequence_consistency_check():
    truth = zero_cube(d=1, N=16, n=16)
    good = NoiseModel(epsilon=1.0 / 16.0, sigma=1.0, seed=0)
    observe_sequence(truth, good)  # eps = sigma/sqrt(256)
    with pytest.raises(ValueError):
        observe_sequence(truth, NoiseModel(epsilon=0.5, sigma=1.0, seed=0))


def test_observe_volume_sigma_zero_identity():
    vol = SpaceTimeVolume.from_array(RNG.standard_normal((8, 8)))
    out = observe_volume(vol, 0.0, seed=1)
    assert np.array_equal(out.data, vol.data)


def test_observe_volume_std():
    vol = SpaceTimeVolume.from_array(np.zeros((128, 64, 64)))
    noisy = observe_volume(vol, 2.5, seed=4)
    assert abs(np.std(noisy.data - vol.data) - 2.5) < 0.02 * 2.5


def test_variance_transfer_to_coefficients():
    # orthonormal transform of iid N(0, sigma^2) -> coefficients of the same
    # variance; in calibrated units the sequence noise level is eps
    sigma = 0.8
    vol = SpaceTimeVolume.from_array(np.zeros((8, 8, 8)))
    M = 8 * 8 * 8
    eps = epsilon_from_sigma(sigma, 2, 8, 8)
    assert eps == pytest.approx(sigma / math.sqrt(M))
    samples = []
    for rep in range(200):
        noisy = observe_volume(vol, sigma, seed=6, stream=rep)
        samples.append(dwt_spacetime(noisy).data / math.sqrt(M))
    var = float(np.var(np.stack(samples)))
    assert abs(var - eps**2) < 0.05 * eps**2


def test_snr_to_sigma():
    data = RNG.standard_normal((8, 16))
    vol = SpaceTimeVolume.from_array(2.0 * data / data.std())
    assert snr_to_sigma(vol, 4.0) == pytest.approx(0.5)
    assert snr_to_sigma(vol, math.inf) == 0.0
    doubled = SpaceTimeVolume.from_array(2.0 * vol.data)
    assert snr_to_sigma(doubled, 4.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        snr_to_sigma(SpaceTimeVolume.from_array(np.ones((8, 8))), 4.0)
    with pytest.raises(ValueError):
        snr_to_sigma(vol, 0.0)


def test_mad_slice_gaussian_calibration():
    hits = 0
    for s in range(200):
        sl = make_rng(99, s).standard_normal((64, 64))
        hits += abs(mad_sigma_slice(sl, "sym8") - 1.0) <= 0.1
    assert hits >= 198


def test_mad_slice_homogeneity_and_zero():
    sl = RNG.standard_normal((32, 32))
    assert mad_sigma_slice(3.0 * sl) == pytest.approx(3.0 * mad_sigma_slice(sl))
    assert mad_sigma_slice(np.zeros((16, 16))) == 0.0
    assert mad_sigma_slice(np.zeros(16)) == 0.0  # d = 1 slices too


def test_mad_slice_bias_small():
    # Monte-Carlo bias of the estimator on pure noise at N=64
    est = [mad_sigma_slice(make_rng(5, s).standard_normal((64, 64))) for s in range(500)]
    assert abs(np.mean(est) - 1.0) <= 0.03


def test_mad_volume_semantics():
    base = np.stack([make_rng(11, s).standard_normal((32, 32)) for s in range(8)])
    vol = SpaceTimeVolume.from_array(base)
    v = mad_sigma_volume(vol)
    per = [mad_sigma_slice(base[i]) for i in range(8)]
    assert v == pytest.approx(max(per))
    assert abs(v - per[0]) < 0.1 * per[0]  # homogeneous noise: close per slice
    louder = base.copy()
    louder[3] *= 2.0
    v2 = mad_sigma_volume(SpaceTimeVolume.from_array(louder))
    assert v2 == pytest.approx(2.0 * mad_sigma_slice(base[3]))
    assert mad_sigma_volume(SpaceTimeVolume.from_array(np.zeros((4, 8, 8)))) == 0.0


def test_mad_hh_only_option():
    sl = make_rng(21, 0).standard_normal((64, 64))
    all_bands = mad_sigma_slice(sl, finest="all")
    hh = mad_sigma_slice(sl, finest="hh")
    assert all_bands != hh
    assert abs(hh - 1.0) < 0.15


def test_make_rng_streams():
    a = make_rng(1, 0).standard_normal(4)
    b = make_rng(1, 0).standard_normal(4)
    c = make_rng(1, 1).standard_normal(4)
    d = make_rng(2, 0).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
