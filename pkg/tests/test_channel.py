import math

import numpy as np
import pytest
from scipy import stats

from semspeech import channel as chn
from semspeech.errors import NearSingularChannelError, PreconditionError


def unit_symbols(rng, n):
    x = chn.complex_normal(rng, n)
    return x / np.sqrt(np.mean(np.abs(x) ** 2))


def test_noise_variance_convention():
    assert chn.noise_variance(0) == 1.0
    assert chn.noise_variance(10) == pytest.approx(0.1)
    assert chn.noise_variance(math.inf) == 0.0


@pytest.mark.parametrize("snr", [-6.0, 10.0])
def test_awgn_snr_calibration(rng, snr):
    x = unit_symbols(rng, 200_000)
    y, st = chn.transmit(x, chn.ChannelConfig("awgn", snr), rng)
    assert np.all(st.h == 1)
    assert chn.estimate_snr(x, y, st.h) == pytest.approx(snr, abs=0.1)


def test_rayleigh_gain_distribution(rng):
    h = chn.draw_fading(chn.ChannelConfig("rayleigh", 0.0), rng, size=20_000)
    # |h|^2 ~ Exp(1) for unit-variance circular Gaussian fading
    assert stats.kstest(np.abs(h) ** 2, "expon").pvalue > 1e-3


def test_rician_gain_distribution(rng):
    k = 4.0
    h = chn.draw_fading(chn.ChannelConfig("rician", 0.0, rician_k=k), rng, size=20_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.03)
    # |h| is Rice with shape nu/sigma where sigma^2 = 1/(2(K+1)), nu^2 = K/(K+1)
    sigma = math.sqrt(1 / (2 * (k + 1)))
    nu = math.sqrt(k / (k + 1))
    assert stats.kstest(np.abs(h), "rice", args=(nu / sigma, 0, sigma)).pvalue > 1e-3


def test_block_fading_shares_one_coefficient(rng):
    x = unit_symbols(rng, 64)
    _, st = chn.transmit(x, chn.ChannelConfig("rayleigh", 10.0, block_fading=True), rng)
    assert np.unique(st.h).size == 1
    _, st = chn.transmit(x, chn.ChannelConfig("rayleigh", 10.0, block_fading=False), rng)
    assert np.unique(st.h).size == 64


def test_noiseless_equalization_is_exact(rng):
    x = unit_symbols(rng, 100)
    y, st = chn.transmit(x, chn.ChannelConfig("rician", math.inf), rng)
    np.testing.assert_allclose(chn.equalize(y, st.h), x, atol=1e-12)


def test_transmit_requires_unit_power(rng):
    with pytest.raises(PreconditionError):
        chn.transmit(2 * unit_symbols(rng, 50), chn.ChannelConfig("awgn", 0.0), rng)


def test_equalize_rejects_null_channel():
    with pytest.raises(NearSingularChannelError):
        chn.equalize(np.ones(3, complex), np.zeros(3, complex))


def test_real_complex_pairing():
    v = np.array([1.0, 2.0, 3.0, 4.0])
    z = chn.real_to_complex(v)
    np.testing.assert_array_equal(z, [1 + 2j, 3 + 4j])
    np.testing.assert_array_equal(chn.complex_to_real(z), v)


def test_same_seed_same_draw():
    x = unit_symbols(np.random.default_rng(0), 32)
    cfg = chn.ChannelConfig("rician", 4.0)
    y1, _ = chn.transmit(x, cfg, np.random.default_rng(5))
    y2, _ = chn.transmit(x, cfg, np.random.default_rng(5))
    np.testing.assert_array_equal(y1, y2)
