import numpy as np
import pytest

from pscl.channel import ChannelConfig, RngStream, channel_llrs, modulate, transmit


def test_modulate():
    assert modulate([0, 1, 0]).tolist() == [1.0, -1.0, 1.0]
    assert np.all(modulate(np.zeros(5)) == 1.0)
    assert np.all(modulate(np.ones(5)) == -1.0)


def test_sigma2_at_half_rate_two_db():
    # 1 / (2 * 0.5 * 10**0.2)
    assert ChannelConfig(2.0, 0.5).sigma2 == pytest.approx(0.6309573, abs=1e-4)


def test_noiseless_limit():
    s = modulate([0, 1, 1, 0])
    y = transmit(s, 1e-30, RngStream(0, 0))
    assert np.allclose(y, s)


def test_stream_is_reproducible():
    cfg = ChannelConfig(1.0, 0.5)
    s = modulate(np.zeros(64))
    a = transmit(s, cfg, RngStream(42, 7))
    b = transmit(s, cfg, RngStream(42, 7))
    c = transmit(s, cfg, RngStream(42, 8))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_noise_variance():
    s = np.zeros(1_000_000)
    y = transmit(s, 1.0, RngStream(1, 0))
    assert np.var(y - s) == pytest.approx(1.0, abs=0.01)


def test_llrs():
    sigma2 = 0.8
    assert channel_llrs([sigma2 / 2], sigma2)[0] == pytest.approx(1.0)
    assert channel_llrs([0.0], sigma2)[0] == 0.0
    y = np.random.default_rng(0).normal(size=50)
    assert np.array_equal(np.sign(channel_llrs(y, sigma2)), np.sign(y))


def test_llrs_need_positive_variance():
    with pytest.raises(ValueError):
        channel_llrs([1.0], 0.0)


def test_rate_bounds():
    with pytest.raises(ValueError):
        ChannelConfig(1.0, 0.0)
