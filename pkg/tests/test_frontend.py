import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semspeech import frontend as fe
from semspeech.errors import InvalidArgumentError, TooShortError


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 9), st.integers(0, 2**31 - 1))
def test_fft_matches_numpy(log2n, seed):
    x = np.random.default_rng(seed).standard_normal((3, 2**log2n))
    np.testing.assert_allclose(fe.fft(x), np.fft.fft(x, axis=-1), atol=1e-9)


def test_fft_rejects_non_power_of_two():
    with pytest.raises(InvalidArgumentError):
        fe.fft(np.zeros(6))


def test_hamming_matches_numpy():
    np.testing.assert_allclose(fe.hamming(320), np.hamming(320), atol=1e-12)


def test_frame_count_and_shape():
    cfg = fe.FrontendConfig()
    assert (cfg.frame_samples, cfg.hop_samples, cfg.n_bins) == (320, 160, 257)
    assert cfg.n_frames(16000) == 99
    s = fe.make_spectrogram(fe.SpeechSamples(np.zeros(16000), 16000))
    assert s.values.shape == (99, 257)


def test_too_short():
    with pytest.raises(TooShortError):
        fe.make_spectrogram(fe.SpeechSamples(np.zeros(319), 16000))


def test_amplitude_range_checked():
    with pytest.raises(InvalidArgumentError):
        fe.SpeechSamples(np.array([0.0, 1.0]), 16000)


def test_tone_peak_bin():
    rate, f = 16000, 1000.0
    t = np.arange(rate) / rate
    m = fe.SpeechSamples(0.5 * np.sin(2 * np.pi * f * t), rate)
    raw = fe.make_spectrogram(m, normalize=False)
    assert np.all(raw.values.argmax(axis=1) == round(f * 512 / rate))


def test_raw_log_magnitude_matches_numpy_oracle():
    rng = np.random.default_rng(3)
    x = rng.uniform(-0.5, 0.5, 800)
    raw = fe.make_spectrogram(fe.SpeechSamples(x, 16000), normalize=False).values
    frames = np.stack([x[i * 160:i * 160 + 320] * np.hamming(320) for i in range(4)])
    want = np.log(np.maximum(np.abs(np.fft.rfft(frames, n=512)), 1e-10))
    np.testing.assert_allclose(raw, want, atol=1e-9)


def test_normalized_bins_are_standardized():
    rng = np.random.default_rng(4)
    s = fe.make_spectrogram(fe.SpeechSamples(rng.uniform(-0.5, 0.5, 8000), 16000)).values
    np.testing.assert_allclose(s.mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(s.std(axis=0), 1.0, atol=1e-9)


def test_silence_gives_zero_bins():
    s = fe.make_spectrogram(fe.SpeechSamples(np.zeros(1600), 16000)).values
    assert np.all(s == 0.0)


def test_resample_length_and_rate():
    m = fe.SpeechSamples(np.zeros(22050), 22050)
    r = fe.resample(m, 16000)
    assert (len(r), r.sample_rate) == (16000, 16000)


def test_wav_roundtrip(tmp_path):
    x = np.round(np.linspace(-0.5, 0.5, 1000) * 32768) / 32768
    fe.write_wav(tmp_path / "a.wav", fe.SpeechSamples(x, 8000))
    back = fe.read_wav(tmp_path / "a.wav")
    assert back.sample_rate == 8000
    np.testing.assert_array_equal(back.samples, x)
