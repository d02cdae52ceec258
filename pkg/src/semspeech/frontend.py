"""Speech front end: WAV input, resampling and log-magnitude spectrograms."""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, TooShortError

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class SpeechSamples:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidArgumentError("samples must be one-dimensional")
        if int(self.sample_rate) <= 0:
            raise InvalidArgumentError("sample_rate must be positive")
        if samples.size and (samples.min() < -1.0 or samples.max() >= 1.0):
            raise InvalidArgumentError("amplitudes must lie in [-1, 1)")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class FrontendConfig:
    sample_rate: int = 16000
    frame_len_ms: float = 20.0
    hop_ms: float = 10.0
    fft_size: int = 512

    @property
    def frame_samples(self) -> int:
        return int(round(self.frame_len_ms * self.sample_rate / 1000.0))

    @property
    def hop_samples(self) -> int:
        return int(round(self.hop_ms * self.sample_rate / 1000.0))

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.frame_samples:
            raise TooShortError(
                f"{n_samples} samples is shorter than one frame ({self.frame_samples})"
            )
        return (n_samples - self.frame_samples) // self.hop_samples + 1


@dataclass(frozen=True)
class Spectrogram:
    values: np.ndarray  # (N frames, F bins)
    frame_len_ms: float
    hop_ms: float
    fft_size: int

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_bins(self) -> int:
        return self.values.shape[1]


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fft(x) -> np.ndarray:
    """Unnormalized DFT along the last axis by iterative radix-2 decimation in time.

    Leading axes are treated as a batch, so a whole frame matrix is
    transformed in one call.
    """
    a = np.array(x, dtype=np.complex128)
    n = a.shape[-1]
    if not _is_pow2(n):
        raise InvalidArgumentError(f"fft length must be a power of two, got {n}")
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    a = a[..., rev]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        a = a.reshape(a.shape[:-1] + (n // size, size))
        even = a[..., :half]
        odd = a[..., half:] * tw
        a = np.concatenate([even + odd, even - odd], axis=-1)
        a = a.reshape(a.shape[:-2] + (n,))
        size *= 2
    return a


def hamming(m: int) -> np.ndarray:
    if m == 1:
        return np.ones(1)
    n = np.arange(m)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (m - 1))


def make_spectrogram(m: SpeechSamples, frame_len_ms: float = 20.0, hop_ms: float = 10.0,
                     fft_size: int = 512, normalize: bool = True) -> Spectrogram:
    """Hamming-windowed log-magnitude spectrogram with per-bin normalization.

    With ``normalize=False`` the raw log magnitudes are returned, which is
    handy for inspecting spectral peaks.
    """
    cfg = FrontendConfig(m.sample_rate, frame_len_ms, hop_ms, fft_size)
    flen, hop = cfg.frame_samples, cfg.hop_samples
    if not _is_pow2(fft_size) or fft_size < flen:
        raise InvalidArgumentError("fft_size must be a power of two no smaller than the frame")
    n = cfg.n_frames(len(m))
    starts = np.arange(n) * hop
    frames = m.samples[starts[:, None] + np.arange(flen)[None, :]] * hamming(flen)
    padded = np.zeros((n, fft_size))
    padded[:, :flen] = frames
    mag = np.abs(fft(padded)[:, : cfg.n_bins])
    logmag = np.log(np.maximum(mag, LOG_FLOOR))
    if normalize:
        mean = logmag.mean(axis=0)
        std = logmag.std(axis=0)
        ok = std > 1e-12
        out = np.zeros_like(logmag)
        out[:, ok] = (logmag[:, ok] - mean[ok]) / std[ok]
        logmag = out
    return Spectrogram(logmag, frame_len_ms, hop_ms, fft_size)


def spectrogram_from_config(m: SpeechSamples, cfg: FrontendConfig) -> Spectrogram:
    if m.sample_rate != cfg.sample_rate:
        m = resample(m, cfg.sample_rate)
    return make_spectrogram(m, cfg.frame_len_ms, cfg.hop_ms, cfg.fft_size)


def resample(m: SpeechSamples, target_rate: int) -> SpeechSamples:
    """Linear-interpolation resampling (no anti-alias filter)."""
    if target_rate <= 0:
        raise InvalidArgumentError("target_rate must be positive")
    if target_rate == m.sample_rate:
        return SpeechSamples(m.samples.copy(), m.sample_rate)
    q = len(m)
    n_out = int(round(q * target_rate / m.sample_rate))
    pos = np.arange(n_out) * (m.sample_rate / target_rate)
    out = np.interp(pos, np.arange(q), m.samples)
    return SpeechSamples(out, target_rate)


def read_wav(path) -> SpeechSamples:
    """Read a mono 16-bit PCM WAV file, scaling amplitudes by 1/32768."""
    with wave.open(str(path), "rb") as w:
        if w.getnchannels() != 1:
            raise InvalidArgumentError(f"{path}: expected mono, got {w.getnchannels()} channels")
        if w.getsampwidth() != 2:
            raise InvalidArgumentError(f"{path}: expected 16-bit PCM")
        if w.getcomptype() != "NONE":
            raise InvalidArgumentError(f"{path}: compressed WAV not supported")
        rate = w.getframerate()
        raw = w.readframes(w.getnframes())
    pcm = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    return SpeechSamples(pcm / 32768.0, rate)


def write_wav(path, m: SpeechSamples) -> None:
    pcm = np.clip(np.round(m.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(m.sample_rate)
        w.writeframes(pcm.tobytes())
