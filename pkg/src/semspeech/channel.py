"""Flat fading channels (AWGN / Rayleigh / Rician) with zero-forcing equalization.

SNR is defined per complex symbol for unit signal power, so the noise
variance is 10^(-snr_db / 10). Fading is block fading by default: one
coefficient per transmitted utterance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NearSingularChannelError, PreconditionError

KINDS = ("awgn", "rayleigh", "rician")


@dataclass(frozen=True)
class ChannelConfig:
    kind: str = "rician"
    snr_db: float = 8.0
    rician_k: float = 4.0
    block_fading: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown channel kind {self.kind!r}; choose from {KINDS}")
        if self.rician_k < 0:
            raise InvalidArgumentError("rician_k must be >= 0")

    @property
    def sigma2(self) -> float:
        return noise_variance(self.snr_db)


@dataclass(frozen=True)
class ChannelState:
    kind: str
    snr_db: float
    rician_k: float
    h: np.ndarray | complex
    sigma2: float


def noise_variance(snr_db: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return 10.0 ** (-snr_db / 10.0)


def complex_normal(rng: np.random.Generator, size, var=1.0) -> np.ndarray:
    """CN(0, var): independent real and imaginary parts of variance var/2."""
    s = math.sqrt(var / 2.0)
    return s * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def draw_fading(cfg: ChannelConfig, rng: np.random.Generator, size=None):
    if cfg.kind == "awgn":
        return 1.0 + 0.0j if size is None else np.ones(size, dtype=np.complex128)
    if cfg.kind == "rayleigh":
        h = complex_normal(rng, 1 if size is None else size)
    else:
        k = cfg.rician_k
        los = math.sqrt(k / (k + 1.0))
        h = los + math.sqrt(1.0 / (k + 1.0)) * complex_normal(rng, 1 if size is None else size)
    return complex(h[0]) if size is None else h


def transmit(x, cfg: ChannelConfig, rng: np.random.Generator):
    """y = h x + w for a unit-power symbol vector; returns (y, state)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.size == 0:
        raise InvalidArgumentError("empty symbol vector")
    power = float(np.mean(np.abs(x) ** 2))
    if abs(power - 1.0) > 1e-3:
        raise PreconditionError(f"input power {power:.6f} is not normalized to 1")
    h = draw_fading(cfg, rng) if cfg.block_fading else draw_fading(cfg, rng, x.size)
    sigma2 = cfg.sigma2
    w = complex_normal(rng, x.size, sigma2)
    y = h * x + w
    return y, ChannelState(cfg.kind, cfg.snr_db, cfg.rician_k, h, sigma2)


def equalize(y, h) -> np.ndarray:
    """Zero-forcing with perfect CSI: y conj(h) / |h|^2."""
    y = np.asarray(y, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    mag2 = np.abs(h) ** 2
    if np.any(np.sqrt(mag2) <= 1e-12):
        raise NearSingularChannelError("channel coefficient magnitude <= 1e-12")
    return y * np.conj(h) / mag2


def estimate_snr(x, y, h) -> float:
    """10 log10(||h x||^2 / ||y - h x||^2); +inf when the residual is zero."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.shape != y.shape:
        raise InvalidArgumentError("x and y must have equal length")
    hx = np.asarray(h) * x
    resid = float(np.sum(np.abs(y - hx) ** 2))
    if resid == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.sum(np.abs(hx) ** 2)) / resid)


def real_to_complex(v) -> np.ndarray:
    """Even-index reals become real parts, odd-index reals imaginary parts."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size % 2:
        raise InvalidArgumentError("need an even number of reals")
    return v[0::2] + 1j * v[1::2]


def complex_to_real(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128).ravel()
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out
