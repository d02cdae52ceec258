"""Gray-labelled square 64-QAM with max-log LLR demapping.

Each 6-bit group is split into three in-phase bits followed by three
quadrature bits. Per axis, amplitude index k = 0..7 (level 2k - 7) carries
the binary-reflected Gray label k ^ (k >> 1), MSB first. Levels are scaled
by 1/sqrt(42) for unit average symbol energy.
"""

import math

import numpy as np

from ..errors import InvalidArgumentError

BITS_PER_SYMBOL = 6
SCALE = 1.0 / math.sqrt(42.0)
_LEVELS = (2.0 * np.arange(8) - 7.0) * SCALE
_GRAY = np.arange(8) ^ (np.arange(8) >> 1)
_LABEL_TO_INDEX = np.argsort(_GRAY)


def _axis_bits(k):
    g = _GRAY[k]
    return np.stack([(g >> 2) & 1, (g >> 1) & 1, g & 1], axis=-1)


def constellation() -> tuple[np.ndarray, np.ndarray]:
    """All 64 points and their 6-bit labels, in label order."""
    labels = np.array([[(v >> (5 - i)) & 1 for i in range(6)] for v in range(64)], dtype=np.uint8)
    return qam64_map(labels.ravel()), labels


def qam64_map(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % BITS_PER_SYMBOL:
        raise InvalidArgumentError(f"bit length {bits.size} is not a multiple of 6")
    b = bits.reshape(-1, 6)
    weights = np.array([4, 2, 1])
    i_idx = _LABEL_TO_INDEX[b[:, :3] @ weights]
    q_idx = _LABEL_TO_INDEX[b[:, 3:] @ weights]
    return _LEVELS[i_idx] + 1j * _LEVELS[q_idx]


def _axis_llr(r, scale):
    # r: received axis values (n,); returns (n, 3) max-log LLRs
    d = (r[:, None] - _LEVELS[None, :]) ** 2
    bits = _axis_bits(np.arange(8))  # (8, 3)
    out = np.empty((r.size, 3))
    for j in range(3):
        d0 = np.min(np.where(bits[None, :, j] == 0, d, np.inf), axis=1)
        d1 = np.min(np.where(bits[None, :, j] == 1, d, np.inf), axis=1)
        out[:, j] = (d1 - d0) * scale
    return out


def qam64_llr(y_eq, h, sigma2) -> np.ndarray:
    """Per-bit max-log LLRs (positive favours 0) from zero-forced symbols.

    After equalization the noise on each symbol is CN(0, sigma2 / |h|^2).
    """
    y_eq = np.asarray(y_eq, dtype=np.complex128).ravel()
    h2 = np.abs(np.broadcast_to(np.asarray(h, dtype=np.complex128), y_eq.shape)) ** 2
    var = np.maximum(sigma2 / np.maximum(h2, 1e-300), 1e-30)
    scale = 1.0 / var
    li = _axis_llr(y_eq.real, 1.0)
    lq = _axis_llr(y_eq.imag, 1.0)
    return (np.concatenate([li, lq], axis=1) * scale[:, None]).ravel()
