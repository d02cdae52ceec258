"""Assembled conventional transceivers.

text:    Huffman -> polar(N, K) -> 64-QAM -> channel -> ZF -> max-log LLR -> SCL -> Huffman
feature: binary32 serialization -> same physical layer -> deserialization

The payload bit length is treated as known at the receiver (header side
information), so zero padding of the last polar block and of the final QAM
symbol is stripped before source decoding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import ChannelConfig, equalize, transmit
from .huffman import ENGLISH_FREQUENCIES, HuffmanCodebook, huffman_build
from .ieee754 import float_deserialize, float_serialize
from .polar import PolarConfig, polar_encode, polar_scl_decode
from .qam import BITS_PER_SYMBOL, qam64_llr, qam64_map


@dataclass
class PhyResult:
    bits: np.ndarray
    n_symbols: int


@dataclass
class TextResult:
    text: str
    n_symbols: int
    ok: bool


@dataclass
class FeatureResult:
    features: np.ndarray
    n_symbols: int


_DEFAULT_POLAR = None


def default_polar() -> PolarConfig:
    global _DEFAULT_POLAR
    if _DEFAULT_POLAR is None:
        _DEFAULT_POLAR = PolarConfig(512, 256, 4, 2.0)
    return _DEFAULT_POLAR


def coded_symbol_count(n_payload_bits: int, polar: PolarConfig | None = None) -> int:
    polar = polar or default_polar()
    blocks = max(1, -(-n_payload_bits // polar.k))
    return -(-(blocks * polar.n) // BITS_PER_SYMBOL)


def run_phy(bits, channel: ChannelConfig, rng: np.random.Generator,
            polar: PolarConfig | None = None) -> PhyResult:
    """Polar + 64-QAM over one block-faded channel use; returns the decoded payload bits."""
    polar = polar or default_polar()
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    n_payload = bits.size
    blocks = max(1, -(-n_payload // polar.k))
    info = np.zeros(blocks * polar.k, dtype=np.uint8)
    info[:n_payload] = bits
    coded = polar_encode(info.reshape(blocks, polar.k), polar).ravel()
    pad = (-coded.size) % BITS_PER_SYMBOL
    coded = np.concatenate([coded, np.zeros(pad, dtype=np.uint8)])
    x = qam64_map(coded)
    # the finite constellation is not exactly unit power for a given word
    x_norm = x / np.sqrt(np.mean(np.abs(x) ** 2))
    gain = np.sqrt(np.mean(np.abs(x) ** 2))
    y, state = transmit(x_norm, channel, rng)
    y_eq = equalize(y, state.h) * gain
    llr = qam64_llr(y_eq, state.h, state.sigma2 * gain ** 2)[: blocks * polar.n]
    decoded = polar_scl_decode(llr.reshape(blocks, polar.n), polar)
    return PhyResult(decoded.ravel()[:n_payload], x.size)


def run_text_transceiver(text: str, channel: ChannelConfig, rng: np.random.Generator,
                         codebook: HuffmanCodebook | None = None,
                         polar: PolarConfig | None = None) -> TextResult:
    codebook = codebook or huffman_build(ENGLISH_FREQUENCIES)
    bits = codebook.encode(text)
    phy = run_phy(bits, channel, rng, polar)
    tokens, ok = codebook.decode(phy.bits)
    return TextResult("".join(tokens), phy.n_symbols, ok)


def run_feature_transceiver(features, channel: ChannelConfig, rng: np.random.Generator,
                            polar: PolarConfig | None = None) -> FeatureResult:
    features = np.asarray(features, dtype=np.float64)
    phy = run_phy(float_serialize(features), channel, rng, polar)
    return FeatureResult(float_deserialize(phy.bits).reshape(features.shape), phy.n_symbols)


def sanitize_features(p) -> np.ndarray:
    """Replace non-finite entries produced by bit errors so argmax decoding is defined."""
    lo = np.finfo(np.float64).min
    return np.nan_to_num(np.asarray(p, dtype=np.float64), nan=lo, neginf=lo)
