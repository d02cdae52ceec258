"""IEEE 754 binary32 serialization of real vectors to bit sequences."""

import numpy as np

from ..errors import InvalidArgumentError


def float_serialize(values) -> np.ndarray:
    """Each value as binary32, most significant bit first."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("only finite values can be serialized")
    raw = v.astype(">f4").tobytes()
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8)).astype(np.uint8)


def float_deserialize(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % 32:
        raise InvalidArgumentError(f"bit length {bits.size} is not a multiple of 32")
    return np.frombuffer(np.packbits(bits).tobytes(), dtype=">f4").astype(np.float64)
