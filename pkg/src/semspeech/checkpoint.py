"""Binary checkpoint format.

    magic    8 bytes  b"DSCST" + 3-digit format version ("001")
    count    uint32   number of tensors
    per tensor:
      name_len uint32, name (UTF-8)
      rank     uint32, dims uint32 * rank
      data     float32 * prod(dims)
All integers and floats are little-endian. Model hyperparameters travel as
tensors under the ``meta/`` prefix.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .codec import ModelConfig
from .errors import CheckpointError, MagicMismatchError, TruncatedCheckpointError, VersionMismatchError
from .nn import ModelParams

MAGIC_PREFIX = b"DSCST"
VERSION = b"001"


def save_tensors(tensors: dict, path) -> None:
    chunks = [MAGIC_PREFIX + VERSION, struct.pack("<I", len(tensors))]
    for name, value in tensors.items():
        arr = np.asarray(value, dtype="<f4")
        raw = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw)) + raw)
        chunks.append(struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes(order="C"))
    Path(path).write_bytes(b"".join(chunks))


def load_tensors(path) -> dict:
    buf = Path(path).read_bytes()
    if len(buf) < 8 or buf[:5] != MAGIC_PREFIX:
        raise MagicMismatchError(f"{path}: not a checkpoint (bad magic)")
    if buf[5:8] != VERSION:
        raise VersionMismatchError(f"{path}: format version {buf[5:8]!r}, expected {VERSION!r}")
    pos = 8

    def take(n):
        nonlocal pos
        if pos + n > len(buf):
            raise TruncatedCheckpointError(f"{path}: truncated at byte {pos}")
        out = buf[pos:pos + n]
        pos += n
        return out

    (count,) = struct.unpack("<I", take(4))
    out = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<I", take(4))
        name = take(nlen).decode("utf-8")
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        n = int(np.prod(dims, dtype=np.int64))
        out[name] = np.frombuffer(take(4 * n), dtype="<f4").reshape(dims).copy()
    if pos != len(buf):
        raise CheckpointError(f"{path}: {len(buf) - pos} trailing bytes")
    return out


def _meta(cfg: ModelConfig) -> dict:
    return {
        "meta/n_bins": [cfg.n_bins],
        "meta/conv_filters": list(cfg.conv_filters),
        "meta/conv_kernel": list(cfg.conv_kernel),
        "meta/conv_strides": np.array(cfg.conv_strides, dtype=np.float64).reshape(-1, 2),
        "meta/gru": [cfg.gru_layers, cfg.gru_units],
        "meta/encoder_dense": list(cfg.encoder_dense) or [0],
        "meta/channel_units": [cfg.channel_units],
        "meta/decoder_units": list(cfg.decoder_units),
    }


def _cfg_from_meta(t: dict) -> ModelConfig:
    try:
        ints = {k: [int(v) for v in np.ravel(a)] for k, a in t.items() if k.startswith("meta/")}
        strides = np.asarray(t["meta/conv_strides"]).astype(int).reshape(-1, 2)
        dense = tuple(u for u in ints["meta/encoder_dense"] if u > 0)
        return ModelConfig(
            n_bins=ints["meta/n_bins"][0],
            conv_filters=tuple(ints["meta/conv_filters"]),
            conv_kernel=tuple(ints["meta/conv_kernel"]),
            conv_strides=tuple(map(tuple, strides)),
            gru_layers=ints["meta/gru"][0],
            gru_units=ints["meta/gru"][1],
            encoder_dense=dense,
            channel_units=ints["meta/channel_units"][0],
            decoder_units=tuple(ints["meta/decoder_units"]),
        )
    except KeyError as e:
        raise CheckpointError(f"checkpoint lacks hyperparameter {e.args[0]}") from None


def checkpoint_save(params: ModelParams, path, cfg: ModelConfig | None = None) -> None:
    tensors = dict(_meta(cfg)) if cfg is not None else {}
    tensors.update(params)
    save_tensors(tensors, path)


def checkpoint_load(path) -> tuple[ModelParams, ModelConfig | None]:
    """Returns (params, model config); config is None when no hyperparameters were stored."""
    t = load_tensors(path)
    cfg = _cfg_from_meta(t) if any(k.startswith("meta/") for k in t) else None
    params = ModelParams({k: v.astype(np.float64) for k, v in t.items() if not k.startswith("meta/")})
    if cfg is not None:
        _check_compatible(params, cfg)
    return params, cfg


def _check_compatible(params: ModelParams, cfg: ModelConfig) -> None:
    from .codec import init_params
    expected = init_params(cfg, np.random.default_rng(0))
    if set(expected) != set(params):
        raise VersionMismatchError("checkpoint tensors do not match the stored architecture")
    for k, v in expected.items():
        if v.shape != params[k].shape:
            raise VersionMismatchError(f"tensor {k} has shape {params[k].shape}, expected {v.shape}")
