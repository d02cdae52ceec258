import numpy as np
import pytest

from semspeech import codec
from semspeech.checkpoint import checkpoint_load, checkpoint_save, load_tensors, save_tensors
from semspeech.errors import (CheckpointError, MagicMismatchError, TruncatedCheckpointError,
                              VersionMismatchError)


def test_roundtrip_float32_exact(tiny_model, rng, tmp_path):
    p = codec.init_params(tiny_model, rng)
    path = tmp_path / "m.ckpt"
    checkpoint_save(p, path, tiny_model)
    q, cfg = checkpoint_load(path)
    assert cfg == tiny_model
    assert set(q) == set(p)
    for k in p:
        np.testing.assert_array_equal(q[k], p[k].astype(np.float32))


def test_byte_layout(tmp_path):
    path = tmp_path / "t.ckpt"
    save_tensors({"ab": np.array([[1.0, 2.0]])}, path)
    raw = path.read_bytes()
    assert raw[:8] == b"DSCST001"
    assert raw[8:12] == (1).to_bytes(4, "little")
    assert raw[12:16] == (2).to_bytes(4, "little") and raw[16:18] == b"ab"
    assert raw[18:22] == (2).to_bytes(4, "little")
    assert np.frombuffer(raw[30:], "<f4").tolist() == [1.0, 2.0]


def test_without_meta_returns_no_config(tiny_model, rng, tmp_path):
    p = codec.init_params(tiny_model, rng)
    checkpoint_save(p, tmp_path / "m.ckpt")
    _, cfg = checkpoint_load(tmp_path / "m.ckpt")
    assert cfg is None


def test_bad_magic(tmp_path):
    (tmp_path / "x").write_bytes(b"NOTCKPT0" + b"\0" * 4)
    with pytest.raises(MagicMismatchError):
        load_tensors(tmp_path / "x")


def test_bad_version(tmp_path):
    (tmp_path / "x").write_bytes(b"DSCST999" + b"\0" * 4)
    with pytest.raises(VersionMismatchError):
        load_tensors(tmp_path / "x")


def test_truncated_and_trailing(tmp_path):
    path = tmp_path / "t.ckpt"
    save_tensors({"a": np.zeros(10)}, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-3])
    with pytest.raises(TruncatedCheckpointError):
        load_tensors(path)
    path.write_bytes(raw + b"x")
    with pytest.raises(CheckpointError):
        load_tensors(path)


def test_architecture_mismatch(tiny_model, rng, tmp_path):
    p = dict(codec.init_params(tiny_model, rng))
    p["chdec/dense2.W"] = np.zeros((40, 30))
    from semspeech.nn import ModelParams
    checkpoint_save(ModelParams(p), tmp_path / "m.ckpt", tiny_model)
    with pytest.raises(VersionMismatchError):
        checkpoint_load(tmp_path / "m.ckpt")
