import math

import pytest

from semspeech.config import SEED_ENV, ExperimentConfig
from semspeech.errors import InvalidArgumentError


def write(tmp_path, text):
    p = tmp_path / "exp.toml"
    p.write_text(text, encoding="utf-8")
    return p


def test_defaults():
    cfg = ExperimentConfig.from_dict({})
    assert cfg.snr_grid[0] == -12 and cfg.snr_grid[-1] == 18 and len(cfg.snr_grid) == 16
    assert cfg.train_channel.kind == "rician" and cfg.train_channel.snr_db == 8.0
    assert cfg.model.n_bins == 257


def test_file_values_and_relative_paths(tmp_path, monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    p = write(tmp_path, 'manifest = "data/metadata.csv"\ngru_units = 16\nlearning_rate = 0.5\n'
                        'train_snr_db = "inf"\nsnr_min = -4\nsnr_max = 8\nsnr_step = 4\nseed = 7\n')
    cfg = ExperimentConfig.from_file(p)
    assert cfg.manifest == tmp_path / "data/metadata.csv"
    assert cfg.model.gru_units == 16
    assert cfg.train.learning_rate == 0.5
    assert math.isinf(cfg.train_channel.snr_db)
    assert cfg.snr_grid == (-4.0, 0.0, 4.0, 8.0)
    assert cfg.seed == 7 and cfg.train.seed == 7


def test_seed_precedence(tmp_path, monkeypatch):
    p = write(tmp_path, "seed = 1\n")
    monkeypatch.setenv(SEED_ENV, "2")
    assert ExperimentConfig.from_file(p).seed == 2
    assert ExperimentConfig.from_file(p, seed=3).seed == 3
    monkeypatch.delenv(SEED_ENV)
    assert ExperimentConfig.from_file(p).seed == 1


def test_unknown_and_nested_keys_rejected(tmp_path):
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig.from_file(write(tmp_path, "gru_unit = 3\n"))
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig.from_file(write(tmp_path, "[model]\ngru_units = 3\n"))


def test_bad_channel_kind():
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig.from_dict({"eval_channels": ["awgn", "mars"]})


def test_channel_helper_uses_shared_settings():
    cfg = ExperimentConfig.from_dict({"rician_k": 2.0, "block_fading": False})
    ch = cfg.channel("rician", 4.0)
    assert (ch.kind, ch.snr_db, ch.rician_k, ch.block_fading) == ("rician", 4.0, 2.0, False)
