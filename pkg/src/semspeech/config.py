"""Experiment configuration: a flat TOML file of documented keys.

Every key is optional; see README for the full list. The environment
variable DEEPSC_ST_SEED overrides ``seed``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .channel import KINDS, ChannelConfig
from .codec import ModelConfig
from .errors import InvalidArgumentError
from .frontend import FrontendConfig
from .nn import TrainConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SEED_ENV = "DEEPSC_ST_SEED"

# Desk-scale recipe that overfits the 5-utterance synthetic corpus with plain SGD.
TOY_CONFIG = """\
manifest = "metadata.csv"
out_dir = "results"
conv_filters = [8, 8]
gru_layers = 1
gru_units = 32
encoder_dense = [32]
batch_size = 1
learning_rate = 0.03
clip_norm = 3.0
epochs = 500
train_snr_db = "noiseless"
plateau_patience = 0
eval_channels = ["rician"]
snr_grid = [-4, 8]
"""
DEFAULT_SNR_GRID = tuple(range(-12, 19, 2))


@dataclass
class ExperimentConfig:
    frontend: FrontendConfig = field(default_factory=FrontendConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    train_channel: ChannelConfig = field(default_factory=lambda: ChannelConfig("rician", 8.0, 4.0))
    eval_channels: tuple = KINDS
    snr_grid: tuple = DEFAULT_SNR_GRID
    rician_k: float = 4.0
    block_fading: bool = True
    seed: int = 0
    manifest: Path | None = None
    checkpoint: Path | None = None
    out_dir: Path = Path("results")
    compute_distances: bool = False
    eval_repeats: int = 1
    plateau_tol: float = 1e-4
    plateau_patience: int = 10
    relu_bias_init: float = 0.1

    def __post_init__(self):
        if not self.snr_grid:
            raise InvalidArgumentError("snr_grid must not be empty")
        for k in self.eval_channels:
            if k not in KINDS:
                raise InvalidArgumentError(f"unknown channel kind {k!r}")

    def channel(self, kind: str, snr_db: float) -> ChannelConfig:
        return ChannelConfig(kind, snr_db, self.rician_k, self.block_fading)

    @classmethod
    def from_file(cls, path, seed: int | None = None) -> "ExperimentConfig":
        path = Path(path)
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
        return cls.from_dict(raw, base_dir=path.parent, seed=seed)

    @classmethod
    def from_dict(cls, raw: dict, base_dir=Path("."), seed: int | None = None) -> "ExperimentConfig":
        raw = dict(raw)
        nested = [k for k, v in raw.items() if isinstance(v, dict)]
        if nested:
            raise InvalidArgumentError(f"config must be flat; found tables {nested}")
        used = set()

        def pick(names, target):
            out = {}
            for f in fields(target):
                if f.name in names and f.name in raw:
                    out[f.name] = raw[f.name]
                    used.add(f.name)
            return out

        frontend = FrontendConfig(**pick({"sample_rate", "frame_len_ms", "hop_ms", "fft_size"}, FrontendConfig))
        model_kw = pick({f.name for f in fields(ModelConfig)}, ModelConfig)
        model_kw.setdefault("n_bins", frontend.n_bins)
        model = ModelConfig(**model_kw)
        train = TrainConfig(**pick({"batch_size", "learning_rate", "epochs", "clip_norm"}, TrainConfig))
        rician_k = float(raw.get("rician_k", 4.0))
        block = bool(raw.get("block_fading", True))
        train_snr = raw.get("train_snr_db", 8.0)
        train_snr = math.inf if isinstance(train_snr, str) and train_snr.lower() in ("inf", "noiseless") else float(train_snr)
        train_channel = ChannelConfig(raw.get("train_channel", "rician"), train_snr, rician_k, block)
        used |= {"rician_k", "block_fading", "train_snr_db", "train_channel"}

        kw = {}
        if "snr_grid" in raw:
            kw["snr_grid"] = tuple(float(s) for s in raw["snr_grid"])
        elif {"snr_min", "snr_max"} <= set(raw):
            step = float(raw.get("snr_step", 2.0))
            n = int(math.floor((raw["snr_max"] - raw["snr_min"]) / step + 1e-9)) + 1
            kw["snr_grid"] = tuple(float(raw["snr_min"]) + i * step for i in range(n))
        used |= {"snr_grid", "snr_min", "snr_max", "snr_step"}
        if "eval_channels" in raw:
            kw["eval_channels"] = tuple(raw["eval_channels"])
        for key in ("manifest", "checkpoint", "out_dir"):
            if key in raw:
                p = Path(raw[key])
                kw[key] = p if p.is_absolute() else Path(base_dir) / p
        for key in ("compute_distances", "eval_repeats", "plateau_tol", "plateau_patience",
                    "relu_bias_init", "seed"):
            if key in raw:
                kw[key] = raw[key]
        used |= {"eval_channels", "manifest", "checkpoint", "out_dir", "compute_distances",
                 "eval_repeats", "plateau_tol", "plateau_patience", "relu_bias_init", "seed"}
        unknown = set(raw) - used
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")

        env = os.environ.get(SEED_ENV)
        if seed is None and env is not None:
            seed = int(env)
        if seed is not None:
            kw["seed"] = int(seed)
        kw.setdefault("seed", 0)
        train = replace(train, seed=int(kw["seed"]))
        return cls(frontend=frontend, model=model, train=train, train_channel=train_channel,
                   rician_k=rician_k, block_fading=block, **kw)
