"""End-to-end training of the semantic codec through a simulated channel.

Each step: spectrogram -> encoder -> channel encoder -> channel -> ZF
equalizer -> channel decoder -> CTC loss -> backward -> SGD on the
batch-mean gradient. Every utterance in every batch gets a fresh fading
coefficient and noise draw. Optional global-norm clipping caps the batch
gradient before the update.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import codec, ctc, nn
from .channel import ChannelConfig, equalize, transmit
from .config import ExperimentConfig
from .data import Dataset, load_dataset
from .errors import DatasetError, DivergenceError, InvalidArgumentError

log = logging.getLogger(__name__)


@dataclass
class TrainResult:
    params: nn.ModelParams
    model: codec.ModelConfig
    losses: list = field(default_factory=list)
    stopped_early: bool = False


def init_model(cfg: ExperimentConfig) -> nn.ModelParams:
    rng = np.random.default_rng([cfg.seed, 0])
    params = dict(codec.init_params(cfg.model, rng))
    # small positive bias on ReLU dense layers keeps units alive through the first large steps
    relu_layers = [f"semantic/dense{i}" for i in range(len(cfg.model.encoder_dense))]
    relu_layers += ["chenc/dense0"] + [f"chdec/dense{i}" for i in range(len(cfg.model.decoder_units))]
    for name in relu_layers:
        params[name + ".b"] = params[name + ".b"] + cfg.relu_bias_init
    return nn.ModelParams(params)


def channel_fn(ch: ChannelConfig, rng: np.random.Generator):
    def apply(x):
        y, state = transmit(x, ch, rng)
        return equalize(y, state.h)
    return apply


def utterance_loss(params_leaves, values, target, model, channel=None):
    logits = codec.pipeline_logits(values, params_leaves, model, channel)
    return ctc.ctc_loss_node(logits, target)


def plateaued(losses, tol, patience) -> bool:
    if patience <= 0 or len(losses) <= patience:
        return False
    recent = losses[-(patience + 1):]
    for prev, cur in zip(recent, recent[1:]):
        if prev <= 0 or (prev - cur) / abs(prev) >= tol:
            return False
    return True


def train(cfg: ExperimentConfig, dataset: Dataset | None = None, params: nn.ModelParams | None = None,
          on_epoch=None) -> TrainResult:
    """Run the training loop; returns the final parameters and the per-epoch mean loss."""
    if dataset is None:
        if cfg.manifest is None:
            raise InvalidArgumentError("config has no manifest and no dataset was given")
        dataset = load_dataset(cfg.manifest, cfg.frontend)
    utts = []
    for u in dataset:
        need = ctc.min_alignment_length(u.target)
        if cfg.model.output_length(u.spectrogram.n_frames) < need:
            log.warning("dropping %s: too short for its transcript", u.uid)
            continue
        utts.append(u)
    if not utts:
        raise DatasetError("no trainable utterances")

    params = params.copy() if params is not None else init_model(cfg)
    order_rng = np.random.default_rng([cfg.seed, 1])
    chan_rng = np.random.default_rng([cfg.seed, 2])
    channel = channel_fn(cfg.train_channel, chan_rng)
    bsz = cfg.train.batch_size
    result = TrainResult(params, cfg.model)
    for epoch in range(cfg.train.epochs):
        order = order_rng.permutation(len(utts))
        total = 0.0
        for start in range(0, len(order), bsz):
            batch = order[start:start + bsz]
            acc = None
            for i in batch:
                u = utts[i]
                leaves = params.leaves()
                try:
                    loss = utterance_loss(leaves, u.spectrogram.values, u.target, cfg.model, channel)
                except InvalidArgumentError as e:
                    # the target became unreachable (zero probability) under the current parameters
                    raise DivergenceError(f"epoch {epoch}, {u.uid}: {e}") from e
                value = float(loss.data)
                if not math.isfinite(value):
                    raise DivergenceError(f"non-finite loss at epoch {epoch} on {u.uid}")
                total += value
                g = nn.backward(loss, leaves)
                acc = g if acc is None else {k: acc[k] + g[k] for k in acc}
            grads = {k: v / len(batch) for k, v in acc.items()}
            if not all(np.all(np.isfinite(v)) for v in grads.values()):
                raise DivergenceError(f"non-finite gradient at epoch {epoch}")
            if cfg.train.clip_norm is not None:
                grads = nn.clip_by_global_norm(grads, cfg.train.clip_norm)
            params = nn.sgd_step(params, grads, cfg.train.learning_rate)
        mean_loss = total / len(utts)
        result.losses.append(mean_loss)
        log.info("epoch %d loss %.5f", epoch, mean_loss)
        if on_epoch is not None:
            on_epoch(epoch, mean_loss, params)
        if plateaued(result.losses, cfg.plateau_tol, cfg.plateau_patience):
            result.stopped_early = True
            break
    result.params = params
    return result
