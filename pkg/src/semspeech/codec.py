"""Joint semantic-channel codec.

Transmitter: spectrogram -> CNN modules -> bidirectional GRU modules ->
dense stack -> softmax token posteriors (semantic encoder), then two dense
layers of width 40 whose flattened output is paired into complex symbols and
scaled to unit average power (channel encoder).

Receiver: equalized symbols -> reals -> (L, 40) -> dense 40/40/29 -> softmax.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import nn
from .channel import complex_to_real, real_to_complex
from .ctc import N_TOKENS
from .errors import DegeneratePowerError, InvalidArgumentError
from .frontend import FrontendConfig, Spectrogram

SYMBOL_WIDTH = 40  # reals per time step leaving the channel encoder


@dataclass(frozen=True)
class ModelConfig:
    n_bins: int = 257
    conv_filters: tuple = (32, 32)
    conv_kernel: tuple = (3, 3)
    conv_strides: tuple = ((2, 2), (2, 2))
    gru_layers: int = 6
    gru_units: int = 64
    encoder_dense: tuple = (64,)
    channel_units: int = SYMBOL_WIDTH
    decoder_units: tuple = (40, 40)

    def __post_init__(self):
        object.__setattr__(self, "conv_filters", tuple(int(f) for f in self.conv_filters))
        object.__setattr__(self, "conv_kernel", tuple(int(k) for k in self.conv_kernel))
        object.__setattr__(self, "conv_strides", tuple(tuple(int(v) for v in s) for s in self.conv_strides))
        object.__setattr__(self, "encoder_dense", tuple(int(u) for u in self.encoder_dense))
        object.__setattr__(self, "decoder_units", tuple(int(u) for u in self.decoder_units))
        if len(self.conv_strides) != len(self.conv_filters):
            raise InvalidArgumentError("one stride pair per CNN module is required")
        if self.channel_units % 2:
            raise InvalidArgumentError("channel_units must be even to pair reals into symbols")

    @classmethod
    def full_scale(cls) -> "ModelConfig":
        return cls(gru_units=800)

    def conv_out_bins(self) -> int:
        w = self.n_bins
        for _, sw in self.conv_strides:
            w = -(-w // sw)
        return w

    def output_length(self, n_frames: int) -> int:
        h = n_frames
        for sh, _ in self.conv_strides:
            h = -(-h // sh)
        return h

    def to_dict(self) -> dict:
        return asdict(self)


def _glorot(rng, fan_in, fan_out, shape):
    lim = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=shape)


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> nn.ModelParams:
    p = {}
    c_in = 1
    kh, kw = cfg.conv_kernel
    for i, c_out in enumerate(cfg.conv_filters):
        p[f"semantic/conv{i}.k"] = _glorot(rng, c_in * kh * kw, c_out * kh * kw, (c_out, c_in, kh, kw))
        p[f"semantic/conv{i}.b"] = np.zeros(c_out)
        c_in = c_out
    d_in = c_in * cfg.conv_out_bins()
    H = cfg.gru_units
    for q in range(cfg.gru_layers):
        for d in ("fw", "bw"):
            p[f"semantic/gru{q}.{d}.W"] = _glorot(rng, d_in, 3 * H, (d_in, 3 * H))
            # orthogonal recurrent blocks keep early gradients well scaled
            p[f"semantic/gru{q}.{d}.U"] = np.concatenate(
                [np.linalg.qr(rng.standard_normal((H, H)))[0] for _ in range(3)], axis=1)
            p[f"semantic/gru{q}.{d}.b"] = np.zeros(3 * H)
        d_in = 2 * H
    for i, u in enumerate(cfg.encoder_dense + (N_TOKENS,)):
        p[f"semantic/dense{i}.W"] = _glorot(rng, d_in, u, (d_in, u))
        p[f"semantic/dense{i}.b"] = np.zeros(u)
        d_in = u
    d_in = N_TOKENS
    for i in range(2):
        p[f"chenc/dense{i}.W"] = _glorot(rng, d_in, cfg.channel_units, (d_in, cfg.channel_units))
        p[f"chenc/dense{i}.b"] = np.zeros(cfg.channel_units)
        d_in = cfg.channel_units
    for i, u in enumerate(cfg.decoder_units + (N_TOKENS,)):
        p[f"chdec/dense{i}.W"] = _glorot(rng, d_in, u, (d_in, u))
        p[f"chdec/dense{i}.b"] = np.zeros(u)
        d_in = u
    return nn.ModelParams(p)


# differentiable pieces -------------------------------------------------------------

def semantic_logits(values, leaves, cfg: ModelConfig) -> nn.Tensor:
    """(N, F) spectrogram values -> (L, 29) pre-softmax encoder activations."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise InvalidArgumentError("spectrogram must be a non-empty N x F matrix")
    if values.shape[1] != cfg.n_bins:
        raise InvalidArgumentError(f"spectrogram has {values.shape[1]} bins, model expects {cfg.n_bins}")
    h = nn.Tensor(values[None, None])
    for i, stride in enumerate(cfg.conv_strides):
        h = nn.conv2d_forward(h, leaves[f"semantic/conv{i}.k"], stride, "relu",
                              bias=leaves[f"semantic/conv{i}.b"])
    _, c, t, w = h.shape
    h = nn.reshape(nn.transpose(h, (0, 2, 1, 3)), (1, t, c * w))
    for q in range(cfg.gru_layers):
        h = nn.bigru_forward(h, leaves, f"semantic/gru{q}.")
    n_dense = len(cfg.encoder_dense) + 1
    for i in range(n_dense):
        act = "relu" if i < n_dense - 1 else "none"
        h = nn.dense_forward(h, leaves[f"semantic/dense{i}.W"], leaves[f"semantic/dense{i}.b"], act)
    return nn.reshape(h, (t, N_TOKENS))


def channel_encode_tensor(features: nn.Tensor, leaves) -> nn.Tensor:
    """(L, 29) features -> flat unit-power real vector of length L * 40."""
    h = nn.dense_forward(features, leaves["chenc/dense0.W"], leaves["chenc/dense0.b"], "relu")
    h = nn.dense_forward(h, leaves["chenc/dense1.W"], leaves["chenc/dense1.b"], "none")
    flat = nn.reshape(h, (-1,))
    energy = float(np.sum(flat.data ** 2))
    if energy == 0.0:
        raise DegeneratePowerError("channel encoder produced an all-zero vector")
    n_symbols = flat.shape[0] // 2
    power = nn.sum_all(nn.square(flat)) * (1.0 / n_symbols)
    return flat * nn.rsqrt(power)


def channel_decode_logits(received: nn.Tensor, leaves, cfg: ModelConfig) -> nn.Tensor:
    n = received.shape[0]
    if n % cfg.channel_units:
        raise InvalidArgumentError(f"{n // 2} symbols do not reshape into rows of {cfg.channel_units // 2}")
    h = nn.reshape(received, (n // cfg.channel_units, cfg.channel_units))
    n_dense = len(cfg.decoder_units) + 1
    for i in range(n_dense):
        act = "relu" if i < n_dense - 1 else "none"
        h = nn.dense_forward(h, leaves[f"chdec/dense{i}.W"], leaves[f"chdec/dense{i}.b"], act)
    return h


def pipeline_logits(values, leaves, cfg: ModelConfig, channel=None) -> nn.Tensor:
    """Transmitter -> channel -> receiver logits, differentiable end to end.

    `channel` maps the transmitted complex symbols to the equalized received
    symbols. With zero-forcing and perfect CSI the equalized output is x plus
    a perturbation independent of x, so it enters the graph as a constant.
    """
    feats = nn.softmax(semantic_logits(values, leaves, cfg))
    tx = channel_encode_tensor(feats, leaves)
    if channel is not None:
        x = real_to_complex(tx.data)
        tx = tx + complex_to_real(channel(x) - x)
    return channel_decode_logits(tx, leaves, cfg)


# array-level API -----------------------------------------------------------------

def _leaves(params):
    return {k: nn.Tensor(v) for k, v in params.items()}


def _values(s):
    return s.values if isinstance(s, Spectrogram) else np.asarray(s, dtype=np.float64)


def semantic_encode(s, params, cfg: ModelConfig) -> np.ndarray:
    """Token posteriors (L, 29) for one spectrogram."""
    return nn.softmax_np(semantic_logits(_values(s), _leaves(params), cfg).data)


def encoder_features(s, params, cfg: ModelConfig) -> np.ndarray:
    return semantic_logits(_values(s), _leaves(params), cfg).data


def channel_encode(features, params) -> np.ndarray:
    """(L, 29) features -> L * 20 unit-power complex symbols."""
    return real_to_complex(channel_encode_tensor(nn.Tensor(features), _leaves(params)).data)


def channel_decode(y_eq, params, cfg: ModelConfig) -> np.ndarray:
    y_eq = np.asarray(y_eq, dtype=np.complex128).ravel()
    if y_eq.size == 0 or y_eq.size % (cfg.channel_units // 2):
        raise InvalidArgumentError(f"symbol count {y_eq.size} not divisible by {cfg.channel_units // 2}")
    logits = channel_decode_logits(nn.Tensor(complex_to_real(y_eq)), _leaves(params), cfg)
    return nn.softmax_np(logits.data)


def count_symbols(samples_len: int, frontend: FrontendConfig | None = None,
                  cfg: ModelConfig | None = None) -> int:
    frontend = frontend or FrontendConfig()
    cfg = cfg or ModelConfig()
    return cfg.output_length(frontend.n_frames(samples_len)) * (cfg.channel_units // 2)


@dataclass
class Codec:
    """Parameters plus architecture, convenient for inference call sites."""

    params: nn.ModelParams
    cfg: ModelConfig = field(default_factory=ModelConfig)

    def transmit_side(self, s):
        feats = semantic_encode(s, self.params, self.cfg)
        return feats, channel_encode(feats, self.params)

    def receive_side(self, y_eq):
        return channel_decode(y_eq, self.params, self.cfg)
