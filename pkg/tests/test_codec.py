import numpy as np
import pytest

from semspeech import codec, nn
from semspeech.errors import DegeneratePowerError, InvalidArgumentError
from semspeech.frontend import FrontendConfig


def test_output_length_and_symbol_count():
    cfg = codec.ModelConfig()
    assert cfg.output_length(99) == 25
    assert cfg.conv_out_bins() == 65
    assert codec.count_symbols(16000) == 500


def test_parameter_names_and_groups(tiny_model, rng):
    p = codec.init_params(tiny_model, rng)
    assert {"semantic/conv0.k", "semantic/gru0.fw.U", "chenc/dense1.W", "chdec/dense2.W"} <= set(p)
    assert p["chenc/dense1.W"].shape == (40, 40)
    assert p["chdec/dense2.W"].shape == (40, 29)
    u = p["semantic/gru0.fw.U"]
    h = tiny_model.gru_units
    # each recurrent block is orthogonal
    for i in range(3):
        blk = u[:, i * h:(i + 1) * h]
        np.testing.assert_allclose(blk.T @ blk, np.eye(h), atol=1e-10)


def test_semantic_encode_shapes(tiny_model, rng):
    p = codec.init_params(tiny_model, rng)
    probs = codec.semantic_encode(rng.standard_normal((10, 9)), p, tiny_model)
    assert probs.shape == (3, 29)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0)


def test_channel_encode_unit_power(tiny_model, rng):
    p = codec.init_params(tiny_model, rng)
    for L in (1, 3, 17):
        feats = nn.softmax_np(rng.standard_normal((L, 29)))
        x = codec.channel_encode(feats, p)
        assert x.shape == (L * 20,)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_channel_encode_degenerate(tiny_model, rng):
    p = dict(codec.init_params(tiny_model, rng))
    p["chenc/dense1.W"] = np.zeros_like(p["chenc/dense1.W"])
    p["chenc/dense1.b"] = np.zeros_like(p["chenc/dense1.b"])
    with pytest.raises(DegeneratePowerError):
        codec.channel_encode(np.full((2, 29), 1 / 29), nn.ModelParams(p))


def test_channel_decode_checks_length(tiny_model, rng):
    p = codec.init_params(tiny_model, rng)
    with pytest.raises(InvalidArgumentError):
        codec.channel_decode(np.ones(30, complex), p, tiny_model)
    out = codec.channel_decode(np.ones(40, complex), p, tiny_model)
    assert out.shape == (2, 29)


def test_pipeline_matches_array_api(tiny_model, rng):
    p = codec.init_params(tiny_model, rng)
    values = rng.standard_normal((10, 9))
    logits = codec.pipeline_logits(values, p.leaves(), tiny_model).data
    x = codec.channel_encode(codec.semantic_encode(values, p, tiny_model), p)
    np.testing.assert_allclose(nn.softmax_np(logits), codec.channel_decode(x, p, tiny_model), atol=1e-12)


def test_pipeline_channel_perturbation_is_applied(tiny_model, rng):
    p = codec.init_params(tiny_model, rng)
    values = rng.standard_normal((10, 9))
    noise = 0.3 * np.exp(1j * rng.uniform(0, 6.3, 60))
    noisy = codec.pipeline_logits(values, p.leaves(), tiny_model, lambda x: x + noise[: x.size]).data
    x = codec.channel_encode(codec.semantic_encode(values, p, tiny_model), p)
    want = codec.channel_decode(x + noise[: x.size], p, tiny_model)
    np.testing.assert_allclose(nn.softmax_np(noisy), want, atol=1e-12)


def test_model_config_validation():
    with pytest.raises(InvalidArgumentError):
        codec.ModelConfig(conv_filters=(4,), conv_strides=((2, 2), (2, 2)))
    with pytest.raises(InvalidArgumentError):
        codec.ModelConfig(channel_units=39)
    assert codec.ModelConfig.full_scale().gru_units == 800


def test_count_symbols_custom_frontend():
    fe = FrontendConfig(sample_rate=8000)
    assert codec.count_symbols(8000, fe) == 20 * codec.ModelConfig().output_length(fe.n_frames(8000))
