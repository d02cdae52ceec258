import math

import pytest

from semspeech import cli
from semspeech.checkpoint import checkpoint_load

FAST = """
conv_filters = [2, 2]
gru_layers = 1
gru_units = 4
encoder_dense = [8]
epochs = 1
batch_size = 5
learning_rate = 0.01
snr_grid = [0, 8]
"""


@pytest.fixture
def workdir(tmp_path):
    assert cli.main(["toy", "--out", str(tmp_path)]) == 0
    cfg = (tmp_path / "toy.toml").read_text()
    cfg = "\n".join(l for l in cfg.splitlines() if l.split(" =")[0] not in
                    {"conv_filters", "gru_layers", "gru_units", "encoder_dense", "epochs",
                     "batch_size", "learning_rate", "snr_grid", "clip_norm"})
    (tmp_path / "fast.toml").write_text(cfg + FAST)
    return tmp_path


def test_missing_config_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as ei:
        cli.main(["train", "--config", str(tmp_path / "absent.toml")])
    assert ei.value.code == 2
    with pytest.raises(SystemExit) as ei:
        cli.main(["sweep"])
    assert ei.value.code == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as ei:
        cli.main(["fly"])
    assert ei.value.code == 2


def test_metrics_command(tmp_path, capsys):
    (tmp_path / "ref.txt").write_text("hello world\nthe cat\n")
    (tmp_path / "hyp.txt").write_text("hello word\nthe cat\n")
    assert cli.main(["metrics", "--ref", str(tmp_path / "ref.txt"), "--hyp", str(tmp_path / "hyp.txt")]) == 0
    out = capsys.readouterr().out.strip()
    assert out == f"cer={1 / 18:g} wer={1 / 4:g}"


def test_train_sweep_eval_infer(workdir, capsys):
    cfg = str(workdir / "fast.toml")
    ckpt = workdir / "m.ckpt"
    assert cli.main(["train", "--config", cfg, "--ckpt", str(ckpt)]) == 0
    params, model = checkpoint_load(ckpt)
    assert model.gru_units == 4
    assert (workdir / "results" / "losses.csv").exists()

    out1, out2 = workdir / "s1", workdir / "s2"
    assert cli.main(["sweep", "--config", cfg, "--ckpt", str(ckpt), "--out", str(out1), "--dump"]) == 0
    assert cli.main(["sweep", "--config", cfg, "--ckpt", str(ckpt), "--out", str(out2)]) == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
    assert (out1 / "transcripts.csv").exists() and (out1 / "plot_data.json").exists()

    capsys.readouterr()
    assert cli.main(["eval", "--config", cfg, "--ckpt", str(ckpt), "--channel", "rayleigh", "--snr", "4"]) == 0
    assert capsys.readouterr().out.startswith("channel=rayleigh snr_db=4 cer=")

    wav = workdir / "wavs" / "toy-000.wav"
    assert cli.main(["infer", "--config", cfg, "--ckpt", str(ckpt), "--wav", str(wav)]) == 0
    assert cli.main(["infer", "--config", cfg, "--ckpt", str(ckpt), "--wav", str(wav), "--channel", "awgn"]) == 0


def test_bad_checkpoint_exit_code(workdir, capsys):
    bad = workdir / "bad.ckpt"
    bad.write_bytes(b"nonsense")
    assert cli.main(["sweep", "--config", str(workdir / "fast.toml"), "--ckpt", str(bad)]) == 1
    assert "bad magic" in capsys.readouterr().err


def test_baseline_text(tmp_path, capsys):
    assert cli.main(["baseline", "--system", "text", "--channel", "awgn", "--snr", "30",
                     "--out", str(tmp_path)]) == 0
    line = capsys.readouterr().out.strip()
    assert "cer=0.000000" in line and "symbols=86" in line
    assert (tmp_path / "baseline_text.csv").read_text().startswith("channel,snr_db,cer,wer,n_symbols,text\n")


def test_baseline_feature(workdir, capsys):
    assert cli.main(["baseline", "--system", "feature", "--config", str(workdir / "fast.toml"),
                     "--channel", "rician", "--snr", "40", "--text", "hello"]) == 0
    out = capsys.readouterr().out
    assert "symbols=" in out
