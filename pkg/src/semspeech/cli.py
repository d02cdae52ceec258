"""Command-line entry point: toy, train, eval, sweep, metrics, baseline, infer."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import codec, ctc
from .baselines.transceiver import run_feature_transceiver, run_text_transceiver, sanitize_features
from .channel import KINDS
from .checkpoint import checkpoint_load, checkpoint_save
from .config import ExperimentConfig
from .data import load_dataset
from .errors import SemspeechError, VersionMismatchError
from .evaluate import encode_corpus, evaluate_point, evaluate_sweep, snr_key, write_results
from .frontend import read_wav, spectrogram_from_config
from .metrics import corpus_error_rates

log = logging.getLogger("semspeech")

DEFAULT_SENTENCE = "he concluded that school had nothing to offer him"


class UsageError(Exception):
    pass


def _load_config(args, required=True) -> ExperimentConfig:
    if args.config is None:
        if required:
            raise UsageError("--config is required for this command")
        return ExperimentConfig.from_dict({}, seed=args.seed)
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file {path} not found")
    return ExperimentConfig.from_file(path, seed=args.seed)


def _load_checkpoint(path, cfg: ExperimentConfig):
    if path is None:
        raise UsageError("a checkpoint is required (--ckpt or 'checkpoint' in the config)")
    params, model = checkpoint_load(path)
    if model is None:
        model = cfg.model
    if model.n_bins != cfg.frontend.n_bins:
        raise VersionMismatchError(
            f"checkpoint expects {model.n_bins} frequency bins, frontend produces {cfg.frontend.n_bins}")
    return params, model


def cmd_toy(args) -> int:
    from .config import TOY_CONFIG
    from .data import write_toy_corpus
    out = Path(args.out or "toy")
    manifest = write_toy_corpus(out, seed=args.seed or 0)
    (out / "toy.toml").write_text(TOY_CONFIG, encoding="utf-8")
    print(f"wrote {manifest} and {out / 'toy.toml'}")
    return 0


def cmd_train(args) -> int:
    from .train import train
    cfg = _load_config(args)
    out = Path(args.out) if args.out else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    result = train(cfg, on_epoch=lambda e, loss, _: print(f"epoch {e} loss {loss:.5f}", flush=True))
    ckpt = Path(args.ckpt) if args.ckpt else out / "model.ckpt"
    checkpoint_save(result.params, ckpt, result.model)
    (out / "losses.csv").write_text(
        "epoch,loss\n" + "".join(f"{i},{v:.6f}\n" for i, v in enumerate(result.losses)), encoding="utf-8")
    print(f"saved checkpoint to {ckpt}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    params, model = _load_checkpoint(args.ckpt or cfg.checkpoint, cfg)
    ds = load_dataset(cfg.manifest, cfg.frontend)
    tx = encode_corpus(ds, params, model)
    row = evaluate_point(tx, params, model, cfg.channel(args.channel, args.snr), cfg.seed,
                         cfg.eval_repeats, cfg.compute_distances)
    line = f"channel={row.channel} snr_db={row.snr_db:g} cer={row.cer:.6f} wer={row.wer:.6f} n_utts={row.n_utts}"
    if row.fdsd is not None:
        line += f" fdsd={row.fdsd:.6f} kdsd={row.kdsd:.6f}"
    print(line)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    params, model = _load_checkpoint(args.ckpt or cfg.checkpoint, cfg)
    ds = load_dataset(cfg.manifest, cfg.frontend)
    rows = evaluate_sweep(params, model, ds, cfg)
    path = write_results(rows, args.out or cfg.out_dir, dump=args.dump)
    print(f"wrote {path}")
    return 0


def _read_lines(path):
    return Path(path).read_text(encoding="utf-8").splitlines()


def cmd_metrics(args) -> int:
    refs, hyps = _read_lines(args.ref), _read_lines(args.hyp)
    if len(refs) != len(hyps):
        raise UsageError(f"{args.ref} has {len(refs)} lines but {args.hyp} has {len(hyps)}")
    pairs = [(r, h) for r, h in zip(refs, hyps) if r.strip()]
    c, w = corpus_error_rates([r for r, _ in pairs], [h for _, h in pairs])
    print(f"cer={c:g} wer={w:g}")
    return 0


def _baseline_features(args, cfg):
    if args.wav:
        samples = read_wav(args.wav)
    else:
        from .data import synth_utterance
        samples = synth_utterance(args.text, rate=cfg.frontend.sample_rate)
    spec = spectrogram_from_config(samples, cfg.frontend)
    if args.ckpt or cfg.checkpoint:
        params, model = _load_checkpoint(args.ckpt or cfg.checkpoint, cfg)
    else:
        from .train import init_model
        params, model = init_model(cfg), cfg.model
    return codec.semantic_encode(spec, params, model)


def cmd_baseline(args) -> int:
    cfg = _load_config(args, required=False)
    snrs = [args.snr] if args.snr is not None else list(cfg.snr_grid)
    channels = [args.channel] if args.channel else list(cfg.eval_channels)
    feats = _baseline_features(args, cfg) if args.system == "feature" else None
    rows = []
    for kind in channels:
        for snr in snrs:
            rng = np.random.default_rng([cfg.seed, KINDS.index(kind), snr_key(snr) & 0xFFFFFFFF])
            ch = cfg.channel(kind, snr)
            if args.system == "text":
                res = run_text_transceiver(args.text, ch, rng)
                hyp, n_sym, ref = res.text, res.n_symbols, args.text
            else:
                res = run_feature_transceiver(feats, ch, rng)
                hyp = ctc.ids_to_text(ctc.greedy_decode(sanitize_features(res.features)))
                ref = ctc.ids_to_text(ctc.greedy_decode(feats))
                n_sym = res.n_symbols
            c, w = corpus_error_rates([ref], [hyp]) if ref.strip() else (float("nan"), float("nan"))
            rows.append((kind, snr, c, w, n_sym, hyp))
            print(f"channel={kind} snr_db={snr:g} symbols={n_sym} cer={c:.6f} wer={w:.6f} text={hyp!r}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with (out / f"baseline_{args.system}.csv").open("w", newline="\n", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(("channel", "snr_db", "cer", "wer", "n_symbols", "text"))
            for kind, snr, c, w, n, hyp in rows:
                wr.writerow((kind, f"{snr:g}", f"{c:.6f}", f"{w:.6f}", n, hyp))
    return 0


def cmd_infer(args) -> int:
    cfg = _load_config(args, required=False)
    params, model = _load_checkpoint(args.ckpt or cfg.checkpoint, cfg)
    spec = spectrogram_from_config(read_wav(args.wav), cfg.frontend)
    feats = codec.semantic_encode(spec, params, model)
    x = codec.channel_encode(feats, params)
    if args.channel:
        from .train import channel_fn
        rng = np.random.default_rng(cfg.seed)
        x = channel_fn(cfg.channel(args.channel, args.snr), rng)(x)
    p_hat = codec.channel_decode(x, params, model)
    print(ctc.ids_to_text(ctc.greedy_decode(p_hat)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file (flat TOML)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="semspeech", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    y = sub.add_parser("toy", parents=[common], help="write the synthetic toy corpus and its config")
    y.set_defaults(func=cmd_toy)

    t = sub.add_parser("train", parents=[common], help="train the codec (writes a checkpoint)")
    t.add_argument("--ckpt", help="checkpoint output path (default <out>/model.ckpt)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint at one channel/SNR")
    e.add_argument("--ckpt")
    e.add_argument("--channel", choices=KINDS, default="awgn")
    e.add_argument("--snr", type=float, default=8.0)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", parents=[common], help="CER/WER over channels x SNR grid")
    s.add_argument("--ckpt")
    s.add_argument("--dump", action="store_true", help="also write per-utterance transcripts")
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("metrics", parents=[common], help="score a reference/hypothesis file pair")
    m.add_argument("--ref", required=True)
    m.add_argument("--hyp", required=True)
    m.set_defaults(func=cmd_metrics)

    b = sub.add_parser("baseline", parents=[common], help="run the conventional text/feature transceivers")
    b.add_argument("--system", choices=("text", "feature"), default="text")
    b.add_argument("--channel", choices=KINDS)
    b.add_argument("--snr", type=float)
    b.add_argument("--text", default=DEFAULT_SENTENCE)
    b.add_argument("--wav", help="speech input for the feature system")
    b.add_argument("--ckpt")
    b.set_defaults(func=cmd_baseline)

    i = sub.add_parser("infer", parents=[common], help="recognize one WAV file")
    i.add_argument("--wav", required=True)
    i.add_argument("--ckpt")
    i.add_argument("--channel", choices=KINDS)
    i.add_argument("--snr", type=float, default=8.0)
    i.set_defaults(func=cmd_infer)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))  # exits with status 2
    except (SemspeechError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
