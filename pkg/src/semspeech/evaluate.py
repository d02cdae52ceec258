"""Frozen-model evaluation over channel kinds and an SNR grid."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import codec, ctc
from .channel import KINDS, ChannelConfig, equalize, transmit
from .config import ExperimentConfig
from .data import Dataset
from .metrics import corpus_error_rates, fdsd, kdsd
from .nn import ModelParams

CSV_COLUMNS = ("channel", "snr_db", "cer", "wer", "n_utts")
DISTANCE_COLUMNS = ("fdsd", "kdsd")


@dataclass
class SweepRow:
    channel: str
    snr_db: float
    cer: float
    wer: float
    n_utts: int
    fdsd: float | None = None
    kdsd: float | None = None
    transcripts: list = field(default_factory=list)  # (uid, repeat, ref, hyp)


@dataclass
class Transmitted:
    uid: str
    text: str
    features: np.ndarray  # encoder logits, (L, 29)
    symbols: np.ndarray


def encode_corpus(dataset: Dataset, params: ModelParams, model: codec.ModelConfig) -> list[Transmitted]:
    """Run the transmitter once per utterance; it is deterministic given parameters."""
    out = []
    for u in dataset:
        logits = codec.encoder_features(u.spectrogram, params, model)
        feats = np.exp(logits - logits.max(axis=1, keepdims=True))
        feats /= feats.sum(axis=1, keepdims=True)
        out.append(Transmitted(u.uid, u.text, logits, codec.channel_encode(feats, params)))
    return out


def snr_key(snr_db: float) -> int:
    if math.isinf(snr_db):
        return 0x7FFFFFFF if snr_db > 0 else 0x7FFFFFFE
    return int(round(snr_db * 1000))


def evaluate_point(tx: list[Transmitted], params: ModelParams, model: codec.ModelConfig,
                   ch: ChannelConfig, seed: int, repeats: int = 1, distances: bool = False) -> SweepRow:
    rng = np.random.default_rng([seed, KINDS.index(ch.kind), snr_key(ch.snr_db) & 0xFFFFFFFF])
    refs, hyps, trans = [], [], []
    rx_feats = []
    for rep in range(repeats):
        for t in tx:
            y, state = transmit(t.symbols, ch, rng)
            p_hat = codec.channel_decode(equalize(y, state.h), params, model)
            hyp = ctc.ids_to_text(ctc.greedy_decode(p_hat))
            refs.append(t.text)
            hyps.append(hyp)
            trans.append((t.uid, rep, t.text, hyp))
            if distances:
                rx_feats.append(np.log(np.maximum(p_hat, 1e-300)))
    c, w = corpus_error_rates(refs, hyps)
    row = SweepRow(ch.kind, float(ch.snr_db), c, w, len(tx), transcripts=trans)
    if distances:
        d = np.concatenate([t.features for t in tx] * repeats)
        d_hat = np.concatenate(rx_feats)
        # softmax logits are shift-invariant per row; centre both sides before comparing
        d = d - d.mean(axis=1, keepdims=True)
        d_hat = d_hat - d_hat.mean(axis=1, keepdims=True)
        row.fdsd = fdsd(d, d_hat)
        row.kdsd = kdsd(d, d_hat)
    return row


def evaluate_sweep(params: ModelParams, model: codec.ModelConfig, dataset: Dataset,
                   cfg: ExperimentConfig, seed: int | None = None) -> list[SweepRow]:
    seed = cfg.seed if seed is None else seed
    tx = encode_corpus(dataset, params, model)
    rows = []
    for kind in cfg.eval_channels:
        for snr in cfg.snr_grid:
            rows.append(evaluate_point(tx, params, model, cfg.channel(kind, float(snr)), seed,
                                       cfg.eval_repeats, cfg.compute_distances))
    return rows


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def results_csv(rows: list[SweepRow]) -> str:
    with_dist = any(r.fdsd is not None for r in rows)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS + (DISTANCE_COLUMNS if with_dist else ()))
    for r in rows:
        rec = [r.channel, f"{r.snr_db:g}", _fmt(r.cer), _fmt(r.wer), r.n_utts]
        if with_dist:
            rec += [_fmt(r.fdsd), _fmt(r.kdsd)]
        wr.writerow(rec)
    return buf.getvalue()


def transcripts_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(("channel", "snr_db", "uid", "repeat", "ref", "hyp"))
    for r in rows:
        for uid, rep, ref, hyp in r.transcripts:
            wr.writerow((r.channel, f"{r.snr_db:g}", uid, rep, ref, hyp))
    return buf.getvalue()


def plot_data(rows: list[SweepRow]) -> dict:
    series = {}
    for r in rows:
        s = series.setdefault(r.channel, {"snr_db": [], "cer": [], "wer": []})
        s["snr_db"].append(r.snr_db)
        s["cer"].append(round(r.cer, 6))
        s["wer"].append(round(r.wer, 6))
    return series


def write_results(rows: list[SweepRow], out_dir, dump: bool = False) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(rows), encoding="utf-8", newline="\n")
    (out / "plot_data.json").write_text(json.dumps(plot_data(rows), indent=2) + "\n", encoding="utf-8")
    if dump:
        (out / "transcripts.csv").write_text(transcripts_csv(rows), encoding="utf-8", newline="\n")
    return out / "results.csv"
