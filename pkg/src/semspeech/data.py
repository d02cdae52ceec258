"""Dataset ingestion (LJSpeech-style manifests) and a synthetic toy corpus."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ctc import ALPHABET, normalize_text, text_to_ids
from .errors import DatasetError
from .frontend import FrontendConfig, SpeechSamples, Spectrogram, read_wav, spectrogram_from_config, write_wav

log = logging.getLogger(__name__)

TOY_TEXTS = (
    "hello world",
    "good morning",
    "semantic speech",
    "the cat sat",
    "over the air",
)


@dataclass
class Utterance:
    uid: str
    text: str
    spectrogram: Spectrogram
    n_samples: int

    @property
    def target(self) -> list[int]:
        return text_to_ids(self.text)


@dataclass
class Dataset:
    utterances: list[Utterance]
    failures: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)


def read_manifest(path) -> list[tuple[int, list[str]]]:
    """(line number, fields) per non-blank line; pipe separated, UTF-8.

    Two-field rows reuse the transcript as its normalized form.
    """
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("|")
        if len(parts) == 2:
            parts.append(parts[1])
        rows.append((lineno, parts))
    return rows


def _wav_path(manifest: Path, uid: str) -> Path:
    p = Path(uid)
    if p.suffix == ".wav":
        return p if p.is_absolute() else manifest.parent / p
    return manifest.parent / "wavs" / f"{uid}.wav"


def load_dataset(manifest_path, frontend: FrontendConfig | None = None) -> Dataset:
    """Load every record of a manifest; per-record failures are collected.

    Raises DatasetError only when no record could be loaded.
    """
    frontend = frontend or FrontendConfig()
    manifest = Path(manifest_path)
    if not manifest.is_file():
        raise DatasetError(f"manifest {manifest} does not exist")
    utts, failures = [], []
    for lineno, parts in read_manifest(manifest):
        if len(parts) != 3 or not parts[0].strip():
            failures.append((f"line {lineno}", "malformed row"))
            continue
        uid, _, normalized = (s.strip() for s in parts)
        text = normalize_text(normalized)
        try:
            samples = read_wav(_wav_path(manifest, uid))
            spec = spectrogram_from_config(samples, frontend)
        except (OSError, EOFError, ValueError) as e:
            failures.append((uid, str(e)))
            continue
        if not text:
            failures.append((uid, "empty transcript after normalization"))
            continue
        n = int(round(len(samples) * frontend.sample_rate / samples.sample_rate))
        utts.append(Utterance(uid, text, spec, n))
    for uid, msg in failures:
        log.warning("skipping %s: %s", uid, msg)
    if not utts:
        raise DatasetError(f"no usable records in {manifest}", failures)
    return Dataset(utts, failures)


def char_tone(char: str, rate: int, dur: float) -> np.ndarray:
    """A two-tone burst identifying one character; space is near-silence."""
    n = int(round(dur * rate))
    t = np.arange(n) / rate
    i = ALPHABET.index(char)
    if char == " ":
        return np.zeros(n)
    f1 = 300.0 + 110.0 * i
    f2 = 1.37 * f1 + 900.0
    env = np.ones(n)
    ramp = max(1, int(0.01 * rate))
    env[:ramp] = np.linspace(0.0, 1.0, ramp)
    env[-ramp:] = np.linspace(1.0, 0.0, ramp)
    return env * (0.3 * np.sin(2 * np.pi * f1 * t) + 0.2 * np.sin(2 * np.pi * f2 * t))


def synth_utterance(text: str, rate: int = 22050, char_dur: float = 0.08,
                    rng: np.random.Generator | None = None) -> SpeechSamples:
    """Render text as a sequence of character tones with light dither noise."""
    rng = rng or np.random.default_rng(0)
    pad = np.zeros(int(0.05 * rate))
    body = np.concatenate([pad] + [char_tone(c, rate, char_dur) for c in text] + [pad])
    body = body + 1e-3 * rng.standard_normal(body.size)
    return SpeechSamples(np.clip(body, -0.999, 0.999), rate)


def write_toy_corpus(out_dir, texts=TOY_TEXTS, rate: int = 22050, seed: int = 0) -> Path:
    """Write WAVs plus an LJSpeech-style metadata.csv; returns the manifest path."""
    out = Path(out_dir)
    (out / "wavs").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = []
    for i, text in enumerate(texts):
        uid = f"toy-{i:03d}"
        write_wav(out / "wavs" / f"{uid}.wav", synth_utterance(text, rate, rng=rng))
        lines.append(f"{uid}|{text}|{text}")
    manifest = out / "metadata.csv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
