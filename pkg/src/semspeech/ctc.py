"""CTC over the 29-token alphabet: collapse rule, exact log-space loss and
gradient, greedy decoding, and a brute-force alignment enumerator.

Token indices are 0-based here: a-z are 0..25, apostrophe 26, space 27 and
blank 28 (the 29th token).
"""

from __future__ import annotations

import itertools
import math
import re

import numpy as np

from . import nn
from .errors import InvalidArgumentError

ALPHABET = "abcdefghijklmnopqrstuvwxyz' "
BLANK = 28
N_TOKENS = 29
_CHAR_TO_ID = {c: i for i, c in enumerate(ALPHABET)}


def normalize_text(text: str) -> str:
    """Lowercase, drop characters outside the alphabet, collapse runs of spaces."""
    text = text.lower()
    text = "".join(c if c in _CHAR_TO_ID else (" " if c.isspace() else "") for c in text)
    return re.sub(" +", " ", text).strip()


def text_to_ids(text: str) -> list[int]:
    try:
        return [_CHAR_TO_ID[c] for c in text]
    except KeyError as e:
        raise InvalidArgumentError(f"character {e.args[0]!r} is not in the alphabet") from None


def ids_to_text(ids) -> str:
    return "".join(ALPHABET[i] for i in ids)


def collapse_alignment(alignment) -> list[int]:
    """Merge consecutive repeats, then delete blanks."""
    out = []
    prev = None
    for a in alignment:
        a = int(a)
        if a != prev and a != BLANK:
            out.append(a)
        prev = a
    return out


def min_alignment_length(target) -> int:
    target = list(target)
    repeats = sum(1 for a, b in zip(target, target[1:]) if a == b)
    return len(target) + repeats


def enumerate_alignments(target, length: int) -> set[tuple[int, ...]]:
    """Every length-`length` path that collapses to `target` (test oracle; small sizes only).

    Paths containing tokens outside the target can never collapse to it, so
    only the target's distinct tokens plus blank are scanned.
    """
    target = [int(t) for t in target]
    if length < min_alignment_length(target):
        return set()
    symbols = sorted(set(target) | {BLANK})
    return {a for a in itertools.product(symbols, repeat=length) if collapse_alignment(a) == target}


def _extended(target):
    ext = [BLANK]
    for t in target:
        ext += [int(t), BLANK]
    return np.array(ext, dtype=np.int64)


def _skip_allowed(ext):
    skip = np.zeros(ext.size, dtype=bool)
    skip[2:] = (ext[2:] != BLANK) & (ext[2:] != ext[:-2])
    return skip


def _log_probs(probs):
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != N_TOKENS:
        raise InvalidArgumentError(f"expected an L x {N_TOKENS} matrix, got {probs.shape}")
    with np.errstate(divide="ignore"):
        return np.log(probs)


def _forward_backward(logp, target):
    L = logp.shape[0]
    ext = _extended(target)
    S = ext.size
    skip = _skip_allowed(ext)
    emit = logp[:, ext]  # (L, S)
    la = np.full((L, S), -np.inf)
    la[0, 0] = emit[0, 0]
    if S > 1:
        la[0, 1] = emit[0, 1]
    for t in range(1, L):
        prev = la[t - 1]
        acc = prev.copy()
        acc[1:] = np.logaddexp(acc[1:], prev[:-1])
        acc[2:] = np.where(skip[2:], np.logaddexp(acc[2:], prev[:-2]), acc[2:])
        la[t] = acc + emit[t]
    lb = np.full((L, S), -np.inf)
    lb[L - 1, S - 1] = 0.0
    if S > 1:
        lb[L - 1, S - 2] = 0.0
    for t in range(L - 2, -1, -1):
        nxt = lb[t + 1] + emit[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        skip_next = np.zeros(S, dtype=bool)
        skip_next[:-2] = skip[2:]
        acc[:-2] = np.where(skip_next[:-2], np.logaddexp(acc[:-2], nxt[2:]), acc[:-2])
        lb[t] = acc
    end = la[L - 1, S - 1] if S == 1 else np.logaddexp(la[L - 1, S - 1], la[L - 1, S - 2])
    return ext, la, lb, end


def ctc_loss(probs, target, with_status: bool = False):
    """-ln of the total probability of all alignments collapsing to `target`.

    When the path is shorter than the minimum alignment length the loss is
    +inf; pass ``with_status=True`` to also receive a feasibility flag.
    """
    logp = _log_probs(probs)
    target = [int(t) for t in target]
    if BLANK in target:
        raise InvalidArgumentError("target must not contain the blank token")
    if logp.shape[0] < min_alignment_length(target):
        return (math.inf, False) if with_status else math.inf
    _, _, _, end = _forward_backward(logp, target)
    loss = max(float(-end), 0.0) if np.isfinite(end) else math.inf
    return (loss, True) if with_status else loss


def _posterior_occupancy(logp, target):
    ext, la, lb, end = _forward_backward(logp, target)
    gamma = np.zeros_like(logp)
    if not np.isfinite(end):
        return gamma, end
    occ = np.exp(la + lb - end)  # (L, S)
    for s, k in enumerate(ext):
        gamma[:, k] += occ[:, s]
    return gamma, end


def ctc_grad(probs, target) -> np.ndarray:
    """Gradient of the CTC loss w.r.t. the pre-softmax logits that produced `probs`."""
    logp = _log_probs(probs)
    target = [int(t) for t in target]
    if logp.shape[0] < min_alignment_length(target):
        raise InvalidArgumentError("path shorter than the minimum alignment length")
    gamma, _ = _posterior_occupancy(logp, target)
    return np.exp(logp) - gamma


def ctc_loss_node(logits: nn.Tensor, target) -> nn.Tensor:
    """Differentiable CTC loss on (L, 29) logits for the autodiff engine."""
    logp = nn.log_softmax_np(logits.data)
    target = [int(t) for t in target]
    if logp.shape[0] < min_alignment_length(target):
        raise InvalidArgumentError(
            f"{logp.shape[0]} steps cannot align a target of length {len(target)}")
    gamma, end = _posterior_occupancy(logp, target)
    if not np.isfinite(end):
        raise InvalidArgumentError("target has zero probability under the model")
    grad = np.exp(logp) - gamma
    return nn.Tensor.from_op(np.array(-end), (logits,), lambda g: (g * grad,))


def greedy_decode(probs) -> list[int]:
    """Per-step argmax (ties go to the lowest index), then collapse."""
    probs = np.asarray(probs, dtype=np.float64)
    return collapse_alignment(np.argmax(probs, axis=-1))
