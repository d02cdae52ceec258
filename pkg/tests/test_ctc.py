import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semspeech import ctc
from semspeech.errors import InvalidArgumentError
from semspeech.nn import Tensor, backward


def brute_force_loss(probs, target, tokens=None):
    """-ln of the sum over every length-L path whose collapse equals target.

    `tokens` maps column indices of probs to token ids (default: identity).
    """
    L, K = probs.shape
    tokens = list(range(K)) if tokens is None else tokens
    total = 0.0
    for path in product(range(K), repeat=L):
        if ctc.collapse_alignment([tokens[k] for k in path]) == list(target):
            total += math.prod(probs[t, k] for t, k in enumerate(path))
    return -math.log(total) if total > 0 else math.inf


def random_probs(rng, L, K):
    p = rng.random((L, K)) + 1e-3
    return p / p.sum(axis=1, keepdims=True)


def test_text_roundtrip():
    assert ctc.normalize_text("Hello, World!") == "hello world"
    ids = ctc.text_to_ids("it's ok")
    assert ids == [8, 19, 26, 18, 27, 14, 10]
    assert ctc.ids_to_text(ids) == "it's ok"


def test_collapse_rules():
    b = ctc.BLANK
    assert ctc.collapse_alignment([0, 0, b, 0, 1, 1, b]) == [0, 0, 1]
    assert ctc.collapse_alignment([b, b]) == []


def test_min_alignment_length_counts_repeats():
    assert ctc.min_alignment_length([]) == 0
    assert ctc.min_alignment_length([1, 2]) == 2
    assert ctc.min_alignment_length([1, 1, 2, 2, 2]) == 8


def test_enumerated_alignments_collapse_to_target():
    target = [3, 3]
    aligns = ctc.enumerate_alignments(target, 4)
    assert all(ctc.collapse_alignment(a) == target for a in aligns)
    assert (3, ctc.BLANK, 3, 3) in aligns
    assert (3, 3, 3, 3) not in aligns


def test_loss_matches_brute_force_small_alphabet(rng):
    # small alphabet so the exhaustive sum covers every path, not just target tokens
    for _ in range(50):
        L = rng.integers(1, 6)
        probs = np.zeros((L, ctc.N_TOKENS))
        sub = [0, 1, ctc.BLANK]
        probs[:, sub] = random_probs(rng, L, 3)
        tl = rng.integers(0, 3)
        target = list(rng.choice([0, 1], size=tl))
        want = brute_force_loss(probs[:, sub], target, sub)
        got = ctc.ctc_loss(probs, target)
        if math.isinf(want):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(want, rel=1e-10)


def test_infeasible_target_has_infinite_loss():
    probs = np.full((2, ctc.N_TOKENS), 1.0 / ctc.N_TOKENS)
    loss, ok = ctc.ctc_loss(probs, [4, 4], with_status=True)
    assert math.isinf(loss) and not ok


def test_empty_target_is_all_blank():
    probs = np.full((3, ctc.N_TOKENS), 0.1 / (ctc.N_TOKENS - 1))
    probs[:, ctc.BLANK] = 0.9
    assert ctc.ctc_loss(probs, []) == pytest.approx(-3 * math.log(0.9), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_grad_matches_finite_difference_of_logits(seed):
    rng = np.random.default_rng(seed)
    L = int(rng.integers(2, 7))
    target = list(rng.integers(0, 5, size=int(rng.integers(1, (L + 1) // 2 + 1))))
    if ctc.min_alignment_length(target) > L:
        target = target[:1]
    z = rng.standard_normal((L, ctc.N_TOKENS))
    soft = lambda a: np.exp(a - a.max(1, keepdims=True)) / np.exp(a - a.max(1, keepdims=True)).sum(1, keepdims=True)
    g = ctc.ctc_grad(soft(z), target)
    t, k = int(rng.integers(L)), int(rng.integers(ctc.N_TOKENS))
    eps = 1e-6
    zp, zm = z.copy(), z.copy()
    zp[t, k] += eps
    zm[t, k] -= eps
    fd = (ctc.ctc_loss(soft(zp), target) - ctc.ctc_loss(soft(zm), target)) / (2 * eps)
    assert g[t, k] == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_grad_rows_sum_to_zero(rng):
    probs = random_probs(rng, 6, ctc.N_TOKENS)
    g = ctc.ctc_grad(probs, [1, 2, 1])
    np.testing.assert_allclose(g.sum(axis=1), 0.0, atol=1e-12)


def test_loss_node_backward_equals_ctc_grad(rng):
    z = rng.standard_normal((5, ctc.N_TOKENS))
    leaf = Tensor(z, requires_grad=True, name="z")
    loss = ctc.ctc_loss_node(leaf, [2, 3])
    g = backward(loss, {"z": leaf})["z"]
    p = np.exp(z - z.max(1, keepdims=True))
    p /= p.sum(1, keepdims=True)
    np.testing.assert_allclose(g, ctc.ctc_grad(p, [2, 3]), atol=1e-12)


def test_loss_node_rejects_infeasible():
    leaf = Tensor(np.zeros((1, ctc.N_TOKENS)), requires_grad=True, name="z")
    with pytest.raises(InvalidArgumentError):
        ctc.ctc_loss_node(leaf, [1, 2])


def test_greedy_decode_ties_and_collapse():
    p = np.full((5, ctc.N_TOKENS), 0.0)
    for t, k in enumerate([7, 7, ctc.BLANK, 7, 4]):
        p[t, k] = 1.0
    p[4, 2] = 1.0  # tie with 4: lowest index wins
    assert ctc.greedy_decode(p) == [7, 7, 2]
