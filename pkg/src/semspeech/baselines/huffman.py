"""Canonical Huffman coding over text tokens."""

from __future__ import annotations

import heapq
from collections import Counter

from ..ctc import ALPHABET
from ..errors import InvalidArgumentError

# Approximate relative frequencies (per 1000 characters) of English text.
ENGLISH_FREQUENCIES = {
    " ": 180, "e": 102, "t": 75, "a": 65, "o": 61, "i": 57, "n": 57, "s": 53, "h": 50,
    "r": 49, "d": 35, "l": 33, "c": 22, "u": 22, "m": 20, "w": 19, "f": 18, "g": 16,
    "y": 16, "p": 15, "b": 12, "v": 8, "k": 6, "'": 3, "j": 1, "x": 1, "q": 1, "z": 1,
}


class HuffmanCodebook:
    """Prefix code stored canonically as (token, codeword length) pairs."""

    def __init__(self, lengths):
        lengths = [(tok, int(n)) for tok, n in lengths]
        if not lengths:
            raise InvalidArgumentError("empty codebook")
        self.lengths = lengths
        self.codes = _canonical_codes(lengths)
        self._decode = {code: tok for tok, code in self.codes.items()}

    def __eq__(self, other):
        return isinstance(other, HuffmanCodebook) and self.codes == other.codes

    def encode(self, tokens) -> list[int]:
        bits = []
        for t in tokens:
            try:
                bits.extend(int(b) for b in self.codes[t])
            except KeyError:
                raise InvalidArgumentError(f"token {t!r} is not in the codebook") from None
        return bits

    def decode(self, bits):
        """Returns (tokens, ok); on an incomplete trailing codeword ok is False."""
        out, cur = [], ""
        for b in bits:
            cur += "1" if b else "0"
            tok = self._decode.get(cur)
            if tok is not None:
                out.append(tok)
                cur = ""
        return out, cur == ""

    def serialize(self) -> str:
        return "\n".join(f"{tok!r}\t{n}" for tok, n in self.lengths)

    @classmethod
    def deserialize(cls, text: str) -> "HuffmanCodebook":
        import ast
        pairs = []
        for line in text.splitlines():
            if line.strip():
                tok, n = line.rsplit("\t", 1)
                pairs.append((ast.literal_eval(tok), int(n)))
        return cls(pairs)

    def expected_length(self, frequencies) -> float:
        total = sum(frequencies.values())
        return sum(c * len(self.codes[t]) for t, c in frequencies.items()) / total


def _token_order(tok):
    return (ALPHABET.index(tok), "") if isinstance(tok, str) and tok in ALPHABET else (len(ALPHABET), str(tok))


def _canonical_codes(lengths):
    order = sorted(lengths, key=lambda p: (p[1], _token_order(p[0])))
    codes, code, prev = {}, 0, order[0][1]
    for i, (tok, n) in enumerate(order):
        if i:
            code = (code + 1) << (n - prev)
        prev = n
        codes[tok] = format(code, f"0{n}b")
    return codes


def huffman_build(frequencies) -> HuffmanCodebook:
    """Optimal prefix code from token counts; ties broken by alphabet order."""
    freqs = {t: c for t, c in dict(frequencies).items() if c > 0}
    if not freqs:
        raise InvalidArgumentError("need at least one token with a positive count")
    toks = sorted(freqs, key=_token_order)
    if len(toks) == 1:
        return HuffmanCodebook([(toks[0], 1)])
    heap = [(freqs[t], i, (t,)) for i, t in enumerate(toks)]
    heapq.heapify(heap)
    depth = Counter()
    nxt = len(toks)
    while len(heap) > 1:
        c1, _, g1 = heapq.heappop(heap)
        c2, _, g2 = heapq.heappop(heap)
        for t in g1 + g2:
            depth[t] += 1
        heapq.heappush(heap, (c1 + c2, nxt, g1 + g2))
        nxt += 1
    return HuffmanCodebook([(t, depth[t]) for t in toks])


def corpus_frequencies(texts) -> Counter:
    return Counter(c for t in texts for c in t)
