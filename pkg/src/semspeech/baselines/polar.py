"""Polar codes: Bhattacharyya construction, butterfly encoder, SC and SCL decoders.

Codewords are x = u F^{(x)n} with F = [[1, 0], [1, 1]] and no bit-reversal
permutation. LLRs follow the convention ln P(bit=0) / P(bit=1), so a
positive LLR favours 0. Decoders accept a single LLR vector or a batch of
shape (blocks, N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError


def bhattacharyya_reliabilities(n_bits: int, design_snr_db: float) -> np.ndarray:
    """Bhattacharyya parameter of each synthetic bit channel (lower is more reliable).

    The base channel is BPSK over AWGN at the given Es/N0, Z = exp(-Es/N0).
    With natural-order encoding the top split sends the first half of u
    through the degraded channel, so index bit k (from the MSB) records the
    choice at depth k.
    """
    if n_bits < 1 or n_bits & (n_bits - 1):
        raise InvalidArgumentError("block length must be a power of two")
    z = np.array([math.exp(-(10.0 ** (design_snr_db / 10.0)))])
    while z.size < n_bits:
        nz = np.empty(2 * z.size)
        nz[0::2] = 2.0 * z - z * z
        nz[1::2] = z * z
        z = nz
    return z


@dataclass(frozen=True)
class PolarConfig:
    n: int = 512
    k: int = 256
    list_size: int = 4
    design_snr_db: float = 2.0
    frozen: frozenset = field(default=None)

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise InvalidArgumentError("block length must be a power of two")
        if not 0 <= self.k <= self.n:
            raise InvalidArgumentError("info length must lie in [0, N]")
        if self.list_size < 1:
            raise InvalidArgumentError("list size must be >= 1")
        if self.frozen is None:
            z = bhattacharyya_reliabilities(self.n, self.design_snr_db)
            order = np.argsort(-z, kind="stable")  # least reliable first
            object.__setattr__(self, "frozen", frozenset(int(i) for i in order[: self.n - self.k]))
        elif len(self.frozen) != self.n - self.k:
            raise InvalidArgumentError("frozen set size must equal N - K")

    @property
    def frozen_mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[sorted(self.frozen)] = True
        return m

    @property
    def info_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)


def butterfly(u) -> np.ndarray:
    """u F^{(x)n} over GF(2) along the last axis."""
    x = np.array(u, dtype=np.uint8)
    n = x.shape[-1]
    half = n // 2
    while half >= 1:
        x = x.reshape(x.shape[:-1] + (n // (2 * half), 2, half))
        x[..., 0, :] ^= x[..., 1, :]
        x = x.reshape(x.shape[:-3] + (n,))
        half //= 2
    return x


def polar_encode(info, cfg: PolarConfig) -> np.ndarray:
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != cfg.k:
        raise InvalidArgumentError(f"expected {cfg.k} info bits, got {info.shape[-1]}")
    u = np.zeros(info.shape[:-1] + (cfg.n,), dtype=np.uint8)
    u[..., cfg.info_indices] = info
    return butterfly(u)


def _f(a, b):
    # exact check-node update, ln((1 + e^{a+b}) / (e^a + e^b))
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def _softplus(x):
    return np.logaddexp(0.0, x)


def polar_sc_decode(llr, cfg: PolarConfig) -> np.ndarray:
    """Plain successive-cancellation decoding with hard decisions."""
    llr = np.asarray(llr, dtype=np.float64)
    single = llr.ndim == 1
    llr = np.atleast_2d(llr)
    if llr.shape[-1] != cfg.n:
        raise InvalidArgumentError(f"expected {cfg.n} LLRs per block")
    frozen = cfg.frozen_mask

    def rec(l, fz):
        if l.shape[-1] == 1:
            u = np.zeros(l.shape, dtype=np.uint8) if fz[0] else (l < 0).astype(np.uint8)
            return u, u.copy()
        h = l.shape[-1] // 2
        l1, l2 = l[:, :h], l[:, h:]
        ua, va = rec(_f(l1, l2), fz[:h])
        ub, vb = rec(l2 + (1.0 - 2.0 * va) * l1, fz[h:])
        return np.concatenate([ua, ub], axis=1), np.concatenate([va ^ vb, vb], axis=1)

    u, _ = rec(llr, frozen)
    info = u[:, cfg.info_indices]
    return info[0] if single else info


def polar_scl_decode(llr, cfg: PolarConfig, list_size: int | None = None) -> np.ndarray:
    """Successive-cancellation list decoding; returns info bits of the best path.

    Path metrics accumulate ln(1 + exp(-(1 - 2u) L)) with the exact check-node
    update, so with a list that never prunes the result is maximum likelihood.
    """
    llr = np.asarray(llr, dtype=np.float64)
    single = llr.ndim == 1
    llr = np.atleast_2d(llr)
    if llr.shape[-1] != cfg.n:
        raise InvalidArgumentError(f"expected {cfg.n} LLRs per block")
    cap = cfg.list_size if list_size is None else list_size
    nb = llr.shape[0]

    def rec(l, fz, pm):
        # l: (blocks, paths, n); pm: (blocks, paths)
        paths = l.shape[1]
        if l.shape[-1] == 1:
            lam = l[:, :, 0]
            if fz[0]:
                u = np.zeros((nb, paths, 1), dtype=np.uint8)
                return u, u.copy(), pm + _softplus(-lam), np.broadcast_to(np.arange(paths), (nb, paths))
            cand = np.concatenate([pm + _softplus(-lam), pm + _softplus(lam)], axis=1)
            keep = min(cap, 2 * paths)
            order = np.argsort(cand, axis=1, kind="stable")[:, :keep]
            new_pm = np.take_along_axis(cand, order, axis=1)
            bit = (order >= paths).astype(np.uint8)[:, :, None]
            return bit, bit.copy(), new_pm, order % paths
        h = l.shape[-1] // 2
        l1, l2 = l[..., :h], l[..., h:]
        ua, va, pm, o1 = rec(_f(l1, l2), fz[:h], pm)
        l1 = np.take_along_axis(l1, o1[:, :, None], axis=1)
        l2 = np.take_along_axis(l2, o1[:, :, None], axis=1)
        ub, vb, pm, o2 = rec(l2 + (1.0 - 2.0 * va) * l1, fz[h:], pm)
        ua = np.take_along_axis(ua, o2[:, :, None], axis=1)
        va = np.take_along_axis(va, o2[:, :, None], axis=1)
        origin = np.take_along_axis(o1, o2, axis=1)
        return (np.concatenate([ua, ub], axis=2), np.concatenate([va ^ vb, vb], axis=2), pm, origin)

    u, _, pm, _ = rec(llr[:, None, :], cfg.frozen_mask, np.zeros((nb, 1)))
    best = np.argmin(pm, axis=1)
    info = u[np.arange(nb), best][:, cfg.info_indices]
    return info[0] if single else info


def generator_matrix(n: int) -> np.ndarray:
    g = np.array([[1]], dtype=np.uint8)
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    while g.shape[0] < n:
        g = np.kron(f, g)
    return g
