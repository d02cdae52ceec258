"""Small reverse-mode autodiff engine over numpy float64 arrays.

Only what the speech codec needs: dense layers, "same"-padded strided
convolution, GRU building blocks, softmax and plain SGD. Every op records a
closure that maps the output gradient to gradients of its inputs; `backward`
walks the recorded graph in reverse topological order.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, StateError

GROUPS = ("semantic", "chenc", "chdec")


class Tensor:
    __slots__ = ("data", "parents", "grad_fn", "requires_grad", "name", "_released")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.parents = ()
        self.grad_fn = None
        self.requires_grad = requires_grad
        self.name = name
        self._released = False

    @classmethod
    def from_op(cls, data, parents, grad_fn):
        out = cls(data)
        out.parents = tuple(parents)
        out.grad_fn = grad_fn
        out.requires_grad = any(p.requires_grad for p in out.parents)
        return out

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.shape}, name={self.name!r})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(as_tensor(other), neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# elementwise -----------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor.from_op(a.data + b.data, (a, b),
                          lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def neg(a) -> Tensor:
    return Tensor.from_op(-a.data, (a,), lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor.from_op(a.data * b.data, (a, b),
                          lambda g: (_unbroadcast(g * b.data, a.shape),
                                     _unbroadcast(g * a.data, b.shape)))


def relu(a) -> Tensor:
    mask = a.data > 0
    return Tensor.from_op(a.data * mask, (a,), lambda g: (g * mask,))


def tanh(a) -> Tensor:
    y = np.tanh(a.data)
    return Tensor.from_op(y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return Tensor.from_op(y, (a,), lambda g: (g * y * (1.0 - y),))


def square(a) -> Tensor:
    return Tensor.from_op(a.data * a.data, (a,), lambda g: (2.0 * g * a.data,))


def rsqrt(a) -> Tensor:
    y = 1.0 / np.sqrt(a.data)
    return Tensor.from_op(y, (a,), lambda g: (-0.5 * g * y ** 3,))


ACTIVATIONS = {"relu": relu, "tanh": tanh, "none": lambda t: t, None: lambda t: t}


# shape ops -------------------------------------------------------------------

def reshape(a, shape) -> Tensor:
    return Tensor.from_op(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def transpose(a, axes) -> Tensor:
    inv = np.argsort(axes)
    return Tensor.from_op(np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inv),))


def getitem(a, idx) -> Tensor:
    def grad_fn(g):
        out = np.zeros_like(a.data)
        if _fancy(idx):
            np.add.at(out, idx, g)
        else:
            out[idx] = g
        return (out,)
    return Tensor.from_op(a.data[idx], (a,), grad_fn)


def _fancy(idx):
    items = idx if isinstance(idx, tuple) else (idx,)
    return any(isinstance(i, (list, np.ndarray)) for i in items)


def flip(a, axis) -> Tensor:
    return Tensor.from_op(np.flip(a.data, axis), (a,), lambda g: (np.flip(g, axis),))


def concat(tensors, axis=-1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    cuts = np.cumsum(sizes)[:-1]
    return Tensor.from_op(np.concatenate([t.data for t in tensors], axis=axis), tensors,
                          lambda g: tuple(np.split(g, cuts, axis=axis)))


def stack(tensors, axis=0) -> Tensor:
    tensors = list(tensors)
    n = len(tensors)
    return Tensor.from_op(np.stack([t.data for t in tensors], axis=axis), tensors,
                          lambda g: tuple(np.moveaxis(g, axis, 0)[i] for i in range(n)))


def sum_all(a) -> Tensor:
    return Tensor.from_op(np.sum(a.data), (a,), lambda g: (np.full(a.shape, g),))


def mean_all(a) -> Tensor:
    n = a.data.size
    return Tensor.from_op(np.mean(a.data), (a,), lambda g: (np.full(a.shape, g / n),))


# linear algebra ----------------------------------------------------------------

def matmul(x, w) -> Tensor:
    """Contract the last axis of `x` with the first axis of the 2-D `w`."""
    x, w = as_tensor(x), as_tensor(w)
    if w.data.ndim != 2 or x.shape[-1] != w.shape[0]:
        raise InvalidArgumentError(f"cannot contract {x.shape} with {w.shape}")

    def grad_fn(g):
        gx = g @ w.data.T
        gw = x.data.reshape(-1, x.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        return gx, gw
    return Tensor.from_op(x.data @ w.data, (x, w), grad_fn)


def dense_forward(x, W, b, activation="none") -> Tensor:
    if activation not in ACTIVATIONS:
        raise InvalidArgumentError(f"unknown activation {activation!r}")
    W, b = as_tensor(W), as_tensor(b)
    if b.data.ndim != 1 or b.shape[0] != W.shape[-1]:
        raise InvalidArgumentError(f"bias shape {b.shape} does not match weights {W.shape}")
    return ACTIVATIONS[activation](matmul(x, W) + b)


def _same_pad(size, k, s):
    out = -(-size // s)
    total = max((out - 1) * s + k - size, 0)
    return out, total // 2, total - total // 2


def conv2d_forward(x, kernels, stride=(1, 1), activation="none", bias=None) -> Tensor:
    """2-D cross-correlation with "same" zero padding followed by striding.

    x: (B, C, H, W); kernels: (C_out, C, kh, kw). Output spatial size is
    ceil(H / sh) x ceil(W / sw).
    """
    x, k = as_tensor(x), as_tensor(kernels)
    if x.data.ndim != 4 or k.data.ndim != 4 or k.shape[1] != x.shape[1]:
        raise InvalidArgumentError(f"conv shapes do not conform: {x.shape} vs {k.shape}")
    B, C, H, W = x.shape
    co, _, kh, kw = k.shape
    sh, sw = stride
    if H < kh or W < kw:
        raise InvalidArgumentError("input smaller than kernel")
    Ho, ph0, ph1 = _same_pad(H, kh, sh)
    Wo, pw0, pw1 = _same_pad(W, kw, sw)
    xp = np.pad(x.data, ((0, 0), (0, 0), (ph0, ph1), (pw0, pw1)))
    out = np.zeros((B, co, Ho, Wo))
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, :, i:i + sh * Ho:sh, j:j + sw * Wo:sw]
            out += np.einsum("bchw,oc->bohw", patch, k.data[:, :, i, j], optimize=True)

    def grad_fn(g):
        gk = np.zeros_like(k.data)
        gxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                sl = (slice(None), slice(None), slice(i, i + sh * Ho, sh), slice(j, j + sw * Wo, sw))
                gk[:, :, i, j] = np.einsum("bohw,bchw->oc", g, xp[sl], optimize=True)
                gxp[sl] += np.einsum("bohw,oc->bchw", g, k.data[:, :, i, j], optimize=True)
        return gxp[:, :, ph0:ph0 + H, pw0:pw0 + W], gk

    y = Tensor.from_op(out, (x, k), grad_fn)
    if bias is not None:
        y = y + reshape(as_tensor(bias), (1, co, 1, 1))
    return ACTIVATIONS[activation](y)


# recurrent -------------------------------------------------------------------

def gru_forward(x, W, U, b, reverse=False) -> Tensor:
    """Single-direction GRU over x: (B, T, in) with zero initial state.

    W: (in, 3H) and U: (H, 3H) hold the update, reset and candidate blocks
    in that order; b: (3H,).
        z = sig(x Wz + h Uz + bz), r = sig(x Wr + h Ur + br)
        c = tanh(x Wc + (r*h) Uc + bc), h' = (1 - z) h + z c
    """
    x, W, U, b = as_tensor(x), as_tensor(W), as_tensor(U), as_tensor(b)
    B, T, _ = x.shape
    H = U.shape[0]
    if W.shape[-1] != 3 * H or U.shape != (H, 3 * H) or b.shape != (3 * H,):
        raise InvalidArgumentError("GRU parameter shapes do not conform")
    xp = matmul(x, W) + b
    Uzr, Uc = U[:, : 2 * H], U[:, 2 * H:]
    h = Tensor(np.zeros((B, H)))
    outs = [None] * T
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        xt = xp[:, t, :]
        zr = sigmoid(xt[:, : 2 * H] + h @ Uzr)
        z, r = zr[:, :H], zr[:, H:]
        c = tanh(xt[:, 2 * H:] + (r * h) @ Uc)
        h = h + z * (c - h)
        outs[t] = h
    return stack(outs, axis=1)


def bigru_forward(x, params: Mapping, prefix: str) -> Tensor:
    """Bidirectional GRU: forward and time-reversed outputs concatenated per step."""
    fwd = gru_forward(x, params[prefix + "fw.W"], params[prefix + "fw.U"], params[prefix + "fw.b"])
    bwd = gru_forward(x, params[prefix + "bw.W"], params[prefix + "bw.U"], params[prefix + "bw.b"],
                      reverse=True)
    return concat([fwd, bwd], axis=-1)


# softmax ---------------------------------------------------------------------

def softmax_np(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax_np(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    s = x - x.max(axis=-1, keepdims=True)
    return s - np.log(np.exp(s).sum(axis=-1, keepdims=True))


def softmax(x):
    """Softmax along the last axis; accepts arrays or Tensors."""
    if not isinstance(x, Tensor):
        return softmax_np(x)
    y = softmax_np(x.data)

    def grad_fn(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)
    return Tensor.from_op(y, (x,), grad_fn)


# backward / parameters ---------------------------------------------------------

def _topo(root):
    order, seen = [], set()
    stack_ = [(root, False)]
    while stack_:
        node, done = stack_.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for p in node.parents:
            if id(p) not in seen and p.requires_grad:
                stack_.append((p, False))
    return order


def backward(loss, leaves: Mapping[str, Tensor]) -> dict:
    """Gradients of the scalar `loss` for each named leaf tensor.

    The recorded graph is released afterwards; a second call on the same
    loss raises StateError.
    """
    if not isinstance(loss, Tensor):
        raise StateError("no forward pass recorded")
    if loss._released:
        raise StateError("graph already consumed by a previous backward pass")
    if loss.data.size != 1:
        raise InvalidArgumentError("loss must be a scalar")
    grads = {id(loss): np.ones_like(loss.data)}
    order = _topo(loss) if loss.requires_grad else []
    for node in reversed(order):
        g = grads.get(id(node))
        if g is None or node.grad_fn is None:
            continue
        for p, gp in zip(node.parents, node.grad_fn(g)):
            if not p.requires_grad:
                continue
            if id(p) in grads:
                grads[id(p)] = grads[id(p)] + gp
            else:
                grads[id(p)] = gp
    for node in order:
        if node.grad_fn is not None:
            node.grad_fn = None
            node.parents = ()
    loss._released = True
    return {name: np.array(grads.get(id(t), np.zeros_like(t.data)), dtype=np.float64)
            for name, t in leaves.items()}


class ModelParams(Mapping):
    """Named float64 arrays partitioned into encoder / channel-encoder / channel-decoder groups.

    Names carry their group as a prefix, e.g. ``semantic/conv0.k`` or
    ``chdec/dense2.W``.
    """

    def __init__(self, tensors: Mapping[str, np.ndarray]):
        self._t = {}
        for name, value in tensors.items():
            if name.split("/", 1)[0] not in GROUPS:
                raise InvalidArgumentError(f"parameter {name!r} has no known group prefix")
            self._t[name] = np.asarray(value, dtype=np.float64)

    def __getitem__(self, name):
        return self._t[name]

    def __iter__(self):
        return iter(self._t)

    def __len__(self):
        return len(self._t)

    def group(self, g: str) -> dict:
        return {k: v for k, v in self._t.items() if k.startswith(g + "/")}

    @property
    def alpha(self):
        return self.group("semantic")

    @property
    def beta(self):
        return self.group("chenc")

    @property
    def theta_r(self):
        return self.group("chdec")

    def leaves(self) -> dict:
        return {k: Tensor(v, requires_grad=True, name=k) for k, v in self._t.items()}

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self._t.items()})

    def n_parameters(self) -> int:
        return int(sum(v.size for v in self._t.values()))


def clip_by_global_norm(grads: Mapping[str, np.ndarray], max_norm: float) -> dict:
    """Scale all gradients by one factor so their joint L2 norm is at most max_norm."""
    norm = math.sqrt(sum(float(np.sum(np.square(g))) for g in grads.values()))
    scale = max_norm / norm if norm > max_norm else 1.0
    return {k: np.asarray(g) * scale for k, g in grads.items()}


def sgd_step(params: ModelParams, grads: Mapping[str, np.ndarray], lr: float) -> ModelParams:
    """theta <- theta - lr * grad, returning a new parameter set."""
    if set(grads) != set(params):
        missing = set(params) ^ set(grads)
        raise InvalidArgumentError(f"gradient keys do not match parameters: {sorted(missing)[:5]}")
    out = {}
    for k, v in params.items():
        g = np.asarray(grads[k], dtype=np.float64)
        if g.shape != v.shape:
            raise InvalidArgumentError(f"gradient for {k} has shape {g.shape}, expected {v.shape}")
        out[k] = v - lr * g
    return ModelParams(out)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 24
    learning_rate: float = 1e-4
    epochs: int = 50
    seed: int = 0
    clip_norm: float | None = None  # rescale the batch gradient to this global L2 norm when exceeded

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvalidArgumentError("batch_size must be >= 1")
        if not self.learning_rate >= 0:
            raise InvalidArgumentError("learning_rate must be non-negative")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise InvalidArgumentError("clip_norm must be positive when set")
