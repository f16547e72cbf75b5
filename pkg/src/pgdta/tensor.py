"""Dense float64 arrays with tape-based reverse-mode differentiation.

Each op builds its output eagerly and, when any input requires a gradient,
records the inputs together with a closure mapping the output gradient to
input gradients. :meth:`Tensor.backward` linearises the recorded graph into
a tape (topological order) and replays it in reverse.

Gradient accumulation contract: ``backward`` *adds* into ``.grad`` of every
reachable tensor that requires a gradient. Calling it twice on the same
output without :func:`zero_grad` doubles every gradient; zeroing is the
caller's job.
"""

from __future__ import annotations

import contextlib
import threading

import numpy as np

from .errors import AllMaskedRow, EmptyAxis, NonScalarOutput, ShapeMismatch

_state = threading.local()


def _grad_enabled():
    return getattr(_state, "enabled", True)


@contextlib.contextmanager
def no_grad():
    """Disable tape recording in the current thread."""
    prev = _grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = prev


class Tensor:
    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.name = name
        self._parents = ()
        self._backward = None

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        return self.data

    def item(self):
        if self.data.size != 1:
            raise NonScalarOutput(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data.copy())

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def relu(self):
        return relu(self)

    def sum(self, axis=None):
        return reduce(self, "sum", axis)

    def mean(self, axis=None):
        return reduce(self, "mean", axis)

    def max(self, axis=None):
        return reduce(self, "max", axis)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 else shape)

    def backward(self):
        if self.data.size != 1:
            raise NonScalarOutput(
                f"backward() needs a single-element output, got shape {self.shape}")
        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(_tape(self)):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                node.grad = g.copy() if node.grad is None else node.grad + g
            if node._backward is None:
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg


def _tape(output):
    """Recorded ops reachable from ``output``, inputs before consumers."""
    order, seen = [], set()
    stack = [(output, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data, parents, backward):
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    out.requires_grad = _grad_enabled() and any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = tuple(parents)
        out._backward = backward
    else:
        out._parents = ()
        out._backward = None
    return out


def zero_grad(tensors):
    for t in tensors:
        t.grad = None


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _broadcast_shape(a, b, op):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


# -- linear algebra ------------------------------------------------------------

def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return _result(a.data @ b.data, (a, b), backward)


# -- elementwise ---------------------------------------------------------------

def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape(a, b, "add")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), backward)


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape(a, b, "sub")

    def backward(g):
        return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)

    return _result(a.data - b.data, (a, b), backward)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape(a, b, "mul")

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), backward)


def div(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape(a, b, "div")

    def backward(g):
        return (_unbroadcast(g / b.data, a.shape),
                _unbroadcast(-g * a.data / b.data ** 2, b.shape))

    return _result(a.data / b.data, (a, b), backward)


def _unary(x, value, local_grad):
    x = _as_tensor(x)

    def backward(g):
        return (g * local_grad,)

    return _result(value, (x,), backward)


def relu(x):
    x = _as_tensor(x)
    return _unary(x, np.maximum(x.data, 0.0), (x.data > 0).astype(np.float64))


def leaky_relu(x, alpha=0.2):
    x = _as_tensor(x)
    pos = x.data > 0
    return _unary(x, np.where(pos, x.data, alpha * x.data), np.where(pos, 1.0, alpha))


def elu(x, alpha=1.0):
    x = _as_tensor(x)
    pos = x.data > 0
    ex = np.exp(np.minimum(x.data, 0.0))
    return _unary(x, np.where(pos, x.data, alpha * (ex - 1.0)), np.where(pos, 1.0, alpha * ex))


def sigmoid(x):
    x = _as_tensor(x)
    # split by sign to avoid overflow in exp
    e = np.exp(-np.abs(x.data))
    s = np.where(x.data >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return _unary(x, s, s * (1.0 - s))


def tanh(x):
    x = _as_tensor(x)
    t = np.tanh(x.data)
    return _unary(x, t, 1.0 - t * t)


def exp(x):
    x = _as_tensor(x)
    e = np.exp(x.data)
    return _unary(x, e, e)


def square(x):
    x = _as_tensor(x)
    return _unary(x, x.data * x.data, 2.0 * x.data)


def elementwise(op, *inputs, alpha=None):
    """Dispatch by name: add, sub, mul, relu, leaky_relu, elu, sigmoid, tanh."""
    binary = {"add": add, "sub": sub, "mul": mul}
    if op in binary:
        return binary[op](*inputs)
    unary = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh}
    if op in unary:
        return unary[op](*inputs)
    if op == "leaky_relu":
        return leaky_relu(*inputs, alpha=0.2 if alpha is None else alpha)
    if op == "elu":
        return elu(*inputs, alpha=1.0 if alpha is None else alpha)
    raise ValueError(f"unknown elementwise op {op!r}")


# -- shape ---------------------------------------------------------------------

def reshape(x, shape):
    x = _as_tensor(x)
    shape = tuple(shape)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeMismatch(f"cannot reshape {x.shape} to {shape}") from None

    def backward(g):
        return (g.reshape(x.shape),)

    return _result(data, (x,), backward)


def concat(tensors, axis=-1):
    tensors = [_as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise ShapeMismatch(f"concat: {exc}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _result(data, tensors, backward)


def take_rows(x, index):
    """Gather ``x[index]`` along the first axis; repeated indices accumulate."""
    x = _as_tensor(x)
    index = np.asarray(index, dtype=np.intp)

    def backward(g):
        out = np.zeros_like(x.data)
        np.add.at(out, index, g)
        return (out,)

    return _result(x.data[index], (x,), backward)


def embedding(table, ids, frozen_rows=()):
    """Row lookup into ``table`` with gradients suppressed for ``frozen_rows``."""
    table = _as_tensor(table)
    ids = np.asarray(ids, dtype=np.intp)
    frozen = np.asarray(frozen_rows, dtype=np.intp)

    def backward(g):
        out = np.zeros_like(table.data)
        np.add.at(out, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        if frozen.size:
            out[frozen] = 0.0
        return (out,)

    return _result(table.data[ids], (table,), backward)


# -- reductions ----------------------------------------------------------------

def reduce(x, mode, axis=None):
    """``sum``, ``mean`` or ``max`` over one axis (or all elements when None).

    The max backward sends the gradient to the first maximal entry.
    """
    x = _as_tensor(x)
    if axis is not None:
        if not -x.ndim <= axis < x.ndim:
            raise EmptyAxis(f"axis {axis} invalid for shape {x.shape}")
        axis = axis % x.ndim
        n = x.shape[axis]
    else:
        n = x.size
    if n == 0:
        raise EmptyAxis(f"reduction over empty axis of shape {x.shape}")

    if mode == "sum" or mode == "mean":
        scale = 1.0 if mode == "sum" else 1.0 / n
        data = x.data.sum(axis=axis) * scale

        def backward(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g * scale, x.shape).copy(),)

        return _result(np.asarray(data, dtype=np.float64), (x,), backward)

    if mode == "max":
        if axis is None:
            flat = x.data.reshape(-1)
            arg = int(np.argmax(flat))

            def backward(g):
                out = np.zeros(x.size)
                out[arg] = g
                return (out.reshape(x.shape),)

            return _result(np.asarray(flat[arg]), (x,), backward)

        arg = np.expand_dims(np.argmax(x.data, axis=axis), axis)
        data = np.take_along_axis(x.data, arg, axis=axis).squeeze(axis)

        def backward(g):
            out = np.zeros_like(x.data)
            np.put_along_axis(out, arg, np.expand_dims(g, axis), axis=axis)
            return (out,)

        return _result(data, (x,), backward)

    raise ValueError(f"unknown reduce mode {mode!r}")


def softmax_rows(x, mask=None):
    """Row-wise softmax; entries where ``mask`` is False get weight exactly 0."""
    x = _as_tensor(x)
    if x.ndim != 2:
        raise ShapeMismatch(f"softmax_rows expects a matrix, got {x.shape}")
    if mask is None:
        mask = np.ones(x.shape, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != x.shape:
            raise ShapeMismatch(f"mask {mask.shape} vs input {x.shape}")
        if not mask.any(axis=1).all():
            raise AllMaskedRow("softmax_rows: a row has no unmasked entry")
    z = np.where(mask, x.data, -np.inf)
    z = z - z.max(axis=1, keepdims=True)
    e = np.where(mask, np.exp(z), 0.0)
    y = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=1, keepdims=True)),)

    return _result(y, (x,), backward)


# -- segment ops (rows grouped by an index array) -------------------------------

def segment_sum(x, segment, n_segments):
    """``out[s] = sum of x[i] over rows i with segment[i] == s``."""
    x = _as_tensor(x)
    segment = np.asarray(segment, dtype=np.intp)
    out = np.zeros((n_segments,) + x.shape[1:])
    np.add.at(out, segment, x.data)

    def backward(g):
        return (g[segment],)

    return _result(out, (x,), backward)


def segment_softmax(x, segment, n_segments):
    """Softmax of ``x`` within each segment, independently per trailing column."""
    x = _as_tensor(x)
    segment = np.asarray(segment, dtype=np.intp)
    top = np.full((n_segments,) + x.shape[1:], -np.inf)
    np.maximum.at(top, segment, x.data)
    e = np.exp(x.data - top[segment])
    denom = np.zeros_like(top)
    np.add.at(denom, segment, e)
    y = e / denom[segment]

    def backward(g):
        s = np.zeros_like(top)
        np.add.at(s, segment, g * y)
        return (y * (g - s[segment]),)

    return _result(y, (x,), backward)


def segment_reduce(x, offsets, mode="max"):
    """Reduce contiguous row blocks ``x[offsets[k]:offsets[k+1]]``.

    ``offsets`` has one more entry than there are blocks. Every block must be
    non-empty. Max ties go to the first maximal row of the block.
    """
    x = _as_tensor(x)
    offsets = np.asarray(offsets, dtype=np.intp)
    counts = np.diff(offsets)
    if (counts <= 0).any():
        raise EmptyAxis("segment_reduce: empty block")
    starts = offsets[:-1]
    if mode == "sum" or mode == "mean":
        data = np.add.reduceat(x.data, starts, axis=0)
        scale = np.ones(len(counts)) if mode == "sum" else 1.0 / counts
        data = data * scale.reshape((-1,) + (1,) * (x.ndim - 1))
        owner = np.repeat(np.arange(len(counts)), counts)

        def backward(g):
            g = g * scale.reshape((-1,) + (1,) * (x.ndim - 1))
            return (g[owner],)

        return _result(data, (x,), backward)

    if mode == "max":
        arg = np.empty((len(counts),) + x.shape[1:], dtype=np.intp)
        for k, (lo, hi) in enumerate(zip(offsets[:-1], offsets[1:])):
            arg[k] = lo + np.argmax(x.data[lo:hi], axis=0)
        data = np.take_along_axis(x.data, arg, axis=0)

        def backward(g):
            out = np.zeros_like(x.data)
            cols = np.broadcast_to(np.arange(x.shape[1]), arg.shape) if x.ndim == 2 else None
            if cols is None:
                np.add.at(out, arg, g)
            else:
                np.add.at(out, (arg, cols), g)
            return (out,)

        return _result(data, (x,), backward)

    raise ValueError(f"unknown segment_reduce mode {mode!r}")


# -- convolution / regularisation -------------------------------------------------

def conv1d(x, weight, bias=None):
    """Valid 1-D convolution.

    x: (batch, length, c_in); weight: (kernel, c_in, c_out); bias: (c_out,).
    Returns (batch, length - kernel + 1, c_out).
    """
    x, weight = _as_tensor(x), _as_tensor(weight)
    k, c_in, c_out = weight.shape
    b, length, c = x.shape
    if c != c_in:
        raise ShapeMismatch(f"conv1d: input channels {c} vs weight {c_in}")
    n_out = length - k + 1
    if n_out < 1:
        raise ShapeMismatch(f"conv1d: length {length} shorter than kernel {k}")
    out = np.zeros((b, n_out, c_out))
    for t in range(k):
        out += x.data[:, t:t + n_out, :] @ weight.data[t]
    parents = [x, weight]
    if bias is not None:
        bias = _as_tensor(bias)
        out += bias.data
        parents.append(bias)

    def backward(g):
        gx = np.zeros_like(x.data) if x.requires_grad else None
        gw = np.empty_like(weight.data)
        flat_g = g.reshape(-1, c_out)
        for t in range(k):
            window = x.data[:, t:t + n_out, :]
            gw[t] = window.reshape(-1, c_in).T @ flat_g
            if gx is not None:
                gx[:, t:t + n_out, :] += g @ weight.data[t].T
        grads = [gx, gw]
        if bias is not None:
            grads.append(flat_g.sum(axis=0))
        return tuple(grads)

    return _result(out, parents, backward)


def dropout(x, p, rng, training=True):
    """Inverted dropout; the identity when not training or ``p == 0``."""
    x = _as_tensor(x)
    if not training or p <= 0.0:
        return x
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    return _unary(x, x.data * keep, keep)


def mean(x, axis=None):
    return reduce(x, "mean", axis)
