"""Minimal dense-tensor autodiff.

Double-precision numpy arrays wrapped in :class:`Tensor`, with reverse-mode
differentiation recorded on an explicit :class:`Tape`.  Only the operations
needed by the reasoning model are provided; there is no GPU path and
broadcasting follows numpy rules.

A tape is installed with a ``with`` block; operations executed inside append
one record each, in execution order (which is already a topological order).
``Tape.backward`` walks the records once, in reverse.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Tensor",
    "Tape",
    "NonFiniteError",
    "tensor",
    "add",
    "sub",
    "mul",
    "scale",
    "neg",
    "matmul",
    "transpose",
    "reshape",
    "concat",
    "take",
    "segment_sum",
    "relu",
    "sigmoid",
    "tanh",
    "log",
    "softmax",
    "log_softmax",
    "mean",
    "reduce_sum",
    "cosine_similarity",
    "gradient_check",
    "GradCheckReport",
]


class NonFiniteError(FloatingPointError):
    """An operation produced NaN or infinity."""

    def __init__(self, op_name, array):
        super().__init__(f"non-finite values in output of op '{op_name}'")
        self.op_name = op_name


_STATE = threading.local()


def _active_tape():
    return getattr(_STATE, "tape", None)


class Tensor:
    """Dense float64 array with an optional gradient slot."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad=False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self):
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        flag = ", grad" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # Operator sugar; every path goes through the module-level ops so the
    # tape sees a single implementation of each primitive.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, _as_tensor(other))


def tensor(data, requires_grad=False):
    return Tensor(data, requires_grad=requires_grad)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


@dataclass
class _Record:
    op: str
    inputs: tuple
    output: "Tensor"
    backward: object  # callable: grad_out -> tuple of grads aligned with inputs


class Tape:
    """Ordered log of operations for one reverse-mode pass.

    Single-writer: one tape per thread at a time.  Entering the context
    installs the tape; tensors created by ops inside are recorded when any
    input requires a gradient.
    """

    def __init__(self):
        self.records = []

    def __enter__(self):
        if _active_tape() is not None:
            raise RuntimeError("a Tape is already active on this thread")
        _STATE.tape = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _STATE.tape = None
        return False

    def backward(self, output):
        """Accumulate d(output)/d(leaf) into ``.grad`` of recorded tensors."""
        if output.data.ndim != 0:
            raise ValueError("backward requires a scalar output")
        grads = {id(output): np.ones((), dtype=np.float64)}
        produced = {id(rec.output) for rec in self.records}
        if id(output) not in produced and output.requires_grad:
            output.grad = (
                np.ones((), dtype=np.float64)
                if output.grad is None
                else output.grad + 1.0
            )
        for rec in reversed(self.records):
            g_out = grads.pop(id(rec.output), None)
            if g_out is None:
                continue
            for inp, g in zip(rec.inputs, rec.backward(g_out)):
                if g is None or not isinstance(inp, Tensor):
                    continue
                if not inp.requires_grad:
                    continue
                if id(inp) in produced:
                    # Intermediate: defer until its producing record is walked.
                    key = id(inp)
                    grads[key] = g if key not in grads else grads[key] + g
                else:
                    inp.grad = g if inp.grad is None else inp.grad + g


def _record(op_name, inputs, out_data, backward):
    out_requires = any(isinstance(t, Tensor) and t.requires_grad for t in inputs)
    # Fast finiteness screen: a non-finite entry poisons the sum.  The sum
    # can overflow on finite data, so only the full check may raise.
    with np.errstate(invalid="ignore", over="ignore"):
        screen = np.isfinite(out_data.sum())
    if not screen and not np.all(np.isfinite(out_data)):
        raise NonFiniteError(op_name, out_data)
    out = Tensor(out_data, requires_grad=out_requires)
    tape = _active_tape()
    if tape is not None and out_requires:
        tape.records.append(_Record(op_name, tuple(inputs), out, backward))
    return out


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (reverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# ---------------------------------------------------------------------------
# arithmetic


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return _record("add", (a, b), out, backward)


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data - b.data

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return _record("sub", (a, b), out, backward)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data

    def backward(g):
        return (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        )

    return _record("mul", (a, b), out, backward)


def scale(a, c):
    a = _as_tensor(a)
    c = float(c)
    out = a.data * c

    def backward(g):
        return (g * c,)

    return _record("scale", (a,), out, backward)


def neg(a):
    return scale(a, -1.0)


def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return _record("matmul", (a, b), out, backward)


def transpose(a):
    a = _as_tensor(a)
    if a.ndim != 2:
        raise ValueError("transpose expects a 2-D tensor")
    out = a.data.T.copy()

    def backward(g):
        return (g.T,)

    return _record("transpose", (a,), out, backward)


def reshape(a, shape):
    a = _as_tensor(a)
    out = a.data.reshape(shape)
    old_shape = a.data.shape

    def backward(g):
        return (g.reshape(old_shape),)

    return _record("reshape", (a,), out, backward)


def concat(tensors, axis=0):
    ts = [_as_tensor(t) for t in tensors]
    if not ts:
        raise ValueError("concat of an empty sequence")
    out = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return _record("concat", tuple(ts), out, backward)


def take(a, indices, axis=0):
    """Gather rows (or columns) by integer index; duplicates allowed."""
    a = _as_tensor(a)
    idx = np.asarray(indices, dtype=np.intp)
    out = np.take(a.data, idx, axis=axis)
    in_shape = a.data.shape

    def backward(g):
        ga = np.zeros(in_shape, dtype=np.float64)
        if axis == 0:
            np.add.at(ga, idx, g)
        else:
            np.add.at(np.swapaxes(ga, 0, axis), idx, np.swapaxes(g, 0, axis))
        return (ga,)

    return _record("take", (a,), out, backward)


def segment_sum(values, index, num_segments):
    """Sum rows of ``values`` into ``num_segments`` buckets given by ``index``."""
    v = _as_tensor(values)
    idx = np.asarray(index, dtype=np.intp)
    if idx.shape[0] != v.data.shape[0]:
        raise ValueError("segment index length must match the leading axis")
    out = np.zeros((num_segments,) + v.data.shape[1:], dtype=np.float64)
    np.add.at(out, idx, v.data)

    def backward(g):
        return (g[idx],)

    return _record("segment_sum", (v,), out, backward)


# ---------------------------------------------------------------------------
# nonlinearities


def relu(a):
    a = _as_tensor(a)
    out = np.maximum(a.data, 0.0)
    mask = a.data > 0.0  # subgradient at 0 is 0

    def backward(g):
        return (g * mask,)

    return _record("relu", (a,), out, backward)


def sigmoid(a):
    a = _as_tensor(a)
    # Stable in both tails.
    x = a.data
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def backward(g):
        return (g * out * (1.0 - out),)

    return _record("sigmoid", (a,), out, backward)


def tanh(a):
    a = _as_tensor(a)
    out = np.tanh(a.data)

    def backward(g):
        return (g * (1.0 - out * out),)

    return _record("tanh", (a,), out, backward)


def log(a):
    a = _as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(a.data)
    x = a.data

    def backward(g):
        return (g / x,)

    return _record("log", (a,), out, backward)


def softmax(a, axis=-1):
    a = _as_tensor(a)
    if a.data.shape == () or a.data.shape[axis] == 0:
        raise ValueError("softmax needs a non-empty axis")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - dot),)

    return _record("softmax", (a,), out, backward)


def log_softmax(a, axis=-1):
    a = _as_tensor(a)
    if a.data.shape == () or a.data.shape[axis] == 0:
        raise ValueError("log_softmax needs a non-empty axis")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    soft = np.exp(out)

    def backward(g):
        return (g - soft * g.sum(axis=axis, keepdims=True),)

    return _record("log_softmax", (a,), out, backward)


# ---------------------------------------------------------------------------
# reductions


def mean(a, axis=None):
    a = _as_tensor(a)
    out = a.data.mean(axis=axis)
    in_shape = a.data.shape
    count = a.data.size if axis is None else in_shape[axis]

    def backward(g):
        if axis is None:
            return (np.full(in_shape, g / count, dtype=np.float64),)
        return (np.expand_dims(g, axis).repeat(in_shape[axis], axis=axis) / count,)

    return _record("mean", (a,), out, backward)


def reduce_sum(a, axis=None):
    a = _as_tensor(a)
    out = a.data.sum(axis=axis)
    in_shape = a.data.shape

    def backward(g):
        if axis is None:
            return (np.full(in_shape, g, dtype=np.float64),)
        return (np.expand_dims(g, axis).repeat(in_shape[axis], axis=axis),)

    return _record("reduce_sum", (a,), out, backward)


def cosine_similarity(a, b):
    """Cosine of two 1-D vectors; zero-norm inputs yield 0 with zero gradient."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("cosine_similarity expects 1-D vectors")
    na = np.linalg.norm(a.data)
    nb = np.linalg.norm(b.data)
    if na == 0.0 or nb == 0.0:
        def backward_zero(g):
            return np.zeros_like(a.data), np.zeros_like(b.data)

        return _record("cosine_similarity", (a, b), np.float64(0.0), backward_zero)

    cos = float(a.data @ b.data) / (na * nb)
    av, bv = a.data, b.data

    def backward(g):
        ga = g * (bv / (na * nb) - cos * av / (na * na))
        gb = g * (av / (na * nb) - cos * bv / (nb * nb))
        return ga, gb

    return _record("cosine_similarity", (a, b), np.float64(cos), backward)


# ---------------------------------------------------------------------------
# gradient checking


@dataclass
class GradCheckCoord:
    param: str
    index: tuple
    analytic: float
    numeric: float
    rel_err: float


@dataclass
class GradCheckReport:
    ok: bool
    tol: float
    eps: float
    n_checked: int
    worst: GradCheckCoord | None
    failures: list = field(default_factory=list)

    def __str__(self):
        head = "PASS" if self.ok else "FAIL"
        if self.worst is None:
            return f"gradient check {head}: no coordinates checked"
        w = self.worst
        return (
            f"gradient check {head}: {self.n_checked} coords, worst "
            f"{w.param}{list(w.index)} rel_err={w.rel_err:.3e} "
            f"(analytic={w.analytic:.6e}, numeric={w.numeric:.6e})"
        )


def gradient_check(f, params, eps=1e-5, tol=1e-4, max_coords_per_param=None, seed=0):
    """Compare tape gradients of ``f()`` against central differences.

    ``f`` is a zero-argument callable evaluating the scalar computation from
    the current values of ``params`` (a name -> Tensor mapping).  It must be
    deterministic.  When ``max_coords_per_param`` is set, that many
    coordinates per parameter are sampled (seeded, reproducible); otherwise
    every coordinate is checked.
    """
    if not isinstance(params, dict):
        params = {f"p{i}": p for i, p in enumerate(params)}
    for p in params.values():
        p.zero_grad()
    with Tape() as tape:
        out = f()
        tape.backward(out)

    rng = np.random.default_rng(seed)
    worst = None
    failures = []
    n_checked = 0
    for name, p in params.items():
        grad = p.grad if p.grad is not None else np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords_per_param is not None and flat.size > max_coords_per_param:
            coords = rng.choice(flat.size, size=max_coords_per_param, replace=False)
            coords.sort()
        for c in coords:
            orig = flat[c]
            flat[c] = orig + eps
            up = float(f().data)
            flat[c] = orig - eps
            down = float(f().data)
            flat[c] = orig
            numeric = (up - down) / (2.0 * eps)
            analytic = float(grad.reshape(-1)[c])
            rel = abs(analytic - numeric) / max(1.0, abs(analytic))
            idx = np.unravel_index(c, p.data.shape)
            entry = GradCheckCoord(name, tuple(int(i) for i in idx), analytic, numeric, rel)
            n_checked += 1
            if worst is None or rel > worst.rel_err:
                worst = entry
            if rel > tol:
                failures.append(entry)
    return GradCheckReport(
        ok=not failures,
        tol=tol,
        eps=eps,
        n_checked=n_checked,
        worst=worst,
        failures=failures,
    )
