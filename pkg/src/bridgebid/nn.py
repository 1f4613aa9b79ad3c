"""Dense feedforward networks with identity skips, written against numpy.

A network has ``hidden_layers`` ReLU layers of equal width.  The first one
maps the input to the hidden width; after that, every ``skip_every``
layers the block's input is added to its output before the activation.
Two heads exist: 52 independent sigmoids trained with summed binary
cross-entropy (partner-hand estimation) and a 38-way softmax trained with
negative log-likelihood (bidding policy).
"""
from __future__ import annotations

import logging
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

log = logging.getLogger(__name__)

SIGMOID_52 = "sigmoid_52"
SOFTMAX_38 = "softmax_38"
HEADS = {SIGMOID_52: 52, SOFTMAX_38: 38}
EPS = 1e-12

PRESETS = {
    "enn-full": (8, 1500),
    "pnn-full": (10, 1200),
    "desk": (4, 256),
}

MAGIC = b"BBMLP\x00"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class MlpArchitecture:
    input_dim: int
    hidden_layers: int
    hidden_width: int
    skip_every: int = 2
    output: str = SOFTMAX_38

    def __post_init__(self):
        if self.output not in HEADS:
            raise ValueError(f"unknown head {self.output!r}")
        if min(self.input_dim, self.hidden_layers, self.hidden_width) <= 0:
            raise ValueError("dimensions must be positive")
        if self.skip_every < 0:
            raise ValueError("skip_every must be >= 0")

    @property
    def output_dim(self) -> int:
        return HEADS[self.output]

    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [(self.input_dim, self.hidden_width)]
        dims += [(self.hidden_width, self.hidden_width)] * (self.hidden_layers - 1)
        dims.append((self.hidden_width, self.output_dim))
        return dims

    def skips_at(self, layer: int) -> bool:
        """Does hidden layer ``layer`` (0-based) close a skip block?"""
        k = self.skip_every
        return k > 0 and 1 <= layer < self.hidden_layers and layer % k == 0 and layer >= k

    @classmethod
    def preset(cls, name: str, input_dim: int, output: str, skip_every: int = 2) -> "MlpArchitecture":
        layers, width = PRESETS[name]
        return cls(input_dim, layers, width, skip_every, output)


class MlpModel:
    """Weights ``W[l]`` of shape (fan_in, fan_out) and biases ``b[l]``."""

    def __init__(self, arch: MlpArchitecture, weights: Sequence[np.ndarray],
                 biases: Sequence[np.ndarray]):
        self.arch = arch
        self.W = [np.asarray(w) for w in weights]
        self.b = [np.asarray(b) for b in biases]
        dims = arch.layer_dims()
        if len(self.W) != len(dims) or len(self.b) != len(dims):
            raise ValueError("layer count does not match architecture")
        for (i, o), w, b in zip(dims, self.W, self.b):
            if w.shape != (i, o) or b.shape != (o,):
                raise ValueError(f"bad layer shape {w.shape}/{b.shape}, expected {(i, o)}")

    @classmethod
    def init(cls, arch: MlpArchitecture, rng: np.random.Generator, dtype=np.float32) -> "MlpModel":
        """Fan-in scaled uniform init; biases start at zero."""
        weights, biases = [], []
        dims = arch.layer_dims()
        for l, (i, o) in enumerate(dims):
            gain = 3.0 if l == len(dims) - 1 else 6.0
            lim = np.sqrt(gain / i)
            weights.append(rng.uniform(-lim, lim, size=(i, o)).astype(dtype))
            biases.append(np.zeros(o, dtype=dtype))
        return cls(arch, weights, biases)

    @classmethod
    def zeros(cls, arch: MlpArchitecture, dtype=np.float64) -> "MlpModel":
        dims = arch.layer_dims()
        return cls(arch, [np.zeros(d, dtype=dtype) for d in dims],
                   [np.zeros(d[1], dtype=dtype) for d in dims])

    @property
    def dtype(self):
        return self.W[0].dtype

    def params(self) -> list[np.ndarray]:
        """Parameters in file order: per layer, bias then weights."""
        out = []
        for w, b in zip(self.W, self.b):
            out += [b, w]
        return out

    def copy(self) -> "MlpModel":
        return MlpModel(self.arch, [w.copy() for w in self.W], [b.copy() for b in self.b])

    def astype(self, dtype) -> "MlpModel":
        return MlpModel(self.arch, [w.astype(dtype) for w in self.W], [b.astype(dtype) for b in self.b])

    def n_params(self) -> int:
        return sum(p.size for p in self.params())

    # -- forward / backward -------------------------------------------------

    def _check_input(self, X):
        X = np.asarray(X)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.arch.input_dim:
            raise ValueError(f"expected input width {self.arch.input_dim}, got shape {X.shape}")
        return X.astype(self.dtype, copy=False), single

    def _hidden(self, X, keep: bool):
        zs, hs = [], []
        h = X
        block_in = None
        k = self.arch.skip_every
        for l in range(self.arch.hidden_layers):
            z = h @ self.W[l] + self.b[l]
            if self.arch.skips_at(l):
                z += block_in
            h = np.maximum(z, 0)
            if k > 0 and l % k == 0:
                block_in = h
            if keep:
                zs.append(z)
                hs.append(h)
        return h, zs, hs

    def logits(self, X) -> np.ndarray:
        X, single = self._check_input(X)
        h, _, _ = self._hidden(X, False)
        out = h @ self.W[-1] + self.b[-1]
        return out[0] if single else out

    def forward(self, X) -> np.ndarray:
        """Head probabilities for one input vector or a batch of rows."""
        z = self.logits(X)
        p = _sigmoid(z) if self.arch.output == SIGMOID_52 else _softmax(z)
        if not np.all(np.isfinite(p)):
            raise FloatingPointError("non-finite network output")
        return p

    def loss_and_grad(self, X, target, mask=None, weights=None, need_grad: bool = True):
        """Weighted summed loss and its exact gradient.

        ``target`` is a (n, 52) 0/1 matrix for the sigmoid head or a vector
        of labels for the softmax head.  ``mask`` (softmax only, n x 38
        booleans) restricts the normalization to legal bids, giving the
        log-probability of the renormalized distribution.  ``weights``
        scales each row's loss.  The gradient has the shape of ``params()``.
        """
        X, single = self._check_input(X)
        n = X.shape[0]
        h, zs, hs = self._hidden(X, need_grad)
        z = h @ self.W[-1] + self.b[-1]
        w = np.ones(n, dtype=self.dtype) if weights is None else np.asarray(weights, dtype=self.dtype).reshape(n)
        if self.arch.output == SIGMOID_52:
            t = np.asarray(target, dtype=self.dtype).reshape(n, -1)
            per = np.sum(np.logaddexp(0, z) - t * z, axis=1)
            dz = _sigmoid(z) - t
        else:
            labels = np.asarray(target, dtype=np.intp).reshape(n)
            if mask is not None:
                m = np.asarray(mask, dtype=bool).reshape(n, -1)
                if not m[np.arange(n), labels].all():
                    raise ValueError("label outside the mask")
                zm = np.where(m, z, -np.inf)
            else:
                zm = z
            top = zm.max(axis=1, keepdims=True)
            e = np.exp(zm - top)
            s = e.sum(axis=1, keepdims=True)
            per = (np.log(s[:, 0]) + top[:, 0]) - z[np.arange(n), labels]
            dz = e / s
            dz[np.arange(n), labels] -= 1
        loss = float(np.dot(w, per))
        if not need_grad:
            return loss, None
        dz *= w[:, None]
        return loss, self._backward(X, zs, hs, dz)

    def _backward(self, X, zs, hs, dz):
        L = self.arch.hidden_layers
        gW = [None] * (L + 1)
        gb = [None] * (L + 1)
        gW[L] = hs[L - 1].T @ dz
        gb[L] = dz.sum(axis=0)
        dh = [None] * L
        dh[L - 1] = dz @ self.W[L].T
        k = self.arch.skip_every
        for l in range(L - 1, -1, -1):
            d = dh[l] * (zs[l] > 0)
            below = hs[l - 1] if l > 0 else X
            gW[l] = below.T @ d
            gb[l] = d.sum(axis=0)
            if l > 0:
                back = d @ self.W[l].T
                dh[l - 1] = back if dh[l - 1] is None else dh[l - 1] + back
                if self.arch.skips_at(l):
                    j = l - k
                    dh[j] = d.copy() if dh[j] is None else dh[j] + d
        grads = []
        for l in range(L + 1):
            grads += [gb[l], gW[l]]
        return grads

    def set_params(self, flat: Sequence[np.ndarray]):
        flat = list(flat)
        for l in range(len(self.W)):
            self.b[l] = np.asarray(flat[2 * l], dtype=self.dtype).reshape(self.b[l].shape)
            self.W[l] = np.asarray(flat[2 * l + 1], dtype=self.dtype).reshape(self.W[l].shape)

    # -- persistence -------------------------------------------------------

    def to_bytes(self) -> bytes:
        a = self.arch
        head = MAGIC + struct.pack("<IIIIIIB", FORMAT_VERSION, a.input_dim, a.hidden_layers,
                                   a.hidden_width, a.skip_every, list(HEADS).index(a.output),
                                   0 if self.dtype == np.float32 else 1)
        body = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in self.params())
        data = head + body
        return data + struct.pack("<I", zlib.crc32(data))

    @classmethod
    def from_bytes(cls, data: bytes) -> "MlpModel":
        if not data.startswith(MAGIC):
            raise ValueError("not a network weight file")
        (crc,) = struct.unpack("<I", data[-4:])
        if zlib.crc32(data[:-4]) != crc:
            raise ValueError("weight file checksum mismatch")
        off = len(MAGIC)
        version, ind, layers, width, skip, head, dt = struct.unpack_from("<IIIIIIB", data, off)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported weight file version {version}")
        off += struct.calcsize("<IIIIIIB")
        arch = MlpArchitecture(ind, layers, width, skip, list(HEADS)[head])
        dtype = np.float32 if dt == 0 else np.float64
        values = np.frombuffer(data[off:-4], dtype="<f8")
        weights, biases = [], []
        pos = 0
        for i, o in arch.layer_dims():
            biases.append(values[pos:pos + o].astype(dtype))
            pos += o
            weights.append(values[pos:pos + i * o].reshape(i, o).astype(dtype))
            pos += i * o
        if pos != values.size:
            raise ValueError("weight file length does not match its header")
        return cls(arch, weights, biases)

    def save(self, path):
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "MlpModel":
        return cls.from_bytes(Path(path).read_bytes())


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _softmax(z):
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: MlpModel, x) -> np.ndarray:
    return model.forward(x)


def enn_loss(output, target) -> float:
    o = np.clip(np.asarray(output, dtype=np.float64), EPS, 1 - EPS)
    t = np.asarray(target, dtype=np.float64)
    return float(-np.sum(t * np.log(o) + (1 - t) * np.log(1 - o)))


def pnn_loss(output, label: int) -> float:
    return float(-np.log(max(float(np.asarray(output)[label]), EPS)))


def backward(model: MlpModel, x, target, mask=None) -> list[np.ndarray]:
    """Gradient of the model's head loss summed over the rows of ``x``."""
    return model.loss_and_grad(x, target, mask=mask)[1]


# -- optimization --------------------------------------------------------------

@dataclass
class OptimizerState:
    method: str = "adam"
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def __post_init__(self):
        if self.method not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.method!r}")

    @classmethod
    def for_model(cls, model: MlpModel, method: str = "adam", lr: float = 1e-4) -> "OptimizerState":
        st = cls(method=method, lr=lr)
        if method == "adam":
            st.m = [np.zeros_like(p) for p in model.params()]
            st.v = [np.zeros_like(p) for p in model.params()]
        return st


def apply_update(model: MlpModel, opt: OptimizerState, direction: Sequence[np.ndarray],
                 scale: float) -> bool:
    """Move parameters by ``lr * scale * direction`` (Adam-normalized if set).

    ``scale = -1`` with a loss gradient is a descent step; a reward with a
    log-probability gradient is an ascent step.  Returns False and leaves
    everything untouched when the update is not finite.
    """
    params = model.params()
    if len(direction) != len(params) or any(d.shape != p.shape for d, p in zip(direction, params)):
        raise ValueError("direction does not match parameter shapes")
    u = [scale * np.asarray(d, dtype=model.dtype) for d in direction]
    if not all(np.all(np.isfinite(x)) for x in u):
        log.warning("skipping non-finite update")
        return False
    if opt.method == "sgd":
        new = [p + opt.lr * x for p, x in zip(params, u)]
    else:
        t = opt.step + 1
        m = [opt.beta1 * a + (1 - opt.beta1) * x for a, x in zip(opt.m, u)]
        v = [opt.beta2 * a + (1 - opt.beta2) * x * x for a, x in zip(opt.v, u)]
        c1 = 1 - opt.beta1 ** t
        c2 = 1 - opt.beta2 ** t
        new = [p + (opt.lr * (a / c1) / (np.sqrt(b / c2) + opt.eps)).astype(model.dtype)
               for p, a, b in zip(params, m, v)]
        opt.m, opt.v = m, v
    opt.step += 1
    model.set_params(new)
    return True


# -- estimator facade ----------------------------------------------------------

class NetworkEstimator(BaseEstimator, ClassifierMixin):
    """Mini-batch trainer around :class:`MlpModel` with early stopping.

    ``head="softmax_38"`` expects integer labels (optionally with a legal
    mask passed to ``fit``); ``head="sigmoid_52"`` expects (n, 52) 0/1
    targets and ``predict`` returns the top-13 card mask.
    """

    def __init__(self, head=SOFTMAX_38, hidden_layers=4, hidden_width=256, skip_every=2,
                 optimizer="adam", learning_rate=1e-4, batch_size=256, max_epochs=20,
                 patience=3, dtype="float32", random_state=0):
        self.head = head
        self.hidden_layers = hidden_layers
        self.hidden_width = hidden_width
        self.skip_every = skip_every
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.dtype = dtype
        self.random_state = random_state

    def _init_model(self, input_dim):
        arch = MlpArchitecture(input_dim, self.hidden_layers, self.hidden_width, self.skip_every,
                               self.head)
        rng = np.random.default_rng(self.random_state)
        self.model_ = MlpModel.init(arch, rng, dtype=np.dtype(self.dtype))
        self.opt_ = OptimizerState.for_model(self.model_, self.optimizer, self.learning_rate)
        self.history_ = []
        self._shuffle_rng = np.random.default_rng([self.random_state, 1])

    def partial_fit(self, X, y):
        """One pass over ``(X, y)`` in shuffled mini-batches; returns self."""
        if not hasattr(self, "model_"):
            self._init_model(np.asarray(X).shape[1])
        self._epoch(X, y)
        return self

    def _epoch(self, X, y):
        n = len(X)
        order = self._shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, self.batch_size):
            idx = order[start:start + self.batch_size]
            loss, grad = self.model_.loss_and_grad(X[idx], y[idx])
            apply_update(self.model_, self.opt_, grad, -1.0 / len(idx))
            total += loss
        return total / max(n, 1)

    def fit(self, X, y, X_val=None, y_val=None):
        """Train until the validation loss stops improving for ``patience`` epochs."""
        X = np.asarray(X)
        y = np.asarray(y)
        if len(X) == 0:
            raise ValueError("empty training set")
        self._init_model(X.shape[1])
        best = np.inf
        best_params = None
        stale = 0
        for epoch in range(self.max_epochs):
            train_loss = self._epoch(X, y)
            val_loss = self.loss(X_val, y_val) if X_val is not None and len(X_val) else train_loss
            self.history_.append((epoch, train_loss, val_loss))
            log.info("epoch %d train %.5f val %.5f", epoch, train_loss, val_loss)
            if val_loss < best - 1e-7:
                best = val_loss
                best_params = [p.copy() for p in self.model_.params()]
                stale = 0
            else:
                stale += 1
                if stale >= self.patience:
                    break
        if best_params is not None:
            self.model_.set_params(best_params)
        return self

    def loss(self, X, y, chunk=4096) -> float:
        """Mean per-row loss."""
        total = 0.0
        for s in range(0, len(X), chunk):
            total += self.model_.loss_and_grad(X[s:s + chunk], y[s:s + chunk], need_grad=False)[0]
        return total / max(len(X), 1)

    def predict_proba(self, X, chunk=4096) -> np.ndarray:
        X = np.asarray(X)
        return np.concatenate([self.model_.forward(X[s:s + chunk]) for s in range(0, len(X), chunk)])

    def predict(self, X) -> np.ndarray:
        p = self.predict_proba(X)
        if self.head == SOFTMAX_38:
            return p.argmax(axis=1)
        return top_k_mask(p, 13)

    def score(self, X, y, sample_weight=None) -> float:
        """Top-1 accuracy (softmax) or mean top-13 overlap / 13 (sigmoid)."""
        pred = self.predict(X)
        y = np.asarray(y)
        if self.head == SOFTMAX_38:
            return float(np.mean(pred == y))
        return float(np.mean((pred * y).sum(axis=1) / 13.0))


def top_k_mask(p: np.ndarray, k: int) -> np.ndarray:
    """0/1 mask of the ``k`` largest entries per row, ties to the lower index."""
    p = np.atleast_2d(p)
    order = np.lexsort((np.broadcast_to(np.arange(p.shape[1]), p.shape), -p), axis=1)[:, :k]
    out = np.zeros(p.shape, dtype=np.uint8)
    np.put_along_axis(out, order, 1, axis=1)
    return out
