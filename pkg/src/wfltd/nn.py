"""Small fully connected networks with hand-written reverse-mode gradients.

Parameters of every network live in one flat float64 vector; the weight and
bias arrays are views into it, so optimizers and target updates work on the
flat vector directly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Diagnostics

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
STD_FLOOR = 1e-3


def softplus(x):
    return np.logaddexp(0.0, x)


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class Mlp:
    """ReLU multilayer perceptron ``sizes[0] -> ... -> sizes[-1]``.

    Hidden weights use uniform fan-in initialisation; the output layer starts
    at zero so every head produces the transform of 0 before training.
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None, zero_last: bool = True):
        self.sizes = tuple(int(n) for n in sizes)
        if len(self.sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.shapes = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            self.shapes += [(fan_in, fan_out), (fan_out,)]
        self.params = np.zeros(sum(int(np.prod(s)) for s in self.shapes))
        self._bind()
        rng = np.random.default_rng() if rng is None else rng
        n_layers = len(self.sizes) - 1
        for i in range(n_layers):
            if zero_last and i == n_layers - 1:
                continue
            bound = 1.0 / math.sqrt(self.sizes[i])
            self.weights[i][...] = rng.uniform(-bound, bound, size=self.weights[i].shape)
            self.biases[i][...] = rng.uniform(-bound, bound, size=self.biases[i].shape)

    def _bind(self):
        self.weights, self.biases = [], []
        offset = 0
        for k, shape in enumerate(self.shapes):
            n = int(np.prod(shape))
            view = self.params[offset:offset + n].reshape(shape)
            (self.weights if k % 2 == 0 else self.biases).append(view)
            offset += n

    def __getstate__(self):
        # views would be copied as independent arrays; rebuild them instead
        state = self.__dict__.copy()
        del state["weights"], state["biases"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._bind()

    @property
    def n_params(self) -> int:
        return self.params.size

    def set_params(self, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != self.params.shape:
            raise ValueError(f"expected {self.params.shape} parameters, got {flat.shape}")
        self.params[...] = flat

    def forward(self, x):
        """Return the raw output and the activations needed by :meth:`backward`."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.sizes[0]:
            raise ValueError(f"input dimension {x.shape[1]} != {self.sizes[0]}")
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        return h, acts

    def backward(self, acts, grad_out) -> np.ndarray:
        """Gradient of ``sum(grad_out * output)`` w.r.t. the flat parameter vector."""
        grad = np.empty_like(self.params)
        pieces = []
        g = np.asarray(grad_out, dtype=np.float64)
        for i in range(len(self.weights) - 1, -1, -1):
            pieces.append((acts[i].T @ g, g.sum(axis=0)))
            if i > 0:
                g = (g @ self.weights[i].T) * (acts[i] > 0.0)
        offset = 0
        for gW, gb in reversed(pieces):
            grad[offset:offset + gW.size] = gW.ravel()
            offset += gW.size
            grad[offset:offset + gb.size] = gb
            offset += gb.size
        return grad

    def spec(self) -> dict:
        return {"sizes": list(self.sizes), "shapes": [list(s) for s in self.shapes]}


class ValueHead:
    """State-value network whose output sign is fixed by construction.

    ``sign=+1``: ``V = softplus(out) > 0`` (reward branch).
    ``sign=-1``: ``V = -softplus(out) < 0`` (punishment branch).
    """

    def __init__(self, obs_dim: int, hidden=(100, 100), sign: int = 1, rng=None):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.sign = sign
        self.net = Mlp((obs_dim, *hidden, 1), rng=rng)

    @property
    def params(self):
        return self.net.params

    def value(self, s, params=None) -> np.ndarray:
        if params is not None:
            return self._with(params, self.value, s)
        out, _ = self.net.forward(s)
        return self.sign * softplus(out[:, 0])

    def forward(self, s):
        """Values plus the cache consumed by :meth:`backward`."""
        out, acts = self.net.forward(s)
        o = out[:, 0]
        return self.sign * softplus(o), (o, acts)

    def backward(self, cache, upstream) -> np.ndarray:
        """Gradient of ``sum(upstream * V(s))`` w.r.t. the parameters."""
        o, acts = cache
        g = (self.sign * sigmoid(o) * np.asarray(upstream, dtype=np.float64))[:, None]
        return self.net.backward(acts, g)

    def value_and_grad(self, s, upstream):
        v, cache = self.forward(s)
        return v, self.backward(cache, upstream)

    def _with(self, params, fn, *args):
        saved = self.net.params.copy()
        self.net.set_params(params)
        try:
            return fn(*args)
        finally:
            self.net.set_params(saved)


@dataclass
class GaussianOutput:
    mean: np.ndarray
    std: np.ndarray
    raw: np.ndarray
    acts: list


class GaussianPolicyHead:
    """Diagonal Gaussian policy with a tanh-bounded mean and softplus standard deviation."""

    def __init__(self, obs_dim: int, act_low, act_high, hidden=(100, 100), rng=None):
        self.act_low = np.atleast_1d(np.asarray(act_low, dtype=np.float64))
        self.act_high = np.atleast_1d(np.asarray(act_high, dtype=np.float64))
        self.act_dim = self.act_low.size
        self._center = 0.5 * (self.act_high + self.act_low)
        self._half = 0.5 * (self.act_high - self.act_low)
        self.net = Mlp((obs_dim, *hidden, 2 * self.act_dim), rng=rng)

    @property
    def params(self):
        return self.net.params

    def distribution(self, s) -> GaussianOutput:
        raw, acts = self.net.forward(s)
        k = self.act_dim
        mean = self._center + self._half * np.tanh(raw[:, :k])
        std = softplus(raw[:, k:]) + STD_FLOOR
        return GaussianOutput(mean, std, raw, acts)

    def clip(self, a, diagnostics: Diagnostics | None = None):
        a = np.asarray(a, dtype=np.float64)
        clipped = np.clip(a, self.act_low, self.act_high)
        if diagnostics is not None:
            diagnostics.clipped_actions += int(np.count_nonzero(clipped != a))
        return clipped

    @staticmethod
    def log_density(dist: GaussianOutput, a) -> np.ndarray:
        z = (np.atleast_2d(a) - dist.mean) / dist.std
        return np.sum(-0.5 * z * z - np.log(dist.std) - LOG_SQRT_2PI, axis=1)

    def log_prob(self, s, a, diagnostics: Diagnostics | None = None) -> np.ndarray:
        return self.log_density(self.distribution(s), self.clip(a, diagnostics))

    def log_prob_and_grad(self, s, a, upstream=None, diagnostics: Diagnostics | None = None):
        """Log-densities of ``a`` and the gradient of ``sum(upstream * log pi(a|s))``.

        ``upstream`` may be a callable mapping the log-densities to the
        per-sample coefficients. Actions outside the action box are evaluated
        at the clipped boundary.
        """
        a = self.clip(np.atleast_2d(a), diagnostics)
        dist = self.distribution(s)
        logp = self.log_density(dist, a)
        if callable(upstream):
            upstream = upstream(logp)
        c = np.ones(logp.shape) if upstream is None else np.asarray(upstream, dtype=np.float64)
        diff = a - dist.mean
        var = dist.std ** 2
        d_mean = diff / var
        d_std = diff * diff / (var * dist.std) - 1.0 / dist.std
        k = self.act_dim
        t = np.tanh(dist.raw[:, :k])
        g_raw = np.empty_like(dist.raw)
        g_raw[:, :k] = d_mean * self._half * (1.0 - t * t)
        g_raw[:, k:] = d_std * sigmoid(dist.raw[:, k:])
        g_raw *= c[:, None]
        return logp, self.net.backward(dist.acts, g_raw)


class Adam:
    """Adam on a flat parameter vector with optional decoupled weight decay."""

    def __init__(self, n_params: int, lr: float = 1e-3, betas=(0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.0):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0
        self._buf = np.empty(n_params)

    def step(self, params: np.ndarray, grads: np.ndarray, diagnostics: Diagnostics | None = None) -> np.ndarray:
        """Update ``params`` in place (descent on ``grads``) and return it.

        Non-finite gradients skip the step entirely.
        """
        if grads.shape != params.shape:
            raise ValueError("gradient shape does not match parameters")
        if not math.isfinite(float(np.add.reduce(grads))):
            if diagnostics is not None:
                diagnostics.nonfinite_grads += 1
            return params
        self.t += 1
        buf = self._buf
        self.m *= self.beta1
        np.multiply(grads, 1.0 - self.beta1, out=buf)
        self.m += buf
        self.v *= self.beta2
        np.multiply(grads, grads, out=buf)
        buf *= 1.0 - self.beta2
        self.v += buf
        # bias corrections folded into the step size; same update as m_hat / (sqrt(v_hat) + eps)
        c2 = math.sqrt(1.0 - self.beta2 ** self.t)
        step_size = self.lr * c2 / (1.0 - self.beta1 ** self.t)
        np.sqrt(self.v, out=buf)
        buf += self.eps * c2
        np.divide(self.m, buf, out=buf)
        buf *= step_size
        if self.weight_decay:
            params *= 1.0 - self.lr * self.weight_decay
        params -= buf
        return params

    def state_arrays(self) -> dict:
        return {"m": self.m, "v": self.v}


class Sgd:
    """Plain gradient descent; used where an update must be checked against a hand-rolled rule."""

    def __init__(self, n_params: int, lr: float = 1e-3):
        self.lr = lr
        self.t = 0
        self.m = np.zeros(0)
        self.v = np.zeros(0)

    def step(self, params: np.ndarray, grads: np.ndarray, diagnostics: Diagnostics | None = None) -> np.ndarray:
        if grads.shape != params.shape:
            raise ValueError("gradient shape does not match parameters")
        if not math.isfinite(float(np.add.reduce(grads))):
            if diagnostics is not None:
                diagnostics.nonfinite_grads += 1
            return params
        self.t += 1
        params -= self.lr * grads
        return params


OPTIMIZERS = {"adam": Adam, "sgd": Sgd}


class TargetNetwork:
    """Polyak-averaged shadow copy of a parameter vector."""

    def __init__(self, online: np.ndarray, tau: float = 0.01, out: np.ndarray | None = None):
        if not 0.0 < tau <= 1.0:
            raise ValueError("tau must be in (0, 1]")
        self.tau = tau
        if out is None:
            self.params = np.array(online, dtype=np.float64, copy=True)
        else:
            # shadow lives in a caller-owned buffer, e.g. another network's parameters
            out[...] = online
            self.params = out

    def update(self, online: np.ndarray) -> None:
        self.params *= 1.0 - self.tau
        self.params += self.tau * online


def save_checkpoint(path, blocks: dict, meta: dict | None = None) -> None:
    """Write ``blocks`` (name -> 1-d float array) as one little-endian float64 file.

    A JSON sidecar ``<path>.json`` records each block's offset, length and
    optional layer shapes (pass ``meta["shapes"][name]``).
    """
    path = Path(path)
    index, offset, chunks = {}, 0, []
    shapes = (meta or {}).get("shapes", {})
    for name, arr in blocks.items():
        arr = np.ascontiguousarray(arr, dtype="<f8").ravel()
        index[name] = {"offset": offset, "length": int(arr.size)}
        if name in shapes:
            index[name]["layers"] = shapes[name]
        chunks.append(arr)
        offset += arr.size
    flat = np.concatenate(chunks) if chunks else np.zeros(0, dtype="<f8")
    path.write_bytes(flat.astype("<f8").tobytes())
    sidecar = {"format": "float64-le", "blocks": index}
    sidecar.update({k: v for k, v in (meta or {}).items() if k != "shapes"})
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`: returns ``(blocks, sidecar)``."""
    path = Path(path)
    sidecar = json.loads(Path(str(path) + ".json").read_text())
    flat = np.frombuffer(path.read_bytes(), dtype="<f8")
    blocks = {}
    for name, entry in sidecar["blocks"].items():
        blocks[name] = flat[entry["offset"]:entry["offset"] + entry["length"]].astype(np.float64)
    return blocks, sidecar
