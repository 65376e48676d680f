"""Small fully-connected network trained by full-batch gradient descent.

The production architecture is 7-13-1-1: tanh on both hidden layers, linear
output (the Bures-discord label ranges over [0, 2], which a tanh output could
not represent). Dropout acts on the first hidden layer only, with one fresh
mask per epoch; model selection keeps the epoch with minimal validation cost.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

DEFAULT_LAYER_SIZES = (7, 13, 1, 1)
DEFAULT_ACTIVATIONS = ("tanh", "tanh", "linear")


class ShapeMismatchError(ValueError):
    """Input vector does not match the network input size."""


class DivergenceDetectedError(RuntimeError):
    """Training loss became non-finite; carries the history so far."""

    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


class ChecksumMismatchError(ValueError):
    """Checkpoint content does not match its recorded checksum."""


@dataclass
class Network:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: tuple[str, ...]


@dataclass
class TrainConfig:
    epochs: int = 100_000
    learning_rate: float = 0.005
    dropout_rate: float = 0.1
    seed: int = 0
    decay_epochs: tuple[int, ...] = (30_000, 60_000)
    decay_factor: float = 0.5

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")


def init(
    seed: int,
    layer_sizes: tuple[int, ...] = DEFAULT_LAYER_SIZES,
    activations: tuple[str, ...] = DEFAULT_ACTIVATIONS,
) -> Network:
    """Uniform zero-mean weights with variance 1/fan_in, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
        bound = np.sqrt(3.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(
        layer_sizes=tuple(layer_sizes),
        weights=weights,
        biases=biases,
        activations=tuple(activations),
    )


def _act(name: str, z: np.ndarray) -> np.ndarray:
    return np.tanh(z) if name == "tanh" else z


def _act_deriv(name: str, a: np.ndarray) -> np.ndarray:
    return 1.0 - a * a if name == "tanh" else np.ones_like(a)


def _forward_batch(
    net: Network,
    x: np.ndarray,
    train_mode: bool = False,
    dropout_mask: "np.ndarray | None" = None,
    dropout_rate: float = 0.0,
) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """Batch outputs plus per-layer inputs and pre-dropout activations.

    ``inputs[l]`` feeds layer l (dropout already applied), while ``raw[l]``
    is layer l's activation before dropout; the latter is what activation
    derivatives must be taken at.
    """
    inputs = [x]
    raw = []
    a = x
    for layer, (w, b, name) in enumerate(zip(net.weights, net.biases, net.activations)):
        a = _act(name, a @ w.T + b)
        raw.append(a)
        if layer == 0 and train_mode and dropout_mask is not None and dropout_rate > 0:
            a = a * dropout_mask / (1.0 - dropout_rate)
        inputs.append(a)
    return inputs[-1][:, 0], inputs, raw


def forward(
    net: Network,
    x: np.ndarray,
    train_mode: bool = False,
    dropout_mask: "np.ndarray | None" = None,
    dropout_rate: float = 0.0,
) -> tuple[float, list[np.ndarray]]:
    """Scalar output and cached activations for one input vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.layer_sizes[0],):
        raise ShapeMismatchError(
            f"expected input of shape ({net.layer_sizes[0]},), got {x.shape}"
        )
    y, inputs, _ = _forward_batch(
        net, x[None, :], train_mode=train_mode,
        dropout_mask=dropout_mask, dropout_rate=dropout_rate,
    )
    return float(y[0]), inputs


def loss(net: Network, x: np.ndarray, y: np.ndarray) -> float:
    """Summed squared error over the batch (no dropout)."""
    pred, _, _ = _forward_batch(net, np.asarray(x, dtype=float))
    return float(np.sum((pred - np.asarray(y, dtype=float)) ** 2))


def evaluate(net: Network, x: np.ndarray, y: np.ndarray) -> float:
    """Mean squared error over the batch (no dropout)."""
    return loss(net, x, y) / len(y)


def backprop(
    net: Network,
    x: np.ndarray,
    y: np.ndarray,
    dropout_mask: "np.ndarray | None" = None,
    dropout_rate: float = 0.0,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact gradients of the summed squared error under the given mask."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    train_mode = dropout_mask is not None and dropout_rate > 0
    pred, inputs, raw = _forward_batch(
        net, x, train_mode=train_mode,
        dropout_mask=dropout_mask, dropout_rate=dropout_rate,
    )
    n_layers = len(net.weights)
    grad_w = [None] * n_layers
    grad_b = [None] * n_layers
    delta = 2.0 * (pred - y)[:, None] * _act_deriv(net.activations[-1], raw[-1])
    for layer in range(n_layers - 1, -1, -1):
        grad_w[layer] = delta.T @ inputs[layer]
        grad_b[layer] = delta.sum(axis=0)
        if layer == 0:
            break
        upstream = delta @ net.weights[layer]
        if layer - 1 == 0 and train_mode:
            upstream = upstream * dropout_mask / (1.0 - dropout_rate)
        delta = upstream * _act_deriv(net.activations[layer - 1], raw[layer - 1])
    return grad_w, grad_b


def train(
    net: Network,
    train_xy: tuple[np.ndarray, np.ndarray],
    val_xy: tuple[np.ndarray, np.ndarray],
    cfg: TrainConfig,
) -> tuple[Network, list[tuple[int, float, float]]]:
    """Full-batch gradient descent; returns the minimal-validation snapshot.

    Steps follow the gradient of the mean squared error (the summed-error
    gradient divided by the batch size), so the learning rate does not need
    retuning with the corpus size. One fresh dropout mask per epoch; history
    records eval-mode train and validation MSE after each update. Raises
    :class:`DivergenceDetectedError` if the loss leaves the finite range.
    """
    net = copy.deepcopy(net)
    x_tr, y_tr = train_xy
    x_va, y_va = val_xy
    rng = np.random.default_rng(cfg.seed)
    hidden = net.layer_sizes[1]
    lr = cfg.learning_rate
    scale = 1.0 / len(y_tr)
    history: list[tuple[int, float, float]] = []
    best_val = np.inf
    best_net = copy.deepcopy(net)
    for epoch in range(1, cfg.epochs + 1):
        if epoch in cfg.decay_epochs:
            lr *= cfg.decay_factor
        mask = None
        if cfg.dropout_rate > 0:
            mask = (rng.random(hidden) >= cfg.dropout_rate).astype(float)
        grad_w, grad_b = backprop(
            net, x_tr, y_tr, dropout_mask=mask, dropout_rate=cfg.dropout_rate
        )
        for w, b, gw, gb in zip(net.weights, net.biases, grad_w, grad_b):
            w -= lr * scale * gw
            b -= lr * scale * gb
        train_mse = evaluate(net, x_tr, y_tr)
        val_mse = evaluate(net, x_va, y_va)
        history.append((epoch, train_mse, val_mse))
        if not (np.isfinite(train_mse) and np.isfinite(val_mse)):
            raise DivergenceDetectedError(
                f"non-finite loss at epoch {epoch}", history
            )
        if val_mse < best_val:
            best_val = val_mse
            best_net = copy.deepcopy(net)
    return best_net, history


def save(net: Network, path, config: "TrainConfig | None" = None) -> None:
    """Text checkpoint; floats survive a round trip bitwise."""
    payload = {
        "layer_sizes": list(net.layer_sizes),
        "activations": list(net.activations),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "config": _config_dict(config),
    }
    payload["sha256"] = _digest(payload)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load(path) -> Network:
    with open(path) as fh:
        payload = json.load(fh)
    recorded = payload.pop("sha256", None)
    if recorded is None or _digest(payload) != recorded:
        raise ChecksumMismatchError(f"corrupt checkpoint {path}")
    return Network(
        layer_sizes=tuple(payload["layer_sizes"]),
        weights=[np.array(w) for w in payload["weights"]],
        biases=[np.array(b) for b in payload["biases"]],
        activations=tuple(payload["activations"]),
    )


def _config_dict(config: "TrainConfig | None"):
    if config is None:
        return None
    d = asdict(config)
    d["decay_epochs"] = list(d["decay_epochs"])
    return d


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
