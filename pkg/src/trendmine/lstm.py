"""A small LSTM forecaster built on numpy: one recurrent layer unrolled over a
fixed input window, a linear head, full-batch gradient descent on MSE with
gradient-norm clipping, and a finite-difference gradient checker.

Everything is float64 and seeded, so training is bit-reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

GATES = ("i", "f", "o", "g")   # input, forget, output, candidate


@dataclass
class LstmConfig:
    window: int = 4
    hidden: int = 16
    lr: float = 0.05
    epochs: int = 500
    clip_norm: float = 1.0


@dataclass
class LstmModel:
    config: LstmConfig
    # per gate: input weight (H,), recurrent weights (H, H), bias (H,)
    wx: dict[str, np.ndarray]
    wh: dict[str, np.ndarray]
    b: dict[str, np.ndarray]
    w_out: np.ndarray              # (H,)
    b_out: float
    seed: int
    loss_history: list[float] = field(default_factory=list)

    def params(self) -> list[tuple[str, np.ndarray]]:
        """Named parameter tensors in a fixed order (bias scalars as 0-d views)."""
        out: list[tuple[str, np.ndarray]] = []
        for g in GATES:
            out += [(f"wx_{g}", self.wx[g]), (f"wh_{g}", self.wh[g]), (f"b_{g}", self.b[g])]
        out.append(("w_out", self.w_out))
        return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def init_model(config: LstmConfig, seed: int) -> LstmModel:
    rng = np.random.default_rng(seed)
    h = config.hidden
    wx = {g: rng.normal(0.0, 0.2, size=h) for g in GATES}
    wh = {g: rng.normal(0.0, 0.2, size=(h, h)) for g in GATES}
    b = {g: np.zeros(h) for g in GATES}
    b["f"] += 1.0                      # forget gate open at init
    w_out = rng.normal(0.0, 0.2, size=h)
    return LstmModel(config=config, wx=wx, wh=wh, b=b, w_out=w_out, b_out=0.0, seed=seed)


def _forward(model: LstmModel, X: np.ndarray):
    """Unroll over the window for a batch of inputs X (B, W); returns the
    predictions and the per-step tensors the backward pass needs."""
    B, W = X.shape
    h_dim = model.config.hidden
    h = np.zeros((B, h_dim))
    c = np.zeros((B, h_dim))
    steps = []
    for t in range(W):
        x_t = X[:, t]
        pre = {g: np.outer(x_t, model.wx[g]) + h @ model.wh[g].T + model.b[g] for g in GATES}
        i_g = _sigmoid(pre["i"])
        f_g = _sigmoid(pre["f"])
        o_g = _sigmoid(pre["o"])
        g_g = np.tanh(pre["g"])
        c_new = f_g * c + i_g * g_g
        tanh_c = np.tanh(c_new)
        h_new = o_g * tanh_c
        steps.append({"x": x_t, "h_prev": h, "c_prev": c,
                      "i": i_g, "f": f_g, "o": o_g, "g": g_g,
                      "c": c_new, "tanh_c": tanh_c})
        h, c = h_new, c_new
    y_hat = h @ model.w_out + model.b_out
    return y_hat, h, steps


def predict(model: LstmModel, X: np.ndarray) -> np.ndarray:
    y_hat, _, _ = _forward(model, np.atleast_2d(np.asarray(X, dtype=np.float64)))
    return y_hat


def mse_loss(model: LstmModel, X: np.ndarray, y: np.ndarray, scale: float = 1.0) -> float:
    y_hat, _, _ = _forward(model, X)
    return scale * float(np.mean((y_hat - y) ** 2))


def mse_gradients(model: LstmModel, X: np.ndarray, y: np.ndarray,
                  scale: float = 1.0) -> tuple[float, dict[str, np.ndarray], float]:
    """Backpropagation through time for scale * mean((y_hat - y)^2).

    Returns (loss, gradients keyed like ``model.params()``, d_loss/d_b_out).
    """
    y_hat, h_final, steps = _forward(model, X)
    B = len(y)
    diff = y_hat - y
    loss = scale * float(np.mean(diff ** 2))
    d_yhat = scale * 2.0 * diff / B

    grads = {name: np.zeros_like(p) for name, p in model.params()}
    grads["w_out"] = h_final.T @ d_yhat
    d_b_out = float(np.sum(d_yhat))

    dh = np.outer(d_yhat, model.w_out)
    dc = np.zeros_like(h_final)
    for step in reversed(steps):
        o_g, tanh_c = step["o"], step["tanh_c"]
        i_g, f_g, g_g = step["i"], step["f"], step["g"]
        dc = dc + dh * o_g * (1.0 - tanh_c ** 2)
        d_pre = {
            "o": dh * tanh_c * o_g * (1.0 - o_g),
            "i": dc * g_g * i_g * (1.0 - i_g),
            "g": dc * i_g * (1.0 - g_g ** 2),
            "f": dc * step["c_prev"] * f_g * (1.0 - f_g),
        }
        dh_prev = np.zeros_like(dh)
        for g in GATES:
            grads[f"wx_{g}"] += d_pre[g].T @ step["x"]
            grads[f"wh_{g}"] += d_pre[g].T @ step["h_prev"]
            grads[f"b_{g}"] += d_pre[g].sum(axis=0)
            dh_prev += d_pre[g] @ model.wh[g]
        dh = dh_prev
        dc = dc * f_g
    return loss, grads, d_b_out


def make_windows(values: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Sliding windows of length ``window`` predicting the following value."""
    v = np.asarray(values, dtype=np.float64)
    n = len(v) - window
    if n < 1:
        raise DataError(f"series of length {len(v)} too short for window {window}")
    X = np.stack([v[i:i + window] for i in range(n)])
    return X, v[window:]


def train_lstm(values: list[float] | np.ndarray, config: LstmConfig, seed: int) -> LstmModel:
    """Full-batch gradient descent on MSE over sliding windows.

    ``values`` must already be scaled to [-1, 1] (min-max over the history);
    see :func:`minmax_scale`. Deterministic for a given seed.
    """
    v = np.asarray(values, dtype=np.float64)
    if len(v) < config.window + 2:
        raise DataError(
            f"series of length {len(v)} too short to train (need >= window+2 = {config.window + 2})")
    X, y = make_windows(v, config.window)
    model = init_model(config, seed)
    for _ in range(config.epochs):
        loss, grads, d_b_out = mse_gradients(model, X, y)
        model.loss_history.append(loss)
        total = float(np.sqrt(sum(float(np.sum(g ** 2)) for g in grads.values()) + d_b_out ** 2))
        factor = config.clip_norm / total if total > config.clip_norm else 1.0
        for g in GATES:
            model.wx[g] -= config.lr * factor * grads[f"wx_{g}"]
            model.wh[g] -= config.lr * factor * grads[f"wh_{g}"]
            model.b[g] -= config.lr * factor * grads[f"b_{g}"]
        model.w_out -= config.lr * factor * grads["w_out"]
        model.b_out -= config.lr * factor * d_b_out
    final = mse_loss(model, X, y)
    model.loss_history.append(final)
    if model.loss_history and final >= model.loss_history[0]:
        log.warning("training did not reduce loss (%.3g -> %.3g)", model.loss_history[0], final)
    return model


def lstm_gradient_check(model: LstmModel, X: np.ndarray, y: np.ndarray,
                        step: float = 1e-5) -> float:
    """Max relative error between analytic and central finite-difference
    gradients, with relative error |a - n| / max(1, |a|, |n|) so near-zero
    gradients compare on an absolute scale."""
    _, grads, d_b_out = mse_gradients(model, X, y)
    worst = 0.0

    def rel(a: float, n: float) -> float:
        return abs(a - n) / max(1.0, abs(a), abs(n))

    for name, tensor in model.params():
        flat = tensor.reshape(-1)
        g_flat = grads[name].reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            up = mse_loss(model, X, y)
            flat[idx] = orig - step
            down = mse_loss(model, X, y)
            flat[idx] = orig
            numeric = (up - down) / (2.0 * step)
            worst = max(worst, rel(float(g_flat[idx]), numeric))
    orig = model.b_out
    model.b_out = orig + step
    up = mse_loss(model, X, y)
    model.b_out = orig - step
    down = mse_loss(model, X, y)
    model.b_out = orig
    worst = max(worst, rel(d_b_out, (up - down) / (2.0 * step)))
    return worst


def minmax_scale(values: list[float] | np.ndarray) -> tuple[np.ndarray, tuple[float, float]]:
    """Map the series to [-1, 1]; a constant series maps to all zeros."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi - lo < 1e-12:
        return np.zeros_like(v), (lo, hi)
    return 2.0 * (v - lo) / (hi - lo) - 1.0, (lo, hi)


def minmax_invert(scaled: np.ndarray, scale: tuple[float, float]) -> np.ndarray:
    lo, hi = scale
    if hi - lo < 1e-12:
        return np.full_like(np.asarray(scaled, dtype=np.float64), lo)
    return lo + (np.asarray(scaled, dtype=np.float64) + 1.0) * (hi - lo) / 2.0


def rollout(model: LstmModel, scaled_history: np.ndarray, horizon: int) -> np.ndarray:
    """Autoregressive forecast in scaled space: each prediction feeds the next
    window. Returns ``horizon`` scaled values."""
    window = list(np.asarray(scaled_history, dtype=np.float64)[-model.config.window:])
    if len(window) < model.config.window:
        raise DataError("history shorter than the model window")
    out = []
    for _ in range(horizon):
        nxt = float(predict(model, np.asarray(window))[0])
        out.append(nxt)
        window = window[1:] + [nxt]
    return np.asarray(out)
