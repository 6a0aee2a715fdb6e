"""
Dense & Stacked-LSTM Networks
=============================
From-scratch numpy networks for sin/cos torsion targets.

Architectures:
    DNN1   3 dense layers                          (input = flattened window)
    DNN2   6 dense layers
    LSTMk  k stacked LSTM layers -> 2 dense -> output (input = window as sequence)

Hidden dense layers use ReLU, every output layer uses tanh. Dropout is
inverted and sits after each hidden dense layer. All arrays are float64.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, model_validator
from scipy.special import expit
from sklearn.metrics import mean_absolute_error, mean_squared_error

from angle_codec import decode_angles
from residue_encoder import WIDTH

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
# name -> (dense layers incl. output, stacked LSTM layers)
ARCHITECTURES = {
    'DNN1':  (3, 0),
    'DNN2':  (6, 0),
    'LSTM1': (3, 1),
    'LSTM2': (3, 2),
    'LSTM3': (3, 4),
    'LSTM4': (3, 8),
    'LSTM5': (3, 64),
}
MODEL_NAMES = list(ARCHITECTURES)
DEFAULT_HIDDEN_WIDTH = 32
FORGET_BIAS = 1.0


class ShapeError(ValueError):
    """Array shapes do not conform."""


class NonFiniteError(ValueError):
    """NaN or Inf appeared in a forward or backward pass."""


class Activation(str, Enum):
    RELU = 'relu'
    TANH = 'tanh'
    IDENTITY = 'identity'


class ModelSpec(BaseModel):
    name: str
    dense_layers: int
    lstm_layers: int
    hidden_width: int = DEFAULT_HIDDEN_WIDTH
    output_width: int = 4
    window_size: int = 7

    @model_validator(mode='after')
    def _matches_architecture(self) -> 'ModelSpec':
        if self.name not in ARCHITECTURES:
            raise ValueError(f"unknown model {self.name!r}; choose from {MODEL_NAMES}")
        dense, lstm = ARCHITECTURES[self.name]
        if self.dense_layers != dense:
            raise ValueError(f"{self.name} has {dense} dense layers, got {self.dense_layers}")
        if (lstm == 0) != (self.lstm_layers == 0):
            raise ValueError(f"{self.name}: lstm_layers={self.lstm_layers} does not fit the architecture")
        if self.output_width not in (2, 4):
            raise ValueError("output_width must be 2 or 4")
        if self.hidden_width < 1 or self.window_size < 1:
            raise ValueError("hidden_width and window_size must be positive")
        return self

    @property
    def is_recurrent(self) -> bool:
        return self.lstm_layers > 0

    @property
    def hidden_dense(self) -> int:
        return self.dense_layers - 1

    @property
    def input_width(self) -> int:
        return WIDTH if self.is_recurrent else self.window_size * WIDTH


@dataclass
class Model:
    spec: ModelSpec
    params: dict[str, np.ndarray]

    @property
    def lstm_names(self) -> list[str]:
        return [f"lstm{i}" for i in range(self.spec.lstm_layers)]

    @property
    def dense_names(self) -> list[str]:
        return [f"dense{i}" for i in range(self.spec.hidden_dense)]

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def copy(self) -> 'Model':
        return Model(self.spec.model_copy(), {k: v.copy() for k, v in self.params.items()})


@dataclass(frozen=True)
class LossReport:
    mse: float
    rmse: float
    mae: float
    n: int


# ------------------------------------------------------------------
# Primitive layers
# ------------------------------------------------------------------
def _activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    if activation is Activation.TANH:
        return np.tanh(z)
    return z


def _activation_grad(z: np.ndarray, out: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return (z > 0.0).astype(np.float64)
    if activation is Activation.TANH:
        return 1.0 - out ** 2
    return np.ones_like(z)


def dense_forward(weights, bias, inputs, activation=Activation.IDENTITY) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    inputs = np.asarray(inputs, dtype=np.float64)
    if weights.ndim != 2 or inputs.shape[-1] != weights.shape[0] \
            or bias.shape != (weights.shape[1],):
        raise ShapeError(f"input {inputs.shape} x weights {weights.shape} + bias {bias.shape}")
    return _activate(inputs @ weights + bias, Activation(activation))


def _gates(z: np.ndarray, hidden: int):
    i = expit(z[..., :hidden])
    f = expit(z[..., hidden:2 * hidden])
    o = expit(z[..., 2 * hidden:3 * hidden])
    g = np.tanh(z[..., 3 * hidden:])
    return i, f, o, g


def lstm_step(params, input_t, hidden_prev, cell_prev):
    """One LSTM step. params = (W, b) with W: (in + H, 4H) in gate order
    input, forget, output, candidate."""
    weights, bias = (np.asarray(p, dtype=np.float64) for p in params)
    input_t = np.asarray(input_t, dtype=np.float64)
    hidden_prev = np.asarray(hidden_prev, dtype=np.float64)
    cell_prev = np.asarray(cell_prev, dtype=np.float64)
    hidden = hidden_prev.shape[-1]
    if weights.shape != (input_t.shape[-1] + hidden, 4 * hidden) \
            or bias.shape != (4 * hidden,) or cell_prev.shape != hidden_prev.shape:
        raise ShapeError(f"input {input_t.shape}, hidden {hidden_prev.shape}, "
                         f"cell {cell_prev.shape} do not fit W {weights.shape}, b {bias.shape}")

    xh = np.concatenate([input_t, hidden_prev], axis=-1)
    i, f, o, g = _gates(xh @ weights + bias, hidden)
    cell_t = f * cell_prev + i * g
    hidden_t = o * np.tanh(cell_t)
    return hidden_t, cell_t


# ------------------------------------------------------------------
# Construction
# ------------------------------------------------------------------
def build_model(name: str, output_width: int, hidden_width: int = DEFAULT_HIDDEN_WIDTH,
                seed: int = 0, lstm_layers: int | None = None,
                window_size: int = 7) -> Model:
    """lstm_layers overrides the stacked depth, e.g. LSTM5 as one layer of 64 units."""
    if name not in ARCHITECTURES:
        raise ValueError(f"unknown model {name!r}; choose from {MODEL_NAMES}")
    dense, depth = ARCHITECTURES[name]
    spec = ModelSpec(
        name=name,
        dense_layers=dense,
        lstm_layers=depth if lstm_layers is None else lstm_layers,
        hidden_width=hidden_width,
        output_width=output_width,
        window_size=window_size,
    )
    rng = np.random.default_rng(seed)
    H = spec.hidden_width
    params: dict[str, np.ndarray] = {}

    fan_in = spec.input_width
    for i in range(spec.lstm_layers):
        scale = 1.0 / np.sqrt(H)
        params[f"lstm{i}.W"] = rng.uniform(-scale, scale, size=(fan_in + H, 4 * H))
        bias = np.zeros(4 * H)
        bias[H:2 * H] = FORGET_BIAS
        params[f"lstm{i}.b"] = bias
        fan_in = H

    for i in range(spec.hidden_dense):
        scale = 1.0 / np.sqrt(fan_in)
        params[f"dense{i}.W"] = rng.uniform(-scale, scale, size=(fan_in, H))
        params[f"dense{i}.b"] = np.zeros(H)
        fan_in = H

    scale = 1.0 / np.sqrt(fan_in)
    params['out.W'] = rng.uniform(-scale, scale, size=(fan_in, spec.output_width))
    params['out.b'] = np.zeros(spec.output_width)
    return Model(spec, params)


def make_dropout_masks(model: Model, batch_size: int, rate: float,
                       rng: np.random.Generator) -> list[np.ndarray] | None:
    """Inverted-dropout masks, one per hidden dense layer."""
    if rate <= 0.0:
        return None
    keep = 1.0 - rate
    H = model.spec.hidden_width
    return [(rng.random((batch_size, H)) < keep) / keep for _ in model.dense_names]


# ------------------------------------------------------------------
# Forward / backward
# ------------------------------------------------------------------
def _prepare_inputs(model: Model, batch_inputs) -> np.ndarray:
    X = np.asarray(batch_inputs, dtype=np.float64)
    spec = model.spec
    if spec.is_recurrent:
        if X.ndim != 3 or X.shape[2] != WIDTH:
            raise ShapeError(f"{spec.name} expects (B, w, {WIDTH}) inputs, got {X.shape}")
        return X
    if X.ndim == 3:
        X = X.reshape(X.shape[0], X.shape[1] * X.shape[2])
    if X.ndim != 2 or X.shape[1] != spec.input_width:
        raise ShapeError(f"{spec.name} expects (B, {spec.input_width}) inputs, got {X.shape}")
    return X


def _lstm_layer_forward(W, b, X):
    B, T, _ = X.shape
    H = b.shape[0] // 4
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    outputs = np.zeros((B, T, H))
    steps = []
    for t in range(T):
        xh = np.concatenate([X[:, t], h], axis=1)
        i, f, o, g = _gates(xh @ W + b, H)
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        outputs[:, t] = h
        steps.append((xh, i, f, o, g, c_prev, tanh_c))
    return outputs, steps


def _lstm_layer_backward(W, dH, steps, input_dim):
    B, T, H = dH.shape
    dW = np.zeros_like(W)
    db = np.zeros(W.shape[1])
    dX = np.zeros((B, T, input_dim))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in reversed(range(T)):
        xh, i, f, o, g, c_prev, tanh_c = steps[t]
        dh = dH[:, t] + dh_next
        do = dh * tanh_c
        dc = dc_next + dh * o * (1.0 - tanh_c ** 2)
        dz = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            do * o * (1.0 - o),
            dc * i * (1.0 - g ** 2),
        ], axis=1)
        dW += xh.T @ dz
        db += dz.sum(axis=0)
        dxh = dz @ W.T
        dX[:, t] = dxh[:, :input_dim]
        dh_next = dxh[:, input_dim:]
        dc_next = dc * f
    return dX, dW, db


def _forward(model: Model, X: np.ndarray, masks):
    p = model.params
    cache = {'lstm': [], 'dense': []}
    a = X
    if model.spec.is_recurrent:
        for name in model.lstm_names:
            out, steps = _lstm_layer_forward(p[f"{name}.W"], p[f"{name}.b"], a)
            cache['lstm'].append((a.shape[2], steps))
            a = out
        cache['seq_shape'] = a.shape
        a = a[:, -1]

    for k, name in enumerate(model.dense_names):
        z = a @ p[f"{name}.W"] + p[f"{name}.b"]
        out = np.maximum(z, 0.0)
        mask = None if masks is None else masks[k]
        cache['dense'].append((a, z, mask))
        a = out if mask is None else out * mask

    z = a @ p['out.W'] + p['out.b']
    pred = np.tanh(z)
    cache['out'] = (a, pred)
    return pred, cache


def _backward(model: Model, dP: np.ndarray, cache) -> dict[str, np.ndarray]:
    p = model.params
    grads: dict[str, np.ndarray] = {}

    a, pred = cache['out']
    dz = dP * (1.0 - pred ** 2)
    grads['out.W'] = a.T @ dz
    grads['out.b'] = dz.sum(axis=0)
    da = dz @ p['out.W'].T

    for name, (a_in, z, mask) in reversed(list(zip(model.dense_names, cache['dense']))):
        if mask is not None:
            da = da * mask
        dz = da * _activation_grad(z, None, Activation.RELU)
        grads[f"{name}.W"] = a_in.T @ dz
        grads[f"{name}.b"] = dz.sum(axis=0)
        da = dz @ p[f"{name}.W"].T

    if model.spec.is_recurrent:
        dH = np.zeros(cache['seq_shape'])
        dH[:, -1] = da
        for name, (input_dim, steps) in reversed(list(zip(model.lstm_names, cache['lstm']))):
            dH, dW, db = _lstm_layer_backward(p[f"{name}.W"], dH, steps, input_dim)
            grads[f"{name}.W"] = dW
            grads[f"{name}.b"] = db

    return {k: grads[k] for k in p}


def forward(model: Model, batch_inputs, masks=None) -> np.ndarray:
    """Predictions (B, output_width) in (-1, 1). Dropout only when masks are given."""
    X = _prepare_inputs(model, batch_inputs)
    pred, _ = _forward(model, X, masks)
    if not np.all(np.isfinite(pred)):
        raise NonFiniteError("non-finite prediction")
    return pred


def loss_report(predictions, targets) -> LossReport:
    P = np.asarray(predictions, dtype=np.float64).ravel()
    Y = np.asarray(targets, dtype=np.float64).ravel()
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Y))):
        raise NonFiniteError("non-finite value in loss")
    mse = float(mean_squared_error(Y, P))
    return LossReport(
        mse=mse,
        rmse=float(np.sqrt(mse)),
        mae=float(mean_absolute_error(Y, P)),
        n=int(np.asarray(targets).shape[0]),
    )


def loss_and_gradients(model: Model, batch_inputs, targets, masks=None):
    """MSE over every output component and its gradient for every parameter."""
    X = _prepare_inputs(model, batch_inputs)
    Y = np.asarray(targets, dtype=np.float64)
    if X.shape[0] == 0:
        raise ShapeError("loss_and_gradients needs a non-empty batch")
    if Y.shape != (X.shape[0], model.spec.output_width):
        raise ShapeError(f"targets {Y.shape} do not match ({X.shape[0]}, {model.spec.output_width})")

    pred, cache = _forward(model, X, masks)
    report = loss_report(pred, Y)
    grads = _backward(model, 2.0 * (pred - Y) / pred.size, cache)
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"non-finite gradient for {name}")
    return report, grads


def _relu_pattern(cache) -> list[np.ndarray]:
    return [z > 0 for _, z, _ in cache['dense']]


def gradient_check(model: Model, batch_inputs, targets, eps: float = 1e-5,
                   masks=None) -> float:
    """Max relative error between analytic and central-difference gradients.

    Coordinates whose +/- eps perturbation switches a ReLU unit on or off
    are skipped.
    """
    _, analytic = loss_and_gradients(model, batch_inputs, targets, masks)
    X = _prepare_inputs(model, batch_inputs)
    base = _relu_pattern(_forward(model, X, masks)[1])
    worst = 0.0
    for name, param in model.params.items():
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + eps
            pred_plus, cache_plus = _forward(model, X, masks)
            param[idx] = original - eps
            pred_minus, cache_minus = _forward(model, X, masks)
            param[idx] = original
            if not all(np.array_equal(b, p) and np.array_equal(b, m) for b, p, m in
                       zip(base, _relu_pattern(cache_plus), _relu_pattern(cache_minus))):
                continue
            plus = loss_report(pred_plus, targets).mse
            minus = loss_report(pred_minus, targets).mse
            numeric = (plus - minus) / (2.0 * eps)
            a = analytic[name][idx]
            error = abs(a - numeric) / max(abs(a), abs(numeric), 1e-5)
            worst = max(worst, error)
    return worst


def predict_angles(model: Model, batch_inputs) -> np.ndarray:
    """Degrees, shape (B, output_width // 2); columns phi, psi in BOTH mode."""
    pred = forward(model, batch_inputs)
    return decode_angles(pred[:, 0::2], pred[:, 1::2])
