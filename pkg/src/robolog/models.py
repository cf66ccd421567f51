"""The three anomaly detectors behind one scoring interface.

- Logistic regression: full-batch gradient descent on mean binary
  cross-entropy, parameters initialized to zero.
- Linear soft-margin SVM: epoch-shuffled stochastic subgradient descent on
  0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b)), labels mapped to
  {-1, +1}, step size lr / (1 + lr * t / (C * N)) at global step t.
- Autoencoder: fully connected tanh/identity network trained with
  mini-batch gradient descent on mean squared reconstruction error; the
  classification threshold tau is a quantile of training errors.

Every score is oriented so that larger means more anomalous: probability
for LR, raw decision value for SVM, reconstruction error for the
autoencoder. Checkpoints are plain text: a kind line (lr|svm|ae), a dims
line, one comma-separated row-major line per parameter tensor, then
`c=...` / `threshold=...` where applicable.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset
from .errors import (
    CheckpointError, DimensionMismatch, DivergenceDetected, EmptyInput,
    SingleClassInput, UntrainedModel,
)
from .util import fmt_float


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 300
    batch_size: int = 32
    seed: int = 0
    c_param: float = 1.0
    threshold_quantile: float = 0.95

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.c_param <= 0:
            raise ValueError("c_param must be positive")
        if not 0.0 < self.threshold_quantile < 1.0:
            raise ValueError("threshold_quantile must lie in (0, 1)")


def sigmoid(z):
    """Numerically stable logistic function, elementwise on arrays."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out) if out.ndim == 0 else out


def _check_both_classes(labels):
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise EmptyInput("empty training set")
    if len(np.unique(labels)) < 2:
        raise SingleClassInput("training data contains a single class")


def _as_matrix(x, dim):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != dim:
        raise DimensionMismatch(f"expected {dim} features, got {x.shape[1]}")
    return x, single


# --- logistic regression (weighted-sum + logistic link) ---

@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float


def logistic_loss(model, features, labels):
    """Mean binary cross-entropy, computed via log(1 + e^z) - y*z."""
    z = features @ model.weights + model.bias
    return float(np.mean(np.logaddexp(0.0, z) - labels * z))


def train_logistic(train: LabeledDataset, cfg: TrainConfig) -> LogisticModel:
    _check_both_classes(train.labels)
    X = np.asarray(train.features, dtype=float)
    y = np.asarray(train.labels, dtype=float)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(cfg.epochs):
        p = sigmoid(X @ w + b)
        err = p - y
        w = w - cfg.learning_rate * (X.T @ err) / n
        b = b - cfg.learning_rate * float(np.mean(err))
        if not (np.isfinite(w).all() and math.isfinite(b)):
            raise DivergenceDetected("logistic training diverged")
    return LogisticModel(weights=w, bias=b)


def predict_proba(model: LogisticModel, x):
    xm, single = _as_matrix(x, len(model.weights))
    p = sigmoid(xm @ model.weights + model.bias)
    return float(p[0]) if single else p


# --- linear soft-margin SVM ---

@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    c_param: float = 1.0


def linear_kernel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"kernel inputs differ: {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


def svm_objective(model, features, labels_pm):
    margins = labels_pm * (features @ model.weights + model.bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * float(np.dot(model.weights, model.weights)) + model.c_param * float(hinge.sum())


def train_svm(train: LabeledDataset, cfg: TrainConfig) -> SvmModel:
    _check_both_classes(train.labels)
    X = np.asarray(train.features, dtype=float)
    y = np.where(np.asarray(train.labels) == 1, 1.0, -1.0)
    n, d = X.shape
    C = cfg.c_param
    lr = cfg.learning_rate
    w = np.zeros(d)
    b = 0.0
    rng = np.random.default_rng(cfg.seed)
    t = 0
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = lr / (1.0 + lr * t / (C * n))
            # per-sample subgradient of (0.5*||w||^2 + C*sum hinge) / n
            if y[i] * (X[i] @ w + b) < 1.0:
                w = w - eta * (w / n - C * y[i] * X[i])
                b = b + eta * C * y[i]
            else:
                w = w - eta * (w / n)
        if not (np.isfinite(w).all() and math.isfinite(b)):
            raise DivergenceDetected("svm training diverged")
    return SvmModel(weights=w, bias=b, c_param=C)


def decision_value(model: SvmModel, x):
    """Signed distance surrogate w.x + b; class 1 iff strictly positive."""
    xm, single = _as_matrix(x, len(model.weights))
    v = xm @ model.weights + model.bias
    return float(v[0]) if single else v


# --- autoencoder ---

@dataclass
class AutoencoderModel:
    layer_dims: tuple
    weights: list = field(default_factory=list)   # one (in, out) matrix per layer
    biases: list = field(default_factory=list)
    threshold: float | None = None                # tau; set after training

    def forward(self, x):
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == last else np.tanh(z)
        return h


def _validate_dims(dims):
    dims = tuple(int(d) for d in dims)
    if len(dims) < 3 or len(dims) % 2 == 0:
        raise ValueError("layer dims must be an odd-length encoder/decoder stack")
    if any(d < 1 for d in dims):
        raise ValueError("layer dims must be positive")
    if list(dims) != list(reversed(dims)):
        raise ValueError("encoder and decoder dims must mirror each other")
    return dims


def init_autoencoder(dims, rng) -> AutoencoderModel:
    dims = _validate_dims(dims)
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / math.sqrt(d_in)
        weights.append(rng.uniform(-bound, bound, size=(d_in, d_out)))
        biases.append(np.zeros(d_out))
    return AutoencoderModel(layer_dims=dims, weights=weights, biases=biases)


def autoencoder_gradients(model, batch):
    """Backpropagated mean-squared-error gradients for one batch."""
    acts = [batch]
    h = batch
    last = len(model.weights) - 1
    zs = []
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        zs.append(z)
        h = z if i == last else np.tanh(z)
        acts.append(h)
    n, d = batch.shape
    delta = 2.0 * (acts[-1] - batch) / (n * d)
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    for i in range(last, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (1.0 - np.tanh(zs[i - 1]) ** 2)
    return grads_w, grads_b


def reconstruction_errors(model: AutoencoderModel, x) -> np.ndarray:
    xm, _ = _as_matrix(x, model.layer_dims[0])
    diff = model.forward(xm) - xm
    return np.mean(diff * diff, axis=1)


def reconstruction_error(model: AutoencoderModel, x) -> float:
    xm, single = _as_matrix(x, model.layer_dims[0])
    errs = reconstruction_errors(model, xm)
    return float(errs[0]) if single else errs


def train_autoencoder(normals, cfg: TrainConfig, dims=None) -> AutoencoderModel:
    """Train on (standardized) normal rows only and set tau at the
    threshold_quantile of their final reconstruction errors."""
    X = np.asarray(normals, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("autoencoder needs a non-empty feature matrix")
    d = X.shape[1]
    if dims is None:
        dims = (d, 8, 4, 8, d)
    dims = _validate_dims(dims)
    if dims[0] != d:
        raise DimensionMismatch(f"dims[0]={dims[0]} but data has {d} features")
    rng = np.random.default_rng(cfg.seed)
    model = init_autoencoder(dims, rng)
    n = X.shape[0]
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        for s in range(0, n, cfg.batch_size):
            batch = X[perm[s:s + cfg.batch_size]]
            gw, gb = autoencoder_gradients(model, batch)
            for i in range(len(model.weights)):
                model.weights[i] -= cfg.learning_rate * gw[i]
                model.biases[i] -= cfg.learning_rate * gb[i]
        if not all(np.isfinite(w).all() for w in model.weights):
            raise DivergenceDetected("autoencoder training diverged")
    model.threshold = float(np.quantile(reconstruction_errors(model, X), cfg.threshold_quantile))
    return model


# --- common scoring interface ---

def score(model, x):
    """(score, predicted class) for one feature vector; higher score means
    more anomalous for every detector."""
    s = scores(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return float(s[0][0]), int(s[1][0])


def scores(model, X):
    """Vectorized (scores, predicted classes) for a feature matrix."""
    if isinstance(model, LogisticModel):
        p = predict_proba(model, X)
        p = np.atleast_1d(p)
        return p, (p > 0.5).astype(int)
    if isinstance(model, SvmModel):
        v = np.atleast_1d(decision_value(model, X))
        return v, (v > 0.0).astype(int)
    if isinstance(model, AutoencoderModel):
        if model.threshold is None:
            raise UntrainedModel("autoencoder threshold not set; train first")
        e = reconstruction_errors(model, X)
        return e, (e > model.threshold).astype(int)
    raise TypeError(f"unknown model type {type(model).__name__}")


# --- checkpoints ---

def _tensor_line(a):
    return ",".join(fmt_float(v) for v in np.asarray(a, dtype=float).ravel())


def save_model(model, path):
    lines = []
    if isinstance(model, LogisticModel):
        lines = ["lr", f"dims={len(model.weights)}",
                 _tensor_line(model.weights), _tensor_line([model.bias])]
    elif isinstance(model, SvmModel):
        lines = ["svm", f"dims={len(model.weights)}",
                 _tensor_line(model.weights), _tensor_line([model.bias]),
                 f"c={fmt_float(model.c_param)}"]
    elif isinstance(model, AutoencoderModel):
        if model.threshold is None:
            raise UntrainedModel("cannot checkpoint an autoencoder without tau")
        lines = ["ae", "dims=" + ",".join(str(d) for d in model.layer_dims)]
        for w, b in zip(model.weights, model.biases):
            lines.append(_tensor_line(w))
            lines.append(_tensor_line(b))
        lines.append(f"threshold={fmt_float(model.threshold)}")
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_floats(line, what):
    try:
        return np.array([float(p) for p in line.split(",")])
    except ValueError as exc:
        raise CheckpointError(f"bad {what} line: {exc}") from None


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln != ""]
    if len(lines) < 2 or not lines[1].startswith("dims="):
        raise CheckpointError("expected a kind line followed by a dims line")
    kind = lines[0]
    dims = [int(p) for p in lines[1][len("dims="):].split(",")]
    body = lines[2:]
    if kind == "lr":
        if len(body) != 2:
            raise CheckpointError("lr checkpoint needs weights and bias lines")
        w = _parse_floats(body[0], "weights")
        if len(w) != dims[0]:
            raise CheckpointError(f"expected {dims[0]} weights, got {len(w)}")
        return LogisticModel(weights=w, bias=float(_parse_floats(body[1], "bias")[0]))
    if kind == "svm":
        if len(body) != 3 or not body[2].startswith("c="):
            raise CheckpointError("svm checkpoint needs weights, bias and c= lines")
        w = _parse_floats(body[0], "weights")
        if len(w) != dims[0]:
            raise CheckpointError(f"expected {dims[0]} weights, got {len(w)}")
        return SvmModel(weights=w, bias=float(_parse_floats(body[1], "bias")[0]),
                        c_param=float(body[2][2:]))
    if kind == "ae":
        n_layers = len(dims) - 1
        if len(body) != 2 * n_layers + 1 or not body[-1].startswith("threshold="):
            raise CheckpointError("ae checkpoint layer lines or threshold= missing")
        model = AutoencoderModel(layer_dims=_validate_dims(dims))
        for i in range(n_layers):
            w = _parse_floats(body[2 * i], f"layer {i} weights")
            if len(w) != dims[i] * dims[i + 1]:
                raise CheckpointError(f"layer {i}: expected {dims[i] * dims[i + 1]} weights")
            model.weights.append(w.reshape(dims[i], dims[i + 1]))
            b = _parse_floats(body[2 * i + 1], f"layer {i} bias")
            if len(b) != dims[i + 1]:
                raise CheckpointError(f"layer {i}: expected {dims[i + 1]} biases")
            model.biases.append(b)
        model.threshold = float(body[-1][len("threshold="):])
        return model
    raise CheckpointError(f"unknown model kind {kind!r}")
