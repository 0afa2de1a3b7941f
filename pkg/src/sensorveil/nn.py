"""Dense feed-forward network engine with manual backprop and Adam.

All arithmetic is float64 numpy; with a fixed seed every training run is
bit-reproducible. The engine knows five activations (linear, selu, tanh,
sigmoid, softmax), inverted dropout, an L2 weight penalty, and the loss
functions needed by the transformation models: mean squared error,
categorical cross-entropy, an identity-confidence penalty, and a weighted
composite of the three.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .fsio import write_bytes

SELU_ALPHA = 1.6732632423543772
SELU_LAMBDA = 1.0507009873554805

# probabilities are clamped to [PROB_EPS, 1 - PROB_EPS] before any log
PROB_EPS = 1e-7

ACTIVATIONS = ("linear", "selu", "tanh", "sigmoid", "softmax")


class ShapeError(ValueError):
    """Array dimensions do not match the network contract."""


class FormatError(ValueError):
    """Malformed or unsupported model container."""


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""


# ---------------------------------------------------------------------------
# network structure

@dataclass
class Layer:
    weights: np.ndarray  # [out, in]
    bias: np.ndarray     # [out]
    activation: str

    def copy(self) -> "Layer":
        return Layer(self.weights.copy(), self.bias.copy(), self.activation)


@dataclass
class DenseNet:
    layers: list[Layer]

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[0]

    def copy(self) -> "DenseNet":
        return DenseNet([layer.copy() for layer in self.layers])

    def n_params(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def validate(self) -> None:
        for k, layer in enumerate(self.layers):
            if layer.activation not in ACTIVATIONS:
                raise ValueError(f"unknown activation {layer.activation!r}")
            if layer.bias.shape != (layer.weights.shape[0],):
                raise ShapeError(f"layer {k}: bias shape {layer.bias.shape} "
                                 f"does not match weights {layer.weights.shape}")
            if k > 0 and layer.weights.shape[1] != self.layers[k - 1].weights.shape[0]:
                raise ShapeError(f"layer {k}: input dim {layer.weights.shape[1]} does not "
                                 f"chain with previous output {self.layers[k-1].weights.shape[0]}")

    def finite(self) -> bool:
        return all(np.isfinite(l.weights).all() and np.isfinite(l.bias).all()
                   for l in self.layers)


def build_net(sizes, activations, rng) -> DenseNet:
    """Build a net with fan-balanced uniform init (limit sqrt(6/(fi+fo))).

    sizes: layer widths including input, e.g. [8, 16, 4]; activations: one
    per weight layer (len(sizes) - 1).
    """
    if len(activations) != len(sizes) - 1:
        raise ValueError("need one activation per weight layer")
    layers = []
    for fan_in, fan_out, act in zip(sizes[:-1], sizes[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(Layer(w, np.zeros(fan_out), act))
    net = DenseNet(layers)
    net.validate()
    return net


# ---------------------------------------------------------------------------
# forward / backward

def _softmax(z):
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _activate(kind, z):
    if kind == "linear":
        return z
    if kind == "selu":
        return np.where(z > 0, SELU_LAMBDA * z, SELU_LAMBDA * SELU_ALPHA * np.expm1(z))
    if kind == "tanh":
        return np.tanh(z)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if kind == "softmax":
        return _softmax(z)
    raise ValueError(f"unknown activation {kind!r}")


def _activation_backward(kind, z, a, d_a):
    """Gradient w.r.t. pre-activation z given gradient w.r.t. activation a."""
    if kind == "linear":
        return d_a
    if kind == "selu":
        return d_a * np.where(z > 0, SELU_LAMBDA, SELU_LAMBDA * SELU_ALPHA * np.exp(z))
    if kind == "tanh":
        return d_a * (1.0 - a * a)
    if kind == "sigmoid":
        return d_a * a * (1.0 - a)
    if kind == "softmax":
        # rowwise Jacobian-vector product: dz_i = a_i * (d_i - sum_j d_j a_j)
        dot = (d_a * a).sum(axis=1, keepdims=True)
        return a * (d_a - dot)
    raise ValueError(f"unknown activation {kind!r}")


@dataclass
class ForwardCache:
    inputs: list      # per layer: activation fed in (post-dropout of previous)
    preacts: list     # per layer: z
    outputs: list     # per layer: activation before dropout
    masks: list       # per layer: dropout mask (scale folded in) or None
    batch_size: int


def forward(net: DenseNet, batch, mode: str = "infer", rng=None, dropout_rate: float = 0.0):
    """Run the net on a batch [n, input_dim]; returns (outputs, cache).

    In train mode, inverted dropout is applied after every hidden activation
    (never the last layer); masks come from rng. Infer mode applies no
    dropout and no rescale.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise ShapeError(f"batch shape {batch.shape} incompatible with input_dim {net.input_dim}")
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    use_dropout = mode == "train" and dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ValueError("train-mode dropout needs an rng")

    a = batch
    cache = ForwardCache([], [], [], [], batch.shape[0])
    last = len(net.layers) - 1
    for k, layer in enumerate(net.layers):
        cache.inputs.append(a)
        z = a @ layer.weights.T + layer.bias
        out = _activate(layer.activation, z)
        cache.preacts.append(z)
        cache.outputs.append(out)
        if use_dropout and k != last:
            keep = rng.random(out.shape) >= dropout_rate
            mask = keep / (1.0 - dropout_rate)
            cache.masks.append(mask)
            a = out * mask
        else:
            cache.masks.append(None)
            a = out
    return a, cache


@dataclass
class Gradients:
    layers: list  # per layer: (d_weights, d_bias)

    def copy(self) -> "Gradients":
        return Gradients([(dw.copy(), db.copy()) for dw, db in self.layers])


def backward(net: DenseNet, cache: ForwardCache, d_output, l2_lambda: float = 0.0):
    """Backpropagate d_output through the cached forward pass.

    Returns (Gradients, d_input). The L2 penalty lambda * sum(w^2) contributes
    2 * lambda * w to each weight gradient. No batch averaging happens here;
    the loss gradient carries any 1/n factors.
    """
    if len(cache.inputs) != len(net.layers):
        raise ShapeError("cache does not match network depth")
    d = np.asarray(d_output, dtype=np.float64)
    if d.shape != cache.outputs[-1].shape:
        raise ShapeError(f"upstream gradient shape {d.shape} does not match "
                         f"output shape {cache.outputs[-1].shape}")
    grads = [None] * len(net.layers)
    for k in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[k]
        if cache.masks[k] is not None:
            d = d * cache.masks[k]
        dz = _activation_backward(layer.activation, cache.preacts[k], cache.outputs[k], d)
        dw = dz.T @ cache.inputs[k]
        if l2_lambda:
            dw = dw + 2.0 * l2_lambda * layer.weights
        db = dz.sum(axis=0)
        grads[k] = (dw, db)
        d = dz @ layer.weights
    return Gradients(grads), d


def l2_penalty(net: DenseNet, l2_lambda: float) -> float:
    """The weight penalty added to reported losses: lambda * sum of squared weights."""
    if not l2_lambda:
        return 0.0
    return l2_lambda * sum(float((l.weights ** 2).sum()) for l in net.layers)


# ---------------------------------------------------------------------------
# losses

@dataclass(frozen=True)
class Composite:
    """Weights of the three-part transformation objective.

    total = beta_identity * identity_term - beta_activity * activity_term
            + beta_distance * distance_term,
    where activity_term is the (non-positive) label log-likelihood, so a
    larger beta_activity rewards keeping the activity decodable.
    """
    beta_identity: float
    beta_activity: float
    beta_distance: float

    def __post_init__(self):
        if min(self.beta_identity, self.beta_activity, self.beta_distance) < 0:
            raise ValueError("composite weights must be non-negative")


@dataclass
class CompositeBatch:
    """Auxiliary inputs for the composite loss."""
    identity_probs: list          # adversary softmax outputs, each [n, N]
    identity_true: np.ndarray     # one-hot [n, N]
    activity_probs: np.ndarray    # [n, B]
    activity_true: np.ndarray     # one-hot [n, B]


@dataclass
class CompositeResult:
    total: float
    identity: float
    activity: float
    distance: float
    d_output: np.ndarray
    d_identity_probs: list
    d_activity_probs: np.ndarray


def mse_loss(predictions, targets):
    """Mean over all entries of squared error; returns (loss, d_predictions)."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ShapeError(f"prediction shape {predictions.shape} != target shape {targets.shape}")
    diff = predictions - targets
    loss = float((diff ** 2).mean())
    return loss, 2.0 * diff / diff.size


def _clamped_log_grad_mask(p):
    return (p > PROB_EPS) & (p < 1.0 - PROB_EPS)


def cross_entropy_loss(probs, onehot):
    """Categorical cross-entropy on probability rows; returns (loss, d_probs)."""
    probs = np.asarray(probs, dtype=np.float64)
    onehot = np.asarray(onehot, dtype=np.float64)
    if probs.shape != onehot.shape:
        raise ShapeError("probability and label shapes differ")
    n = probs.shape[0]
    pc = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    loss = float(-(onehot * np.log(pc)).sum() / n)
    grad = -(onehot / pc) * _clamped_log_grad_mask(probs) / n
    return loss, grad


def log_likelihood(probs, onehot):
    """Batch-mean label log-likelihood (equals minus cross-entropy)."""
    loss, grad = cross_entropy_loss(probs, onehot)
    return -loss, -grad


def identity_penalty(probs, onehot):
    """Penalty on adversary confidence: -(U . log(1-Uhat) + log(1-max Uhat)).

    Non-negative for any probability row; grows as the adversary concentrates
    on the true label (or any single label). Batch-averaged.
    """
    probs = np.asarray(probs, dtype=np.float64)
    onehot = np.asarray(onehot, dtype=np.float64)
    if probs.shape != onehot.shape:
        raise ShapeError("probability and label shapes differ")
    n = probs.shape[0]
    comp = np.clip(1.0 - probs, PROB_EPS, 1.0)
    log_comp = np.log(comp)
    rows = np.arange(n)
    amax = probs.argmax(axis=1)
    loss = float(-((onehot * log_comp).sum() + log_comp[rows, amax].sum()) / n)
    # d/dp of -log(clip(1-p)) is 1/(1-p) while unclamped, else 0
    unclamped = (1.0 - probs) > PROB_EPS
    grad = (onehot / comp) * unclamped / n
    grad[rows, amax] += unclamped[rows, amax] / comp[rows, amax] / n
    return loss, grad


def composite_loss(weights: Composite, output, original, aux: CompositeBatch) -> CompositeResult:
    """Evaluate the weighted three-part objective on one batch.

    output/original are the transformed and source windows (flattened rows);
    aux carries the frozen adversaries' probability outputs. Gradients are
    returned separately per stream: d_output covers only the distance term,
    the probability gradients must be pushed back through the adversaries by
    the caller.
    """
    distance, d_dist = mse_loss(output, original)
    activity, d_act = log_likelihood(aux.activity_probs, aux.activity_true)
    ident = 0.0
    d_ident = []
    for probs in aux.identity_probs:
        li, gi = identity_penalty(probs, aux.identity_true)
        ident += li
        d_ident.append(weights.beta_identity * gi)
    total = (weights.beta_identity * ident
             - weights.beta_activity * activity
             + weights.beta_distance * distance)
    return CompositeResult(
        total=total,
        identity=ident,
        activity=activity,
        distance=distance,
        d_output=weights.beta_distance * d_dist,
        d_identity_probs=d_ident,
        d_activity_probs=-weights.beta_activity * d_act,
    )


def compute_loss(kind, predictions, targets, aux=None):
    """Dispatch on loss kind: 'mse', 'cce', 'identity', or a Composite.

    Returns (loss, gradient); for Composite the gradient slot holds the full
    CompositeResult.
    """
    if kind == "mse":
        return mse_loss(predictions, targets)
    if kind == "cce":
        return cross_entropy_loss(predictions, targets)
    if kind == "identity":
        return identity_penalty(predictions, targets)
    if isinstance(kind, Composite):
        if aux is None:
            raise ValueError("composite loss needs aux batch with adversary outputs")
        result = composite_loss(kind, predictions, targets, aux)
        return result.total, result
    raise ValueError(f"unknown loss kind {kind!r}")


# ---------------------------------------------------------------------------
# Adam

@dataclass
class AdamState:
    lr: float
    beta1: float
    beta2: float
    epsilon: float
    step: int
    m: list
    v: list


def init_adam(net: DenseNet, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    zeros = lambda l: (np.zeros_like(l.weights), np.zeros_like(l.bias))
    return AdamState(lr, beta1, beta2, epsilon, 0,
                     [zeros(l) for l in net.layers], [zeros(l) for l in net.layers])


def adam_step(net: DenseNet, grads: Gradients, state: AdamState):
    """Apply one bias-corrected Adam update in place; returns (net, state)."""
    if len(grads.layers) != len(net.layers):
        raise ShapeError("gradient structure does not match network")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for layer, (dw, db), mom, vel in zip(net.layers, grads.layers, state.m, state.v):
        for param, g, m, v in ((layer.weights, dw, mom[0], vel[0]),
                               (layer.bias, db, mom[1], vel[1])):
            if g.shape != param.shape:
                raise ShapeError("gradient shape does not match parameter shape")
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            param -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return net, state


# ---------------------------------------------------------------------------
# training loop

@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 128
    dropout_rate: float = 0.0
    l2_lambda: float = 0.0
    rng_seed: int = 0
    learning_rate: float = 1e-3

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be non-negative")


@dataclass
class FitResult:
    net: DenseNet
    history: list
    best_epoch: int
    best_score: float


def minibatches(n, batch_size, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def fit(net: DenseNet, inputs, targets, loss_kind, cfg: TrainConfig,
        val_inputs=None, val_targets=None, val_score=None) -> FitResult:
    """Minibatch Adam training; keeps the epoch with the best validation score.

    val_score: optional callable(net) -> float, higher is better. Without it,
    the score is minus the validation loss (or minus the train loss when no
    validation set is given).
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    rng = np.random.default_rng(cfg.rng_seed)
    state = init_adam(net, lr=cfg.learning_rate)
    history = []
    best = (-np.inf, 0, None)

    for epoch in range(cfg.epochs):
        epoch_loss = 0.0
        n_batches = 0
        for idx in minibatches(len(inputs), cfg.batch_size, rng):
            out, cache = forward(net, inputs[idx], mode="train", rng=rng,
                                 dropout_rate=cfg.dropout_rate)
            loss, d_out = compute_loss(loss_kind, out, targets[idx])
            loss += l2_penalty(net, cfg.l2_lambda)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch} batch {n_batches}")
            grads, _ = backward(net, cache, d_out, l2_lambda=cfg.l2_lambda)
            adam_step(net, grads, state)
            epoch_loss += loss
            n_batches += 1
        record = {"epoch": epoch, "train_loss": epoch_loss / max(n_batches, 1)}

        if val_score is not None:
            score = float(val_score(net))
        elif val_inputs is not None:
            v_out, _ = forward(net, val_inputs, mode="infer")
            v_loss, _ = compute_loss(loss_kind, v_out, val_targets)
            record["val_loss"] = v_loss
            score = -v_loss
        else:
            score = -record["train_loss"]
        record["score"] = score
        history.append(record)
        if score > best[0]:
            best = (score, epoch, [l.copy() for l in net.layers])

    if best[2] is not None:
        net.layers = best[2]
    if not net.finite():
        raise TrainingDiverged("non-finite parameters after training")
    return FitResult(net, history, best[1], best[0])


# ---------------------------------------------------------------------------
# gradient checking

@dataclass
class GradCheckResult:
    passed: bool
    max_rel_error: float


def _flatten_params(net):
    for layer in net.layers:
        yield layer.weights
        yield layer.bias


def _loss_for_check(net, batch, kind, targets, aux_nets, l2_lambda):
    out, cache = forward(net, batch, mode="infer")
    if isinstance(kind, Composite):
        identity_nets, activity_net, u_true, y_true = aux_nets
        probs, caches = [], []
        for adv in identity_nets:
            p, c = forward(adv, out, mode="infer")
            probs.append(p)
            caches.append(c)
        act_probs, act_cache = forward(activity_net, out, mode="infer")
        aux = CompositeBatch(probs, u_true, act_probs, y_true)
        result = composite_loss(kind, out, targets, aux)
        loss = result.total + l2_penalty(net, l2_lambda)
        d_out = result.d_output.copy()
        for adv, c, g in zip(identity_nets, caches, result.d_identity_probs):
            _, d_in = backward(adv, c, g)
            d_out += d_in
        _, d_in = backward(activity_net, act_cache, result.d_activity_probs)
        d_out += d_in
        grads, _ = backward(net, cache, d_out, l2_lambda=l2_lambda)
        return loss, grads
    loss, d_out = compute_loss(kind, out, targets)
    loss += l2_penalty(net, l2_lambda)
    grads, _ = backward(net, cache, d_out, l2_lambda=l2_lambda)
    return loss, grads


def _one_hot_rows(rng, n, k):
    onehot = np.zeros((n, k))
    onehot[np.arange(n), rng.integers(0, k, size=n)] = 1.0
    return onehot


def gradient_check(net: DenseNet, batch, loss_kind, tolerance: float = 1e-4,
                   targets=None, aux_nets=None, rng=None, l2_lambda: float = 0.0,
                   step: float = 1e-5) -> GradCheckResult:
    """Compare analytic gradients against central finite differences.

    Perturbs every parameter of `net` by +-step. For the composite kind, the
    chain through frozen auxiliary heads is part of the checked path; small
    random heads are created when none are supplied.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(0)
    if targets is None:
        if loss_kind == "mse" or isinstance(loss_kind, Composite):
            targets = rng.normal(size=(batch.shape[0], net.output_dim))
        else:
            targets = _one_hot_rows(rng, batch.shape[0], net.output_dim)
    if isinstance(loss_kind, Composite) and aux_nets is None:
        d = net.output_dim
        n_ids, n_acts = 3, 3
        identity_nets = [build_net([d, 4, n_ids], ["tanh", "softmax"], rng)
                         for _ in range(2)]
        activity_net = build_net([d, 4, n_acts], ["tanh", "softmax"], rng)
        aux_nets = (identity_nets, activity_net,
                    _one_hot_rows(rng, batch.shape[0], n_ids),
                    _one_hot_rows(rng, batch.shape[0], n_acts))

    _, analytic = _loss_for_check(net, batch, loss_kind, targets, aux_nets, l2_lambda)

    max_rel = 0.0
    for p_idx, param in enumerate(_flatten_params(net)):
        a_grad = analytic.layers[p_idx // 2][p_idx % 2]
        flat = param.ravel()
        a_flat = a_grad.ravel()
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + step
            hi, _ = _loss_for_check(net, batch, loss_kind, targets, aux_nets, l2_lambda)
            flat[i] = saved - step
            lo, _ = _loss_for_check(net, batch, loss_kind, targets, aux_nets, l2_lambda)
            flat[i] = saved
            numeric = (hi - lo) / (2.0 * step)
            denom = max(abs(a_flat[i]) + abs(numeric), 1e-6)
            max_rel = max(max_rel, abs(a_flat[i] - numeric) / denom)
    return GradCheckResult(max_rel < tolerance, max_rel)


# ---------------------------------------------------------------------------
# serialization: "SVEIL" container

MAGIC = b"SVEIL"
FORMAT_VERSION = 1
_ACT_TAGS = {name: i for i, name in enumerate(ACTIVATIONS)}


def save_model(path, nets: dict, meta: dict | None = None) -> None:
    """Write nets + JSON metadata to the binary container (little-endian)."""
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(nets))]
    for name, net in nets.items():
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<HI", len(encoded), len(net.layers)))
        parts.append(encoded)
        for layer in net.layers:
            out_dim, in_dim = layer.weights.shape
            parts.append(struct.pack("<IIB", in_dim, out_dim, _ACT_TAGS[layer.activation]))
            parts.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
            parts.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    meta_blob = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    parts.append(struct.pack("<Q", len(meta_blob)))
    parts.append(meta_blob)
    write_bytes(path, b"".join(parts))


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.blob):
            raise FormatError("truncated model container")
        chunk = self.blob[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_model(path):
    """Read a container written by save_model; returns (nets, meta)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    r = _Reader(blob)
    if r.take(len(MAGIC)) != MAGIC:
        raise FormatError("not a model container (bad magic)")
    version, n_nets = r.unpack("<II")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported container version {version}")
    nets = {}
    for _ in range(n_nets):
        name_len, n_layers = r.unpack("<HI")
        name = r.take(name_len).decode("utf-8")
        layers = []
        for _ in range(n_layers):
            in_dim, out_dim, tag = r.unpack("<IIB")
            if tag >= len(ACTIVATIONS):
                raise FormatError(f"unknown activation tag {tag}")
            w = np.frombuffer(r.take(8 * in_dim * out_dim), dtype="<f8").reshape(out_dim, in_dim).copy()
            b = np.frombuffer(r.take(8 * out_dim), dtype="<f8").copy()
            layers.append(Layer(w, b, ACTIVATIONS[tag]))
        nets[name] = DenseNet(layers)
        nets[name].validate()
    (meta_len,) = r.unpack("<Q")
    meta = json.loads(r.take(meta_len).decode("utf-8"))
    return nets, meta


def save_net(path, net: DenseNet) -> None:
    save_model(path, {"net": net})


def load_net(path) -> DenseNet:
    nets, _ = load_model(path)
    return nets["net"]
