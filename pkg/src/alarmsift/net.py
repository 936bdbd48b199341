"""Chunk-sequence classifier: a shared convolutional encoder applied to each
chunk tensor, a two-layer LSTM over the resulting embedding sequence, and a
small classifier head, trained with class-weighted cross-entropy.

Everything (forward, backward, Adam, clipping, early stopping) is explicit
numpy so gradients can be validated against central differences and training
is bitwise reproducible from (seed, data, config).

Class convention: logit/probability column 1 is the true-alarm class.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .records import ClassWeights, class_weights
from .stats import auc
from .temporal import ChunkSequence

LOG_CLAMP = 1e-12
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and training hyperparameters.

    ``embed_dim`` defaults to the 128-wide desk-scale encoder; 1280 mirrors
    the width of the large pretrained encoder the desk model stands in for.
    """

    embed_dim: int = 128
    lstm_hidden: int = 64
    lstm_layers: int = 2
    head_hidden: int = 32
    dropout: float = 0.3
    learning_rate: float = 1e-3
    clip_norm: float = 1.0
    patience: int = 8
    max_epochs: int = 60
    batch_size: int = 16
    seed: int = 42
    n_chunks: int = 6
    in_channels: int = 4
    input_hw: int = 64
    use_lstm: bool = True

    def __post_init__(self):
        if min(self.embed_dim, self.lstm_hidden, self.lstm_layers, self.head_hidden,
               self.patience, self.max_epochs, self.batch_size, self.n_chunks,
               self.in_channels) <= 0:
            raise ValueError("all size/count fields must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            raise ValueError("learning_rate and clip_norm must be positive")
        if self.input_hw % 8 != 0:
            raise ValueError("input_hw must be divisible by 8 (three 2x2 pools)")
        if not self.use_lstm and self.n_chunks != 1:
            raise ValueError("the no-LSTM (static) model requires n_chunks == 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class ModelParams:
    """Named parameter tensors plus the config they were built for."""

    config: ModelConfig
    tensors: dict[str, np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: v.copy() for k, v in self.tensors.items()})


@dataclass
class TrainHistory:
    train_loss: list[float]
    val_auc: list[float]
    max_grad_norm: list[float]
    best_epoch: int  # 1-based
    stop_reason: str  # "patience" | "max_epochs"

    @property
    def epochs_run(self) -> int:
        return len(self.val_auc)


def _encoder_widths(embed_dim: int) -> tuple[int, int, int]:
    return max(1, embed_dim // 4), max(1, embed_dim // 2), embed_dim


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Fan-based uniform init for conv/linear weights, orthogonal recurrent
    blocks, and forget-gate bias 1."""
    w1, w2, w3 = _encoder_widths(cfg.embed_dim)
    tensors: dict[str, np.ndarray] = {}

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    tensors["conv1_w"] = uniform((w1, cfg.in_channels, 3, 3), cfg.in_channels * 9)
    tensors["conv1_b"] = np.zeros(w1)
    tensors["conv2_w"] = uniform((w2, w1, 3, 3), w1 * 9)
    tensors["conv2_b"] = np.zeros(w2)
    tensors["conv3_w"] = uniform((w3, w2, 3, 3), w2 * 9)
    tensors["conv3_b"] = np.zeros(w3)

    if cfg.use_lstm:
        h = cfg.lstm_hidden
        for layer in range(cfg.lstm_layers):
            d_in = cfg.embed_dim if layer == 0 else h
            tensors[f"lstm{layer}_wx"] = uniform((4 * h, d_in), d_in)
            blocks = []
            for _ in range(4):
                q, _ = np.linalg.qr(rng.standard_normal((h, h)))
                blocks.append(q)
            tensors[f"lstm{layer}_wh"] = np.concatenate(blocks, axis=0)
            b = np.zeros(4 * h)
            b[h:2 * h] = 1.0  # forget gate
            tensors[f"lstm{layer}_b"] = b
        head_in = h
    else:
        head_in = cfg.embed_dim

    tensors["head_w1"] = uniform((cfg.head_hidden, head_in), head_in)
    tensors["head_b1"] = np.zeros(cfg.head_hidden)
    tensors["head_w2"] = uniform((2, cfg.head_hidden), cfg.head_hidden)
    tensors["head_b2"] = np.zeros(2)
    return ModelParams(config=cfg, tensors=tensors)


# ---------------------------------------------------------------------------
# Layer primitives (forward returns a cache for the matching backward)
# ---------------------------------------------------------------------------

def _im2col(x: np.ndarray) -> np.ndarray:
    """3x3 same-padding patches of NHWC input: (B, H, W, C) -> (B*H*W, 9*C).

    Patch layout is (di, dj, c), matching ``_flat_weight``.
    """
    b, h, w, c = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    views = [xp[:, di:di + h, dj:dj + w, :] for di in range(3) for dj in range(3)]
    return np.concatenate(views, axis=3).reshape(b * h * w, 9 * c)


def _flat_weight(w: np.ndarray) -> np.ndarray:
    """(F, C, 3, 3) canonical weight -> (9*C, F) matching _im2col layout."""
    return np.ascontiguousarray(w.transpose(2, 3, 1, 0).reshape(-1, w.shape[0]))


def _conv_forward(x, w, b):
    """NHWC convolution; caches the column matrix for the backward pass."""
    bb, h, ww, c = x.shape
    f = w.shape[0]
    cols = _im2col(x)
    out = (cols @ _flat_weight(w) + b).reshape(bb, h, ww, f)
    return out, cols


def _conv_backward(dout, cols, w, need_dx: bool):
    bb, h, ww, f = dout.shape
    c = w.shape[1]
    dflat = dout.reshape(-1, f)
    dw = (cols.T @ dflat).reshape(3, 3, c, f).transpose(3, 2, 0, 1)
    db = dflat.sum(axis=0)
    if not need_dx:
        return None, dw, db
    dcols = (dflat @ _flat_weight(w).T).reshape(bb, h, ww, 3, 3, c)
    dxp = np.zeros((bb, h + 2, ww + 2, c))
    for di in range(3):
        for dj in range(3):
            dxp[:, di:di + h, dj:dj + ww, :] += dcols[:, :, :, di, dj, :]
    return dxp[:, 1:h + 1, 1:ww + 1, :], dw, db


def _avgpool_forward(x):
    b, h, w, f = x.shape
    return x.reshape(b, h // 2, 2, w // 2, 2, f).mean(axis=(2, 4))


def _avgpool_backward(dy):
    return np.repeat(np.repeat(dy, 2, axis=1), 2, axis=2) / 4.0


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _dropout_mask(shape, rate, rng):
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _encoder_forward(x, tensors):
    """Shared per-chunk encoder: (N, C, H, W) -> (N, D) embeddings."""
    caches = []
    out = np.ascontiguousarray(np.transpose(x, (0, 2, 3, 1)))  # NHWC internally
    for i in (1, 2, 3):
        z, cols = _conv_forward(out, tensors[f"conv{i}_w"], tensors[f"conv{i}_b"])
        mask = z > 0
        out = _avgpool_forward(z * mask)
        caches.append((cols, mask))
    h = out.mean(axis=(1, 2))
    return h, (caches, out.shape)


def _encoder_backward(dh, cache, tensors, grads):
    caches, out_shape = cache
    b, hh, ww, f = out_shape
    dout = np.broadcast_to(dh[:, None, None, :], out_shape) / (hh * ww)
    for i in (3, 2, 1):
        cols, mask = caches[i - 1]
        dz = _avgpool_backward(dout) * mask
        dout, dw, db = _conv_backward(dz, cols, tensors[f"conv{i}_w"], need_dx=i > 1)
        grads[f"conv{i}_w"] += dw
        grads[f"conv{i}_b"] += db


def _lstm_layer_forward(xs, wx, wh, b):
    """xs: (B, T, Din) -> outputs (B, T, H) plus per-step cache."""
    bsz, t_len, _ = xs.shape
    h4 = b.size
    h_dim = h4 // 4
    hs = np.zeros((bsz, t_len, h_dim))
    steps = []
    h = np.zeros((bsz, h_dim))
    c = np.zeros((bsz, h_dim))
    for t in range(t_len):
        z = xs[:, t] @ wx.T + h @ wh.T + b
        i = _sigmoid(z[:, :h_dim])
        f = _sigmoid(z[:, h_dim:2 * h_dim])
        g = np.tanh(z[:, 2 * h_dim:3 * h_dim])
        o = _sigmoid(z[:, 3 * h_dim:])
        c_prev = c
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h_prev = h
        h = o * tc
        hs[:, t] = h
        steps.append((i, f, g, o, c_prev, tc, h_prev))
    return hs, (xs, steps)


def _lstm_layer_backward(dhs, cache, wx, wh):
    """dhs: (B, T, H) gradients on every output step."""
    xs, steps = cache
    bsz, t_len, _ = xs.shape
    h_dim = dhs.shape[2]
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(4 * h_dim)
    dxs = np.zeros_like(xs)
    dh_next = np.zeros((bsz, h_dim))
    dc_next = np.zeros((bsz, h_dim))
    for t in reversed(range(t_len)):
        i, f, g, o, c_prev, tc, h_prev = steps[t]
        dh = dhs[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        df = dc * c_prev
        di = dc * g
        dg = dc * i
        dc_next = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        dwx += dz.T @ xs[:, t]
        dwh += dz.T @ h_prev
        db += dz.sum(axis=0)
        dxs[:, t] = dz @ wx
        dh_next = dz @ wh
    return dxs, dwx, dwh, db


# ---------------------------------------------------------------------------
# Full model
# ---------------------------------------------------------------------------

def _model_forward(x, params: ModelParams, train: bool, rng):
    """x: (B, T, C, H, W) -> softmax probabilities (B, 2) and a cache."""
    cfg = params.config
    tensors = params.tensors
    bsz, t_len = x.shape[:2]
    flat = x.reshape(bsz * t_len, *x.shape[2:])
    h, enc_cache = _encoder_forward(flat, tensors)
    embed = h.reshape(bsz, t_len, cfg.embed_dim)

    lstm_caches = []
    drop_masks = []
    if cfg.use_lstm:
        seq = embed
        for layer in range(cfg.lstm_layers):
            if layer > 0 and train and cfg.dropout > 0:
                mask = _dropout_mask(seq.shape, cfg.dropout, rng)
                seq = seq * mask
            else:
                mask = None
            drop_masks.append(mask)
            hs, cache = _lstm_layer_forward(
                seq, tensors[f"lstm{layer}_wx"], tensors[f"lstm{layer}_wh"],
                tensors[f"lstm{layer}_b"])
            lstm_caches.append(cache)
            seq = hs
        final = seq[:, -1]
    else:
        final = embed[:, 0]

    u = final @ tensors["head_w1"].T + tensors["head_b1"]
    relu_mask = u > 0
    r = u * relu_mask
    if train and cfg.dropout > 0:
        head_mask = _dropout_mask(r.shape, cfg.dropout, rng)
        r = r * head_mask
    else:
        head_mask = None
    logits = r @ tensors["head_w2"].T + tensors["head_b2"]

    shifted = logits - logits.max(axis=1, keepdims=True)
    expz = np.exp(shifted)
    probs = expz / expz.sum(axis=1, keepdims=True)
    cache = (x.shape, enc_cache, lstm_caches, drop_masks, final, relu_mask,
             head_mask, r, probs)
    return probs, cache


def _model_backward(dlogits, cache, params: ModelParams):
    cfg = params.config
    tensors = params.tensors
    x_shape, enc_cache, lstm_caches, drop_masks, final, relu_mask, head_mask, r, _ = cache
    bsz, t_len = x_shape[:2]
    grads = {k: np.zeros_like(v) for k, v in tensors.items()}

    grads["head_w2"] += dlogits.T @ r
    grads["head_b2"] += dlogits.sum(axis=0)
    dr = dlogits @ tensors["head_w2"]
    if head_mask is not None:
        dr = dr * head_mask
    du = dr * relu_mask
    grads["head_w1"] += du.T @ final
    grads["head_b1"] += du.sum(axis=0)
    dfinal = du @ tensors["head_w1"]

    if cfg.use_lstm:
        dseq = None
        for layer in reversed(range(cfg.lstm_layers)):
            dhs = np.zeros((bsz, t_len, cfg.lstm_hidden))
            if layer == cfg.lstm_layers - 1:
                dhs[:, -1] = dfinal
            if dseq is not None:
                dhs += dseq
            dseq, dwx, dwh, db = _lstm_layer_backward(
                dhs, lstm_caches[layer], tensors[f"lstm{layer}_wx"],
                tensors[f"lstm{layer}_wh"])
            grads[f"lstm{layer}_wx"] += dwx
            grads[f"lstm{layer}_wh"] += dwh
            grads[f"lstm{layer}_b"] += db
            if drop_masks[layer] is not None:
                dseq = dseq * drop_masks[layer]
        dembed = dseq
    else:
        dembed = np.zeros((bsz, t_len, cfg.embed_dim))
        dembed[:, 0] = dfinal

    dh = dembed.reshape(bsz * t_len, cfg.embed_dim)
    _encoder_backward(dh, enc_cache, tensors, grads)
    return grads


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------

def weighted_loss(logits, label: bool, weights: ClassWeights) -> float:
    """Class-weighted cross-entropy of one sample: -w_label * log p_label.

    The log argument is clamped at 1e-12 so the loss is always finite.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(logits).all():
        raise ValueError("non-finite logits")
    shifted = logits - logits.max()
    p = np.exp(shifted) / np.exp(shifted).sum()
    p_label = p[1] if label else p[0]
    w = weights.w_true if label else weights.w_false
    return float(-w * np.log(max(p_label, LOG_CLAMP)))


def _batch_loss_and_grad(probs, labels, weights: ClassWeights):
    """Mean weighted CE over the batch and its gradient w.r.t. the logits."""
    bsz = probs.shape[0]
    y = labels.astype(np.int64)
    w = np.where(labels, weights.w_true, weights.w_false)
    p_label = probs[np.arange(bsz), y]
    live = p_label >= LOG_CLAMP  # saturated samples contribute zero gradient
    loss = float(np.mean(-w * np.log(np.maximum(p_label, LOG_CLAMP))))
    onehot = np.zeros_like(probs)
    onehot[np.arange(bsz), y] = 1.0
    dlogits = (w * live)[:, None] * (probs - onehot) / bsz
    return loss, dlogits


# ---------------------------------------------------------------------------
# Optimization
# ---------------------------------------------------------------------------

def clip_gradients(grads: dict[str, np.ndarray], clip_norm: float):
    """Scale all gradients so the global L2 norm is at most ``clip_norm``.

    Returns (grads, post_clip_norm); grads are modified in place.
    """
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > clip_norm:
        scale = clip_norm / total
        for g in grads.values():
            g *= scale
        return grads, clip_norm
    return grads, total


class _Adam:
    def __init__(self, tensors, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.t = 0

    def step(self, tensors, grads):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            tensors[k] -= self.lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def stack_sequences(sequences) -> np.ndarray:
    """List of ChunkSequence (or raw (T, C, H, W) arrays) -> (N, T, C, H, W)."""
    arrays = [s.tensors if isinstance(s, ChunkSequence) else np.asarray(s, float)
              for s in sequences]
    return np.stack(arrays)


def encode_chunks(seq, params: ModelParams) -> np.ndarray:
    """Per-chunk embeddings (n_chunks, D) from the shared encoder."""
    x = seq.tensors if isinstance(seq, ChunkSequence) else np.asarray(seq, float)
    h, _ = _encoder_forward(x, params.tensors)
    return h


def lstm_hidden_sequence(embeddings: np.ndarray, params: ModelParams) -> np.ndarray:
    """Top-layer LSTM hidden states (n_chunks, hidden) for one sequence."""
    cfg = params.config
    seq = embeddings[None, :, :]
    for layer in range(cfg.lstm_layers):
        seq, _ = _lstm_layer_forward(
            seq, params.tensors[f"lstm{layer}_wx"],
            params.tensors[f"lstm{layer}_wh"], params.tensors[f"lstm{layer}_b"])
    return seq[0]


def forward(seq, params: ModelParams, mode: str = "eval",
            rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Probabilities (p_true, p_false) for one chunk sequence.

    ``mode='train'`` applies dropout using ``rng`` (a default seeded
    generator is created when none is given).
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    x = seq.tensors if isinstance(seq, ChunkSequence) else np.asarray(seq, float)
    _check_shape(x, params.config)
    train = mode == "train"
    if train and rng is None:
        rng = np.random.default_rng(0)
    probs, _ = _model_forward(x[None], params, train, rng)
    return float(probs[0, 1]), float(probs[0, 0])


def _check_shape(x: np.ndarray, cfg: ModelConfig):
    if x.ndim != 4:
        raise ValueError(f"expected (n_chunks, C, H, W) input, got shape {x.shape}")
    t, c, h, w = x.shape
    if c != cfg.in_channels or h != cfg.input_hw or w != cfg.input_hw:
        raise ValueError(
            f"input shape {x.shape} does not match config "
            f"(C={cfg.in_channels}, HW={cfg.input_hw})")
    if t != cfg.n_chunks:
        raise ValueError(f"sequence has {t} chunks, config expects {cfg.n_chunks}")


def predict(sequences, params: ModelParams, batch_size: int = 16) -> np.ndarray:
    """Eval-mode p_true per record; deterministic (dropout off)."""
    x = sequences if isinstance(sequences, np.ndarray) else stack_sequences(sequences)
    out = np.empty(x.shape[0])
    for start in range(0, x.shape[0], batch_size):
        probs, _ = _model_forward(x[start:start + batch_size], params, False, None)
        out[start:start + batch_size] = probs[:, 1]
    return out


def train(sequences, labels, train_idx, val_idx,
          cfg: ModelConfig) -> tuple[ModelParams, TrainHistory]:
    """Adam training with global-norm gradient clipping and early stopping.

    Stops once validation AUC has not improved for ``cfg.patience`` epochs
    (ties keep the earliest best epoch) and returns the best-epoch weights.
    Bitwise deterministic under ``cfg.seed``.
    """
    x = sequences if isinstance(sequences, np.ndarray) else stack_sequences(sequences)
    labels = np.asarray(labels, dtype=bool)
    train_idx = np.asarray(train_idx, dtype=np.int64)
    val_idx = np.asarray(val_idx, dtype=np.int64)
    for name, idx in (("train", train_idx), ("val", val_idx)):
        part = labels[idx]
        if part.size == 0 or part.all() or not part.any():
            raise ValueError(f"{name} split must contain both classes")
    weights = class_weights(labels[train_idx])

    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg, rng)
    opt = _Adam(params.tensors, cfg.learning_rate)

    history = TrainHistory([], [], [], best_epoch=0, stop_reason="max_epochs")
    best_auc = -np.inf
    best_tensors = None
    for epoch in range(1, cfg.max_epochs + 1):
        order = train_idx[rng.permutation(train_idx.size)]
        epoch_losses = []
        epoch_max_norm = 0.0
        for start in range(0, order.size, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            probs, cache = _model_forward(x[batch], params, True, rng)
            loss, dlogits = _batch_loss_and_grad(probs, labels[batch], weights)
            grads = _model_backward(dlogits, cache, params)
            grads, post_norm = clip_gradients(grads, cfg.clip_norm)
            opt.step(params.tensors, grads)
            epoch_losses.append(loss)
            epoch_max_norm = max(epoch_max_norm, post_norm)
        val_auc = auc(predict(x[val_idx], params), labels[val_idx])
        history.train_loss.append(float(np.mean(epoch_losses)))
        history.val_auc.append(float(val_auc))
        history.max_grad_norm.append(epoch_max_norm)
        if val_auc > best_auc:
            best_auc = val_auc
            history.best_epoch = epoch
            best_tensors = {k: v.copy() for k, v in params.tensors.items()}
        elif epoch - history.best_epoch >= cfg.patience:
            history.stop_reason = "patience"
            break
    return ModelParams(cfg, best_tensors), history


# ---------------------------------------------------------------------------
# Gradient verification
# ---------------------------------------------------------------------------

def finite_diff_check(params: ModelParams, sample, label: bool,
                      weights: ClassWeights = ClassWeights(1.0, 1.0),
                      epsilon: float = 1e-5, per_group: bool = False):
    """Max relative error between analytic and central-difference gradients.

    Dropout is disabled; use double precision and a reduced config.  The
    per-group relative error is ||g_analytic - g_numeric||_2 /
    max(||g_analytic||_2, ||g_numeric||_2, 1e-12).  Returns the max over
    parameter groups, or the full per-group dict when ``per_group``.
    """
    x = sample.tensors if isinstance(sample, ChunkSequence) else np.asarray(sample, float)
    x = x[None]
    labels = np.array([label])

    def loss_at() -> float:
        probs, _ = _model_forward(x, params, False, None)
        loss, _ = _batch_loss_and_grad(probs, labels, weights)
        return loss

    probs, cache = _model_forward(x, params, False, None)
    _, dlogits = _batch_loss_and_grad(probs, labels, weights)
    analytic = _model_backward(dlogits, cache, params)

    errors = {}
    for name, tensor in params.tensors.items():
        numeric = np.zeros_like(tensor)
        for idx in np.ndindex(tensor.shape):
            orig = tensor[idx]
            tensor[idx] = orig + epsilon
            up = loss_at()
            tensor[idx] = orig - epsilon
            down = loss_at()
            tensor[idx] = orig
            numeric[idx] = (up - down) / (2.0 * epsilon)
        ga, gn = analytic[name], numeric
        denom = max(float(np.linalg.norm(ga)), float(np.linalg.norm(gn)), 1e-12)
        errors[name] = float(np.linalg.norm(ga - gn)) / denom
    return errors if per_group else max(errors.values())


# ---------------------------------------------------------------------------
# Checkpoints: versioned npz of all tensors + config JSON sidecar
# ---------------------------------------------------------------------------

def save_checkpoint(params: ModelParams, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, __version__=np.int64(CHECKPOINT_VERSION), **params.tensors)
    sidecar = path.with_suffix(".config.json")
    sidecar.write_text(json.dumps(params.config.to_dict(), indent=2) + "\n")


def load_checkpoint(path: Path | str) -> ModelParams:
    path = Path(path)
    with np.load(path) as blob:
        version = int(blob["__version__"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        tensors = {k: blob[k] for k in blob.files if k != "__version__"}
    sidecar = path.with_suffix(".config.json")
    cfg = ModelConfig.from_dict(json.loads(sidecar.read_text()))
    return ModelParams(config=cfg, tensors=tensors)
