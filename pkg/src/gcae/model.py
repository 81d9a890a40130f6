"""The graph-convolutional autoencoder: assembly, training, embedding, checkpoints.

The network is a stack of graph convolution layers over a fixed renormalized
adjacency, a flatten step that concatenates per-vertex channel rows, a dense
encoder down to a bottleneck, and a dense decoder back to the input dimension.
Training is unsupervised: minimize the batch-mean squared reconstruction error
plus an L2 penalty on dense weights, with Adam.

Randomness is never ambient.  A model seed expands into three fixed streams:
seed + 0 for parameter initialization, seed + 1 for epoch shuffling, seed + 2
for dropout masks.  Identical (config, seed, dataset) triples reproduce the
loss trajectory bit for bit.
"""

import json
import time
from dataclasses import dataclass, fields

import numpy as np

from ._version import __version__
from .exceptions import (
    DimensionMismatchError,
    EmptyDatasetError,
    InvalidConfigError,
    MalformedFileError,
    ModelNotTrainedError,
    NonfiniteLossError,
)
from .nn import (
    DenseLayer,
    DropoutLayer,
    FlattenLayer,
    GraphConvLayer,
    SequentialNet,
    adam_step,
    glorot_uniform,
    init_adam,
    l2_penalty,
)

__all__ = [
    "GcaeConfig",
    "GcaeModel",
    "TrainReport",
    "build_model",
    "train",
    "embed",
    "embed_batch",
    "save_checkpoint",
    "load_checkpoint",
]

_INIT_OFFSET = 0
_SHUFFLE_OFFSET = 1
_DROPOUT_OFFSET = 2

_DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class GcaeConfig:
    """Architecture and training hyperparameters.

    ``dense_dims`` lists the fully connected layer widths after the flatten
    step; the last entry must equal the graph size N (the reconstruction
    target), and the smallest entry is the bottleneck whose activation is the
    learned embedding.  ``graph_conv_channels`` may be empty, which removes
    the graph front-end entirely and leaves a plain stacked autoencoder.
    """

    graph_conv_channels: tuple = (16, 5)
    dense_dims: tuple = (2000, 50, 2000, 306)
    dropout_rate: float = 0.5
    l2_lambda: float = 5e-4
    learning_rate: float = 0.001
    epochs: int = 300
    batch_size: int = 32
    seed: int = 0
    conv_activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "graph_conv_channels", tuple(int(c) for c in self.graph_conv_channels))
        object.__setattr__(self, "dense_dims", tuple(int(d) for d in self.dense_dims))

    @property
    def bottleneck_dim(self):
        return min(self.dense_dims)

    @property
    def bottleneck_position(self):
        return self.dense_dims.index(min(self.dense_dims))


@dataclass
class TrainReport:
    """Loss trajectory and provenance of one training run."""

    epoch_losses: list
    final_loss: float | None
    wall_clock_seconds: float
    seed: int


@dataclass
class GcaeModel:
    """A built (and possibly trained) autoencoder bound to one graph operator."""

    net: SequentialNet
    a_tilde: np.ndarray
    config: GcaeConfig
    seed: int
    n: int
    bottleneck_layer: int
    trained: bool = False
    feature_mean: np.ndarray | None = None
    feature_std: np.ndarray | None = None

    @property
    def flatten_dim(self):
        c_last = self.config.graph_conv_channels[-1] if self.config.graph_conv_channels else 1
        return self.n * c_last


def _validate_config(config: GcaeConfig, n: int):
    if any(c < 1 for c in config.graph_conv_channels):
        raise InvalidConfigError("graph_conv_channels must all be >= 1")
    if not config.dense_dims or any(d < 1 for d in config.dense_dims):
        raise InvalidConfigError("dense_dims must be a nonempty sequence of positive ints")
    if config.dense_dims[-1] != n:
        raise InvalidConfigError(
            f"last dense dim {config.dense_dims[-1]} must equal graph size {n}"
        )
    if config.bottleneck_dim >= n and len(config.dense_dims) > 1:
        raise InvalidConfigError(
            f"bottleneck {config.bottleneck_dim} must be smaller than input dim {n}"
        )
    if not 0.0 <= config.dropout_rate < 1.0:
        raise InvalidConfigError(f"dropout_rate {config.dropout_rate} outside [0, 1)")
    if config.l2_lambda < 0 or config.learning_rate < 0:
        raise InvalidConfigError("l2_lambda and learning_rate must be >= 0")
    if config.epochs < 0 or config.batch_size < 1:
        raise InvalidConfigError("epochs must be >= 0 and batch_size >= 1")
    if config.conv_activation not in ("relu", "identity"):
        raise InvalidConfigError(f"conv_activation {config.conv_activation!r} unsupported")


def build_model(config: GcaeConfig, a_tilde, rng_seed=None) -> GcaeModel:
    """Assemble layers with seeded initialization; deterministic per seed.

    Dense layers use Glorot-uniform weights and zero biases; graph-conv
    parameter matrices are Glorot-uniform over their channel fan.  Hidden
    dense layers get relu and (when configured) dropout; the final
    reconstruction layer is linear.
    """
    a_tilde = np.asarray(a_tilde, dtype=np.float64)
    n = a_tilde.shape[0]
    _validate_config(config, n)
    seed = config.seed if rng_seed is None else int(rng_seed)
    rng = np.random.default_rng(seed + _INIT_OFFSET)

    layers = []
    c_in = 1
    for c_out in config.graph_conv_channels:
        layers.append(
            GraphConvLayer(a_tilde, glorot_uniform(c_in, c_out, rng), config.conv_activation)
        )
        c_in = c_out
    layers.append(FlattenLayer())

    dims = [n * c_in] + list(config.dense_dims)
    bottleneck_layer = None
    bottleneck_pos = config.bottleneck_position
    for i in range(len(config.dense_dims)):
        last = i == len(config.dense_dims) - 1
        activation = "identity" if last else "relu"
        layers.append(
            DenseLayer(glorot_uniform(dims[i], dims[i + 1], rng), np.zeros(dims[i + 1]), activation)
        )
        if i == bottleneck_pos:
            bottleneck_layer = len(layers) - 1
        if not last and config.dropout_rate > 0.0:
            layers.append(DropoutLayer(config.dropout_rate))

    net = SequentialNet(layers, l2_lambda=config.l2_lambda)
    return GcaeModel(
        net=net,
        a_tilde=a_tilde,
        config=config,
        seed=seed,
        n=n,
        bottleneck_layer=bottleneck_layer,
    )


def _scale(model: GcaeModel, features):
    if model.feature_mean is None:
        return features
    return (features - model.feature_mean) / model.feature_std


def forward(model: GcaeModel, x):
    """Run one signal through the model in eval mode.

    Returns (embedding, reconstruction).  After training, the input is passed
    through the stored standardization and the reconstruction is mapped back
    to original units.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n,):
        raise DimensionMismatchError(f"input shape {x.shape} != ({model.n},)")
    if not np.all(np.isfinite(x)):
        raise DimensionMismatchError("input must be finite")
    out, collected = model.net.forward(_scale(model, x).reshape(model.n, 1), collect=True)
    embedding = collected[model.bottleneck_layer]
    if model.feature_mean is not None:
        out = out * model.feature_std + model.feature_mean
    return embedding, out


def train(model: GcaeModel, dataset, config: GcaeConfig | None = None) -> TrainReport:
    """End-to-end unsupervised training on a dataset's feature matrix.

    Features are standardized per dimension (statistics stored on the model
    and reused by :func:`embed`).  Each epoch shuffles with its own seeded
    stream and walks mini-batches; the reported per-epoch loss is the mean
    per-sample squared reconstruction error seen during the epoch, excluding
    the L2 penalty.  Aborts with :class:`NonfiniteLossError` if the loss
    leaves the finite range or exceeds 1e6 times the first epoch's loss.
    """
    cfg = model.config if config is None else config
    features = np.asarray(dataset.features, dtype=np.float64)
    if features.size == 0:
        raise EmptyDatasetError("training dataset is empty")
    if features.ndim != 2 or features.shape[1] != model.n:
        raise DimensionMismatchError(
            f"dataset feature dim {features.shape} does not match graph size {model.n}"
        )

    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    model.feature_mean = mean
    model.feature_std = std
    x_all = (features - mean) / std

    m = x_all.shape[0]
    shuffle_rng = np.random.default_rng(model.seed + _SHUFFLE_OFFSET)
    dropout_rng = np.random.default_rng(model.seed + _DROPOUT_OFFSET)

    params = model.net.parameters()
    adam = init_adam(params, learning_rate=cfg.learning_rate)

    started = time.perf_counter()
    losses = []
    first_loss = None
    for _ in range(cfg.epochs):
        perm = shuffle_rng.permutation(m)
        recon_sum = 0.0
        for start in range(0, m, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            xb = x_all[idx]
            total, grads = model.net.loss_and_gradients(
                xb.reshape(len(idx), model.n, 1), xb, train=True, rng=dropout_rng
            )
            if cfg.l2_lambda:
                total -= l2_penalty(model.net.penalized_weights(), cfg.l2_lambda)[0]
            recon_sum += total * len(idx)
            params, adam = adam_step(adam, params, grads)
            model.net.set_parameters(params)
        epoch_loss = recon_sum / m
        losses.append(epoch_loss)
        if first_loss is None:
            first_loss = epoch_loss
        if not np.isfinite(epoch_loss) or (
            first_loss > 0 and epoch_loss > _DIVERGENCE_FACTOR * first_loss
        ):
            raise NonfiniteLossError(f"training diverged at epoch {len(losses)}")

    model.trained = True
    return TrainReport(
        epoch_losses=losses,
        final_loss=losses[-1] if losses else None,
        wall_clock_seconds=time.perf_counter() - started,
        seed=model.seed,
    )


def embed(model: GcaeModel, x, allow_untrained=False) -> np.ndarray:
    """Bottleneck activation for one signal (eval mode, dropout off)."""
    if not model.trained and not allow_untrained:
        raise ModelNotTrainedError(
            "model is untrained; pass allow_untrained=True to embed anyway"
        )
    embedding, _ = forward(model, x)
    return embedding


def embed_batch(model: GcaeModel, features, allow_untrained=False) -> np.ndarray:
    """Bottleneck activations for a whole (m, N) feature matrix at once."""
    if not model.trained and not allow_untrained:
        raise ModelNotTrainedError(
            "model is untrained; pass allow_untrained=True to embed anyway"
        )
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n:
        raise DimensionMismatchError(f"feature matrix {features.shape} != (m, {model.n})")
    x = _scale(model, features).reshape(features.shape[0], model.n, 1)
    _, collected = model.net.forward(x, collect=True)
    return collected[model.bottleneck_layer]


# --- checkpoint interface (single JSON document, bit-exact float round-trip) ---

def _param_entries(model: GcaeModel):
    entries = []
    conv_i = dense_i = 0
    for layer in model.net.layers:
        if isinstance(layer, GraphConvLayer):
            entries.append((f"conv_{conv_i}/theta", layer.theta))
            conv_i += 1
        elif isinstance(layer, DenseLayer):
            entries.append((f"dense_{dense_i}/weights", layer.weights))
            entries.append((f"dense_{dense_i}/bias", layer.bias))
            dense_i += 1
    return entries


def save_checkpoint(model: GcaeModel, path) -> None:
    """Serialize config, seed, scaler, operator and parameters to one document."""
    doc = {
        "format": "gcae-checkpoint-v1",
        "version": __version__,
        "config": {f.name: getattr(model.config, f.name) for f in fields(model.config)},
        "seed": model.seed,
        "trained": model.trained,
        "n": model.n,
        "feature_mean": None if model.feature_mean is None else list(model.feature_mean),
        "feature_std": None if model.feature_std is None else list(model.feature_std),
        "a_tilde": {"shape": list(model.a_tilde.shape), "data": model.a_tilde.reshape(-1).tolist()},
        "params": [
            {"name": name, "shape": list(p.shape), "data": p.reshape(-1).tolist()}
            for name, p in _param_entries(model)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_checkpoint(path) -> GcaeModel:
    """Rebuild a model from :func:`save_checkpoint` output; embeddings match bit-exactly."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: not a valid checkpoint document") from exc
    if doc.get("format") != "gcae-checkpoint-v1":
        raise MalformedFileError(f"{path}: unrecognized checkpoint format")

    cfg_raw = dict(doc["config"])
    cfg_raw["graph_conv_channels"] = tuple(cfg_raw["graph_conv_channels"])
    cfg_raw["dense_dims"] = tuple(cfg_raw["dense_dims"])
    config = GcaeConfig(**cfg_raw)
    a_tilde = np.array(doc["a_tilde"]["data"], dtype=np.float64).reshape(doc["a_tilde"]["shape"])
    model = build_model(config, a_tilde, rng_seed=doc["seed"])

    stored = {entry["name"]: entry for entry in doc["params"]}
    tensors = []
    for name, p in _param_entries(model):
        entry = stored.get(name)
        if entry is None or tuple(entry["shape"]) != p.shape:
            raise MalformedFileError(f"{path}: parameter {name} missing or mis-shaped")
        tensors.append(np.array(entry["data"], dtype=np.float64).reshape(p.shape))
    model.net.set_parameters(tensors)

    model.trained = bool(doc["trained"])
    if doc["feature_mean"] is not None:
        model.feature_mean = np.array(doc["feature_mean"], dtype=np.float64)
        model.feature_std = np.array(doc["feature_std"], dtype=np.float64)
    return model
