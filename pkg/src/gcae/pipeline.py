"""Experiment orchestration: embed with every method, evaluate, report.

All stages derive their randomness from one global seed through fixed,
documented offsets so a whole experiment replays exactly:

    +0     dataset generation (when a command generates data)
    +1000  graph generation
    +2000  model initialization / training streams
    +3000  cross-validation fold assignment
    +4000  random ablation graph

A method's "embedding" is what its 10-fold linear SVM sees: raw features,
PCA scores, the low-rank part of robust PCA re-projected by PCA, truncated
graph Fourier coefficients, or a trained autoencoder's bottleneck activation.
"""

import time
from dataclasses import asdict, dataclass

import numpy as np

from .baselines import ablation_graph, gbf_transform, pca_fit_transform, rpca_decompose
from .classify import kfold_evaluate
from .graph import (
    Graph,
    combinatorial_laplacian,
    normalized_laplacian,
    renormalized_adjacency,
    symmetric_eigendecomposition,
)
from .model import GcaeConfig, build_model, embed_batch, train
from .report import EvaluationReport, MethodResult

__all__ = [
    "ExperimentSettings",
    "SEED_OFFSETS",
    "compare_methods",
    "ablate_graph_choice",
    "ablate_activation",
    "train_autoencoder",
]

SEED_OFFSETS = {
    "data": 0,
    "graph": 1000,
    "model": 2000,
    "cv": 3000,
    "ablation_graph": 4000,
}

DEFAULT_METHODS = ("raw", "pca", "rpca", "gbf", "sae2", "sae4", "gcae")


@dataclass(frozen=True)
class ExperimentSettings:
    """Desk-scale experiment knobs shared by compare and ablate runs.

    The autoencoder dims here are deliberately smaller than
    :class:`~gcae.model.GcaeConfig` defaults so a full comparison finishes in
    minutes; architecture shape (two conv layers, bottleneck encoder/decoder,
    a deeper 4-layer variant) is preserved.
    """

    methods: tuple = DEFAULT_METHODS
    bottleneck: int = 50
    hidden: int = 256
    channels: tuple = (16, 5)
    epochs: int = 80
    dropout_rate: float = 0.2
    l2_lambda: float = 5e-4
    learning_rate: float = 0.001
    batch_size: int = 32
    svm_c: float = 1.0
    svm_epochs: int = 100
    folds: int = 10
    standardize: bool = True
    gbf_laplacian: str = "normalized"
    rpca_tol: float = 1e-6
    rpca_max_iter: int = 300


def _autoencoder_config(settings: ExperimentSettings, n, channels, seed,
                        conv_activation="relu", deep=False) -> GcaeConfig:
    h, b = settings.hidden, settings.bottleneck
    if deep:
        dense = (2 * h, h, h, b, h, h, 2 * h, n)
    else:
        dense = (h, b, h, n)
    return GcaeConfig(
        graph_conv_channels=tuple(channels),
        dense_dims=dense,
        dropout_rate=settings.dropout_rate,
        l2_lambda=settings.l2_lambda,
        learning_rate=settings.learning_rate,
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        seed=seed,
        conv_activation=conv_activation,
    )


def train_autoencoder(dataset, graph: Graph | None, settings: ExperimentSettings,
                      seed, channels=None, conv_activation="relu", deep=False):
    """Build and train one autoencoder variant; returns (model, train report).

    ``channels=()`` with any graph yields the plain stacked autoencoder (the
    graph front-end disappears entirely).
    """
    n = dataset.n_vertices
    if channels is None:
        channels = settings.channels
    if channels:
        if graph is None:
            raise ValueError("graph-convolutional variants need a graph")
        a_tilde = renormalized_adjacency(graph)
    else:
        a_tilde = np.eye(n)
    config = _autoencoder_config(
        settings, n, channels, seed + SEED_OFFSETS["model"], conv_activation, deep
    )
    model = build_model(config, a_tilde)
    report = train(model, dataset)
    return model, report


def _method_embeddings(name, dataset, graph, settings: ExperimentSettings, seed):
    features = dataset.features
    b = settings.bottleneck
    if name == "raw":
        return features
    if name == "pca":
        return pca_fit_transform(features, b)[1]
    if name == "rpca":
        result = rpca_decompose(
            features, tol=settings.rpca_tol, max_iter=settings.rpca_max_iter
        )
        return pca_fit_transform(result.low_rank, b)[1]
    if name == "gbf":
        if graph is None:
            raise ValueError("gbf needs a graph")
        if settings.gbf_laplacian == "combinatorial":
            lap = combinatorial_laplacian(graph)
        else:
            lap = normalized_laplacian(graph)
        return gbf_transform(symmetric_eigendecomposition(lap), features, b)
    if name == "sae2":
        model, _ = train_autoencoder(dataset, None, settings, seed, channels=())
        return embed_batch(model, features)
    if name == "sae4":
        model, _ = train_autoencoder(dataset, None, settings, seed, channels=(), deep=True)
        return embed_batch(model, features)
    if name == "gcae":
        model, _ = train_autoencoder(dataset, graph, settings, seed)
        return embed_batch(model, features)
    raise ValueError(f"unknown method {name!r}")


def _evaluate(name, embeddings, dataset, settings: ExperimentSettings, seed):
    cv = kfold_evaluate(
        embeddings,
        dataset.labels,
        k=settings.folds,
        c=settings.svm_c,
        epochs=settings.svm_epochs,
        seed=seed + SEED_OFFSETS["cv"],
        standardize=settings.standardize,
    )
    return MethodResult(name=name, cv=cv)


def compare_methods(dataset, graph: Graph | None, settings: ExperimentSettings,
                    seed) -> EvaluationReport:
    """Run every requested method on one dataset and collect CV accuracies."""
    methods = []
    timings = {}
    for name in settings.methods:
        started = time.perf_counter()
        embeddings = _method_embeddings(name, dataset, graph, settings, seed)
        methods.append(_evaluate(name, embeddings, dataset, settings, seed))
        timings[name] = time.perf_counter() - started
    return EvaluationReport(
        config=asdict(settings) | {"experiment": "compare"},
        seeds=_seed_echo(seed),
        methods=methods,
        timings=timings,
    )


def ablate_graph_choice(dataset, graph: Graph, settings: ExperimentSettings,
                        seed) -> EvaluationReport:
    """Train the same architecture on the estimated, identity and random graphs."""
    n = dataset.n_vertices
    variants = [
        ("graph-estimated", graph),
        ("graph-identity", ablation_graph("identity", n)),
        ("graph-random", ablation_graph("random_symmetric", n,
                                        seed=seed + SEED_OFFSETS["ablation_graph"])),
    ]
    methods = []
    timings = {}
    for name, g in variants:
        started = time.perf_counter()
        model, _ = train_autoencoder(dataset, g, settings, seed)
        methods.append(_evaluate(name, embed_batch(model, dataset.features),
                                 dataset, settings, seed))
        timings[name] = time.perf_counter() - started
    return EvaluationReport(
        config=asdict(settings) | {"experiment": "ablate-graph"},
        seeds=_seed_echo(seed),
        methods=methods,
        timings=timings,
    )


def ablate_activation(dataset, graph: Graph, settings: ExperimentSettings,
                      seed) -> EvaluationReport:
    """Train with and without the graph-conv nonlinearity, dense head unchanged."""
    methods = []
    timings = {}
    for name, activation in (("activation-nonlinear", "relu"),
                             ("activation-linear", "identity")):
        started = time.perf_counter()
        model, _ = train_autoencoder(
            dataset, graph, settings, seed, conv_activation=activation
        )
        methods.append(_evaluate(name, embed_batch(model, dataset.features),
                                 dataset, settings, seed))
        timings[name] = time.perf_counter() - started
    return EvaluationReport(
        config=asdict(settings) | {"experiment": "ablate-activation"},
        seeds=_seed_echo(seed),
        methods=methods,
        timings=timings,
    )


def _seed_echo(seed) -> dict:
    return {"global": seed} | {
        f"stage_{name}": seed + offset for name, offset in SEED_OFFSETS.items()
    }
