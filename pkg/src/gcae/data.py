"""Two-class synthetic graph-signal datasets and their CSV round trip.

Each class mean is a random combination of the lowest-frequency eigenvectors
of the graph's normalized Laplacian, rescaled to unit root-mean-square, so
class structure is smooth on the generating graph by construction.  Samples
add white Gaussian noise plus sparse heavy spikes (each entry independently,
with a random sign), the non-Gaussian corruption the robust baselines exist
for.  Everything is driven by one seed and fully reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    BandTooWideError,
    InvalidNoiseSpecError,
    MalformedFileError,
)
from .graph import Graph, normalized_laplacian, symmetric_eigendecomposition

__all__ = [
    "NoiseSpec",
    "GraphSignalDataset",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]


@dataclass(frozen=True)
class NoiseSpec:
    """Additive corruption: white Gaussian noise plus sparse signed spikes.

    ``gaussian_sigma`` and ``spike_scale`` are in units of the class-mean RMS
    (which :func:`generate_dataset` normalizes to 1).
    """

    gaussian_sigma: float = 0.3
    spike_prob: float = 0.05
    spike_scale: float = 5.0

    def __post_init__(self):
        if self.gaussian_sigma < 0.0:
            raise InvalidNoiseSpecError(f"gaussian_sigma must be >= 0, got {self.gaussian_sigma}")
        if not 0.0 <= self.spike_prob <= 1.0:
            raise InvalidNoiseSpecError(f"spike_prob must be in [0, 1], got {self.spike_prob}")
        if self.spike_scale < 0.0:
            raise InvalidNoiseSpecError(f"spike_scale must be >= 0, got {self.spike_scale}")


@dataclass(eq=False)
class GraphSignalDataset:
    """Feature matrix (samples x vertices) with +-1 labels."""

    features: np.ndarray
    labels: np.ndarray
    graph_ref: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=int)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise ValueError(
                f"features {features.shape} and labels {labels.shape} do not align"
            )
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if np.unique(labels).size < 2:
            raise ValueError("both classes must be present")
        self.features = features
        self.labels = labels

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_vertices(self):
        return self.features.shape[1]


def _unit_rms_combination(basis, rng):
    n = basis.shape[0]
    while True:
        v = basis @ rng.standard_normal(basis.shape[1])
        norm = np.linalg.norm(v)
        if norm > 0.0:
            return v * (np.sqrt(n) / norm)


def generate_dataset(g: Graph, per_class, smooth_band=8, noise: NoiseSpec | None = None,
                     seed=0) -> GraphSignalDataset:
    """Sample a labeled two-class dataset of noisy smooth signals on ``g``.

    ``per_class`` is a count applied to both classes or a (positive, negative)
    pair.  Class means are distinct random unit-RMS combinations of the
    ``smooth_band`` lowest-frequency Laplacian eigenvectors; each sample adds
    Gaussian noise and independent signed spikes per the noise spec.  Class +1
    rows come first, then class -1.
    """
    noise = NoiseSpec() if noise is None else noise
    if isinstance(per_class, int):
        m_pos = m_neg = per_class
    else:
        m_pos, m_neg = (int(c) for c in per_class)
    if m_pos < 1 or m_neg < 1:
        raise ValueError("per-class sample counts must be >= 1")
    if not 1 <= smooth_band <= g.n:
        raise BandTooWideError(f"smooth_band={smooth_band} outside [1, {g.n}]")

    dec = symmetric_eigendecomposition(normalized_laplacian(g))
    basis = dec.eigenvectors[:, :smooth_band]

    rng = np.random.default_rng(seed)
    mean_pos = _unit_rms_combination(basis, rng)
    mean_neg = _unit_rms_combination(basis, rng)

    m = m_pos + m_neg
    labels = np.concatenate([np.ones(m_pos, dtype=int), -np.ones(m_neg, dtype=int)])
    features = np.vstack([np.tile(mean_pos, (m_pos, 1)), np.tile(mean_neg, (m_neg, 1))])
    features = features + noise.gaussian_sigma * rng.standard_normal((m, g.n))
    if noise.spike_prob > 0.0 and noise.spike_scale > 0.0:
        hit = rng.random((m, g.n)) < noise.spike_prob
        signs = np.where(rng.random((m, g.n)) < 0.5, -1.0, 1.0)
        features = features + hit * signs * noise.spike_scale
    return GraphSignalDataset(
        features=features, labels=labels, graph_ref=g.adjacency.copy(), seed=seed
    )


# --- dataset CSV interface ---

def save_dataset(path, dataset: GraphSignalDataset) -> None:
    """One sample per row: N feature columns then the +-1 label, full precision."""
    n = dataset.n_vertices
    header = ",".join([f"feature_{i}" for i in range(n)] + ["label"])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row, label in zip(dataset.features, dataset.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")


def load_dataset(path) -> GraphSignalDataset:
    """Read a dataset CSV; bitwise-exact inverse of :func:`save_dataset`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines:
        raise MalformedFileError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    if header[-1] != "label" or len(header) < 2:
        raise MalformedFileError(f"{path}: header must list feature columns then 'label'")
    n = len(header) - 1
    features = np.empty((len(lines) - 1, n))
    labels = np.empty(len(lines) - 1, dtype=int)
    for r, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != n + 1:
            raise MalformedFileError(
                f"{path}: row {r} has {len(cells)} cells, expected {n + 1}"
            )
        for col, cell in enumerate(cells[:-1]):
            try:
                features[r - 2, col] = float(cell)
            except ValueError as exc:
                raise MalformedFileError(
                    f"{path}: non-numeric cell at row {r}, column {col}"
                ) from exc
        try:
            label = int(float(cells[-1]))
        except ValueError as exc:
            raise MalformedFileError(
                f"{path}: non-numeric label at row {r}"
            ) from exc
        if label not in (-1, 1):
            raise MalformedFileError(f"{path}: label at row {r} must be -1 or +1")
        labels[r - 2] = label
    if features.shape[0] == 0:
        raise MalformedFileError(f"{path}: dataset has a header but no rows")
    try:
        return GraphSignalDataset(features=features, labels=labels)
    except ValueError as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc
