"""Feature-graph estimation from multichannel time series via Granger causality.

For every ordered channel pair (i, j) two autoregressions of order p are fit
by ordinary least squares: a restricted model predicting channel j from its
own p lags, and a full model that adds the p lags of channel i.  The influence
of i on j is the log ratio of the residual variances,

    influence(i -> j) = ln(var_restricted / var_full),

clamped at 0 (finite samples can make the ratio dip below 1).  An intercept
column absorbs channel means.  Multi-trial panels stack the per-trial lag
windows, never letting a window straddle a trial boundary.

:func:`influence_to_graph` turns the directed influence matrix into the
symmetric nonnegative adjacency the rest of the toolkit requires, keeping only
the strongest edges at a chosen density.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import MalformedFileError, SingularRegressionWarning, TooShortError
from .graph import Graph, build_graph

__all__ = [
    "TimeSeriesPanel",
    "granger_influence",
    "influence_to_graph",
    "save_panel",
    "load_panel",
]


@dataclass(frozen=True, eq=False)
class TimeSeriesPanel:
    """Multichannel recording: (channels, timepoints) or (trials, channels, timepoints)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 2:
            values = values[None, :, :]
        if values.ndim != 3:
            raise ValueError(f"panel must be 2-d or 3-d, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def n_trials(self):
        return self.values.shape[0]

    @property
    def n_channels(self):
        return self.values.shape[1]

    @property
    def n_timepoints(self):
        return self.values.shape[2]


def _lag_block(series, order):
    """Columns series[t-1] ... series[t-order] for t in [order, T)."""
    t_len = series.shape[0]
    return np.column_stack([series[order - k:t_len - k] for k in range(1, order + 1)])


def _residual_variance(design, target):
    """(variance, ok) from OLS; ok=False marks a rank-deficient design."""
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        return 0.0, False
    resid = target - design @ coef
    return float(resid @ resid) / target.shape[0], True


def granger_influence(panel: TimeSeriesPanel, order=5) -> np.ndarray:
    """Pairwise Granger influence matrix; entry (i, j) is the strength of i -> j.

    Requires T - order >= 2 * order + 1 usable rows per trial so the full
    design (intercept + 2p lag columns) is overdetermined.  Rank-deficient
    regressions (constant channels, duplicated channels) emit
    :class:`SingularRegressionWarning` and contribute zero influence.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    t_len = panel.n_timepoints
    if t_len - order < 2 * order + 1:
        raise TooShortError(
            f"need T - p >= 2p + 1 rows, got T={t_len}, p={order}"
        )
    n = panel.n_channels
    rows = panel.n_trials * (t_len - order)

    # per-channel lag blocks and aligned targets, trials stacked
    lags = np.empty((n, rows, order))
    targets = np.empty((n, rows))
    for ch in range(n):
        blocks, heads = [], []
        for trial in range(panel.n_trials):
            series = panel.values[trial, ch]
            blocks.append(_lag_block(series, order))
            heads.append(series[order:])
        lags[ch] = np.vstack(blocks)
        targets[ch] = np.concatenate(heads)

    intercept = np.ones((rows, 1))
    influence = np.zeros((n, n))
    restricted_var = np.empty(n)
    restricted_ok = np.empty(n, dtype=bool)
    for j in range(n):
        restricted_var[j], restricted_ok[j] = _residual_variance(
            np.hstack([intercept, lags[j]]), targets[j]
        )

    tiny = np.finfo(np.float64).tiny
    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            if not restricted_ok[j]:
                warnings.warn(
                    f"rank-deficient restricted design for channel {j}; "
                    f"influence entries set to 0",
                    SingularRegressionWarning,
                    stacklevel=2,
                )
                break
            full_var, full_ok = _residual_variance(
                np.hstack([intercept, lags[j], lags[i]]), targets[j]
            )
            if not full_ok:
                warnings.warn(
                    f"rank-deficient full design for pair ({i} -> {j}); entry set to 0",
                    SingularRegressionWarning,
                    stacklevel=2,
                )
                continue
            if restricted_var[j] <= tiny or full_var <= tiny:
                continue
            influence[i, j] = max(0.0, math.log(restricted_var[j] / full_var))
    return influence


def influence_to_graph(influence, density=0.1) -> Graph:
    """Symmetrize a directed influence matrix and keep the densest edges.

    Edge weight is max(influence[i, j], influence[j, i]); the top
    ceil(density * N(N-1)/2) entries by weight survive, ties broken by
    lexicographic vertex order so the output is deterministic.
    """
    influence = np.asarray(influence, dtype=np.float64)
    n = influence.shape[0]
    if influence.ndim != 2 or influence.shape != (n, n):
        raise ValueError(f"influence matrix must be square, got {influence.shape}")
    if influence.size and influence.min() < 0.0:
        raise ValueError("influence entries must be >= 0")
    if np.abs(np.diagonal(influence)).max(initial=0.0) != 0.0:
        raise ValueError("influence diagonal must be 0")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")

    sym = np.maximum(influence, influence.T)
    iu, ju = np.triu_indices(n, k=1)
    keep_count = math.ceil(density * n * (n - 1) / 2.0)
    order = sorted(range(iu.size), key=lambda e: (-sym[iu[e], ju[e]], iu[e], ju[e]))
    w = np.zeros((n, n))
    for e in order[:keep_count]:
        w[iu[e], ju[e]] = w[ju[e], iu[e]] = sym[iu[e], ju[e]]
    return build_graph(w)


# --- panel CSV interface (N rows x T columns, headerless) ---

def save_panel(path, panel: TimeSeriesPanel) -> None:
    """Write a single-trial panel as headerless CSV (trials are concatenated)."""
    flat = np.hstack([panel.values[r] for r in range(panel.n_trials)])
    with open(path, "w", encoding="utf-8") as fh:
        for row in flat:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_panel(path) -> TimeSeriesPanel:
    """Read a headerless N x T CSV as a single-trial panel."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(c) for c in line.split(",")])
            except ValueError as exc:
                raise MalformedFileError(f"{path}: non-numeric cell on row {line_no}") from exc
    if not rows:
        raise MalformedFileError(f"{path}: empty panel file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MalformedFileError(f"{path}: ragged rows; expected {width} columns")
    return TimeSeriesPanel(np.array(rows, dtype=np.float64))
