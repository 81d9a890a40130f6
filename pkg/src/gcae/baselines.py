"""Linear dimensionality-reduction baselines and ablation graph generators.

PCA projects onto the top-variance directions of the sample covariance; GBF
projects onto the lowest-frequency eigenvectors of a graph Laplacian; robust
PCA splits a data matrix into a low-rank part plus sparse corruption by
principal component pursuit,

    min ||L||_* + lambda * ||S||_1   s.t.   X = L + S,

solved with the inexact augmented Lagrangian method: alternate singular-value
thresholding on L and elementwise soft thresholding on S, with a dual update
and a geometrically growing penalty.  Singular value decompositions are
obtained from the symmetric Jacobi eigensolver applied to the smaller Gram
matrix.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateDataError, TooManyComponentsError
from .graph import Graph, SpectralDecomposition, build_graph, symmetric_eigendecomposition

__all__ = [
    "PcaModel",
    "pca_fit_transform",
    "gbf_transform",
    "RpcaResult",
    "rpca_decompose",
    "ablation_graph",
]


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Centered orthonormal projection onto top-variance directions."""

    mean: np.ndarray
    components: np.ndarray       # (D, n), orthonormal columns
    explained_variances: np.ndarray  # (n,), nonincreasing

    def transform(self, data):
        return (np.asarray(data, dtype=np.float64) - self.mean) @ self.components


def pca_fit_transform(data, n_components):
    """Fit PCA on rows-as-samples data and return (model, scores).

    Components come from the eigendecomposition of the sample covariance
    (denominator m - 1), sorted by descending variance.  Each component's
    largest-magnitude entry is flipped positive so outputs are deterministic.
    """
    data = np.asarray(data, dtype=np.float64)
    m, d = data.shape
    if n_components < 1 or n_components > min(m, d):
        raise TooManyComponentsError(
            f"n_components={n_components} outside [1, min(m={m}, d={d})]"
        )
    if m < 2:
        raise DegenerateDataError("need at least 2 samples for a covariance")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (m - 1)
    if np.trace(cov) <= 0.0:
        raise DegenerateDataError("zero variance in every dimension")

    dec = symmetric_eigendecomposition(cov)
    order = np.argsort(dec.eigenvalues, kind="stable")[::-1][:n_components]
    components = dec.eigenvectors[:, order].copy()
    variances = np.maximum(dec.eigenvalues[order], 0.0)
    for j in range(components.shape[1]):
        col = components[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            components[:, j] = -col
    model = PcaModel(mean=mean, components=components, explained_variances=variances)
    return model, centered @ components


def gbf_transform(decomp: SpectralDecomposition, data, n_components):
    """Project samples onto the first ``n_components`` Laplacian eigenvectors.

    Row i of the result holds the lowest-frequency graph Fourier coefficients
    of sample i.
    """
    data = np.asarray(data, dtype=np.float64)
    if n_components < 1 or n_components > decomp.n:
        raise TooManyComponentsError(
            f"n_components={n_components} outside [1, {decomp.n}]"
        )
    if data.ndim != 2 or data.shape[1] != decomp.n:
        raise TooManyComponentsError(
            f"data shape {data.shape} does not match basis size {decomp.n}"
        )
    return data @ decomp.eigenvectors[:, :n_components]


# --- robust PCA ---

@dataclass
class RpcaResult:
    """Principal component pursuit output: X ~ low_rank + sparse."""

    low_rank: np.ndarray
    sparse: np.ndarray
    iterations: int
    residual: float
    converged: bool
    objective_history: list


def _spectral_norm(x, tol=1e-9, max_iter=200):
    """Largest singular value by power iteration on the smaller Gram matrix."""
    g = x.T @ x if x.shape[0] >= x.shape[1] else x @ x.T
    v = np.ones(g.shape[0]) / np.sqrt(g.shape[0])
    prev = 0.0
    for _ in range(max_iter):
        v = g @ v
        norm = np.linalg.norm(v)
        if norm == 0.0:
            return 0.0
        v /= norm
        if abs(norm - prev) <= tol * max(1.0, norm):
            break
        prev = norm
    return float(np.sqrt(norm))


def _svd_threshold(x, tau):
    """Singular-value thresholding via the Jacobi eigensolver on the Gram matrix.

    Returns (U max(S - tau, 0) V^T, sum of the surviving thresholded values).
    """
    m, d = x.shape
    if m >= d:
        dec = symmetric_eigendecomposition(x.T @ x)
        sigmas = np.sqrt(np.maximum(dec.eigenvalues, 0.0))
        keep = sigmas > tau
        if not np.any(keep):
            return np.zeros_like(x), 0.0
        basis = dec.eigenvectors[:, keep]
        scale = (sigmas[keep] - tau) / sigmas[keep]
        return (x @ basis) * scale @ basis.T, float(np.sum(sigmas[keep] - tau))
    dec = symmetric_eigendecomposition(x @ x.T)
    sigmas = np.sqrt(np.maximum(dec.eigenvalues, 0.0))
    keep = sigmas > tau
    if not np.any(keep):
        return np.zeros_like(x), 0.0
    basis = dec.eigenvectors[:, keep]
    scale = (sigmas[keep] - tau) / sigmas[keep]
    return (basis * scale) @ (basis.T @ x), float(np.sum(sigmas[keep] - tau))


def _soft_threshold(x, tau):
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def rpca_decompose(data, lam=None, tol=1e-7, max_iter=500) -> RpcaResult:
    """Split ``data`` into low-rank plus sparse by inexact augmented Lagrangian.

    ``lam`` defaults to 1/sqrt(max(m, d)).  Penalty schedule: mu starts at
    1.25 / ||X||_2, grows by 1.5 per iteration, capped at 1e7 times its start.
    Convergence when ||X - L - S||_F / ||X||_F <= tol; if ``max_iter`` is
    exhausted first the result is still returned with ``converged=False``.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {x.shape}")
    m, d = x.shape
    if lam is None:
        lam = 1.0 / np.sqrt(max(m, d))
    if lam <= 0.0 or tol <= 0.0:
        raise ValueError("lam and tol must be > 0")

    norm_f = float(np.linalg.norm(x))
    norm_two = _spectral_norm(x)
    norm_inf = float(np.abs(x).max(initial=0.0))
    scale = max(norm_two, norm_inf / lam, np.finfo(np.float64).tiny)
    dual = x / scale
    mu = 1.25 / max(norm_two, np.finfo(np.float64).tiny)
    mu_cap = 1e7 * mu
    rho = 1.5

    low = np.zeros_like(x)
    sparse = np.zeros_like(x)
    history = []
    residual = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        low, nuclear = _svd_threshold(x - sparse + dual / mu, 1.0 / mu)
        sparse = _soft_threshold(x - low + dual / mu, lam / mu)
        gap = x - low - sparse
        dual = dual + mu * gap
        mu = min(rho * mu, mu_cap)
        history.append(nuclear + lam * float(np.abs(sparse).sum()))
        residual = float(np.linalg.norm(gap)) / max(norm_f, np.finfo(np.float64).tiny)
        if residual <= tol:
            converged = True
            break
    return RpcaResult(
        low_rank=low,
        sparse=sparse,
        iterations=iterations,
        residual=residual,
        converged=converged,
        objective_history=history,
    )


# --- ablation graphs ---

def ablation_graph(kind, n, seed=0, density=0.1, weight_range=(0.5, 1.5)) -> Graph:
    """Adjacency stand-ins for the graph ablation.

    ``identity``: the empty graph, whose renormalized adjacency is the
    identity (the network degenerates to plain dense layers).
    ``random_symmetric``: seeded symmetric nonnegative weights with zero
    diagonal at the given edge density, an intentionally wrong prior.  The
    default weight range matches the random-graph generator so only the
    topology is wrong, not the edge scale.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "identity":
        return build_graph(np.zeros((n, n)))
    if kind != "random_symmetric":
        raise ValueError(f"unknown ablation graph kind {kind!r}")
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < density
    weights = rng.uniform(weight_range[0], weight_range[1], size=iu.size)
    w[iu[mask], ju[mask]] = weights[mask]
    w[ju[mask], iu[mask]] = weights[mask]
    return build_graph(w)
