"""Weighted undirected graphs, Laplacian operators and the graph Fourier transform.

A graph over N vertices is stored as a dense symmetric N x N adjacency matrix
with nonnegative weights and a zero diagonal.  All spectral machinery in the
toolkit (graph Fourier transform, graph-frequency filtering, smooth-signal
synthesis) is driven by eigendecompositions of operators built here:

* combinatorial Laplacian        L = D - W
* normalized Laplacian           L_norm = I - D^{-1/2} W D^{-1/2}
* renormalized adjacency         A_ren = Dh^{-1/2} (W + I) Dh^{-1/2}

The normalized Laplacian has spectrum in [0, 2]; the renormalized adjacency
(self-loops added before normalization) has spectrum in (-1, 1], which keeps
repeated application in a deep network from amplifying signals.

Eigendecompositions use a cyclic Jacobi rotation solver, adequate and robust
for the dense, moderate-size (n <= ~500) matrices this toolkit works with.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    AsymmetricError,
    DimensionMismatchError,
    MalformedFileError,
    NegativeWeightError,
    NoConvergenceError,
    NonSquareError,
    NonzeroDiagonalError,
    NotSymmetricError,
    ZeroDegreeVertexError,
)

__all__ = [
    "Graph",
    "SpectralDecomposition",
    "build_graph",
    "combinatorial_laplacian",
    "normalized_laplacian",
    "renormalized_adjacency",
    "symmetric_eigendecomposition",
    "gft",
    "igft",
    "save_adjacency",
    "load_adjacency",
    "random_connected_graph",
    "stochastic_block_graph",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Validated undirected weighted graph.

    Construct through :func:`build_graph`; the fields are trusted everywhere
    else in the toolkit.
    """

    n: int
    adjacency: np.ndarray

    @property
    def degrees(self):
        return self.adjacency.sum(axis=1)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Column ``l`` of ``eigenvectors`` belongs to ``eigenvalues[l]``.  Within a
    cluster of (numerically) equal eigenvalues the column order is arbitrary;
    only the spanned subspace is well defined.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self):
        return self.eigenvalues.shape[0]


def build_graph(adjacency) -> Graph:
    """Validate an adjacency matrix and wrap it as a :class:`Graph`.

    The matrix must be square, exactly symmetric as stored, nonnegative and
    zero on the diagonal.  Nothing is repaired: an asymmetric input is an
    error, not something to symmetrize silently.
    """
    w = np.asarray(adjacency, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise NonSquareError(f"adjacency must be square, got shape {w.shape}")
    asym = np.abs(w - w.T).max(initial=0.0)
    if asym > 0.0:
        raise AsymmetricError(f"adjacency is asymmetric (max |W - W^T| = {asym:g})")
    if w.size and w.min() < 0.0:
        raise NegativeWeightError(f"negative edge weight {w.min():g}")
    diag = np.abs(np.diagonal(w)).max(initial=0.0)
    if diag != 0.0:
        raise NonzeroDiagonalError(f"nonzero diagonal entry {diag:g}")
    return Graph(n=w.shape[0], adjacency=w.copy())


def combinatorial_laplacian(g: Graph) -> np.ndarray:
    """Return L = D - W with D the diagonal degree matrix."""
    lap = -g.adjacency.copy()
    np.fill_diagonal(lap, g.degrees)
    return lap


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Return I - D^{-1/2} W D^{-1/2}; spectrum lies in [0, 2].

    Requires every vertex degree > 0; an isolated vertex makes D^{-1/2}
    undefined.
    """
    deg = g.degrees
    if np.any(deg <= 0.0):
        idx = int(np.argmin(deg))
        raise ZeroDegreeVertexError(f"vertex {idx} has zero degree")
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = -(inv_sqrt[:, None] * g.adjacency * inv_sqrt[None, :])
    np.fill_diagonal(lap, 1.0)
    return lap


def renormalized_adjacency(g: Graph) -> np.ndarray:
    """Return Dh^{-1/2} (W + I) Dh^{-1/2} with Dh the degree matrix of W + I.

    Adding self-loops before normalizing guarantees degree >= 1 everywhere
    (isolated vertices are allowed) and bounds the spectrum in (-1, 1], which
    is what makes the operator safe to stack in a deep network.
    """
    a_hat = g.adjacency.copy()
    np.fill_diagonal(a_hat, 1.0)
    inv_sqrt = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return inv_sqrt[:, None] * a_hat * inv_sqrt[None, :]


# --- symmetric eigensolver (cyclic Jacobi) ---

_JACOBI_TOL_FACTOR = 1e-10
_JACOBI_MAX_SWEEPS = 100


def _off_diagonal_norm(a):
    off = np.square(a).sum() - np.square(np.diagonal(a)).sum()
    return float(np.sqrt(max(off, 0.0)))


def symmetric_eigendecomposition(m) -> SpectralDecomposition:
    """Eigendecompose a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all upper-triangle pivots, rotating each away, until the
    off-diagonal Frobenius norm falls below 1e-10 times the Frobenius norm
    of the input (cap: 100 sweeps, then :class:`NoConvergenceError`).
    Eigenvalues are returned ascending with a stable sort, eigenvectors as
    orthonormal columns in matching order.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.abs(a - a.T).max(initial=0.0) > 1e-12:
        raise NotSymmetricError("matrix is not symmetric within 1e-12")
    n = a.shape[0]
    a = (a + a.T) / 2.0
    vecs = np.eye(n)
    norm = float(np.linalg.norm(a))
    if n < 2 or norm == 0.0:
        order = np.argsort(np.diagonal(a), kind="stable")
        return SpectralDecomposition(np.diagonal(a)[order].copy(), vecs[:, order].copy())

    threshold = _JACOBI_TOL_FACTOR * norm
    # Pivots below skip_level cannot push the off-diagonal norm above the
    # convergence threshold even if all n^2 of them remained.
    skip_level = threshold / n

    converged = False
    for _ in range(_JACOBI_MAX_SWEEPS):
        if _off_diagonal_norm(a) < threshold:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < skip_level:
                    continue
                # rotation angle that zeroes a[p, q]
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = vecs[:, p].copy()
                vec_q = vecs[:, q].copy()
                vecs[:, p] = c * vec_p - s * vec_q
                vecs[:, q] = s * vec_p + c * vec_q
    else:
        converged = _off_diagonal_norm(a) < threshold
    if not converged:
        raise NoConvergenceError(
            f"Jacobi sweeps exhausted ({_JACOBI_MAX_SWEEPS}) without convergence"
        )

    values = np.diagonal(a).copy()
    order = np.argsort(values, kind="stable")
    return SpectralDecomposition(values[order], vecs[:, order].copy())


# --- graph Fourier transform ---

def gft(d: SpectralDecomposition, x) -> np.ndarray:
    """Forward graph Fourier transform: coefficients U^T x.

    Coefficient ``l`` is the projection of the signal on eigenvector ``l``;
    the transform is orthonormal, so signal energy is preserved.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (d.n,):
        raise DimensionMismatchError(f"signal shape {x.shape} != ({d.n},)")
    return d.eigenvectors.T @ x


def igft(d: SpectralDecomposition, coeffs) -> np.ndarray:
    """Inverse graph Fourier transform: U @ coeffs."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (d.n,):
        raise DimensionMismatchError(f"coefficient shape {coeffs.shape} != ({d.n},)")
    return d.eigenvectors @ coeffs


# --- adjacency CSV interface (headerless, n rows x n columns) ---

def save_adjacency(path, g: Graph) -> None:
    """Write the adjacency matrix as headerless CSV, full decimal precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in g.adjacency:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_adjacency(path) -> Graph:
    """Read a headerless CSV adjacency matrix and validate it as a Graph."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise MalformedFileError(f"{path}: non-numeric cell on row {line_no}") from exc
    if not rows:
        raise MalformedFileError(f"{path}: empty adjacency file")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise MalformedFileError(f"{path}: expected {n} columns per row")
    return build_graph(np.array(rows, dtype=np.float64))


# --- graph generators ---

def random_connected_graph(n, density=0.15, seed=0, weight_range=(0.5, 1.5)) -> Graph:
    """Random connected weighted graph: random spanning tree plus extra edges.

    ``density`` is the target fraction of the n(n-1)/2 possible edges; the
    spanning tree (n-1 edges) is always present, so the realized density is
    at least (n-1) / (n(n-1)/2).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    lo, hi = weight_range

    # spanning tree over a random vertex ordering keeps the graph connected
    order = rng.permutation(n)
    for i in range(1, n):
        parent = order[rng.integers(0, i)]
        child = order[i]
        weight = rng.uniform(lo, hi)
        w[parent, child] = w[child, parent] = weight

    target_edges = int(round(density * n * (n - 1) / 2.0))
    iu, ju = np.triu_indices(n, k=1)
    absent = np.flatnonzero(w[iu, ju] == 0.0)
    extra = target_edges - (n - 1)
    if extra > 0 and absent.size:
        chosen = rng.choice(absent, size=min(extra, absent.size), replace=False)
        weights = rng.uniform(lo, hi, size=chosen.size)
        w[iu[chosen], ju[chosen]] = weights
        w[ju[chosen], iu[chosen]] = weights
    return build_graph(w)


def stochastic_block_graph(n, n_blocks=2, p_in=0.3, p_out=0.03, seed=0,
                           weight_range=(0.5, 1.5)) -> Graph:
    """Two-community-style random graph, reconnected if sampling left it split."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % n_blocks
    w = np.zeros((n, n))
    lo, hi = weight_range
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if labels[i] == labels[j] else p_out
            if rng.random() < p:
                w[i, j] = w[j, i] = rng.uniform(lo, hi)

    # bridge disconnected components so downstream normalization is defined
    comp = _components(w)
    while comp.max() > 0:
        a = int(rng.choice(np.flatnonzero(comp == 0)))
        b = int(rng.choice(np.flatnonzero(comp > 0)))
        w[a, b] = w[b, a] = rng.uniform(lo, hi)
        comp = _components(w)
    return build_graph(w)


def _components(w):
    n = w.shape[0]
    labels = -np.ones(n, dtype=int)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(w[v] > 0.0):
                if labels[u] < 0:
                    labels[u] = current
                    stack.append(int(u))
        current += 1
    return labels
