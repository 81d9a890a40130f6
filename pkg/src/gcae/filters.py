"""Graph filtering: spectral-domain convolution, Chebyshev filters, first-order form.

Three progressively cheaper ways to filter a graph signal:

1. :func:`spectral_convolve` — exact convolution through the graph Fourier
   transform, ``U ((U^T h) * (U^T x))``.  Needs a full eigendecomposition.
2. :func:`chebyshev_filter` — a K-term Chebyshev polynomial in the rescaled
   Laplacian applied by a three-term vector recurrence; K-hop localized and
   never materializes matrix polynomials.
3. :func:`first_order_conv` — the K=2, tied-coefficient special case
   ``theta * A_ren @ x`` that the network layers use.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, NonpositiveLambdaMaxError
from .graph import SpectralDecomposition, symmetric_eigendecomposition

__all__ = [
    "ChebyshevFilter",
    "spectral_convolve",
    "scaled_laplacian",
    "exact_lambda_max",
    "chebyshev_filter",
    "first_order_conv",
]


@dataclass(frozen=True)
class ChebyshevFilter:
    """Polynomial filter coefficients theta'_0 ... theta'_{K-1}."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError("coefficients must be a nonempty 1-d vector")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self):
        return self.coefficients.size


def spectral_convolve(d: SpectralDecomposition, x, h) -> np.ndarray:
    """Convolve signal ``x`` with filter ``h``: U ((U^T h) * (U^T x))."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if x.shape != (d.n,) or h.shape != (d.n,):
        raise DimensionMismatchError(
            f"signal {x.shape} / filter {h.shape} do not match n={d.n}"
        )
    u = d.eigenvectors
    return u @ ((u.T @ h) * (u.T @ x))


def scaled_laplacian(l_norm, lambda_max=2.0) -> np.ndarray:
    """Rescale a Laplacian to (2 / lambda_max) L - I.

    With the exact largest eigenvalue the result has spectrum in [-1, 1], the
    domain Chebyshev polynomials are stable on.  ``lambda_max`` defaults to 2,
    the upper bound for normalized Laplacians; pass
    :func:`exact_lambda_max` output when the exact bound matters.
    """
    if lambda_max <= 0.0:
        raise NonpositiveLambdaMaxError(f"lambda_max must be > 0, got {lambda_max}")
    l_norm = np.asarray(l_norm, dtype=np.float64)
    out = (2.0 / lambda_max) * l_norm
    out[np.diag_indices(out.shape[0])] -= 1.0
    return out


def exact_lambda_max(l_norm) -> float:
    """Largest eigenvalue of a symmetric operator, via the Jacobi eigensolver."""
    return float(symmetric_eigendecomposition(l_norm).eigenvalues[-1])


def chebyshev_filter(l_hat, x, f: ChebyshevFilter) -> np.ndarray:
    """Apply sum_k theta'_k T_k(L_hat) to ``x`` by the three-term recurrence.

    T_0 x = x, T_1 x = L_hat x, T_k x = 2 L_hat T_{k-1} x - T_{k-2} x; only
    vectors are carried, never matrix powers.
    """
    l_hat = np.asarray(l_hat, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if x.ndim != 1 or l_hat.shape != (n, n):
        raise DimensionMismatchError(
            f"operator {l_hat.shape} does not match signal {x.shape}"
        )
    coeffs = f.coefficients
    t_prev = x
    out = coeffs[0] * t_prev
    if coeffs.size == 1:
        return out
    t_cur = l_hat @ x
    out = out + coeffs[1] * t_cur
    for k in range(2, coeffs.size):
        t_prev, t_cur = t_cur, 2.0 * (l_hat @ t_cur) - t_prev
        out = out + coeffs[k] * t_cur
    return out


def first_order_conv(a_tilde, x, theta) -> np.ndarray:
    """Single-parameter first-order graph convolution: theta * A_ren @ x."""
    a_tilde = np.asarray(a_tilde, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or a_tilde.shape != (x.shape[0], x.shape[0]):
        raise DimensionMismatchError(
            f"operator {a_tilde.shape} does not match signal {x.shape}"
        )
    return theta * (a_tilde @ x)
