"""Laplacian eigenbases, graph Fourier transforms, and spectral filters.

The filter family is built from a bump function h_b that vanishes below
b/2: the penalty curve g_b(x) = h_b(x) / h_b(2b - x) is zero below b/2 and
infinite above 3b/2, and its proximal counterpart f_b(x, gamma) =
1 / (1 + gamma * g_b(x)) is a smooth low-pass response in [0, 1]. Filters
are applied either exactly through an eigenbasis or approximately with a
Chebyshev polynomial of the Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError
from .graph import LaplacianMatrix, format_float

FILTER_FAMILIES = ("identity", "tikhonov", "step_gb", "prox_fb")


@dataclass(frozen=True)
class EigenBasis:
    """Ordered eigenpairs of a Laplacian; the graph Fourier basis.

    Eigenvalues are ascending with the leading one clipped at zero;
    eigenvector signs are fixed so the first significant entry of each
    column is positive, for deterministic comparisons.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def count(self) -> int:
        return self.eigenvectors.shape[1]

    def leading(self, k: int) -> np.ndarray:
        """The k eigenvectors with the smallest eigenvalues (N x k)."""
        if not 0 <= k <= self.count:
            raise ParameterError(f"k={k} out of range for basis of {self.count}")
        return self.eigenvectors[:, :k]

    def trailing(self, k: int) -> np.ndarray:
        """The complement of ``leading(k)``: columns k onward (N x (count-k))."""
        if not 0 <= k <= self.count:
            raise ParameterError(f"k={k} out of range for basis of {self.count}")
        return self.eigenvectors[:, k:]


@dataclass(frozen=True)
class FilterSpec:
    """Spectral filter description.

    b is the bandwidth of the step-like families; gamma is the penalty
    weight of the prox form (and of the tikhonov response 1/(1+gamma*x)).
    """

    family: str
    b: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.family not in FILTER_FAMILIES:
            raise ParameterError(f"unknown filter family {self.family!r}")
        if self.family in ("step_gb", "prox_fb") and not self.b > 0:
            raise ParameterError(f"family {self.family!r} requires b > 0")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be nonnegative, got {self.gamma}")


def eigendecompose(L: LaplacianMatrix, count: int | None = None) -> EigenBasis:
    """Full (or leading-``count``) eigendecomposition of a Laplacian."""
    dense = L.dense()
    scale = max(1.0, float(np.abs(dense).max(initial=0.0)))
    if np.abs(dense - dense.T).max(initial=0.0) > 1e-10 * scale:
        raise DataError("Laplacian matrix is not symmetric")
    eigenvalues, eigenvectors = np.linalg.eigh(dense)
    eigenvalues = np.where(
        (eigenvalues < 0) & (eigenvalues > -1e-8 * scale), 0.0, eigenvalues)
    eigenvectors = _fix_signs(eigenvectors)
    if count is not None:
        if not 1 <= count <= dense.shape[0]:
            raise ParameterError(f"count={count} out of range")
        eigenvalues = eigenvalues[:count]
        eigenvectors = eigenvectors[:, :count]
    return EigenBasis(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def _fix_signs(Q: np.ndarray) -> np.ndarray:
    Q = Q.copy()
    for col in range(Q.shape[1]):
        v = Q[:, col]
        significant = np.abs(v) > 1e-12 * max(np.abs(v).max(initial=0.0), 1e-300)
        idx = np.argmax(significant)
        if significant[idx] and v[idx] < 0:
            Q[:, col] = -v
    return Q


def gft(basis: EigenBasis, x: np.ndarray) -> np.ndarray:
    """Graph Fourier transform: project a vertex signal onto the basis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != basis.size:
        raise DataError(f"signal has {x.shape[0]} entries, basis has {basis.size}")
    return basis.eigenvectors.T @ x


def igft(basis: EigenBasis, xhat: np.ndarray) -> np.ndarray:
    """Inverse graph Fourier transform."""
    xhat = np.asarray(xhat, dtype=np.float64)
    if xhat.shape[0] != basis.count:
        raise DataError(f"coefficients have {xhat.shape[0]} entries, "
                        f"basis has {basis.count}")
    return basis.eigenvectors @ xhat


def dirichlet_energy(L: LaplacianMatrix, X: np.ndarray) -> float:
    """Graph smoothness energy tr(X^T L X) of the column signals of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != L.shape[0]:
        raise DataError(f"X has {X.shape[0]} rows, Laplacian is {L.shape[0]} wide")
    return float(np.sum(X * (L.matrix @ X)))


# ---------------------------------------------------------------------------
# the filter family
# ---------------------------------------------------------------------------

def _bump(x: np.ndarray, b: float) -> np.ndarray:
    """h_b(x) = exp(-b / (x - b/2)) for x > b/2, else 0. Smooth everywhere."""
    out = np.zeros_like(x)
    m = x > b / 2
    out[m] = np.exp(-b / (x[m] - b / 2))
    return out


def step_penalty_curve(x, b: float) -> np.ndarray:
    """g_b: zero up to b/2, rising through 1 at x = b, infinite from 3b/2."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    num = _bump(x, b)
    den = _bump(2 * b - x, b)
    out = np.full_like(x, np.inf)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def prox_filter_curve(x, b: float, gamma: float) -> np.ndarray:
    """f_b(x, gamma) = 1 / (1 + gamma * g_b(x)), in the division-safe form
    h_b(2b - x) / (h_b(2b - x) + gamma * h_b(x)); always in [0, 1]."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if gamma == 0:
        return np.ones_like(x)
    keep = _bump(2 * b - x, b)
    kill = _bump(x, b)
    den = keep + gamma * kill
    out = np.empty_like(x)
    ok = den > 0
    out[ok] = keep[ok] / den[ok]
    # both terms underflow only deep inside one of the flat regions
    out[~ok] = np.where(x[~ok] >= b, 0.0, 1.0)
    return out


def eval_filter(spec: FilterSpec, x):
    """Evaluate a filter response on nonnegative frequencies.

    step_gb may return +inf (it is a penalty curve, not an applicable
    response); every other family is finite with values in [0, 1].
    Scalar input yields a float, array input an array.
    """
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if (arr < 0).any():
        raise ParameterError("filter argument must be nonnegative")
    if spec.family == "identity":
        out = np.ones_like(arr)
    elif spec.family == "tikhonov":
        out = 1.0 / (1.0 + spec.gamma * arr)
    elif spec.family == "step_gb":
        out = step_penalty_curve(arr, spec.b)
    else:
        out = prox_filter_curve(arr, spec.b, spec.gamma)
    return float(out[0]) if scalar else out


def apply_filter_exact(basis: EigenBasis, spec: FilterSpec, X: np.ndarray,
                       side: str = "left") -> np.ndarray:
    """Apply Q g(Lambda) Q^T to X from the given side via the eigenbasis."""
    response = eval_filter(spec, basis.eigenvalues)
    if not np.isfinite(response).all():
        raise ParameterError(
            "filter is infinite on part of the spectrum; apply the prox form")
    X = np.asarray(X, dtype=np.float64)
    Q = basis.eigenvectors
    if side == "left":
        if X.shape[0] != basis.size:
            raise DataError(f"X has {X.shape[0]} rows, basis has {basis.size}")
        return Q @ (response[:, None] * (Q.T @ X))
    if side == "right":
        if X.shape[-1] != basis.size:
            raise DataError(f"X has {X.shape[-1]} columns, basis has {basis.size}")
        return ((X @ Q) * response[None, :]) @ Q.T
    raise ParameterError(f"unknown side {side!r}")


def chebyshev_coefficients(func, order: int, upper: float) -> np.ndarray:
    """Interpolation coefficients of ``func`` on [0, upper], degree ``order``."""
    n_pts = order + 1
    theta = np.pi * (np.arange(n_pts) + 0.5) / n_pts
    x = (upper / 2.0) * (np.cos(theta) + 1.0)
    fx = func(x)
    if not np.isfinite(fx).all():
        raise ParameterError("filter is infinite inside the Chebyshev interval")
    k = np.arange(n_pts)
    return (2.0 / n_pts) * np.cos(np.outer(k, theta)) @ fx


def apply_filter_chebyshev(L: LaplacianMatrix, spec: FilterSpec, order: int,
                           X: np.ndarray, side: str = "left") -> np.ndarray:
    """Apply a filter through a Chebyshev polynomial of the Laplacian.

    The expansion lives on [0, spectral_norm_bound] and is evaluated with
    the three-term recurrence, so only sparse matrix products are needed.
    """
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ParameterError(f"order must be a positive integer, got {order!r}")
    if side not in ("left", "right"):
        raise ParameterError(f"unknown side {side!r}")
    X = np.asarray(X, dtype=np.float64)
    work = X if side == "left" else X.T
    if work.ndim == 1:
        work = work[:, None]
        squeeze = True
    else:
        squeeze = False
    if work.shape[0] != L.shape[0]:
        raise DataError(f"operand has {work.shape[0]} rows, Laplacian is {L.shape[0]}")

    upper = L.spectral_norm_bound
    if upper <= 0:
        # zero operator: the filter reduces to its value at the origin
        value = float(eval_filter(spec, np.zeros(1))[0])
        result = value * work
    else:
        coeffs = chebyshev_coefficients(lambda x: eval_filter(spec, x), order, upper)
        half = upper / 2.0

        def shifted(v):
            return (L.matrix @ v) / half - v

        t_prev = work
        t_curr = shifted(work)
        result = 0.5 * coeffs[0] * t_prev + coeffs[1] * t_curr
        for c in coeffs[2:]:
            t_next = 2.0 * shifted(t_curr) - t_prev
            result = result + c * t_next
            t_prev, t_curr = t_curr, t_next
    if squeeze:
        result = result[:, 0]
    return result if side == "left" else result.T


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def save_spectrum_csv(path, eigenvalues) -> None:
    """CSV "index,eigenvalue" rows for plotting a Laplacian spectrum."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,eigenvalue\n")
        for idx, lam in enumerate(np.asarray(eigenvalues, dtype=np.float64)):
            fh.write(f"{idx},{format_float(lam)}\n")


def save_filter_curve_csv(path, b: float, gamma: float, x_max: float = 2.0,
                          points: int = 1000) -> None:
    """CSV "x,g(x),f(x)" on a uniform grid, for plotting the filter family."""
    grid = np.linspace(0.0, x_max, points)
    g_vals = step_penalty_curve(grid, b)
    f_vals = prox_filter_curve(grid, b, gamma)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,g(x),f(x)\n")
        for x, gv, fv in zip(grid, g_vals, f_vals):
            fh.write(f"{format_float(x)},{format_float(gv)},{format_float(fv)}\n")
