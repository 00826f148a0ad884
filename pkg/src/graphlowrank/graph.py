"""Exact K-nearest-neighbor similarity graphs and their Laplacian operators.

A graph is built between the rows (features) or the columns (samples) of a
data matrix. All graphs are undirected with symmetric nonnegative weights
and a zero diagonal; directed KNN selections are symmetrized by taking the
elementwise maximum of the weight matrix and its transpose, which preserves
every selected weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
from scipy.spatial.distance import cdist

from .errors import DataError, DegenerateGraphError, ParameterError

WEIGHTINGS = ("gaussian", "binary", "correlation")
LAPLACIAN_KINDS = ("normalized", "unnormalized")

# relative convergence tolerance and iteration cap for the power-iteration
# estimate of the spectral norm of an unnormalized Laplacian
POWER_ITER_TOL = 1e-6
POWER_ITER_MAX = 1000


@dataclass(frozen=True)
class DataMatrix:
    """A p x n real matrix with rows as features and columns as samples."""

    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"data matrix must be 2-D, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise DataError("data matrix contains NaN or Inf entries")
        object.__setattr__(self, "values", values)

    @property
    def num_features(self) -> int:
        return self.values.shape[0]

    @property
    def num_samples(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_csv(cls, path, orientation: str = "rows") -> "DataMatrix":
        """Load a matrix from CSV, one row per feature by default.

        With orientation="columns" the file stores one row per sample and
        the result is transposed back to feature-major form.
        """
        values = load_matrix_csv(path)
        if orientation == "columns":
            values = values.T
        elif orientation != "rows":
            raise ParameterError(f"unknown orientation {orientation!r}")
        return cls(values)

    def to_csv(self, path) -> None:
        save_matrix_csv(path, self.values)


@dataclass(frozen=True)
class SparseGraph:
    """Undirected weighted graph: symmetric nonnegative weights, no loops."""

    num_vertices: int
    weights: sparse.csr_matrix = field(repr=False)

    @classmethod
    def from_weight_matrix(cls, weights, *, validate: bool = True) -> "SparseGraph":
        weights = sparse.csr_matrix(weights, dtype=np.float64)
        weights.eliminate_zeros()
        weights.sort_indices()
        if weights.shape[0] != weights.shape[1]:
            raise DataError(f"weight matrix must be square, got {weights.shape}")
        if validate:
            if weights.diagonal().any():
                raise DataError("weight matrix has nonzero diagonal entries")
            if (weights.data < 0).any():
                raise DataError("weight matrix has negative entries")
            asym = abs(weights - weights.T)
            if asym.nnz and asym.max() > 1e-12:
                raise DataError("weight matrix is not symmetric")
        return cls(num_vertices=weights.shape[0], weights=weights)

    def degrees(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    def edge_arrays(self):
        """Canonical edge list (i, j, w) with i < j, sorted lexicographically."""
        coo = sparse.triu(self.weights, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    @property
    def num_edges(self) -> int:
        return sparse.triu(self.weights, k=1).nnz


@dataclass(frozen=True)
class LaplacianMatrix:
    """Symmetric PSD graph Laplacian with a cached spectral-norm bound."""

    kind: str
    matrix: sparse.csr_matrix = field(repr=False)
    spectral_norm_bound: float

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def knn_graph(data: DataMatrix, axis: str, k: int, weighting: str = "gaussian",
              sigma="auto", metric: str = "euclidean") -> SparseGraph:
    """Build the exact K-nearest-neighbor graph of the rows or columns.

    Each vector is connected to its k closest peers (Euclidean by default,
    "cityblock" optionally); ties are broken toward the smaller index. The
    selected pairs are weighted by the chosen scheme:

    * gaussian: exp(-d(i,j)^2 / sigma^2); sigma="auto" sets sigma^2 to the
      mean squared distance over the retained pairs.
    * binary: every selected edge has weight 1.
    * correlation: cosine of the two vectors, clamped below at 0 so weights
      stay nonnegative.
    """
    if axis == "rows":
        vectors = data.values
    elif axis == "columns":
        vectors = data.values.T
    else:
        raise ParameterError(f"unknown axis {axis!r}")
    count = vectors.shape[0]
    if count < 2:
        raise DataError(f"need at least 2 vectors along {axis}, got {count}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    if k >= count:
        raise ParameterError(f"k={k} must be smaller than the vector count {count}")
    if weighting not in WEIGHTINGS:
        raise ParameterError(f"unknown weighting {weighting!r}")
    if metric not in ("euclidean", "cityblock"):
        raise ParameterError(f"unknown metric {metric!r}")

    dist = cdist(vectors, vectors, metric=metric)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps ties ordered by index, which makes the result
    # deterministic for repeated inputs
    neighbors = np.argsort(dist, axis=1, kind="stable")[:, :k]

    rows = np.repeat(np.arange(count), k)
    cols = neighbors.ravel()
    pair_dist = dist[rows, cols]

    if weighting == "gaussian":
        if sigma == "auto":
            sigma_sq = float(np.mean(pair_dist ** 2))
            if sigma_sq == 0.0:
                sigma_sq = 1.0  # all selected pairs coincide; exp(0) = 1
        else:
            sigma = float(sigma)
            if sigma <= 0:
                raise ParameterError(f"sigma must be positive, got {sigma}")
            sigma_sq = sigma * sigma
        vals = np.exp(-(pair_dist ** 2) / sigma_sq)
    elif weighting == "binary":
        vals = np.ones_like(pair_dist)
    else:  # correlation
        norms = np.linalg.norm(vectors, axis=1)
        if (norms == 0).any():
            raise DegenerateGraphError(
                "correlation weighting is undefined for zero-norm vectors")
        inner = vectors[rows] @ vectors.T
        vals = inner[np.arange(rows.size), cols] / (norms[rows] * norms[cols])
        vals = np.maximum(vals, 0.0)  # negative correlations carry no edge

    directed = sparse.coo_matrix((vals, (rows, cols)), shape=(count, count)).tocsr()
    symmetric = directed.maximum(directed.T)
    return SparseGraph.from_weight_matrix(symmetric)


def laplacian(g: SparseGraph, kind: str = "normalized") -> LaplacianMatrix:
    """Graph Laplacian: D - W, or I - D^{-1/2} W D^{-1/2} when normalized.

    Isolated vertices contribute a zero row and column under both kinds;
    the normalized form treats their D^{-1/2} entry as 0, which keeps the
    operator PSD.
    """
    if kind not in LAPLACIAN_KINDS:
        raise ParameterError(f"unknown Laplacian kind {kind!r}")
    d = g.degrees()
    n = g.num_vertices
    if kind == "unnormalized":
        mat = sparse.diags(d) - g.weights
        bound = _power_iteration_norm(mat.tocsr())
    else:
        inv_sqrt = np.zeros_like(d)
        positive = d > 0
        inv_sqrt[positive] = 1.0 / np.sqrt(d[positive])
        scaling = sparse.diags(inv_sqrt)
        mat = sparse.diags(positive.astype(np.float64)) - scaling @ g.weights @ scaling
        bound = 2.0
    mat = mat.tocsr()
    mat.eliminate_zeros()
    return LaplacianMatrix(kind=kind, matrix=mat, spectral_norm_bound=bound)


def _power_iteration_norm(mat: sparse.csr_matrix) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    The converged Rayleigh quotient is inflated by a hair so the returned
    value is usable as an upper bound on the spectral norm.
    """
    n = mat.shape[0]
    if mat.nnz == 0 or n == 0:
        return 0.0
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(POWER_ITER_MAX):
        w = mat @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        lam_new = float(v @ (mat @ v))
        if abs(lam_new - lam) <= POWER_ITER_TOL * max(abs(lam_new), 1.0):
            lam = lam_new
            break
        lam = lam_new
    return lam * (1.0 + 10.0 * POWER_ITER_TOL)


def graph_gradient(g: SparseGraph, s: np.ndarray) -> np.ndarray:
    """Degree-normalized gradient of a vertex signal, one value per edge.

    Edge order matches ``edge_arrays``; for an edge {i, j} with i < j the
    value is sqrt(w_ij) * (s_j / sqrt(d_j) - s_i / sqrt(d_i)). Vertices of
    degree zero may not carry signal mass because the formula divides by
    sqrt(d).
    """
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (g.num_vertices,):
        raise DataError(f"signal must have {g.num_vertices} entries, got {s.shape}")
    d = g.degrees()
    isolated = d == 0
    if isolated.any() and np.abs(s[isolated]).max(initial=0.0) > 0:
        raise DegenerateGraphError("signal is nonzero on a degree-0 vertex")
    inv_sqrt = np.zeros_like(d)
    inv_sqrt[~isolated] = 1.0 / np.sqrt(d[~isolated])
    ei, ej, ew = g.edge_arrays()
    return np.sqrt(ew) * (s[ej] * inv_sqrt[ej] - s[ei] * inv_sqrt[ei])


def graph_divergence(g: SparseGraph, c: np.ndarray) -> np.ndarray:
    """Adjoint of ``graph_gradient``: <grad s, c> = <s, div c> for all s, c."""
    c = np.asarray(c, dtype=np.float64)
    ei, ej, ew = g.edge_arrays()
    if c.shape != ei.shape:
        raise DataError(f"edge signal must have {ei.size} entries, got {c.shape}")
    d = g.degrees()
    inv_sqrt = np.zeros_like(d)
    positive = d > 0
    inv_sqrt[positive] = 1.0 / np.sqrt(d[positive])
    weighted = np.sqrt(ew) * c
    out = np.zeros(g.num_vertices)
    np.add.at(out, ej, weighted * inv_sqrt[ej])
    np.add.at(out, ei, -weighted * inv_sqrt[ei])
    return out


def num_connected_components(g: SparseGraph) -> int:
    """Connected-component count via union-find over the edge list."""
    parent = list(range(g.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ei, ej, _ = g.edge_arrays()
    for a, b in zip(ei, ej):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[rb] = ra
    return len({find(v) for v in range(g.num_vertices)})


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def format_float(x) -> str:
    """Shortest decimal that round-trips the float, locale independent."""
    return repr(float(x))


def save_matrix_csv(path, values) -> None:
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as fh:
        for row in values:
            fh.write(",".join(format_float(v) for v in row))
            fh.write("\n")


def load_matrix_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                row = [float(tok) for tok in stripped.split(",")]
            except ValueError as exc:
                raise DataError(f"{path}: malformed CSV row at line {lineno}: {exc}")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(
                    f"{path}: line {lineno} has {len(row)} fields, expected {width}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    values = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(values).all():
        raise DataError(f"{path}: matrix contains NaN or Inf entries")
    return values


def save_edge_list(g: SparseGraph, path) -> None:
    """Write "i<TAB>j<TAB>w" lines with i < j under a "#vertices N" header."""
    ei, ej, ew = g.edge_arrays()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#vertices {g.num_vertices}\n")
        for i, j, w in zip(ei, ej, ew):
            fh.write(f"{int(i)}\t{int(j)}\t{format_float(w)}\n")


def load_edge_list(path) -> SparseGraph:
    num_vertices = None
    rows, cols, vals = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#vertices"):
                try:
                    num_vertices = int(stripped.split()[1])
                except (IndexError, ValueError):
                    raise DataError(f"{path}: bad header at line {lineno}")
                continue
            parts = stripped.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}: line {lineno}: expected i<TAB>j<TAB>w")
            try:
                i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}")
            if i >= j:
                raise DataError(f"{path}: line {lineno}: edges must satisfy i < j")
            if w < 0 or not np.isfinite(w):
                raise DataError(f"{path}: line {lineno}: weight must be finite and >= 0")
            rows.append(i)
            cols.append(j)
            vals.append(w)
    if num_vertices is None:
        raise DataError(f"{path}: missing '#vertices N' header")
    if rows and (max(rows) >= num_vertices or max(cols) >= num_vertices):
        raise DataError(f"{path}: edge endpoint out of range")
    upper = sparse.coo_matrix((vals, (rows, cols)),
                              shape=(num_vertices, num_vertices))
    return SparseGraph.from_weight_matrix(upper + upper.T)
