"""Matrix-free linear operators and desk-scale ill-posed test problems.

The solvers only ever apply an operator's forward and adjoint maps; they
never form the matrix.  The two generators build classic ill-posed
structure at sizes where dense oracles (SVD, pseudoinverse) stay cheap:
a square smooth-kernel integral equation and a rectangular sparse
parallel-beam tomography system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class LinearOperator:
    """An m-by-n linear map exposed through forward/adjoint application.

    Parameters
    ----------
    nrows, ncols : int
        Output and input dimensions (m and n).
    forward : callable
        Maps a length-n vector to a length-m vector (y = A x).
    adjoint : callable
        Maps a length-m vector to a length-n vector (x = A^T y).
    matrix : ndarray or sparse matrix, optional
        The explicit matrix when one exists; retained for oracle use
        and export, never touched by the iterative solvers.

    Instances are immutable after construction and safe to share
    between concurrently running solves.
    """

    def __init__(self, nrows, ncols, forward, adjoint, matrix=None):
        if nrows < 1 or ncols < 1:
            raise ValueError("operator dimensions must be positive")
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self._forward = forward
        self._adjoint = adjoint
        self.matrix = matrix

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ncols,):
            raise ValueError(f"expected input of length {self.ncols}, got {x.shape}")
        y = np.asarray(self._forward(x), dtype=float)
        if y.shape != (self.nrows,):
            raise ValueError("forward map returned wrong length")
        return y

    def adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.nrows,):
            raise ValueError(f"expected input of length {self.nrows}, got {y.shape}")
        x = np.asarray(self._adjoint(y), dtype=float)
        if x.shape != (self.ncols,):
            raise ValueError("adjoint map returned wrong length")
        return x

    def to_dense(self):
        """Explicit dense matrix (materialized column-by-column if needed)."""
        if self.matrix is not None:
            if sp.issparse(self.matrix):
                return self.matrix.toarray()
            return np.asarray(self.matrix, dtype=float)
        cols = np.eye(self.ncols)
        return np.column_stack([self.forward(cols[:, j]) for j in range(self.ncols)])


class CountingOperator(LinearOperator):
    """Wrapper that tallies forward/adjoint applications (test instrumentation)."""

    def __init__(self, op):
        super().__init__(op.nrows, op.ncols, op._forward, op._adjoint, op.matrix)
        self.n_forward = 0
        self.n_adjoint = 0

    def forward(self, x):
        self.n_forward += 1
        return super().forward(x)

    def adjoint(self, y):
        self.n_adjoint += 1
        return super().adjoint(y)


@dataclass
class InverseProblem:
    """A generated test instance: operator, truth, exact and noisy data."""

    op: LinearOperator
    x_true: np.ndarray
    b_exact: np.ndarray
    b: np.ndarray
    e: np.ndarray
    noise_level: float
    seed: int


def make_dense_operator(matrix):
    """Wrap an explicit dense matrix as a LinearOperator."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix has non-finite entries")
    m, n = matrix.shape
    return LinearOperator(m, n, lambda x: matrix @ x, lambda y: matrix.T @ y,
                          matrix=matrix)


def make_sparse_operator(matrix):
    """Wrap a scipy sparse matrix as a LinearOperator."""
    csr = sp.csr_matrix(matrix)
    csc_t = sp.csr_matrix(csr.T)
    m, n = csr.shape
    return LinearOperator(m, n, lambda x: csr @ x, lambda y: csc_t @ y, matrix=csr)


def add_noise(b_exact, noise_level, seed):
    """Perturb exact data with Gaussian-direction noise of exact relative size.

    The noise is e = noise_level * ||b_exact|| * g / ||g|| with g drawn
    standard normal from the seeded generator, so ||e|| / ||b_exact||
    equals noise_level by construction.
    """
    b_exact = np.asarray(b_exact, dtype=float)
    if noise_level < 0:
        raise ValueError("noise_level must be nonnegative")
    if noise_level == 0:
        e = np.zeros_like(b_exact)
        return b_exact.copy(), e
    scale = np.linalg.norm(b_exact)
    if scale == 0:
        raise ValueError("cannot scale noise against all-zero exact data")
    g = np.random.default_rng(seed).standard_normal(b_exact.shape[0])
    e = (noise_level * scale / np.linalg.norm(g)) * g
    return b_exact + e, e


def gravity_kernel_matrix(n, depth=0.25):
    """Midpoint-rule discretization of depth/(depth^2 + (s-t)^2)^{3/2} on [0,1]^2."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if depth <= 0:
        raise ValueError("depth must be positive")
    pts = (np.arange(n) + 0.5) / n
    diff = pts[:, None] - pts[None, :]
    return depth * (depth**2 + diff**2) ** (-1.5) / n


def make_gravity_problem(n, depth=0.25, noise_level=1e-2, seed=0):
    """Square severely ill-posed smooth-kernel problem with a bimodal truth."""
    matrix = gravity_kernel_matrix(n, depth)
    op = make_dense_operator(matrix)
    t = (np.arange(n) + 0.5) / n
    x_true = np.sin(np.pi * t) + 0.5 * np.sin(2 * np.pi * t)
    b_exact = matrix @ x_true
    b, e = add_noise(b_exact, noise_level, seed)
    return InverseProblem(op, x_true, b_exact, b, e, noise_level, seed)


def trace_ray(n, point, direction):
    """Exact intersection lengths of one ray with the cells of an n-by-n grid.

    The grid covers [0, n] x [0, n] with unit cells; cell (i, j) spans
    [j, j+1] x [i, i+1] and has flat index i*n + j.  Returns (indices,
    lengths) for the cells the ray crosses, ordered along the ray.
    """
    point = np.asarray(point, dtype=float)
    direction = np.asarray(direction, dtype=float)
    nd = np.linalg.norm(direction)
    if nd == 0:
        raise ValueError("ray direction must be nonzero")
    direction = direction / nd

    # Slab test for the bounding box, then all grid-line crossings inside it.
    t_lo, t_hi = -np.inf, np.inf
    for ax in range(2):
        d, p = direction[ax], point[ax]
        if abs(d) < 1e-300:
            if p <= 0 or p >= n:
                return np.empty(0, dtype=int), np.empty(0)
        else:
            t0, t1 = (0.0 - p) / d, (n - p) / d
            t_lo = max(t_lo, min(t0, t1))
            t_hi = min(t_hi, max(t0, t1))
    if t_hi <= t_lo:
        return np.empty(0, dtype=int), np.empty(0)

    taus = [np.array([t_lo, t_hi])]
    for ax in range(2):
        d, p = direction[ax], point[ax]
        if abs(d) >= 1e-300:
            crossings = (np.arange(n + 1) - p) / d
            taus.append(crossings[(crossings > t_lo) & (crossings < t_hi)])
    taus = np.unique(np.concatenate(taus))

    lengths = np.diff(taus)
    mids = point[None, :] + 0.5 * (taus[:-1] + taus[1:])[:, None] * direction[None, :]
    cols = np.clip(np.floor(mids[:, 0]).astype(int), 0, n - 1)
    rows = np.clip(np.floor(mids[:, 1]).astype(int), 0, n - 1)
    keep = lengths > 1e-14
    return (rows * n + cols)[keep], lengths[keep]


def make_tomo_problem(n, n_angles=None, n_detectors=None, noise_level=1e-2, seed=0):
    """Rectangular sparse parallel-beam tomography problem with a disk phantom.

    Rays are grouped by n_angles view angles spread over [0, pi); each view
    has n_detectors parallel rays with unit-ish spacing covering the grid
    diagonal.  Row i*n_detectors + d holds the exact cell-intersection
    lengths of detector d at angle i.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    if n_angles is None:
        n_angles = n
    if n_detectors is None:
        n_detectors = int(round(np.sqrt(2.0) * n))
    m = n_angles * n_detectors
    center = np.array([n / 2.0, n / 2.0])
    spacing = n * np.sqrt(2.0) / n_detectors

    rows_idx, cols_idx, vals = [], [], []
    for a in range(n_angles):
        theta = a * np.pi / n_angles
        direction = np.array([np.cos(theta), np.sin(theta)])
        offset_dir = np.array([-np.sin(theta), np.cos(theta)])
        for d in range(n_detectors):
            s = (d - (n_detectors - 1) / 2.0) * spacing
            idx, lens = trace_ray(n, center + s * offset_dir, direction)
            row = a * n_detectors + d
            rows_idx.extend([row] * len(idx))
            cols_idx.extend(idx.tolist())
            vals.extend(lens.tolist())
    matrix = sp.csr_matrix((vals, (rows_idx, cols_idx)), shape=(m, n * n))
    op = make_sparse_operator(matrix)

    jj, ii = np.meshgrid(np.arange(n) + 0.5, np.arange(n) + 0.5)
    disk = (jj - n / 2.0) ** 2 + (ii - n / 2.0) ** 2 <= (n / 4.0) ** 2
    x_true = disk.astype(float).ravel()

    b_exact = matrix @ x_true
    b, e = add_noise(b_exact, noise_level, seed)
    return InverseProblem(op, x_true, b_exact, b, e, noise_level, seed)


def load_dense_problem(matrix_path, rhs_path):
    """Read a whitespace-separated dense matrix and right-hand side from disk."""
    matrix = np.loadtxt(matrix_path, ndmin=2)
    b = np.loadtxt(rhs_path).ravel()
    op = make_dense_operator(matrix)
    if b.shape[0] != op.nrows:
        raise ValueError("right-hand side length does not match matrix rows")
    return op, b


def export_dense_matrix(op, path):
    """Write the operator's dense matrix as whitespace-separated text."""
    np.savetxt(path, op.to_dense())
