"""Rank-r completion of the masked diagonal by alternating minimization.

The empirical second moment is trustworthy only off the diagonal, so the
full matrix is recovered as the best rank-r fit of the off-diagonal
entries: alternately solve the row-wise least-squares problem

    min_U || offdiag(A) - offdiag(U V^T) ||_F^2

against the current orthonormal basis V, then re-orthonormalize by QR.
Because the mask and the input are symmetric, the objective is
non-increasing across iterations.  The returned matrix is the last
unorthonormalized solution times the basis it was regressed against, which
keeps the final product an exact minimizer over its row space.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficiencyError, ValidationError

_RIDGE = 1e-12
_TARGET = 1e-8


@dataclass
class AltMinResult:
    """Completed matrix plus a convergence report.

    ``objectives[t]`` is the masked squared error after solve t;
    ``ridge_steps`` lists the solves that needed a ridge fallback.
    """

    matrix: np.ndarray
    objectives: list = field(default_factory=list)
    ridge_steps: list = field(default_factory=list)

    def report(self):
        return {
            "objectives": [float(v) for v in self.objectives],
            "ridge_steps": list(self.ridge_steps),
        }


@dataclass(frozen=True)
class WhiteningBasis:
    """Top eigenpairs of a completed second moment, eigenvalues descending.

    ``whitening_map`` scales columns by 1/sqrt(value) so that contracting
    the second moment on both sides gives the identity; ``coloring_map``
    is its right inverse U diag(sqrt(value)).
    """

    vectors: np.ndarray  # (n_pairs, rank), orthonormal columns
    values: np.ndarray  # (rank,), strictly positive, descending

    @property
    def rank(self):
        return self.values.shape[0]

    @property
    def whitening_map(self):
        return self.vectors / np.sqrt(self.values)[None, :]

    @property
    def coloring_map(self):
        return self.vectors * np.sqrt(self.values)[None, :]


def default_iteration_count(offdiag):
    """ceil(log2(2 ||A||_F / target)) solves, floored at 1."""
    norm = float(np.linalg.norm(offdiag))
    if norm <= _TARGET:
        return 1
    return max(1, math.ceil(math.log2(2.0 * norm / _TARGET)))


def _masked_objective(offdiag, product):
    err = offdiag - product
    np.fill_diagonal(err, 0.0)
    return float((err * err).sum())


def altmin_complete(offdiag, rank, n_iterations=None):
    """Alternating least-squares completion of a symmetric off-diagonal matrix.

    ``offdiag`` is square and symmetric with the diagonal treated as
    unobserved (any diagonal values are ignored).  Starts from the
    eigenvectors of the ``rank`` largest-magnitude eigenvalues and runs
    ``n_iterations`` solves (default scales with log of the input norm).
    Singular row systems fall back to a ridge of 1e-12 and are flagged in
    the result's ``ridge_steps``.
    """
    a = np.array(offdiag, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("offdiag must be square")
    if not np.isfinite(a).all():
        raise ValidationError("offdiag must be finite")
    n = a.shape[0]
    rank = int(rank)
    if not 1 <= rank <= n:
        raise ValidationError("rank must be in [1, N]")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > 1e-8 * scale:
        raise ValidationError("offdiag must be symmetric")
    np.fill_diagonal(a, 0.0)
    if n_iterations is None:
        n_iterations = default_iteration_count(a)
    n_iterations = int(n_iterations)
    if n_iterations < 1:
        raise ValidationError("n_iterations must be at least 1")

    values, vectors = np.linalg.eigh(a)
    order = np.argsort(-np.abs(values))
    basis = vectors[:, order[:rank]]

    result = AltMinResult(matrix=None)
    solution = None
    previous = None
    eye = np.eye(rank)
    for step in range(n_iterations):
        gram = basis.T @ basis
        rhs = a @ basis  # diagonal of a is zero, so row sums need no correction
        systems = gram[None, :, :] - basis[:, :, None] * basis[:, None, :]
        try:
            solution = np.linalg.solve(systems, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            solution = np.linalg.solve(systems + _RIDGE * eye[None, :, :], rhs[:, :, None])[
                :, :, 0
            ]
            result.ridge_steps.append(step)
        previous = basis
        result.objectives.append(_masked_objective(a, solution @ previous.T))
        basis, _ = np.linalg.qr(solution)
    result.matrix = solution @ previous.T
    return result


def symmetrize_and_eig(matrix, rank):
    """Whitening basis from the top-rank eigenpairs of (M + M^T) / 2.

    Takes the ``rank`` algebraically largest eigenvalues; raises
    ``RankDeficiencyError`` (carrying the full descending spectrum) unless
    all of them are strictly positive.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("matrix must be square")
    rank = int(rank)
    if not 1 <= rank <= m.shape[0]:
        raise ValidationError("rank must be in [1, N]")
    sym = 0.5 * (m + m.T)
    values, vectors = np.linalg.eigh(sym)
    values = values[::-1]
    vectors = vectors[:, ::-1]
    top = values[:rank]
    if top[-1] <= 0.0:
        raise RankDeficiencyError(
            f"only {int((top > 0).sum())} of the requested {rank} eigenvalues "
            "are positive",
            spectrum=values.copy(),
        )
    return WhiteningBasis(vectors=np.ascontiguousarray(vectors[:, :rank]), values=top.copy())
