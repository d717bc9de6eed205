"""Maximum likelihood estimation in Gaussian DAG models.

Each variable is a linear combination of its parents plus independent
mean-zero Gaussian noise.  A sample is an ``n x m`` matrix ``Y`` whose rows
are observations and whose columns ``Y^(k)`` are variables; the mean is
assumed known to be zero throughout.

The edge-weight estimate at a child vertex ``i`` consists of the
coefficients of the parent columns in the orthogonal projection of
``Y^(i)`` onto their span; the variance estimate is ``1/n`` times the
squared residual of that projection, and exists only when the residual is
strictly positive.  All functions are pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import EXISTS_NON_UNIQUE, EXISTS_UNIQUE, NONEXISTENT, Dag
from .linalg import DEFAULT_TOL, kernel_basis, min_norm_solve, project, rank

# Geometric-invariant-theory aliases for the three classification outcomes.
GIT_LABELS = {
    NONEXISTENT: "unstable",
    EXISTS_NON_UNIQUE: "polystable",
    EXISTS_UNIQUE: "stable",
}


def _as_sample(Y) -> np.ndarray:
    A = np.asarray(Y, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"sample must be a non-empty 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("sample entries must be finite")
    return A


def _check_shapes(Y: np.ndarray, g: Dag) -> None:
    if Y.shape[1] != g.m:
        raise ValueError(f"sample has {Y.shape[1]} columns but the DAG has {g.m} vertices")


def parent_columns(Y, g: Dag, i: int) -> np.ndarray:
    """Submatrix of ``Y`` with columns indexed by the parents of ``i``."""
    A = _as_sample(Y)
    _check_shapes(A, g)
    return A[:, [j - 1 for j in g.parents(i)]]


@dataclass(frozen=True)
class MleEstimate:
    """Edge-weight and variance estimates, possibly partial.

    ``lam`` maps ``(i, j)`` to the coefficient of parent ``j`` at child ``i``
    (present exactly for the edges ``j -> i`` of the DAG; the returned
    representative is the minimum-norm solution when the solution set is a
    translate of a positive-dimensional space).  ``lambda_kernel_dims[i]``
    is the dimension of that translate space.  ``omega`` holds variance
    estimates only at vertices where they exist; ``omega_exists`` records
    existence for every vertex.
    """

    lam: dict[tuple[int, int], float] = field(default_factory=dict)
    lambda_kernel_dims: dict[int, int] = field(default_factory=dict)
    omega: dict[int, float] = field(default_factory=dict)
    omega_exists: dict[int, bool] = field(default_factory=dict)

    def unique_lambda(self, i: int) -> bool:
        return self.lambda_kernel_dims.get(i, 0) == 0

    def lambda_vector(self, g: Dag, i: int) -> np.ndarray:
        """Coefficients at child ``i``, ordered by ascending parent."""
        return np.array([self.lam[(i, j)] for j in g.parents(i)])

    def all_omega_exist(self, g: Dag) -> bool:
        return all(self.omega_exists.get(i, False) for i in range(1, g.m + 1))


@dataclass(frozen=True)
class Classification:
    """MLE existence/uniqueness status with its GIT-stability alias.

    ``witness`` names a vertex certifying nonexistence (its column lies in
    the parent span) or non-uniqueness (rank-deficient parent-and-self
    submatrix); ``None`` in the unique case.
    """

    status: str
    git_label: str
    witness: int | None


def duplicate(Y, k: int) -> np.ndarray:
    """Stack ``Y`` vertically ``k`` times.

    MLEs are invariant under this map, which is how samples with fewer
    observations than variables are lifted to the ``n >= m`` setting.
    """
    A = _as_sample(Y)
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"duplication count must be a positive integer, got {k!r}")
    return np.vstack([A] * k)


def _residual_exists(resid: np.ndarray, col: np.ndarray, tol: float) -> bool:
    # "strictly positive residual" read with a relative floating-point margin
    return float(np.linalg.norm(resid)) > tol * (1.0 + float(np.linalg.norm(col)))


def lambda_mle(Y, g: Dag, tol: float = DEFAULT_TOL) -> MleEstimate:
    """Edge-weight MLE given ``Y``.

    Always exists.  At each child vertex the minimum-norm coefficient vector
    is returned, with the kernel dimension of the parent submatrix recording
    the size of the full solution set.
    """
    A = _as_sample(Y)
    _check_shapes(A, g)
    lam: dict[tuple[int, int], float] = {}
    kdims: dict[int, int] = {}
    for i in range(1, g.m + 1):
        pa = g.parents(i)
        if not pa:
            kdims[i] = 0
            continue
        P = A[:, [j - 1 for j in pa]]
        x = min_norm_solve(P, A[:, i - 1], tol)
        for j, value in zip(pa, x):
            lam[(i, j)] = float(value)
        kdims[i] = len(pa) - rank(P, tol)
    return MleEstimate(lam=lam, lambda_kernel_dims=kdims)


def lambda_kernel_basis(Y, g: Dag, i: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the translate space of the edge-weight solution
    set at child ``i`` (the kernel of the parent submatrix)."""
    P = parent_columns(Y, g, i)
    return kernel_basis(P, tol)


def omega_mle(Y, g: Dag, tol: float = DEFAULT_TOL) -> MleEstimate:
    """Variance MLE given ``Y``; marked absent wherever the projection
    residual vanishes.  Unique whenever it exists."""
    A = _as_sample(Y)
    _check_shapes(A, g)
    n = A.shape[0]
    omega: dict[int, float] = {}
    exists: dict[int, bool] = {}
    for i in range(1, g.m + 1):
        col = A[:, i - 1]
        resid = col - project(col, parent_columns(A, g, i), tol)
        if _residual_exists(resid, col, tol):
            exists[i] = True
            omega[i] = float(resid @ resid) / n
        else:
            exists[i] = False
    return MleEstimate(omega=omega, omega_exists=exists)


def full_mle(Y, g: Dag, tol: float = DEFAULT_TOL) -> MleEstimate:
    """Combined edge-weight and variance estimates given ``Y``."""
    lpart = lambda_mle(Y, g, tol)
    opart = omega_mle(Y, g, tol)
    return MleEstimate(
        lam=lpart.lam,
        lambda_kernel_dims=lpart.lambda_kernel_dims,
        omega=opart.omega,
        omega_exists=opart.omega_exists,
    )


def classify(Y, g: Dag, tol: float = DEFAULT_TOL) -> Classification:
    """Existence/uniqueness of the MLE given ``Y``.

    Nonexistent iff some column lies in its parent span (the span of an
    empty parent set is the zero space, so a zero column always certifies
    nonexistence).  Unique iff every parent-and-self submatrix has full
    column rank.
    """
    A = _as_sample(Y)
    _check_shapes(A, g)
    for i in range(1, g.m + 1):
        col = A[:, i - 1]
        resid = col - project(col, parent_columns(A, g, i), tol)
        if not _residual_exists(resid, col, tol):
            return Classification(NONEXISTENT, GIT_LABELS[NONEXISTENT], i)
    for i in range(1, g.m + 1):
        cols = sorted(g.parents(i) + [i])
        sub = A[:, [c - 1 for c in cols]]
        if rank(sub, tol) < len(cols):
            return Classification(EXISTS_NON_UNIQUE, GIT_LABELS[EXISTS_NON_UNIQUE], i)
    return Classification(EXISTS_UNIQUE, GIT_LABELS[EXISTS_UNIQUE], None)


def is_lambda_mle(
    Y, g: Dag, lam: dict[tuple[int, int], float], tol: float = DEFAULT_TOL
) -> bool:
    """Verify that ``lam`` solves the per-vertex normal equations of ``Y``,
    i.e. that it is an edge-weight MLE given ``Y`` (not necessarily the
    minimum-norm one)."""
    A = _as_sample(Y)
    _check_shapes(A, g)
    for (i, j) in lam:
        if not g.has_edge(j, i):
            raise ValueError(f"edge weight given for non-edge {j} -> {i}")
    for i in g.child_vertices():
        pa = g.parents(i)
        if any((i, j) not in lam for j in pa):
            return False
        P = A[:, [j - 1 for j in pa]]
        x = np.array([lam[(i, j)] for j in pa])
        b = A[:, i - 1]
        resid = P.T @ (b - P @ x)
        scale = 1.0 + np.linalg.norm(P.T @ b) + np.linalg.norm(P.T @ P) * np.linalg.norm(x)
        if np.linalg.norm(resid) > tol * scale:
            return False
    return True


def is_mle(Y, g: Dag, est: MleEstimate, tol: float = DEFAULT_TOL) -> bool:
    """Verify that ``est`` is an MLE given ``Y``: the edge weights solve the
    normal equations, the variance MLE exists at every vertex, and the
    variance entries match the projection residuals."""
    A = _as_sample(Y)
    if not is_lambda_mle(A, g, est.lam, tol):
        return False
    reference = omega_mle(A, g, tol)
    if not reference.all_omega_exist(g):
        return False
    for i in range(1, g.m + 1):
        if not est.omega_exists.get(i, False) or i not in est.omega:
            return False
        ref = reference.omega[i]
        if abs(est.omega[i] - ref) > tol * (1.0 + abs(ref)):
            return False
    return True


def covariance(est: MleEstimate, g: Dag) -> np.ndarray:
    """Model covariance ``(I - L)^-1 W (I - L)^-T`` assembled from an
    estimate with all variances present.

    ``L`` carries the edge weights (row = child, column = parent) and ``W``
    is the diagonal of variances.  ``I - L`` is unipotent in a topological
    order, hence always invertible.
    """
    m = g.m
    if not est.all_omega_exist(g):
        missing = [i for i in range(1, m + 1) if not est.omega_exists.get(i, False)]
        raise ValueError(f"variance estimates missing at vertices {missing}")
    L = np.zeros((m, m))
    for (i, j), value in est.lam.items():
        if not g.has_edge(j, i):
            raise ValueError(f"edge weight present for non-edge {j} -> {i}")
        L[i - 1, j - 1] = value
    W = np.diag([est.omega[i] for i in range(1, m + 1)])
    Minv = np.linalg.inv(np.eye(m) - L)
    S = Minv @ W @ Minv.T
    return (S + S.T) / 2.0


def loglik(Sigma, Y, tol: float = DEFAULT_TOL) -> float:
    """Gaussian log-likelihood of covariance ``Sigma`` given ``Y``, up to
    additive and positive multiplicative constants:
    ``-log det(Sigma) - tr(Sigma^-1 S_Y)`` with ``S_Y = Y^T Y / n``.

    Rejects matrices that are not symmetric positive definite under ``tol``;
    boundary cases are the caller's concern.
    """
    S = np.asarray(Sigma, dtype=float)
    A = _as_sample(Y)
    m = A.shape[1]
    if S.shape != (m, m):
        raise ValueError(f"covariance must be {m} x {m}, got {S.shape}")
    if np.max(np.abs(S - S.T)) > tol * (1.0 + np.max(np.abs(S))):
        raise ValueError("covariance must be symmetric")
    eigs = np.linalg.eigvalsh((S + S.T) / 2.0)
    if eigs[0] <= tol * max(eigs[-1], 0.0):
        raise ValueError("covariance must be positive definite")
    n = A.shape[0]
    sample_cov = A.T @ A / n
    _, logdet = np.linalg.slogdet(S)
    return float(-logdet - np.trace(np.linalg.solve(S, sample_cov)))
