"""Dense real linear algebra primitives.

Ranks, orthonormal image/kernel bases, orthogonal projections, minimum-norm
least squares, and the polynomial expansion of the one-parameter pencil
``C(eps) = A^T A + eps E^T E`` that drives the closed-form limit machinery
in :mod:`dagstab.limits`.

All operations are pure functions on immutable values; inputs are never
mutated.  Tolerances are relative to the largest singular value involved,
defaulting to ``DEFAULT_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10

# Relative threshold for locating the first non-vanishing determinant
# coefficient of the pencil.  Coefficients are compared against the largest
# coefficient in magnitude, since they are exact-arithmetic zeros in theory
# and only roundoff in practice.
FIRST_NONZERO_TOL = 1e-9


def _as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {A.shape}")
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def _as_vector(v) -> np.ndarray:
    x = np.asarray(v, dtype=float).reshape(-1)
    if x.size and not np.all(np.isfinite(x)):
        raise ValueError("vector entries must be finite")
    return x


def rank(M, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank: number of singular values above ``tol * sigma_max``."""
    A = _as_matrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def image_basis(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column space, as columns of an ``n x r`` array."""
    A = _as_matrix(M)
    n = A.shape[0]
    if A.size == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return U[:, :r]


def kernel_basis(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the null space, as columns of a ``p x (p-r)`` array."""
    A = _as_matrix(M)
    p = A.shape[1]
    if p == 0:
        return np.zeros((0, 0))
    if A.shape[0] == 0 or not np.any(A):
        return np.eye(p)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return Vt[r:].T


def orth_complement(B, dim: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(B)`` in
    ``R^dim``.

    ``B`` need not have orthonormal columns (it is orthonormalised
    internally); a ``B`` with empty span yields a basis of all of ``R^dim``.
    """
    A = _as_matrix(B)
    if A.size and A.shape[0] != dim:
        raise ValueError(f"basis lives in R^{A.shape[0]}, ambient dim is {dim}")
    Q = image_basis(A, tol) if A.size else np.zeros((dim, 0))
    if Q.shape[1] == 0:
        return np.eye(dim)
    return kernel_basis(Q.T, tol)


def project(v, B, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the column span of ``B``.

    The span of an empty (or zero) ``B`` is the zero space, so the
    projection is the zero vector.
    """
    x = _as_vector(v)
    Q = image_basis(B, tol)
    if Q.shape[1] == 0:
        return np.zeros_like(x)
    if Q.shape[0] != x.size:
        raise ValueError(f"cannot project R^{x.size} vector onto span in R^{Q.shape[0]}")
    return Q @ (Q.T @ x)


def min_norm_solve(A, b, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Minimum-2-norm solution of ``A x = proj_A(b)``.

    Equals ``pinv(A) @ b``; reduces to the unique least-squares solution when
    ``A`` has full column rank.
    """
    M = _as_matrix(A)
    y = _as_vector(b)
    if M.shape[0] != y.size:
        raise ValueError(f"shape mismatch: A is {M.shape}, b has length {y.size}")
    if M.shape[1] == 0:
        return np.zeros(0)
    x, *_ = np.linalg.lstsq(M, y, rcond=tol)
    return x


@dataclass(frozen=True, eq=False)
class PencilExpansion:
    """Polynomial data of the pencil ``C(eps) = A^T A + eps E^T E``.

    ``det_coeffs`` and ``adj_coeffs`` hold Taylor coefficients: writing
    ``det C(eps) = sum_k c_k eps^k`` and ``adj C(eps) = sum_k G_k eps^k``,
    entry ``k`` equals ``(1/k!) d^k/deps^k|_0`` of the respective quantity.
    Identities stated with raw derivatives translate through the factor
    ``k!``; in particular Jacobi's formula reads
    ``(k+1) c_{k+1} = tr(G_k E^T E)`` in this normalisation.

    ``first_nonzero`` is the smallest ``k`` with ``|c_k|`` above
    ``FIRST_NONZERO_TOL`` relative to the largest coefficient.  It exists
    because ``C(1) = (A+E)^T (A+E)`` is positive definite.
    """

    size: int
    det_coeffs: np.ndarray
    adj_coeffs: tuple[np.ndarray, ...]
    first_nonzero: int

    def det_at(self, eps: float) -> float:
        """Evaluate ``det C(eps)`` from the stored coefficients."""
        return float(np.polynomial.polynomial.polyval(eps, self.det_coeffs))

    def adj_at(self, eps: float) -> np.ndarray:
        """Evaluate ``adj C(eps)`` from the stored coefficients."""
        out = np.zeros((self.size, self.size))
        for k, G in enumerate(self.adj_coeffs):
            out += G * eps**k
        return out

    def adj_coeff(self, k: int) -> np.ndarray:
        """Taylor coefficient ``k`` of the adjugate; zero outside ``0..p-1``."""
        if 0 <= k < len(self.adj_coeffs):
            return self.adj_coeffs[k]
        return np.zeros((self.size, self.size))


def _poly_coeffs(nodes, values) -> np.ndarray:
    """Coefficients (ascending) of the polynomial interpolating ``values`` at
    ``nodes``; exact for polynomials of degree ``< len(nodes)``.

    ``values`` may carry trailing axes (e.g. matrices); interpolation is
    entrywise along axis 0.
    """
    x = np.asarray(nodes, dtype=float)
    vals = np.asarray(values, dtype=float)
    V = np.vander(x, increasing=True)
    flat = vals.reshape(len(x), -1)
    coeffs = np.linalg.solve(V, flat)
    return coeffs.reshape(vals.shape)


def pencil_expand(
    A,
    E,
    tol: float = DEFAULT_TOL,
    first_nonzero_tol: float = FIRST_NONZERO_TOL,
) -> PencilExpansion:
    """Expand ``det`` and ``adj`` of ``C(eps) = A^T A + eps E^T E`` as
    polynomials in ``eps``.

    Parameters
    ----------
    A, E:
        Same-shape ``n x p`` matrices.  Every column of ``A`` must be
        orthogonal to every column of ``E``, and ``A + E`` must have full
        column rank (so ``C(eps)`` is positive definite for ``eps > 0``).
    tol:
        Relative tolerance for the orthogonality and rank preconditions.
    first_nonzero_tol:
        Relative threshold used to locate the first non-vanishing
        determinant coefficient.

    Raises
    ------
    ValueError
        On shape mismatch, violated orthogonality, rank-deficient ``A + E``,
        or a determinant with all coefficients below tolerance (numerically
        invalid input).

    Notes
    -----
    Coefficients are recovered by evaluating at the integer nodes
    ``eps = 0..p`` (determinant, degree ``<= p``) and ``eps = 1..p``
    (adjugate, entrywise degree ``<= p-1``) followed by exact-degree
    interpolation.  ``C(eps)`` is positive definite at every positive node,
    so the adjugate can be formed as ``det * inverse`` there.
    """
    A = _as_matrix(A)
    E = _as_matrix(E)
    if A.shape != E.shape:
        raise ValueError(f"shape mismatch: A is {A.shape}, E is {E.shape}")
    p = A.shape[1]
    if p == 0:
        return PencilExpansion(0, np.array([1.0]), (), 0)

    scale_a = np.linalg.norm(A, 2) if A.size else 0.0
    scale_e = np.linalg.norm(E, 2) if E.size else 0.0
    cross = A.T @ E
    if np.max(np.abs(cross), initial=0.0) > tol * (1.0 + scale_a * scale_e):
        raise ValueError("columns of A are not orthogonal to columns of E")
    if rank(A + E, tol) < p:
        raise ValueError("A + E must have full column rank")

    AtA = A.T @ A
    EtE = E.T @ E

    det_vals = np.array([np.linalg.det(AtA + k * EtE) for k in range(p + 1)])
    det_coeffs = _poly_coeffs(np.arange(p + 1), det_vals)

    adj_vals = []
    for k in range(1, p + 1):
        C = AtA + k * EtE
        adj_vals.append(np.linalg.det(C) * np.linalg.inv(C))
    if p == 1:
        adj_coeffs = (np.array([[1.0]]),)
    else:
        stacked = _poly_coeffs(np.arange(1, p + 1), np.array(adj_vals))
        adj_coeffs = tuple(stacked[k] for k in range(p))

    cmax = np.max(np.abs(det_coeffs))
    if cmax <= 0.0 or not np.isfinite(cmax):
        raise ValueError("all determinant coefficients vanish; input is numerically invalid")
    nonzero = np.flatnonzero(np.abs(det_coeffs) > first_nonzero_tol * cmax)
    if nonzero.size == 0:
        raise ValueError("no determinant coefficient above tolerance")
    first = int(nonzero[0])

    det_coeffs.setflags(write=False)
    for G in adj_coeffs:
        G.setflags(write=False)
    return PencilExpansion(p, det_coeffs, adj_coeffs, first)
