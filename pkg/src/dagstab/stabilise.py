"""Sample perturbations and stabilisations.

A perturbation of a sample ``f`` (an ``n x m`` matrix with ``n >= m``) is a
matrix ``f'`` whose image lies in the orthogonal complement of ``im f`` and
whose kernel is exactly the orthogonal complement of ``ker f``.  The sum
``f + f'`` is a stabilisation: it always has full column rank, so the MLE
given it is unique in any DAG model on ``m`` vertices.

Perturbations are assembled from affine lifts of complete collineations: a
chain of stage maps, each defined on the kernel of the previous stage and
mapping into its cokernel (embedded in ``R^n`` via iterated orthogonal
complements), with every stage degenerate except the last.

Randomised lifts draw stage maps with independent standard Gaussian entries
from ``numpy.random.default_rng`` (PCG64); given a seed, the drawn stream is
reproducible bit-for-bit across platforms.  Kernel and cokernel bases are
the deterministic singular-vector bases produced by :mod:`dagstab.linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    image_basis,
    kernel_basis,
    orth_complement,
    rank,
)


class InvalidPerturbationError(ValueError):
    """Raised when a claimed perturbation violates its defining conditions."""


class InvalidLiftError(ValueError):
    """Raised when a collineation lift violates its structural invariants."""


def _as_matrix(M, name: str) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {A.shape}")
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError(f"{name} entries must be finite")
    return A


def _require_tall(f: np.ndarray) -> None:
    n, m = f.shape
    if n < m:
        raise ValueError(
            f"sample is {n} x {m} with n < m; duplicate observations first "
            "(dagstab.mle.duplicate) so that n >= m"
        )


@dataclass(frozen=True)
class PerturbationCheck:
    """Outcome of the perturbation predicate with named diagnostics.

    ``column_orthogonality`` checks that the image of the candidate lies in
    the orthogonal complement of the sample's image; ``row_orthogonality``
    that the candidate vanishes on the orthogonal complement of the sample's
    kernel; ``rank_ok`` that the candidate's rank is exactly ``m - rank(f)``.
    """

    ok: bool
    column_orthogonality: bool
    row_orthogonality: bool
    rank_ok: bool
    expected_rank: int
    actual_rank: int
    max_column_product: float
    max_row_product: float

    def __bool__(self) -> bool:
        return self.ok

    @property
    def failures(self) -> tuple[str, ...]:
        out = []
        if not self.column_orthogonality:
            out.append("column-orthogonality")
        if not self.row_orthogonality:
            out.append("row-orthogonality")
        if not self.rank_ok:
            out.append("rank")
        return tuple(out)


def is_perturbation(f, fp, tol: float = DEFAULT_TOL) -> PerturbationCheck:
    """Test whether ``fp`` is a perturbation of the sample ``f``.

    Requires ``n >= m`` (raises otherwise).  Both orthogonality conditions
    reduce to matrix products: ``f^T fp`` vanishing makes the columns of
    ``fp`` orthogonal to those of ``f``; ``fp f^T`` vanishing makes ``fp``
    vanish on the row space of ``f``.  Together with
    ``rank(fp) = m - rank(f)`` these are exactly the defining conditions,
    i.e. membership of ``fp`` in the parameter space of stabilisations.
    """
    F = _as_matrix(f, "sample")
    P = _as_matrix(fp, "perturbation")
    _require_tall(F)
    if P.shape != F.shape:
        raise ValueError(f"shape mismatch: sample {F.shape}, perturbation {P.shape}")

    scale_f = np.linalg.norm(F, 2) if F.size else 0.0
    scale_p = np.linalg.norm(P, 2) if P.size else 0.0
    thresh = tol * (1.0 + scale_f * scale_p)

    max_col = float(np.max(np.abs(F.T @ P), initial=0.0))
    max_row = float(np.max(np.abs(P @ F.T), initial=0.0))
    col_ok = bool(max_col <= thresh)
    row_ok = bool(max_row <= thresh)

    expected = F.shape[1] - rank(F, tol)
    actual = rank(P, tol)
    rank_ok = actual == expected

    return PerturbationCheck(
        ok=col_ok and row_ok and rank_ok,
        column_orthogonality=col_ok,
        row_orthogonality=row_ok,
        rank_ok=rank_ok,
        expected_rank=expected,
        actual_rank=actual,
        max_column_product=max_col,
        max_row_product=max_row,
    )


@dataclass(frozen=True, eq=False)
class Perturbation:
    """A validated perturbation ``delta`` of the sample ``base``.

    Construction re-runs the full predicate and raises
    :class:`InvalidPerturbationError` on violation; instances are immutable
    afterwards.
    """

    base: np.ndarray
    delta: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        F = _as_matrix(self.base, "sample").copy()
        P = _as_matrix(self.delta, "perturbation").copy()
        check = is_perturbation(F, P, self.tol)
        if not check:
            raise InvalidPerturbationError(
                f"not a perturbation; failed conditions: {', '.join(check.failures)}"
            )
        F.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "base", F)
        object.__setattr__(self, "delta", P)

    def column(self, i: int) -> np.ndarray:
        """Perturbation column of variable ``i`` (1-indexed)."""
        return self.delta[:, i - 1]

    def scaled(self, eps: float) -> np.ndarray:
        """The perturbed sample ``base + eps * delta``."""
        return self.base + eps * self.delta


@dataclass(frozen=True, eq=False)
class LiftStage:
    """One stage of an affine lift beyond the base sample.

    ``kernel_basis``: orthonormal columns in ``R^m`` spanning the kernel of
    the previous stage (a subspace of the previous kernel).
    ``cokernel_basis``: orthonormal columns in ``R^n`` spanning the current
    cokernel, embedded via iterated orthogonal complements.
    ``stage_map``: the stage's matrix in those bases; nonzero.
    """

    kernel_basis: np.ndarray
    cokernel_basis: np.ndarray
    stage_map: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """The stage as a map ``R^m -> R^n`` (pre-composed with the kernel
        projection, post-composed with the cokernel embedding)."""
        return self.cokernel_basis @ self.stage_map @ self.kernel_basis.T


@dataclass(frozen=True, eq=False)
class CollineationLift:
    """Affine lift of a complete collineation with first term the sample.

    ``stages`` holds the stages after the first; it is empty exactly when
    the sample already has full column rank.  ``seed`` records the RNG seed
    when the lift was drawn by :func:`random_lift`.
    """

    base: np.ndarray
    stages: tuple[LiftStage, ...]
    seed: int | None = None

    @property
    def length(self) -> int:
        """Number of terms in the underlying collineation."""
        return 1 + len(self.stages)


def _check_orthonormal(B: np.ndarray, what: str, tol: float) -> None:
    if B.shape[1] == 0:
        raise InvalidLiftError(f"{what} has no columns")
    G = B.T @ B - np.eye(B.shape[1])
    if np.max(np.abs(G)) > max(tol, 1e-8):
        raise InvalidLiftError(f"{what} does not have orthonormal columns")


def validate_lift(lift: CollineationLift, tol: float = DEFAULT_TOL) -> None:
    """Check the structural invariants of a lift; raise on violation.

    Every stage map except the last must be degenerate (rank below its
    column count) and nonzero; the last must have full column rank.  Kernel
    bases must be nested and annihilated by the preceding map; cokernel
    embeddings must be pairwise orthogonal and orthogonal to the image of
    everything before them.
    """
    F = _as_matrix(lift.base, "sample")
    _require_tall(F)
    n, m = F.shape
    r = rank(F, tol)
    if not lift.stages:
        if r < m:
            raise InvalidLiftError(
                "rank-deficient sample needs at least one stage beyond the base"
            )
        return
    ortho_tol = max(tol, 1e-8)
    prev_kernel_dim = m - r
    prev_cokernel_dim = n - r
    prev_map: np.ndarray = F
    prev_basis: np.ndarray | None = None
    images: list[np.ndarray] = [image_basis(F, tol)]
    for idx, st in enumerate(lift.stages):
        K, C, M = (
            _as_matrix(st.kernel_basis, "kernel basis"),
            _as_matrix(st.cokernel_basis, "cokernel basis"),
            _as_matrix(st.stage_map, "stage map"),
        )
        if K.shape[0] != m or C.shape[0] != n:
            raise InvalidLiftError(f"stage {idx + 2}: basis ambient dimensions wrong")
        _check_orthonormal(K, f"stage {idx + 2} kernel basis", tol)
        _check_orthonormal(C, f"stage {idx + 2} cokernel basis", tol)
        if K.shape[1] != prev_kernel_dim:
            raise InvalidLiftError(
                f"stage {idx + 2}: kernel basis has {K.shape[1]} columns, "
                f"expected {prev_kernel_dim}"
            )
        if C.shape[1] != prev_cokernel_dim:
            raise InvalidLiftError(
                f"stage {idx + 2}: cokernel basis has {C.shape[1]} columns, "
                f"expected {prev_cokernel_dim}"
            )
        if M.shape != (C.shape[1], K.shape[1]):
            raise InvalidLiftError(
                f"stage {idx + 2}: stage map shape {M.shape} does not match bases"
            )
        # kernel basis must be annihilated by the previous map
        if np.max(np.abs(prev_map @ K), initial=0.0) > ortho_tol * (
            1.0 + np.linalg.norm(prev_map, 2)
        ):
            raise InvalidLiftError(
                f"stage {idx + 2}: kernel basis does not span the previous kernel"
            )
        if prev_basis is not None:
            # nesting in R^m
            off = K - prev_basis @ (prev_basis.T @ K)
            if np.max(np.abs(off)) > ortho_tol:
                raise InvalidLiftError(
                    f"stage {idx + 2}: kernel basis is not nested in the previous one"
                )
        # cokernel embedding orthogonal to all previous images
        for Q in images:
            if Q.shape[1] and np.max(np.abs(Q.T @ C), initial=0.0) > ortho_tol:
                raise InvalidLiftError(
                    f"stage {idx + 2}: cokernel embedding meets an earlier image"
                )
        rk = rank(M, tol)
        if rk == 0:
            raise InvalidLiftError(f"stage {idx + 2}: stage map is zero")
        last = idx == len(lift.stages) - 1
        if last:
            if rk < M.shape[1]:
                raise InvalidLiftError("final stage map must have full column rank")
        else:
            if rk >= M.shape[1]:
                raise InvalidLiftError(
                    f"stage {idx + 2}: only the final stage map may be non-degenerate"
                )
        images.append(C @ image_basis(M, tol))
        prev_kernel_dim = K.shape[1] - rk
        prev_cokernel_dim = C.shape[1] - rk
        prev_map = C @ M @ K.T
        prev_basis = K
    if prev_kernel_dim != 0:
        raise InvalidLiftError("lift terminates with a nonzero kernel")


def build_from_lift(lift: CollineationLift, tol: float = DEFAULT_TOL) -> Perturbation:
    """Assemble the perturbation determined by an affine lift.

    The perturbation is the sum of the stage maps viewed as maps
    ``R^m -> R^n``; successive kernel projections collapse to a single
    orthogonal projection because the kernels are nested.
    """
    validate_lift(lift, tol)
    F = _as_matrix(lift.base, "sample")
    delta = np.zeros_like(F)
    for st in lift.stages:
        delta += st.as_matrix()
    return Perturbation(F, delta, tol)


def stabilize(f, fp, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The stabilised sample ``f + f'``.

    Accepts a raw candidate matrix (validated here) or a
    :class:`Perturbation`.  The result always has full column rank, which is
    asserted; failure signals numerically inconsistent input.
    """
    if isinstance(fp, Perturbation):
        F, P = fp.base, fp.delta
        if f is not None and not np.array_equal(_as_matrix(f, "sample"), F):
            raise ValueError("sample does not match the perturbation's base")
    else:
        F = _as_matrix(f, "sample")
        P = _as_matrix(fp, "perturbation")
        check = is_perturbation(F, P, tol)
        if not check:
            raise InvalidPerturbationError(
                f"not a perturbation; failed conditions: {', '.join(check.failures)}"
            )
    out = F + P
    m = F.shape[1]
    got = rank(out, tol)
    if got != m:
        raise ValueError(
            f"stabilised sample has rank {got} != {m}; input is numerically inconsistent"
        )
    return out


def random_lift(f, seed: int, tol: float = DEFAULT_TOL) -> CollineationLift:
    """Draw an affine lift with first term ``f`` by the sampling procedure.

    While the current stage map is degenerate: take the singular-vector
    basis of its kernel, draw a ``dim(cokernel) x dim(kernel)`` stage map
    with independent standard Gaussian entries, and recurse with kernel and
    cokernel bases propagated through the chain.  An all-zero draw (measure
    zero) is rejected and redrawn from the incremented seed.  Generically
    the lift has two terms.
    """
    F = _as_matrix(f, "sample")
    _require_tall(F)
    n, m = F.shape
    if not isinstance(seed, int) or seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    rng = np.random.default_rng(seed)
    bump = seed

    K = kernel_basis(F, tol)
    C = orth_complement(image_basis(F, tol), n, tol)
    stages: list[LiftStage] = []
    while K.shape[1] > 0:
        M = rng.standard_normal((C.shape[1], K.shape[1]))
        while not np.any(M):
            bump += 1
            rng = np.random.default_rng(bump)
            M = rng.standard_normal((C.shape[1], K.shape[1]))
        stages.append(LiftStage(K, C, M))
        rk = rank(M, tol)
        if rk == K.shape[1]:
            break
        K = K @ kernel_basis(M, tol)
        C = C @ orth_complement(image_basis(M, tol), C.shape[1], tol)
    return CollineationLift(F, tuple(stages), seed=seed)
