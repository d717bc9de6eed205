"""Membership predicates for the parameter spaces of stabilisations.

Three nested varieties of candidate perturbations of a fixed sample ``f``
are queried pointwise:

* the perturbations themselves (orthogonality plus the rank condition);
* those whose stabilised MLE equals a prescribed estimate ``alpha`` (cut
  out by the linear equations ``v_i = sum_j lambda_ij v_j`` at every child
  vertex);
* those whose *limit* MLE equals ``alpha`` (cut out by ``c_l lambda_i = D_l``
  in the per-vertex pencil data).

These are membership tests on given points only; deciding emptiness of the
varieties is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import NONEXISTENT, Dag, is_star
from .linalg import DEFAULT_TOL, min_norm_solve
from .mle import MleEstimate, classify, is_mle, lambda_mle, omega_mle, parent_columns
from .limits import check_alpha_fixed, limit_lambda_analytic
from .stabilise import is_perturbation


class AlphaNotMleError(ValueError):
    """Raised when the supplied estimate is not an MLE given the sample."""


@dataclass(frozen=True)
class VarietyQuery:
    """A pointwise membership query.

    ``candidate`` is the matrix whose membership is tested; ``alpha`` is
    required by the two alpha-indexed predicates and ignored by the first.
    """

    f: np.ndarray
    candidate: np.ndarray
    g: Dag
    alpha: MleEstimate | None = None
    tol: float = DEFAULT_TOL


def in_Xf(q: VarietyQuery) -> bool:
    """Is the candidate a perturbation of ``f``?  Identical to the
    perturbation predicate."""
    return bool(is_perturbation(q.f, q.candidate, q.tol))


def in_Xf_alpha(q: VarietyQuery) -> bool:
    """Is the candidate a perturbation whose stabilised MLE equals
    ``alpha`` in every child-vertex component?

    ``alpha`` must be an MLE given ``f``; this is re-verified here (the
    equivalence between the defining equations and the stabilised MLE
    presumes it) and :class:`AlphaNotMleError` is raised on failure.
    Membership makes the stabilised edge weights and child-vertex residual
    variances equal ``alpha``'s; source-vertex variances shift by the
    squared norms of their perturbation columns, which only vanishes in the
    ``eps -> 0`` limit.
    """
    if q.alpha is None:
        raise ValueError("membership in the alpha-indexed variety needs alpha")
    if classify(q.f, q.g, q.tol).status == NONEXISTENT or not is_mle(
        q.f, q.g, q.alpha, max(q.tol, 1e-8)
    ):
        raise AlphaNotMleError("alpha is not an MLE given the sample")
    if not in_Xf(q):
        return False
    return all(check_alpha_fixed(q.candidate, q.alpha.lam, q.g, q.tol).values())


def in_Xf_alpha_lim(q: VarietyQuery) -> bool:
    """Is the candidate a perturbation whose limit MLE has the edge-weight
    part of ``alpha``?

    Tested through the per-vertex pencil data: membership holds when
    ``|c_l * lambda_i - D_l|`` vanishes at scale at every child vertex.
    Only the edge-weight part of ``alpha`` is consulted.
    """
    if q.alpha is None:
        raise ValueError("membership in the alpha-indexed variety needs alpha")
    if not in_Xf(q):
        return False
    analytic = limit_lambda_analytic(q.f, q.candidate, q.g, q.tol)
    for i in q.g.child_vertices():
        pa = q.g.parents(i)
        if any((i, j) not in q.alpha.lam for j in pa):
            raise ValueError(f"alpha is missing edge weights at vertex {i}")
        lam_i = np.array([q.alpha.lam[(i, j)] for j in pa])
        diag = analytic.diagnostics[i]
        lhs = diag.det_coeff * lam_i - diag.numerator
        scale = (
            abs(diag.det_coeff) * float(np.linalg.norm(lam_i))
            + float(np.linalg.norm(diag.numerator))
            + 1.0
        )
        if float(np.linalg.norm(lhs)) > q.tol * scale:
            return False
    return True


def star_min_norm_mle(f, g: Dag, tol: float = DEFAULT_TOL) -> MleEstimate:
    """The minimum-norm MLE given ``f`` on a star-shaped DAG.

    Star-shaped DAG models are linear regression models; when the MLE given
    ``f`` exists, the MLE given *any* stabilisation of ``f`` — and the limit
    MLE along any stabilisation path — equals this one, making it the
    distinguished representative of the solution set.
    """
    if not is_star(g):
        raise ValueError("the minimum-norm characterisation needs a star-shaped DAG")
    status = classify(f, g, tol)
    if status.status == NONEXISTENT:
        raise ValueError(
            f"no MLE exists given the sample (witness vertex {status.witness})"
        )
    hub = g.child_vertices()[0]
    F = np.asarray(f, dtype=float)
    x = min_norm_solve(parent_columns(F, g, hub), F[:, hub - 1], tol)
    base = lambda_mle(F, g, tol)
    lam = dict(base.lam)
    for j, value in zip(g.parents(hub), x):
        lam[(hub, j)] = float(value)
    opart = omega_mle(F, g, tol)
    return MleEstimate(
        lam=lam,
        lambda_kernel_dims=base.lambda_kernel_dims,
        omega=opart.omega,
        omega_exists=opart.omega_exists,
    )
