"""Limits of MLEs along the path ``f + eps * f'`` as ``eps -> 0``.

For a sample ``f`` and a perturbation ``f'``, the scaled sum ``f + eps f'``
is a stabilisation for every ``eps != 0``, so the MLE given it is unique.
As ``eps`` tends to zero the estimate has a well-defined limit, computable
two ways:

* numerically, by evaluating the estimate on a decreasing grid of ``eps``
  values and extrapolating in ``eps^2`` (the per-vertex coefficient vectors
  are rational functions of ``eps^2``);
* analytically, from the polynomial expansion of the per-vertex pencil
  ``C(eps) = A^T A + eps E^T E``: with Taylor coefficients ``c_k`` of
  ``det C`` and ``G_k`` of ``adj C``, the limit coefficient vector at a
  child vertex is ``(G_l u + G_{l-1} w) / c_l`` where ``l`` is the first
  index with ``c_l != 0``, ``u`` collects the inner products of the parent
  columns of ``f`` with the projected target column, and ``w`` the same for
  the perturbation.

The two routes are independent and cross-validate each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Dag
from .linalg import DEFAULT_TOL, pencil_expand, project
from .mle import MleEstimate, full_mle, omega_mle
from .stabilise import InvalidPerturbationError, Perturbation, is_perturbation

DEFAULT_EPS_GRID = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)

# Minimum geometric growth of the coefficient-vector norms at the tail of
# the grid for the path to count as divergent.
DIVERGENCE_FACTOR = 10.0


def _coerce(f, fp, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Validate and unpack a (sample, perturbation) pair."""
    if isinstance(fp, Perturbation):
        if f is not None:
            F = np.asarray(f, dtype=float)
            if F.shape != fp.base.shape or not np.array_equal(F, fp.base):
                raise ValueError("sample does not match the perturbation's base")
        return fp.base, fp.delta
    F = np.asarray(f, dtype=float)
    P = np.asarray(fp, dtype=float)
    check = is_perturbation(F, P, tol)
    if not check:
        raise InvalidPerturbationError(
            f"not a perturbation; failed conditions: {', '.join(check.failures)}"
        )
    return F, P


def _vertex_system(F: np.ndarray, P: np.ndarray, g: Dag, i: int):
    """Parent submatrices and target columns ``(A, E, b, v)`` at child ``i``."""
    idx = [j - 1 for j in g.parents(i)]
    return F[:, idx], P[:, idx], F[:, i - 1], P[:, i - 1]


def vertex_system(f, fp, g: Dag, i: int, tol: float = DEFAULT_TOL):
    """The per-vertex linear system underlying the limit machinery.

    Returns ``(A, E, b, v)`` at child vertex ``i``: the parent columns of
    the sample and the perturbation, and the two target columns.  The
    orthogonality of the sample side to the perturbation side is inherited
    from the perturbation conditions, which are validated here.  Feed the
    pieces to :func:`limit_solve_numeric` or :func:`dagstab.pencil_expand`
    to study a single vertex in isolation.
    """
    F, P = _coerce(f, fp, tol)
    if i not in g.child_vertices():
        raise ValueError(f"vertex {i} has no parents")
    return _vertex_system(F, P, g, i)


@dataclass(frozen=True, eq=False)
class VertexDiagnostics:
    """Closed-form limit data at one child vertex.

    ``first_nonzero`` is the index ``l`` of the first non-vanishing
    determinant coefficient, ``det_coeff`` its value ``c_l``, and
    ``numerator`` the vector ``D_l`` with limit ``D_l / c_l``.
    """

    first_nonzero: int
    det_coeff: float
    numerator: np.ndarray


@dataclass(frozen=True)
class LimitResult:
    """Limit estimate along the stabilisation path.

    ``lam`` and ``omega`` mirror :class:`dagstab.mle.MleEstimate`;
    ``epsilon_independent[i]`` records whether the estimate at child ``i``
    is the same for every ``eps`` (not merely in the limit).  ``partial`` is
    set when some variance limit vanishes, so the record covers only a
    subset of vertices.  Numeric results carry per-vertex extrapolation
    error estimates and divergence flags instead of pencil diagnostics.
    """

    lam: dict[tuple[int, int], float]
    omega: dict[int, float]
    omega_exists: dict[int, bool]
    method: str
    epsilon_independent: dict[int, bool] = field(default_factory=dict)
    diagnostics: dict[int, VertexDiagnostics] = field(default_factory=dict)
    partial: bool = False
    diverged: bool = False
    diverged_vertices: tuple[int, ...] = ()
    extrapolation_error: dict[int, float] = field(default_factory=dict)

    def lambda_vector(self, g: Dag, i: int) -> np.ndarray:
        return np.array([self.lam[(i, j)] for j in g.parents(i)])


def mle_at_epsilon(f, fp, g: Dag, eps: float, tol: float = DEFAULT_TOL) -> MleEstimate:
    """The unique MLE given ``f + eps * f'`` for ``eps != 0``.

    Uniqueness (all kernel dimensions zero) is asserted; failure signals
    numerically inconsistent input.
    """
    if eps == 0:
        raise ValueError("eps must be nonzero; the limit operations handle eps -> 0")
    F, P = _coerce(f, fp, tol)
    est = full_mle(F + eps * P, g, tol)
    bad = [i for i, d in est.lambda_kernel_dims.items() if d != 0]
    bad += [i for i, ok in est.omega_exists.items() if not ok]
    if bad:
        raise ValueError(
            f"estimate at eps={eps} is not a unique MLE at vertices {sorted(set(bad))}; "
            "input is numerically inconsistent"
        )
    return est


def _neville_zero(eps_grid, values):
    """Extrapolate samples of an even rational function to ``eps = 0``.

    Polynomial extrapolation in ``h = eps^2`` over the full Neville table;
    returns the entry with the smallest estimated error (distance to its two
    parent entries) together with that estimate.  One-point input returns
    the point itself with an infinite estimate replaced by 0.0.
    """
    hs = [e * e for e in eps_grid]
    vals = [np.asarray(v, dtype=float) for v in values]
    if len(vals) == 1:
        return vals[0], 0.0
    best, best_est = vals[0], np.inf
    prev_row = vals
    for j in range(1, len(vals)):
        row = []
        for i in range(len(vals) - j):
            num = hs[i] * prev_row[i + 1] - hs[i + j] * prev_row[i]
            val = num / (hs[i] - hs[i + j])
            est = max(
                float(np.max(np.abs(val - prev_row[i]), initial=0.0)),
                float(np.max(np.abs(val - prev_row[i + 1]), initial=0.0)),
            )
            row.append(val)
            if est < best_est:
                best, best_est = val, est
        prev_row = row
    return best, float(best_est)


def _diverging(norms) -> bool:
    """Heuristic blow-up detection on coefficient norms along the grid.

    A divergent path grows geometrically all the way down the grid, so the
    last three points still grow by more than DIVERGENCE_FACTOR.  Convergent
    paths flatten at the tail even when they approach the limit from below,
    and roundoff noise around a zero limit can grow in ratio but never in
    absolute size, hence the absolute floor.
    """
    if len(norms) < 3:
        return False
    a, b, c = norms[-3], norms[-2], norms[-1]
    return (
        a < b < c
        and c > DIVERGENCE_FACTOR * a
        and c > 50.0 * (1.0 + min(norms))
    )


@dataclass(frozen=True, eq=False)
class NumericLimit:
    """Raw numeric limit of one linear system along the grid."""

    value: np.ndarray | None
    diverged: bool
    error_estimate: float
    norms: tuple[float, ...]


def limit_solve_numeric(
    A, E, b, v, eps_grid=DEFAULT_EPS_GRID, tol: float = DEFAULT_TOL
) -> NumericLimit:
    """Numeric limit of ``x(eps)`` solving
    ``(A + eps E) x = proj(b + eps v)`` as ``eps -> 0``.

    Raw entry point: no orthogonality validation is performed, so inputs
    violating the orthogonality hypotheses can and do diverge; divergence is
    reported as a structured result, not an error.
    """
    grid = _check_grid(eps_grid)
    A = np.asarray(A, dtype=float)
    E = np.asarray(E, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    xs = []
    for eps in grid:
        x, *_ = np.linalg.lstsq(A + eps * E, b + eps * v, rcond=tol)
        xs.append(x)
    norms = tuple(float(np.max(np.abs(x), initial=0.0)) for x in xs)
    if _diverging(norms) or (norms and norms[-1] > 1.0 / tol):
        return NumericLimit(None, True, np.inf, norms)
    value, est = _neville_zero(grid, xs)
    return NumericLimit(value, False, est, norms)


def _check_grid(eps_grid) -> tuple[float, ...]:
    grid = tuple(float(e) for e in eps_grid)
    if not grid:
        raise ValueError("epsilon grid must be non-empty")
    if any(e <= 0 for e in grid) or any(
        grid[k + 1] >= grid[k] for k in range(len(grid) - 1)
    ):
        raise ValueError("epsilon grid must be strictly decreasing and positive")
    return grid


def limit_mle_numeric(
    f, fp, g: Dag, eps_grid=DEFAULT_EPS_GRID, tol: float = DEFAULT_TOL
) -> LimitResult:
    """Numeric limit of the MLE given ``f + eps f'``.

    Evaluates the estimate at every grid point and extrapolates each
    per-vertex coefficient vector and variance in ``eps^2``.  Variances are
    marked absent when the extrapolated value is indistinguishable from
    zero at the combined tolerance/extrapolation-error scale.
    """
    grid = _check_grid(eps_grid)
    F, P = _coerce(f, fp, tol)
    n = F.shape[0]
    estimates = [mle_at_epsilon(F, P, g, eps, tol) for eps in grid]

    lam: dict[tuple[int, int], float] = {}
    err: dict[int, float] = {}
    diverged_vertices: list[int] = []
    for i in g.child_vertices():
        vectors = [est.lambda_vector(g, i) for est in estimates]
        norms = [float(np.max(np.abs(x), initial=0.0)) for x in vectors]
        if _diverging(norms) or norms[-1] > 1.0 / tol:
            diverged_vertices.append(i)
            continue
        value, est_err = _neville_zero(grid, vectors)
        err[i] = est_err
        for j, val in zip(g.parents(i), value):
            lam[(i, j)] = float(val)

    omega: dict[int, float] = {}
    omega_exists: dict[int, bool] = {}
    for i in range(1, g.m + 1):
        vals = [est.omega[i] for est in estimates]
        value, est_err = _neville_zero(grid, [np.array(w) for w in vals])
        w = float(value)
        thresh = max(tol * (1.0 + max(vals)), 10.0 * est_err)
        if w > thresh:
            omega_exists[i] = True
            omega[i] = w
        else:
            omega_exists[i] = False

    eps_ind = check_lambda_condition(F, P, g, tol) if not diverged_vertices else {}
    return LimitResult(
        lam=lam,
        omega=omega,
        omega_exists=omega_exists,
        method="numeric",
        epsilon_independent=eps_ind,
        partial=not all(omega_exists.values()),
        diverged=bool(diverged_vertices),
        diverged_vertices=tuple(diverged_vertices),
        extrapolation_error=err,
    )


def limit_lambda_analytic(f, fp, g: Dag, tol: float = DEFAULT_TOL) -> LimitResult:
    """Closed-form limit of the edge-weight estimate given ``f + eps f'``.

    Per child vertex the pencil of the parent submatrices is expanded and
    the limit is ``(G_l u + G_{l-1} w) / c_l`` as described in the module
    docstring; the limit solves the degenerate normal system of ``f`` at
    that vertex.
    """
    F, P = _coerce(f, fp, tol)
    lam: dict[tuple[int, int], float] = {}
    diagnostics: dict[int, VertexDiagnostics] = {}
    for i in g.child_vertices():
        A, E, b, v = _vertex_system(F, P, g, i)
        fbar = project(b, A, tol)
        vbar = project(v, E, tol)
        pencil = pencil_expand(A, E, tol)
        l = pencil.first_nonzero
        u = A.T @ fbar
        w = E.T @ vbar
        numerator = pencil.adj_coeff(l) @ u + pencil.adj_coeff(l - 1) @ w
        c_l = float(pencil.det_coeffs[l])
        value = numerator / c_l
        diagnostics[i] = VertexDiagnostics(l, c_l, numerator)
        for j, val in zip(g.parents(i), value):
            lam[(i, j)] = float(val)
    return LimitResult(
        lam=lam,
        omega={},
        omega_exists={},
        method="analytic",
        epsilon_independent=check_lambda_condition(F, P, g, tol),
        diagnostics=diagnostics,
    )


def limit_mle(f, fp, g: Dag, tol: float = DEFAULT_TOL) -> LimitResult:
    """Limit MLE given ``f + eps f'``: analytic edge weights plus the
    variance limits ``|f_i - proj(f_i)|^2 / n``.

    The variance limit coincides with the variance MLE given ``f`` wherever
    the latter exists; when it exists everywhere the assembled limit is an
    MLE given ``f``, which is asserted.  Otherwise the record is labelled
    ``partial`` (edge-weight limit plus the existing variance entries).
    """
    F, P = _coerce(f, fp, tol)
    lpart = limit_lambda_analytic(F, P, g, tol)
    opart = omega_mle(F, g, tol)
    result = LimitResult(
        lam=lpart.lam,
        omega=opart.omega,
        omega_exists=opart.omega_exists,
        method="analytic",
        epsilon_independent=lpart.epsilon_independent,
        diagnostics=lpart.diagnostics,
        partial=not all(opart.omega_exists.values()),
    )
    # The limit solves the degenerate normal system at every child vertex.
    check_tol = max(tol, 1e-8)
    for i in g.child_vertices():
        A, _, b, _ = _vertex_system(F, P, g, i)
        lam_i = result.lambda_vector(g, i)
        resid = A.T @ (b - A @ lam_i)
        scale = 1.0 + np.linalg.norm(A.T @ b) + np.linalg.norm(A.T @ A) * np.linalg.norm(lam_i)
        if np.linalg.norm(resid) > check_tol * scale:
            raise ValueError(
                f"limit estimate fails the normal equations at vertex {i}; "
                "input is numerically inconsistent"
            )
    return result


def check_lambda_condition(f, fp, g: Dag, tol: float = DEFAULT_TOL) -> dict[int, bool]:
    """Per child vertex: does ``proj(f_i) + proj(v_i)`` lie in the span of
    the perturbed parent columns ``f_j + v_j``?

    All-true is equivalent to the edge-weight estimate given the
    stabilisation being an edge-weight MLE given ``f`` (and to the estimate
    being independent of ``eps`` along the path).
    """
    F, P = _coerce(f, fp, tol)
    out: dict[int, bool] = {}
    for i in g.child_vertices():
        A, E, b, v = _vertex_system(F, P, g, i)
        target = project(b, A, tol) + project(v, E, tol)
        resid = target - project(target, A + E, tol)
        out[i] = float(np.linalg.norm(resid)) <= tol * (1.0 + float(np.linalg.norm(target)))
    return out


def check_full_condition(f, fp, g: Dag, tol: float = DEFAULT_TOL) -> dict[int, bool]:
    """Per child vertex: does ``v_i`` lie in the span of the parent
    perturbation columns AND ``proj(f_i) + v_i`` in the span of the
    perturbed parent columns?

    All-true is equivalent to every child-vertex component of the estimate
    given the stabilisation (the edge weights at ``i`` and the residual
    variance at ``i``) being a component of an MLE given ``f``; it can never
    be all-true when no MLE given ``f`` exists.  Source-vertex variances are
    outside the equivalence: they always shift by ``|v_j|^2 / n`` when the
    perturbation column there is nonzero (the shift vanishes along the
    ``eps -> 0`` path, so the limit machinery is unaffected).
    """
    F, P = _coerce(f, fp, tol)
    out: dict[int, bool] = {}
    for i in g.child_vertices():
        A, E, b, v = _vertex_system(F, P, g, i)
        resid_v = v - project(v, E, tol)
        first = float(np.linalg.norm(resid_v)) <= tol * (1.0 + float(np.linalg.norm(v)))
        target = project(b, A, tol) + v
        resid_t = target - project(target, A + E, tol)
        second = float(np.linalg.norm(resid_t)) <= tol * (1.0 + float(np.linalg.norm(target)))
        out[i] = first and second
    return out


def check_alpha_fixed(
    fp, alpha_lambda: dict[tuple[int, int], float], g: Dag, tol: float = DEFAULT_TOL
) -> dict[int, bool]:
    """Per child vertex: does ``v_i = sum_j lambda_ij v_j`` hold?

    ``alpha_lambda`` maps ``(i, j)`` to the weight of edge ``j -> i`` and
    must mention edges of the DAG only; it is the caller's responsibility
    that it is the edge-weight part of an MLE given the base sample.
    All-true is equivalent to every child-vertex component of the MLE given
    the stabilisation equalling that MLE's (see
    :func:`check_full_condition` on source-vertex variances).
    """
    for (i, j) in alpha_lambda:
        if not g.has_edge(j, i):
            raise ValueError(f"edge weight given for non-edge {j} -> {i}")
    if isinstance(fp, Perturbation):
        P = fp.delta
    else:
        P = np.asarray(fp, dtype=float)
    out: dict[int, bool] = {}
    for i in g.child_vertices():
        v_i = P[:, i - 1]
        combo = np.zeros_like(v_i)
        for j in g.parents(i):
            combo += alpha_lambda.get((i, j), 0.0) * P[:, j - 1]
        resid = v_i - combo
        out[i] = float(np.linalg.norm(resid)) <= tol * (1.0 + float(np.linalg.norm(v_i)))
    return out
