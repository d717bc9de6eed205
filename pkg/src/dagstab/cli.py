"""Command-line front end with JSON input and output.

Subcommand-first syntax; every subcommand reads one problem file (JSON,
``--input PATH`` or ``-`` for stdin) and writes one report (JSON, ``--output
PATH`` or stdout).  Problem files are validated against
``schema/problem.json`` (exit code 2 on violation); semantic errors such as
cycles or shape mismatches exit with code 3.  Reports validate against
``schema/report.json``.

Floats are serialised at 17 significant digits, so identical input and seed
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources

import jsonschema
import numpy as np

from . import graph, limits, mle, stabilise, varieties
from .linalg import DEFAULT_TOL, rank

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_SEMANTIC = 3


class SemanticError(ValueError):
    """Problem file is schema-valid but semantically unusable."""


# ---------------------------------------------------------------------------
# JSON serialisation with fixed float formatting


def _format_scalar(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        value = float(x)
        if not math.isfinite(value):
            raise ValueError("reports must not contain non-finite numbers")
        return format(value, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps_report(obj, indent: int = 2) -> str:
    """Serialise a report with floats at 17 significant digits."""

    def go(node, level):
        pad = " " * (indent * level)
        inner = " " * (indent * (level + 1))
        if isinstance(node, dict):
            if not node:
                return "{}"
            parts = [
                f"{inner}{json.dumps(str(k))}: {go(v, level + 1)}"
                for k, v in node.items()
            ]
            return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
        if isinstance(node, (list, tuple)):
            if not len(node):
                return "[]"
            parts = [f"{inner}{go(v, level + 1)}" for v in node]
            return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
        return _format_scalar(node)

    return go(obj, 0) + "\n"


# ---------------------------------------------------------------------------
# Problem file loading


def load_schema(name: str) -> dict:
    text = resources.files("dagstab").joinpath(f"schema/{name}").read_text()
    return json.loads(text)


def _validate_schema(data) -> None:
    jsonschema.validate(instance=data, schema=load_schema("problem.json"))


class Problem:
    """Parsed, semantically validated problem file."""

    def __init__(self, data: dict):
        gdef = data["graph"]
        try:
            self.g = graph.Dag(gdef["m"], [tuple(e) for e in gdef["edges"]])
        except ValueError as exc:
            raise SemanticError(str(exc)) from exc
        m = self.g.m

        rows = data["sample"]
        if any(len(r) != m for r in rows):
            raise SemanticError(f"every sample row must have {m} entries")
        self.sample = np.array(rows, dtype=float)
        if not np.all(np.isfinite(self.sample)):
            raise SemanticError("sample entries must be finite")

        self.perturbation = None
        if "perturbation" in data:
            prows = data["perturbation"]
            if len(prows) != len(rows) or any(len(r) != m for r in prows):
                raise SemanticError("perturbation must have the same shape as the sample")
            self.perturbation = np.array(prows, dtype=float)
            if not np.all(np.isfinite(self.perturbation)):
                raise SemanticError("perturbation entries must be finite")

        self.alpha = None
        if "alpha" in data:
            self.alpha = self._parse_alpha(data["alpha"])

        settings = data.get("settings", {})
        self.tol = settings.get("tol")
        self.seed = settings.get("seed")
        self.eps_grid = settings.get("epsilonGrid")
        if self.eps_grid is not None:
            self._check_grid(self.eps_grid)
        if self.seed is not None and not (0 <= self.seed < 2**64):
            raise SemanticError("seed must fit in an unsigned 64-bit integer")

    @staticmethod
    def _check_grid(values) -> None:
        if any(values[k + 1] >= values[k] for k in range(len(values) - 1)):
            raise SemanticError("epsilonGrid must be strictly decreasing")

    def _vertex(self, value, what: str) -> int:
        if float(value) != int(value):
            raise SemanticError(f"{what} index {value} is not an integer")
        i = int(value)
        if not (1 <= i <= self.g.m):
            raise SemanticError(f"{what} index {i} outside 1..{self.g.m}")
        return i

    def _parse_alpha(self, adef: dict) -> mle.MleEstimate:
        lam = {}
        for triple in adef.get("lambda", []):
            i = self._vertex(triple[0], "alpha lambda child")
            j = self._vertex(triple[1], "alpha lambda parent")
            if not self.g.has_edge(j, i):
                raise SemanticError(f"alpha lambda entry for non-edge {j} -> {i}")
            lam[(i, j)] = float(triple[2])
        omega = {}
        for pair in adef.get("omega", []):
            i = self._vertex(pair[0], "alpha omega vertex")
            value = float(pair[1])
            if value <= 0:
                raise SemanticError(f"alpha omega at vertex {i} must be positive")
            omega[i] = value
        exists = {i: True for i in omega}
        return mle.MleEstimate(lam=lam, omega=omega, omega_exists=exists)


def _read_input(path: str) -> dict:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


# ---------------------------------------------------------------------------
# Report fragments


def _lambda_triples(lam: dict) -> list:
    return [[i, j, float(v)] for (i, j), v in sorted(lam.items())]


def _omega_pairs(omega: dict) -> list:
    return [[i, float(v)] for i, v in sorted(omega.items())]


def _vertex_map(d: dict) -> dict:
    return {str(i): d[i] for i in sorted(d)}


def _vertex_vectors(result, g) -> dict:
    out = {}
    for i in g.child_vertices():
        if all((i, j) in result.lam for j in g.parents(i)):
            out[str(i)] = [float(x) for x in result.lambda_vector(g, i)]
    return out


def _maybe_duplicate(problem: Problem) -> tuple[np.ndarray, dict | None]:
    Y = problem.sample
    n, m = Y.shape
    if n >= m:
        return Y, None
    k = -(-m // n)  # ceil
    return mle.duplicate(Y, k), {"k": k}


def _resolve_perturbation(problem: Problem, seed, tol):
    """Explicit perturbation, or one drawn from the seed (with duplication
    when observations are scarce).  Returns (sample, delta, seed, dup, stages)."""
    if problem.perturbation is not None and seed is not None:
        raise SemanticError("give either a perturbation or a seed, not both")
    if problem.perturbation is not None:
        return problem.sample, problem.perturbation, None, None, None
    if seed is None:
        raise SemanticError("this command needs a perturbation or a seed")
    Y, dup = _maybe_duplicate(problem)
    lift = stabilise.random_lift(Y, seed, tol)
    pert = stabilise.build_from_lift(lift, tol)
    stages = [
        {
            "kernelDim": st.kernel_basis.shape[1],
            "cokernelDim": st.cokernel_basis.shape[1],
            "mapRank": rank(st.stage_map, tol),
        }
        for st in lift.stages
    ]
    return Y, pert.delta, seed, dup, stages


# ---------------------------------------------------------------------------
# Commands


def cmd_classify(problem: Problem, tol: float, seed, eps_grid) -> dict:
    Y, dup = _maybe_duplicate(problem)
    g = problem.g
    status = mle.classify(Y, g, tol)
    transitive = graph.is_transitive(g)
    reg = None
    if transitive:
        r = graph.regime(g, Y.shape[0])
        reg = {"label": r.label, "outcomes": sorted(r.outcomes)}
    return {
        "command": "classify",
        "tol": tol,
        "n": problem.sample.shape[0],
        "m": g.m,
        "duplicated": dup,
        "classification": status.status,
        "gitLabel": status.git_label,
        "witness": status.witness,
        "mlt": graph.mlt(g),
        "depth": graph.depth(g),
        "transitive": transitive,
        "regime": reg,
    }


def cmd_estimate(problem: Problem, tol: float, seed, eps_grid) -> dict:
    g = problem.g
    est = mle.full_mle(problem.sample, g, tol)
    status = mle.classify(problem.sample, g, tol)
    return {
        "command": "estimate",
        "tol": tol,
        "n": problem.sample.shape[0],
        "m": g.m,
        "classification": status.status,
        "gitLabel": status.git_label,
        "witness": status.witness,
        "lambda": _lambda_triples(est.lam),
        "lambdaKernelDims": _vertex_map(est.lambda_kernel_dims),
        "omega": _omega_pairs(est.omega),
        "omegaExists": _vertex_map(est.omega_exists),
    }


def cmd_stabilize(problem: Problem, tol: float, seed, eps_grid) -> dict:
    Y, delta, used_seed, dup, stages = _resolve_perturbation(problem, seed, tol)
    stabilised = stabilise.stabilize(Y, delta, tol)
    return {
        "command": "stabilize",
        "tol": tol,
        "seed": used_seed,
        "duplicated": dup,
        "perturbation": [[float(x) for x in row] for row in delta],
        "stabilised": [[float(x) for x in row] for row in stabilised],
        "rank": rank(stabilised, tol),
        "stages": stages,
    }


def cmd_limit(problem: Problem, tol: float, seed, eps_grid) -> dict:
    g = problem.g
    Y, delta, used_seed, _, _ = _resolve_perturbation(problem, seed, tol)
    grid = tuple(eps_grid) if eps_grid is not None else limits.DEFAULT_EPS_GRID
    analytic = limits.limit_mle(Y, delta, g, tol)
    numeric = limits.limit_mle_numeric(Y, delta, g, grid, tol)
    agreement = None
    numeric_map = None
    if not numeric.diverged:
        numeric_map = _vertex_vectors(numeric, g)
        deltas = [0.0]
        for i in g.child_vertices():
            deltas.append(
                float(
                    np.max(
                        np.abs(analytic.lambda_vector(g, i) - numeric.lambda_vector(g, i)),
                        initial=0.0,
                    )
                )
            )
        agreement = max(deltas)
    diagnostics = {
        str(i): {
            "l": d.first_nonzero,
            "cl": float(d.det_coeff),
            "Dl": [float(x) for x in d.numerator],
        }
        for i, d in sorted(analytic.diagnostics.items())
    }
    return {
        "command": "limit",
        "tol": tol,
        "seed": used_seed,
        "epsilonGrid": [float(e) for e in grid],
        "lambdaLimit": _vertex_vectors(analytic, g),
        "numericLambdaLimit": numeric_map,
        "omegaLimit": _omega_pairs(analytic.omega),
        "omegaExists": _vertex_map(analytic.omega_exists),
        "partial": analytic.partial,
        "diverged": numeric.diverged,
        "divergedVertices": list(numeric.diverged_vertices),
        "agreement": agreement,
        "epsilonIndependent": _vertex_map(analytic.epsilon_independent),
        "diagnostics": diagnostics,
    }


def cmd_check(problem: Problem, tol: float, seed, eps_grid) -> dict:
    g = problem.g
    Y, delta, _, _, _ = _resolve_perturbation(problem, seed, tol)
    lambda_cond = limits.check_lambda_condition(Y, delta, g, tol)
    full_cond = limits.check_full_condition(Y, delta, g, tol)
    alpha_fixed = None
    if problem.alpha is not None:
        alpha_fixed = _vertex_map(
            limits.check_alpha_fixed(delta, problem.alpha.lam, g, tol)
        )
    return {
        "command": "check",
        "tol": tol,
        "lambdaCondition": _vertex_map(lambda_cond),
        "fullCondition": _vertex_map(full_cond),
        "alphaFixed": alpha_fixed,
    }


def cmd_membership(problem: Problem, tol: float, seed, eps_grid) -> dict:
    g = problem.g
    if problem.perturbation is None:
        raise SemanticError("membership queries need an explicit perturbation")
    if problem.alpha is None:
        raise SemanticError("membership queries need alpha")
    query = varieties.VarietyQuery(
        f=problem.sample,
        candidate=problem.perturbation,
        g=g,
        alpha=problem.alpha,
        tol=tol,
    )
    member = varieties.in_Xf(query)
    alpha_is_mle = (
        mle.classify(problem.sample, g, tol).status != graph.NONEXISTENT
        and mle.is_mle(problem.sample, g, problem.alpha, max(tol, 1e-8))
    )
    in_alpha = varieties.in_Xf_alpha(query) if alpha_is_mle else None
    return {
        "command": "membership",
        "tol": tol,
        "inXf": member,
        "alphaIsMleGivenF": alpha_is_mle,
        "inXfAlpha": in_alpha,
        "inXfAlphaLim": varieties.in_Xf_alpha_lim(query),
    }


COMMANDS = {
    "classify": cmd_classify,
    "estimate": cmd_estimate,
    "stabilize": cmd_stabilize,
    "limit": cmd_limit,
    "check": cmd_check,
    "membership": cmd_membership,
}


# ---------------------------------------------------------------------------
# Entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dagstab",
        description="Gaussian DAG model MLEs, sample stabilisations and limit MLEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="problem file, or - for stdin")
        p.add_argument("--output", default="stdout", help="report path, or stdout")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument(
            "--eps-grid",
            default=None,
            help="comma-separated decreasing positive values",
        )
    return parser


def _parse_eps_grid(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise SemanticError(f"bad epsilon grid: {exc}") from exc
    if not values:
        raise SemanticError("epsilon grid is empty")
    Problem._check_grid(values)
    if any(v <= 0 for v in values):
        raise SemanticError("epsilon grid values must be positive")
    return values


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        data = _read_input(args.input)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        _validate_schema(data)
    except jsonschema.ValidationError as exc:
        print(f"error: problem file violates the schema: {exc.message}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        problem = Problem(data)
        tol = args.tol if args.tol is not None else (problem.tol or DEFAULT_TOL)
        if tol <= 0:
            raise SemanticError("tol must be positive")
        seed = args.seed if args.seed is not None else problem.seed
        if seed is not None and not (0 <= seed < 2**64):
            raise SemanticError("seed must fit in an unsigned 64-bit integer")
        if args.eps_grid is not None:
            eps_grid = _parse_eps_grid(args.eps_grid)
        else:
            eps_grid = problem.eps_grid
        report = COMMANDS[args.command](problem, tol, seed, eps_grid)
    except (SemanticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    text = dumps_report(report)
    if args.output == "stdout":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
