"""This module solves the conic program, verifies certificates and searches
the fixed scalars."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from fauio.core import linalg
from fauio.core.base import ConditionReport
from fauio.core.cone import ConeProgram, lower_to_cone
from fauio.core.errors import NoFeasiblePairError
from fauio.core.lmi import STRICT_MARGIN, LmiBlocks, SynthesisProblem

logger = logging.getLogger("fauio")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical-failure"

STATUS_MAP = {
    cp.OPTIMAL: OPTIMAL,
    cp.OPTIMAL_INACCURATE: OPTIMAL,
    cp.INFEASIBLE: INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: INFEASIBLE,
}

PREFERRED_SOLVERS = ["CLARABEL", "SCS"]


@dataclass
class SolverSettings:
    """SolverSettings class configures the conic solver.

    Args:
        name: Solver name known to cvxpy. Empty selects the first installed of
            CLARABEL and SCS.
        max_iters: Iteration limit.
        eps_abs: Absolute feasibility and gap tolerance.
        eps_rel: Relative feasibility and gap tolerance.
        strict_margin: Margin realising strict positivity of P1, P2 and Z.
        tol: Tolerance of the certificate check.
        workers: Number of threads for grid searches.
        fallback: If True, a breakdown of the first solver is retried with the
            other installed solvers of CLARABEL and SCS.
        fallback_iters: Iteration limit of a first-order fallback solver.

    Examples:
        >>> SolverSettings(max_iters=100).options('SCS')
        {'max_iters': 100, 'eps_abs': 1e-08, 'eps_rel': 1e-08}
        >>> SolverSettings().options('SCS', fallback=True)['max_iters']
        50000
        >>> SolverSettings().options('CLARABEL')['max_iter']
        500
    """

    name: str = ""
    max_iters: int = 500
    eps_abs: float = 1e-8
    eps_rel: float = 1e-8
    strict_margin: float = STRICT_MARGIN
    tol: float = 1e-7
    workers: int = 1
    fallback: bool = True
    fallback_iters: int = 50000

    def solver(self) -> str:
        if self.name:
            return self.name.upper()
        installed = cp.installed_solvers()
        for name in PREFERRED_SOLVERS:
            if name in installed:
                return name
        raise RuntimeError("no conic solver with PSD support is installed")

    def solvers(self) -> List[str]:
        """Returns the solvers to try, in order."""
        first = self.solver()
        if not self.fallback:
            return [first]
        installed = cp.installed_solvers()
        rest = [s for s in PREFERRED_SOLVERS if s != first and s in installed]
        return [first] + rest

    def options(self, solver: str, fallback: bool = False) -> Dict[str, Any]:
        """Returns solver specific keyword arguments.

        A fallback run of SCS gets `fallback_iters` iterations and tolerances
        no tighter than 1e-6.
        """
        if solver == "CLARABEL":
            return {
                "max_iter": self.max_iters,
                "tol_gap_abs": self.eps_abs,
                "tol_gap_rel": self.eps_rel,
                "tol_feas": self.eps_abs,
            }
        if solver == "SCS":
            if fallback:
                return {
                    "max_iters": max(self.max_iters, self.fallback_iters),
                    "eps_abs": max(self.eps_abs, 1e-6),
                    "eps_rel": max(self.eps_rel, 1e-6),
                }
            return {
                "max_iters": self.max_iters,
                "eps_abs": self.eps_abs,
                "eps_rel": self.eps_rel,
            }
        if solver == "CVXOPT":
            return {
                "max_iters": self.max_iters,
                "abstol": self.eps_abs,
                "reltol": self.eps_rel,
                "feastol": self.eps_abs,
            }
        return {}


@dataclass
class SdpSolution:
    """SdpSolution class holds the outcome of one solve.

    Args:
        status: One of 'optimal', 'infeasible' and 'numerical-failure'.
        x: Decision vector, or None.
        mu: Objective value.
        assignment: Named unknowns.
        diagnostics: Solver name, raw status, iterations and timings.
    """

    status: str
    x: Optional[np.ndarray] = None
    mu: float = math.nan
    assignment: Dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.status!r}, sqrt_mu={self.sqrt_mu:.6g})"

    def __bool__(self) -> bool:
        return self.status == OPTIMAL

    @property
    def sqrt_mu(self) -> float:
        if math.isnan(self.mu):
            return math.nan
        return math.sqrt(max(self.mu, 0.0))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.assignment[name]


def solve(
    program: ConeProgram, settings: Optional[SolverSettings] = None
) -> SdpSolution:
    """Solves `program` and returns its solution.

    Solver breakdown never raises: it is reported as 'numerical-failure'. When
    `settings.fallback` is set, a breakdown is retried with the next solver and
    `diagnostics['attempts']` lists every solver tried.
    """
    settings = settings or SolverSettings()
    attempts = []
    solution = SdpSolution(NUMERICAL_FAILURE)
    for k, solver in enumerate(settings.solvers()):
        solution = _solve_with(program, settings, solver, fallback=k > 0)
        attempts.append(f"{solver}: {solution.status}")
        if solution.status != NUMERICAL_FAILURE:
            break
        logger.warning(f"[fauio] {solver} broke down")
    solution.diagnostics["attempts"] = attempts
    return solution


def psd_constraints(program: ConeProgram, x: cp.Variable) -> List[Any]:
    """Returns the cvxpy constraints of the cone blocks of `program`.

    A PSD block is stated as `S >> 0` on its symmetric matrix, so that the
    solver sees each triangle entry once.
    """
    constraints = []
    for block in program:
        if block.is_linear:
            constraints.append(cp.Constant(block.A) @ x + block.b >= 0)
            continue
        k = block.size
        U = _smat_operator(k)
        vec = cp.Constant((U @ block.A).tocsr()) @ x + U @ block.b
        S = cp.reshape(vec, (k, k), order="C")
        constraints.append((S + S.T) / 2 >> 0)
    return constraints


def _solve_with(
    program: ConeProgram, settings: SolverSettings, solver: str, fallback: bool
) -> SdpSolution:
    x = cp.Variable(program.num_vars)
    problem = cp.Problem(cp.Minimize(program.c @ x), psd_constraints(program, x))
    logger.info(f"[fauio] Solving {program} with {solver}")
    diagnostics: Dict[str, Any] = {"solver": solver}
    try:
        problem.solve(solver=solver, **settings.options(solver, fallback))
    except cp.error.SolverError as e:
        logger.warning(f"[fauio] Solver breakdown: {e}")
        diagnostics["error"] = str(e)
        return SdpSolution(NUMERICAL_FAILURE, diagnostics=diagnostics)
    diagnostics["raw_status"] = problem.status
    stats = problem.solver_stats
    if stats is not None:
        diagnostics["iterations"] = stats.num_iters
        diagnostics["solve_time"] = stats.solve_time
    status = STATUS_MAP.get(problem.status, NUMERICAL_FAILURE)
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.warning("[fauio] Solver returned an inaccurate optimum")
    if status != OPTIMAL or x.value is None:
        logger.info(f"[fauio] Solve finished: {status} ({problem.status})")
        return SdpSolution(
            status if status != OPTIMAL else NUMERICAL_FAILURE, diagnostics=diagnostics
        )
    value = np.asarray(x.value, dtype=float)
    mu = float(program.c @ value)
    if program.layout is not None:
        mu = float(value[program.layout.mu_index])
    solution = SdpSolution(OPTIMAL, value, mu, program.unpack(value), diagnostics)
    logger.info(f"[fauio] Solve finished: optimal, sqrt(mu)={solution.sqrt_mu:.6g}")
    return solution


def _smat_operator(k: int) -> sp.csr_matrix:
    """Returns the map from `svec(S)` to row-major `vec(S)`."""
    data, rows, cols = [], [], []
    r = 0
    for a in range(k):
        for b in range(a, k):
            if a == b:
                data.append(1.0)
                rows.append(a * k + a)
                cols.append(r)
            else:
                w = 1 / np.sqrt(2)
                data.extend([w, w])
                rows.extend([a * k + b, b * k + a])
                cols.extend([r, r])
            r += 1
    return sp.csr_matrix((data, (rows, cols)), shape=(k * k, k * (k + 1) // 2))


def solve_problem(
    problem: SynthesisProblem, settings: Optional[SolverSettings] = None
) -> SdpSolution:
    """Lowers and solves the vertex LMI family of `problem`."""
    settings = settings or SolverSettings()
    if problem.strict_margin != settings.strict_margin:
        problem = replace(problem, strict_margin=settings.strict_margin)
    program = lower_to_cone(problem.constraints(), problem.objective(), problem.layout)
    return solve(program, settings)


def verify_certificate(
    blocks: Sequence[LmiBlocks],
    solution: SdpSolution,
    tol: float = 1e-7,
    scaled: bool = False,
) -> ConditionReport:
    """Checks the vertex constraints at the solution from their block expressions.

    Args:
        blocks: Blocks of every vertex.
        solution: Solution to check.
        tol: Largest accepted eigenvalue of a vertex constraint.
        scaled: If True, `tol` is multiplied by `max(1, norm)` of each
            constraint matrix.

    Returns:
        Report with one check per vertex, positivity checks of P1, P2 and Z,
        and the smallest eigenvalue of every off-diagonal block of Z.
    """
    report = ConditionReport("certificate")
    if not solution or solution.x is None:
        report.add("solution", False, description=f"status {solution.status}")
        return report
    x = solution.x
    worst_index, worst_value = -1, -np.inf
    vertices_ok = True
    for item in blocks:
        value = item.assemble().evaluate(x)
        lam = linalg.max_eigenvalue(value)
        bound = tol * max(1.0, float(np.linalg.norm(value, 2))) if scaled else tol
        passed = lam <= bound
        vertices_ok = vertices_ok and passed
        report.add(f"vertex {item.index}", passed, lam, f"lambda_max <= {bound:.3g}")
        if lam > worst_value:
            worst_index, worst_value = item.index, lam
    for name in ["P1", "P2", "Z"]:
        matrix = solution.assignment.get(name)
        if matrix is None or not matrix.size:
            continue
        lam = linalg.min_eigenvalue(matrix)
        report.add(f"{name} > 0", lam > 0, lam, "lambda_min")
    if blocks:
        layout = blocks[0].layout
        for name in layout.off_diagonal_names():
            lam = linalg.min_eigenvalue(solution.assignment[name])
            bound = -tol * max(1.0, abs(lam)) if scaled else -tol
            report.add(f"{name} >= 0", lam >= bound, lam, "lambda_min")
    report.add(
        "worst vertex",
        vertices_ok,
        worst_value,
        f"vertex {worst_index}",
    )
    return report


@dataclass
class GridResult:
    """GridResult class holds the outcome of a scalar search.

    Args:
        epsilon: Best epsilon.
        delta: Best delta, or None for theorem 1.
        solution: Solution at the best pair.
        table: One row per grid point, in grid order.
    """

    epsilon: float
    delta: Optional[float]
    solution: SdpSolution
    table: List[Dict[str, Any]] = field(default_factory=list)

    def __repr__(self):
        class_name = self.__class__.__name__
        return (
            f"{class_name}(epsilon={self.epsilon}, delta={self.delta}, "
            f"sqrt_mu={self.solution.sqrt_mu:.6g}, num_points={len(self.table)})"
        )


def scalar_search(
    problem: SynthesisProblem,
    epsilons: Sequence[float],
    deltas: Optional[Sequence[float]] = None,
    settings: Optional[SolverSettings] = None,
) -> GridResult:
    """Solves `problem` on a grid of fixed scalars and returns the best point.

    The best point has the smallest `mu`. Ties go to the smaller epsilon, then
    to the smaller delta. Deltas are ignored for theorem 1.

    Raises:
        ValueError: If a grid is empty.
        NoFeasiblePairError: If no grid point is feasible.
    """
    settings = settings or SolverSettings()
    if not len(epsilons):
        raise ValueError("epsilon grid is empty")
    if problem.theorem == 1:
        deltas = [None]
    elif deltas is None or not len(deltas):
        raise ValueError("delta grid is empty")
    points = [(e, d) for e in epsilons for d in deltas]

    def run(point):
        epsilon, delta = point
        return solve_problem(problem.with_scalars(epsilon, delta), settings)

    if settings.workers > 1:
        with ThreadPoolExecutor(max_workers=settings.workers) as executor:
            solutions = list(executor.map(run, points))
    else:
        solutions = [run(point) for point in points]
    table = []
    best = None
    for (epsilon, delta), solution in zip(points, solutions):
        table.append(
            {
                "epsilon": epsilon,
                "delta": delta,
                "status": solution.status,
                "mu": solution.mu,
                "sqrt_mu": solution.sqrt_mu,
            }
        )
        if not solution:
            continue
        key = (solution.mu, epsilon, -math.inf if delta is None else delta)
        if best is None or key < best[0]:
            best = (key, epsilon, delta, solution)
    if best is None:
        raise NoFeasiblePairError(table)
    _, epsilon, delta, solution = best
    return GridResult(epsilon, delta, solution, table)
