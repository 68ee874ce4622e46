"""This module recovers observer gains from a solution and certifies them."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from fauio import utils
from fauio.core import linalg
from fauio.core.base import ConditionReport
from fauio.core.errors import DimensionError, SynthesisError
from fauio.core.lmi import LmiBlocks
from fauio.core.model import DescriptorModel, check_existence_conditions
from fauio.core.polytope import VertexSet, basis
from fauio.core.sdp import SdpSolution

logger = logging.getLogger("fauio")

UIO_RESIDUAL_TOL = 1e-8
CONDITION_LIMIT = 1e12


def compute_L1_F(desc: DescriptorModel) -> Tuple[np.ndarray, np.ndarray]:
    """Returns `(L1, F)` with `L1 T + F C_bar = I` from the pseudo-inverse of
    `[T; C_bar]`.

    Raises:
        SynthesisError: If `[T; C_bar]` is column rank deficient.

    Examples:
        >>> from fauio.core.model import PlantModel, augment_descriptor
        >>> desc = augment_descriptor(PlantModel(A=[[-1.0]], C=[[1.0]]))
        >>> L1, F = compute_L1_F(desc)
        >>> np.allclose(L1 @ desc.T + F @ desc.C_bar, 1.0)
        True
    """
    stack = np.vstack([desc.T, desc.C_bar])
    rank = linalg.numerical_rank(stack)
    if rank < desc.n_new:
        raise SynthesisError(
            f"L1 T + F C_bar = I unsolvable: rank [T; C_bar] = {rank} < {desc.n_new}"
        )
    inverse = linalg.pinv(stack)
    L1, F = inverse[:, : desc.n], inverse[:, desc.n :]
    residual = uio_residual(desc, L1, F)
    if residual > UIO_RESIDUAL_TOL:
        raise SynthesisError(f"L1 T + F C_bar = I residual {residual:.3g} too large")
    logger.debug(f"[fauio] L1, F computed, residual {residual:.3g}")
    return L1, F


def uio_residual(desc: DescriptorModel, L1: np.ndarray, F: np.ndarray) -> float:
    """Returns the Frobenius norm of `L1 T + F C_bar - I`."""
    identity = np.eye(desc.n_new)
    return float(np.linalg.norm(L1 @ desc.T + F @ desc.C_bar - identity))


@dataclass
class ObserverGains:
    """ObserverGains class holds the runnable observer.

        eta' = N eta + J y + L1 B u + L1 G g(T zeta_hat) + L1 E_f fa_hat
        zeta_hat = eta + F y
        fa_hat' = beta L2 (y_tilde + y_tilde')

    Args:
        N: n_new x n_new.
        J: n_new x p.
        L1: n_new x n.
        F: n_new x p.
        K: n_new x p.
        L2: a1 x p.
        beta: Learning rate.
    """

    N: np.ndarray
    J: np.ndarray
    L1: np.ndarray
    F: np.ndarray
    K: np.ndarray
    L2: np.ndarray
    beta: float
    condition: float = field(default=np.nan, compare=False)

    def __repr__(self):
        class_name = self.__class__.__name__
        n_new, p = self.K.shape
        return f"{class_name}(n_new={n_new}, p={p}, a1={self.a1}, beta={self.beta})"

    @property
    def a1(self) -> int:
        return self.L2.shape[0]

    def matrices(self) -> Dict[str, np.ndarray]:
        names = ["N", "J", "L1", "F", "K", "L2"]
        matrices = {name: getattr(self, name) for name in names}
        matrices["beta"] = np.array([[self.beta]])
        return matrices

    def to_text(self, header=()) -> str:
        """Returns the gains in the canonical matrix text format."""
        return utils.format_matrices(self.matrices(), header)

    @classmethod
    def from_text(cls, text: str) -> "ObserverGains":
        matrices = utils.parse_matrices(text)
        names = ["N", "J", "L1", "F", "K", "L2", "beta"]
        missing = [name for name in names if name not in matrices]
        if missing:
            raise DimensionError("gains", f"missing matrices {missing}")
        beta = float(matrices.pop("beta")[0, 0])
        return cls(**matrices, beta=beta)

    def check_dimensions(self, desc: DescriptorModel):
        """Raises DimensionError if the gains do not fit `desc`."""
        n_new, n, p, a1 = desc.n_new, desc.n, desc.p, desc.a1
        expected = {
            "N": (n_new, n_new),
            "J": (n_new, p),
            "L1": (n_new, n),
            "F": (n_new, p),
            "K": (n_new, p),
            "L2": (a1, p),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DimensionError(name, f"expected {shape}, got {actual}")

    def identities(self, desc: DescriptorModel) -> ConditionReport:
        """Returns verdicts of the three defining identities of the gains."""
        report = ConditionReport("gain identities")
        residual = uio_residual(desc, self.L1, self.F)
        report.add("L1 T + F C_bar = I", residual <= UIO_RESIDUAL_TOL, residual)
        N = self.L1 @ desc.A_zeta - self.K @ desc.C_bar
        residual = float(np.abs(self.N - N).max(initial=0.0))
        scale = max(1.0, float(np.abs(N).max(initial=0.0)))
        report.add("N = L1 A_zeta - K C_bar", residual <= 1e-9 * scale, residual)
        J = self.N @ self.F + self.K
        residual = float(np.abs(self.J - J).max(initial=0.0))
        scale = max(1.0, float(np.abs(J).max(initial=0.0)))
        report.add("J = N F + K", residual <= 1e-9 * scale, residual)
        return report


def recover_gains(
    solution: SdpSolution,
    desc: DescriptorModel,
    L1: np.ndarray,
    F: np.ndarray,
    beta: float,
) -> ObserverGains:
    """Returns the gains `K = P1^-1 R1'` and `L2 = P2^-1 R2'` and the matrices
    built from them.

    Raises:
        SynthesisError: If the solution is not optimal or P1, P2 are singular.
    """
    if not solution:
        raise SynthesisError(f"cannot recover gains from a {solution.status} solution")
    P1, P2 = solution["P1"], solution["P2"]
    R1, R2 = solution["R1"], solution["R2"]
    condition = 1.0
    for name, P in [("P1", P1), ("P2", P2)]:
        if not P.size:
            continue
        cond = float(np.linalg.cond(P))
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SynthesisError(f"{name} is singular (condition number {cond:.3g})")
        condition = max(condition, cond)
    K = scipy.linalg.solve(P1, R1.T, assume_a="pos")
    L2 = scipy.linalg.solve(P2, R2.T, assume_a="pos") if P2.size else R2.T
    N = L1 @ desc.A_zeta - K @ desc.C_bar
    J = N @ F + K
    logger.info(f"[fauio] Gains recovered, cond(P) = {condition:.3g}")
    return ObserverGains(N, J, L1, F, K, L2, float(beta), condition)


@dataclass
class ErrorDynamics:
    """ErrorDynamics class holds the matrices of `T_e e' = A_e e + ...`.

    Attributes:
        T_e: `[I 0; beta L2 C_bar I]`.
        A_e: `[N L1 E_f; -beta L2 C_bar 0]`.
        At_e: `T_e^-1 A_e`.
        G_e: `T_e^-1 [L1 G; 0]`, the gain of the nonlinearity difference.
        E_omega: `T_e^-1` times the gain of `[w; w'; fa']`.
    """

    T_e: np.ndarray
    A_e: np.ndarray
    At_e: np.ndarray
    G_e: np.ndarray
    E_omega: np.ndarray

    def vertex_matrix(self, desc: DescriptorModel, vertex: np.ndarray) -> np.ndarray:
        """Returns `At_e + sum g_ij G_e H_ij [H_i T, 0]` at a vertex."""
        plant = desc.plant
        matrix = self.At_e.copy()
        for i in range(plant.m):
            H_i = np.hstack([plant.H[i] @ desc.T, np.zeros((plant.n_bar, desc.a1))])
            for j in range(plant.n_bar):
                if vertex[i, j]:
                    H_ij = basis(i + 1, j + 1, plant.m, plant.n_bar)
                    matrix += vertex[i, j] * self.G_e @ H_ij @ H_i
        return matrix


def error_dynamics(gains: ObserverGains, desc: DescriptorModel) -> ErrorDynamics:
    """Returns the error dynamics matrices of `gains`."""
    beta, L1, L2, K, F = gains.beta, gains.L1, gains.L2, gains.K, gains.F
    n_new, a1 = desc.n_new, desc.a1
    BLC = beta * L2 @ desc.C_bar
    T_e = np.block([[np.eye(n_new), np.zeros((n_new, a1))], [BLC, np.eye(a1)]])
    T_e_inv = np.block([[np.eye(n_new), np.zeros((n_new, a1))], [-BLC, np.eye(a1)]])
    LE = L1 @ desc.plant.E_f
    A_e = np.block([[gains.N, LE], [-BLC, np.zeros((a1, a1))]])
    G_e = T_e_inv @ np.vstack([L1 @ desc.plant.G, np.zeros((a1, desc.plant.m))])
    E, D = desc.E, desc.D
    B_omega = np.block(
        [
            [L1 @ E - K @ D, -F @ D, np.zeros((n_new, a1))],
            [-beta * L2 @ D, -beta * L2 @ D, np.eye(a1)],
        ]
    )
    return ErrorDynamics(T_e, A_e, T_e_inv @ A_e, G_e, T_e_inv @ B_omega)


def lyapunov_matrix(solution: SdpSolution, beta: float) -> np.ndarray:
    """Returns `P = blkdiag(P1, P2 / beta)`."""
    return scipy.linalg.block_diag(solution["P1"], solution["P2"] / beta)


@dataclass
class DesignReport:
    """DesignReport class holds the closed-loop certificate of a design.

    Args:
        report: Verdicts.
        dynamics: Error dynamics matrices.
        abscissas: Largest real part of eigenvalues per vertex.
        lyapunov: Largest eigenvalue of the Lyapunov form per vertex.
    """

    report: ConditionReport
    dynamics: ErrorDynamics
    abscissas: List[float] = field(default_factory=list)
    lyapunov: List[float] = field(default_factory=list)

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}(passed={bool(self)}, num_vertices={len(self.abscissas)})"

    def __bool__(self) -> bool:
        return bool(self.report)

    @property
    def max_abscissa(self) -> float:
        return max(self.abscissas, default=-np.inf)


def certify_design(
    gains: ObserverGains,
    desc: DescriptorModel,
    vertices: VertexSet,
    solution: Optional[SdpSolution] = None,
    tol: float = 1e-6,
) -> DesignReport:
    """Returns the closed-loop certificate of `gains`.

    Each vertex matrix must be Hurwitz. With a solution, the Lyapunov form
    `At' P + P At + I` at each vertex must be NSD up to `tol` times its norm.
    """
    report = gains.identities(desc)
    report = report.merge(check_existence_conditions(desc, gains.L1))
    dynamics = error_dynamics(gains, desc)
    T_e = dynamics.T_e
    defect = float(np.abs(T_e @ np.linalg.inv(T_e) - np.eye(len(T_e))).max())
    report.add("T_e inverse", defect <= 1e-10, defect)
    P = lyapunov_matrix(solution, gains.beta) if solution else None
    abscissas, lyapunov = [], []
    for k, vertex in enumerate(vertices):
        matrix = dynamics.vertex_matrix(desc, vertex)
        abscissa = linalg.spectral_abscissa(matrix)
        abscissas.append(abscissa)
        report.add(f"Hurwitz vertex {k}", abscissa < 0, abscissa, "max real part")
        if P is not None:
            form = matrix.T @ P + P @ matrix + np.eye(len(P))
            lam = linalg.max_eigenvalue(form)
            lyapunov.append(lam)
            bound = tol * max(1.0, float(np.linalg.norm(form, 2)))
            report.add(f"Lyapunov vertex {k}", lam <= bound, lam, "lambda_max")
    for check in report:
        if not check:
            logger.warning(f"[fauio] Design check failed: {check.name}")
    return DesignReport(report, dynamics, abscissas, lyapunov)


def young_gap(
    blocks: LmiBlocks, solution: SdpSolution, gains: ObserverGains
) -> float:
    """Returns how far the LMI bound lies above the exact dissipation form.

    The multiplier rows of the vertex constraint are eliminated by a Schur
    complement. The exact form is

        [At' P + P At + I,   P E_omega]
        [*,                  -mu I    ]

    at the vertex. The result is the smallest eigenvalue of the difference,
    non-negative when the Young bounds hold.
    """
    desc = blocks.desc
    value = blocks.assemble().evaluate(solution.x)
    sizes = blocks.partition
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    groups = [np.arange(offsets[k], offsets[k + 1]) for k in range(len(sizes))]
    keep = np.concatenate([groups[0], groups[3]])
    drop = np.concatenate([groups[k] for k in range(len(sizes)) if k not in (0, 3)])
    L_kk = value[np.ix_(keep, keep)]
    L_kd = value[np.ix_(keep, drop)]
    L_dd = value[np.ix_(drop, drop)]
    bound = L_kk - L_kd @ np.linalg.solve(L_dd, L_kd.T)
    dynamics = error_dynamics(gains, desc)
    P = lyapunov_matrix(solution, gains.beta)
    At = dynamics.vertex_matrix(desc, blocks.vertex)
    E_omega = dynamics.E_omega
    if blocks.theorem == 1:
        E_omega = E_omega[:, -desc.a1 :]
    w = E_omega.shape[1]
    exact = np.block(
        [
            [At.T @ P + P @ At + np.eye(len(P)), P @ E_omega],
            [E_omega.T @ P, -solution.mu * np.eye(w)],
        ]
    )
    return linalg.min_eigenvalue(bound - exact)
