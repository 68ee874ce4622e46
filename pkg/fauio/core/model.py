"""This module provides the plant model and its descriptor augmentation."""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from fauio.core import linalg
from fauio.core.base import ConditionReport
from fauio.core.errors import DimensionError
from fauio.core.nonlinearity import NonlinearityEvaluator

logger = logging.getLogger("fauio")


@dataclass(eq=False)
class PlantModel:
    """PlantModel class represents a Lipschitz nonlinear plant with faults.

        x' = A x + B u + G g(x) + E_f f_a + E_1 w_1
        y  = C x + D_f f_s + D_1 w_2

    Matrices are stored as 2-D float arrays. Zero-width blocks are allowed for
    `E_1`, `D_1` and `D_f`.

    Args:
        A: State matrix (n x n).
        B: Input matrix (n x s).
        G: Nonlinearity gain (n x m).
        E_f: Actuator fault distribution (n x a1).
        E_1: Process disturbance distribution (n x q1).
        C: Output matrix (p x n).
        D_f: Sensor fault distribution (p x a2).
        D_1: Measurement disturbance distribution (p x q2).
        H: List of `m` argument matrices (n_bar x n).
        lipschitz_bounds: Secant bounds g_b (m x n_bar), all entries >= 0.
        nonlinearity: Evaluator of g.
        name: Name of the plant.

    Examples:
        >>> plant = PlantModel(A=[[0.0]], B=[[1.0]], C=[[1.0]], E_f=[[1.0]])
        >>> plant
        PlantModel('plant', n=1, p=1, m=0, a1=1, a2=0, q=0)
        >>> plant.D_f.shape
        (1, 0)
    """

    A: np.ndarray
    B: np.ndarray = None
    G: np.ndarray = None
    E_f: np.ndarray = None
    E_1: np.ndarray = None
    C: np.ndarray = None
    D_f: np.ndarray = None
    D_1: np.ndarray = None
    H: List[np.ndarray] = field(default_factory=list)
    lipschitz_bounds: np.ndarray = None
    nonlinearity: Optional[NonlinearityEvaluator] = None
    name: str = "plant"

    def __post_init__(self):
        self.A = linalg.as_matrix(self.A)
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise DimensionError("A", f"must be square, got {self.A.shape}")
        self.C = linalg.as_matrix(self.C, 0, n)
        p = self.C.shape[0]
        self.B = linalg.as_matrix(self.B, n, 0)
        self.G = linalg.as_matrix(self.G, n, 0)
        self.E_f = linalg.as_matrix(self.E_f, n, 0)
        self.E_1 = linalg.as_matrix(self.E_1, n, 0)
        self.D_f = linalg.as_matrix(self.D_f, p, 0)
        self.D_1 = linalg.as_matrix(self.D_1, p, 0)
        for name in ["B", "G", "E_f", "E_1"]:
            self._check_rows(name, n)
        for name in ["D_f", "D_1"]:
            self._check_rows(name, p)
        if self.C.shape[1] != n:
            raise DimensionError("C", f"expected {n} columns, got {self.C.shape[1]}")
        self.H = [linalg.as_matrix(Hi) for Hi in self.H]
        m = self.G.shape[1]
        if len(self.H) != m:
            raise DimensionError("H", f"expected {m} matrices, got {len(self.H)}")
        n_bar = self.H[0].shape[0] if self.H else 0
        for k, Hi in enumerate(self.H):
            if Hi.shape != (n_bar, n):
                raise DimensionError(
                    f"H[{k}]", f"expected shape {(n_bar, n)}, got {Hi.shape}"
                )
        self.lipschitz_bounds = linalg.as_matrix(self.lipschitz_bounds, m, n_bar)
        if self.lipschitz_bounds.shape != (m, n_bar):
            raise DimensionError(
                "lipschitz_bounds",
                f"expected shape {(m, n_bar)}, got {self.lipschitz_bounds.shape}",
            )
        if not np.all(np.isfinite(self.lipschitz_bounds)):
            raise DimensionError("lipschitz_bounds", "entries must be finite")
        if np.any(self.lipschitz_bounds < 0):
            raise DimensionError("lipschitz_bounds", "entries must be non-negative")

    def _check_rows(self, name: str, rows: int):
        matrix = getattr(self, name)
        if matrix.shape[0] != rows:
            raise DimensionError(
                name, f"expected {rows} rows, got {matrix.shape[0]}"
            )

    def __repr__(self):
        class_name = self.__class__.__name__
        dims = f"n={self.n}, p={self.p}, m={self.m}, a1={self.a1}, a2={self.a2}"
        return f"{class_name}({self.name!r}, {dims}, q={self.q})"

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def s(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return self.G.shape[1]

    @property
    def n_bar(self) -> int:
        return self.lipschitz_bounds.shape[1]

    @property
    def a1(self) -> int:
        return self.E_f.shape[1]

    @property
    def a2(self) -> int:
        return self.D_f.shape[1]

    @property
    def q1(self) -> int:
        return self.E_1.shape[1]

    @property
    def q2(self) -> int:
        return self.D_1.shape[1]

    @property
    def q(self) -> int:
        return self.q1 + self.q2

    def g(self, x: np.ndarray) -> np.ndarray:
        """Returns g(x), or zeros if no nonlinearity is attached."""
        if self.nonlinearity is None or not self.m:
            return np.zeros(self.m)
        return self.nonlinearity.evaluate_state(self.H, x)

    def matrices(self) -> dict:
        """Returns the plant matrices in a fixed order."""
        matrices = {}
        for name in ["A", "B", "G", "E_f", "E_1", "C", "D_f", "D_1"]:
            matrices[name] = getattr(self, name)
        for k, Hi in enumerate(self.H):
            matrices[f"H{k + 1}"] = Hi
        matrices["lipschitz_bounds"] = self.lipschitz_bounds
        return matrices


@dataclass(eq=False)
class DescriptorModel:
    """DescriptorModel class holds the plant augmented with sensor faults.

    The augmented state is `zeta = [x; f_s]` of size `n_new = n + a2`.

    Attributes:
        T: Projection `[I_n 0]` (n x n_new).
        A_zeta: `[A 0]` (n x n_new).
        C_bar: `[C D_f]` (p x n_new).
        E: `[E_1 0]` (n x q).
        D: `[0 D_1]` (p x q).
    """

    plant: PlantModel
    T: np.ndarray = field(init=False)
    A_zeta: np.ndarray = field(init=False)
    C_bar: np.ndarray = field(init=False)
    E: np.ndarray = field(init=False)
    D: np.ndarray = field(init=False)

    def __post_init__(self):
        plant = self.plant
        n, a2 = plant.n, plant.a2
        self.T = np.hstack([np.eye(n), np.zeros((n, a2))])
        self.A_zeta = np.hstack([plant.A, np.zeros((n, a2))])
        self.C_bar = np.hstack([plant.C, plant.D_f])
        self.E = np.hstack([plant.E_1, np.zeros((n, plant.q2))])
        self.D = np.hstack([np.zeros((plant.p, plant.q1)), plant.D_1])

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.plant.name!r}, n_new={self.n_new}, q={self.q})"

    @property
    def n(self) -> int:
        return self.plant.n

    @property
    def p(self) -> int:
        return self.plant.p

    @property
    def a1(self) -> int:
        return self.plant.a1

    @property
    def a2(self) -> int:
        return self.plant.a2

    @property
    def q(self) -> int:
        return self.plant.q

    @property
    def n_new(self) -> int:
        return self.n + self.a2

    @property
    def n_a1(self) -> int:
        return self.n_new + self.a1


def augment_descriptor(plant: PlantModel) -> DescriptorModel:
    """Returns the descriptor form of `plant`.

    Examples:
        >>> plant = PlantModel(A=[[0.0]], C=[[1.0]], D_f=[[1.0]])
        >>> desc = augment_descriptor(plant)
        >>> desc.C_bar.tolist()
        [[1.0, 1.0]]
        >>> desc.T.tolist()
        [[1.0, 0.0]]
    """
    return DescriptorModel(plant)


def validate_assumptions(plant: PlantModel) -> ConditionReport:
    """Returns verdicts of the standing assumptions of the observer design.

    Failures are reported, never raised.
    """
    report = ConditionReport("assumptions")
    passed, tested = linalg.pbh_detectability(plant.A, plant.C)
    worst = min((rank for _, rank in tested), default=plant.n)
    report.add(
        "detectability (A, C)",
        passed,
        worst,
        f"PBH rank over {len(tested)} unstable eigenvalue(s), n={plant.n}",
    )
    for name in ["E_f", "D_f"]:
        matrix = getattr(plant, name)
        rank = linalg.numerical_rank(matrix)
        report.add(
            f"full column rank {name}",
            rank == matrix.shape[1],
            rank,
            f"rank {rank} of {matrix.shape[1]} columns",
        )
    report.add(
        "lipschitz bounds",
        bool(np.all(plant.lipschitz_bounds >= 0)),
        float(plant.lipschitz_bounds.max()) if plant.lipschitz_bounds.size else 0.0,
        f"{plant.m} x {plant.n_bar} secant bounds",
    )
    for check in report:
        if not check:
            logger.warning(f"[fauio] Assumption failed: {check.name}")
    return report


def check_existence_conditions(
    desc: DescriptorModel, L1: np.ndarray
) -> ConditionReport:
    """Returns verdicts of the existence conditions of the observer.

    Args:
        desc: Descriptor model.
        L1: First block of the inverse of `[T; C_bar]`.
    """
    if L1.shape != (desc.n_new, desc.n):
        raise DimensionError("L1", f"expected {(desc.n_new, desc.n)}, got {L1.shape}")
    report = ConditionReport("existence")
    A = L1 @ desc.A_zeta
    passed, tested = linalg.pbh_detectability(A, desc.C_bar)
    worst = min((rank for _, rank in tested), default=desc.n_new)
    report.add(
        "detectability (L1 A_zeta, C_bar)",
        passed,
        worst,
        f"PBH rank over {len(tested)} unstable eigenvalue(s), n_new={desc.n_new}",
    )
    E_f = desc.plant.E_f
    stack = np.block([[A, L1 @ E_f], [desc.C_bar, np.zeros((desc.p, desc.a1))]])
    rank = linalg.numerical_rank(stack)
    size = desc.n_a1
    report.add(
        "zero at origin",
        rank == size,
        rank,
        f"rank {rank} of [L1 A_zeta, L1 E_f; C_bar, 0], n_new + a1 = {size}",
    )
    return report
