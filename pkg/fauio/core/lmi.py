"""This module assembles the vertex LMIs of the observer design.

All blocks are affine expressions in the unknowns of a DecisionLayout. The
scalars `epsilon`, `delta` and `beta` are fixed by the layout.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Iterator, List, Optional

import numpy as np
import scipy.sparse as sp

from fauio.core import linalg
from fauio.core.affine import AffineMatrixExpr, DecisionLayout, bmat, identity
from fauio.core.errors import DimensionError
from fauio.core.model import DescriptorModel
from fauio.core.polytope import VertexSet, basis

logger = logging.getLogger("fauio")

STRICT_MARGIN = 1e-6


def _check_L1(desc: DescriptorModel, L1: np.ndarray):
    if L1.shape != (desc.n_new, desc.n):
        raise DimensionError("L1", f"expected {(desc.n_new, desc.n)}, got {L1.shape}")


def _check_scalars(layout: DecisionLayout, theorem: int = 1):
    if not layout.epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {layout.epsilon}")
    if not layout.beta > 0:
        raise ValueError(f"beta must be positive, got {layout.beta}")
    if theorem == 2 and not layout.delta > 0:
        raise ValueError(f"delta must be positive, got {layout.delta}")


def _check_layout(desc: DescriptorModel, layout: DecisionLayout):
    expected = (desc.n_new, desc.a1, desc.p, desc.plant.m, desc.plant.n_bar)
    actual = (layout.n_new, layout.a1, layout.p, layout.m, layout.n_bar)
    if expected != actual:
        raise DimensionError("layout", f"expected sizes {expected}, got {actual}")


def build_sigma11(
    desc: DescriptorModel, L1: np.ndarray, layout: DecisionLayout
) -> AffineMatrixExpr:
    """Returns the leading n_a1 x n_a1 block, with the identity absorbed.

        [P1 LA + LA' P1 - R1' C - C' R1,   P1 LE - (R2' C LA)' - C' R2]
        [*,                               -R2' C LE - (R2' C LE)'    ] + I

    where `LA = L1 A_zeta`, `LE = L1 E_f` and `C = C_bar`.
    """
    _check_L1(desc, L1)
    _check_layout(desc, layout)
    nv = layout.num_vars
    P1, R1, R2 = layout.expr("P1"), layout.expr("R1"), layout.expr("R2")
    LA = L1 @ desc.A_zeta
    LE = L1 @ desc.plant.E_f
    P1LA = P1 @ LA
    R1C = R1.T @ desc.C_bar
    R2C = R2.T @ desc.C_bar
    b11 = P1LA + P1LA.T - R1C - R1C.T
    b21 = (P1 @ LE).T - R2C @ LA - R2C
    R2CLE = R2C @ LE
    b22 = -R2CLE - R2CLE.T
    sigma11 = bmat([[b11, b21.T], [b21, b22]], nv)
    return sigma11 + identity(desc.n_a1, nv)


def build_M_N(desc: DescriptorModel, layout: DecisionLayout):
    """Returns the column blocks `M = [0; R2' C_bar]` and `N = [C_bar' R1; 0]`.

    Both have shape n_a1 x n_new and fill the second block column as
    `M + epsilon N`.
    """
    _check_layout(desc, layout)
    nv = layout.num_vars
    R1, R2 = layout.expr("R1"), layout.expr("R2")
    n_new, a1 = desc.n_new, desc.a1
    M = bmat([[np.zeros((n_new, n_new))], [R2.T @ desc.C_bar]], nv)
    N = bmat([[desc.C_bar.T @ R1], [np.zeros((a1, n_new))]], nv)
    return M, N


def build_X_H_Phi(
    desc: DescriptorModel, L1: np.ndarray, layout: DecisionLayout, vertex: np.ndarray
):
    """Returns the stacked `X` expression and the constant `H Phi` at a vertex.

    Row block (i, j), taken in row-major order, of `X` is

        [P1 L1 G H_ij; -R2' C_bar L1 G H_ij]'         (n_bar x n_a1)

    and the matching row block of `H Phi` is `g_ij [H_i T, 0]`.
    """
    _check_L1(desc, L1)
    _check_layout(desc, layout)
    plant = desc.plant
    m, n_bar = plant.m, plant.n_bar
    vertex = np.atleast_2d(np.asarray(vertex, dtype=float))
    if vertex.shape != (m, n_bar):
        raise DimensionError("vertex", f"expected {(m, n_bar)}, got {vertex.shape}")
    nv = layout.num_vars
    P1, R2 = layout.expr("P1"), layout.expr("R2")
    LG = L1 @ plant.G
    R2C = R2.T @ desc.C_bar
    rows, phi = [], []
    for i in range(m):
        H_i = np.hstack([plant.H[i] @ desc.T, np.zeros((n_bar, desc.a1))])
        for j in range(n_bar):
            LGH = LG @ basis(i + 1, j + 1, m, n_bar)
            column = bmat([[P1 @ LGH], [-(R2C @ LGH)]], nv)
            rows.append([column.T])
            phi.append(vertex[i, j] * H_i)
    if not rows:
        X = AffineMatrixExpr.zeros((0, desc.n_a1), nv)
        return X, np.zeros((0, desc.n_a1))
    return bmat(rows, nv), np.vstack(phi)


def build_Z(layout: DecisionLayout) -> AffineMatrixExpr:
    """Returns the structured multiplier of size m * n_bar * n_bar.

    Examples:
        >>> layout = DecisionLayout(n_new=1, a1=1, p=1, m=1, n_bar=2)
        >>> Z = build_Z(layout)
        >>> Z.shape
        (4, 4)
        >>> Z.is_symmetric()
        True
    """
    return layout.expr("Z")


def build_sigma_q(
    desc: DescriptorModel,
    L1: np.ndarray,
    F: Optional[np.ndarray],
    layout: DecisionLayout,
    theorem: int = 1,
) -> AffineMatrixExpr:
    """Returns the column of the exogenous signal.

    For theorem 1 the exogenous signal is the fault derivative only, and the
    column is `[0; P2 / beta]`. For theorem 2 it is `[w; w'; fa']`:

        [P1 L1 E - R1' D,           -P1 F D,            0        ]
        [-R2' C L1 E - R2' D,       R2' C F D - R2' D,  P2 / beta]
    """
    nv = layout.num_vars
    P1, P2 = layout.expr("P1"), layout.expr("P2")
    R1, R2 = layout.expr("R1"), layout.expr("R2")
    P2b = P2 * (1 / layout.beta)
    if theorem == 1:
        return bmat([[np.zeros((desc.n_new, desc.a1))], [P2b]], nv)
    if F is None:
        raise ValueError("theorem 2 needs F")
    E, D, C = desc.E, desc.D, desc.C_bar
    R2C = R2.T @ C
    top = [P1 @ (L1 @ E) - R1.T @ D, -(P1 @ (F @ D)), np.zeros((desc.n_new, desc.a1))]
    bottom = [-(R2C @ (L1 @ E)) - R2.T @ D, R2C @ (F @ D) - R2.T @ D, P2b]
    return bmat([top, bottom], nv)


def build_sigma_q1(desc: DescriptorModel, layout: DecisionLayout):
    """Returns the two parts of the disturbance cross-term column.

    The first part, `[0; -R2' C_bar]` (n_a1 x n_new), sits in the first block
    row. The second part, `[-delta D' R1; 0; 0]` ((2q + a1) x n_new), sits in the
    row of the exogenous signal.
    """
    nv = layout.num_vars
    R1, R2 = layout.expr("R1"), layout.expr("R2")
    n_new, q, a1 = desc.n_new, desc.q, desc.a1
    upper = bmat([[np.zeros((n_new, n_new))], [-(R2.T @ desc.C_bar)]], nv)
    lower = bmat(
        [
            [(desc.D.T @ R1) * (-layout.delta)],
            [np.zeros((q, n_new))],
            [np.zeros((a1, n_new))],
        ],
        nv,
    )
    return upper, lower


@dataclass
class LmiBlocks:
    """LmiBlocks class holds the blocks of one vertex constraint.

    Args:
        theorem: 1 for the fault-only design, 2 for the disturbance design.
        layout: Decision layout.
        vertex: Vertex of the secant box.
        L1: First block of the inverse of `[T; C_bar]`.
        F: Second block of the inverse of `[T; C_bar]`.
        index: Position of the vertex in the vertex set.
    """

    theorem: int
    layout: DecisionLayout
    vertex: np.ndarray
    L1: np.ndarray
    F: Optional[np.ndarray] = None
    index: int = 0
    Sigma11: AffineMatrixExpr = field(init=False)
    M: AffineMatrixExpr = field(init=False)
    N: AffineMatrixExpr = field(init=False)
    X: AffineMatrixExpr = field(init=False)
    HPhi: np.ndarray = field(init=False)
    Z: AffineMatrixExpr = field(init=False)
    Sigma_q: AffineMatrixExpr = field(init=False)
    Sigma_q1: Optional[tuple] = field(default=None, init=False)
    desc: Optional[DescriptorModel] = field(default=None, repr=False)

    def __repr__(self):
        class_name = self.__class__.__name__
        fields = f"theorem={self.theorem}, vertex={self.index}, size={self.size}"
        return f"{class_name}({fields})"

    def build(self, desc: DescriptorModel) -> "LmiBlocks":
        if self.theorem not in (1, 2):
            raise ValueError(f"theorem must be 1 or 2, got {self.theorem}")
        _check_scalars(self.layout, self.theorem)
        self.desc = desc
        self.Sigma11 = build_sigma11(desc, self.L1, self.layout)
        self.M, self.N = build_M_N(desc, self.layout)
        self.X, self.HPhi = build_X_H_Phi(desc, self.L1, self.layout, self.vertex)
        self.Z = build_Z(self.layout)
        self.Sigma_q = build_sigma_q(desc, self.L1, self.F, self.layout, self.theorem)
        if self.theorem == 2:
            self.Sigma_q1 = build_sigma_q1(desc, self.layout)
        return self

    @property
    def partition(self) -> List[int]:
        """Returns the sizes of the block rows."""
        desc = self.desc
        sizes = [desc.n_a1, desc.n_new, self.HPhi.shape[0], self.Sigma_q.shape[1]]
        if self.theorem == 2:
            sizes.append(desc.n_new)
        return sizes

    @property
    def size(self) -> int:
        return sum(self.partition) if self.desc is not None else 0

    def assemble(self) -> AffineMatrixExpr:
        """Returns the symmetric constraint expression, required to be NSD."""
        layout, nv = self.layout, self.layout.num_vars
        eps = layout.epsilon
        P1 = layout.expr("P1")
        MN = self.M + self.N * eps
        XZ = self.X + self.Z @ self.HPhi
        w = self.Sigma_q.shape[1]
        mu_block = _scaled_identity(layout, "mu", w)
        rows = [
            [self.Sigma11, MN, XZ.T, self.Sigma_q],
            [MN.T, P1 * (-2 * eps), None, None],
            [XZ, None, self.Z * -2.0, None],
            [self.Sigma_q.T, None, None, -mu_block],
        ]
        if self.theorem == 2:
            upper, lower = self.Sigma_q1
            rows[0].append(upper)
            rows[1].append(None)
            rows[2].append(None)
            rows[3].append(lower)
            rows.append([upper.T, None, None, lower.T, P1 * (-2 * layout.delta)])
        return bmat(rows, nv)


def _scaled_identity(layout: DecisionLayout, name: str, size: int) -> AffineMatrixExpr:
    """Returns `x I` for the scalar unknown `name`."""
    index = layout[name].offset
    linear = sp.csr_matrix(
        (np.ones(size), (np.arange(size) * (size + 1), np.full(size, index))),
        shape=(size * size, layout.num_vars),
    )
    return AffineMatrixExpr(np.zeros((size, size)), linear)


def assemble_thm1(
    desc: DescriptorModel, L1: np.ndarray, layout: DecisionLayout, vertex: np.ndarray
) -> AffineMatrixExpr:
    """Returns the fault-only vertex constraint.

    Its size is `n_a1 + n_new + m * n_bar * n_bar + a1`.
    """
    return LmiBlocks(1, layout, vertex, L1).build(desc).assemble()


def assemble_thm2(
    desc: DescriptorModel,
    L1: np.ndarray,
    F: np.ndarray,
    layout: DecisionLayout,
    vertex: np.ndarray,
) -> AffineMatrixExpr:
    """Returns the disturbance vertex constraint.

    Its size is `n_a1 + n_new + m * n_bar * n_bar + 2q + a1 + n_new`.
    """
    if F is None:
        raise ValueError("theorem 2 needs F")
    return LmiBlocks(2, layout, vertex, L1, F).build(desc).assemble()


@dataclass
class Constraint:
    """Constraint class represents `expr <= 0` (nsd) or `expr >= 0` (psd).

    Examples:
        >>> x = AffineMatrixExpr.variable(0, 1)
        >>> c = Constraint('x <= 1', x - 1.0)
        >>> c
        Constraint('x <= 1', sense='nsd', size=1)
        >>> c.violation(np.array([3.0]))
        2.0
    """

    name: str
    expr: AffineMatrixExpr
    sense: str = "nsd"

    def __post_init__(self):
        if self.sense not in ("nsd", "psd"):
            raise ValueError(f"sense must be 'nsd' or 'psd', got {self.sense!r}")

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.name!r}, sense={self.sense!r}, size={self.size})"

    @property
    def size(self) -> int:
        return self.expr.shape[0]

    def violation(self, x: np.ndarray) -> float:
        """Returns the largest eigenvalue of the wrong sign at `x`."""
        value = self.expr.evaluate(x)
        if self.sense == "nsd":
            return linalg.max_eigenvalue(value)
        return -linalg.min_eigenvalue(value)


def positivity_constraints(
    layout: DecisionLayout, margin: float = STRICT_MARGIN
) -> List[Constraint]:
    """Returns the positivity constraints of the unknowns.

    `P1`, `P2` and `Z` must exceed `margin * I`, every off-diagonal block of `Z`
    must be PSD and `mu` must be non-negative.
    """
    nv = layout.num_vars
    constraints = []
    for name in ["P1", "P2", "Z"]:
        expr = layout.expr(name)
        if expr.shape[0]:
            expr = expr - identity(expr.shape[0], nv) * margin
            constraints.append(Constraint(f"{name} > 0", expr, "psd"))
    for name in layout.off_diagonal_names():
        constraints.append(Constraint(f"{name} >= 0", layout.expr(name), "psd"))
    constraints.append(Constraint("mu >= 0", layout.expr("mu"), "psd"))
    return constraints


@dataclass
class SynthesisProblem:
    """SynthesisProblem class bundles everything a vertex LMI family needs.

    Args:
        desc: Descriptor model.
        L1: First block of the inverse of `[T; C_bar]`.
        F: Second block of the inverse of `[T; C_bar]`.
        vertices: Vertices of the secant box.
        theorem: 1 or 2.
        epsilon: Young scalar of the gain cross term.
        delta: Young scalar of the disturbance cross term.
        beta: Learning rate.
        strict_margin: Margin realising strict positivity.
    """

    desc: DescriptorModel
    L1: np.ndarray
    F: np.ndarray
    vertices: VertexSet
    theorem: int = 1
    epsilon: float = 0.1
    delta: float = 1.0
    beta: float = 100.0
    strict_margin: float = STRICT_MARGIN
    layout: DecisionLayout = field(init=False)

    def __post_init__(self):
        if self.theorem not in (1, 2):
            raise ValueError(f"theorem must be 1 or 2, got {self.theorem}")
        plant = self.desc.plant
        self.layout = DecisionLayout(
            self.desc.n_new,
            self.desc.a1,
            self.desc.p,
            plant.m,
            plant.n_bar,
            self.epsilon,
            self.delta,
            self.beta,
        )
        _check_scalars(self.layout, self.theorem)

    def __repr__(self):
        class_name = self.__class__.__name__
        scalars = f"epsilon={self.epsilon}, beta={self.beta}"
        if self.theorem == 2:
            scalars += f", delta={self.delta}"
        scalars += f", num_vertices={len(self.vertices)}"
        return f"{class_name}(theorem={self.theorem}, {scalars})"

    def __iter__(self) -> Iterator[LmiBlocks]:
        yield from self.blocks()

    def with_scalars(
        self, epsilon: float, delta: Optional[float] = None
    ) -> "SynthesisProblem":
        delta = self.delta if delta is None else delta
        return replace(self, epsilon=epsilon, delta=delta)

    def blocks(self) -> List[LmiBlocks]:
        blocks = []
        for k, vertex in enumerate(self.vertices):
            blocks.append(
                LmiBlocks(self.theorem, self.layout, vertex, self.L1, self.F, k)
                .build(self.desc)
            )
        return blocks

    def constraints(self) -> List[Constraint]:
        """Returns the vertex constraints followed by the positivity constraints."""
        constraints = [
            Constraint(f"vertex {blocks.index}", blocks.assemble())
            for blocks in self.blocks()
        ]
        return constraints + positivity_constraints(self.layout, self.strict_margin)

    def objective(self) -> AffineMatrixExpr:
        return self.layout.expr("mu")
