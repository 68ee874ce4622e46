"""This module lowers affine matrix constraints to a standard conic program.

A symmetric k x k matrix is packed into a vector of length k (k + 1) / 2 by
taking its upper triangle row by row, with off-diagonal entries scaled by
sqrt(2) so that the packing preserves the trace inner product.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from fauio.core.affine import AffineMatrixExpr, DecisionLayout
from fauio.core.lmi import Constraint

logger = logging.getLogger("fauio")

SYMMETRY_RTOL = 1e-10


def svec_length(k: int) -> int:
    return k * (k + 1) // 2


def svec_operator(k: int) -> sp.csr_matrix:
    """Returns the sparse map from row-major `vec(S)` to `svec(S)`.

    Off-diagonal entries average the two mirrored positions, so the map is
    exact on symmetric matrices.
    """
    data, rows, cols = [], [], []
    r = 0
    for a in range(k):
        for b in range(a, k):
            if a == b:
                data.append(1.0)
                rows.append(r)
                cols.append(a * k + a)
            else:
                w = np.sqrt(2) / 2
                data.extend([w, w])
                rows.extend([r, r])
                cols.extend([a * k + b, b * k + a])
            r += 1
    return sp.csr_matrix((data, (rows, cols)), shape=(svec_length(k), k * k))


def svec(matrix: np.ndarray) -> np.ndarray:
    """Returns the packed vector of a symmetric matrix.

    Examples:
        >>> svec(np.array([[1.0, 2.0], [2.0, 3.0]])).round(6).tolist()
        [1.0, 2.828427, 3.0]
    """
    k = matrix.shape[0]
    return svec_operator(k) @ np.asarray(matrix, dtype=float).reshape(-1)


def smat(vector: np.ndarray) -> np.ndarray:
    """Returns the symmetric matrix of a packed vector.

    Examples:
        >>> smat(svec(np.array([[1.0, 2.0], [2.0, 3.0]]))).round(12).tolist()
        [[1.0, 2.0], [2.0, 3.0]]
    """
    vector = np.asarray(vector, dtype=float)
    k = int(round((np.sqrt(8 * len(vector) + 1) - 1) / 2))
    if svec_length(k) != len(vector):
        raise ValueError(f"length {len(vector)} is not a packed symmetric size")
    matrix = np.zeros((k, k))
    r = 0
    for a in range(k):
        for b in range(a, k):
            value = vector[r] if a == b else vector[r] / np.sqrt(2)
            matrix[a, b] = matrix[b, a] = value
            r += 1
    return matrix


@dataclass
class ConeBlock:
    """ConeBlock class holds `svec(S) = A x + b` with `S` in the PSD cone.

    A block of size 1 is a non-negativity constraint.
    """

    name: str
    size: int
    A: sp.csr_matrix
    b: np.ndarray

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.name!r}, size={self.size})"

    @property
    def is_linear(self) -> bool:
        return self.size == 1

    def slack(self, x: np.ndarray) -> np.ndarray:
        """Returns the matrix `S` at `x`."""
        return smat(self.A @ x + self.b)


@dataclass
class ConeProgram:
    """ConeProgram class represents `min c'x` subject to PSD cone blocks.

    Args:
        c: Objective vector.
        blocks: Cone blocks.
        layout: Layout used to name and unpack the unknowns.
    """

    c: np.ndarray
    blocks: List[ConeBlock] = field(default_factory=list)
    layout: Optional[DecisionLayout] = None

    def __repr__(self):
        class_name = self.__class__.__name__
        psd = sum(not block.is_linear for block in self.blocks)
        linear = len(self.blocks) - psd
        sizes = f"num_psd={psd}, num_linear={linear}"
        return f"{class_name}(num_vars={self.num_vars}, {sizes})"

    def __iter__(self) -> Iterator[ConeBlock]:
        yield from self.blocks

    @property
    def num_vars(self) -> int:
        return len(self.c)

    def unpack(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        """Returns named unknowns of `x`, or `{'x': x}` without a layout."""
        if self.layout is None:
            return {"x": np.asarray(x, dtype=float)}
        return self.layout.unpack(x)

    def fix(self, index: int, value: float) -> "ConeProgram":
        """Returns a copy with unknown `index` pinned to `value`."""
        row = sp.csr_matrix(([1.0], ([0], [index])), shape=(1, self.num_vars))
        blocks = list(self.blocks)
        blocks.append(ConeBlock(f"x[{index}] >= {value}", 1, row, np.array([-value])))
        blocks.append(ConeBlock(f"x[{index}] <= {value}", 1, -row, np.array([value])))
        return ConeProgram(self.c.copy(), blocks, self.layout)

    def check_unknowns(self) -> List[int]:
        """Returns indices of unknowns referenced by no block and not by `c`."""
        used = np.abs(self.c) > 0
        for block in self.blocks:
            used |= np.asarray(abs(block.A).sum(axis=0)).reshape(-1) > 0
        return [int(k) for k in np.flatnonzero(~used)]

    def to_text(self) -> str:
        """Returns the program as triplet lists per cone.

        The format is line based:

            program <num_vars> <num_blocks>
            c <nnz>
            <col> <value>                     (nnz lines)
            cone <name> <size> <nnz of A> <nnz of b>
            A <row> <col> <value>             (nnz lines)
            b <row> <value>                   (nnz lines)
        """
        lines = [f"program {self.num_vars} {len(self.blocks)}"]
        nonzero = np.flatnonzero(self.c)
        lines.append(f"c {len(nonzero)}")
        lines.extend(f"{k} {self.c[k]:.17g}" for k in nonzero)
        for block in self.blocks:
            coo = block.A.tocoo()
            b_nonzero = np.flatnonzero(block.b)
            name = block.name.replace(" ", "_")
            lines.append(f"cone {name} {block.size} {coo.nnz} {len(b_nonzero)}")
            for r, c, v in zip(coo.row, coo.col, coo.data):
                lines.append(f"A {r} {c} {v:.17g}")
            lines.extend(f"b {r} {block.b[r]:.17g}" for r in b_nonzero)
        return "\n".join(lines) + "\n"


def lower_to_cone(
    constraints: Sequence[Constraint],
    objective: AffineMatrixExpr,
    layout: Optional[DecisionLayout] = None,
) -> ConeProgram:
    """Returns the conic program of `constraints`, minimising `objective`.

    An NSD constraint `E <= 0` becomes `svec(-E)` in the PSD cone, a PSD
    constraint `E >= 0` becomes `svec(E)` in the PSD cone.

    Args:
        constraints: Symmetric affine constraints.
        objective: 1 x 1 affine expression. Its constant is dropped.
        layout: Optional layout kept for unpacking.

    Raises:
        ValueError: If a constraint is not symmetric.

    Examples:
        >>> x = AffineMatrixExpr.variable(0, 1)
        >>> program = lower_to_cone([Constraint('x <= 1', x - 1.0)], -x)
        >>> program
        ConeProgram(num_vars=1, num_psd=0, num_linear=1)
        >>> program.c.tolist()
        [-1.0]
    """
    if objective.shape != (1, 1):
        raise ValueError(f"objective must be 1 x 1, got {objective.shape}")
    c = np.asarray(objective.linear.toarray()).reshape(-1)
    blocks = []
    for constraint in constraints:
        expr = constraint.expr
        k = expr.shape[0]
        if expr.shape != (k, k):
            raise ValueError(f"{constraint.name}: constraint is not square")
        scale = max(1.0, float(np.abs(expr.constant).max(initial=0.0)))
        if expr.linear.nnz:
            scale = max(scale, float(abs(expr.linear).max()))
        if expr.symmetry_defect() > SYMMETRY_RTOL * scale:
            raise ValueError(f"{constraint.name}: asymmetric expression")
        if constraint.sense == "nsd":
            expr = -expr
        S = svec_operator(k)
        A = (S @ expr.linear).tocsr()
        b = S @ expr.constant.reshape(-1)
        blocks.append(ConeBlock(constraint.name, k, A, b))
    program = ConeProgram(c, blocks, layout)
    unused = program.check_unknowns()
    if unused:
        logger.debug(f"[fauio] {len(unused)} unknown(s) appear in no constraint")
    return program
