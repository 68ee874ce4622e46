"""This module provides affine matrix expressions of scalar decision variables.

An expression of shape (r, c) over `num_vars` unknowns is stored as a constant
matrix and a sparse map from the unknowns to the row-major entries.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from fauio.core.errors import DimensionError

Operand = Union["AffineMatrixExpr", np.ndarray, float, int]


class AffineMatrixExpr:
    """AffineMatrixExpr class represents `constant + sum_k x_k M_k`.

    Args:
        constant: Constant matrix.
        linear: Sparse matrix of shape (r * c, num_vars). Column k holds the
            row-major entries of `M_k`.

    Examples:
        >>> x = AffineMatrixExpr.variable(0, 2)
        >>> y = AffineMatrixExpr.variable(1, 2)
        >>> expr = 2 * x - y + 1
        >>> expr
        AffineMatrixExpr(shape=(1, 1), num_vars=2, num_terms=2)
        >>> expr.evaluate(np.array([3.0, 4.0])).tolist()
        [[3.0]]
        >>> [k for k, _ in expr.terms]
        [0, 1]
    """

    __array_ufunc__ = None

    def __init__(self, constant: np.ndarray, linear: sp.spmatrix):
        self.constant = np.atleast_2d(np.asarray(constant, dtype=float))
        self.linear = sp.csr_matrix(linear)
        rows, cols = self.constant.shape
        if self.linear.shape[0] != rows * cols:
            raise DimensionError(
                "linear", f"expected {rows * cols} rows, got {self.linear.shape[0]}"
            )

    def __repr__(self):
        class_name = self.__class__.__name__
        shape, num_vars = self.shape, self.num_vars
        num_terms = len(self.terms)
        sizes = f"num_vars={num_vars}, num_terms={num_terms}"
        return f"{class_name}(shape={shape}, {sizes})"

    @classmethod
    def zeros(cls, shape: Tuple[int, int], num_vars: int) -> "AffineMatrixExpr":
        rows, cols = shape
        return cls(np.zeros((rows, cols)), sp.csr_matrix((rows * cols, num_vars)))

    @classmethod
    def constant_matrix(cls, matrix, num_vars: int) -> "AffineMatrixExpr":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(matrix, sp.csr_matrix((matrix.size, num_vars)))

    @classmethod
    def variable(cls, index: int, num_vars: int) -> "AffineMatrixExpr":
        """Returns the 1 x 1 expression of unknown `index`."""
        linear = sp.csr_matrix(([1.0], ([0], [index])), shape=(1, num_vars))
        return cls(np.zeros((1, 1)), linear)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.constant.shape

    @property
    def num_vars(self) -> int:
        return self.linear.shape[1]

    @property
    def T(self) -> "AffineMatrixExpr":
        rows, cols = self.shape
        perm = np.arange(rows * cols).reshape(rows, cols).T.reshape(-1)
        return AffineMatrixExpr(self.constant.T, self.linear[perm])

    @property
    def terms(self) -> List[Tuple[int, np.ndarray]]:
        """Returns (unknown index, coefficient matrix) pairs of nonzero terms."""
        csc = self.linear.tocsc()
        csc.eliminate_zeros()
        terms = []
        for k in np.flatnonzero(np.diff(csc.indptr)):
            column = csc[:, k].toarray().reshape(self.shape)
            terms.append((int(k), column))
        return terms

    def _coerce(self, other: Operand) -> "AffineMatrixExpr":
        if isinstance(other, AffineMatrixExpr):
            if other.num_vars != self.num_vars:
                raise DimensionError(
                    "num_vars", f"{self.num_vars} != {other.num_vars}"
                )
            return other
        matrix = np.asarray(other, dtype=float)
        if matrix.ndim == 0:
            matrix = np.full(self.shape, float(matrix))
        return AffineMatrixExpr.constant_matrix(matrix, self.num_vars)

    def __add__(self, other: Operand) -> "AffineMatrixExpr":
        other = self._coerce(other)
        if other.shape != self.shape:
            raise DimensionError("shape", f"cannot add {self.shape} and {other.shape}")
        constant = self.constant + other.constant
        return AffineMatrixExpr(constant, self.linear + other.linear)

    def __radd__(self, other: Operand) -> "AffineMatrixExpr":
        return self + other

    def __neg__(self) -> "AffineMatrixExpr":
        return AffineMatrixExpr(-self.constant, -self.linear)

    def __sub__(self, other: Operand) -> "AffineMatrixExpr":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Operand) -> "AffineMatrixExpr":
        return self._coerce(other) - self

    def __mul__(self, scalar: float) -> "AffineMatrixExpr":
        if isinstance(scalar, AffineMatrixExpr) or np.ndim(scalar) != 0:
            raise TypeError("only scalar multiplication is affine; use @")
        return AffineMatrixExpr(scalar * self.constant, scalar * self.linear)

    def __rmul__(self, scalar: float) -> "AffineMatrixExpr":
        return self * scalar

    def __matmul__(self, matrix: np.ndarray) -> "AffineMatrixExpr":
        """Right multiplication by a constant matrix."""
        if isinstance(matrix, AffineMatrixExpr):
            raise TypeError("product of two affine expressions is not affine")
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        rows, cols = self.shape
        if matrix.shape[0] != cols:
            message = f"cannot multiply {self.shape} @ {matrix.shape}"
            raise DimensionError("shape", message)
        kron = sp.kron(sp.identity(rows), sp.csr_matrix(matrix.T), format="csr")
        return AffineMatrixExpr(self.constant @ matrix, kron @ self.linear)

    def __rmatmul__(self, matrix: np.ndarray) -> "AffineMatrixExpr":
        """Left multiplication by a constant matrix."""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        rows, cols = self.shape
        if matrix.shape[1] != rows:
            message = f"cannot multiply {matrix.shape} @ {self.shape}"
            raise DimensionError("shape", message)
        kron = sp.kron(sp.csr_matrix(matrix), sp.identity(cols), format="csr")
        return AffineMatrixExpr(matrix @ self.constant, kron @ self.linear)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Returns the value of the expression at the assignment `x`."""
        values = self.linear @ np.asarray(x, dtype=float)
        return self.constant + values.reshape(self.shape)

    def symmetry_defect(self) -> float:
        """Returns the largest entry of `self - self.T` over constant and terms."""
        if self.shape[0] != self.shape[1]:
            return np.inf
        diff = self - self.T
        linear = abs(diff.linear).max() if diff.linear.nnz else 0.0
        return float(max(np.abs(diff.constant).max(initial=0.0), linear))

    def is_symmetric(self, tol: float = 1e-10) -> bool:
        return self.symmetry_defect() <= tol


def bmat(
    blocks: Sequence[Sequence[Optional[Operand]]], num_vars: int
) -> AffineMatrixExpr:
    """Returns the block matrix of `blocks`.

    `None` entries are zero blocks. Each block row and block column must contain
    at least one block with a known shape.

    Examples:
        >>> x = AffineMatrixExpr.variable(0, 1)
        >>> M = bmat([[x, None], [np.ones((2, 1)), np.eye(2)]], 1)
        >>> M.shape
        (3, 3)
        >>> M.evaluate(np.array([5.0]))[0].tolist()
        [5.0, 0.0, 0.0]
    """
    heights: List[Optional[int]] = [None] * len(blocks)
    widths: List[Optional[int]] = [None] * len(blocks[0])
    exprs: List[List[Optional[AffineMatrixExpr]]] = []
    for r, row in enumerate(blocks):
        if len(row) != len(widths):
            raise DimensionError("bmat", "ragged block rows")
        exprs.append([])
        for c, block in enumerate(row):
            if block is not None and not isinstance(block, AffineMatrixExpr):
                block = AffineMatrixExpr.constant_matrix(block, num_vars)
            if block is not None:
                h, w = block.shape
                if heights[r] not in (None, h) or widths[c] not in (None, w):
                    raise DimensionError("bmat", f"block ({r}, {c}) has shape {(h, w)}")
                heights[r], widths[c] = h, w
            exprs[-1].append(block)
    if None in heights or None in widths:
        raise DimensionError("bmat", "a block row or column has unknown size")
    row_offsets = np.concatenate([[0], np.cumsum(heights)])
    col_offsets = np.concatenate([[0], np.cumsum(widths)])
    total_rows, total_cols = int(row_offsets[-1]), int(col_offsets[-1])
    constant = np.zeros((total_rows, total_cols))
    data, rows, cols = [], [], []
    for r, row in enumerate(exprs):
        for c, block in enumerate(row):
            if block is None:
                continue
            r0, c0 = row_offsets[r], col_offsets[c]
            h, w = block.shape
            constant[r0 : r0 + h, c0 : c0 + w] = block.constant
            coo = block.linear.tocoo()
            a, b = np.divmod(coo.row, w)
            rows.append((r0 + a) * total_cols + c0 + b)
            cols.append(coo.col)
            data.append(coo.data)
    if data:
        linear = sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(total_rows * total_cols, num_vars),
        )
    else:
        linear = sp.csr_matrix((total_rows * total_cols, num_vars))
    return AffineMatrixExpr(constant, linear)


def identity(size: int, num_vars: int) -> AffineMatrixExpr:
    return AffineMatrixExpr.constant_matrix(np.eye(size), num_vars)


@dataclass
class VariableBlock:
    """VariableBlock class locates one matrix unknown in the decision vector.

    Args:
        name: Name of the unknown.
        shape: Shape of the matrix.
        symmetric: True if only the upper triangle is free.
        offset: Index of the first scalar unknown.
    """

    name: str
    shape: Tuple[int, int]
    symmetric: bool = False
    offset: int = 0
    size: int = field(init=False)

    def __post_init__(self):
        rows, cols = self.shape
        if self.symmetric:
            if rows != cols:
                raise DimensionError(self.name, "symmetric unknown must be square")
            self.size = rows * (rows + 1) // 2
        else:
            self.size = rows * cols

    def __repr__(self):
        class_name = self.__class__.__name__
        kind = "symmetric" if self.symmetric else "full"
        return f"{class_name}({self.name!r}, shape={self.shape}, {kind})"

    def indices(self) -> np.ndarray:
        """Returns the decision index of every row-major entry."""
        rows, cols = self.shape
        if not self.symmetric:
            return self.offset + np.arange(rows * cols)
        index = np.zeros((rows, cols), dtype=int)
        k = self.offset
        for a in range(rows):
            for b in range(a, cols):
                index[a, b] = index[b, a] = k
                k += 1
        return index.reshape(-1)

    def expr(self, num_vars: int) -> AffineMatrixExpr:
        rows, cols = self.shape
        linear = sp.csr_matrix(
            (np.ones(rows * cols), (np.arange(rows * cols), self.indices())),
            shape=(rows * cols, num_vars),
        )
        return AffineMatrixExpr(np.zeros(self.shape), linear)

    def unpack(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.indices()].reshape(self.shape)


@dataclass
class DecisionLayout:
    """DecisionLayout class lays out the unknowns of the observer design.

    The unknowns are `P1`, `P2`, `R1`, `R2`, the blocks of the structured
    multiplier `Z` and the scalar `mu`, in this order. `Z` is a grid of
    `m * n_bar` square blocks of size `n_bar`. Diagonal blocks are symmetric.
    Each off-diagonal pair of blocks is one symmetric unknown used at both
    mirrored positions.

    Args:
        n_new: Size of the augmented state.
        a1: Number of actuator faults.
        p: Number of outputs.
        m: Number of nonlinearity entries.
        n_bar: Size of each nonlinearity argument.
        epsilon: Young scalar of the gain cross term.
        delta: Young scalar of the disturbance cross term.
        beta: Learning rate of the adaptive law.

    Examples:
        >>> layout = DecisionLayout(n_new=5, a1=1, p=3, m=1, n_bar=4)
        >>> layout
        DecisionLayout(num_vars=135, num_blocks=15)
        >>> layout.audit()['Z']
        100
        >>> layout.audit()['Z off-diagonal']
        6
    """

    n_new: int
    a1: int
    p: int
    m: int
    n_bar: int
    epsilon: float = 0.1
    delta: float = 1.0
    beta: float = 100.0
    blocks: Dict[str, VariableBlock] = field(default_factory=dict, init=False)
    num_vars: int = field(default=0, init=False)
    z_grid: Dict[Tuple[int, int], str] = field(default_factory=dict, init=False)

    def __post_init__(self):
        self._add("P1", (self.n_new, self.n_new), True)
        self._add("P2", (self.a1, self.a1), True)
        self._add("R1", (self.p, self.n_new))
        self._add("R2", (self.p, self.a1))
        size = self.m * self.n_bar
        for k in range(size):
            for c in range(k, size):
                name = self.z_block_name(k, c)
                self._add(name, (self.n_bar, self.n_bar), True)
                self.z_grid[(k, c)] = self.z_grid[(c, k)] = name
        self._add("mu", (1, 1))

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}(num_vars={self.num_vars}, num_blocks={len(self.blocks)})"

    def __iter__(self) -> Iterator[VariableBlock]:
        yield from self.blocks.values()

    def __getitem__(self, name: str) -> VariableBlock:
        return self.blocks[name]

    def _add(self, name: str, shape: Tuple[int, int], symmetric: bool = False):
        block = VariableBlock(name, shape, symmetric, self.num_vars)
        self.blocks[name] = block
        self.num_vars += block.size

    def z_block_name(self, k: int, c: int) -> str:
        """Returns the name of the Z block at grid position (k, c), k <= c.

        Grid position `k` stands for the pair (i, j) = divmod(k, n_bar), 1-based
        in the name.
        """
        i, j = divmod(k, self.n_bar)
        if k == c:
            return f"Z({i + 1},{j + 1})"
        i2, j2 = divmod(c, self.n_bar)
        return f"Z({i + 1},{j + 1};{i2 + 1},{j2 + 1})"

    def off_diagonal_names(self) -> List[str]:
        size = self.m * self.n_bar
        return [self.z_grid[(k, c)] for k in range(size) for c in range(k + 1, size)]

    def expr(self, name: str) -> AffineMatrixExpr:
        """Returns the unknown `name` as an expression. `Z` is assembled."""
        if name == "Z":
            size = self.m * self.n_bar
            if not size:
                return AffineMatrixExpr.zeros((0, 0), self.num_vars)
            nv = self.num_vars
            grid = [
                [self.blocks[self.z_grid[(k, c)]].expr(nv) for c in range(size)]
                for k in range(size)
            ]
            return bmat(grid, nv)
        return self.blocks[name].expr(self.num_vars)

    def unpack(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        """Returns named matrices of the assignment `x`, with `Z` assembled."""
        values = {name: block.unpack(x) for name, block in self.blocks.items()}
        values["Z"] = self.expr("Z").evaluate(x)
        return values

    def pack(self, values: Dict[str, np.ndarray]) -> np.ndarray:
        """Returns the decision vector of named matrices.

        `Z` may be given assembled, in which case the upper blocks are read.
        """
        x = np.zeros(self.num_vars)
        values = dict(values)
        if "Z" in values:
            Z = np.atleast_2d(values.pop("Z"))
            n_bar = self.n_bar
            for (k, c), name in self.z_grid.items():
                if k <= c:
                    rows = slice(k * n_bar, (k + 1) * n_bar)
                    cols = slice(c * n_bar, (c + 1) * n_bar)
                    values.setdefault(name, Z[rows, cols])
        for name, block in self.blocks.items():
            if name not in values:
                continue
            matrix = np.atleast_2d(np.asarray(values[name], dtype=float))
            if matrix.shape != block.shape:
                message = f"expected {block.shape}, got {matrix.shape}"
                raise DimensionError(name, message)
            if block.symmetric:
                x[block.indices()] = ((matrix + matrix.T) / 2).reshape(-1)
            else:
                x[block.indices()] = matrix.reshape(-1)
        return x

    def audit(self) -> Dict[str, int]:
        """Returns the number of scalar unknowns per group."""
        counts = {"P1": 0, "P2": 0, "R1": 0, "R2": 0, "Z": 0, "mu": 0}
        z_off = 0
        for name, block in self.blocks.items():
            if name.startswith("Z("):
                counts["Z"] += block.size
                z_off += ";" in name
            else:
                counts[name] += block.size
        counts["Z off-diagonal"] = z_off
        counts["total"] = self.num_vars
        return counts

    @property
    def mu_index(self) -> int:
        return self.blocks["mu"].offset
