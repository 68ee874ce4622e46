import numpy as np
import pytest

from fauio.core.affine import (
    AffineMatrixExpr,
    DecisionLayout,
    VariableBlock,
    bmat,
    identity,
)
from fauio.core.errors import DimensionError


@pytest.fixture(scope="module")
def layout():
    return DecisionLayout(n_new=3, a1=1, p=2, m=2, n_bar=2)


def random_assignment(layout, seed=0):
    return np.random.default_rng(seed).normal(size=layout.num_vars)


def test_products(layout):
    rng = np.random.default_rng(1)
    x = random_assignment(layout)
    R1 = layout.expr("R1")
    A, B = rng.normal(size=(4, 2)), rng.normal(size=(3, 5))
    value = R1.evaluate(x)
    assert np.allclose((A @ R1 @ B).evaluate(x), A @ value @ B)
    assert np.allclose(R1.T.evaluate(x), value.T)
    assert np.allclose((R1 * 2.0 - value).evaluate(x), value)


def test_invalid_operations(layout):
    P1 = layout.expr("P1")
    with pytest.raises(TypeError):
        P1 @ P1
    with pytest.raises(TypeError):
        P1 * P1
    with pytest.raises(DimensionError):
        P1 + np.zeros((2, 2))
    with pytest.raises(DimensionError):
        P1 + AffineMatrixExpr.zeros((3, 3), 1)


def test_symmetric_unknowns(layout):
    x = random_assignment(layout)
    for name in ["P1", "P2", "Z"]:
        expr = layout.expr(name)
        assert expr.is_symmetric()
        value = expr.evaluate(x)
        assert np.array_equal(value, value.T)
    assert not layout.expr("R1").is_symmetric()


def test_z_structure(layout):
    x = random_assignment(layout)
    Z = layout.expr("Z").evaluate(x)
    assert Z.shape == (8, 8)
    for k in range(4):
        for c in range(4):
            block = Z[2 * k : 2 * k + 2, 2 * c : 2 * c + 2]
            mirror = Z[2 * c : 2 * c + 2, 2 * k : 2 * k + 2]
            assert np.array_equal(block, mirror.T)
            name = layout.z_grid[(k, c)]
            assert np.array_equal(block, layout[name].unpack(x))
    assert layout.z_block_name(1, 2) == "Z(1,2;2,1)"
    assert len(layout.off_diagonal_names()) == 6


def test_pack_unpack_round_trip(layout):
    rng = np.random.default_rng(2)
    values = {}
    for block in layout:
        matrix = rng.normal(size=block.shape)
        if block.symmetric:
            matrix = matrix + matrix.T
        values[block.name] = matrix
    x = layout.pack(values)
    unpacked = layout.unpack(x)
    for name, matrix in values.items():
        assert np.abs(unpacked[name] - matrix).max() <= 1e-14
    assert np.array_equal(layout.pack({"Z": unpacked["Z"]})[-1], 0.0)


def test_pack_wrong_shape(layout):
    with pytest.raises(DimensionError):
        layout.pack({"P1": np.eye(2)})


def test_robot_audit(desc, problem):
    audit = problem.layout.audit()
    assert audit["P1"] == 15
    assert audit["P2"] == 1
    assert audit["R1"] == 15
    assert audit["R2"] == 3
    assert audit["Z"] == 100
    assert audit["mu"] == 1
    assert audit["total"] == 135
    assert problem.layout.mu_index == 134


def test_bmat_errors():
    with pytest.raises(DimensionError):
        bmat([[np.eye(2), None], [None, None]], 1)
    with pytest.raises(DimensionError):
        bmat([[np.eye(2), np.eye(3)]], 1)
    with pytest.raises(DimensionError):
        bmat([[np.eye(2), np.eye(2)], [np.eye(2)]], 1)


def test_bmat_values(layout):
    x = random_assignment(layout)
    P1, R1 = layout.expr("P1"), layout.expr("R1")
    M = bmat([[P1, R1.T], [R1, identity(2, layout.num_vars)]], layout.num_vars)
    value = M.evaluate(x)
    expected = np.block(
        [[P1.evaluate(x), R1.evaluate(x).T], [R1.evaluate(x), np.eye(2)]]
    )
    assert np.array_equal(value, expected)


def test_variable_block():
    block = VariableBlock("S", (3, 3), symmetric=True, offset=2)
    assert block.size == 6
    assert block.indices().reshape(3, 3)[2, 0] == block.indices().reshape(3, 3)[0, 2]
    with pytest.raises(DimensionError):
        VariableBlock("S", (2, 3), symmetric=True)
