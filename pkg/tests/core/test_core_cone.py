import numpy as np
import pytest

from fauio.core.affine import AffineMatrixExpr
from fauio.core.cone import lower_to_cone, smat, svec, svec_length
from fauio.core.lmi import Constraint


def test_svec_round_trip():
    rng = np.random.default_rng(0)
    for k in [1, 2, 5]:
        matrix = rng.normal(size=(k, k))
        matrix = matrix + matrix.T
        vector = svec(matrix)
        assert len(vector) == svec_length(k)
        assert np.abs(smat(vector) - matrix).max() <= 1e-14


def test_svec_inner_product():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(2, 4, 4))
    a, b = a + a.T, b + b.T
    assert np.isclose(svec(a) @ svec(b), np.trace(a @ b))


def test_smat_length():
    with pytest.raises(ValueError):
        smat(np.zeros(4))


def test_lower_robot_program(problem):
    program = lower_to_cone(problem.constraints(), problem.objective(), problem.layout)
    assert program.num_vars == problem.layout.audit()["total"]
    sizes = [block.size for block in program]
    assert sizes[:16] == [28] * 16
    assert program.check_unknowns() == []
    assert program.c[problem.layout.mu_index] == 1.0
    assert program.c.sum() == 1.0


def test_lower_asymmetric():
    x = AffineMatrixExpr.variable(0, 1)
    expr = AffineMatrixExpr.constant_matrix([[0.0, 1.0], [0.0, 0.0]], 1)
    with pytest.raises(ValueError):
        lower_to_cone([Constraint("bad", expr)], x)


def test_slack_sign():
    x = AffineMatrixExpr.variable(0, 1)
    program = lower_to_cone([Constraint("x <= 1", x - 1.0)], -x)
    block = program.blocks[0]
    assert block.slack(np.array([0.25]))[0, 0] == 0.75


def test_fix_and_text():
    x = AffineMatrixExpr.variable(0, 2)
    program = lower_to_cone([Constraint("x >= 0", x, "psd")], x)
    fixed = program.fix(1, 2.0)
    assert len(fixed.blocks) == 3
    assert len(program.blocks) == 1
    text = fixed.to_text()
    assert text.startswith("program 2 3\nc 1\n0 1\n")
    assert "cone x[1]_>=_2.0 1 1 1" in text
