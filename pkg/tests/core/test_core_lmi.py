import numpy as np
import pytest

from fauio.core.affine import DecisionLayout
from fauio.core.lmi import (
    Constraint,
    LmiBlocks,
    SynthesisProblem,
    assemble_thm1,
    assemble_thm2,
    build_M_N,
    build_sigma11,
    build_X_H_Phi,
    build_Z,
    positivity_constraints,
)
from fauio.core.polytope import basis


def identity_assignment(layout):
    return layout.pack({"P1": np.eye(layout.n_new), "P2": np.eye(layout.a1)})


def test_sigma11_transcription(desc, L1F, problem):
    L1, _ = L1F
    layout = problem.layout
    x = identity_assignment(layout)
    value = build_sigma11(desc, L1, layout).evaluate(x)
    LA = L1 @ desc.A_zeta
    LE = L1 @ desc.plant.E_f
    expected = np.block([[LA + LA.T, LE], [LE.T, np.zeros((1, 1))]]) + np.eye(6)
    assert np.allclose(value, expected, atol=1e-12)


def test_sigma11_R2_pattern(desc, L1F, problem):
    L1, _ = L1F
    layout = problem.layout
    sigma11 = build_sigma11(desc, L1, layout)
    x = identity_assignment(layout)
    y = x.copy()
    y[layout["R2"].indices()] = [1.0, -2.0, 0.5]
    diff = sigma11.evaluate(y) - sigma11.evaluate(x)
    assert np.abs(diff[:5, :5]).max() == 0.0
    assert np.abs(diff[5]).max() > 0


def test_M_N_random(desc, problem):
    layout = problem.layout
    rng = np.random.default_rng(0)
    R1, R2 = rng.normal(size=(3, 5)), rng.normal(size=(3, 1))
    x = layout.pack({"R1": R1, "R2": R2})
    M, N = build_M_N(desc, layout)
    expected_M = np.vstack([np.zeros((5, 5)), R2.T @ desc.C_bar])
    expected_N = np.vstack([desc.C_bar.T @ R1, np.zeros((1, 5))])
    assert np.allclose(M.evaluate(x), expected_M)
    assert np.allclose(N.evaluate(x), expected_N)


def test_X_rows(desc, L1F, problem, plant):
    L1, _ = L1F
    layout = problem.layout
    x = identity_assignment(layout)
    X, HPhi = build_X_H_Phi(desc, L1, layout, plant.lipschitz_bounds)
    value = X.evaluate(x)
    assert value.shape == (16, 6)
    LG = L1 @ plant.G
    H_1 = np.hstack([plant.H[0] @ desc.T, np.zeros((4, 1))])
    for j in range(4):
        LGH = LG @ basis(1, j + 1, 1, 4)
        expected = np.hstack([LGH.T, np.zeros((4, 1))])
        assert np.allclose(value[4 * j : 4 * j + 4], expected)
        assert np.array_equal(HPhi[4 * j : 4 * j + 4], H_1)


def test_X_wrong_vertex(desc, L1F, problem):
    L1, _ = L1F
    with pytest.raises(ValueError):
        build_X_H_Phi(desc, L1, problem.layout, np.ones((2, 2)))


def test_Z_block_symmetry():
    layout = DecisionLayout(n_new=2, a1=1, p=1, m=2, n_bar=2)
    Z = build_Z(layout)
    assert Z.shape == (8, 8)
    assert Z.is_symmetric()


def test_thm1_sizes(desc, L1F, problem, vertices):
    L1, _ = L1F
    for vertex in vertices:
        expr = assemble_thm1(desc, L1, problem.layout, vertex)
        assert expr.shape == (28, 28)
        assert expr.is_symmetric()


def test_thm2_sizes(disturbed_problem):
    problem = disturbed_problem
    vertex = problem.vertices[3]
    expr = assemble_thm2(problem.desc, problem.L1, problem.F, problem.layout, vertex)
    assert expr.shape == (37, 37)
    assert expr.is_symmetric()
    blocks = problem.blocks()[3]
    assert blocks.partition == [6, 5, 16, 5, 5]


def test_thm2_needs_F(disturbed_problem):
    problem = disturbed_problem
    with pytest.raises(ValueError):
        vertex = problem.vertices[0]
        assemble_thm2(problem.desc, problem.L1, None, problem.layout, vertex)


def test_bad_scalars(desc, L1F, vertices):
    L1, F = L1F
    with pytest.raises(ValueError):
        SynthesisProblem(desc, L1, F, vertices, 1, epsilon=0.0)
    with pytest.raises(ValueError):
        SynthesisProblem(desc, L1, F, vertices, 2, delta=-1.0)
    with pytest.raises(ValueError):
        SynthesisProblem(desc, L1, F, vertices, 3)


def test_problem(problem):
    assert len(problem.blocks()) == 16
    constraints = problem.constraints()
    names = [constraint.name for constraint in constraints]
    assert names[0] == "vertex 0"
    assert names[16:19] == ["P1 > 0", "P2 > 0", "Z > 0"]
    assert names[-1] == "mu >= 0"
    assert len(constraints) == 16 + 3 + 6 + 1
    other = problem.with_scalars(1.0)
    assert other.layout.epsilon == 1.0
    assert problem.layout.epsilon == 0.1
    assert repr(problem).startswith("SynthesisProblem(theorem=1, epsilon=0.1")


def test_blocks_repr(problem):
    blocks = LmiBlocks(1, problem.layout, problem.vertices[2], problem.L1)
    blocks.build(problem.desc)
    assert repr(blocks) == "LmiBlocks(theorem=1, vertex=0, size=28)"


def test_positivity_constraints():
    layout = DecisionLayout(n_new=2, a1=1, p=1, m=1, n_bar=2)
    constraints = positivity_constraints(layout, margin=0.5)
    x = layout.pack({"P1": np.eye(2), "P2": np.eye(1), "Z": np.eye(4)})
    by_name = {constraint.name: constraint for constraint in constraints}
    assert by_name["P1 > 0"].violation(x) == -0.5
    assert by_name["mu >= 0"].violation(x) == 0.0


def test_constraint_sense():
    layout = DecisionLayout(n_new=1, a1=1, p=1, m=0, n_bar=0)
    with pytest.raises(ValueError):
        Constraint("x", layout.expr("mu"), "lower")
