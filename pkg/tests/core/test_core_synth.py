import numpy as np
import pytest

from fauio.core.errors import DimensionError, SynthesisError
from fauio.core.model import PlantModel, augment_descriptor
from fauio.core.sdp import SdpSolution
from fauio.core.synth import (
    ObserverGains,
    certify_design,
    compute_L1_F,
    error_dynamics,
    lyapunov_matrix,
    recover_gains,
    uio_residual,
    young_gap,
)


def test_L1_F(desc, L1F):
    L1, F = L1F
    assert L1.shape == (5, 4)
    assert F.shape == (5, 3)
    assert uio_residual(desc, L1, F) <= 1e-10
    stack = np.vstack([desc.T, desc.C_bar])
    inverse = np.linalg.pinv(stack)
    assert np.allclose(np.hstack([L1, F]), inverse)


def test_L1_F_rank_deficient():
    plant = PlantModel(A=np.eye(2), C=[[1.0, 0.0]], D_f=[[1.0, 1.0]])
    desc = augment_descriptor(plant)
    with pytest.raises(SynthesisError):
        compute_L1_F(desc)


def spd(rng, size):
    matrix = rng.normal(size=(size, size))
    return matrix @ matrix.T + size * np.eye(size)


def test_recover_random(desc, L1F):
    L1, F = L1F
    rng = np.random.default_rng(0)
    P1, P2 = spd(rng, 5), spd(rng, 1)
    R1, R2 = rng.normal(size=(3, 5)), rng.normal(size=(3, 1))
    solution = SdpSolution(
        "optimal", mu=0.0, assignment={"P1": P1, "P2": P2, "R1": R1, "R2": R2}
    )
    gains = recover_gains(solution, desc, L1, F, 10.0)
    assert np.abs(P1 @ gains.K - R1.T).max() <= 1e-10
    assert np.abs(P2 @ gains.L2 - R2.T).max() <= 1e-10
    assert gains.identities(desc)
    assert gains.beta == 10.0


def test_recover_singular(desc, L1F):
    L1, F = L1F
    assignment = {
        "P1": np.diag([1.0, 1.0, 1.0, 1.0, 0.0]),
        "P2": np.eye(1),
        "R1": np.zeros((3, 5)),
        "R2": np.zeros((3, 1)),
    }
    with pytest.raises(SynthesisError):
        recover_gains(SdpSolution("optimal", assignment=assignment), desc, L1, F, 1.0)
    with pytest.raises(SynthesisError):
        recover_gains(SdpSolution("infeasible"), desc, L1, F, 1.0)


def test_gains_identities(desc, gains):
    report = gains.identities(desc)
    assert report
    assert report["L1 T + F C_bar = I"].value <= 1e-8
    gains.check_dimensions(desc)
    assert gains.condition >= 1.0


def test_gains_text(gains):
    text = gains.to_text(["header"])
    assert text.startswith("# header\n[N]\n5 5\n")
    copy = ObserverGains.from_text(text)
    for name, matrix in gains.matrices().items():
        assert np.array_equal(copy.matrices()[name], matrix)


def test_gains_text_missing():
    with pytest.raises(DimensionError):
        ObserverGains.from_text("[N]\n1 1\n0\n")


def test_gains_wrong_plant(gains):
    plant = PlantModel(A=np.eye(2), C=np.eye(2))
    with pytest.raises(DimensionError):
        gains.check_dimensions(augment_descriptor(plant))


def test_error_dynamics(desc, gains):
    dynamics = error_dynamics(gains, desc)
    size = desc.n_a1
    assert dynamics.T_e.shape == (size, size)
    inverse = np.linalg.inv(dynamics.T_e)
    assert np.allclose(dynamics.At_e, inverse @ dynamics.A_e)
    assert dynamics.E_omega.shape == (size, 2 * desc.q + desc.a1)


def test_certify_design(desc, gains, vertices, solution):
    design = certify_design(gains, desc, vertices, solution)
    assert design
    assert len(design.abscissas) == 16
    assert design.max_abscissa < 0
    assert "Hurwitz vertex 15" in design.report
    assert "Lyapunov vertex 0" in design.report


def test_certify_without_solution(desc, gains, vertices):
    design = certify_design(gains, desc, vertices)
    assert design.lyapunov == []
    assert "Lyapunov vertex 0" not in design.report


def test_lyapunov_matrix(solution):
    P = lyapunov_matrix(solution, 100.0)
    assert P.shape == (6, 6)
    assert np.isclose(P[5, 5], solution["P2"][0, 0] / 100.0)


def test_young_gap(problem, solution, gains):
    gap = young_gap(problem.blocks()[0], solution, gains)
    assert np.isfinite(gap)
