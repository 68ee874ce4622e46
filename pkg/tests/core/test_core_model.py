import numpy as np
import pytest

from fauio.core.errors import DimensionError
from fauio.core.model import (
    PlantModel,
    augment_descriptor,
    check_existence_conditions,
    validate_assumptions,
)


def test_robot_dimensions(plant):
    assert (plant.n, plant.s, plant.p, plant.m, plant.n_bar) == (4, 1, 3, 1, 4)
    assert (plant.a1, plant.a2, plant.q) == (1, 1, 0)
    assert plant.E_1.shape == (4, 0)


def test_disturbed_dimensions(disturbed_config):
    plant = disturbed_config.plant
    assert (plant.q1, plant.q2, plant.q) == (1, 1, 2)
    desc = augment_descriptor(plant)
    assert desc.E.shape == (4, 2)
    assert desc.D.shape == (3, 2)
    assert np.array_equal(desc.E[:, 1], np.zeros(4))
    assert np.array_equal(desc.D[:, 0], np.zeros(3))
    assert np.array_equal(desc.D[:, 1], plant.D_1[:, 0])


def test_wrong_rows():
    with pytest.raises(DimensionError) as e:
        PlantModel(A=np.eye(2), B=[[1.0], [0.0], [0.0]], C=[[1.0, 0.0]])
    assert e.value.field == "B"


def test_non_square_A():
    with pytest.raises(DimensionError):
        PlantModel(A=[[1.0, 0.0]])


def test_wrong_H():
    with pytest.raises(DimensionError) as e:
        PlantModel(A=np.eye(2), G=[[1.0], [0.0]], H=[], C=[[1.0, 0.0]])
    assert e.value.field == "H"


def test_negative_bounds():
    with pytest.raises(DimensionError):
        PlantModel(
            A=np.eye(2),
            G=[[1.0], [0.0]],
            H=[np.eye(2)],
            lipschitz_bounds=[[1.0, -1.0]],
            C=[[1.0, 0.0]],
        )


@pytest.mark.parametrize("bounds", [[[np.nan, 1.0]], [[1.0, np.inf]]])
def test_non_finite_bounds(bounds):
    with pytest.raises(DimensionError) as e:
        PlantModel(
            A=np.eye(2),
            G=[[1.0], [0.0]],
            H=[np.eye(2)],
            lipschitz_bounds=bounds,
            C=[[1.0, 0.0]],
        )
    assert e.value.field == "lipschitz_bounds"
    assert "finite" in e.value.message


def test_descriptor_concatenation():
    rng = np.random.default_rng(0)
    plant = PlantModel(A=rng.normal(size=(2, 2)), C=rng.normal(size=(2, 2)),
                       D_f=rng.normal(size=(2, 1)))
    desc = augment_descriptor(plant)
    assert desc.C_bar.shape == (2, 3)
    for i in range(2):
        for j in range(3):
            expected = plant.C[i, j] if j < 2 else plant.D_f[i, 0]
            assert desc.C_bar[i, j] == expected
    x, fs = rng.normal(size=2), rng.normal(size=1)
    assert np.array_equal(desc.T @ np.concatenate([x, fs]), x)
    assert desc.n_new == 3


def test_robot_assumptions(plant):
    report = validate_assumptions(plant)
    assert report
    assert len(report) == 4


def test_rank_deficient_E_f():
    rng = np.random.default_rng(4)
    u, v = rng.normal(size=(3, 1)), rng.normal(size=(1, 2))
    plant = PlantModel(A=-np.eye(3), E_f=u @ v, C=np.eye(3))
    report = validate_assumptions(plant)
    assert not report
    assert report.failures == ["full column rank E_f"]
    assert report["full column rank E_f"].value == 1


def test_undetectable():
    plant = PlantModel(A=np.diag([1.0, -1.0]), C=[[0.0, 1.0]])
    report = validate_assumptions(plant)
    assert report.failures == ["detectability (A, C)"]


def test_existence_conditions(desc, L1F):
    L1, _ = L1F
    report = check_existence_conditions(desc, L1)
    assert report
    assert report["zero at origin"].value == desc.n_a1
    with pytest.raises(DimensionError):
        check_existence_conditions(desc, L1[:, :2])


def test_g_without_nonlinearity():
    plant = PlantModel(A=np.eye(2), G=[[1.0], [0.0]], H=[np.eye(2)], C=np.eye(2))
    assert plant.g(np.ones(2)).tolist() == [0.0]


def test_matrices(plant):
    names = list(plant.matrices())
    assert names[:8] == ["A", "B", "G", "E_f", "E_1", "C", "D_f", "D_1"]
    assert names[8:] == ["H1", "lipschitz_bounds"]
