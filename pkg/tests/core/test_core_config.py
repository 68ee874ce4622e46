import numpy as np
import pytest

from fauio import utils
from fauio.core.config import (
    SynthesisSettings,
    load_config,
    parse_config,
    parse_nonlinearity,
    parse_synthesis,
)
from fauio.core.errors import ConfigError, DimensionError

TINY = """\
schema_version: 1
name: tiny
plant:
  A: [[-1.0, 0.0], [0.0, -2.0]]
  B: [[1.0]]
  C: [[1.0, 0.0]]
"""


def tiny(**sections):
    data = {
        "schema_version": 1,
        "name": "tiny",
        "plant": {"A": [[-1.0, 0.0], [0.0, -2.0]], "C": [[1.0, 0.0]]},
    }
    data.update(sections)
    return data


def test_robot_config(config, config_path):
    assert config.name == "robot-arm"
    plant = config.plant
    assert (plant.n, plant.s, plant.p, plant.m, plant.n_bar) == (4, 1, 3, 1, 4)
    assert (plant.a1, plant.a2, plant.q) == (1, 1, 0)
    assert np.array_equal(plant.E_f, plant.B)
    assert config.synthesis.theorem == 1
    assert config.synthesis.epsilon == 0.1
    assert config.synthesis.beta == 100.0
    assert config.sampling.low == -1.5
    assert config.simulation.name == "robot-5.1"
    assert config.digest == utils.sha256_of_file(config_path)
    assert repr(config).startswith("Config('robot-arm', plant=PlantModel(")


def test_disturbed_config(disturbed_config):
    config = disturbed_config
    assert config.synthesis.theorem == 2
    assert config.synthesis.delta == 5.0
    assert config.synthesis.epsilons == [0.0112, 0.1, 1.0]
    assert config.synthesis.deltas == [5.0]
    assert config.synthesis.has_grid
    assert config.plant.q == 2
    assert config.simulation.name == "robot-case3"


def test_dimension_error_location(tmp_path):
    path = tmp_path / "tiny.yml"
    path.write_text(TINY)
    with pytest.raises(DimensionError) as e:
        load_config(str(path))
    assert e.value.field == f"{path}:5 plant.B"


def test_yaml_syntax_error(tmp_path):
    path = tmp_path / "broken.yml"
    path.write_text("schema_version: 1\nplant: [1, 2\n")
    with pytest.raises(ConfigError) as e:
        load_config(str(path))
    assert e.value.message.startswith("YAML syntax error")
    assert e.value.location.startswith(f"{path}:")


def test_missing_file(tmp_path):
    path = str(tmp_path / "missing.yml")
    with pytest.raises(ConfigError) as e:
        load_config(path)
    assert e.value.location == path


def test_located_config_error(tmp_path):
    path = tmp_path / "tiny.yml"
    path.write_text(TINY.replace("  B: [[1.0]]\n", "") + "synthesis:\n  beta: -1\n")
    with pytest.raises(ConfigError) as e:
        load_config(str(path))
    assert e.value.location == f"{path}:7 synthesis.beta"


def test_parse_config():
    config = parse_config(tiny())
    assert config.path == "<config>"
    assert config.simulation is None
    assert config.digest == utils.sha256_of_object(tiny())
    assert config.synthesis == SynthesisSettings()


@pytest.mark.parametrize(
    "data, location",
    [
        (tiny(solvers={}), "config.solvers"),
        (tiny(schema_version=2), "schema_version"),
        (tiny(solver={"iters": 5}), "solver.iters"),
        (tiny(sampling={"samples": 0}), "sampling"),
        (tiny(synthesis={"theorem": 3}), "synthesis.theorem"),
        (tiny(synthesis={"grid": {"eps": [1]}}), "synthesis.grid.eps"),
        (tiny(simulation="robot-case9"), "simulation"),
        (tiny(simulation={"horizon": 1.0, "faults": []}), "simulation.faults"),
        (
            tiny(simulation={"horizon": 1.0, "fault_a": [{"type": "step"}]}),
            "simulation.fault_a[0].type",
        ),
        ({"schema_version": 1}, "config"),
        ([1, 2], "config"),
    ],
)
def test_config_errors(data, location):
    with pytest.raises(ConfigError) as e:
        parse_config(data)
    assert e.value.location == location


def test_plant_errors():
    data = tiny()
    data["plant"]["E_f"] = "E_1"
    data["plant"]["E_1"] = "E_f"
    with pytest.raises(ConfigError) as e:
        parse_config(data)
    assert e.value.location == "plant.E_1"
    data = tiny()
    data["plant"]["F"] = [[1.0]]
    with pytest.raises(ConfigError) as e:
        parse_config(data)
    assert e.value.location == "plant.F"
    data = tiny()
    data["plant"]["C"] = [[1.0, 0.0, 0.0]]
    with pytest.raises(DimensionError) as e:
        parse_config(data)
    assert e.value.field == "plant.C"


def test_parse_nonlinearity():
    g = parse_nonlinearity({"name": "sin", "index": 0, "amplitude": 2.0})
    assert np.isclose(g([np.array([np.pi / 2])])[0], 2.0)
    with pytest.raises(ConfigError):
        parse_nonlinearity("cube")
    with pytest.raises(ConfigError):
        parse_nonlinearity({"amplitude": 1.0})


def test_parse_synthesis():
    settings = parse_synthesis({"theorem": 2, "delta": 5, "grid": {"epsilon": [1]}})
    assert settings.delta == 5.0
    assert settings.epsilons == [1.0]
    assert settings.deltas == []
    assert settings.to_dict()["grid"] == {"epsilon": [1.0], "delta": []}
    assert parse_synthesis(None) == SynthesisSettings()
