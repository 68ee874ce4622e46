import numpy as np
import pytest

from fauio.core.errors import ConfigError, DimensionError
from fauio.core.model import PlantModel
from fauio.core.scenario import (
    REFERENCE_TABLES,
    ScenarioConfig,
    get_scenario,
    parse_scenario,
    scenario_from_dict,
    scenario_presets,
)
from fauio.core.signal import Constant, Scaled


def test_presets():
    presets = scenario_presets()
    assert list(presets) == [
        "robot-5.1",
        "robot-case1",
        "robot-case2",
        "robot-case3",
        "robot-nominal",
    ]
    for name, scenario in presets.items():
        assert scenario.name == name
        assert scenario.horizon == 50.0
        assert scenario.dt == 1e-4
    assert REFERENCE_TABLES["cases"] == ["robot-case1", "robot-case2", "robot-case3"]


def test_preset_signals():
    scenario = get_scenario("robot-5.1")
    fa, fs = scenario.fault_a[0], scenario.fault_s[0]
    assert fa(10.0) == 0
    assert np.isclose(fa(20.0), 3 * np.sin(10.0) + 2 * np.cos(100.0))
    assert np.isclose(fs(20.0), 5.0)
    assert np.isclose(fs(30.0), 0.0)
    assert scenario.events("fault_a") == [15, 30]
    assert scenario.events("fault_s") == [5, 35]
    case1 = get_scenario("robot-case1")
    assert np.isclose(case1.fault_a[0](20.05), 1.005)
    assert len(case1.disturbance) == 2


def test_fresh_presets():
    scenario = get_scenario("robot-case2")
    scenario.fault_a.clear()
    assert len(get_scenario("robot-case2").fault_a) == 1


def test_unknown_preset():
    with pytest.raises(KeyError):
        get_scenario("robot-case9")
    with pytest.raises(ConfigError) as e:
        parse_scenario("robot-case9")
    assert e.value.location == "simulation"


def test_time_grid():
    scenario = ScenarioConfig(horizon=1.0, dt=0.1)
    assert scenario.num_steps == 10
    t = scenario.time_grid()
    assert len(t) == 11
    assert np.isclose(t[-1], 1.0)
    assert np.isclose(scenario.tau, 1.0)
    assert ScenarioConfig(horizon=1.0, dt=0.1, filter_tau=0.5).tau == 0.5


@pytest.mark.parametrize(
    "kwargs, location",
    [
        ({"dt": 0.0}, "dt"),
        ({"horizon": 1e-5}, "horizon"),
        ({"filter_tau": -1.0}, "filter_tau"),
        ({"fault_s": [Constant(1.0, window=(0.5, 2.0))]}, "fault_s[0].window"),
    ],
)
def test_invalid_scenario(kwargs, location):
    with pytest.raises(ConfigError) as e:
        ScenarioConfig(horizon=1.0, **kwargs)
    assert e.value.location == location


def test_check_channels(plant):
    get_scenario("robot-5.1").check(plant)
    scenario = ScenarioConfig(horizon=1.0, fault_a=[Constant(1.0), Constant(1.0)])
    with pytest.raises(DimensionError) as e:
        scenario.check(plant)
    assert e.value.field == "fault_a"
    with pytest.raises(DimensionError):
        get_scenario("robot-case1").check(plant)
    with pytest.raises(DimensionError):
        ScenarioConfig(horizon=1.0, x0=[1.0, 2.0]).check(plant)


def test_check_disturbed(disturbed_config):
    get_scenario("robot-case3").check(disturbed_config.plant)


def test_scaled():
    scenario = get_scenario("robot-case2").scaled(2.0)
    assert all(isinstance(s, Scaled) for s in scenario.disturbance)
    assert np.isclose(scenario.disturbance[0](np.pi / 20), 0.4)
    assert scenario.fault_a == get_scenario("robot-case2").fault_a


def test_from_dict():
    data = {
        "name": "short",
        "horizon": 2.0,
        "dt": 0.001,
        "x0": [0, 0, 0, 0.1],
        "fault_a": [{"type": "constant", "value": 1, "window": [0.5, 2.0]}],
    }
    scenario = scenario_from_dict(data)
    assert scenario.name == "short"
    assert scenario.x0 == [0.0, 0.0, 0.0, 0.1]
    assert scenario.num_steps == 2000
    assert scenario_from_dict(scenario.to_dict()).to_dict() == scenario.to_dict()


def test_from_dict_errors():
    with pytest.raises(ConfigError) as e:
        scenario_from_dict({"horizon": 1.0, "faults": []})
    assert e.value.location == "scenario.faults"
    with pytest.raises(ConfigError):
        scenario_from_dict([1, 2])


def test_preset_overrides():
    scenario = parse_scenario({"preset": "robot-nominal", "horizon": 2.0})
    assert scenario.name == "robot-nominal"
    assert scenario.horizon == 2.0
    scenario = parse_scenario({"preset": "robot-case2", "dt": 1e-3})
    assert scenario.dt == 1e-3
    assert scenario.fault_a[0](15.0) == 2.0
    with pytest.raises(ConfigError):
        parse_scenario({"preset": "robot-5.1", "horizon": 10.0})


def test_repr():
    scenario = ScenarioConfig("demo", horizon=2.0, dt=0.01)
    assert repr(scenario) == "ScenarioConfig('demo', horizon=2.0, dt=0.01)"


def test_minimal_plant_check():
    plant = PlantModel(A=[[-1.0]], C=[[1.0]], E_f=[[1.0]])
    ScenarioConfig(horizon=1.0, fault_a=[Constant(1.0)]).check(plant)
