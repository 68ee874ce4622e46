"""This module provides simulation scenarios and the preset catalog."""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from fauio.core.errors import ConfigError, DimensionError
from fauio.core.model import PlantModel
from fauio.core.signal import (
    Constant,
    Ramp,
    Scaled,
    Signal,
    Sinusoid,
    Sum,
    parse_signal,
    parse_signals,
)

logger = logging.getLogger("fauio")


@dataclass
class ScenarioConfig:
    """ScenarioConfig class describes one closed-loop simulation.

    Args:
        name: Scenario name.
        horizon: Final time in seconds.
        dt: Step size in seconds.
        x0: Initial plant state. Zero when empty.
        x_hat0: Initial state estimate. Equal to `x0` when empty.
        eta0: Initial observer state. Computed from `x_hat0` when empty.
        fa_hat0: Initial actuator fault estimate. Zero when empty.
        fault_a: One signal per actuator fault channel.
        fault_s: One signal per sensor fault channel.
        disturbance: One signal per disturbance channel, process channels first.
        input: One signal per input channel.
        filter_tau: Time constant of the derivative filter. `10 dt` when None.
    """

    name: str = "scenario"
    horizon: float = 50.0
    dt: float = 1e-4
    x0: List[float] = field(default_factory=list)
    x_hat0: List[float] = field(default_factory=list)
    eta0: List[float] = field(default_factory=list)
    fa_hat0: List[float] = field(default_factory=list)
    fault_a: List[Signal] = field(default_factory=list)
    fault_s: List[Signal] = field(default_factory=list)
    disturbance: List[Signal] = field(default_factory=list)
    input: List[Signal] = field(default_factory=list)
    filter_tau: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt", f"must be positive, got {self.dt}")
        if not self.horizon >= self.dt:
            raise ConfigError("horizon", f"must be at least dt, got {self.horizon}")
        if self.filter_tau is not None and not self.filter_tau > 0:
            raise ConfigError("filter_tau", f"must be positive, got {self.filter_tau}")
        for name in ["fault_a", "fault_s", "disturbance", "input"]:
            for k, signal in enumerate(getattr(self, name)):
                for edge in signal.edges():
                    if not 0 <= edge <= self.horizon:
                        raise ConfigError(
                            f"{name}[{k}].window",
                            f"edge {edge} outside [0, {self.horizon}]",
                        )

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.name!r}, horizon={self.horizon}, dt={self.dt})"

    @property
    def tau(self) -> float:
        return 10 * self.dt if self.filter_tau is None else self.filter_tau

    @property
    def num_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def time_grid(self) -> np.ndarray:
        return np.arange(self.num_steps + 1) * self.dt

    def check(self, plant: PlantModel):
        """Raises DimensionError if channel counts do not fit `plant`."""
        sizes = {
            "fault_a": plant.a1,
            "fault_s": plant.a2,
            "disturbance": plant.q,
            "input": plant.s,
        }
        for name, size in sizes.items():
            count = len(getattr(self, name))
            if count > size:
                message = f"{count} channel(s) for {size} in the plant"
                raise DimensionError(name, message)
        vectors = {"x0": plant.n, "x_hat0": plant.n, "eta0": plant.n + plant.a2}
        vectors["fa_hat0"] = plant.a1
        for name, size in vectors.items():
            value = getattr(self, name)
            if len(value) and len(value) != size:
                raise DimensionError(name, f"expected {size} entries, got {len(value)}")

    def events(self, kind: str = "fault_a") -> List[float]:
        """Returns the sorted window edges of a channel group inside the horizon."""
        edges = set()
        for signal in getattr(self, kind):
            edges.update(edge for edge in signal.edges() if 0 < edge < self.horizon)
        return sorted(edges)

    def scaled(self, factor: float, kind: str = "disturbance") -> "ScenarioConfig":
        """Returns a copy with the signals of `kind` multiplied by `factor`."""
        signals = [Scaled(factor, signal) for signal in getattr(self, kind)]
        return replace(self, **{kind: signals})

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name}
        data.update(horizon=self.horizon, dt=self.dt)
        for name in ["x0", "x_hat0", "eta0", "fa_hat0"]:
            if len(getattr(self, name)):
                data[name] = [float(x) for x in getattr(self, name)]
        for name in ["fault_a", "fault_s", "disturbance", "input"]:
            data[name] = [signal.to_dict() for signal in getattr(self, name)]
        if self.filter_tau is not None:
            data["filter_tau"] = self.filter_tau
        return data


SCENARIO_FIELDS = [
    "name",
    "horizon",
    "dt",
    "x0",
    "x_hat0",
    "eta0",
    "fa_hat0",
    "fault_a",
    "fault_s",
    "disturbance",
    "input",
    "filter_tau",
]


def scenario_from_dict(data: Dict[str, Any], name: str = "scenario") -> ScenarioConfig:
    """Returns a scenario from its configuration mapping.

    Examples:
        >>> scenario = scenario_from_dict({'horizon': 1.0, 'dt': 0.01,
        ...     'fault_a': [{'type': 'constant', 'value': 2, 'window': [0.5, 1.0]}]})
        >>> scenario
        ScenarioConfig('scenario', horizon=1.0, dt=0.01)
        >>> scenario.events()
        [0.5]
    """
    if not isinstance(data, dict):
        raise ConfigError("scenario", "expected a mapping")
    unknown = [key for key in data if key not in SCENARIO_FIELDS]
    if unknown:
        raise ConfigError(f"scenario.{unknown[0]}", "unknown field")
    kwargs: Dict[str, Any] = {"name": data.get("name", name)}
    for key in ["horizon", "dt", "filter_tau"]:
        if key in data:
            kwargs[key] = float(data[key])
    for key in ["x0", "x_hat0", "eta0", "fa_hat0"]:
        if key in data:
            kwargs[key] = [float(x) for x in data[key]]
    for key in ["fault_a", "fault_s", "disturbance", "input"]:
        if key in data:
            kwargs[key] = parse_signals(data[key], f"scenario.{key}")
    return ScenarioConfig(**kwargs)


def _robot_5_1() -> ScenarioConfig:
    fa = Sum([Sinusoid(3.0, 0.5), Sinusoid(2.0, 5.0, function="cos")], window=(15, 30))
    fs = Ramp(-0.5, t0=20.0, offset=5.0, window=(5, 35))
    return ScenarioConfig("robot-5.1", fault_a=[fa], fault_s=[fs])


def _robot_disturbance() -> List[Signal]:
    return [Sinusoid(0.2, 10.0), Sinusoid(0.1, 10.0)]


def _robot_case1() -> ScenarioConfig:
    fa = Ramp(0.1, t0=10.0, window=(20, 20.1))
    fs = Ramp(0.1, t0=10.0, window=(30, 30.1))
    disturbance = _robot_disturbance()
    return ScenarioConfig(
        "robot-case1", fault_a=[fa], fault_s=[fs], disturbance=disturbance
    )


def _robot_case2() -> ScenarioConfig:
    fa = Constant(2.0, window=(10, 20))
    fs = Constant(2.0, window=(30, 35))
    disturbance = _robot_disturbance()
    return ScenarioConfig(
        "robot-case2", fault_a=[fa], fault_s=[fs], disturbance=disturbance
    )


def _robot_case3() -> ScenarioConfig:
    def wave(window):
        terms = [Sinusoid(1.0, 0.5), Sinusoid(0.2, 5.0, function="cos")]
        return Sum(terms, window=window)

    disturbance = _robot_disturbance()
    return ScenarioConfig(
        "robot-case3",
        fault_a=[wave((15, 40))],
        fault_s=[wave((15, 35))],
        disturbance=disturbance,
    )


def _robot_nominal() -> ScenarioConfig:
    return ScenarioConfig("robot-nominal")


PRESETS: Dict[str, Callable[[], ScenarioConfig]] = {
    "robot-5.1": _robot_5_1,
    "robot-case1": _robot_case1,
    "robot-case2": _robot_case2,
    "robot-case3": _robot_case3,
    "robot-nominal": _robot_nominal,
}


def scenario_presets() -> Dict[str, ScenarioConfig]:
    """Returns the catalog of preset scenarios, keyed by name."""
    return {name: factory() for name, factory in PRESETS.items()}


def get_scenario(name: str) -> ScenarioConfig:
    """Returns a fresh preset scenario.

    Examples:
        >>> get_scenario('robot-case2').fault_a[0]
        Constant(2.0, window=(10, 20))
        >>> get_scenario('robot-case9')
        Traceback (most recent call last):
        ...
        KeyError: "Unknown preset: 'robot-case9'"
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown preset: {name!r}")
    return PRESETS[name]()


def parse_scenario(data: Any, location: str = "simulation") -> ScenarioConfig:
    """Returns a preset (a string or `{preset: name, ...overrides}`) or an inline
    scenario."""
    if isinstance(data, str):
        try:
            return get_scenario(data)
        except KeyError as e:
            raise ConfigError(location, str(e.args[0]))
    if isinstance(data, dict) and "preset" in data:
        data = dict(data)
        preset = parse_scenario(data.pop("preset"), location)
        merged = preset.to_dict()
        merged.update(data)
        return scenario_from_dict(merged, preset.name)
    return scenario_from_dict(data)


REFERENCE_TABLES: Dict[str, Any] = {
    "sqrt_mu": {
        "fault only": 2.5399e-4,
        "with disturbance": 0.0324,
        "comparison A": 1.736,
        "comparison B": 1.76,
    },
    "rmse_fa": {
        "reference": [0.0076, 0.0340, 0.0189],
        "comparison A": [0.02, 0.0596, 0.04],
        "comparison B": [0.196, 0.116, 0.121],
    },
    "rmse_fs": {
        "reference": [0.0078, 0.0295, 0.0120],
        "comparison A": [0.018, 0.0315, 0.05],
        "comparison B": [0.110, 0.105, 0.102],
    },
    "settling_fa": {
        "reference": [0.00015, 0.00013, 0.00011],
        "comparison A": [0.099, 0.2396, 0.21],
        "comparison B": [2.791, 2.04, 0.9],
    },
    "cases": ["robot-case1", "robot-case2", "robot-case3"],
}
"""Reference comparison rows. Lists follow the order of `cases`."""
