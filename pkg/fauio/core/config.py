"""This module loads the YAML configuration of a run.

A configuration file holds one plant and the settings of every pipeline
stage:

    schema_version: 1
    name: robot-arm
    plant: {A: ..., B: ..., nonlinearity: {name: robot-arm}, ...}
    synthesis: {theorem: 1, epsilon: 0.1, beta: 100}
    solver: {max_iters: 500}
    sampling: {low: -1.5, high: 1.5}
    simulation: robot-5.1

Matrices are nested row-major lists. A matrix entry may also name another
plant matrix, as in `E_f: B`.

The disturbance vector is `w = [w_1; w_2]`. Process disturbances enter the
state through `E = [E_1 0]` and measurement disturbances enter the output
through `D = [0 D_1]`, so `E_1` and `D_1` are given separately and the
zero blocks are implied.
"""
import logging
import re
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Union

import yaml

from fauio import utils
from fauio.core.errors import ConfigError, DimensionError
from fauio.core.model import PlantModel
from fauio.core.nonlinearity import get_nonlinearity
from fauio.core.polytope import SamplingPlan
from fauio.core.scenario import ScenarioConfig, parse_scenario
from fauio.core.sdp import SolverSettings

logger = logging.getLogger("fauio")

SCHEMA_VERSION = 1

SECTIONS = [
    "schema_version",
    "name",
    "plant",
    "synthesis",
    "solver",
    "sampling",
    "simulation",
]

PLANT_MATRICES = ["A", "B", "G", "E_f", "E_1", "C", "D_f", "D_1"]
PLANT_FIELDS = PLANT_MATRICES + ["H", "lipschitz_bounds", "nonlinearity", "name"]

Path = List[Union[str, int]]


@dataclass
class SynthesisSettings:
    """SynthesisSettings class holds the fixed scalars of the LMI design.

    Args:
        theorem: 1 for the fault-only design, 2 for the disturbance design.
        epsilon: Young scalar of the gain cross term.
        delta: Young scalar of the disturbance cross term. Required by theorem 2.
        beta: Learning rate of the adaptive law.
        epsilons: Epsilon grid of a scalar search.
        deltas: Delta grid of a scalar search.

    Examples:
        >>> SynthesisSettings(theorem=2, delta=5.0)
        SynthesisSettings(theorem=2, epsilon=0.1, delta=5.0, beta=100.0)
        >>> SynthesisSettings(theorem=3)
        Traceback (most recent call last):
        ...
        fauio.core.errors.ConfigError: synthesis.theorem: must be 1 or 2, got 3
    """

    theorem: int = 1
    epsilon: float = 0.1
    delta: Optional[float] = None
    beta: float = 100.0
    epsilons: List[float] = field(default_factory=list)
    deltas: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.theorem not in (1, 2):
            message = f"must be 1 or 2, got {self.theorem}"
            raise ConfigError("synthesis.theorem", message)
        for name in ["epsilon", "beta", "delta"]:
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"synthesis.{name}", f"must be positive, got {value}")
        for name in ["epsilons", "deltas"]:
            if any(not value > 0 for value in getattr(self, name)):
                raise ConfigError(f"synthesis.grid.{name[:-1]}", "must be positive")

    def __repr__(self):
        class_name = self.__class__.__name__
        scalars = f"theorem={self.theorem}, epsilon={self.epsilon}"
        if self.delta is not None:
            scalars += f", delta={self.delta}"
        return f"{class_name}({scalars}, beta={self.beta})"

    @property
    def has_grid(self) -> bool:
        return bool(self.epsilons)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"theorem": self.theorem, "epsilon": self.epsilon}
        data.update(delta=self.delta, beta=self.beta)
        if self.has_grid:
            data["grid"] = {"epsilon": self.epsilons, "delta": self.deltas}
        return data


@dataclass(eq=False)
class Config:
    """Config class holds a loaded configuration.

    Attributes:
        path: Source file, or `<config>` for in-memory data.
        name: Run name.
        plant: Plant model.
        synthesis: LMI design settings.
        solver: Conic solver settings.
        sampling: Sampling plan of the bound audit.
        simulation: Scenario, or None when the file names none.
        digest: SHA-256 of the source text.
    """

    path: str
    name: str
    plant: PlantModel
    synthesis: SynthesisSettings = field(default_factory=SynthesisSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)
    sampling: SamplingPlan = field(default_factory=SamplingPlan)
    simulation: Optional[ScenarioConfig] = None
    digest: str = ""
    data: Dict[str, Any] = field(default_factory=dict, repr=False)

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.name!r}, plant={self.plant!r})"


class _Locator:
    """Maps a field path of a YAML document to its line number."""

    def __init__(self, text: str, path: str):
        self.path = path
        try:
            self.root = yaml.compose(text)
        except yaml.YAMLError:
            self.root = None

    def line(self, keys: Path) -> Optional[int]:
        node = self.root
        if node is None:
            return None
        for key in keys:
            if isinstance(node, yaml.MappingNode):
                for key_node, value_node in node.value:
                    if key_node.value == key:
                        node = value_node
                        break
                else:
                    return node.start_mark.line + 1
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int):
                if key >= len(node.value):
                    return node.start_mark.line + 1
                node = node.value[key]
            else:
                break
        return node.start_mark.line + 1

    def where(self, dotted: str) -> str:
        line = self.line(split_path(dotted))
        if line is None:
            return f"{self.path} {dotted}"
        return f"{self.path}:{line} {dotted}"


def split_path(dotted: str) -> Path:
    """Returns the keys of a dotted field path.

    Examples:
        >>> split_path('plant.H[0]')
        ['plant', 'H', 0]
        >>> split_path('simulation.fault_a[1].window')
        ['simulation', 'fault_a', 1, 'window']
    """
    keys: Path = []
    for part in dotted.split("."):
        match = re.match(r"^([^\[]*)((?:\[\d+\])*)$", part)
        if not match:
            keys.append(part)
            continue
        if match.group(1):
            keys.append(match.group(1))
        keys.extend(int(index) for index in re.findall(r"\[(\d+)\]", match.group(2)))
    return keys


def _check_keys(data: Any, allowed: List[str], location: str):
    if not isinstance(data, dict):
        raise ConfigError(location, "expected a mapping")
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{location}.{key}", "unknown field")


def _matrix(data: Dict[str, Any], name: str, seen: List[str]) -> Any:
    value = data.get(name)
    if isinstance(value, str):
        if value not in PLANT_MATRICES or value in seen:
            raise ConfigError(f"plant.{name}", f"cannot refer to {value!r}")
        return _matrix(data, value, seen + [name])
    return value


def parse_plant(data: Dict[str, Any], name: str = "plant") -> PlantModel:
    """Returns a PlantModel from its configuration mapping.

    Examples:
        >>> plant = parse_plant({'A': [[-1, 0], [0, -2]], 'B': [[1], [0]],
        ...     'E_f': 'B', 'C': [[1, 0], [0, 1]]})
        >>> plant
        PlantModel('plant', n=2, p=2, m=0, a1=1, a2=0, q=0)
        >>> plant.E_f.tolist()
        [[1.0], [0.0]]
    """
    _check_keys(data, PLANT_FIELDS, "plant")
    kwargs: Dict[str, Any] = {"name": data.get("name", name)}
    kwargs["A"] = utils.require(data, "A", "plant")
    for key in PLANT_MATRICES[1:]:
        if key in data:
            kwargs[key] = _matrix(data, key, [])
    if "H" in data:
        if not isinstance(data["H"], list):
            raise ConfigError("plant.H", "expected a list of matrices")
        kwargs["H"] = data["H"]
    if "lipschitz_bounds" in data:
        kwargs["lipschitz_bounds"] = data["lipschitz_bounds"]
    if "nonlinearity" in data:
        kwargs["nonlinearity"] = parse_nonlinearity(data["nonlinearity"])
    try:
        return PlantModel(**kwargs)
    except DimensionError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError("plant", str(e))


def parse_nonlinearity(data: Any):
    """Returns an evaluator from a name or a `{name: ..., **params}` mapping."""
    if isinstance(data, str):
        data = {"name": data}
    if not isinstance(data, dict) or "name" not in data:
        raise ConfigError("plant.nonlinearity", "expected a name or {name: ...}")
    params = {key: value for key, value in data.items() if key != "name"}
    try:
        return get_nonlinearity(data["name"], **params)
    except (TypeError, ValueError) as e:
        raise ConfigError("plant.nonlinearity", str(e))


def parse_synthesis(data: Optional[Dict[str, Any]]) -> SynthesisSettings:
    if data is None:
        return SynthesisSettings()
    _check_keys(data, ["theorem", "epsilon", "delta", "beta", "grid"], "synthesis")
    kwargs: Dict[str, Any] = {}
    if "theorem" in data:
        kwargs["theorem"] = int(data["theorem"])
    for key in ["epsilon", "delta", "beta"]:
        if data.get(key) is not None:
            kwargs[key] = float(data[key])
    grid = data.get("grid")
    if grid is not None:
        _check_keys(grid, ["epsilon", "delta"], "synthesis.grid")
        kwargs["epsilons"] = [float(x) for x in grid.get("epsilon", [])]
        kwargs["deltas"] = [float(x) for x in grid.get("delta", [])]
    return SynthesisSettings(**kwargs)


def _parse_settings(cls, data: Optional[Dict[str, Any]], location: str):
    if data is None:
        return cls()
    names = [f.name for f in fields(cls)]
    _check_keys(data, names, location)
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(location, str(e))


def parse_config(
    data: Any, path: str = "<config>", text: Optional[str] = None
) -> Config:
    """Returns a Config from a loaded YAML document.

    Args:
        data: Loaded document.
        path: Source name used in diagnostics.
        text: Source text. When given, diagnostics carry line numbers and the
            digest is its hash.

    Raises:
        ConfigError: If a section or field is malformed.
        DimensionError: If plant matrices do not conform.
    """
    locator = _Locator(text, path) if text is not None else None

    def where(dotted: str) -> str:
        return locator.where(dotted) if locator else dotted

    try:
        _check_keys(data, SECTIONS, "config")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(
                "schema_version", f"expected {SCHEMA_VERSION}, got {version!r}"
            )
        name = str(data.get("name", "fauio"))
        plant = parse_plant(utils.require(data, "plant", "config"), name)
        synthesis = parse_synthesis(data.get("synthesis"))
        solver = _parse_settings(SolverSettings, data.get("solver"), "solver")
        sampling = _parse_settings(SamplingPlan, data.get("sampling"), "sampling")
        simulation = None
        if data.get("simulation") is not None:
            simulation = _parse_simulation(data["simulation"])
    except DimensionError as e:
        raise DimensionError(where(f"plant.{e.field}"), e.message) from e
    except ConfigError as e:
        raise ConfigError(where(e.location), e.message) from e
    if text is not None:
        digest = utils.sha256_of_text(text)
    else:
        digest = utils.sha256_of_object(data)
    config = Config(path, name, plant, synthesis, solver, sampling, simulation)
    config.digest = digest
    config.data = data
    logger.debug(f"[fauio] Loaded {config}")
    return config


def _parse_simulation(data: Any) -> ScenarioConfig:
    try:
        return parse_scenario(data, "simulation")
    except ConfigError as e:
        location = e.location
        if location.startswith("scenario"):
            location = "simulation" + location[len("scenario") :]
        elif not location.startswith("simulation"):
            location = f"simulation.{location}"
        raise ConfigError(location, e.message) from e


def load_config(path: str) -> Config:
    """Reads and parses a YAML configuration file.

    Raises:
        ConfigError: For unreadable files, YAML syntax errors and malformed
            fields, located as `file:line field`.
    """
    try:
        with open(path, encoding="utf-8") as file:
            text = file.read()
    except OSError as e:
        raise ConfigError(path, f"cannot read: {e.strerror}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        location = f"{path}:{mark.line + 1}" if mark else path
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(location, f"YAML syntax error: {problem}")
    config = parse_config(data, path, text)
    logger.info(f"[fauio] Config {path} loaded ({config.digest[:12]})")
    return config
