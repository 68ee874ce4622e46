import os

import pytest

import fauio
from fauio.core.config import load_config
from fauio.core.lmi import SynthesisProblem
from fauio.core.model import augment_descriptor
from fauio.core.polytope import enumerate_vertices
from fauio.core.scenario import ScenarioConfig
from fauio.core.sdp import solve_problem
from fauio.core.signal import Constant, Sinusoid
from fauio.core.sim import integrate
from fauio.core.synth import compute_L1_F, recover_gains

CONFIGS = os.path.join(os.path.dirname(fauio.__file__), "configs")


@pytest.fixture(scope="session")
def config_path():
    return os.path.join(CONFIGS, "robot-arm.yml")


@pytest.fixture(scope="session")
def disturbed_config_path():
    return os.path.join(CONFIGS, "robot-arm-disturbed.yml")


@pytest.fixture(scope="session")
def config(config_path):
    return load_config(config_path)


@pytest.fixture(scope="session")
def disturbed_config(disturbed_config_path):
    return load_config(disturbed_config_path)


@pytest.fixture(scope="session")
def plant(config):
    return config.plant


@pytest.fixture(scope="session")
def desc(plant):
    return augment_descriptor(plant)


@pytest.fixture(scope="session")
def L1F(desc):
    return compute_L1_F(desc)


@pytest.fixture(scope="session")
def vertices(plant):
    return enumerate_vertices(plant.lipschitz_bounds)


@pytest.fixture(scope="session")
def problem(desc, L1F, vertices):
    L1, F = L1F
    return SynthesisProblem(desc, L1, F, vertices, 1, epsilon=0.1, beta=100.0)


@pytest.fixture(scope="session")
def solution(problem, config):
    return solve_problem(problem, config.solver)


@pytest.fixture(scope="session")
def gains(solution, desc, L1F):
    L1, F = L1F
    return recover_gains(solution, desc, L1, F, 100.0)


@pytest.fixture(scope="session")
def disturbed_desc(disturbed_config):
    return augment_descriptor(disturbed_config.plant)


@pytest.fixture(scope="session")
def disturbed_problem(disturbed_desc):
    L1, F = compute_L1_F(disturbed_desc)
    vertices = enumerate_vertices(disturbed_desc.plant.lipschitz_bounds)
    return SynthesisProblem(
        disturbed_desc, L1, F, vertices, 2, epsilon=0.0112, delta=5.0, beta=100.0
    )


@pytest.fixture(scope="session")
def disturbed_solution(disturbed_problem, disturbed_config):
    return solve_problem(disturbed_problem, disturbed_config.solver)


@pytest.fixture(scope="session")
def disturbed_gains(disturbed_solution, disturbed_problem):
    problem = disturbed_problem
    L1, F = problem.L1, problem.F
    return recover_gains(disturbed_solution, problem.desc, L1, F, problem.beta)


@pytest.fixture(scope="session")
def step_trajectory(plant, gains):
    scenario = ScenarioConfig(
        "step",
        horizon=3.0,
        fault_a=[Constant(2.0, window=(0.5, 3.0))],
        fault_s=[Constant(1.0, window=(1.0, 3.0))],
    )
    return integrate(plant, gains, scenario)


@pytest.fixture(scope="session")
def disturbed_trajectory(disturbed_config, disturbed_gains):
    scenario = ScenarioConfig(
        "disturbed",
        horizon=2.0,
        disturbance=[Sinusoid(0.2, 10.0), Sinusoid(0.1, 10.0)],
    )
    return integrate(disturbed_config.plant, disturbed_gains, scenario)
