import numpy as np
import pytest

from fauio.core.errors import DivergenceError
from fauio.core.model import PlantModel, augment_descriptor
from fauio.core.scenario import ScenarioConfig
from fauio.core.signal import Constant
from fauio.core.sim import (
    NOT_SETTLED,
    Trajectory,
    hinf_check,
    initial_state,
    integrate,
    rmse,
    settling_time,
    settling_times,
)
from fauio.core.synth import ObserverGains


@pytest.fixture(scope="module")
def scalar_plant():
    return PlantModel(A=[[-1.0]], C=[[1.0]])


def scalar_gains(K: float) -> ObserverGains:
    # L1 = F = 1/2 solve L1 T + F C_bar = 1 for T = C_bar = 1.
    L1, F = np.array([[0.5]]), np.array([[0.5]])
    N = L1 @ [[-1.0]] - K * np.eye(1)
    J = N @ F + K * np.eye(1)
    return ObserverGains(N, J, L1, F, K * np.eye(1), np.zeros((0, 1)), 100.0)


def scalar_error(plant, dt, horizon=2.0):
    scenario = ScenarioConfig("scalar", horizon=horizon, dt=dt, x0=[1.0], x_hat0=[0.0])
    traj = integrate(plant, scalar_gains(1.0), scenario)
    return traj.t, traj.e[:, 0]


def test_scalar_error_decay(scalar_plant):
    t, e = scalar_error(scalar_plant, 1e-3)
    assert np.abs(e - 0.5 * np.exp(-1.5 * t)).max() <= 1e-8


def test_rk4_order(scalar_plant):
    errors = []
    for dt in [0.1, 0.05]:
        t, e = scalar_error(scalar_plant, dt)
        errors.append(np.abs(e - 0.5 * np.exp(-1.5 * t)).max())
    assert errors[0] / errors[1] >= 8


def test_initial_state(plant, gains):
    scenario = ScenarioConfig(horizon=1.0, x0=[0.1, 0.0, 0.2, 0.0])
    v0 = np.zeros(plant.s + plant.a1 + plant.a2 + plant.q)
    s = initial_state(plant, gains, scenario, v0)
    assert s.shape == (4 + 5 + 1 + 3,)
    assert np.allclose(s[4:9], gains.L1 @ s[:4])
    assert np.abs(s[10:]).max() <= 1e-12


def test_zero_fault_run(plant, gains):
    scenario = ScenarioConfig("quiet", horizon=0.1, x0=[0.1, 0.0, 0.2, 0.0])
    traj = integrate(plant, gains, scenario)
    assert len(traj) == 1001
    assert np.abs(traj.e).max() <= 1e-9
    assert np.abs(traj.x).max() > 0


def test_step_estimates(step_trajectory):
    traj = step_trajectory
    assert np.abs(traj.error("fa")[traj.t < 0.5]).max() <= 1e-9
    assert rmse(traj, "fa", (2.5, 3.0)) <= 0.1
    assert rmse(traj, "fs", (2.5, 3.0)) <= 0.1
    assert np.isclose(traj.fa_hat[-1, 0], 2.0, atol=0.1)


def test_sensor_fault_shape_independent(plant, gains):
    def run(level):
        fs = [Constant(level, window=(0.1, 0.3))]
        fa = [Constant(1.0, window=(0.05, 0.3))]
        scenario = ScenarioConfig("shape", horizon=0.3, fault_a=fa, fault_s=fs)
        return integrate(plant, gains, scenario)

    first, second = run(1.0), run(-3.0)
    assert np.abs(first.e - second.e).max() <= 1e-9
    assert not np.allclose(first.fs_hat, second.fs_hat)


def test_divergence(scalar_plant):
    scenario = ScenarioConfig("unstable", horizon=10.0, dt=0.1, x0=[1.0], x_hat0=[0.0])
    with np.errstate(all="ignore"):
        with pytest.raises(DivergenceError) as e:
            integrate(scalar_plant, scalar_gains(-1000.0), scenario)
    assert e.value.step > 0


def test_dimension_check(scalar_plant, gains):
    with pytest.raises(ValueError):
        integrate(scalar_plant, gains, ScenarioConfig(horizon=1.0, dt=0.1))


def synthetic(error: np.ndarray, t: np.ndarray) -> Trajectory:
    plant = PlantModel(A=[[-1.0]], C=[[1.0]], E_f=[[1.0]])
    size = len(t)
    zeros = np.zeros((size, 1))
    empty = np.zeros((size, 0))
    return Trajectory(
        name="synthetic",
        t=t,
        x=zeros,
        eta=zeros,
        fa_hat=zeros,
        w=zeros,
        u=empty,
        fa=error.reshape(-1, 1),
        fs=empty,
        omega=empty,
        omega_dot=empty,
        fa_dot=zeros,
        F=np.array([[0.5]]),
        desc=augment_descriptor(plant),
    )


def test_rmse():
    t = np.linspace(0, 1, 101)
    assert np.isclose(rmse(synthetic(np.full(101, 0.5), t), "fa"), 0.5)
    t = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    traj = synthetic(np.sin(t), t)
    assert np.isclose(rmse(traj, "fa"), np.sqrt(2) / 2, rtol=1e-12)
    with pytest.raises(ValueError):
        rmse(traj, "fa", (7.0, 8.0))


def test_rmse_window():
    t = np.linspace(0, 2, 201)
    traj = synthetic(np.where(t < 1, 0.0, 3.0), t)
    assert rmse(traj, "fa", (0.0, 1.0)) == 0
    assert np.isclose(rmse(traj, "fa", (1.0, 2.0)), 3.0)


def test_settling_time():
    t = np.arange(10001) * 1e-3
    traj = synthetic(np.exp(-t), t)
    assert abs(settling_time(traj, "fa", 0.0) - np.log(50)) <= 2e-3
    assert abs(settling_time(traj, "fa", 1.0) - np.log(50)) <= 2e-3
    assert settling_time(traj, "fa", 0.0, next_event=2.0) == NOT_SETTLED
    assert abs(settling_time(traj, "fa", 0.0, band=0.1) - np.log(10)) <= 2e-3
    times = settling_times(traj, "fa", [5.0, 0.0])
    assert len(times) == 2
    assert all(abs(time - np.log(50)) <= 2e-3 for time in times)


def test_settling_edge_cases():
    t = np.linspace(0, 1, 101)
    assert settling_time(synthetic(np.zeros(101), t), "fa", 0.0) == 0
    assert settling_time(synthetic(np.ones(101), t), "fa", 0.0) == NOT_SETTLED
    with pytest.raises(ValueError):
        settling_time(synthetic(np.ones(101), t), "fa", 0.5, next_event=0.5)


def test_trajectory_series():
    t = np.linspace(0, 1, 11)
    traj = synthetic(np.ones(11), t)
    assert repr(traj) == "Trajectory('synthetic', num_steps=10)"
    assert np.isclose(traj.dt, 0.1)
    assert traj.e.shape == (11, 2)
    assert traj.w_bar.shape == (11, 1)
    assert traj.fs_hat.shape == (11, 0)
    with pytest.raises(KeyError):
        traj.error("x")
    names = list(traj.columns())
    assert names == ["t", "x1", "zeta_hat1", "fa1", "fa_hat1", "y_tilde1", "e1", "e2"]


def test_to_csv(tmp_path):
    t = np.linspace(0, 1, 11)
    path = tmp_path / "run.csv"
    synthetic(np.ones(11), t).to_csv(str(path), ["config abc"], stride=3)
    lines = path.read_text().splitlines()
    assert lines[0] == "# config abc"
    assert lines[1].startswith("t,x1,zeta_hat1,")
    assert len(lines) == 2 + 4
    times = [float(line.split(",")[0]) for line in lines[2:]]
    assert np.allclose(times, [0.0, 0.3, 0.6, 0.9])


def test_hinf_disturbed(disturbed_trajectory, disturbed_solution, disturbed_gains):
    certificate = hinf_check(disturbed_trajectory, disturbed_solution, disturbed_gains)
    assert certificate
    assert certificate.nu > 0
    assert certificate.lhs <= certificate.rhs
    assert certificate.energy >= 0


def test_disturbed_run(disturbed_trajectory):
    traj = disturbed_trajectory
    assert traj.omega.shape == (len(traj), 2)
    assert np.allclose(traj.omega_dot[:, 0], 2.0 * np.cos(10.0 * traj.t))
    assert np.all(np.isfinite(traj.e))

