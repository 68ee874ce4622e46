"""This module integrates the plant and the observer and measures the result.

The coupled state is `s = [x; eta; fa_hat; w]`, where `w` is the state of the
derivative filter `w' = (y_tilde - w) / tau`. The filter output
`(y_tilde - w) / tau` stands in for `y_tilde'` in the adaptive law.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.linalg

from fauio.core import linalg, signal
from fauio.core.errors import DimensionError, DivergenceError
from fauio.core.model import DescriptorModel, PlantModel, augment_descriptor
from fauio.core.scenario import ScenarioConfig
from fauio.core.sdp import SdpSolution
from fauio.core.synth import ObserverGains

logger = logging.getLogger("fauio")

NOT_SETTLED = math.inf

SELECTORS = ("fa", "fs", "e", "zeta")


@dataclass(eq=False)
class Trajectory:
    """Trajectory class holds every series of one run on a common grid.

    All series are arrays with one row per grid point.
    """

    name: str
    t: np.ndarray
    x: np.ndarray
    eta: np.ndarray
    fa_hat: np.ndarray
    w: np.ndarray
    u: np.ndarray
    fa: np.ndarray
    fs: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    fa_dot: np.ndarray
    F: np.ndarray = field(repr=False)
    desc: DescriptorModel = field(repr=False)
    y: np.ndarray = field(init=False)
    zeta: np.ndarray = field(init=False)
    zeta_hat: np.ndarray = field(init=False)
    fs_hat: np.ndarray = field(init=False)
    y_tilde: np.ndarray = field(init=False)

    def __post_init__(self):
        plant = self.desc.plant
        omega2 = self.omega[:, plant.q1 :]
        self.y = self.x @ plant.C.T + self.fs @ plant.D_f.T + omega2 @ plant.D_1.T
        self.zeta = np.hstack([self.x, self.fs])
        self.zeta_hat = self.eta + self.y @ self.F.T
        self.fs_hat = self.zeta_hat[:, plant.n :]
        self.y_tilde = self.y - self.zeta_hat @ self.desc.C_bar.T

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.name!r}, num_steps={len(self.t) - 1})"

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    @property
    def e(self) -> np.ndarray:
        """Returns `[zeta - zeta_hat, fa - fa_hat]`."""
        return np.hstack([self.zeta - self.zeta_hat, self.fa - self.fa_hat])

    @property
    def w_bar(self) -> np.ndarray:
        """Returns `[w; w'; fa']`."""
        return np.hstack([self.omega, self.omega_dot, self.fa_dot])

    def error(self, selector: str) -> np.ndarray:
        """Returns an error series by name: 'fa', 'fs', 'zeta' or 'e'."""
        if selector == "fa":
            return self.fa - self.fa_hat
        if selector == "fs":
            return self.fs - self.fs_hat
        if selector == "zeta":
            return self.zeta - self.zeta_hat
        if selector == "e":
            return self.e
        raise KeyError(f"Unknown selector: {selector!r}")

    def columns(self) -> Dict[str, np.ndarray]:
        """Returns the CSV columns in their documented order."""
        series = [
            ("x", self.x),
            ("zeta_hat", self.zeta_hat),
            ("fa", self.fa),
            ("fa_hat", self.fa_hat),
            ("fs", self.fs),
            ("fs_hat", self.fs_hat),
            ("y_tilde", self.y_tilde),
            ("e", self.e),
        ]
        columns = {"t": self.t}
        for name, values in series:
            for k in range(values.shape[1]):
                columns[f"{name}{k + 1}"] = values[:, k]
        return columns

    def to_csv(self, path: str, header: Sequence[str] = (), stride: int = 1):
        """Writes the trajectory as CSV, one row per `stride` steps.

        Lines of `header` are written first as `#` comments.
        """
        columns = self.columns()
        data = np.column_stack(list(columns.values()))[::stride]
        comments = "".join(f"# {line}\n" for line in header)
        with open(path, "w", newline="\n") as file:
            file.write(comments)
            np.savetxt(
                file,
                data,
                fmt="%.17g",
                delimiter=",",
                header=",".join(columns),
                comments="",
            )


@dataclass(eq=False)
class _System:
    """Coupled linear part, exogenous gain and nonlinear taps of the closed loop."""

    M: np.ndarray
    Bv: np.ndarray
    Gx: np.ndarray
    Geta: np.ndarray
    Hx: np.ndarray
    Ho: np.ndarray
    Hov: np.ndarray
    plant: PlantModel

    def g(self, z: np.ndarray) -> np.ndarray:
        plant = self.plant
        return plant.nonlinearity(list(z.reshape(plant.m, plant.n_bar)))

    def rhs(self, s: np.ndarray, v: np.ndarray) -> np.ndarray:
        ds = self.M @ s + self.Bv @ v
        if self.plant.m and self.plant.nonlinearity is not None:
            ds += self.Gx @ self.g(self.Hx @ s)
            ds += self.Geta @ self.g(self.Ho @ s + self.Hov @ v)
        return ds


def _build_system(
    desc: DescriptorModel, gains: ObserverGains, tau: float
) -> _System:
    plant = desc.plant
    n, n_new, a1, p = plant.n, desc.n_new, plant.a1, plant.p
    s_, a2, q = plant.s, plant.a2, plant.q
    N, J, L1, F, L2, beta = gains.N, gains.J, gains.L1, gains.F, gains.L2, gains.beta
    C_bar = desc.C_bar
    Dy = np.hstack([np.zeros((p, s_ + a1)), plant.D_f, desc.D])
    Q = np.eye(p) - C_bar @ F
    Yx = Q @ plant.C
    Yv = Q @ Dy
    k = 1 + 1 / tau
    zeros = np.zeros
    M = np.block(
        [
            [plant.A, zeros((n, n_new)), zeros((n, a1)), zeros((n, p))],
            [J @ plant.C, N, L1 @ plant.E_f, zeros((n_new, p))],
            [
                beta * k * L2 @ Yx,
                -beta * k * L2 @ C_bar,
                zeros((a1, a1)),
                -beta / tau * L2,
            ],
            [Yx / tau, -C_bar / tau, zeros((p, a1)), -np.eye(p) / tau],
        ]
    )
    Bv = np.vstack(
        [
            np.hstack([plant.B, plant.E_f, zeros((n, a2)), desc.E]),
            J @ Dy + np.hstack([L1 @ plant.B, zeros((n_new, a1 + a2 + q))]),
            beta * k * L2 @ Yv,
            Yv / tau,
        ]
    )
    size = M.shape[0]
    Gx = zeros((size, plant.m))
    Gx[:n] = plant.G
    Geta = zeros((size, plant.m))
    Geta[n : n + n_new] = L1 @ plant.G
    H = np.vstack(plant.H) if plant.m else zeros((0, n))
    Hx = np.hstack([H, zeros((H.shape[0], size - n))])
    HT = H @ desc.T
    Ho = np.hstack([HT @ F @ plant.C, HT, zeros((H.shape[0], a1 + p))])
    Hov = HT @ F @ Dy
    return _System(M, Bv, Gx, Geta, Hx, Ho, Hov, plant)


def _exogenous(
    scenario: ScenarioConfig, plant: PlantModel, t: np.ndarray
) -> np.ndarray:
    """Returns `[u, fa, fs, w]` at the times `t`."""
    return np.hstack(
        [
            signal.evaluate(scenario.input, t, plant.s),
            signal.evaluate(scenario.fault_a, t, plant.a1),
            signal.evaluate(scenario.fault_s, t, plant.a2),
            signal.evaluate(scenario.disturbance, t, plant.q),
        ]
    )


def initial_state(
    plant: PlantModel, gains: ObserverGains, scenario: ScenarioConfig, v0: np.ndarray
) -> np.ndarray:
    """Returns `[x0, eta0, fa_hat0, w0]`.

    Unless given, the observer starts matched: `eta0 = L1 x_hat0 - F D w(0)`,
    and the filter starts at `y_tilde(0)`.
    """
    desc = augment_descriptor(plant)
    n, p = plant.n, plant.p
    x0 = np.asarray(scenario.x0, dtype=float) if len(scenario.x0) else np.zeros(n)
    x_hat0 = np.asarray(scenario.x_hat0, dtype=float) if len(scenario.x_hat0) else x0
    omega0 = v0[plant.s + plant.a1 + plant.a2 :]
    if len(scenario.eta0):
        eta0 = np.asarray(scenario.eta0, dtype=float)
    else:
        eta0 = gains.L1 @ x_hat0 - gains.F @ desc.D @ omega0
    if len(scenario.fa_hat0):
        fa_hat0 = np.asarray(scenario.fa_hat0, dtype=float)
    else:
        fa_hat0 = np.zeros(plant.a1)
    fs0 = v0[plant.s + plant.a1 : plant.s + plant.a1 + plant.a2]
    y0 = plant.C @ x0 + plant.D_f @ fs0 + desc.D @ omega0
    zeta_hat0 = eta0 + gains.F @ y0
    w0 = y0 - desc.C_bar @ zeta_hat0
    if w0.shape != (p,):
        raise DimensionError("w0", f"expected {p} entries")
    return np.concatenate([x0, eta0, fa_hat0, w0])


def integrate(
    plant: PlantModel, gains: ObserverGains, scenario: ScenarioConfig
) -> Trajectory:
    """Integrates plant, observer and adaptive law with fixed-step RK4.

    Raises:
        DivergenceError: At the first step with a non-finite state.
    """
    desc = augment_descriptor(plant)
    gains.check_dimensions(desc)
    scenario.check(plant)
    system = _build_system(desc, gains, scenario.tau)
    t = scenario.time_grid()
    dt = scenario.dt
    v = _exogenous(scenario, plant, t)
    v_mid = _exogenous(scenario, plant, t[:-1] + dt / 2)
    states = np.empty((len(t), system.M.shape[0]))
    s = initial_state(plant, gains, scenario, v[0])
    states[0] = s
    logger.info(f"[fauio] Integrating {scenario.name}: {len(t) - 1} steps, dt={dt}")
    rhs = system.rhs
    for k in range(len(t) - 1):
        k1 = rhs(s, v[k])
        k2 = rhs(s + dt / 2 * k1, v_mid[k])
        k3 = rhs(s + dt / 2 * k2, v_mid[k])
        k4 = rhs(s + dt * k3, v[k + 1])
        s = s + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise DivergenceError(k + 1, float(t[k + 1]))
        states[k + 1] = s
    n, n_new, a1 = plant.n, desc.n_new, plant.a1
    i_eta, i_fa, i_w = n, n + n_new, n + n_new + a1
    s_, a2 = plant.s, plant.a2
    return Trajectory(
        name=scenario.name,
        t=t,
        x=states[:, :i_eta],
        eta=states[:, i_eta:i_fa],
        fa_hat=states[:, i_fa:i_w],
        w=states[:, i_w:],
        u=v[:, :s_],
        fa=v[:, s_ : s_ + a1],
        fs=v[:, s_ + a1 : s_ + a1 + a2],
        omega=v[:, s_ + a1 + a2 :],
        omega_dot=signal.evaluate_derivative(scenario.disturbance, t, plant.q),
        fa_dot=signal.evaluate_derivative(scenario.fault_a, t, a1),
        F=gains.F,
        desc=desc,
    )


def _window_mask(t: np.ndarray, window: Optional[Tuple[float, float]]) -> np.ndarray:
    if window is None:
        return np.ones(len(t), dtype=bool)
    start, stop = window
    tol = signal.EDGE_TOL
    return (t >= start - tol) & (t < stop - tol)


def rmse(
    traj: Trajectory, selector: str, window: Optional[Tuple[float, float]] = None
) -> float:
    """Returns the root mean square of an error series over `[start, stop)`.

    Raises:
        ValueError: If the window holds no grid point.
    """
    mask = _window_mask(traj.t, window)
    if not mask.any():
        raise ValueError(f"empty window {window}")
    values = traj.error(selector)[mask]
    return float(np.sqrt(np.mean(values ** 2)))


def settling_time(
    traj: Trajectory,
    selector: str,
    event_time: float,
    band: float = 0.02,
    next_event: Optional[float] = None,
) -> float:
    """Returns the time after `event_time` at which the error norm enters and
    stays within `band` times its peak until `next_event`.

    Returns zero if the error vanishes on the segment and NOT_SETTLED if the
    error is outside the band at the end of the segment.
    """
    t = traj.t
    k0 = int(np.searchsorted(t, event_time - signal.EDGE_TOL))
    k1 = len(t)
    if next_event is not None:
        k1 = int(np.searchsorted(t, next_event - signal.EDGE_TOL))
    if k0 >= k1:
        raise ValueError(f"empty segment after event {event_time}")
    values = traj.error(selector)[k0:k1]
    norms = np.linalg.norm(values, axis=1)
    peak = norms.max()
    if peak == 0:
        return 0.0
    outside = np.flatnonzero(norms > band * peak)
    last = outside[-1]
    if last == len(norms) - 1:
        return NOT_SETTLED
    return float(t[k0 + last + 1] - t[k0])


def settling_times(
    traj: Trajectory, selector: str, events: Sequence[float], band: float = 0.02
) -> List[float]:
    """Returns the settling time after each event, bounded by the next event."""
    events = sorted(events)
    times = []
    for k, event in enumerate(events):
        following = events[k + 1] if k + 1 < len(events) else None
        times.append(settling_time(traj, selector, event, band, following))
        if times[-1] == NOT_SETTLED:
            logger.warning(f"[fauio] Error '{selector}' did not settle after t={event}")
    return times


@dataclass
class HInfCertificate:
    """HInfCertificate class compares the error energy with its bound.

    `lhs = ||e||` and `rhs = sqrt(nu ||e0||^2 + mu ||w_bar||^2)` over the
    horizon, with `nu = lambda_max(P)`. `w_max` is the largest value of the
    running integral `V(t) - V(0) + int ||e||^2 - mu int ||w_bar||^2`.
    """

    nu: float
    mu: float
    lhs: float
    rhs: float
    w_max: float = 0.0
    energy: float = 0.0

    def __repr__(self):
        class_name = self.__class__.__name__
        bound = f"lhs={self.lhs:.6g}, rhs={self.rhs:.6g}"
        return f"{class_name}({bound}, holds={bool(self)})"

    def __bool__(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-9) + 1e-12


def hinf_check(
    traj: Trajectory, solution: SdpSolution, gains: ObserverGains
) -> HInfCertificate:
    """Returns the energy certificate of a run, using trapezoidal quadrature."""
    P = scipy.linalg.block_diag(solution["P1"], solution["P2"] / gains.beta)
    nu = linalg.max_eigenvalue(P)
    mu = max(float(solution.mu), 0.0)
    e = traj.e
    w_bar = traj.w_bar
    e_sq = np.sum(e ** 2, axis=1)
    w_sq = np.sum(w_bar ** 2, axis=1)
    cum_e = scipy.integrate.cumulative_trapezoid(e_sq, traj.t, initial=0.0)
    cum_w = scipy.integrate.cumulative_trapezoid(w_sq, traj.t, initial=0.0)
    V = np.einsum("ij,jk,ik->i", e, P, e)
    running = V - V[0] + cum_e - mu * cum_w
    energy = float(cum_e[-1])
    lhs = math.sqrt(energy)
    rhs = math.sqrt(nu * float(e[0] @ e[0]) + mu * float(cum_w[-1]))
    certificate = HInfCertificate(nu, mu, lhs, rhs, float(running.max()), energy)
    if not certificate:
        logger.warning(f"[fauio] Energy bound violated: {certificate}")
    return certificate
