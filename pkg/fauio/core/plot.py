"""This module draws trajectory charts as SVG files."""
import logging
import os
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from fauio.core.sim import Trajectory  # noqa: E402

logger = logging.getLogger("fauio")

# Fixed ids and no date so that identical runs give identical files.
plt.rcParams["svg.hashsalt"] = "fauio"
plt.rcParams["svg.fonttype"] = "none"
plt.rcParams["figure.figsize"] = 8, 4.5
plt.rcParams["axes.grid"] = True

LEGEND_SIZE = 10

MAX_POINTS = 5000

STYLE = {
    "actual": "k-",
    "estimate": "r--",
    "error_a": "b-",
    "error_s": "g-",
}

CHARTS = ["fa", "fs", "errors"]


def _thin(t: np.ndarray, *series: np.ndarray):
    step = max(1, int(np.ceil(len(t) / MAX_POINTS)))
    return (t[::step],) + tuple(values[::step] for values in series)


def _save(fig, path: str) -> str:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"[fauio] Plot written: {path}")
    return path


def plot_fault(traj: Trajectory, kind: str, path: str) -> str:
    """Draws a fault and its estimate, one panel per channel.

    Args:
        traj: Trajectory.
        kind: 'fa' or 'fs'.
        path: Output SVG file.
    """
    actual = getattr(traj, kind)
    estimate = getattr(traj, f"{kind}_hat")
    t, actual, estimate = _thin(traj.t, actual, estimate)
    channels = max(actual.shape[1], 1)
    fig, axes = plt.subplots(channels, 1, sharex=True, squeeze=False)
    for k, ax in enumerate(axes[:, 0]):
        if k < actual.shape[1]:
            ax.plot(t, actual[:, k], STYLE["actual"], label=f"${kind[0]}_{kind[1]}$")
            ax.plot(t, estimate[:, k], STYLE["estimate"], label="estimate")
        ax.set_ylabel(f"{kind}{k + 1}")
        ax.legend(loc="upper right", prop={"size": LEGEND_SIZE})
    axes[-1, 0].set_xlabel("time [s]")
    fig.suptitle(f"{traj.name}: {kind} and its estimate")
    return _save(fig, path)


def plot_errors(traj: Trajectory, path: str) -> str:
    """Draws the actuator and sensor fault estimation errors."""
    t, error_a, error_s = _thin(traj.t, traj.error("fa"), traj.error("fs"))
    fig, axes = plt.subplots(2, 1, sharex=True, squeeze=False)
    for ax, values, label, style in [
        (axes[0, 0], error_a, "fa error", STYLE["error_a"]),
        (axes[1, 0], error_s, "fs error", STYLE["error_s"]),
    ]:
        for k in range(values.shape[1]):
            ax.plot(t, values[:, k], style, label=f"{label} {k + 1}")
        ax.set_ylabel(label)
        if values.shape[1]:
            ax.legend(loc="upper right", prop={"size": LEGEND_SIZE})
    axes[-1, 0].set_xlabel("time [s]")
    fig.suptitle(f"{traj.name}: estimation errors")
    return _save(fig, path)


def plot_trajectory(traj: Trajectory, directory: str, prefix: str = "") -> List[str]:
    """Writes every chart of `traj` into `directory` and returns the paths."""
    prefix = prefix or traj.name
    paths = [
        plot_fault(traj, "fa", os.path.join(directory, f"{prefix}-fa.svg")),
        plot_fault(traj, "fs", os.path.join(directory, f"{prefix}-fs.svg")),
        plot_errors(traj, os.path.join(directory, f"{prefix}-errors.svg")),
    ]
    logger.info(f"[fauio] {len(paths)} plots written to {directory}")
    return paths
