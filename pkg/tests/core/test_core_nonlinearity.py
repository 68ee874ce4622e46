import numpy as np
import pytest

from fauio.core.nonlinearity import (
    NONLINEARITIES,
    NonlinearityEvaluator,
    get_nonlinearity,
    register,
)


def test_registry():
    for name in ["zero", "sin", "robot-arm", "affine"]:
        assert name in NONLINEARITIES


def test_robot_arm():
    g = get_nonlinearity("robot-arm")
    H = [np.array([[0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]])]
    x = np.array([0.3, 0.0, 0.5, 0.0])
    assert g.evaluate_state(H, x).tolist() == [np.sin(0.5)]


def test_sine_amplitude():
    g = get_nonlinearity("sin", index=0, amplitude=2.0)
    assert np.isclose(g([np.array([np.pi / 2])])[0], 2.0)
    assert g.params == {"index": 0, "amplitude": 2.0}


def test_dotted_path():
    g = get_nonlinearity("fauio.core.nonlinearity.sine", index=0)
    assert isinstance(g, NonlinearityEvaluator)
    assert g.name == "sin"


def test_unknown_dotted_path():
    with pytest.raises(ValueError):
        get_nonlinearity("fauio.core.nonlinearity.missing")


def test_register():
    @register("test-cube")
    def cube():
        return NonlinearityEvaluator("test-cube", lambda args: args[0][:1] ** 3)

    try:
        g = get_nonlinearity("test-cube")
        assert g([np.array([2.0])]).tolist() == [8.0]
    finally:
        del NONLINEARITIES["test-cube"]
