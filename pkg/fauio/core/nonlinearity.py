"""This module provides the registry of Lipschitz nonlinearities.

A nonlinearity maps the list of arguments `[H_1 x, ..., H_m x]` to a vector
`g` of length `m`, where the i-th entry depends on the i-th argument only.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from fauio import utils

Func = Callable[[Sequence[np.ndarray]], np.ndarray]

NONLINEARITIES: Dict[str, Callable[..., "NonlinearityEvaluator"]] = {}


@dataclass(frozen=True)
class NonlinearityEvaluator:
    """NonlinearityEvaluator class wraps a function of `m` argument vectors.

    Args:
        name: Registry name.
        func: Function of a sequence of 1-D arrays returning an `m`-vector.
        params: Parameters the evaluator was created with.

    Examples:
        >>> g = get_nonlinearity('sin', index=1)
        >>> g
        NonlinearityEvaluator('sin', index=1)
        >>> float(g([np.array([5.0, 0.0])])[0])
        0.0
    """

    name: str
    func: Func = field(repr=False)
    params: Dict[str, Any] = field(default_factory=dict, repr=False)

    def __repr__(self):
        class_name = self.__class__.__name__
        params = "".join(f", {key}={value!r}" for key, value in self.params.items())
        return f"{class_name}({self.name!r}{params})"

    def __call__(self, arguments: Sequence[np.ndarray]) -> np.ndarray:
        return np.asarray(self.func(arguments), dtype=float).reshape(-1)

    def evaluate_state(self, H: Sequence[np.ndarray], x: np.ndarray) -> np.ndarray:
        """Returns `g(x)` where the i-th argument is `H[i] @ x`."""
        return self([Hi @ x for Hi in H])


def register(name: str):
    """Decorator to register a factory of NonlinearityEvaluator under `name`."""

    def deco(factory):
        NONLINEARITIES[name] = factory
        return factory

    return deco


def get_nonlinearity(name: str, **params) -> NonlinearityEvaluator:
    """Returns a NonlinearityEvaluator.

    `name` is looked up in the registry first. Otherwise it is imported as a
    dotted path of a factory function.

    Args:
        name: Registry name or dotted path.
        params: Keyword arguments for the factory.

    Examples:
        >>> get_nonlinearity('zero', m=2)([np.zeros(3), np.zeros(3)]).tolist()
        [0.0, 0.0]
        >>> get_nonlinearity('unknown-function')
        Traceback (most recent call last):
        ...
        ValueError: Unknown nonlinearity: unknown-function
    """
    if name in NONLINEARITIES:
        return NONLINEARITIES[name](**params)
    if "." in name:
        try:
            factory = utils.get_object(name)
        except (ValueError, AttributeError):
            pass
        else:
            evaluator = factory(**params)
            if isinstance(evaluator, NonlinearityEvaluator):
                return evaluator
            return NonlinearityEvaluator(name, evaluator, dict(params))
    raise ValueError(f"Unknown nonlinearity: {name}")


@register("zero")
def zero(m: int = 1) -> NonlinearityEvaluator:
    """Returns the identically zero nonlinearity of `m` entries."""
    return NonlinearityEvaluator("zero", lambda args: np.zeros(m), {"m": m})


@register("sin")
def sine(index: int = 0, amplitude: float = 1.0) -> NonlinearityEvaluator:
    """Returns `g_1(nu) = amplitude * sin(nu[index])` with `m = 1`."""

    def func(args):
        return np.array([amplitude * np.sin(args[0][index])])

    params = {"index": index}
    if amplitude != 1.0:
        params["amplitude"] = amplitude
    return NonlinearityEvaluator("sin", func, params)


@register("robot-arm")
def robot_arm() -> NonlinearityEvaluator:
    """Returns `sin(x3)` of the one-link flexible joint arm.

    The argument matrix of the arm selects the third state in its first
    component.
    """
    return NonlinearityEvaluator("robot-arm", lambda args: np.sin(args[0][:1]))


@register("affine")
def affine(
    coefficients: List[List[float]], offsets: List[float] = None
) -> NonlinearityEvaluator:
    """Returns `g_i(nu) = c_i . nu + o_i` for each row `c_i` of `coefficients`.

    Examples:
        >>> g = affine([[1.0, 2.0]], [0.5])
        >>> g([np.array([1.0, 1.0])]).tolist()
        [3.5]
    """
    c = np.atleast_2d(np.asarray(coefficients, dtype=float))
    o = np.zeros(len(c)) if offsets is None else np.asarray(offsets, dtype=float)

    def func(args):
        return np.array([c[i] @ args[i] + o[i] for i in range(len(c))])

    params = {"coefficients": c.tolist()}
    if offsets is not None:
        params["offsets"] = o.tolist()
    return NonlinearityEvaluator("affine", func, params)
