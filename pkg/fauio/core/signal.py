"""This module provides the signal algebra of fault, disturbance and input
scripts.

A signal is a constant, a ramp, a sinusoid or a sum of signals. Any signal may
carry a time window `[start, stop)` outside of which it is zero.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from fauio.core.errors import ConfigError

EDGE_TOL = 1e-9

Window = Optional[Tuple[float, float]]


class Signal:
    """Base class of signals. Subclasses define `_raw` and `_raw_derivative`."""

    window: Window = None

    def __repr__(self):
        class_name = self.__class__.__name__
        window = "" if self.window is None else f", window={self.window}"
        return f"{class_name}({self._describe()}{window})"

    def _describe(self) -> str:
        return ""

    def _raw(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _raw_derivative(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mask(self, t: np.ndarray) -> np.ndarray:
        if self.window is None:
            return np.ones_like(t, dtype=bool)
        start, stop = self.window
        return (t >= start - EDGE_TOL) & (t < stop - EDGE_TOL)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(self.mask(t), self._raw(t), 0.0)

    def derivative(self, t) -> np.ndarray:
        """Returns the analytic derivative, zero outside the window."""
        t = np.asarray(t, dtype=float)
        return np.where(self.mask(t), self._raw_derivative(t), 0.0)

    def edges(self) -> List[float]:
        """Returns the window edges of this signal and its terms."""
        return [] if self.window is None else list(self.window)

    def to_dict(self) -> Dict[str, Any]:
        data = {"type": self.kind}
        data.update(self._params())
        if self.window is not None:
            data["window"] = list(self.window)
        return data

    kind = ""

    def _params(self) -> Dict[str, Any]:
        return {}


@dataclass(repr=False)
class Constant(Signal):
    """Constant signal.

    Examples:
        >>> s = Constant(2.0, window=(10, 20))
        >>> s
        Constant(2.0, window=(10, 20))
        >>> s([5.0, 10.0, 19.5, 20.0]).tolist()
        [0.0, 2.0, 2.0, 0.0]
    """

    level: float = 0.0
    window: Window = None
    kind = "constant"

    def _describe(self) -> str:
        return f"{self.level}"

    def _raw(self, t):
        return np.full_like(t, self.level, dtype=float)

    def _raw_derivative(self, t):
        return np.zeros_like(t, dtype=float)

    def _params(self):
        return {"value": self.level}


@dataclass(repr=False)
class Ramp(Signal):
    """Ramp `offset + slope (t - t0)`.

    Examples:
        >>> s = Ramp(-0.5, t0=20.0, offset=5.0, window=(5, 35))
        >>> s([0.0, 20.0, 30.0]).tolist()
        [0.0, 5.0, 0.0]
    """

    slope: float = 0.0
    t0: float = 0.0
    offset: float = 0.0
    window: Window = None
    kind = "ramp"

    def _describe(self) -> str:
        return f"slope={self.slope}, t0={self.t0}, offset={self.offset}"

    def _raw(self, t):
        return self.offset + self.slope * (t - self.t0)

    def _raw_derivative(self, t):
        return np.full_like(t, self.slope, dtype=float)

    def _params(self):
        return {"slope": self.slope, "t0": self.t0, "offset": self.offset}


@dataclass(repr=False)
class Sinusoid(Signal):
    """Sinusoid `amplitude * sin(omega t + phase)`, or cosine with `kind='cos'`.

    Examples:
        >>> s = Sinusoid(2.0, 5.0, function='cos')
        >>> s([0.0]).tolist()
        [2.0]
    """

    amplitude: float = 1.0
    omega: float = 1.0
    phase: float = 0.0
    function: str = "sin"
    window: Window = None
    kind = "sinusoid"

    def __post_init__(self):
        if self.function not in ("sin", "cos"):
            raise ValueError(f"function must be 'sin' or 'cos', got {self.function!r}")

    def _describe(self) -> str:
        phase = f", phase={self.phase}" if self.phase else ""
        return f"{self.amplitude} {self.function}({self.omega} t{phase})"

    def _raw(self, t):
        arg = self.omega * t + self.phase
        return self.amplitude * (np.sin(arg) if self.function == "sin" else np.cos(arg))

    def _raw_derivative(self, t):
        arg = self.omega * t + self.phase
        d = np.cos(arg) if self.function == "sin" else -np.sin(arg)
        return self.amplitude * self.omega * d

    def _params(self):
        params = {"amplitude": self.amplitude, "omega": self.omega}
        if self.phase:
            params["phase"] = self.phase
        params["function"] = self.function
        return params


@dataclass(repr=False)
class Sum(Signal):
    """Sum of signals.

    Examples:
        >>> s = Sum([Constant(1.0), Sinusoid(1.0, 1.0)], window=(0, 1))
        >>> s([0.0, 2.0]).tolist()
        [1.0, 0.0]
        >>> s
        Sum(num_terms=2, window=(0, 1))
    """

    terms: List[Signal] = field(default_factory=list)
    window: Window = None
    kind = "sum"

    def _describe(self) -> str:
        return f"num_terms={len(self.terms)}"

    def _raw(self, t):
        return sum((term(t) for term in self.terms), np.zeros_like(t, dtype=float))

    def _raw_derivative(self, t):
        total = np.zeros_like(t, dtype=float)
        for term in self.terms:
            total = total + term.derivative(t)
        return total

    def edges(self) -> List[float]:
        edges = super().edges()
        for term in self.terms:
            edges.extend(term.edges())
        return edges

    def _params(self):
        return {"terms": [term.to_dict() for term in self.terms]}


@dataclass(repr=False)
class Scaled(Signal):
    """Signal multiplied by a constant factor.

    Examples:
        >>> Scaled(2.0, Sinusoid(0.1, 10.0))
        Scaled(2.0 x Sinusoid(0.1 sin(10.0 t)))
    """

    factor: float = 1.0
    signal: Signal = field(default_factory=Constant)
    window: Window = None
    kind = "scaled"

    def _describe(self) -> str:
        return f"{self.factor} x {self.signal!r}"

    def _raw(self, t):
        return self.factor * self.signal(t)

    def _raw_derivative(self, t):
        return self.factor * self.signal.derivative(t)

    def edges(self) -> List[float]:
        return super().edges() + self.signal.edges()

    def _params(self):
        return {"factor": self.factor, "signal": self.signal.to_dict()}


def grid_derivative(signal: Signal, t: np.ndarray) -> np.ndarray:
    """Returns the derivative of `signal` on the grid `t`.

    The analytic derivative is used everywhere except at the first grid point
    at or after a window edge where the signal jumps, which gets the backward
    difference.
    """
    t = np.asarray(t, dtype=float)
    values = signal(t)
    derivative = signal.derivative(t)
    for edge in sorted(set(signal.edges())):
        k = int(np.searchsorted(t, edge - EDGE_TOL))
        if 0 < k < len(t) and values[k] != values[k - 1]:
            derivative[k] = (values[k] - values[k - 1]) / (t[k] - t[k - 1])
    return derivative


SIGNAL_TYPES = {
    "constant": Constant,
    "ramp": Ramp,
    "sinusoid": Sinusoid,
    "sum": Sum,
    "scaled": Scaled,
}

PARAMS = {
    "constant": {"value": "level"},
    "ramp": {"slope": "slope", "t0": "t0", "offset": "offset"},
    "sinusoid": {
        "amplitude": "amplitude",
        "omega": "omega",
        "phase": "phase",
        "function": "function",
    },
    "sum": {"terms": "terms"},
    "scaled": {"factor": "factor", "signal": "signal"},
}


def parse_signal(data: Any, location: str = "signal") -> Signal:
    """Returns a signal from its configuration mapping.

    A bare number is a constant.

    Examples:
        >>> parse_signal({'type': 'ramp', 'slope': 0.1, 't0': 10, 'window': [20, 20.1]})
        Ramp(slope=0.1, t0=10, offset=0.0, window=(20, 20.1))
        >>> parse_signal(3)
        Constant(3.0)
        >>> parse_signal({'type': 'step'})
        Traceback (most recent call last):
        ...
        fauio.core.errors.ConfigError: signal.type: unknown signal type 'step'
    """
    if isinstance(data, (int, float)):
        return Constant(float(data))
    if not isinstance(data, dict):
        raise ConfigError(location, f"expected a mapping, got {type(data).__name__}")
    data = dict(data)
    kind = data.pop("type", None)
    if kind not in SIGNAL_TYPES:
        raise ConfigError(f"{location}.type", f"unknown signal type {kind!r}")
    window = data.pop("window", None)
    if window is not None:
        if not isinstance(window, (list, tuple)) or len(window) != 2:
            raise ConfigError(f"{location}.window", "expected [start, stop]")
        if not window[0] < window[1]:
            raise ConfigError(f"{location}.window", "start must precede stop")
        window = (window[0], window[1])
    kwargs: Dict[str, Any] = {"window": window}
    for key, value in data.items():
        if key not in PARAMS[kind]:
            raise ConfigError(f"{location}.{key}", f"unknown field for {kind}")
        if key == "signal":
            value = parse_signal(value, f"{location}.signal")
        if key == "terms":
            value = [
                parse_signal(term, f"{location}.terms[{k}]")
                for k, term in enumerate(value)
            ]
        kwargs[PARAMS[kind][key]] = value
    try:
        return SIGNAL_TYPES[kind](**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(location, str(e))


def parse_signals(data: Sequence[Any], location: str) -> List[Signal]:
    if data is None:
        return []
    if not isinstance(data, (list, tuple)):
        raise ConfigError(location, "expected a list of signals, one per channel")
    return [parse_signal(item, f"{location}[{k}]") for k, item in enumerate(data)]


def evaluate(signals: Sequence[Signal], t: np.ndarray, size: int) -> np.ndarray:
    """Returns the (len(t), size) values of a channel list. Missing channels are
    zero."""
    t = np.asarray(t, dtype=float)
    values = np.zeros((len(t), size))
    for k, signal in enumerate(signals):
        values[:, k] = signal(t)
    return values


def evaluate_derivative(
    signals: Sequence[Signal], t: np.ndarray, size: int
) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    values = np.zeros((len(t), size))
    for k, signal in enumerate(signals):
        values[:, k] = grid_derivative(signal, t)
    return values
