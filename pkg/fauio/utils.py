"""This module provides the matrix text format and small helpers."""
import hashlib
import importlib
import json
from typing import Any, Dict, Iterable, List, Tuple

import numpy as np

from fauio.core.errors import ConfigError


def get_object(name: str) -> Any:
    """Returns an object specified by `name`.

    Args:
        name: Object name.

    Examples:
        >>> import inspect
        >>> obj = get_object('fauio.core')
        >>> inspect.ismodule(obj)
        True
        >>> obj = get_object('fauio.core.base.Check')
        >>> inspect.isclass(obj)
        True
    """
    names = name.split(".")
    for k in range(len(names), 0, -1):
        module_name = ".".join(names[:k])
        try:
            obj = importlib.import_module(module_name)
        except ModuleNotFoundError:
            continue
        for attr in names[k:]:
            obj = getattr(obj, attr)
        return obj
    raise ValueError(f"Could not find object: {name}")


def format_number(value: float) -> str:
    """Returns `value` with 17 significant digits.

    Examples:
        >>> format_number(0.1)
        '0.10000000000000001'
        >>> format_number(2.0)
        '2'
        >>> format_number(-0.0)
        '0'
    """
    if value == 0:
        return "0"
    return f"{value:.17g}"


def format_matrix(matrix: np.ndarray) -> str:
    """Returns the canonical text of `matrix`.

    The first line is `rows cols`, followed by one line per row.

    Examples:
        >>> print(format_matrix(np.array([[1.0, 0.5], [0.0, -2.0]])))
        2 2
        1 0.5
        0 -2
        >>> print(format_matrix(np.zeros((2, 0))))
        2 0
    """
    matrix = np.atleast_2d(matrix)
    rows, cols = matrix.shape
    lines = [f"{rows} {cols}"]
    if cols:
        for row in matrix:
            lines.append(" ".join(format_number(float(x)) for x in row))
    return "\n".join(lines)


def parse_matrix(text: str) -> np.ndarray:
    """Returns a matrix parsed from its canonical text.

    Examples:
        >>> parse_matrix("2 1\\n1\\n-3.5").tolist()
        [[1.0], [-3.5]]
        >>> parse_matrix("3 0").shape
        (3, 0)
    """
    lines = [line for line in text.strip().splitlines() if line.strip()]
    rows, cols = (int(x) for x in lines[0].split())
    values = [float(x) for line in lines[1:] for x in line.split()]
    if len(values) != rows * cols:
        raise ValueError(f"expected {rows * cols} values, got {len(values)}")
    return np.array(values, dtype=float).reshape(rows, cols)


def format_matrices(matrices: Dict[str, np.ndarray], header: Iterable[str] = ()) -> str:
    """Returns named matrices as `[name]` sections of canonical text.

    Lines of `header` are written first as `#` comments.
    """
    lines = [f"# {line}" for line in header]
    for name, matrix in matrices.items():
        lines.append(f"[{name}]")
        lines.append(format_matrix(np.asarray(matrix, dtype=float)))
    return "\n".join(lines) + "\n"


def parse_matrices(text: str) -> Dict[str, np.ndarray]:
    """Inverse of `format_matrices`. Comment lines are skipped.

    Examples:
        >>> text = format_matrices({'K': np.eye(2)}, ['manifest abc'])
        >>> parse_matrices(text)['K'].tolist()
        [[1.0, 0.0], [0.0, 1.0]]
    """
    sections: List[Tuple[str, List[str]]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            sections.append((line[1:-1], []))
        elif sections:
            sections[-1][1].append(line)
        else:
            raise ValueError(f"value outside of a section: {line!r}")
    return {name: parse_matrix("\n".join(body)) for name, body in sections}


def sha256_of_file(path: str) -> str:
    with open(path, "rb") as file:
        return hashlib.sha256(file.read()).hexdigest()


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_of_object(obj: Any) -> str:
    """Returns the hash of the canonical JSON dump of `obj`.

    Examples:
        >>> sha256_of_object({'b': 1, 'a': 2}) == sha256_of_object({'a': 2, 'b': 1})
        True
    """
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def require(data: dict, key: str, location: str) -> Any:
    """Returns `data[key]` or raises ConfigError naming the missing field."""
    if not isinstance(data, dict) or key not in data:
        raise ConfigError(location, f"missing field '{key}'")
    return data[key]
