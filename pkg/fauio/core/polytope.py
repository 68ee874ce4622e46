"""This module provides the polytopic description of the nonlinearity."""
import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np

from fauio.core.base import ConditionReport
from fauio.core.errors import DimensionError, NonFiniteError, VertexCapError
from fauio.core.nonlinearity import NonlinearityEvaluator

logger = logging.getLogger("fauio")

MAX_FREE_BOUNDS = 16


def basis(i: int, j: int, m: int, n_bar: int) -> np.ndarray:
    """Returns the m x n_bar matrix with a single one at 1-based `(i, j)`.

    Examples:
        >>> basis(2, 1, 2, 3).tolist()
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
        >>> basis(3, 1, 2, 3)
        Traceback (most recent call last):
        ...
        IndexError: basis index (3, 1) out of range for 2 x 3
    """
    if not (1 <= i <= m and 1 <= j <= n_bar):
        raise IndexError(f"basis index ({i}, {j}) out of range for {m} x {n_bar}")
    matrix = np.zeros((m, n_bar))
    matrix[i - 1, j - 1] = 1.0
    return matrix


@dataclass
class VertexSet:
    """VertexSet class holds the vertices of the box `0 <= g_ij <= g_b_ij`.

    Args:
        bounds: Secant bounds (m x n_bar).
        vertices: Vertex matrices in enumeration order.

    Examples:
        >>> vertices = enumerate_vertices(np.array([[2.0, 0.0], [0.0, 3.0]]))
        >>> vertices
        VertexSet(m=2, n_bar=2, num_vertices=4)
        >>> [v[v > 0].tolist() for v in vertices]
        [[], [2.0], [3.0], [2.0, 3.0]]
    """

    bounds: np.ndarray
    vertices: List[np.ndarray] = field(default_factory=list)

    def __repr__(self):
        class_name = self.__class__.__name__
        m, n_bar = self.bounds.shape
        return f"{class_name}(m={m}, n_bar={n_bar}, num_vertices={len(self)})"

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[np.ndarray]:
        yield from self.vertices

    def __getitem__(self, index: int) -> np.ndarray:
        return self.vertices[index]

    @property
    def m(self) -> int:
        return self.bounds.shape[0]

    @property
    def n_bar(self) -> int:
        return self.bounds.shape[1]


def enumerate_vertices(bounds: np.ndarray, cap: int = MAX_FREE_BOUNDS) -> VertexSet:
    """Returns the vertices of the box `[0, bounds]`.

    Entries with a zero bound are fixed at zero. The remaining entries are
    taken in row-major order and enumerated by binary counting with the first
    free entry as the least significant bit.

    Args:
        bounds: Secant bounds (m x n_bar).
        cap: Largest allowed number of strictly positive bounds.

    Raises:
        VertexCapError: If the box has more than `cap` vertices.

    Examples:
        >>> len(enumerate_vertices(np.zeros((1, 1))))
        1
        >>> len(enumerate_vertices(np.ones((1, 4))))
        16
        >>> enumerate_vertices(np.ones((1, 5)), cap=4)
        Traceback (most recent call last):
        ...
        fauio.core.errors.VertexCapError: 2^5 = 32 vertices exceed the cap of 2^4
    """
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    if not np.all(np.isfinite(bounds)):
        raise DimensionError("lipschitz_bounds", "entries must be finite")
    if np.any(bounds < 0):
        raise DimensionError("lipschitz_bounds", "entries must be non-negative")
    free =[index for index, value in np.ndenumerate(bounds) if value > 0]
    num_vertices = 2 ** len(free)
    if len(free) > cap:
        raise VertexCapError(
            f"2^{len(free)} = {num_vertices} vertices exceed the cap of 2^{cap}"
        )
    vertices = []
    for k in range(num_vertices):
        vertex = np.zeros_like(bounds)
        for bit, index in enumerate(free):
            if k >> bit & 1:
                vertex[index] = bounds[index]
        vertices.append(vertex)
    logger.debug(f"[fauio] {num_vertices} vertices for {len(free)} free bound(s)")
    return VertexSet(bounds, vertices)


@dataclass
class SamplingPlan:
    """SamplingPlan class configures bound estimation and decomposition audit.

    Args:
        low: Lower edge of the sampling box, per coordinate.
        high: Upper edge of the sampling box, per coordinate.
        samples: Number of sample points.
        step: Central difference step.
        seed: Seed of the random generator.
        safety: Factor applied to the sampled maxima.
    """

    low: float = -1.0
    high: float = 1.0
    samples: int = 1000
    step: float = 1e-3
    seed: int = 0
    safety: float = 1.1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if np.any(np.asarray(self.high) < np.asarray(self.low)):
            raise ValueError("sampling box is empty")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def estimate_bounds(
    g: NonlinearityEvaluator,
    H: Sequence[np.ndarray],
    plan: Optional[SamplingPlan] = None,
) -> np.ndarray:
    """Returns estimated secant bounds of `g` over the box of `plan`.

    Each argument `nu_i` is sampled in the box. The partial derivative of `g_i`
    with respect to `nu_i[j]` is taken by central differences, and the largest
    absolute value times `plan.safety` becomes `g_b[i, j]`.

    For a fixed seed, the samples of a smaller plan are a prefix of the samples
    of a larger plan, so the estimate never decreases with `plan.samples`.

    Raises:
        NonFiniteError: If a slope is NaN or infinite.

    Examples:
        >>> from fauio.core.nonlinearity import get_nonlinearity
        >>> g = get_nonlinearity('affine', coefficients=[[2.0, -1.0]])
        >>> bounds = estimate_bounds(g, [np.eye(2)], SamplingPlan(safety=1.0))
        >>> np.allclose(bounds, [[2.0, 1.0]])
        True
    """
    plan = plan or SamplingPlan()
    m = len(H)
    n_bar = H[0].shape[0] if m else 0
    bounds = np.zeros((m, n_bar))
    if not m:
        return bounds
    samples = plan.rng().uniform(plan.low, plan.high, size=(plan.samples, m, n_bar))
    h = plan.step
    for k, point in enumerate(samples):
        arguments = list(point)
        for i in range(m):
            for j in range(n_bar):
                plus = [a.copy() for a in arguments]
                minus = [a.copy() for a in arguments]
                plus[i][j] += h
                minus[i][j] -= h
                slope = (g(plus)[i] - g(minus)[i]) / (2 * h)
                if not np.isfinite(slope):
                    raise NonFiniteError(k, (i + 1, j + 1))
                bounds[i, j] = max(bounds[i, j], abs(slope))
    return plan.safety * bounds


def secant_coefficients(
    g: NonlinearityEvaluator, nu: Sequence[np.ndarray], nu_hat: Sequence[np.ndarray]
) -> np.ndarray:
    """Returns coefficients `g_ij` with
    `g(nu) - g(nu_hat) = sum g_ij (nu_i - nu_hat_i)_j`.

    The difference is telescoped one coordinate at a time. Coordinates where
    `nu` and `nu_hat` agree get a zero coefficient.
    """
    m = len(nu)
    n_bar = len(nu[0]) if m else 0
    coefficients = np.zeros((m, n_bar))
    for i in range(m):
        current = [a.copy() for a in nu]
        for j in range(n_bar):
            delta = nu[i][j] - nu_hat[i][j]
            following = [a.copy() for a in current]
            following[i][j] = nu_hat[i][j]
            if delta != 0:
                coefficients[i, j] = (g(current)[i] - g(following)[i]) / delta
            current = following
    return coefficients


def verify_decomposition(
    g: NonlinearityEvaluator,
    H: Sequence[np.ndarray],
    bounds: np.ndarray,
    trials: int = 1000,
    plan: Optional[SamplingPlan] = None,
    tol: float = 1e-12,
) -> ConditionReport:
    """Audits the secant decomposition of `g` on random state pairs.

    Pairs `(X, Y)` are drawn in the box of `plan`. For each pair the secant
    coefficients of `g(HX) - g(HY)` must lie in `[0, bounds]`.

    Returns:
        Report with the number of violating trials and the worst margin.
    """
    plan = plan or SamplingPlan()
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    report = ConditionReport("decomposition")
    if not len(H):
        report.add("secant bounds", True, 0.0, "no nonlinearity")
        return report
    n = H[0].shape[1]
    rng = plan.rng()
    violations = 0
    worst = np.inf
    residual = 0.0
    for _ in range(trials):
        X = rng.uniform(plan.low, plan.high, size=n)
        Y = rng.uniform(plan.low, plan.high, size=n)
        nu = [Hi @ X for Hi in H]
        nu_hat = [Hi @ Y for Hi in H]
        coefficients = secant_coefficients(g, nu, nu_hat)
        margin = np.minimum(coefficients, bounds - coefficients).min()
        worst = min(worst, float(margin))
        if margin < -tol:
            violations += 1
        delta = np.array([(a - b) for a, b in zip(nu, nu_hat)])
        reconstructed = np.sum(coefficients * delta, axis=1)
        defect = np.abs(g(nu) - g(nu_hat) - reconstructed)
        residual = max(residual, float(np.max(defect)))
    report.add(
        "secant bounds",
        violations == 0,
        worst,
        f"{violations} violation(s) in {trials} trial(s)",
    )
    report.add("telescoping identity", residual <= 1e-9, residual, "max residual")
    if violations:
        logger.warning(f"[fauio] {violations} trial(s) violate the secant bounds")
    return report
