"""First-order ODE problems and the built-in catalog.

Right-hand sides are vectorized: ``rhs(t, y)`` takes times of shape ``(K,)``
and states of shape ``(K, M)`` and returns ``(K, M)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CatalogError, ConfigurationError

Rhs = Callable[[np.ndarray, np.ndarray], np.ndarray]
Solution = Callable[[np.ndarray], np.ndarray]


@dataclass
class ODEProblem:
    name: str
    dim: int
    rhs: Rhs
    t0: float
    y0: np.ndarray
    t_end: float
    collocation: np.ndarray
    known_t: Optional[np.ndarray] = None
    known_y: Optional[np.ndarray] = None
    analytic: Optional[Solution] = None
    analytic_dt: Optional[Solution] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y0 = np.asarray(self.y0, dtype=np.float64).reshape(self.dim)
        self.collocation = np.asarray(self.collocation, dtype=np.float64).ravel()
        if not self.t0 < self.t_end:
            raise ConfigurationError(f"need t0 < t_end, got {self.t0} and {self.t_end}")
        if self.collocation.size < 1:
            raise ConfigurationError("at least one collocation point is required")
        if self.collocation.min() < self.t0 or self.collocation.max() > self.t_end:
            raise ConfigurationError(
                f"collocation points must lie in [{self.t0}, {self.t_end}]"
            )
        if (self.known_t is None) != (self.known_y is None):
            raise ConfigurationError("known_t and known_y must be given together")
        if self.known_t is not None:
            self.known_t = np.asarray(self.known_t, dtype=np.float64).ravel()
            self.known_y = np.asarray(self.known_y, dtype=np.float64).reshape(-1, self.dim)
            if self.known_y.shape[0] != self.known_t.size:
                raise ConfigurationError("known_t and known_y lengths differ")

    @property
    def has_known_solutions(self) -> bool:
        return self.known_t is not None and self.known_t.size > 0


def uniform_grid(t0: float, t_end: float, points: int) -> np.ndarray:
    if points < 1:
        raise ConfigurationError(f"grid needs at least one point, got {points}")
    if points == 1:
        return np.array([float(t0)])
    return np.linspace(t0, t_end, points)


def _build(name, dim, rhs, y0, t0, t_end, collocation_points, known_points, sol, dsol, params):
    known_t = known_y = None
    if known_points:
        known_t = uniform_grid(t0, t_end, known_points)
        known_y = sol(known_t)
    return ODEProblem(
        name=name,
        dim=dim,
        rhs=rhs,
        t0=t0,
        y0=y0,
        t_end=t_end,
        collocation=uniform_grid(t0, t_end, collocation_points),
        known_t=known_t,
        known_y=known_y,
        analytic=sol,
        analytic_dt=dsol,
        params=params,
    )


def exp_decay(lam=1.0, t0=0.0, t_end=1.0, collocation_points=32, known_points=0):
    """y' = -lam*y, y(t0) = 1."""

    def rhs(t, y):
        return -lam * y

    def sol(t):
        return np.exp(-lam * (np.asarray(t) - t0)).reshape(-1, 1)

    def dsol(t):
        return -lam * sol(t)

    return _build("exp_decay", 1, rhs, [1.0], t0, t_end, collocation_points, known_points,
                  sol, dsol, {"lam": lam})


def logistic(t0=0.0, t_end=1.0, collocation_points=32, known_points=0):
    """y' = y(1 - y), y(t0) = 1/2."""

    def rhs(t, y):
        return y * (1.0 - y)

    def sol(t):
        return (1.0 / (1.0 + np.exp(-(np.asarray(t) - t0)))).reshape(-1, 1)

    def dsol(t):
        s = sol(t)
        return s * (1.0 - s)

    return _build("logistic", 1, rhs, [0.5], t0, t_end, collocation_points, known_points,
                  sol, dsol, {})


def harmonic(omega=1.0, t0=0.0, t_end=1.0, collocation_points=32, known_points=0):
    """y1' = y2, y2' = -omega^2 y1 with y(t0) = (1, 0)."""

    def rhs(t, y):
        return np.stack([y[:, 1], -omega**2 * y[:, 0]], axis=1)

    def sol(t):
        s = omega * (np.asarray(t, dtype=np.float64).ravel() - t0)
        return np.stack([np.cos(s), -omega * np.sin(s)], axis=1)

    def dsol(t):
        s = omega * (np.asarray(t, dtype=np.float64).ravel() - t0)
        return np.stack([-omega * np.sin(s), -omega**2 * np.cos(s)], axis=1)

    return _build("harmonic", 2, rhs, [1.0, 0.0], t0, t_end, collocation_points, known_points,
                  sol, dsol, {"omega": omega})


_CATALOG = {"exp_decay": exp_decay, "logistic": logistic, "harmonic": harmonic}


def builtin_problems() -> dict[str, Callable[..., ODEProblem]]:
    return dict(_CATALOG)


def get_problem(name: str, **overrides) -> ODEProblem:
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise CatalogError(
            f"unknown problem {name!r}; available: {', '.join(sorted(_CATALOG))}"
        ) from None
    return factory(**overrides)


class AnalyticTrajectory:
    """Adapter exposing an exact solution through the trajectory protocol."""

    def __init__(self, sol: Solution, dsol: Solution):
        self.sol = sol
        self.dsol = dsol

    @classmethod
    def of(cls, problem: ODEProblem) -> "AnalyticTrajectory":
        if problem.analytic is None or problem.analytic_dt is None:
            raise ConfigurationError(f"problem {problem.name!r} has no analytic solution")
        return cls(problem.analytic, problem.analytic_dt)

    def evaluate(self, t):
        t = np.asarray(t, dtype=np.float64)
        y, dy = self.sol(t.ravel()), self.dsol(t.ravel())
        if t.ndim == 0:
            return y[0], dy[0]
        return y, dy
