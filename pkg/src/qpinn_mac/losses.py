"""Physics-informed loss terms and their gradient with respect to the model.

The loss terms take any *trajectory*: an object whose ``evaluate(t)``
returns ``(y, dy/dt)`` arrays of shape ``(K, M)`` for a vector of times.
:class:`~qpinn_mac.hybrid.HybridModel` and
:class:`~qpinn_mac.problems.AnalyticTrajectory` both qualify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError, ShapeError
from .hybrid import HybridModel, backward, eval_mac
from .problems import ODEProblem


@dataclass(frozen=True)
class LossWeights:
    ic: float = 1.0
    ode: float = 1.0
    sol: float = 1.0

    def __post_init__(self):
        for name in ("ic", "ode", "sol"):
            if not getattr(self, name) >= 0.0:
                raise ConfigurationError(f"loss weight {name!r} must be nonnegative")


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    ic: float
    ode: float
    sol: float
    sol_skipped: bool = False


def _check_dim(traj, problem: ODEProblem):
    dim = getattr(traj, "dim", problem.dim)
    if dim != problem.dim:
        raise ShapeError(f"model has {dim} outputs but problem {problem.name!r} has {problem.dim}")


def _eval(traj, t):
    y, dy = traj.evaluate(np.asarray(t, dtype=np.float64).ravel())
    return np.asarray(y, dtype=np.float64), np.asarray(dy, dtype=np.float64)


def _rhs(problem: ODEProblem, t: np.ndarray, y: np.ndarray) -> np.ndarray:
    f = np.asarray(problem.rhs(t, y), dtype=np.float64).reshape(y.shape)
    bad = ~np.all(np.isfinite(f), axis=1)
    if bad.any():
        raise NumericError(f"right-hand side is not finite at t_k = {float(t[bad][0])!r}")
    return f


def loss_ic(traj, problem: ODEProblem) -> float:
    _check_dim(traj, problem)
    y, _ = _eval(traj, [problem.t0])
    return float(np.sum((y[0] - problem.y0) ** 2))


def loss_ode(traj, problem: ODEProblem) -> float:
    _check_dim(traj, problem)
    t = problem.collocation
    y, dy = _eval(traj, t)
    r = dy - _rhs(problem, t, y)
    return float(np.sum(r**2))


def loss_sol(traj, problem: ODEProblem) -> float:
    """Known-solution misfit; 0 when the problem carries no samples."""
    _check_dim(traj, problem)
    if not problem.has_known_solutions:
        return 0.0
    y, _ = _eval(traj, problem.known_t)
    return float(np.sum((y - problem.known_y) ** 2))


def rhs_vjp(problem: ODEProblem, t: np.ndarray, y: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-wise ``(dF/dy)^T v`` by central differences in y.

    Step per row is ``1e-6 * (1 + |y_k|)``; one column of the Jacobian per
    state coordinate, so ``2 M`` right-hand-side evaluations in total.
    """
    h = 1e-6 * (1.0 + np.linalg.norm(y, axis=1))
    out = np.empty_like(y)
    for i in range(y.shape[1]):
        yp, ym = y.copy(), y.copy()
        yp[:, i] += h
        ym[:, i] -= h
        col = (_rhs(problem, t, yp) - _rhs(problem, t, ym)) / (2.0 * h[:, None])
        out[:, i] = np.sum(col * v, axis=1)
    return out


def total_loss_and_grad(model: HybridModel, problem: ODEProblem, weights: LossWeights = LossWeights()):
    """Weighted composite loss with its gradient.

    Returns ``(LossBreakdown, flat classical gradient, list of QNode angle
    gradients)``. All evaluation times (initial point, collocation points,
    known-solution points) go through the model in one batch.
    """
    _check_dim(model, problem)
    use_sol = problem.has_known_solutions
    t_parts = [np.array([problem.t0]), problem.collocation]
    if use_sol:
        t_parts.append(problem.known_t)
    t = np.concatenate(t_parts)
    k = problem.collocation.size

    expectations, qgrads = model.expectations_and_grads()
    ev = eval_mac(model, t, expectations)
    y, dy = ev.y_mac, ev.y_mac_dt

    adj = np.zeros_like(y)
    adj_dt = np.zeros_like(y)

    e_ic = y[0] - problem.y0
    ic = float(np.sum(e_ic**2))
    adj[0] = 2.0 * weights.ic * e_ic

    tc, yc = t[1 : 1 + k], y[1 : 1 + k]
    r = dy[1 : 1 + k] - _rhs(problem, tc, yc)
    ode = float(np.sum(r**2))
    adj_dt[1 : 1 + k] = 2.0 * weights.ode * r
    if weights.ode != 0.0:
        adj[1 : 1 + k] = -2.0 * weights.ode * rhs_vjp(problem, tc, yc, r)

    sol = 0.0
    if use_sol:
        e_sol = y[1 + k :] - problem.known_y
        sol = float(np.sum(e_sol**2))
        adj[1 + k :] = 2.0 * weights.sol * e_sol

    total = weights.ic * ic + weights.ode * ode + (weights.sol * sol if use_sol else 0.0)
    breakdown = LossBreakdown(total, ic, ode, sol, sol_skipped=not use_sol)
    g_c, g_q = backward(model, t, adj, adj_dt, ev=ev, qgrads=qgrads)
    return breakdown, g_c, g_q


def loss_breakdown(traj, problem: ODEProblem, weights: LossWeights = LossWeights()) -> LossBreakdown:
    ic = loss_ic(traj, problem)
    ode = loss_ode(traj, problem)
    sol = loss_sol(traj, problem)
    total = weights.ic * ic + weights.ode * ode + weights.sol * sol
    return LossBreakdown(total, ic, ode, sol, sol_skipped=not problem.has_known_solutions)
