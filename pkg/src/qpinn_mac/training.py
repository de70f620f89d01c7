"""Joint full-batch training of the MLP weights and the QNode angles."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ConfigurationError, NumericError, TrainingDiverged
from .hybrid import HybridModel
from .losses import LossBreakdown, LossWeights, total_loss_and_grad
from .mlp import require_smooth
from .optim import SGD, Adam
from .problems import ODEProblem

log = logging.getLogger(__name__)

TRACE_HEADER = (
    "epoch",
    "loss_total",
    "loss_ic",
    "loss_ode",
    "loss_sol",
    "grad_norm_classical",
    "grad_norm_quantum",
)


@dataclass(frozen=True)
class TrainConfig:
    optimizer: Literal["adam", "sgd"] = "adam"
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 5000
    seed: int = 0
    log_every: int = 50

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigurationError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")
        if not self.learning_rate >= 0.0:
            raise ConfigurationError("learning_rate must be nonnegative")
        if self.epochs < 1 or self.log_every < 1:
            raise ConfigurationError("epochs and log_every must be positive")

    def make_optimizer(self):
        if self.optimizer == "sgd":
            return SGD(self.learning_rate)
        return Adam(self.learning_rate, self.beta1, self.beta2, self.eps)


@dataclass
class TraceRow:
    epoch: int
    loss: LossBreakdown
    grad_norm_classical: float
    grad_norm_quantum: float

    def as_tuple(self):
        return (
            self.epoch,
            self.loss.total,
            self.loss.ic,
            self.loss.ode,
            self.loss.sol,
            self.grad_norm_classical,
            self.grad_norm_quantum,
        )


@dataclass
class TrainResult:
    model: HybridModel
    trace: list[TraceRow] = field(default_factory=list)
    final_loss: LossBreakdown | None = None


def train(
    model: HybridModel,
    problem: ODEProblem,
    weights: LossWeights = LossWeights(),
    cfg: TrainConfig = TrainConfig(),
    freeze_quantum: bool = False,
) -> TrainResult:
    """Run ``cfg.epochs`` optimizer steps on the composite loss.

    The trace holds the loss and gradient norms measured before the update
    of every ``log_every``-th epoch plus the final state. The input model is
    not mutated. On a non-finite loss :class:`TrainingDiverged` is raised
    carrying the last model whose loss was finite.
    """
    require_smooth(model.act)
    opt = cfg.make_optimizer()
    params = model.flatten()
    current = model.copy()
    trace: list[TraceRow] = []

    def measure(m, epoch):
        try:
            loss, g_c, g_q = total_loss_and_grad(m, problem, weights)
        except NumericError as err:
            raise TrainingDiverged(
                f"epoch {epoch}: {err}", last_good_model=last_good, trace=trace, epoch=epoch
            ) from err
        g_q_flat = np.concatenate([g.ravel() for g in g_q])
        if not (math.isfinite(loss.total) and np.all(np.isfinite(g_c)) and np.all(np.isfinite(g_q_flat))):
            raise TrainingDiverged(
                f"non-finite loss or gradient at epoch {epoch}",
                last_good_model=last_good,
                trace=trace,
                epoch=epoch,
            )
        return loss, g_c, g_q_flat

    last_good = current
    for epoch in range(cfg.epochs):
        loss, g_c, g_q = measure(current, epoch)
        last_good = current
        if epoch % cfg.log_every == 0:
            row = TraceRow(epoch, loss, float(np.linalg.norm(g_c)), float(np.linalg.norm(g_q)))
            trace.append(row)
            log.debug("epoch %d loss %.6e", epoch, loss.total)
        if freeze_quantum:
            g_q = np.zeros_like(g_q)
        params = opt.step(params, np.concatenate([g_c, g_q]))
        if not np.all(np.isfinite(params)):
            raise TrainingDiverged(
                f"non-finite parameters after epoch {epoch}",
                last_good_model=last_good,
                trace=trace,
                epoch=epoch,
            )
        current = model.with_flat(params)

    loss, g_c, g_q = measure(current, cfg.epochs)
    trace.append(TraceRow(cfg.epochs, loss, float(np.linalg.norm(g_c)), float(np.linalg.norm(g_q))))
    return TrainResult(current, trace, loss)


def max_abs_error(model: HybridModel, problem: ODEProblem, points: int = 101) -> float:
    """Largest absolute deviation from the analytic solution on a uniform grid."""
    if problem.analytic is None:
        raise ConfigurationError(f"problem {problem.name!r} has no analytic solution")
    t = np.linspace(problem.t0, problem.t_end, points)
    y, _ = model.evaluate(t)
    return float(np.max(np.abs(y - problem.analytic(t))))
