"""Hybrid classical/quantum physics-informed solver for first-order ODE systems."""

from .hybrid import HybridModel, eval_mac, grad_classical, grad_quantum, init_hybrid
from .losses import LossBreakdown, LossWeights, loss_ic, loss_ode, loss_sol, total_loss_and_grad
from .mlp import Activation, MLPParams, init_mlp, mlp_backprop, mlp_forward, mlp_forward_dual
from .problems import ODEProblem, builtin_problems, get_problem
from .qnode import Observable, QNodeConfig, expectation, grad_parameter_shift, prepare_qnode_state
from .training import TrainConfig, train

__all__ = [
    "Activation",
    "HybridModel",
    "LossBreakdown",
    "LossWeights",
    "MLPParams",
    "ODEProblem",
    "Observable",
    "QNodeConfig",
    "TrainConfig",
    "builtin_problems",
    "eval_mac",
    "expectation",
    "get_problem",
    "grad_classical",
    "grad_parameter_shift",
    "grad_quantum",
    "init_hybrid",
    "init_mlp",
    "loss_ic",
    "loss_ode",
    "loss_sol",
    "mlp_backprop",
    "mlp_forward",
    "mlp_forward_dual",
    "prepare_qnode_state",
    "total_loss_and_grad",
    "train",
]
