"""Gradient-scaling sweeps over qubit count and circuit depth.

For every ``(n_qubits, depth)`` cell the sweep draws ``samples`` random
parameter sets (QNode angles uniform on [0, 2*pi), MLP re-initialized),
differentiates a probe loss with respect to all QNode angles, and keeps
summary statistics of one fixed gradient component and of the gradient norm.

Model kinds:

``mac``
    Hybrid model with the Z-sum observable; probe loss
    ``||y(t) - y_exact(t)||^2`` at each probe time. The component is taken
    from the gradient of the probe losses averaged over time, the norm is the
    largest per-time gradient norm.
``quantum_only_local`` / ``quantum_only_global``
    Bare QNode expectations (Z-sum or Z...Z) regressed onto a zero target,
    ``sum_j <O>_j^2``. No time dependence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .hybrid import eval_mac, init_hybrid
from .mlp import Activation
from .problems import get_problem
from .qnode import Observable, QNodeConfig, value_and_grad

MODEL_KINDS = ("mac", "quantum_only_local", "quantum_only_global")

SWEEP_HEADER = (
    "n_qubits",
    "depth",
    "sample_count",
    "var_component",
    "mean_component",
    "median_abs_norm",
    "max_norm",
)


@dataclass(frozen=True)
class SweepConfig:
    qubit_range: tuple[int, ...] = (2, 4, 6, 8, 10)
    depth_range: tuple[int, ...] = (3,)
    samples: int = 200
    seed: int = 0
    eps_grad: float = 1e-3
    model_kind: str = "mac"
    problem: str = "exp_decay"
    problem_overrides: dict = field(default_factory=dict)
    t_probe: Optional[tuple[float, ...]] = None
    hidden: tuple[int, ...] = (16, 16)
    activation: str = "tanh"
    phi: float = math.pi
    component: tuple[int, int] = (0, 0)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "qubit_range", tuple(int(n) for n in self.qubit_range))
        object.__setattr__(self, "depth_range", tuple(int(d) for d in self.depth_range))
        for name in ("qubit_range", "depth_range"):
            r = getattr(self, name)
            if not r or any(b <= a for a, b in zip(r, r[1:])) or r[0] < 1:
                raise ConfigurationError(f"{name} must be a nonempty increasing list of positive ints")
        if self.samples < 2:
            raise ConfigurationError("samples must be at least 2")
        if self.model_kind not in MODEL_KINDS:
            raise ConfigurationError(
                f"unknown model_kind {self.model_kind!r}; valid kinds: {', '.join(MODEL_KINDS)}"
            )
        if self.eps_grad < 0:
            raise ConfigurationError("eps_grad must be nonnegative")
        layer, qubit = self.component
        if not (0 <= layer < self.depth_range[0] and 0 <= qubit < self.qubit_range[0]):
            raise ConfigurationError(f"component {self.component} outside the smallest cell")

    def probe_times(self, problem) -> np.ndarray:
        if self.t_probe is None:
            return np.linspace(problem.t0, problem.t_end, 5)
        return np.asarray(self.t_probe, dtype=np.float64)


@dataclass
class GradientStats:
    n_qubits: int
    depth: int
    sample_count: int
    var_component: float
    mean_component: float
    median_abs_norm: float
    max_norm: float
    components: Optional[np.ndarray] = field(default=None, repr=False)
    norms: Optional[np.ndarray] = field(default=None, repr=False)

    def row(self) -> tuple:
        return (
            self.n_qubits,
            self.depth,
            self.sample_count,
            self.var_component,
            self.mean_component,
            self.median_abs_norm,
            self.max_norm,
        )


def sample_rng(seed: int, n_qubits: int, depth: int, index: int) -> np.random.Generator:
    """Independent stream per (seed, cell, sample) so results never depend on scheduling."""
    return np.random.default_rng(np.random.SeedSequence([seed, n_qubits, depth, index]))


def sample_gradient(cfg: SweepConfig, n_qubits: int, depth: int, index: int, problem=None):
    """One random draw: ``(component value, gradient norm)``."""
    rng = sample_rng(cfg.seed, n_qubits, depth, index)
    qcfg = QNodeConfig(n_qubits, depth, cfg.phi)
    layer, qubit = cfg.component
    if problem is None:
        problem = get_problem(cfg.problem, **cfg.problem_overrides)
    if cfg.model_kind == "mac":
        model = init_hybrid(cfg.hidden, problem.dim, qcfg, rng, Activation(cfg.activation))
        expectations, qgrads = model.expectations_and_grads()
        t = cfg.probe_times(problem)
        ev = eval_mac(model, t, expectations)
        # per-time factor multiplying grad<O>_j, shape (T, M)
        factors = 2.0 * (ev.y_mac - problem.analytic(t)) * (ev.y_hat + 1.0)
        stacked = np.stack(qgrads)  # (M, depth, N)
        per_t = factors[:, :, None, None] * stacked[None]
        norms = np.sqrt(np.sum(per_t**2, axis=(1, 2, 3)))
        return float(per_t[:, 0, layer, qubit].mean()), float(norms.max())
    obs = Observable.Z_SUM if cfg.model_kind == "quantum_only_local" else Observable.Z_GLOBAL
    grads = []
    for _ in range(problem.dim):
        angles = rng.uniform(0.0, 2 * np.pi, size=qcfg.shape)
        val, g = value_and_grad(qcfg, angles, obs)
        grads.append(2.0 * val * g)
    stacked = np.stack(grads)
    return float(stacked[0, layer, qubit]), float(np.linalg.norm(stacked))


def sample_gradient_stats(cell: tuple[int, int], cfg: SweepConfig, keep_samples: bool = False) -> GradientStats:
    n_qubits, depth = cell
    if n_qubits < 1 or depth < 1:
        raise ConfigurationError(f"invalid cell {cell}")
    problem = get_problem(cfg.problem, **cfg.problem_overrides)

    def one(i):
        return sample_gradient(cfg, n_qubits, depth, i, problem)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            draws = list(pool.map(one, range(cfg.samples)))
    else:
        draws = [one(i) for i in range(cfg.samples)]
    comps = np.array([c for c, _ in draws])
    norms = np.array([n for _, n in draws])
    return GradientStats(
        n_qubits=n_qubits,
        depth=depth,
        sample_count=cfg.samples,
        var_component=float(np.var(comps, ddof=1)),
        mean_component=float(np.mean(comps)),
        median_abs_norm=float(np.median(norms)),
        max_norm=float(np.max(norms)),
        components=comps if keep_samples else None,
        norms=norms if keep_samples else None,
    )


@dataclass
class SweepReport:
    model_kind: str
    cells: list[GradientStats]
    slope_vs_n: Optional[float]
    slope_vs_depth: Optional[float]
    envelope_constant: Optional[float]
    eps_grad: float

    def envelope(self, n_qubits, depth):
        """Fitted ``c / sqrt(depth * n_qubits)``."""
        if self.envelope_constant is None:
            return math.nan
        return self.envelope_constant / math.sqrt(depth * n_qubits)

    @property
    def bound_curve(self) -> list[float]:
        return [self.envelope(c.n_qubits, c.depth) for c in self.cells]

    @property
    def trainable_cells(self) -> list[tuple[int, int]]:
        return [(c.n_qubits, c.depth) for c in self.cells if c.median_abs_norm >= self.eps_grad]


def fit_log_slopes(cells: Sequence[GradientStats]) -> tuple[Optional[float], Optional[float]]:
    """Least-squares fit of ``ln var = a + s_n * N + s_d * depth``.

    An axis with fewer than two distinct values gets no slope (``None``).
    Cells with zero variance are left out of the fit.
    """
    usable = [c for c in cells if c.var_component > 0 and math.isfinite(c.var_component)]
    ns = sorted({c.n_qubits for c in usable})
    ds = sorted({c.depth for c in usable})
    cols = [np.ones(len(usable))]
    fit_n, fit_d = len(ns) >= 2, len(ds) >= 2
    if fit_n:
        cols.append(np.array([c.n_qubits for c in usable], dtype=float))
    if fit_d:
        cols.append(np.array([c.depth for c in usable], dtype=float))
    if len(cols) == 1:
        return None, None
    a = np.stack(cols, axis=1)
    y = np.log([c.var_component for c in usable])
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    s_n = float(coef[1]) if fit_n else None
    s_d = float(coef[-1]) if fit_d else None
    return s_n, s_d


def fit_envelope(cells: Sequence[GradientStats]) -> Optional[float]:
    """``c`` minimizing squared log-residuals of ``median_abs_norm ~ c / sqrt(depth N)``."""
    logs = [
        math.log(c.median_abs_norm) + 0.5 * math.log(c.depth * c.n_qubits)
        for c in cells
        if c.median_abs_norm > 0
    ]
    if not logs:
        return None
    return math.exp(sum(logs) / len(logs))


def run_sweep(cfg: SweepConfig, keep_samples: bool = False) -> SweepReport:
    cells = [
        sample_gradient_stats((n, d), cfg, keep_samples)
        for d, n in product(cfg.depth_range, cfg.qubit_range)
    ]
    s_n, s_d = fit_log_slopes(cells)
    return SweepReport(cfg.model_kind, cells, s_n, s_d, fit_envelope(cells), cfg.eps_grad)


@dataclass
class CellVerdict:
    n_qubits: int
    depth: int
    median_abs_norm: float
    envelope: float
    trainable: bool
    envelope_trainable: bool

    @property
    def misclassified(self) -> bool:
        return self.trainable != self.envelope_trainable


@dataclass
class TrainabilityReport:
    eps_grad: float
    envelope_constant: Optional[float]
    max_problem_size: float  # largest depth*N with c/sqrt(depth*N) >= eps_grad
    verdicts: list[CellVerdict]

    @property
    def trainable_cells(self) -> list[tuple[int, int]]:
        return [(v.n_qubits, v.depth) for v in self.verdicts if v.trainable]

    @property
    def misclassifications(self) -> int:
        return sum(v.misclassified for v in self.verdicts)


def trainability_report(report: SweepReport, eps_grad: float) -> TrainabilityReport:
    if not report.cells:
        raise ConfigurationError("sweep report has no cells")
    c = report.envelope_constant
    if c is None:
        size = 0.0
    elif eps_grad == 0:
        size = math.inf
    else:
        ratio = c / eps_grad
        size = ratio * ratio  # float multiply saturates to inf instead of raising
    verdicts = []
    for cell in report.cells:
        env = report.envelope(cell.n_qubits, cell.depth)
        verdicts.append(
            CellVerdict(
                cell.n_qubits,
                cell.depth,
                cell.median_abs_norm,
                env,
                cell.median_abs_norm >= eps_grad,
                bool(env >= eps_grad) if c is not None else False,
            )
        )
    return TrainabilityReport(eps_grad, c, size, verdicts)


def summary_dict(report: SweepReport, tr: TrainabilityReport) -> dict:
    return {
        "model_kind": report.model_kind,
        "slope_vs_n": report.slope_vs_n,
        "slope_vs_depth": report.slope_vs_depth,
        "envelope_constant": report.envelope_constant,
        "eps_grad": tr.eps_grad,
        "max_problem_size": tr.max_problem_size if math.isfinite(tr.max_problem_size) else "inf",
        "misclassifications": tr.misclassifications,
        "cells": [
            {
                "n_qubits": v.n_qubits,
                "depth": v.depth,
                "median_abs_norm": v.median_abs_norm,
                "envelope": v.envelope,
                "trainable": v.trainable,
                "envelope_trainable": v.envelope_trainable,
            }
            for v in tr.verdicts
        ],
    }
