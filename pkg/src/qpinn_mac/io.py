"""CSV artifacts and versioned JSON model snapshots.

Floats are written with ``repr`` (shortest round-trip form), so reruns are
byte-identical and snapshots reload bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import SnapshotVersionError
from .hybrid import HybridModel
from .mlp import MLPParams
from .qnode import QNodeConfig

SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def solution_table(model: HybridModel, t: np.ndarray, reference=None, domain=None):
    """Header and rows of a solution CSV.

    Reference and error columns appear only with a ``reference`` solution.
    With ``domain=(t0, t_end)`` a trailing ``extrapolated`` flag column marks
    grid points outside the training interval.
    """
    t = np.asarray(t, dtype=np.float64)
    y, _ = model.evaluate(t)
    m = model.dim
    header = ["t"] + [f"y_mac_{j + 1}" for j in range(m)]
    cols = [t[:, None], y]
    if reference is not None:
        ref = reference(t)
        header += [f"y_ref_{j + 1}" for j in range(m)] + [f"abs_err_{j + 1}" for j in range(m)]
        cols += [ref, np.abs(y - ref)]
    table = np.concatenate(cols, axis=1)
    rows = [list(r) for r in table]
    if domain is not None:
        header.append("extrapolated")
        lo, hi = domain
        for r, ti in zip(rows, t):
            r.append(bool(ti < lo or ti > hi))
    return header, rows


def model_to_dict(model: HybridModel) -> dict:
    return {
        "activation": model.act.value,
        "observable": model.obs.value,
        "n_qubits": model.qnode_config.num_qubits,
        "depth": model.qnode_config.depth,
        "phi": model.qnode_config.phi,
        "mlp": [
            {"weight": w.tolist(), "bias": b.tolist()}
            for w, b in zip(model.mlp.weights, model.mlp.biases)
        ],
        "qnodes": [a.tolist() for a in model.qnode_params],
    }


def model_from_dict(d: dict) -> HybridModel:
    mlp = MLPParams(
        [np.array(layer["weight"], dtype=np.float64) for layer in d["mlp"]],
        [np.array(layer["bias"], dtype=np.float64) for layer in d["mlp"]],
    )
    qcfg = QNodeConfig(int(d["n_qubits"]), int(d["depth"]), float(d["phi"]))
    return HybridModel(
        mlp, d["activation"], qcfg, [np.array(a, dtype=np.float64) for a in d["qnodes"]], d["observable"]
    )


def save_snapshot(path, model: HybridModel, problem: dict | None = None, meta: dict | None = None) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "model": model_to_dict(model)}
    if problem is not None:
        doc["problem"] = problem
    if meta:
        doc["meta"] = meta
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_snapshot(path) -> tuple[HybridModel, dict | None]:
    doc = json.loads(Path(path).read_text())
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SnapshotVersionError(
            f"snapshot {path} has schema_version {version!r}; this build reads version "
            f"{SCHEMA_VERSION}. Migrate the file (re-export it with a matching build) before solving."
        )
    return model_from_dict(doc["model"]), doc.get("problem")
