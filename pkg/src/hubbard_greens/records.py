"""Run records and CSV exports.

All files are written atomically (temp file + rename) with LF line endings,
``.`` decimals and 17 significant digits, so identical runs give identical
bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .fock import MOMENTA, PoleData, SpectrumSeries
from .photonic import AnsatzParams
from .vqe import VqeTrace

SCHEMA = "hubbard-greens/run-record/1"


def fmt(x) -> str:
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, dumps(obj))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def spectrum_csv(series: SpectrumSeries, momenta=MOMENTA) -> str:
    cols = ["omega"] + [f"A_k{k}" for k in momenta]
    lines = [",".join(cols)]
    for i, w in enumerate(series.omega_grid):
        lines.append(",".join([fmt(w)] + [fmt(series.values[k][i]) for k in momenta]))
    return "\n".join(lines) + "\n"


def sigma_csv(grid, sigma: dict) -> str:
    lines = ["omega,sigma_k0,sigma_kpi"]
    for i, w in enumerate(grid):
        lines.append(",".join([fmt(w), fmt(sigma["0"][i]), fmt(sigma["pi"][i])]))
    return "\n".join(lines) + "\n"


TRACE_COLUMNS = ("sweep", "theta2", "theta4", "theta5", "theta6", "energy", "stderr")


def trace_csv(trace: VqeTrace) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for r in trace.sweeps:
        p = r.params
        lines.append(",".join([str(r.sweep), fmt(p.theta2), fmt(p.theta4), fmt(p.theta5), fmt(p.theta6),
                               fmt(r.energy), fmt(r.stderr)]))
    return "\n".join(lines) + "\n"


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def pole_dict(p: PoleData, ground_energy: float) -> dict:
    return {
        "sector": p.sector,
        "k": p.k,
        "energy": p.energy,
        "omega": p.position(ground_energy),
        "weight": p.weight,
        "energy_stderr": p.energy_stderr,
        "weight_stderr": p.weight_stderr,
        "provenance": p.provenance,
    }


def params_dict(p: AnsatzParams) -> dict:
    return p.as_dict()


def trace_dict(trace: VqeTrace) -> dict:
    cfg = trace.config
    return {
        "sector": cfg.sector,
        "variant": cfg.variant,
        "converged": trace.converged,
        "n_sweeps": trace.n_sweeps,
        "rel_tol": cfg.rel_tol,
        "param_tol": cfg.angle_tol,
        "sweep_order": list(cfg.sweep_order),
        "final_energy": trace.final_energy,
        "final_stderr": trace.final_stderr,
        "final_params": params_dict(trace.final_params),
        "param_stderr": dict(trace.param_stderr),
        "sweeps": [
            {"sweep": r.sweep, "params": params_dict(r.params), "energy": r.energy, "stderr": r.stderr}
            for r in trace.sweeps
        ],
        "updates": [
            {"sweep": r.sweep, "parameter": r.parameter, "params": params_dict(r.params), "energy": r.energy,
             "stderr": r.stderr}
            for r in trace.updates
        ],
    }


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_record(command: str, config: dict, **sections) -> dict:
    rec = {"schema": SCHEMA, "tool_version": __version__, "command": command, "config": config}
    rec.update(sections)
    return rec
