"""Deterministic grid search over drive and bin parameters.

Every grid point is evaluated exactly once, in the order generated from the
axes; results are reported sorted by objective (descending) with a stable
tie-break on the grid index, so parallel and sequential execution produce
identical tables.  Per-point failures are recorded, not fatal.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .integrator import propagate
from .metrology import crb, extract_moments, jz_sensitivity
from .model import BinSpec, SystemConfig
from .wigner import wigner_grid

OBJECTIVES = ("negativity", "jz_improvement", "crb_improvement")
AXIS_NAMES = ("alpha", "t0", "tau", "Gamma", "gamma_D", "M")


@dataclass(frozen=True)
class SweepPlan:
    axes: tuple  # ordered ((name, (values...)), ...)
    objective: str = "negativity"
    budget: int = 10_000
    N_b: float = 100.0  # used by the metrology objectives

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("sweep needs at least one axis")
        for name, values in self.axes:
            if name not in AXIS_NAMES:
                raise ConfigError(f"unknown sweep axis {name!r}")
            if len(values) == 0:
                raise ConfigError(f"axis {name!r} has no values")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}")
        n = self.n_points
        if n > self.budget:
            raise ConfigError(f"grid has {n} points, over budget {self.budget}")

    @property
    def n_points(self) -> int:
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n


@dataclass(frozen=True)
class SweepRow:
    index: int
    params: dict
    objective: float
    n_a: float
    cutoff: int
    trace_drift: float
    artifact: str | None = None
    error: str | None = None


def _point_id(params: dict) -> str:
    blob = json.dumps({k: repr(v) for k, v in sorted(params.items())})
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _apply_params(base_cfg: SystemConfig, base_bin: BinSpec, params: dict):
    cfg_kwargs = {}
    bin_kwargs = {}
    for name, val in params.items():
        if name in ("t0", "tau"):
            bin_kwargs[name] = float(val)
        elif name == "M":
            cfg_kwargs[name] = int(val)
        elif name == "alpha":
            cfg_kwargs[name] = complex(val)
        else:
            cfg_kwargs[name] = float(val)
    cfg = dataclasses.replace(base_cfg, **cfg_kwargs) if cfg_kwargs else base_cfg
    bin = dataclasses.replace(base_bin, **bin_kwargs) if bin_kwargs else base_bin
    return cfg, bin


def _evaluate_point(index: int, params: dict, base_cfg: SystemConfig,
                    base_bin: BinSpec, plan: SweepPlan, out_dir: Path | None):
    try:
        cfg, bin = _apply_params(base_cfg, base_bin, params)
        traj = propagate(cfg, bin)
        mom = extract_moments(traj.rho_v)
        if plan.objective == "negativity":
            value = wigner_grid(traj.rho_v).negativity
        else:
            baseline = bin.tau * abs(cfg.alpha_phys) ** 2
            if plan.objective == "jz_improvement":
                value = jz_sensitivity(mom, plan.N_b, baseline_na=baseline).improvement
            else:
                dphi_cr = crb(traj.rho_v, plan.N_b)
                sn = 1.0 / math.sqrt(baseline + plan.N_b)
                value = sn / dphi_cr - 1.0
        artifact = None
        if out_dir is not None:
            from .serialize import write_density_matrix

            pdir = out_dir / "artifacts" / _point_id(params)
            pdir.mkdir(parents=True, exist_ok=True)
            artifact = str(pdir / "rho_v.json")
            write_density_matrix(traj.rho_v, artifact)
        return SweepRow(
            index=index,
            params=params,
            objective=float(value),
            n_a=mom.N_a,
            cutoff=traj.diagnostics.cutoff,
            trace_drift=traj.diagnostics.trace_drift_max,
            artifact=artifact,
        )
    except Exception as exc:  # per-point failures recorded, not fatal
        return SweepRow(
            index=index,
            params=params,
            objective=float("nan"),
            n_a=float("nan"),
            cutoff=-1,
            trace_drift=float("nan"),
            error=f"{type(exc).__name__}: {exc}",
        )


def max_workers() -> int:
    env = os.environ.get("CWL_THREADS", "")
    if env.strip():
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"CWL_THREADS must be an integer, got {env!r}") from exc
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def run_sweep(plan: SweepPlan, base_cfg: SystemConfig,
              base_bin: BinSpec | None = None, out_dir=None,
              parallel: bool = True) -> list[SweepRow]:
    """Evaluate the grid and return rows sorted by objective, best first.

    ``base_bin`` provides the bin fields not swept over (required unless both
    t0 and tau are axes).  ``CWL_THREADS`` caps the worker count.
    """
    names = [name for name, _ in plan.axes]
    if base_bin is None:
        if "t0" not in names or "tau" not in names:
            raise ConfigError("base_bin required unless both t0 and tau are swept")
        base_bin = BinSpec(t0=0.0, tau=1.0)
    out_path = Path(out_dir) if out_dir is not None else None

    points = []
    for index, combo in enumerate(product(*(vals for _, vals in plan.axes))):
        points.append((index, dict(zip(names, combo))))

    nw = max_workers() if parallel else 1
    if nw > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            rows = list(
                pool.map(
                    lambda p: _evaluate_point(p[0], p[1], base_cfg, base_bin, plan, out_path),
                    points,
                )
            )
    else:
        rows = [
            _evaluate_point(i, params, base_cfg, base_bin, plan, out_path)
            for i, params in points
        ]

    def sort_key(row: SweepRow):
        bad = 1 if (row.error is not None or not np.isfinite(row.objective)) else 0
        val = -row.objective if not bad else 0.0
        return (bad, val, row.index)

    return sorted(rows, key=sort_key)
