"""Per-step records, run series, error norms, and convergence-slope fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class StepRecord:
    """Diagnostics of one accepted step (step 0 echoes the initial state).

    ``energy`` is the true discrete free energy F[phi]; ``energy_target``
    is the functional the scheme provably dissipates: the predicted target
    for the supplementary-variable schemes, the modified energy for
    SAV-CN, and F itself for FICN.
    """

    step: int
    t: float
    energy: float
    energy_target: float
    mass: float
    alpha: float
    beta: float
    solver_iters: int
    dissipation: float
    wall_ns: int


@dataclass
class RunSeries:
    """Everything a single trajectory produced."""

    config: object  # SchemeConfig echo
    records: list[StepRecord] = field(default_factory=list)
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    phi_final: Optional[np.ndarray] = None

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def masses(self) -> np.ndarray:
        return np.array([r.mass for r in self.records])


def error_norms(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """Discrete L2 and max-norm of u - v on the unit square."""
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    d = u - v
    l2 = float(np.sqrt(np.mean(d * d)))  # h^2 sum = mean on [0,1]^2
    return l2, float(np.max(np.abs(d)))


def order_fit(errors: Sequence[float], ratio: float = 2.0) -> float:
    """Least-squares slope of log(error) against log(tau).

    ``errors`` comes from a step-refinement sequence where tau shrinks by
    ``ratio`` between consecutive entries; a slope of p means O(tau^p).
    """
    errs = np.asarray(errors, dtype=float)
    if errs.size < 2:
        raise ValueError("need at least two errors to fit a slope")
    if np.any(errs <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    if ratio <= 1:
        raise ValueError(f"refinement ratio must exceed 1, got {ratio}")
    log_tau = -np.log(ratio) * np.arange(errs.size)
    slope = np.polyfit(log_tau, np.log(errs), 1)[0]
    return float(slope)
