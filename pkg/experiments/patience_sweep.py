#!/usr/bin/env python
"""
Patience enhancement maps - eta = n_p* - tau^No over a grid of two free parameters
with the third held fixed
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from errors import ParameterDomainError
from model import ModelParams
from solver import algorithm1_fast
from .base_sweep import BaseSweep, SweepResult

logger = logging.getLogger(__name__)

ETA_THRESHOLDS = (1, 4, 7, 10)
DEFAULT_HORIZON = 100

# free parameters for each fixed one, outer loop first
FREE_PARAMETERS = {
    "c": ("mu", "q"),
    "q": ("mu", "c"),
    "mu": ("q", "c"),
}


@dataclass(frozen=True)
class PatienceCell:
    params: ModelParams
    tau_no: int
    n_p_star: int
    q_star: float
    eta: int
    tau_no_is_horizon: bool


def interior_grid(grid_n: int) -> np.ndarray:
    """grid_n points 1/(n+1), ..., n/(n+1) of the open unit interval"""
    return np.arange(1, grid_n + 1) / (grid_n + 1)


def evaluate_patience_cell(params: ModelParams) -> PatienceCell:
    result = algorithm1_fast(params)
    horizon = result.tau_no > params.T
    return PatienceCell(
        params=params,
        tau_no=result.tau_no,
        n_p_star=result.n_p_star,
        q_star=result.q_star,
        eta=0 if horizon else result.n_p_star - result.tau_no,
        tau_no_is_horizon=horizon,
    )


def threshold_percentages(cells: List[PatienceCell]) -> Dict[str, float]:
    """Share of cells with eta at or above each threshold; tau^No = T+1 cells count in none"""
    counted = np.array([cell.eta for cell in cells if not cell.tau_no_is_horizon])
    return {
        f"eta_ge_{k}_pct": 100.0 * float((counted >= k).sum()) / len(cells)
        for k in ETA_THRESHOLDS
    }


class PatienceSweep(BaseSweep):
    """eta maps over two free parameters and the threshold percentage table"""

    evaluate = staticmethod(evaluate_patience_cell)

    def __init__(self):
        super().__init__(mode="patience", title="Patience sweep")

    def _jobs(self, fixed: str = "c", fixed_value: float = 0.1, grid_n: int = 101, T: int = DEFAULT_HORIZON, **_) -> List[ModelParams]:
        if fixed not in FREE_PARAMETERS:
            raise ParameterDomainError("fix", f"fixed parameter must be one of {sorted(FREE_PARAMETERS)} (got {fixed!r})")
        if not 0.0 <= fixed_value <= 1.0:
            raise ParameterDomainError("fix", f"fixed value must lie in [0, 1] (got {fixed_value})")
        if grid_n < 2:
            raise ParameterDomainError("grid", f"must be at least 2 (got {grid_n})")

        outer, inner = FREE_PARAMETERS[fixed]
        values = interior_grid(grid_n)
        jobs = []
        for a in values:
            for b in values:
                point = {fixed: float(fixed_value), outer: float(a), inner: float(b)}
                jobs.append(ModelParams(mu=point["mu"], q=point["q"], T=T, c=point["c"]))
        return jobs

    def _row(self, index: int, cell: PatienceCell) -> Dict[str, Any]:
        return {
            "index": index,
            "mu": cell.params.mu,
            "q": cell.params.q,
            "c": cell.params.c,
            "T": cell.params.T,
            "tau_no": cell.tau_no,
            "n_p_star": cell.n_p_star,
            "q_star": cell.q_star,
            "eta": cell.eta,
            "tau_no_is_horizon": cell.tau_no_is_horizon,
        }

    def _summarize(self, cells: List[PatienceCell], **options) -> Dict[str, Any]:
        summary: Dict[str, Any] = {"cells": len(cells)}
        summary.update(threshold_percentages(cells))
        summary["tau_no_is_horizon_cells"] = sum(cell.tau_no_is_horizon for cell in cells)
        summary["min_eta"] = min(cell.eta for cell in cells)
        return summary

    def _arrange(self, cells: List[PatienceCell], grid_n: int = 101, **_) -> List[List[PatienceCell]]:
        return [cells[i:i + grid_n] for i in range(0, len(cells), grid_n)]


def patience_sweep(fixed: str, fixed_value: float, grid_n: int, T: int = DEFAULT_HORIZON, workers: int = None) -> Tuple[SweepResult, Dict[str, float]]:
    """Evaluate eta on a grid_n x grid_n interior grid; returns the sweep and the threshold percentages"""
    result = create_patience_sweep().run(workers=workers, fixed=fixed, fixed_value=fixed_value, grid_n=grid_n, T=T)
    percentages = {k: v for k, v in result.summary.items() if k.startswith("eta_ge_")}
    return result, percentages


# Factory function for easy import
def create_patience_sweep():
    """Create and return a patience sweep instance"""
    return PatienceSweep()
