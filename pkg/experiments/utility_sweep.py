#!/usr/bin/env python
"""
Utility versus delay cost - optimal TBP mechanism against the no-information,
full-information and best static benchmarks
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from benchmarks import benchmark_suite
from errors import ParameterDomainError
from model import ModelParams
from solver import algorithm1
from .base_sweep import BaseSweep, SweepResult

logger = logging.getLogger(__name__)

DOMINANCE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ComparisonPoint:
    c: float
    optimal: float
    no_info: float
    full_info: float
    static_: float
    improvement_pct: Optional[float]
    static_rho_hat: float = 0.0
    static_dp_obeys: Optional[bool] = None
    n_p_star: int = 0
    q_star: float = 0.0

    @property
    def best_benchmark(self) -> float:
        return max(self.no_info, self.full_info, self.static_)

    @property
    def dominates(self) -> bool:
        return self.optimal >= self.best_benchmark - DOMINANCE_TOLERANCE


def improvement_pct(optimal: float, best_benchmark: float) -> Optional[float]:
    """Relative gain over the best benchmark in percent; None when that benchmark is 0"""
    if best_benchmark == 0:
        return None
    return 100.0 * (optimal - best_benchmark) / best_benchmark


def evaluate_comparison_point(params: ModelParams) -> ComparisonPoint:
    solved = algorithm1(params)
    suite = benchmark_suite(params)
    return ComparisonPoint(
        c=params.c,
        optimal=solved.optimal_utility,
        no_info=suite.no_info_utility,
        full_info=suite.full_info_utility,
        static_=suite.static_utility,
        improvement_pct=improvement_pct(solved.optimal_utility, suite.best()),
        static_rho_hat=suite.static_rho_hat,
        static_dp_obeys=suite.static_dp_obeys,
        n_p_star=solved.n_p_star,
        q_star=solved.q_star,
    )


class UtilitySweep(BaseSweep):
    """Principal's utility across delay costs for fixed (mu, q, T)"""

    evaluate = staticmethod(evaluate_comparison_point)

    def __init__(self):
        super().__init__(mode="utility-vs-c", title="Utility vs delay cost")

    def _jobs(self, params_base: ModelParams = None, c_grid=None, **_) -> List[ModelParams]:
        c_grid = np.asarray(c_grid, dtype=float)
        if c_grid.ndim != 1 or len(c_grid) == 0:
            raise ParameterDomainError("points", "c grid must be a non-empty vector")
        if c_grid.min() < 0.0 or c_grid.max() > 1.0:
            raise ParameterDomainError("c", "every grid value must lie in [0, 1]")
        return [params_base.with_c(float(c)) for c in c_grid]

    def _row(self, index: int, point: ComparisonPoint) -> Dict[str, Any]:
        return {
            "index": index,
            "c": point.c,
            "optimal": point.optimal,
            "no_info": point.no_info,
            "full_info": point.full_info,
            "static": point.static_,
            "static_rho_hat": point.static_rho_hat,
            "static_dp_obeys": point.static_dp_obeys,
            "improvement_pct": point.improvement_pct,
            "n_p_star": point.n_p_star,
            "q_star": point.q_star,
        }

    def _summarize(self, points: List[ComparisonPoint], **options) -> Dict[str, Any]:
        rated = [p for p in points if p.improvement_pct is not None]
        peak = max(rated, key=lambda p: p.improvement_pct) if rated else None
        violations = [p.c for p in points if not p.dominates]
        if violations:
            logger.warning(f"⚠️ Optimal mechanism below a benchmark at c={violations}")
        return {
            "points": len(points),
            "max_improvement_pct": peak.improvement_pct if peak else None,
            "max_improvement_c": peak.c if peak else None,
            "dominance_violations": len(violations),
        }


def utility_vs_c(params_base: ModelParams, c_grid, workers: int = None) -> SweepResult:
    return create_utility_sweep().run(workers=workers, params_base=params_base, c_grid=c_grid)


# Factory function for easy import
def create_utility_sweep():
    """Create and return a utility-vs-c sweep instance"""
    return UtilitySweep()
