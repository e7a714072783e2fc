"""
Optimal mechanism computation - tau^No, the per-threshold silence cap and the
threshold search over TBP mechanisms, plus its accelerated variant which only
checks the constraint at tau^No once n_p reaches it.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import DegenerateCaseError
from mechanisms import TbpMechanism, tbp_expected_utility, tbp_obedience
from model import JumpTables, ModelParams, geometric_sum, jump_tables

logger = logging.getLogger(__name__)

SMALL_Q = 1e-12
BREAK_MARGIN = 1e-12
COST_TIE = 1e-12


@dataclass(frozen=True)
class SolveResult:
    mechanism: TbpMechanism
    optimal_utility: float
    tau_no: int
    binding_constraint_time: Optional[int]

    @property
    def n_p_star(self) -> int:
        return self.mechanism.n_p

    @property
    def q_star(self) -> float:
        return self.mechanism.q_np

    @property
    def k_star(self) -> float:
        return self.mechanism.k_star

    def to_dict(self) -> dict:
        return {
            "n_p_star": self.n_p_star,
            "q_star": self.q_star,
            "k_star": self.k_star,
            "optimal_utility": self.optimal_utility,
            "tau_no": self.tau_no,
            "binding_constraint_time": self.binding_constraint_time,
        }


def _no_info_cost_vector(params: ModelParams) -> np.ndarray:
    """Expected detector cost of declaring at tau = 1..T+1 without information"""
    T, mu, q, c = params.T, params.mu, params.q, params.c
    tau = np.arange(1, T + 2)
    if q < SMALL_Q:
        tables = jump_tables(params)
        return tables.surv[tau] + c * tables.cum_cdf[tau - 1]
    false_alarm = np.append(mu * (1.0 - q) ** np.arange(T), 0.0)
    return false_alarm + c * (tau - 1) - c * mu * geometric_sum(q, tau - 1)


def no_info_expected_cost(params: ModelParams, tau: int) -> float:
    if not 1 <= tau <= params.T + 1:
        raise IndexError(f"tau={tau} outside 1..{params.T + 1}")
    return float(_no_info_cost_vector(params)[tau - 1])


def tau_no(params: ModelParams) -> int:
    """Earliest declaration time minimizing the no-information cost; T+1 means never"""
    if params.c == 0:
        return params.T + 1
    costs = _no_info_cost_vector(params)
    # costs within COST_TIE of the minimum are ties
    return int(np.flatnonzero(costs <= costs.min() + COST_TIE)[0]) + 1


def _cap_vector(tables: JumpTables, c: float, n_p: int, ts: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return (tables.surv[ts] / c - (tables.cum_cdf[n_p - 1] - tables.cum_cdf[ts - 1])) / tables.cdf[n_p]


def q_cap(params: ModelParams, n_p: int, t: int) -> float:
    """Largest q_np keeping the time-t obedience constraint of (n_p, q_np); not clamped"""
    if not 1 <= t <= n_p <= params.T:
        raise IndexError(f"need 1 <= t <= n_p <= T (got t={t}, n_p={n_p}, T={params.T})")
    tables = jump_tables(params)
    if params.c == 0:
        raise DegenerateCaseError("q_cap undefined for c = 0")
    if tables.cdf[n_p] == 0:
        raise DegenerateCaseError(f"q_cap undefined: P(theta <= {n_p}) = 0")
    return float(_cap_vector(tables, params.c, n_p, np.array([t]))[0])


def _finalize(params: ModelParams, n_p: int, q_np: float, tau: int) -> SolveResult:
    mechanism = TbpMechanism.build(n_p, q_np, params.T)
    report = tbp_obedience(params, mechanism)
    binding = report.binding_times[0] if report.binding_times else None
    return SolveResult(
        mechanism=mechanism,
        optimal_utility=tbp_expected_utility(params, mechanism),
        tau_no=tau,
        binding_constraint_time=binding,
    )


def _search(params: ModelParams, tau: Optional[int]) -> tuple:
    """Threshold loop; with tau set, caps for n_p >= tau are read only at t = tau"""
    tables = jump_tables(params)
    c = params.c
    q_np = np.inf
    for n_p in range(1, params.T + 1):
        if tables.cdf[n_p] == 0:
            q_np = np.inf
            continue
        if tau is not None and n_p >= tau:
            q_np = float(_cap_vector(tables, c, n_p, np.array([tau]))[0])
        else:
            q_np = float(_cap_vector(tables, c, n_p, np.arange(1, n_p + 1)).min())
        logger.debug(f"n_p={n_p}: cap {q_np:.6g}")
        if q_np < 1.0 - BREAK_MARGIN:
            return n_p, max(q_np, 0.0)
    return params.T, min(q_np, 1.0)


def _solve(params: ModelParams, fast: bool) -> SolveResult:
    tau = tau_no(params)
    if params.c == 0:
        logger.warning("⚠️ c = 0: waiting is free, full silence (T, 1) is optimal")
        return _finalize(params, params.T, 1.0, tau)
    n_p, q_np = _search(params, tau if fast else None)
    result = _finalize(params, n_p, q_np, tau)
    logger.debug(
        f"✅ Optimal TBP mechanism: n_p={result.n_p_star}, q={result.q_star:.6g}, "
        f"utility={result.optimal_utility:.6g}, tau_no={tau}"
    )
    return result


def algorithm1(params: ModelParams) -> SolveResult:
    """Optimal TBP mechanism by raising n_p until the tightest cap drops below 1"""
    return _solve(params, fast=False)


def algorithm1_fast(params: ModelParams) -> SolveResult:
    return _solve(params, fast=True)
