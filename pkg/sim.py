"""
Monte-Carlo simulation of the principal-detector interaction

Every episode draws from its own generator, PCG64 seeded by
SeedSequence(seed, spawn_key=(episode,)), so results depend only on the seed and
the episode index, never on how episodes are split across workers.
"""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from detector import solve_dp
from errors import ParameterDomainError
from mechanisms import SilentPathPolicy
from model import Episode, ModelParams, jump_tables
from workers import run_batched

logger = logging.getLogger(__name__)

OBEDIENT = "obedient"
DP_BEST_RESPONSE = "dp_best_response"
DETECTOR_MODES = (OBEDIENT, DP_BEST_RESPONSE)

GENERATOR = "numpy PCG64 via SeedSequence(seed, spawn_key=(episode,))"
CHUNK_EPISODES = 10_000
SEED_MODULUS = 2 ** 64


@dataclass(frozen=True)
class SimConfig:
    n_episodes: int
    seed: int
    detector_mode: str = OBEDIENT

    def __post_init__(self):
        if isinstance(self.n_episodes, bool) or not isinstance(self.n_episodes, int) or self.n_episodes < 1:
            raise ParameterDomainError("episodes", f"must be a positive integer (got {self.n_episodes!r})")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ParameterDomainError("seed", f"must be an integer (got {self.seed!r})")
        if self.detector_mode not in DETECTOR_MODES:
            raise ParameterDomainError("mode", f"must be one of {DETECTOR_MODES} (got {self.detector_mode!r})")


@dataclass(frozen=True)
class SimReport:
    n_episodes: int
    mean_principal_utility: float
    stderr_utility: Optional[float]
    mean_detector_cost: float
    stderr_cost: Optional[float]
    false_alarm_rate: float
    mean_delay: float
    generator: str = GENERATOR

    def to_dict(self) -> dict:
        return {
            "n_episodes": self.n_episodes,
            "mean_principal_utility": self.mean_principal_utility,
            "stderr_utility": self.stderr_utility,
            "mean_detector_cost": self.mean_detector_cost,
            "stderr_cost": self.stderr_cost,
            "false_alarm_rate": self.false_alarm_rate,
            "mean_delay": self.mean_delay,
            "generator": self.generator,
        }


def episode_rng(seed: int, episode: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(seed % SEED_MODULUS, spawn_key=(episode,))
    return np.random.Generator(np.random.PCG64(sequence))


def theta_from_uniform(params: ModelParams, u: float) -> int:
    """Inverse cdf: the smallest theta with P(jump <= theta) > u"""
    cdf = jump_tables(params).cdf[1:params.T + 2]
    return int(np.searchsorted(cdf, u, side="right")) + 1


def sample_theta(params: ModelParams, rng: np.random.Generator) -> int:
    return theta_from_uniform(params, rng.random())


def run_episode(
    params: ModelParams,
    policy: SilentPathPolicy,
    mode: str,
    rng: np.random.Generator,
    wait_is_optimal: Optional[np.ndarray] = None,
) -> Episode:
    """Play one episode; uniforms are drawn as one vector of T+1 so theta and messages share a stream

    wait_is_optimal may be passed in to skip re-solving the DP for every episode.
    """
    if mode not in DETECTOR_MODES:
        raise ParameterDomainError("mode", f"must be one of {DETECTOR_MODES} (got {mode!r})")
    if mode == DP_BEST_RESPONSE and wait_is_optimal is None:
        wait_is_optimal = solve_dp(params, policy, with_thresholds=False).wait_is_optimal

    u = rng.random(params.T + 1)
    theta = theta_from_uniform(params, u[0])
    tau = params.T + 1
    for t in range(1, params.T + 1):
        good = t < theta
        silence = policy.rho_g[t - 1] if good else policy.rho_b[t - 1]
        if u[t] >= silence:
            tau = t
            break
        if mode == DP_BEST_RESPONSE and not wait_is_optimal[t - 1]:
            tau = t
            break
    return Episode.realize(theta, tau, params.c)


class _Chunk(NamedTuple):
    params: ModelParams
    policy: SilentPathPolicy
    mode: str
    seed: int
    start: int
    stop: int
    wait_is_optimal: Optional[np.ndarray]


def _run_chunk(chunk: _Chunk) -> np.ndarray:
    """(theta, tau, cost, utility) rows for episodes start..stop-1"""
    rows = np.empty((chunk.stop - chunk.start, 4))
    for i, episode in enumerate(range(chunk.start, chunk.stop)):
        played = run_episode(
            chunk.params, chunk.policy, chunk.mode, episode_rng(chunk.seed, episode), chunk.wait_is_optimal
        )
        rows[i] = (played.theta, played.tau, played.detector_cost, played.principal_utility)
    return rows


def _stderr(values: np.ndarray) -> Optional[float]:
    if len(values) < 2:
        return None
    return float(values.std(ddof=1) / np.sqrt(len(values)))


def estimate(
    params: ModelParams,
    policy: SilentPathPolicy,
    config: SimConfig,
    workers: Optional[int] = None,
) -> SimReport:
    if policy.T != params.T:
        raise ParameterDomainError("policy", f"policy horizon {policy.T} != T={params.T}")
    wait_ok = None
    if config.detector_mode == DP_BEST_RESPONSE:
        wait_ok = solve_dp(params, policy, with_thresholds=False).wait_is_optimal

    chunks: List[_Chunk] = [
        _Chunk(params, policy, config.detector_mode, config.seed, start, min(start + CHUNK_EPISODES, config.n_episodes), wait_ok)
        for start in range(0, config.n_episodes, CHUNK_EPISODES)
    ]
    logger.info(f"🚀 Simulating {config.n_episodes} episodes ({config.detector_mode}, seed {config.seed})")
    rows = np.concatenate(run_batched(_run_chunk, chunks, workers=workers))

    theta, tau, cost, utility = rows.T
    report = SimReport(
        n_episodes=config.n_episodes,
        mean_principal_utility=float(utility.mean()),
        stderr_utility=_stderr(utility),
        mean_detector_cost=float(cost.mean()),
        stderr_cost=_stderr(cost),
        false_alarm_rate=float((tau < theta).mean()),
        mean_delay=float(np.maximum(tau - theta, 0.0).mean()),
    )
    logger.info(
        f"✅ Simulation done: utility {report.mean_principal_utility:.6g}, "
        f"detector cost {report.mean_detector_cost:.6g}, false alarms {report.false_alarm_rate:.4f}"
    )
    return report
