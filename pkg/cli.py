#!/usr/bin/env python
"""
persuasion-detect - solve, benchmark, verify, simulate and sweep the principal /
quickest-detection disclosure game from the command line
"""

# Load environment variables FIRST before any other imports
import os
import sys
from dotenv import load_dotenv
load_dotenv(override=True)

import json
import math
import logging
import argparse
import traceback
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from benchmarks import benchmark_suite, best_static_rho
from detector import best_response_obeys, obedient_cost, solve_dp
from errors import (
    InvariantViolation,
    ParameterDomainError,
    PersuasionError,
    ScaleError,
    UnsupportedPolicyError,
)
from experiments import get_available_modes, get_sweep
from experiments.utility_sweep import improvement_pct
from mechanisms import (
    SilentPathPolicy,
    TbpMechanism,
    full_info_policy,
    load_mechanism,
    no_info_policy,
    silent_path_masses,
    static_policy,
    tbp_obedience,
    tbp_to_silent_path,
)
from model import ModelParams
from oracle import MAX_BRUTE_FORCE_T, MAX_ENUMERATION_T, check_detector, check_solver
from sim import DETECTOR_MODES, OBEDIENT, SimConfig, estimate
from solver import algorithm1, algorithm1_fast
from workers import run_batched

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "")
OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", "output"))

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_DOMAIN = 2
EXIT_SCALE = 3

NAMED_POLICIES = ("optimal", "full-info", "no-info", "static")
GRIDS = {
    "small": {"mu": (0.3, 0.9), "q": (0.3, 0.7), "c": (0.1, 1.0), "T": (3, 5)},
    "full": {
        "mu": (0.1, 0.3, 0.5, 0.7, 0.9),
        "q": (0.1, 0.3, 0.5, 0.7, 0.9),
        "c": (0.02, 0.1, 0.3, 0.6, 1.0),
        "T": (3, 5, 8),
    },
}


def setup_logging():
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if LOG_FILE:
        handlers.append(logging.FileHandler(LOG_FILE))
    logging.basicConfig(
        level=LOG_LEVEL,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


@dataclass(frozen=True)
class RunManifest:
    command: str
    parameters: Dict[str, Any]
    tool_version: str = TOOL_VERSION
    seed: Optional[int] = None
    timestamp: str = field(default_factory=lambda: manifest_timestamp())

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "timestamp": self.timestamp,
        }


def manifest_timestamp() -> str:
    """Fixed by SOURCE_DATE_EPOCH so repeated runs are byte-identical"""
    epoch = int(os.getenv("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, tz=timezone.utc).isoformat()


def round_floats(value: Any) -> Any:
    """12 significant digits for every float; non-finite values become null"""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return float(f"{value:.12g}") if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [round_floats(v) for v in value]
    return value


def resolve_output(out: str) -> Path:
    path = Path(out)
    if path.parent == Path("."):
        path = OUTPUT_DIR / path
    return path


def emit(document: Dict[str, Any], out: Optional[str] = None):
    text = json.dumps(round_floats(document), indent=2, ensure_ascii=False) + "\n"
    if out:
        path = resolve_output(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"💾 Saved result to {path}")
    else:
        sys.stdout.write(text)


def manifest_for(args: argparse.Namespace, seed: Optional[int] = None) -> RunManifest:
    parameters = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    return RunManifest(command=args.command, parameters=parameters, seed=seed)


def params_from(args: argparse.Namespace) -> ModelParams:
    return ModelParams(mu=args.mu, q=args.q, T=args.T, c=args.c)


# ---------------------------------------------------------------- commands

def cmd_solve(args: argparse.Namespace) -> int:
    params = params_from(args)
    logger.info(f"🚀 Solving {params} ({'fast' if args.fast else 'full'} search)")
    result = algorithm1_fast(params) if args.fast else algorithm1(params)
    report = tbp_obedience(params, result.mechanism)
    dp_obeys = best_response_obeys(params, tbp_to_silent_path(result.mechanism, params.T))
    logger.info(f"✅ n_p*={result.n_p_star}, q*={result.q_star:.6g}, utility={result.optimal_utility:.6g}")
    emit({
        "manifest": manifest_for(args).to_dict(),
        "params": params.to_dict(),
        **result.to_dict(),
        "obedience_satisfied": report.satisfied,
        "obedience_slacks": list(report.slack),
        "binding_times": report.binding_times,
        "dp_certified": dp_obeys,
    }, args.out)
    return EXIT_OK


def cmd_benchmarks(args: argparse.Namespace) -> int:
    params = params_from(args)
    logger.info(f"🚀 Evaluating benchmarks for {params}")
    suite = benchmark_suite(params)
    optimal = algorithm1(params)
    gain = improvement_pct(optimal.optimal_utility, suite.best())
    logger.info(f"✅ Optimal {optimal.optimal_utility:.6g} vs best benchmark {suite.best():.6g}")
    emit({
        "manifest": manifest_for(args).to_dict(),
        "params": params.to_dict(),
        **suite.to_dict(),
        "optimal_utility": optimal.optimal_utility,
        "best_benchmark": suite.best(),
        "improvement_pct": gain,
    }, args.out)
    return EXIT_OK


def verification_policies(params: ModelParams) -> Dict[str, SilentPathPolicy]:
    return {
        "optimal": tbp_to_silent_path(algorithm1(params).mechanism, params.T),
        "no-info": no_info_policy(params.T),
        "full-info": full_info_policy(params.T),
        "static": static_policy(params.T, best_static_rho(params)),
    }


def verify_instance(job: tuple) -> List[Dict[str, Any]]:
    params, mode, grid_step = job
    rows: List[Dict[str, Any]] = []
    if mode in ("oracle", "all"):
        rows.extend(check_solver(params, grid_step))
    if mode in ("enumerate", "all"):
        for label, policy in verification_policies(params).items():
            rows.append(check_detector(params, policy, label))
    return rows


def verification_jobs(args: argparse.Namespace) -> List[ModelParams]:
    if args.grid:
        grid = GRIDS[args.grid]
        return [
            ModelParams(mu=mu, q=q, T=T, c=c)
            for T in grid["T"] for mu in grid["mu"] for q in grid["q"] for c in grid["c"]
        ]
    params = params_from(args)
    if args.mode in ("oracle", "all") and params.T > MAX_BRUTE_FORCE_T:
        raise ScaleError(f"brute-force verification is limited to T <= {MAX_BRUTE_FORCE_T} (got T={params.T})")
    if args.mode in ("enumerate", "all") and params.T > MAX_ENUMERATION_T:
        raise ScaleError(f"stopping-rule enumeration is limited to T <= {MAX_ENUMERATION_T} (got T={params.T})")
    return [params]


def cmd_verify(args: argparse.Namespace) -> int:
    instances = verification_jobs(args)
    logger.info(f"🔍 Verifying {len(instances)} instances (mode {args.mode})")
    batches = run_batched(verify_instance, [(p, args.mode, args.grid_step) for p in instances])
    checks = pd.DataFrame([row for rows in batches for row in rows])
    failures = checks[~checks["passed"]]
    by_check = checks.groupby("check")["passed"].agg(["count", "sum"]).reset_index()

    passed = failures.empty
    if passed:
        logger.info(f"✅ All {len(checks)} checks passed")
    else:
        logger.error(f"❌ {len(failures)} of {len(checks)} checks failed")
    emit({
        "manifest": manifest_for(args).to_dict(),
        "passed": passed,
        "instances": len(instances),
        "checks": len(checks),
        "summary": [
            {"check": r["check"], "count": int(r["count"]), "passed": int(r["sum"])}
            for _, r in by_check.iterrows()
        ],
        "failures": failures.to_dict(orient="records"),
    }, args.out)
    return EXIT_OK if passed else EXIT_INVARIANT


def resolve_policy(name: str, params: ModelParams) -> SilentPathPolicy:
    if name == "optimal":
        return tbp_to_silent_path(algorithm1(params).mechanism, params.T)
    if name == "full-info":
        return full_info_policy(params.T)
    if name == "no-info":
        return no_info_policy(params.T)
    if name == "static":
        return static_policy(params.T, best_static_rho(params))
    if name.endswith(".json"):
        path = Path(name)
        if not path.exists():
            raise ParameterDomainError("policy", f"file not found: {path}")
        loaded = load_mechanism(path)
        if isinstance(loaded, TbpMechanism):
            return tbp_to_silent_path(loaded, params.T)
        return loaded
    raise ParameterDomainError("policy", f"must be one of {NAMED_POLICIES} or a .json file (got {name!r})")


def closed_form(params: ModelParams, policy: SilentPathPolicy, mode: str) -> Dict[str, Any]:
    """Exact expectations the simulation estimates"""
    good, bad = silent_path_masses(params, policy)
    silent = good + bad
    if mode == OBEDIENT:
        return {"principal_utility": float(silent.sum()), "detector_cost": obedient_cost(params, policy)}
    solution = solve_dp(params, policy, with_thresholds=False)
    declares = np.flatnonzero(~solution.wait_is_optimal)
    stop = int(declares[0]) + 1 if len(declares) else params.T + 1
    return {"principal_utility": float(silent[:stop - 1].sum()), "detector_cost": solution.expected_cost}


def cmd_simulate(args: argparse.Namespace) -> int:
    params = params_from(args)
    config = SimConfig(n_episodes=args.episodes, seed=args.seed, detector_mode=args.mode)
    policy = resolve_policy(args.policy, params)
    report = estimate(params, policy, config)
    exact = closed_form(params, policy, config.detector_mode)
    deltas = {}
    for key, mean, stderr in (
        ("principal_utility", report.mean_principal_utility, report.stderr_utility),
        ("detector_cost", report.mean_detector_cost, report.stderr_cost),
    ):
        deltas[key] = abs(mean - exact[key]) / stderr if stderr else None
    emit({
        "manifest": manifest_for(args, seed=args.seed).to_dict(),
        "params": params.to_dict(),
        "policy": args.policy,
        "report": report.to_dict(),
        "closed_form": exact,
        "delta_in_stderr": deltas,
    }, args.out)
    return EXIT_OK


def parse_fix(text: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep or name not in ("c", "q", "mu"):
        raise ParameterDomainError("fix", f"expected c=<v>, q=<v> or mu=<v> (got {text!r})")
    try:
        return name, float(value)
    except ValueError:
        raise ParameterDomainError("fix", f"value {value!r} is not a number")


def cmd_sweep(args: argparse.Namespace) -> int:
    sweep = get_sweep(args.mode)
    if args.mode == "patience":
        fixed, fixed_value = parse_fix(args.fix)
        T = args.T if args.T is not None else 100
        result = sweep.run(fixed=fixed, fixed_value=fixed_value, grid_n=args.grid, T=T)
    else:
        base = ModelParams(mu=args.mu, q=args.q, T=args.T if args.T is not None else 50, c=0.0)
        result = sweep.run(params_base=base, c_grid=np.linspace(0.0, 1.0, args.points))

    manifest = manifest_for(args)
    out = resolve_output(args.out or f"{args.mode}.csv")
    sweep.save(result, out, {f"manifest.{k}": v for k, v in manifest.to_dict().items()})
    emit({"manifest": manifest.to_dict(), "mode": args.mode, "table": str(out), "summary": result.summary})
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="persuasion-detect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def instance(p: argparse.ArgumentParser, T: Optional[int] = 50):
        p.add_argument("--mu", type=float, default=0.9, help="P(chain starts good)")
        p.add_argument("--q", type=float, default=0.3, help="per-step jump hazard")
        p.add_argument("--c", type=float, default=0.1, help="delay cost per step")
        p.add_argument("--T", type=int, default=T, help="horizon length")

    p = sub.add_parser("solve", help="optimal TBP mechanism")
    instance(p)
    p.add_argument("--fast", action="store_true", help="check caps only at tau^No beyond it")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmarks", help="no-info, full-info and static benchmarks")
    instance(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_benchmarks)

    p = sub.add_parser("verify", help="solver and DP against brute-force oracles")
    instance(p, T=8)
    p.add_argument("--grid", choices=sorted(GRIDS), default=None)
    p.add_argument("--mode", choices=("oracle", "enumerate", "all"), default="all")
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte-Carlo estimate under a policy")
    instance(p)
    p.add_argument("--policy", default="optimal", help=f"{', '.join(NAMED_POLICIES)} or a mechanism .json file")
    p.add_argument("--mode", choices=DETECTOR_MODES, default=OBEDIENT)
    p.add_argument("--episodes", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="patience maps and utility-vs-c tables")
    p.add_argument("--mode", choices=get_available_modes(), required=True)
    p.add_argument("--fix", default="c=0.1", help="fixed parameter for patience maps, e.g. q=0.1")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--mu", type=float, default=0.9)
    p.add_argument("--q", type=float, default=0.3)
    p.add_argument("--T", type=int, default=None, help="horizon (100 for patience, 50 for utility-vs-c)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)

    except ScaleError as e:
        logger.error(f"❌ Scale limit: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCALE
    except ParameterDomainError as e:
        logger.error(f"❌ Invalid --{e.field}: {e}")
        print(f"error: --{e.field}: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except UnsupportedPolicyError as e:
        logger.error(f"❌ Unsupported policy: {e}")
        print(f"error: --policy: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InvariantViolation, PersuasionError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_INVARIANT
    except Exception as e:
        logger.error(f"❌ Unexpected failure: {e}")
        logger.error(traceback.format_exc())
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
