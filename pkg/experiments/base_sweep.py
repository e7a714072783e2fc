#!/usr/bin/env python
"""
Base class for parameter sweeps
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence
from abc import ABC, abstractmethod

import pandas as pd

from model import ModelParams
from workers import run_batched

logger = logging.getLogger(__name__)

ROWS_PER_JOB = 101


@dataclass
class SweepResult:
    mode: str
    table: pd.DataFrame
    summary: Dict[str, Any]
    items: List[Any] = field(default_factory=list)


def _fmt(value: Any) -> str:
    return f"{value:.12g}" if isinstance(value, float) else str(value)


def _map_chunk(fn: Callable, chunk: Sequence[ModelParams]) -> list:
    return [fn(params) for params in chunk]


class BaseSweep(ABC):
    """Base class for all sweeps: build a list of instances, evaluate each, tabulate"""

    evaluate: Callable[[ModelParams], Any]

    def __init__(self, mode: str, title: str):
        self.mode = mode
        self.title = title

    def run(self, workers: int = None, **options) -> SweepResult:
        """Main sweep method"""
        try:
            jobs = self._jobs(**options)
            logger.info(f"🔍 {self.title}: evaluating {len(jobs)} instances")

            chunks = [jobs[i:i + ROWS_PER_JOB] for i in range(0, len(jobs), ROWS_PER_JOB)]
            evaluated = run_batched(partial(_map_chunk, self.evaluate), chunks, workers=workers)
            results = [item for chunk in evaluated for item in chunk]

            table = pd.DataFrame([self._row(i, r) for i, r in enumerate(results)])
            summary = self._summarize(results, **options)
            logger.info(f"✅ {self.title}: completed - {len(table)} rows")
            return SweepResult(mode=self.mode, table=table, summary=summary, items=self._arrange(results, **options))

        except Exception as e:
            logger.error(f"❌ {self.title}: sweep failed - {str(e)}")
            raise

    def save(self, result: SweepResult, path: Path, header: Dict[str, Any]) -> Path:
        """Write header and summary as '# ' comment lines, then the table as CSV"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            for key, value in header.items():
                f.write(f"# {key}: {_fmt(value)}\n")
            for key, value in result.summary.items():
                f.write(f"# summary.{key}: {_fmt(value)}\n")
            result.table.to_csv(f, index=False, float_format="%.12g", lineterminator="\n")
        logger.info(f"💾 {self.title}: saved {len(result.table)} rows to {path}")
        return path

    def _arrange(self, results: list, **options) -> list:
        return results

    @abstractmethod
    def _jobs(self, **options) -> List[ModelParams]:
        """Instances to evaluate, in output row order"""
        pass

    @abstractmethod
    def _row(self, index: int, result: Any) -> Dict[str, Any]:
        pass

    @abstractmethod
    def _summarize(self, results: list, **options) -> Dict[str, Any]:
        pass
