import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from config import SimulationSettings, apply_overrides, build_simulation_config
from errors import ConfigError
from simulation import dataset_frame, run_simulation

logger = logging.getLogger(__name__)


def load_sweep(path: Optional[Union[str, Path]]) -> List[Dict[str, Any]]:
    """Sweep points as dotted-key override dicts.

    Accepted forms: {"runs": [{"bc.ramp_rate": 50}, ...]} or
    {"parameter": "bc.ramp_rate", "values": [50, 75, 100]}. No file means a
    single run of the base configuration.
    """
    if path is None:
        return [{}]
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"sweep file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e

    if isinstance(document, dict) and isinstance(document.get("runs"), list):
        runs = document["runs"]
    elif isinstance(document, dict) and "parameter" in document and isinstance(document.get("values"), list):
        runs = [{document["parameter"]: value} for value in document["values"]]
    else:
        raise ConfigError(f"{path}: expected {{'runs': [...]}} or {{'parameter': ..., 'values': [...]}}")
    if not runs or not all(isinstance(run, dict) for run in runs):
        raise ConfigError(f"{path}: sweep must list at least one override object")
    return runs


class SweepAdapter:
    """Runs sweep points on a thread pool and returns their dataset blocks in sweep order."""

    def __init__(self, base: SimulationSettings, threads: int = 1):
        self.base = base
        self.threads = max(1, threads)

    def _run_one(self, run_id: int, overrides: Dict[str, Any]) -> pd.DataFrame:
        settings = apply_overrides(self.base, overrides)
        logger.info(f"Run {run_id}: {overrides or 'base configuration'}")
        frame = dataset_frame(run_simulation(build_simulation_config(settings)))
        frame.insert(0, "run_id", run_id)
        return frame

    def run(self, runs: List[Dict[str, Any]]) -> pd.DataFrame:
        # validate every point before any simulation starts
        for overrides in runs:
            build_simulation_config(apply_overrides(self.base, overrides))
        workers = min(self.threads, len(runs))
        with ThreadPoolExecutor(max_workers=workers) as executor:
            blocks = list(executor.map(self._run_one, range(len(runs)), runs))
        return pd.concat(blocks, ignore_index=True)
