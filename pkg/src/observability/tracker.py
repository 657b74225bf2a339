import json
import time
from datetime import datetime
from typing import Dict, Any, Optional
from pathlib import Path
import threading

import numpy as np

from src.settings import log_dir as default_log_dir


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


class RunTracker:
    """Step-level tracker for simulation and verification runs."""

    def __init__(self, log_dir: Optional[str] = None):
        self.log_dir = Path(log_dir) if log_dir is not None else default_log_dir()
        self.log_dir.mkdir(parents=True, exist_ok=True)

        self.current_run = None
        self.lock = threading.Lock()

    def start_run(self, scenario: str, **meta) -> str:
        """Start tracking a new run."""
        run_id = f"run_{datetime.now().strftime('%Y%m%d_%H%M%S_%f')}"

        with self.lock:
            self.current_run = {
                "run_id": run_id,
                "scenario": scenario,
                "meta": {k: _plain(v) for k, v in meta.items()},
                "start_time": time.time(),
                "steps": [],
                "metrics": {
                    "training_calls": 0,
                    "predictions": 0,
                    "solver_calls": 0,
                    "infeasible_ticks": 0,
                    "collisions": 0,
                    "total_time": 0
                },
                "summary": None
            }

        return run_id

    def _append(self, entry: Dict[str, Any]) -> None:
        entry["timestamp"] = time.time()
        self.current_run["steps"].append(entry)

    def log_training(self, agent: str, entity: str, step: int, version: int,
                     final_loss: Optional[float], iterations: int):
        """Log one published weight snapshot."""
        if not self.current_run:
            return

        with self.lock:
            self._append({
                "step": "training",
                "tick": step,
                "agent": agent,
                "entity": entity,
                "version": version,
                "final_loss": _plain(final_loss),
                "iterations": iterations
            })
            self.current_run["metrics"]["training_calls"] += 1

    def log_prediction(self, agent: str, step: int, summaries: Dict[str, Dict[str, Any]]):
        """Log the predicted ellipsoid summaries an agent planned against."""
        if not self.current_run:
            return

        with self.lock:
            self._append({
                "step": "prediction",
                "tick": step,
                "agent": agent,
                "entities": {k: {kk: _plain(vv) for kk, vv in v.items()} for k, v in summaries.items()}
            })
            self.current_run["metrics"]["predictions"] += len(summaries)

    def log_solver(self, agent: str, step: int, v_des, v_safe, feasible: bool):
        """Log the chosen velocity."""
        if not self.current_run:
            return

        with self.lock:
            self._append({
                "step": "solver",
                "tick": step,
                "agent": agent,
                "v_des": _plain(v_des),
                "v_safe": _plain(v_safe),
                "feasible": bool(feasible)
            })
            self.current_run["metrics"]["solver_calls"] += 1
            if not feasible:
                self.current_run["metrics"]["infeasible_ticks"] += 1

    def log_collision(self, step: int, a: str, b: str, distance: float):
        if not self.current_run:
            return

        with self.lock:
            self._append({
                "step": "collision",
                "tick": step,
                "pair": [a, b],
                "distance": float(distance)
            })
            self.current_run["metrics"]["collisions"] += 1

    def end_run(self, summary: Optional[Dict[str, Any]] = None) -> Dict:
        """End run and save log."""
        if not self.current_run:
            return {}

        with self.lock:
            self.current_run["end_time"] = time.time()
            self.current_run["metrics"]["total_time"] = (
                self.current_run["end_time"] - self.current_run["start_time"]
            )
            self.current_run["summary"] = summary

            log_file = self.log_dir / f"{self.current_run['run_id']}.json"
            with open(log_file, 'w', encoding='utf-8') as f:
                json.dump(self.current_run, f, indent=2, ensure_ascii=False)

            run_data = self.current_run
            self.current_run = None
            return run_data

    def get_summary_stats(self) -> Dict:
        """Get summary statistics from all logs."""
        all_logs = list(self.log_dir.glob("run_*.json"))

        if not all_logs:
            return {}

        total_runs = 0
        runs_with_collisions = 0
        infeasible = 0
        avg_time = 0

        for log_file in all_logs:
            try:
                with open(log_file, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            except (OSError, json.JSONDecodeError):
                continue
            metrics = data.get("metrics", {})
            total_runs += 1
            if metrics.get("collisions", 0) > 0:
                runs_with_collisions += 1
            infeasible += metrics.get("infeasible_ticks", 0)
            avg_time += metrics.get("total_time", 0)

        return {
            "total_runs": total_runs,
            "runs_with_collisions": runs_with_collisions,
            "collision_run_rate": runs_with_collisions / total_runs if total_runs > 0 else 0,
            "infeasible_ticks": infeasible,
            "avg_run_time": avg_time / total_runs if total_runs > 0 else 0
        }


# Global tracker instance
_tracker = None

def get_tracker() -> RunTracker:
    """Get or create global tracker instance."""
    global _tracker
    if _tracker is None:
        _tracker = RunTracker()
    return _tracker
