"""
Run State - Per-Run Tallies and Timings
Tracks which experiment is running, verdict counts, errors and wall time
"""
import time
from typing import Any, Dict, List


class RunState:
    """
    Centralized state of one lab run
    Timings are kept apart from results: they never enter the report digest
    """

    def __init__(self):
        self.status = "idle"
        self.current_experiment = None
        self.tally = {"pass": 0, "fail": 0, "inconclusive": 0}
        self.timing: Dict[str, float] = {}
        self.errors: List[str] = []
        self._started = None

    def start(self, experiment: str):
        """Mark an experiment as running"""
        self.status = "running"
        self.current_experiment = experiment
        self._started = time.perf_counter()

    def finish(self, entries: List[Dict[str, Any]]):
        """Close the running experiment and count its verdicts"""
        self.timing[self.current_experiment] = time.perf_counter() - self._started
        for entry in entries:
            if entry.get("verdict") in self.tally:
                self.tally[entry["verdict"]] += 1
        self.status = "idle"
        self.current_experiment = None

    def record_error(self, experiment: str, error: Exception):
        self.errors.append(f"{experiment}: {type(error).__name__}: {error}")

    @property
    def failed(self) -> bool:
        return self.tally["fail"] > 0 or bool(self.errors)

    def get_state(self) -> Dict[str, Any]:
        """Get current run state"""
        return {
            "status": self.status,
            "current_experiment": self.current_experiment,
            "tally": dict(self.tally),
            "errors": list(self.errors),
            "timing": dict(self.timing),
        }
