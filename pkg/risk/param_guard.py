"""
Param Guard - Pre-Run Validation of Experiment Commands
Rejects a command before any trial runs when its parameters violate an
operation's pre-conditions or the configured budgets
"""
import logging

from bounds.bounds_calculator import Params
from core.errors import ParameterError
from montecarlo.montecarlo_lab import lemma71_walk_length
from simulation.coin_iteration_sim import IterationConfig

logger = logging.getLogger(__name__)

COUNT_KEYS = ("trials", "iterations", "runs", "max_iterations")
PARAM_KEYS = ("n", "t", "epsilon", "c1", "m")
COIN_KEYS = ("n", "t", "t_excluded", "t_stopped", "adversary_direction", "bad_term", "seed")


class ParamGuard:
    """
    Enforces, per command:
    - seed present and non-negative
    - trial-like counts >= 1 and within limits.max_trials
    - workers >= 1, confidence in (0, 1)
    - Params invariants, plus the experiment's own pre-conditions
    """

    def __init__(self, config):
        self.config = config.get("limits", {})
        self.max_trials = self.config.get("max_trials", 10 ** 8)
        self.max_n = self.config.get("max_n", 10 ** 5)

    def validate(self, command: dict) -> bool:
        """
        Validate command before routing

        Args:
            command: experiment name plus its keyword settings

        Returns:
            bool: True when approved

        Raises:
            ParameterError: the first violated rule
        """
        experiment = command.get("experiment")

        seed = command.get("seed")
        if seed is None:
            raise ParameterError("seed is mandatory")
        if seed < 0:
            raise ParameterError(f"seed must be >= 0, got {seed}")

        for key in COUNT_KEYS:
            value = command.get(key)
            if value is None:
                continue
            if value < 1:
                raise ParameterError(f"{key} must be >= 1, got {value}")
            if value > self.max_trials:
                raise ParameterError(f"{key}={value} exceeds limit {self.max_trials}")

        if command.get("workers", 1) < 1:
            raise ParameterError(f"workers must be >= 1, got {command['workers']}")
        if not 0 < command.get("confidence", 0.99) < 1:
            raise ParameterError(f"confidence must be in (0, 1), got {command['confidence']}")

        n = command.get("n")
        if n is None:
            raise ParameterError(f"{experiment}: n is required")
        if n > self.max_n:
            raise ParameterError(f"n={n} exceeds limit {self.max_n}")
        params = Params(**{k: command[k] for k in PARAM_KEYS if command.get(k) is not None})

        if experiment == "fact3" and command.get("r") is not None and command["r"] < 1:
            raise ParameterError(f"r must be >= 1, got {command['r']}")
        if experiment == "lemma52-2" and command.get("direction", 1) not in (1, -1):
            raise ParameterError(f"direction must be +1 or -1, got {command['direction']}")
        if experiment == "lemma71":
            lemma71_walk_length(params)
        if experiment in ("coin-iter", "agreement"):
            IterationConfig(**{k: command[k] for k in COIN_KEYS if command.get(k) is not None})

        logger.debug(f"✅ Guard: {experiment} approved")
        return True
