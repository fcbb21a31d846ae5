"""
Experiment Router - Subcommand Routing
Routes experiment commands to the registries that implement them
"""
import logging

from core.errors import UsageError
from experiments.coin_experiments import EXPERIMENTS as COIN_EXPERIMENTS
from experiments.constants_experiments import EXPERIMENTS as CONSTANTS_EXPERIMENTS
from experiments.spectral_experiments import EXPERIMENTS as SPECTRAL_EXPERIMENTS
from experiments.walk_experiments import EXPERIMENTS as WALK_EXPERIMENTS

logger = logging.getLogger(__name__)


class ExperimentRouter:
    """
    Routes commands to the experiment registries
    Each registry maps a subcommand name to a function returning report entries
    """

    def __init__(self, config):
        self.config = config
        self.registries = {
            'walks': WALK_EXPERIMENTS,
            'coin': COIN_EXPERIMENTS,
            'spectral': SPECTRAL_EXPERIMENTS,
            'constants': CONSTANTS_EXPERIMENTS,
        }

    def find(self, experiment: str):
        for registry in self.registries.values():
            if experiment in registry:
                return registry[experiment]
        raise UsageError(f"unknown experiment '{experiment}'")

    def route(self, command: dict) -> list:
        """
        Run the experiment named in the command

        Args:
            command: dict with 'experiment' plus the experiment's keyword settings

        Returns:
            list: report entries

        Raises:
            UsageError: experiment not specified or unknown
        """
        experiment = command.get("experiment")
        if not experiment:
            raise UsageError("experiment not specified in command")

        function = self.find(experiment)
        logger.info(f"▶️ Running {experiment}")
        settings = {k: v for k, v in command.items() if k != "experiment"}
        return function(**settings)

    def list_experiments(self, registry: str = None) -> dict:
        """List available experiments for one registry or all"""
        if registry:
            return {registry: list(self.registries.get(registry, {}).keys())}
        return {name: list(experiments.keys()) for name, experiments in self.registries.items()}
