"""
Global Coin Verification Lab - Main Orchestrator
Turns the command line into a run configuration, routes each experiment
through validation and execution, and emits the report
"""
import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import yaml
from dotenv import dotenv_values, load_dotenv

from action.experiment_router import ExperimentRouter
from core.errors import LabError, ParameterError, UsageError
from core.run_state import RunState
from montecarlo.trial_runner import PartitionRule
from reporting.report_builder import ReportBuilder
from risk.param_guard import ParamGuard

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), "config.yaml")

SUBCOMMANDS = ["fact3", "lemma52-1", "lemma52-2", "lemma71", "coin-iter", "agreement", "spectral", "constants", "all"]
# order of `all`: cheapest first
ALL_ORDER = ["constants", "fact3", "lemma52-1", "lemma52-2", "lemma71", "coin-iter", "agreement", "spectral"]

INT_KEYS = {"n", "t", "m", "trials", "seed", "workers", "t_excluded", "t_stopped", "adversary_direction",
            "iterations", "max_iterations", "bad_term", "runs", "r", "direction"}
FLOAT_KEYS = {"epsilon", "c1", "confidence", "threshold"}
STR_KEYS = {"out", "format", "log_level", "records_out"}
RUN_KEYS = {"seed", "workers", "confidence", "out", "format", "log_level", "records_out"}


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting"""

    def error(self, message):
        raise UsageError(message)


def _count(value: str) -> int:
    """Integer flag that also accepts 1e6-style literals"""
    number = float(value)
    if not number.is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got {value}")
    return int(number)


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="coinlab", description="Global Coin Verification Lab")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="flat key=value file; explicit flags override it")

    params = parser.add_argument_group("parameters")
    params.add_argument("--n", type=_count)
    params.add_argument("--t", type=_count)
    params.add_argument("--epsilon", type=float)
    params.add_argument("--c1", type=float)
    params.add_argument("--m", type=_count)
    params.add_argument("--trials", type=_count)
    params.add_argument("--r", type=_count, help="fact3: single threshold instead of 1..n")
    params.add_argument("--threshold", type=float, help="lemma71: threshold instead of (beta/6)c1m")
    params.add_argument("--direction", type=_count, choices=[1, -1], help="lemma52-2: specified direction")

    coin = parser.add_argument_group("coin iteration")
    coin.add_argument("--t-excluded", type=_count)
    coin.add_argument("--t-stopped", type=_count)
    coin.add_argument("--adversary-direction", type=_count, choices=[1, -1])
    coin.add_argument("--bad-term", type=_count)
    coin.add_argument("--iterations", type=_count)
    coin.add_argument("--max-iterations", type=_count)
    coin.add_argument("--runs", type=_count)

    run = parser.add_argument_group("run")
    run.add_argument("--seed", type=_count)
    run.add_argument("--workers", type=_count)
    run.add_argument("--confidence", type=float)
    run.add_argument("--out", help="report path (default standard output)")
    run.add_argument("--format", choices=["json", "csv"])
    run.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    run.add_argument("--records-out", help="coin-iter: JSON-lines file of iteration records")
    return parser


def load_config(path: Optional[str] = None) -> dict:
    """config.yaml, or the file named by COINLAB_CONFIG"""
    path = path or os.getenv("COINLAB_CONFIG", DEFAULT_CONFIG)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from e


def read_flat_config(path: str) -> Dict[str, Any]:
    """
    Parse a flat UTF-8 key=value file with # comments

    Keys are long flag names; dashes and underscores are interchangeable.

    Raises:
        UsageError: unreadable file, unknown key or malformed value
    """
    if not os.path.isfile(path):
        raise UsageError(f"config file not found: {path}")
    values = {}
    for raw_key, raw_value in dotenv_values(path, encoding="utf-8").items():
        key = raw_key.strip().replace("-", "_")
        if raw_value is None:
            raise UsageError(f"{path}: '{raw_key}' has no value")
        try:
            if key in INT_KEYS:
                values[key] = _count(raw_value)
            elif key in FLOAT_KEYS:
                values[key] = float(raw_value)
            elif key in STR_KEYS:
                values[key] = raw_value
            else:
                raise UsageError(f"{path}: unknown key '{raw_key}'")
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise UsageError(f"{path}: bad value for '{raw_key}': {raw_value}") from e
    return values


@dataclass
class RunConfig:
    """Everything one invocation needs, after flags, config file and defaults are merged"""
    subcommand: str
    seed: int
    workers: int = 1
    confidence: float = 0.99
    output_path: Optional[str] = None
    output_format: str = "json"
    log_level: str = "INFO"
    records_out: Optional[str] = None
    experiments: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "workers": self.workers,
            "confidence": self.confidence,
            "output_format": self.output_format,
            "experiments": self.experiments,
        }


def build_run_config(args: argparse.Namespace, config: dict) -> RunConfig:
    """
    Merge explicit flags > --config file > config.yaml defaults

    For `all` only the run options are taken from flags and file.
    """
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("subcommand", "config")}
    settings = read_flat_config(args.config) if args.config else {}
    settings.update(flags)

    run_options = {k: settings.pop(k) for k in list(settings) if k in RUN_KEYS}
    if run_options.get("seed") is None:
        raise UsageError("--seed is required (no wall-clock seeding)")

    documented = config.get("experiments", {})
    defaults = config.get("params", {})
    names = ALL_ORDER if args.subcommand == "all" else [args.subcommand]
    if args.subcommand == "all" and settings:
        logger.warning(f"⚠️ all: ignoring parameter overrides {sorted(settings)}")

    experiments = {}
    for name in names:
        merged = {"epsilon": defaults.get("epsilon", 0.1), "c1": defaults.get("c1", 0.001)}
        merged.update(documented.get(name, {}))
        if args.subcommand != "all":
            merged.update(settings)
        experiments[name] = merged

    return RunConfig(
        subcommand=args.subcommand,
        seed=run_options["seed"],
        workers=run_options.get("workers", 1),
        confidence=run_options.get("confidence", config.get("monte_carlo", {}).get("confidence_level", 0.99)),
        output_path=run_options.get("out"),
        output_format=run_options.get("format", "json"),
        log_level=run_options.get("log_level", config.get("logging", {}).get("level", "INFO")),
        records_out=run_options.get("records_out"),
        experiments=experiments,
    )


class LabSystem:
    """Main orchestrator for the verification lab"""

    def __init__(self, config: dict):
        self.config = config
        self.guard = ParamGuard(config)
        self.router = ExperimentRouter(config)
        self.state = RunState()

        monte_carlo = config.get("monte_carlo", {})
        self.rule = PartitionRule(
            block_trials=monte_carlo.get("block_trials", 4096),
            max_block_cells=monte_carlo.get("max_block_cells", 1 << 22),
        )
        self.spectral = config.get("spectral", {})
        self.record_limit = config.get("coin", {}).get("record_limit", 1000)
        self.version = config.get("lab", {}).get("version", "0.0.0")

    def build_commands(self, run_config: RunConfig) -> List[dict]:
        commands = []
        for name, settings in run_config.experiments.items():
            command = {
                "experiment": name,
                **settings,
                "seed": run_config.seed,
                "workers": run_config.workers,
                "confidence": run_config.confidence,
                "rule": self.rule,
            }
            if name == "spectral":
                command.update(self.spectral)
            if name == "coin-iter":
                command["record_limit"] = self.record_limit
                command["records_out"] = run_config.records_out
            commands.append(command)
        return commands

    def validate(self, commands: List[dict]):
        """Every command is checked before any experiment runs"""
        for command in commands:
            self.guard.validate(command)

    def execute(self, commands: List[dict]) -> List[dict]:
        """
        Run each command; an experiment that raises becomes an error entry
        """
        results = []
        for command in commands:
            name = command["experiment"]
            self.state.start(name)
            try:
                entries = self.router.route(command)
            except LabError as e:
                logger.error(f"❌ {name} failed: {e}")
                self.state.record_error(name, e)
                entries = [ReportBuilder.create_error(name, e)]
            except Exception as e:
                logger.exception(f"💥 {name} raised unexpectedly: {e}")
                self.state.record_error(name, e)
                entries = [ReportBuilder.create_error(name, e)]
            self.state.finish(entries)
            results.extend(entries)
        return results

    def report(self, run_config: RunConfig, results: List[dict]) -> dict:
        report = ReportBuilder.create_report(self.version, run_config.to_dict(), results, self.state.timing)
        logger.info(f"📊 Summary: {report['summary']}")
        return report


def configure_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def write_report(report: dict, run_config: RunConfig):
    text = ReportBuilder.to_csv(report) if run_config.output_format == "csv" else ReportBuilder.serialize(report)
    if run_config.output_path:
        with open(run_config.output_path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        logger.info(f"💾 Report written to {run_config.output_path}")
    else:
        sys.stdout.write(text)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point

    Returns:
        int: 0 when no entry fails, 1 on any fail or experiment error,
        2 on usage error
    """
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
        config = load_config()
        run_config = build_run_config(args, config)
        configure_logging(run_config.log_level)
        system = LabSystem(config)
        commands = system.build_commands(run_config)
        system.validate(commands)
    except (UsageError, ParameterError) as e:
        sys.stderr.write(f"usage error: {e}\n")
        build_parser().print_usage(sys.stderr)
        return 2

    report = system.report(run_config, system.execute(commands))
    write_report(report, run_config)
    return 1 if system.state.failed else 0


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
