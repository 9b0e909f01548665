"""Command-line harness: ``ratiolist <command> [flags]`` or ``python -m ratiolist.cli``."""

from .commands import COMMAND_FUNCS, SKIPPED_COLUMNS, SWEEP_COLUMNS
from .config import ConfigError, ExperimentConfig, build_config, load_config_file
from .main import build_parser, main
from .records import RunRecord, to_json
