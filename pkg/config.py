"""
Configuration and constants for the nomlog interpreter.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
import logging
import os
from dataclasses import dataclass, field, fields
from typing import List, Optional, Tuple

import yaml

from utils import NomlogError

logger = logging.getLogger(__name__)

__version__ = "0.1.0"

# Proof search
DEFAULT_DEPTH_LIMIT = 10000
DEFAULT_BATCH_SOLUTIONS = 10

# Herbrand oracle
DEFAULT_UNIVERSE_DEPTH = 3
DEFAULT_POOL_SIZE = 3
DEFAULT_LIST_LENGTH = 2
DEFAULT_MAX_ITERATIONS = 50

# REPL
PROMPT = "?- "
MORE_PROMPT = "   "

# Files
PROGRAM_EXTENSION = ".apl"
BATCH_EXTENSION = ".batch"
CORPUS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "programs")

# Logging
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Exit codes
EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_LOAD_ERROR = 2


class ConfigError(NomlogError):
    """Invalid session configuration."""


@dataclass
class SessionConfig:
    """
    Settings for one interpreter session.

    Args:
        program_files: Program files to load, in order
        depth_limit: Transitions allowed per search branch
        trace: Print every transition
        check_nu_goal: Report clauses outside the ν-goal fragment
        show_elaborated: Print elaborated clauses before running
        oracle: (universe depth, pool size) for the bottom-up oracle, or None
        max_solutions: Answers to show per query; None for all (REPL asks)
        batch_file: Query file to run non-interactively
    """
    program_files: List[str] = field(default_factory=list)
    depth_limit: int = DEFAULT_DEPTH_LIMIT
    trace: bool = False
    check_nu_goal: bool = False
    show_elaborated: bool = False
    oracle: Optional[Tuple[int, int]] = None
    max_solutions: Optional[int] = None
    batch_file: Optional[str] = None

    @property
    def interactive(self):
        return self.oracle is None and self.batch_file is None

    def validate(self):
        """Raise ConfigError unless the settings are consistent."""
        if not isinstance(self.depth_limit, int) or self.depth_limit < 1:
            raise ConfigError(f"depth limit must be a positive integer, got {self.depth_limit!r}")
        if self.max_solutions is not None and self.max_solutions < 1:
            raise ConfigError(f"max solutions must be positive, got {self.max_solutions!r}")
        if self.oracle is not None:
            if self.batch_file is not None:
                raise ConfigError("oracle mode cannot be combined with a batch file")
            depth, pool = self.oracle
            if depth < 0 or pool < 1:
                raise ConfigError(f"oracle needs depth >= 0 and pool >= 1, got {depth} {pool}")
        return self


def load_session_config(path):
    """
    Load a SessionConfig from a YAML mapping with the same keys.

    Args:
        path (str): Path to the YAML file

    Returns:
        SessionConfig: The validated configuration

    Raises:
        ConfigError: If the file cannot be read or has unknown keys
    """
    try:
        with open(path, 'r', encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot load configuration {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"configuration {path} must be a mapping")
    known = {f.name for f in fields(SessionConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys in {path}: {', '.join(unknown)}")
    if data.get("oracle") is not None:
        data["oracle"] = tuple(data["oracle"])
    logger.info(f"Loaded session configuration from {path}")
    return SessionConfig(**data).validate()
