"""
Module with the settings, resource caps and logging configuration of the workbench
"""
import dataclasses
import logging
import logging.config
import os

import coloredlogs
import yaml

logger = logging.getLogger(__name__)


class ResourceLimitError(RuntimeError):
    """A configured resource cap was exceeded. No partial answer is returned."""

    def __init__(self, cap, value, detail=""):
        self.cap = cap
        self.value = value
        message = "resource cap %s=%s exceeded" % (cap, value)
        if detail:
            message += ": " + detail
        super().__init__(message)


@dataclasses.dataclass(frozen=True)
class Settings:
    """Resource caps and defaults shared by every module"""
    universe_cap: int = 512
    node_budget: int = 200000
    quantifier_depth_cap: int = 12
    tuple_cap: int = 200000
    hypercube_max_d: int = 10
    max_rejections: int = 2000
    breadth_max_d: int = 8
    memo_cap: int = 1000000
    refinement_rounds: int = 3
    jobs: int = 1

    def get_description(self):
        """Get a dictionary describing the instance"""
        return dataclasses.asdict(self)


_settings = None


def load_settings(default_path='pyudtfs.yaml', env_key='PYUDTFS_CONFIG'):
    """
    Build the settings from a YAML file and environment overrides.

    Args:
        default_path (str): A path to a yaml file with the settings.
        env_key (str): The name of an environment variable with a path to the settings file.
                       Has preference over default_path.

    Returns:
        Settings: The loaded settings.

    """
    path = os.getenv(env_key, None) or default_path
    values = {}
    if os.path.exists(path):
        with open(path, 'rt') as f:
            values = yaml.safe_load(f.read()) or {}
        logger.debug("Settings read from %s", path)
    known = {f.name for f in dataclasses.fields(Settings)}
    unknown = set(values) - known
    if unknown:
        raise ValueError("Unknown settings in %s: %s" % (path, ", ".join(sorted(unknown))))
    for name in known:
        env_value = os.getenv("PYUDTFS_" + name.upper(), None)
        if env_value:
            values[name] = env_value
    return Settings(**{k: int(v) for k, v in values.items()})


def get_settings():
    """Get the process-wide settings, loading them on first use"""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def set_settings(settings):
    """Replace the process-wide settings (None forces a reload on next use)"""
    global _settings
    _settings = settings


def setup_logging(default_path='logging.yaml', env_key='PYUDTFS_LOG', default_level=logging.INFO):
    """
    Args:
        default_path (str): A path to a yaml file with the logging configuration.
        env_key (str): The name of an environment variable with a path to the logging file.
                       Has preference over default_path.
        default_level (int): A level of logging (e.g., logging.INFO) used in case an error occurs.

    """
    path = default_path
    value = os.getenv(env_key, None)
    if value:
        path = value
    if os.path.exists(path):
        with open(path, 'rt') as f:
            try:
                config = yaml.safe_load(f.read())
                logging.config.dictConfig(config)
                coloredlogs.install()
                return
            except Exception as e:
                logger.warning("Error in logging configuration file (%s). Using the default settings.", e)
    logging.basicConfig(level=default_level)
    coloredlogs.install(level=default_level)
