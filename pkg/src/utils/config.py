import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = 'configs/solver.yaml'
CONFIG_ENV_VAR = 'CDR_CONFIG'

DEFAULTS: Dict[str, Dict[str, Any]] = {
    'solver': {
        'tol': 1e-10,
        'max_iter': 10000,
        'damping': 1.0,
        'damping_floor': 1.0 / 64,
        'linear_tol': 1e-13
    },
    'dmp': {
        'tolerance': 1e-10,
        'g_tolerance': 1e-12,
        'rowsum_tolerance': 1e-12
    },
    'sweep': {
        'ne_list': [16, 32, 64, 128, 256],
        'extended': [512, 1024],
        'jobs': 1
    },
    'output': {
        'directory': 'results'
    }
}


def default_config_path() -> Path:
    """Config path from CDR_CONFIG (also read from a .env file) or the bundled default"""
    load_dotenv()
    return Path(os.environ.get(CONFIG_ENV_VAR, DEFAULT_CONFIG_PATH))


def load_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load a YAML config and fill in missing sections and keys from DEFAULTS.

    Without a path the default location is used; if that file does not exist
    the built-in defaults are returned.
    """
    explicit = path is not None
    config_path = Path(path) if explicit else default_config_path()

    if not config_path.exists():
        if explicit or os.environ.get(CONFIG_ENV_VAR):
            logger.error(f"Config file not found: {config_path}")
            raise FileNotFoundError(f"Config file {config_path} does not exist")
        logger.info("No config file found, using built-in defaults")
        return copy.deepcopy(DEFAULTS)

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        logger.error(f"Invalid YAML in config: {str(e)}")
        raise

    if not config:
        raise ValueError(f"Empty configuration file: {config_path}")
    if not isinstance(config, dict):
        raise ValueError(f"Configuration must be a mapping, got {type(config).__name__}")

    for section, default in DEFAULTS.items():
        if section not in config or config[section] is None:
            logger.warning(f"Missing section {section}, using defaults")
            config[section] = copy.deepcopy(default)
            continue
        for key, val in default.items():
            if key not in config[section]:
                config[section][key] = copy.deepcopy(val)
                logger.info(f"Using default {key} in {section}")

    logger.info(f"Loaded config from {config_path}")
    return config
