import logging
from pathlib import Path
from typing import List, Union


def setup_logging(verbose: bool = False) -> None:
    """Configure root logging for the command-line tools"""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler()],
        force=True
    )


def validate_directory(path: Union[str, Path], create: bool = True) -> Path:
    """
    Validate and optionally create an output directory.

    Raises:
        ValueError: if the path is a file, or is missing and create is False
    """
    path_obj = Path(path)
    if not path_obj.exists():
        if not create:
            raise ValueError(f"Directory does not exist: {path_obj}")
        path_obj.mkdir(parents=True, exist_ok=True)
        logging.info(f"Created directory: {path_obj}")
    elif not path_obj.is_dir():
        raise ValueError(f"Path exists but is not a directory: {path_obj}")
    return path_obj


def parse_ne_list(text: str) -> List[int]:
    """Comma-separated mesh sizes, e.g. "16,32,64" """
    try:
        values = [int(v) for v in text.split(',') if v.strip()]
    except ValueError as e:
        raise ValueError(f"invalid ne list: {text!r}") from e
    if not values:
        raise ValueError("ne list is empty")
    return values
