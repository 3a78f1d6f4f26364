"""
Logging configuration for asyndgan-desk
Run log file plus a rich console handler
"""

import logging
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv
from rich.logging import RichHandler

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def resolve_level(level: Optional[str] = None) -> int:
    """Explicit level, else ASYNDGAN_LOG from the environment / .env, else INFO"""
    load_dotenv()
    name = (level or os.getenv("ASYNDGAN_LOG", "INFO")).upper()
    if name not in LEVELS:
        logging.getLogger(__name__).warning(f"Unknown log level {name!r}, using INFO")
        name = "INFO"
    return getattr(logging, name)


def setup_logging(level: Optional[str] = None, log_file: Optional[Union[str, Path]] = None) -> None:
    handlers = [RichHandler(rich_tracebacks=True, show_path=False)]
    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handlers.append(file_handler)

    logging.basicConfig(
        level=resolve_level(level),
        format='%(message)s',
        handlers=handlers,
        force=True,
    )
