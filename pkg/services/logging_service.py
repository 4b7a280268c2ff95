import logging
import os
import sys
from pathlib import Path
from typing import Optional, Union

import colorlog
from dotenv import load_dotenv

from utils.errors import ConfigError

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
LOG_LEVEL_ENV = 'ORTHOPROTO_LOG_LEVEL'
LOG_FILE_NAME = 'run.log'

LEVEL_COLORS = {
    'DEBUG': 'white',
    'INFO': 'blue',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'bold_red',
}

logger = logging.getLogger(__name__)


class LoggingService:
    """Configures the root logger: colored stderr output plus an optional run.log"""

    def __init__(self, log_level: Optional[str] = None):
        load_dotenv()
        self.level_name = (log_level or os.getenv(LOG_LEVEL_ENV) or 'INFO').upper()
        self.level = self._resolve_level(self.level_name)
        self._file_handler: Optional[logging.FileHandler] = None

        handler = colorlog.StreamHandler(sys.stderr)
        handler.setFormatter(colorlog.ColoredFormatter(
            '%(log_color)s' + LOG_FORMAT,
            datefmt=DATE_FORMAT,
            log_colors=LEVEL_COLORS,
        ))
        root = logging.getLogger()
        for existing in list(root.handlers):
            if getattr(existing, '_orthoproto', False):
                root.removeHandler(existing)
        handler._orthoproto = True
        root.addHandler(handler)
        root.setLevel(self.level)
        self._stream_handler = handler

    @staticmethod
    def _resolve_level(name: str) -> int:
        level = logging.getLevelName(name)
        if not isinstance(level, int):
            raise ConfigError(f"Unknown log level '{name}'")
        return level

    def attach_run_dir(self, run_dir: Union[str, Path]) -> Path:
        """Mirror log records into <run_dir>/run.log"""
        path = Path(run_dir) / LOG_FILE_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        self.detach_run_dir()
        self._file_handler = logging.FileHandler(path, encoding='utf-8')
        self._file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        self._file_handler._orthoproto = True
        logging.getLogger().addHandler(self._file_handler)
        logger.debug(f"[Logging] Writing log file {path}")
        return path

    def detach_run_dir(self) -> None:
        if self._file_handler is not None:
            logging.getLogger().removeHandler(self._file_handler)
            self._file_handler.close()
            self._file_handler = None

    def shutdown(self) -> None:
        self.detach_run_dir()
        logging.getLogger().removeHandler(self._stream_handler)
