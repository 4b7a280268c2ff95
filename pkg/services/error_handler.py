import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, TextIO, Union

import ujson

from utils.errors import (
    ConfigError,
    ContractError,
    DataError,
    DimensionError,
    NumericError,
    OrthoprotoError,
    UsageError,
)
from utils.report_writer import ReportWriter

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

ERROR_FILE_NAME = 'error.json'


class ErrorHandler:
    """Maps exceptions to exit codes and reports them for humans and machines"""

    def __init__(self, stream: Optional[TextIO] = None):
        self.stream = stream
        self.logger = logging.getLogger(__name__)

    def exit_code(self, error: BaseException) -> int:
        if isinstance(error, (UsageError, ConfigError, ContractError)):
            return EXIT_USAGE
        elif isinstance(error, (DataError, DimensionError)):
            return EXIT_DATA
        elif isinstance(error, NumericError):
            return EXIT_NUMERIC
        return EXIT_USAGE

    def _get_error_message(self, error: BaseException) -> str:
        if isinstance(error, UsageError):
            return f"Usage error: {error}"
        elif isinstance(error, ConfigError):
            return f"Invalid configuration: {error}"
        elif isinstance(error, (DataError, DimensionError)):
            return f"Data error: {error}"
        elif isinstance(error, NumericError):
            return f"Numeric failure: {error}"
        elif isinstance(error, ContractError):
            return f"Contract violation: {error}"
        return f"Unexpected error: {type(error).__name__}: {error}"

    def record(self, error: BaseException) -> Dict[str, Any]:
        return {
            'error': type(error).__name__,
            'message': str(error),
            'exit_code': self.exit_code(error),
            'details': error.details() if isinstance(error, OrthoprotoError) else {},
        }

    def handle(self, error: BaseException, out_dir: Optional[Union[str, Path]] = None) -> int:
        """Report the error on stderr (message plus one JSON line) and return its exit code"""
        stream = self.stream or sys.stderr
        record = self.record(error)
        if not isinstance(error, OrthoprotoError):
            self.logger.error(f"[ErrorHandler] Unexpected error: {type(error).__name__}: {error}", exc_info=error)

        try:
            print(self._get_error_message(error), file=stream)
            print(ujson.dumps(record, sort_keys=True), file=stream)
            if out_dir is not None:
                ReportWriter.write_json(Path(out_dir) / ERROR_FILE_NAME, record)
        except OSError as e:
            self.logger.error(f"[ErrorHandler] Could not write error record: {e}")

        return record['exit_code']
