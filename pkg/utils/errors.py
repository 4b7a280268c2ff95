from typing import Any, Dict, Optional, Sequence


class OrthoprotoError(Exception):
    """Base class for all errors raised by this project"""

    def details(self) -> Dict[str, Any]:
        """Extra machine-readable fields for the JSON error record"""
        return {}


class DimensionError(OrthoprotoError, ValueError):
    """Operand shapes do not agree"""

    def __init__(self, message: str, *shapes: Sequence[int]):
        self.shapes = [tuple(s) for s in shapes]
        if self.shapes:
            message = f"{message} (shapes: {' vs '.join(str(s) for s in self.shapes)})"
        super().__init__(message)

    def details(self) -> Dict[str, Any]:
        return {'shapes': [list(s) for s in self.shapes]}


class DataError(OrthoprotoError, ValueError):
    """Invalid or malformed data (labels, files, empty populations)"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None):
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} at {', '.join(location)}"
        super().__init__(message)

    def details(self) -> Dict[str, Any]:
        return {k: v for k, v in (('line', self.line), ('column', self.column)) if v is not None}


class ConfigError(OrthoprotoError, ValueError):
    """Invalid configuration value or unknown kind"""


class NumericError(OrthoprotoError, ArithmeticError):
    """NaN/Inf input or a non-finite result"""

    def __init__(self, message: str, term: Optional[str] = None):
        self.term = term
        super().__init__(message)

    def details(self) -> Dict[str, Any]:
        return {'term': self.term} if self.term else {}


class ContractError(OrthoprotoError, ValueError):
    """API used outside its contract"""


class UsageError(OrthoprotoError, ValueError):
    """Bad command-line usage"""
