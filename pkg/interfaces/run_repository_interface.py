from abc import ABC, abstractmethod
from typing import Any, Dict, List


class IRunRepository(ABC):
    """Interface for run artifact storage"""

    @abstractmethod
    def save_config(self, config: Dict[str, Any]) -> None:
        """Save the resolved run configuration"""
        pass

    @abstractmethod
    def save_split(self, split: Dict[str, Any]) -> None:
        """Save the split manifest"""
        pass

    @abstractmethod
    def append_step(self, line: str) -> None:
        """Append one loss report line"""
        pass

    @abstractmethod
    def save_snapshot(self, epoch: int, report: Dict[str, Any]) -> None:
        """Save an evaluation snapshot taken after an epoch"""
        pass

    @abstractmethod
    def save_history(self, history: Dict[str, Any]) -> None:
        """Save the (possibly partial) training history"""
        pass

    @abstractmethod
    def load_snapshots(self) -> List[Dict[str, Any]]:
        """Get all snapshots in epoch order"""
        pass
