from abc import ABC, abstractmethod

import numpy as np


class IScorer(ABC):
    """Interface for known-confidence scorers (higher score = more likely known)"""

    name: str = ''

    @abstractmethod
    def score(self, model, x: np.ndarray) -> np.ndarray:
        """Per-sample scalar scores for a batch [n x input_dim]"""
        pass

    @abstractmethod
    def predict(self, model, x: np.ndarray) -> np.ndarray:
        """Per-sample predicted known class in [0, N)"""
        pass

    def __repr__(self) -> str:
        return self.name or type(self).__name__
