from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from utils.errors import DataError, DimensionError


@dataclass
class LabeledDataset:
    """Samples [n x input_dim] with integer class labels.

    `groups` optionally assigns each sample to a recording (trial); when present
    the known-class train/test split keeps whole groups together.
    """
    samples: np.ndarray
    labels: np.ndarray
    class_names: Optional[Dict[int, str]] = None
    provenance: Dict[str, Any] = field(default_factory=dict)
    groups: Optional[np.ndarray] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.samples.ndim != 2:
            raise DimensionError("dataset samples must be a matrix", self.samples.shape)
        if self.labels.shape != (self.samples.shape[0],):
            raise DimensionError("one label per sample required", self.labels.shape, self.samples.shape)
        if self.groups is not None:
            self.groups = np.asarray(self.groups, dtype=np.int64)
            if self.groups.shape != self.labels.shape:
                raise DimensionError("one group per sample required", self.groups.shape, self.labels.shape)
        if self.class_names is not None:
            unnamed = set(self.class_ids) - set(self.class_names)
            if unnamed:
                raise DataError(f"labels without class names: {sorted(unnamed)}")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.samples.shape[1])

    @property
    def class_ids(self) -> List[int]:
        return [int(c) for c in np.unique(self.labels)]

    def indices_of(self, class_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == class_id)

    def sidecar(self) -> Dict[str, Any]:
        """JSON-ready metadata stored next to the vector CSV"""
        payload: Dict[str, Any] = {'provenance': self.provenance}
        if self.class_names is not None:
            payload['class_names'] = {str(k): v for k, v in self.class_names.items()}
        if self.groups is not None:
            payload['groups'] = [int(g) for g in self.groups]
        return payload

    @staticmethod
    def sidecar_path(csv_path) -> Path:
        return Path(csv_path).with_suffix('.json')
