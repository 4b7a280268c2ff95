from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from data.labeled_dataset import LabeledDataset
from utils.errors import DataError, DimensionError
from utils.validators import ConfigValidator

DEFAULT_WINDOW = 32
DEFAULT_STRIDE = 16


@dataclass
class SignalRecording:
    """One multichannel recording [C x L] of a single gesture trial"""
    values: np.ndarray
    label: int
    trial: int
    subject: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DimensionError("recording values must be [channels x length]", self.values.shape)

    @property
    def channels(self) -> int:
        return int(self.values.shape[0])

    @property
    def length(self) -> int:
        return int(self.values.shape[1])


def window_count(length: int, win: int, stride: int) -> int:
    return (length - win) // stride + 1


def sliding_window(rec: SignalRecording, win: int = DEFAULT_WINDOW, stride: int = DEFAULT_STRIDE) -> List[np.ndarray]:
    """Windows at offsets 0, stride, ... while offset + win <= L, each flattened row-major to C·win"""
    is_valid, error = ConfigValidator.validate_window(rec.length, win, stride)
    if not is_valid:
        raise DataError(error)
    views = sliding_window_view(rec.values, win, axis=1)[:, ::stride, :]
    windows = np.transpose(views, (1, 0, 2)).reshape(-1, rec.channels * win)
    return [row.copy() for row in windows]


def windows_to_dataset(recordings: Sequence[SignalRecording], win: int = DEFAULT_WINDOW,
                       stride: int = DEFAULT_STRIDE) -> LabeledDataset:
    """Stack windows of every recording; each (subject, trial) becomes one group"""
    if not recordings:
        raise DataError("no recordings to window")
    channels = {rec.channels for rec in recordings}
    if len(channels) != 1:
        raise DataError(f"recordings disagree on channel count: {sorted(channels)}")

    group_ids: Dict[Tuple[int, int], int] = {}
    samples, labels, groups = [], [], []
    for rec in recordings:
        group = group_ids.setdefault((rec.subject, rec.trial), len(group_ids))
        windows = sliding_window(rec, win, stride)
        samples.extend(windows)
        labels.extend([rec.label] * len(windows))
        groups.extend([group] * len(windows))

    return LabeledDataset(
        samples=np.vstack(samples),
        labels=np.asarray(labels),
        groups=np.asarray(groups),
        provenance={'generator': 'windows', 'window': win, 'stride': stride,
                    'recordings': len(recordings)},
    )
