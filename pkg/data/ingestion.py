"""CSV ingestion for the two supported layouts.

signal: subject,trial,label,t,ch1..chC  (one row per time step, long format)
vector: label,f1..fd                    (one row per sample)
"""
import logging
import re
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from data.labeled_dataset import LabeledDataset
from data.signals import DEFAULT_STRIDE, DEFAULT_WINDOW, SignalRecording, windows_to_dataset
from utils.errors import ConfigError, DataError
from utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)

SIGNAL_KEYS = ('subject', 'trial', 'label', 't')
SCHEMAS = ('auto', 'signal', 'vector')

_CHANNEL = re.compile(r'^ch(\d+)$')
_FEATURE = re.compile(r'^f(\d+)$')

# pandas row index -> file line (header is line 1)
_FIRST_DATA_LINE = 2


def _numbered_columns(columns: Sequence[str], pattern: re.Pattern, prefix: str) -> List[str]:
    numbered = [c for c in columns if pattern.match(c)]
    if not numbered:
        raise DataError(f"missing {prefix}1 column", line=1, column=f"{prefix}1")
    expected = [f"{prefix}{i}" for i in range(1, len(numbered) + 1)]
    if sorted(numbered, key=lambda c: int(pattern.match(c).group(1))) != expected:
        raise DataError(f"{prefix} columns must be numbered {prefix}1..{prefix}{len(numbered)}", line=1)
    return expected


def _detect_schema(columns: Sequence[str]) -> str:
    if all(key in columns for key in SIGNAL_KEYS):
        return 'signal'
    if 'label' in columns:
        return 'vector'
    raise DataError("header matches neither the signal nor the vector layout", line=1, column='label')


def _validate_cells(frame: pd.DataFrame, columns: Sequence[str], integer: Sequence[str] = ()) -> pd.DataFrame:
    """Coerce every cell to a finite number, reporting the first bad one by file line"""
    numeric = frame[list(columns)].apply(pd.to_numeric, errors='coerce')
    bad = ~np.isfinite(numeric.to_numpy(dtype=np.float64))
    if bad.any():
        row, col = (int(i) for i in np.argwhere(bad)[0])
        raise DataError(f"non-numeric or non-finite value {frame.iat[row, frame.columns.get_loc(columns[col])]!r}",
                        line=row + _FIRST_DATA_LINE, column=columns[col])
    for name in integer:
        values = numeric[name].to_numpy()
        fractional = np.flatnonzero(values != np.round(values))
        if fractional.size:
            raise DataError("integer expected", line=int(fractional[0]) + _FIRST_DATA_LINE, column=name)
    return numeric


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise DataError(f"file not found: {path}")
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError(f"missing header in {path}", line=1)
    except pd.errors.ParserError as e:
        raise DataError(f"malformed CSV {path}: {e}")


def _ingest_signal(frame: pd.DataFrame) -> List[SignalRecording]:
    channels = _numbered_columns(frame.columns, _CHANNEL, 'ch')
    numeric = _validate_cells(frame, list(SIGNAL_KEYS) + channels, integer=('subject', 'trial', 'label'))

    recordings = []
    for (subject, trial, label), group in numeric.groupby(['subject', 'trial', 'label'], sort=True):
        ordered = group.sort_values('t', kind='stable')
        recordings.append(SignalRecording(
            values=ordered[channels].to_numpy(dtype=np.float64).T,
            label=int(label), trial=int(trial), subject=int(subject),
        ))
    logger.info(f"[Ingestion] {len(recordings)} recordings with {len(channels)} channels")
    return recordings


def _ingest_vector(frame: pd.DataFrame) -> LabeledDataset:
    features = _numbered_columns(frame.columns, _FEATURE, 'f')
    numeric = _validate_cells(frame, ['label'] + features, integer=('label',))
    samples = numeric[features].to_numpy(dtype=np.float64).reshape(len(numeric), len(features))
    logger.info(f"[Ingestion] {len(numeric)} samples with {len(features)} features")
    return LabeledDataset(samples=samples, labels=numeric['label'].to_numpy(dtype=np.int64))


def ingest_csv(path: Union[str, Path], schema: str = 'auto') -> Union[List[SignalRecording], LabeledDataset]:
    """Parse a CSV in one of the documented layouts.

    An empty file with a valid header yields an empty result. Bad cells raise
    DataError carrying the file line and column name.
    """
    if schema not in SCHEMAS:
        raise ConfigError(f"Unknown schema '{schema}'. Supported: {', '.join(SCHEMAS)}")
    path = Path(path)
    frame = _read_frame(path)
    frame.columns = [str(c).strip() for c in frame.columns]

    if schema == 'auto':
        schema = _detect_schema(frame.columns)
    elif schema == 'signal':
        missing = [key for key in SIGNAL_KEYS if key not in frame.columns]
        if missing:
            raise DataError(f"missing signal columns {missing}", line=1, column=missing[0])
    elif 'label' not in frame.columns:
        raise DataError("missing label column", line=1, column='label')

    return _ingest_signal(frame) if schema == 'signal' else _ingest_vector(frame)


def write_vector_csv(path: Union[str, Path], ds: LabeledDataset) -> Path:
    """Write the vector layout plus the JSON sidecar holding provenance and groups"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(ds.samples, columns=[f"f{i}" for i in range(1, ds.input_dim + 1)])
    frame.insert(0, 'label', ds.labels)
    frame.to_csv(path, index=False, float_format='%.17g')
    ReportWriter.write_json(LabeledDataset.sidecar_path(path), ds.sidecar())
    logger.info(f"[Ingestion] Wrote {len(ds)} samples to {path}")
    return path


def load_dataset(path: Union[str, Path], win: Optional[int] = None, stride: Optional[int] = None) -> LabeledDataset:
    """Load a dataset file; signal files are windowed, vector files pick up their sidecar if present"""
    parsed = ingest_csv(path)
    if isinstance(parsed, list):
        if not parsed:
            raise DataError(f"no recordings in {path}")
        ds = windows_to_dataset(parsed, win or DEFAULT_WINDOW, stride or DEFAULT_STRIDE)
        ds.provenance['source'] = str(path)
        return ds

    if len(parsed) == 0:
        raise DataError(f"no samples in {path}")
    sidecar_path = LabeledDataset.sidecar_path(path)
    if sidecar_path.exists():
        sidecar = ReportWriter.read_json(sidecar_path)
        names = sidecar.get('class_names')
        return LabeledDataset(
            samples=parsed.samples,
            labels=parsed.labels,
            class_names={int(k): v for k, v in names.items()} if names else None,
            provenance=sidecar.get('provenance', {}),
            groups=sidecar.get('groups'),
        )
    parsed.provenance = {'source': str(path)}
    return parsed
