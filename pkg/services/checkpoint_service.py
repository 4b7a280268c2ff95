"""Binary model checkpoints.

Layout (little-endian): magic b"OPCK", uint16 version, uint32 metadata length,
UTF-8 JSON metadata with sorted keys, then every tensor as float64 in the order
of metadata["tensors"].
"""
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import ujson

from models.dual_branch_model import DualBranchModel, init_model
from models.encoder import EncoderConfig
from utils.errors import DataError

logger = logging.getLogger(__name__)

MAGIC = b'OPCK'
FORMAT_VERSION = 1
_HEADER = struct.Struct('<4sHI')
_FLOAT = np.dtype('<f8')


def encode_checkpoint(model: DualBranchModel) -> bytes:
    named = model.named_parameters()
    metadata = {
        'config': model.config.to_dict(),
        'n_classes': int(model.n_classes),
        'seed': int(model.seed),
        'dual': bool(model.dual),
        'tensors': [{'name': name, 'shape': list(t.shape)} for name, t in named],
    }
    meta_bytes = ujson.dumps(metadata, sort_keys=True).encode('utf-8')
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, len(meta_bytes)), meta_bytes]
    parts.extend(np.ascontiguousarray(t.data, dtype=_FLOAT).tobytes() for _, t in named)
    return b''.join(parts)


def decode_checkpoint(blob: bytes) -> DualBranchModel:
    """Inverse of encode_checkpoint. Any malformed input raises DataError"""
    if len(blob) < _HEADER.size:
        raise DataError("checkpoint is truncated before its header")
    magic, version, meta_len = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"not a checkpoint (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint version {version}")

    offset = _HEADER.size
    try:
        metadata: Dict[str, Any] = ujson.loads(blob[offset:offset + meta_len].decode('utf-8'))
    except (UnicodeDecodeError, ValueError) as e:
        raise DataError(f"checkpoint metadata is unreadable: {e}")
    offset += meta_len

    try:
        entries = [(entry['name'], tuple(int(n) for n in entry['shape'])) for entry in metadata['tensors']]
        model = init_model(EncoderConfig.from_dict(metadata['config']), metadata['n_classes'],
                           metadata['seed'], dual=metadata['dual'])
    except KeyError as e:
        raise DataError(f"checkpoint metadata is missing {e}")
    except (TypeError, ValueError) as e:
        raise DataError(f"checkpoint metadata is malformed: {e}")

    expected = sum(int(np.prod(shape)) for _, shape in entries) * _FLOAT.itemsize
    if len(blob) - offset != expected:
        raise DataError(f"checkpoint holds {len(blob) - offset} data bytes, expected {expected}")

    params = dict(model.named_parameters())
    for name, shape in entries:
        tensor = params.get(name)
        if tensor is None or tensor.shape != shape:
            raise DataError(f"checkpoint tensor {name} {shape} does not fit the model")
        count = int(np.prod(shape))
        tensor.data[...] = np.frombuffer(blob, dtype=_FLOAT, count=count, offset=offset).reshape(shape)
        offset += count * _FLOAT.itemsize
    return model


def save_checkpoint(path: Union[str, Path], model: DualBranchModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(model))
    logger.info(f"[Checkpoint] Saved {len(model.parameters())} tensors to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> DualBranchModel:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    model = decode_checkpoint(path.read_bytes())
    logger.info(f"[Checkpoint] Loaded {path}")
    return model
