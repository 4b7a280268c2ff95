import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from data.labeled_dataset import LabeledDataset
from utils.errors import ContractError, DataError
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)

INDEX_LISTS = ('train_known', 'test_known', 'train_background', 'test_unknown')


@dataclass
class OpenSetSplit:
    """Known / background / unknown partition of a labeled dataset.

    Index lists refer to rows of the dataset the split was made from.
    """
    known_class_ids: List[int]
    background_class_id: int
    unknown_class_ids: List[int]
    train_known: List[int]
    test_known: List[int]
    train_background: List[int]
    test_unknown: List[int]
    seed: int
    include_background_in_test: bool = False
    validation_known: Optional[List[int]] = None

    @property
    def n_known(self) -> int:
        return len(self.known_class_ids)

    @property
    def label_map(self) -> Dict[int, int]:
        """Original known class id -> position in [0, N)"""
        return {class_id: i for i, class_id in enumerate(self.known_class_ids)}

    def remap(self, labels: Iterable[int]) -> np.ndarray:
        mapping = self.label_map
        try:
            return np.asarray([mapping[int(label)] for label in labels], dtype=np.int64)
        except KeyError as e:
            raise DataError(f"label {e.args[0]} is not a known class")

    def validate(self, ds: Optional[LabeledDataset] = None) -> None:
        known = set(self.known_class_ids)
        unknown = set(self.unknown_class_ids)
        if known & unknown or self.background_class_id in known | unknown:
            raise ContractError("known, background and unknown class ids must be disjoint")

        seen: Dict[int, str] = {}
        lists = {name: getattr(self, name) for name in INDEX_LISTS}
        if self.validation_known is not None:
            lists['validation_known'] = self.validation_known
        for name, indices in lists.items():
            for index in indices:
                if index in seen:
                    raise ContractError(f"sample {index} appears in both {seen[index]} and {name}")
                seen[index] = name

        if ds is None:
            return
        if known | unknown | {self.background_class_id} != set(ds.class_ids):
            raise ContractError("split class ids do not cover the dataset classes")
        expected = {
            'train_known': known, 'test_known': known, 'validation_known': known,
            'train_background': {self.background_class_id},
            'test_unknown': unknown | ({self.background_class_id} if self.include_background_in_test else set()),
        }
        for name, indices in lists.items():
            stray = set(int(c) for c in ds.labels[list(indices)]) - expected[name]
            if stray:
                raise ContractError(f"{name} holds samples of classes {sorted(stray)}")

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            'known_class_ids': [int(c) for c in self.known_class_ids],
            'background_class_id': int(self.background_class_id),
            'unknown_class_ids': [int(c) for c in self.unknown_class_ids],
            'seed': int(self.seed),
            'include_background_in_test': bool(self.include_background_in_test),
        }
        for name in INDEX_LISTS:
            payload[name] = [int(i) for i in getattr(self, name)]
        if self.validation_known is not None:
            payload['validation_known'] = [int(i) for i in self.validation_known]
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'OpenSetSplit':
        try:
            return cls(
                known_class_ids=list(payload['known_class_ids']),
                background_class_id=int(payload['background_class_id']),
                unknown_class_ids=list(payload['unknown_class_ids']),
                train_known=list(payload['train_known']),
                test_known=list(payload['test_known']),
                train_background=list(payload['train_background']),
                test_unknown=list(payload['test_unknown']),
                seed=int(payload['seed']),
                include_background_in_test=bool(payload.get('include_background_in_test', False)),
                validation_known=payload.get('validation_known'),
            )
        except KeyError as e:
            raise DataError(f"split manifest is missing '{e.args[0]}'")


def _test_count(n: int, test_fraction: float) -> int:
    return min(n - 1, max(1, int(round(test_fraction * n))))


def _split_by_sample(indices: np.ndarray, test_fraction: float, rng: np.random.Generator) -> Tuple[List[int], List[int]]:
    shuffled = rng.permutation(indices)
    n_test = _test_count(len(shuffled), test_fraction)
    return sorted(int(i) for i in shuffled[n_test:]), sorted(int(i) for i in shuffled[:n_test])


def _split_by_group(indices: np.ndarray, groups: np.ndarray, test_fraction: float,
                    rng: np.random.Generator) -> Tuple[List[int], List[int]]:
    class_groups = np.unique(groups[indices])
    if len(class_groups) < 2:
        return _split_by_sample(indices, test_fraction, rng)
    shuffled = rng.permutation(class_groups)
    test_groups = shuffled[:_test_count(len(shuffled), test_fraction)]
    in_test = np.isin(groups[indices], test_groups)
    return sorted(int(i) for i in indices[~in_test]), sorted(int(i) for i in indices[in_test])


def make_split(ds: LabeledDataset, n_known: int, test_fraction: float, seed: int,
               include_background_in_test: bool = False,
               known_candidates: Optional[Iterable[int]] = None) -> OpenSetSplit:
    """
    Partition classes into n_known known ids, one background id and the rest unknown.

    Known samples are split train/test per test_fraction, stratified by class (by
    trial group when the dataset carries groups). Background samples train; unknown
    samples test. With include_background_in_test the background class is split
    like a known class and its held-out part joins test_unknown.
    """
    is_valid, error = ConfigValidator.validate_fraction('test_fraction', test_fraction, low_inclusive=False)
    if not is_valid:
        raise DataError(error)
    class_ids = ds.class_ids
    if n_known < 1 or len(class_ids) < n_known + 2:
        raise DataError(f"need at least n_known + 2 = {n_known + 2} classes, dataset has {len(class_ids)}")
    for class_id in class_ids:
        if len(ds.indices_of(class_id)) < 2:
            raise DataError(f"class {class_id} has fewer than 2 samples")

    rng = np.random.default_rng(seed)
    pool = class_ids if known_candidates is None else sorted(set(int(c) for c in known_candidates) & set(class_ids))
    if len(pool) < n_known:
        raise DataError(f"only {len(pool)} known candidates for n_known={n_known}")
    known = sorted(int(c) for c in rng.choice(pool, size=n_known, replace=False))
    remainder = [c for c in class_ids if c not in known]
    background = int(rng.choice(remainder))
    unknown = [c for c in remainder if c != background]

    train_known, test_known = [], []
    for class_id in known:
        indices = ds.indices_of(class_id)
        if ds.groups is None:
            train, test = _split_by_sample(indices, test_fraction, rng)
        else:
            train, test = _split_by_group(indices, ds.groups, test_fraction, rng)
        train_known.extend(train)
        test_known.extend(test)

    background_indices = ds.indices_of(background)
    if include_background_in_test:
        train_background, background_test = _split_by_sample(background_indices, test_fraction, rng)
    else:
        train_background, background_test = [int(i) for i in background_indices], []

    test_unknown = sorted([int(i) for c in unknown for i in ds.indices_of(c)] + background_test)

    split = OpenSetSplit(
        known_class_ids=known,
        background_class_id=background,
        unknown_class_ids=unknown,
        train_known=sorted(train_known),
        test_known=sorted(test_known),
        train_background=sorted(train_background),
        test_unknown=test_unknown,
        seed=seed,
        include_background_in_test=include_background_in_test,
    )
    split.validate(ds)
    logger.info(f"[Split] seed={seed} known={known} background={background} unknown={unknown}")
    return split


def hold_out_validation(split: OpenSetSplit, ds: LabeledDataset, fraction: float, seed: int) -> OpenSetSplit:
    """Move a stratified slice of train_known into validation_known; classes with one train sample stay whole"""
    if fraction == 0:
        return split
    rng = np.random.default_rng([seed, 1])
    train_known = np.asarray(split.train_known, dtype=np.int64)
    kept, held = [], []
    for class_id in split.known_class_ids:
        indices = train_known[ds.labels[train_known] == class_id]
        if len(indices) < 2:
            kept.extend(int(i) for i in indices)
            continue
        train, validation = _split_by_sample(indices, fraction, rng)
        kept.extend(train)
        held.extend(validation)
    return OpenSetSplit(
        known_class_ids=split.known_class_ids,
        background_class_id=split.background_class_id,
        unknown_class_ids=split.unknown_class_ids,
        train_known=sorted(kept),
        test_known=split.test_known,
        train_background=split.train_background,
        test_unknown=split.test_unknown,
        seed=split.seed,
        include_background_in_test=split.include_background_in_test,
        validation_known=sorted(held),
    )
