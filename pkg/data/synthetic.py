"""Gaussian-cluster open-set benchmark.

Known-style classes sit around random unit-scaled means. Unknown-style class
means blend a random convex combination of two known means with a novel
direction; the blend weight controls how strongly unknowns resemble knowns.
Novel directions share a common component across unknown-style classes
(`novel_shared` is its variance share), so the background class carries
information about the unknowns it stands in for.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np

from data.labeled_dataset import LabeledDataset
from utils.errors import ConfigError
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticConfig:
    n_total_classes: int = 13
    n_known_style: int = 8
    raw_dim: int = 24
    samples_per_class: int = 200
    cluster_spread: float = 0.25
    pseudo_similarity_mix: float = 0.7
    novel_shared: float = 0.8
    mean_norm: float = 1.0
    seed: int = 0

    def __post_init__(self):
        is_valid, error = ConfigValidator.validate_synthetic(
            self.n_total_classes, self.n_known_style, self.raw_dim,
            self.samples_per_class, self.cluster_spread, self.pseudo_similarity_mix,
            self.novel_shared
        )
        if not is_valid:
            raise ConfigError(error)
        if not self.mean_norm > 0:
            raise ConfigError(f"mean_norm must be positive, got {self.mean_norm}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'SyntheticConfig':
        unknown = set(values) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unknown synthetic config keys: {', '.join(sorted(unknown))}")
        return cls(**values)


def _unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    directions = rng.standard_normal((n, dim))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def novel_direction(shared: np.ndarray, own: np.ndarray, shared_share: float) -> np.ndarray:
    """Unit vector with `shared_share` of its variance along the common direction"""
    direction = np.sqrt(shared_share) * shared + np.sqrt(1.0 - shared_share) * own
    norm = np.linalg.norm(direction)
    # own == -shared at share 0.5 is the only degenerate case
    return own if norm == 0 else direction / norm


def generate_synthetic(config: SyntheticConfig) -> LabeledDataset:
    rng = np.random.default_rng(config.seed)
    n_known = config.n_known_style
    n_unknown = config.n_total_classes - n_known

    known_means = config.mean_norm * _unit_rows(rng, n_known, config.raw_dim)
    shared = _unit_rows(rng, 1, config.raw_dim)[0]
    unknown_means = np.empty((n_unknown, config.raw_dim))
    parents = []
    for u in range(n_unknown):
        a, b = (int(i) for i in rng.choice(n_known, size=2, replace=False))
        weight = float(rng.uniform())
        blend = weight * known_means[a] + (1.0 - weight) * known_means[b]
        novel = novel_direction(shared, _unit_rows(rng, 1, config.raw_dim)[0], config.novel_shared)
        novel = config.mean_norm * novel
        mix = config.pseudo_similarity_mix
        unknown_means[u] = mix * blend + (1.0 - mix) * novel
        parents.append({'class_id': n_known + u, 'parents': [a, b], 'weight': weight})

    means = np.vstack([known_means, unknown_means])
    spc = config.samples_per_class
    samples = np.repeat(means, spc, axis=0) + config.cluster_spread * rng.standard_normal(
        (config.n_total_classes * spc, config.raw_dim)
    )
    labels = np.repeat(np.arange(config.n_total_classes), spc)

    logger.debug(f"[Synthetic] {config.n_total_classes} classes x {spc} samples, mix={config.pseudo_similarity_mix}")
    return LabeledDataset(
        samples=samples,
        labels=labels,
        class_names={c: ('known_style' if c < n_known else 'unknown_style') + f"_{c}"
                     for c in range(config.n_total_classes)},
        provenance={
            'generator': 'synthetic',
            'config': config.to_dict(),
            'known_style_ids': list(range(n_known)),
            'class_means': means.tolist(),
            'unknown_parents': parents,
            'shared_novel_direction': shared.tolist(),
        },
    )
