import copy
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import ujson

from data.synthetic import SyntheticConfig
from models.encoder import EncoderConfig
from services.run_repository import config_digest
from services.training_service import TrainConfig
from utils.errors import ConfigError
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)

SECTIONS = ('synthetic', 'model', 'split', 'train')


@dataclass(frozen=True)
class SplitConfig:
    n_known: int = 8
    test_fraction: float = 0.3
    include_background_in_test: bool = False
    known_style_only: bool = True

    def __post_init__(self):
        is_valid, error = ConfigValidator.validate_positive_int('n_known', self.n_known)
        if is_valid:
            is_valid, error = ConfigValidator.validate_fraction('test_fraction', self.test_fraction,
                                                                low_inclusive=False)
        if not is_valid:
            raise ConfigError(error)


class ConfigManager:
    """Experiment configuration: JSON file sections over documented defaults, then CLI overrides"""

    def __init__(self, config_path: Optional[Union[str, Path]] = None, seed: Optional[int] = None):
        self.config_path = Path(config_path) if config_path else None
        self._config: Dict[str, Any] = self._get_default_config()
        if self.config_path is not None:
            self._merge(self._load_config())
        if seed is not None:
            self._config['seed'] = int(seed)
        self._validate()

    def get(self, key: str, default: Any = None) -> Any:
        return self._config.get(key, default)

    @property
    def seed(self) -> int:
        return int(self._config['seed'])

    def set_section(self, section: str, values: Dict[str, Any]) -> None:
        """Override keys of one section (e.g. per ablation cell)"""
        self._merge({section: values})
        self._validate()

    def with_seed(self, seed: int) -> 'ConfigManager':
        """Copy of this configuration with only the seed replaced"""
        clone = copy.copy(self)
        clone._config = self.resolved()
        clone._config['seed'] = int(seed)
        return clone

    def resolved(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    def digest(self) -> str:
        return config_digest(self._config)

    def synthetic_config(self) -> SyntheticConfig:
        return SyntheticConfig(seed=self.seed, **self._config['synthetic'])

    def encoder_config(self, input_dim: int) -> EncoderConfig:
        return EncoderConfig(input_dim=input_dim, **self._config['model'])

    def split_config(self) -> SplitConfig:
        return SplitConfig(**self._config['split'])

    def train_config(self) -> TrainConfig:
        return TrainConfig.from_dict(self._config['train'], seed=self.seed)

    def _load_config(self) -> Dict[str, Any]:
        if not self.config_path.exists():
            raise ConfigError(f"config file not found: {self.config_path}")
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                loaded = ujson.load(f)
        except ValueError as e:
            raise ConfigError(f"config file {self.config_path} is not valid JSON: {e}")
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {self.config_path} must hold a JSON object")
        # run directories store {"config": ..., "config_md5": ...}
        if set(loaded) == {'config', 'config_md5'}:
            loaded = loaded['config']
        logger.debug(f"[ConfigManager] Loaded {self.config_path}")
        return loaded

    def _merge(self, values: Dict[str, Any]) -> None:
        unknown = set(values) - set(SECTIONS) - {'seed'}
        if unknown:
            raise ConfigError(f"Unknown config sections: {', '.join(sorted(unknown))}")
        for section, section_values in values.items():
            if section == 'seed':
                self._config['seed'] = int(section_values)
                continue
            if not isinstance(section_values, dict):
                raise ConfigError(f"config section '{section}' must be an object")
            defaults = self._config[section]
            stray = set(section_values) - set(defaults)
            if stray:
                raise ConfigError(f"Unknown keys in '{section}': {', '.join(sorted(stray))}")
            for key, value in section_values.items():
                if isinstance(defaults[key], dict) and isinstance(value, dict):
                    inner_stray = set(value) - set(defaults[key])
                    if inner_stray:
                        raise ConfigError(f"Unknown keys in '{section}.{key}': {', '.join(sorted(inner_stray))}")
                    defaults[key].update(value)
                else:
                    defaults[key] = value

    def _validate(self) -> None:
        self.synthetic_config()
        EncoderConfig(input_dim=1, **self._config['model'])
        self.split_config()
        self.train_config()

    def _get_default_config(self) -> Dict[str, Any]:
        synthetic = SyntheticConfig().to_dict()
        synthetic.pop('seed')
        model = EncoderConfig(input_dim=1).to_dict()
        model.pop('input_dim')
        return {
            'seed': 0,
            'synthetic': synthetic,
            'model': model,
            'split': {
                'n_known': 8,
                'test_fraction': 0.3,
                'include_background_in_test': False,
                'known_style_only': True,
            },
            'train': TrainConfig().to_dict(),
        }
