from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ndnum import functional as F
from ndnum.tensor import Tensor
from utils.errors import ConfigError, DimensionError
from utils.validators import ConfigValidator

SUPPORTED_ACTIVATIONS = ('relu',)


@dataclass(frozen=True)
class EncoderConfig:
    """Feed-forward encoder shape: linear -> relu per hidden layer, then a bias-free projection to d"""
    input_dim: int
    hidden_dims: Tuple[int, ...] = (64, 64)
    feature_dim: int = 32
    activation: str = 'relu'

    def __post_init__(self):
        object.__setattr__(self, 'hidden_dims', tuple(int(h) for h in self.hidden_dims))
        is_valid, error = ConfigValidator.validate_encoder(
            self.input_dim, self.hidden_dims, self.feature_dim, self.activation, SUPPORTED_ACTIVATIONS
        )
        if not is_valid:
            raise ConfigError(error)

    @property
    def layer_dims(self) -> List[Tuple[int, int]]:
        dims = [self.input_dim, *self.hidden_dims, self.feature_dim]
        return list(zip(dims[:-1], dims[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'input_dim': self.input_dim,
            'hidden_dims': list(self.hidden_dims),
            'feature_dim': self.feature_dim,
            'activation': self.activation,
        }

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'EncoderConfig':
        return cls(
            input_dim=int(values['input_dim']),
            hidden_dims=tuple(values.get('hidden_dims', (64, 64))),
            feature_dim=int(values.get('feature_dim', 32)),
            activation=values.get('activation', 'relu'),
        )


@dataclass
class Encoder:
    config: EncoderConfig
    weights: List[Tensor] = field(default_factory=list)
    biases: List[Optional[Tensor]] = field(default_factory=list)

    @classmethod
    def initialize(cls, config: EncoderConfig, rng: np.random.Generator) -> 'Encoder':
        """Glorot-uniform weights, zero hidden biases, no bias on the final projection"""
        encoder = cls(config)
        n_layers = len(config.layer_dims)
        for i, (fan_in, fan_out) in enumerate(config.layer_dims):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            encoder.weights.append(Tensor(rng.uniform(-limit, limit, size=(fan_in, fan_out)), requires_grad=True))
            is_last = i == n_layers - 1
            encoder.biases.append(None if is_last else Tensor(np.zeros(fan_out), requires_grad=True))
        return encoder

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.config.input_dim:
            raise DimensionError(
                f"encoder expects [batch x {self.config.input_dim}] input", x.shape
            )
        h = x
        last = len(self.weights) - 1
        for i, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            h = F.matmul(h, weight)
            if i < last:
                h = F.relu(F.add_row(h, bias))
        return h

    def parameters(self) -> List[Tensor]:
        params: List[Tensor] = []
        for weight, bias in zip(self.weights, self.biases):
            params.append(weight)
            if bias is not None:
                params.append(bias)
        return params

    def named_parameters(self, prefix: str) -> List[Tuple[str, Tensor]]:
        named = []
        for i, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            named.append((f"{prefix}.layer{i}.weight", weight))
            if bias is not None:
                named.append((f"{prefix}.layer{i}.bias", bias))
        return named
