from dataclasses import asdict, dataclass, fields
from typing import Any, ClassVar, Dict, Tuple

import numpy as np

from ndnum.tensor import Tensor
from utils.errors import ConfigError
from utils.validators import ConfigValidator


@dataclass(frozen=True)
class LossWeights:
    """λ, γ weight L_F and L_Fb inside FAEM; α, β weight L_orth and L_Pb"""
    lam: float = 1.0
    gamma: float = 1.0
    alpha: float = 0.1
    beta: float = 0.01

    def __post_init__(self):
        is_valid, error = ConfigValidator.validate_loss_weights(
            lam=self.lam, gamma=self.gamma, alpha=self.alpha, beta=self.beta
        )
        if not is_valid:
            raise ConfigError(error)

    def to_dict(self) -> Dict[str, float]:
        return {'lambda': self.lam, 'gamma': self.gamma, 'alpha': self.alpha, 'beta': self.beta}

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'LossWeights':
        unknown = set(values) - {'lambda', 'gamma', 'alpha', 'beta'}
        if unknown:
            raise ConfigError(f"Unknown loss weight keys: {', '.join(sorted(unknown))}")
        defaults = cls()
        return cls(
            lam=float(values.get('lambda', defaults.lam)),
            gamma=float(values.get('gamma', defaults.gamma)),
            alpha=float(values.get('alpha', defaults.alpha)),
            beta=float(values.get('beta', defaults.beta)),
        )


@dataclass(frozen=True)
class AblationFlags:
    """Which components of the method are switched on (MP = two branches)"""
    multi_projection: bool = True
    use_l_f: bool = True
    use_l_fb: bool = True
    use_orth: bool = True
    use_penalty: bool = True

    def apply(self, weights: LossWeights) -> LossWeights:
        """Zero the weight of every disabled term; cross-branch terms need two branches"""
        return LossWeights(
            lam=weights.lam if self.use_l_f else 0.0,
            gamma=weights.gamma if self.use_l_fb else 0.0,
            alpha=weights.alpha if self.multi_projection and self.use_orth else 0.0,
            beta=weights.beta if self.multi_projection and self.use_penalty else 0.0,
        )

    def label(self) -> str:
        marks = [('MP', self.multi_projection), ('L_F', self.use_l_f), ('L_Fb', self.use_l_fb),
                 ('L_orth', self.use_orth), ('L_Pb', self.use_penalty)]
        enabled = [name for name, on in marks if on]
        return '+'.join(enabled) if enabled else 'PL'

    def to_dict(self) -> Dict[str, bool]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'AblationFlags':
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"Unknown ablation flags: {', '.join(sorted(unknown))}")
        return cls(**{k: bool(v) for k, v in values.items()})


@dataclass
class Batch:
    """Known samples with labels in [0, N) plus background samples (possibly none)"""
    known_x: Tensor
    known_y: np.ndarray
    background_x: Tensor

    @property
    def m(self) -> int:
        return self.known_x.shape[0]

    @property
    def m_b(self) -> int:
        return self.background_x.shape[0]


@dataclass
class LossReport:
    l_eps_a: float = 0.0
    l_eps_b: float = 0.0
    l_f_a: float = 0.0
    l_f_b: float = 0.0
    l_fb_a: float = 0.0
    l_fb_b: float = 0.0
    l_orth: float = 0.0
    l_pb: float = 0.0
    total: float = 0.0
    m_pb: int = 0

    TERMS: ClassVar[Tuple[str, ...]] = (
        'l_eps_a', 'l_eps_b', 'l_f_a', 'l_f_b', 'l_fb_a', 'l_fb_b', 'l_orth', 'l_pb', 'total'
    )

    def weighted_total(self, weights: LossWeights) -> float:
        """Recombine the logged terms with the given weights (both branches summed)"""
        faem_a = self.l_eps_a + weights.lam * self.l_f_a + weights.gamma * self.l_fb_a
        faem_b = self.l_eps_b + weights.lam * self.l_f_b + weights.gamma * self.l_fb_b
        return faem_a + faem_b + weights.alpha * self.l_orth + weights.beta * self.l_pb

    def non_finite_terms(self):
        """Names of terms that came out NaN or infinite"""
        return [name for name in self.TERMS if not np.isfinite(getattr(self, name))]

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in (*self.TERMS, 'm_pb')}

    def to_log_line(self, step: int) -> str:
        """One key=value line per step, as written to steps.log"""
        values = ' '.join(f"{name}={getattr(self, name)!r}" for name in self.TERMS)
        return f"step={step} {values} m_pb={self.m_pb}"

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'LossReport':
        report = cls(**{name: float(values[name]) for name in cls.TERMS})
        report.m_pb = int(values.get('m_pb', 0))
        return report
