import math
from typing import Iterable, Optional, Sequence, Tuple

Result = Tuple[bool, Optional[str]]


class ConfigValidator:
    """Validation utilities for experiment configurations.

    Every validator returns (is_valid, error_message); callers decide
    which exception to raise.
    """

    @staticmethod
    def validate_positive_int(name: str, value) -> Result:
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            return False, f"{name} must be a positive integer, got {value!r}"
        return True, None

    @staticmethod
    def validate_encoder(input_dim: int, hidden_dims: Sequence[int], feature_dim: int,
                         activation: str, supported: Iterable[str]) -> Result:
        """
        Validate encoder shape:
        - input_dim and feature_dim positive
        - every hidden width positive (empty list means a linear encoder)
        - activation among the supported identifiers
        """
        for name, value in (('input_dim', input_dim), ('feature_dim', feature_dim)):
            is_valid, error = ConfigValidator.validate_positive_int(name, value)
            if not is_valid:
                return False, error

        for width in hidden_dims:
            if width < 1:
                return False, f"hidden_dims must be positive, got {list(hidden_dims)}"

        supported = tuple(supported)
        if activation not in supported:
            return False, f"Unsupported activation '{activation}'. Supported: {', '.join(supported)}"

        return True, None

    @staticmethod
    def validate_loss_weights(**weights: float) -> Result:
        for name, value in weights.items():
            if not math.isfinite(value) or value < 0:
                return False, f"loss weight {name} must be finite and non-negative, got {value}"
        return True, None

    @staticmethod
    def validate_fraction(name: str, value: float, low_inclusive: bool = True,
                          high_inclusive: bool = False) -> Result:
        """Check value lies in [0, 1) by default"""
        low_ok = value >= 0 if low_inclusive else value > 0
        high_ok = value <= 1 if high_inclusive else value < 1
        if not (math.isfinite(value) and low_ok and high_ok):
            left = '[' if low_inclusive else '('
            right = ']' if high_inclusive else ')'
            return False, f"{name} must lie in {left}0, 1{right}, got {value}"
        return True, None

    @staticmethod
    def validate_train(learning_rate: float, batch_size: int, epochs: int,
                       background_fraction: Optional[float], eval_every: int,
                       validation_fraction: float) -> Result:
        if not math.isfinite(learning_rate) or learning_rate <= 0:
            return False, f"learning_rate must be positive, got {learning_rate}"

        if batch_size < 2:
            return False, f"batch_size must be at least 2, got {batch_size}"

        if epochs < 0:
            return False, f"epochs must be non-negative, got {epochs}"

        if eval_every < 0:
            return False, f"eval_every must be non-negative, got {eval_every}"

        if background_fraction is not None:
            is_valid, error = ConfigValidator.validate_fraction('background_fraction', background_fraction)
            if not is_valid:
                return False, error

        return ConfigValidator.validate_fraction('validation_fraction', validation_fraction)

    @staticmethod
    def validate_synthetic(n_total_classes: int, n_known_style: int, raw_dim: int,
                           samples_per_class: int, cluster_spread: float,
                           pseudo_similarity_mix: float, novel_shared: float = 0.0) -> Result:
        """
        Validate synthetic benchmark settings:
        - at least 4 classes (known + background + one test unknown)
        - at least 2 known-style classes and 2 unknown-style classes
        - non-negative spread, mix and novel_shared in [0, 1]
        """
        if n_total_classes < 4:
            return False, f"n_total_classes must be at least 4, got {n_total_classes}"

        if not 2 <= n_known_style <= n_total_classes - 2:
            return False, (f"n_known_style must be between 2 and n_total_classes - 2, "
                           f"got {n_known_style} of {n_total_classes}")

        for name, value in (('raw_dim', raw_dim), ('samples_per_class', samples_per_class)):
            is_valid, error = ConfigValidator.validate_positive_int(name, value)
            if not is_valid:
                return False, error

        if not math.isfinite(cluster_spread) or cluster_spread < 0:
            return False, f"cluster_spread must be non-negative, got {cluster_spread}"

        is_valid, error = ConfigValidator.validate_fraction('pseudo_similarity_mix', pseudo_similarity_mix,
                                                            high_inclusive=True)
        if not is_valid:
            return False, error

        return ConfigValidator.validate_fraction('novel_shared', novel_shared, high_inclusive=True)

    @staticmethod
    def validate_window(length: int, win: int, stride: int) -> Result:
        if stride < 1:
            return False, f"stride must be at least 1, got {stride}"
        if not 1 <= win <= length:
            return False, f"window {win} must lie in [1, {length}]"
        return True, None
