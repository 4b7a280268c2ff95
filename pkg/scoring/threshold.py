from typing import Sequence

import numpy as np

from utils.errors import ConfigError, DataError
from utils.validators import ConfigValidator


def calibrate_threshold(scores_known_validation: Sequence[float], target_fpr_proxy: float = 0.05) -> float:
    """Lower-interpolated quantile of known-validation C_max at the target level.

    With a strict "greater than" decision the sample sitting exactly on the
    threshold is rejected, so target 0 returns the minimum and rejects it.
    """
    scores = np.asarray(scores_known_validation, dtype=np.float64)
    if scores.size == 0:
        raise DataError("cannot calibrate a threshold from an empty score list")
    is_valid, error = ConfigValidator.validate_fraction('target_fpr_proxy', target_fpr_proxy)
    if not is_valid:
        raise ConfigError(error)
    return float(np.quantile(scores, target_fpr_proxy, method='lower'))
