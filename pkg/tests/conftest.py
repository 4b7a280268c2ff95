import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from data.splits import make_split  # noqa: E402
from data.synthetic import SyntheticConfig, generate_synthetic  # noqa: E402
from losses.loss_types import Batch  # noqa: E402
from models.dual_branch_model import init_model  # noqa: E402
from models.encoder import EncoderConfig  # noqa: E402
from ndnum.tensor import Tensor  # noqa: E402
from services.training_service import TrainConfig  # noqa: E402
from utils.report_writer import ReportWriter  # noqa: E402

TINY_CONFIG = {
    'synthetic': {'n_total_classes': 6, 'n_known_style': 4, 'raw_dim': 6, 'samples_per_class': 20},
    'model': {'hidden_dims': [8], 'feature_dim': 4},
    'split': {'n_known': 3},
    'train': {'epochs': 2, 'batch_size': 16, 'eval_every': 1},
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_synthetic_config():
    return SyntheticConfig(n_total_classes=6, n_known_style=4, raw_dim=6, samples_per_class=20, seed=3)


@pytest.fixture
def tiny_dataset(tiny_synthetic_config):
    return generate_synthetic(tiny_synthetic_config)


@pytest.fixture
def tiny_split(tiny_dataset):
    return make_split(tiny_dataset, n_known=3, test_fraction=0.3, seed=5,
                      known_candidates=tiny_dataset.provenance['known_style_ids'])


@pytest.fixture
def encoder_config():
    return EncoderConfig(input_dim=6, hidden_dims=(8,), feature_dim=4)


@pytest.fixture
def tiny_model(encoder_config):
    return init_model(encoder_config, n_classes=3, seed=11)


@pytest.fixture
def tiny_batch(rng):
    return Batch(
        known_x=Tensor(rng.standard_normal((7, 6))),
        known_y=np.array([0, 1, 2, 0, 1, 2, 0]),
        background_x=Tensor(rng.standard_normal((5, 6))),
    )


@pytest.fixture
def tiny_train_config():
    return TrainConfig(epochs=2, batch_size=16, eval_every=1, seed=4)


@pytest.fixture
def tiny_config_file(tmp_path):
    return ReportWriter.write_json(tmp_path / 'experiment.json', TINY_CONFIG)
