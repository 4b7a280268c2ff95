import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from data.labeled_dataset import LabeledDataset
from data.splits import OpenSetSplit, hold_out_validation
from interfaces.run_repository_interface import IRunRepository
from losses.loss_types import AblationFlags, Batch, LossReport, LossWeights
from losses.total_loss import total_loss
from metrics.osr_metrics import MetricReport
from models.dual_branch_model import DualBranchModel, init_model
from models.encoder import EncoderConfig
from ndnum.tensor import Tensor
from services.evaluation_service import evaluate_model
from utils.errors import ConfigError, DataError, NumericError
from utils.validators import ConfigValidator

logger = logging.getLogger(__name__)

ORTH_WINDOW = 10


@dataclass(frozen=True)
class TrainConfig:
    """Plain SGD settings; background_fraction None means 1/(N+1)"""
    learning_rate: float = 0.01
    batch_size: int = 64
    epochs: int = 50
    background_fraction: Optional[float] = None
    loss_weights: LossWeights = field(default_factory=LossWeights)
    flags: AblationFlags = field(default_factory=AblationFlags)
    seed: int = 0
    eval_every: int = 10
    validation_fraction: float = 0.1

    def __post_init__(self):
        is_valid, error = ConfigValidator.validate_train(
            self.learning_rate, self.batch_size, self.epochs, self.background_fraction,
            self.eval_every, self.validation_fraction
        )
        if not is_valid:
            raise ConfigError(error)

    def background_share(self, n_known: int) -> float:
        if self.background_fraction is not None:
            return self.background_fraction
        return 1.0 / (n_known + 1)

    @property
    def effective_weights(self) -> LossWeights:
        return self.flags.apply(self.loss_weights)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'learning_rate': self.learning_rate,
            'batch_size': self.batch_size,
            'epochs': self.epochs,
            'background_fraction': self.background_fraction,
            'loss_weights': self.loss_weights.to_dict(),
            'flags': self.flags.to_dict(),
            'eval_every': self.eval_every,
            'validation_fraction': self.validation_fraction,
        }

    @classmethod
    def from_dict(cls, values: Dict[str, Any], seed: int = 0) -> 'TrainConfig':
        unknown = set(values) - (set(cls.__dataclass_fields__) - {'seed'})
        if unknown:
            raise ConfigError(f"Unknown train config keys: {', '.join(sorted(unknown))}")
        values = dict(values)
        values['loss_weights'] = LossWeights.from_dict(values.get('loss_weights', {}))
        values['flags'] = AblationFlags.from_dict(values.get('flags', {}))
        return cls(seed=seed, **values)


@dataclass
class TrainingHistory:
    steps: List[LossReport] = field(default_factory=list)
    snapshots: List[Tuple[int, MetricReport]] = field(default_factory=list)
    completed: bool = False
    error: Optional[str] = None

    def orth_ratio(self, window: int = ORTH_WINDOW) -> float:
        """Mean l_orth over the last `window` steps divided by its value at the first step"""
        if not self.steps or self.steps[0].l_orth == 0:
            return float('nan')
        tail = [report.l_orth for report in self.steps[-window:]]
        return float(np.mean(tail)) / self.steps[0].l_orth

    def to_dict(self) -> Dict[str, Any]:
        return {
            'completed': self.completed,
            'error': self.error,
            'steps': [report.to_dict() for report in self.steps],
            'snapshots': [{'epoch': epoch, 'report': report.to_dict()} for epoch, report in self.snapshots],
        }


@dataclass
class RunState:
    model: DualBranchModel
    config: TrainConfig
    rng: np.random.Generator
    step: int = 0
    history: TrainingHistory = field(default_factory=TrainingHistory)


def sample_batch(split: OpenSetSplit, ds: LabeledDataset, cfg: TrainConfig, rng: np.random.Generator) -> Batch:
    """round(batch_size · share) background rows and the rest known rows, uniform with replacement"""
    known_pool = np.asarray(split.train_known, dtype=np.int64)
    background_pool = np.asarray(split.train_background, dtype=np.int64)
    if known_pool.size == 0:
        raise DataError("known training pool is empty")

    m_b = int(round(cfg.batch_size * cfg.background_share(split.n_known))) if background_pool.size else 0
    m_b = min(m_b, cfg.batch_size - 1)
    known_rows = known_pool[rng.integers(0, known_pool.size, size=cfg.batch_size - m_b)]
    if m_b:
        background_x = ds.samples[background_pool[rng.integers(0, background_pool.size, size=m_b)]]
    else:
        background_x = np.zeros((0, ds.input_dim))

    return Batch(
        known_x=Tensor(ds.samples[known_rows]),
        known_y=split.remap(ds.labels[known_rows]),
        background_x=Tensor(background_x),
    )


def apply_sgd(params: List[Tensor], learning_rate: float) -> None:
    """In-place θ ← θ − lr·grad for every parameter holding a gradient"""
    for param in params:
        if param.grad is not None:
            param.data -= learning_rate * param.grad


def sgd_step(state: RunState, batch: Batch) -> RunState:
    """One plain SGD update θ ← θ − lr·∇θ on every parameter of every branch"""
    model = state.model
    model.zero_grad()
    loss, report = total_loss(model, batch, state.config.effective_weights)

    bad_terms = report.non_finite_terms()
    if bad_terms:
        raise NumericError(f"non-finite loss at step {state.step + 1}: {', '.join(bad_terms)}", term=bad_terms[0])

    loss.backward()
    apply_sgd(model.parameters(), state.config.learning_rate)

    state.step += 1
    state.history.steps.append(report)
    return state


def steps_per_epoch(split: OpenSetSplit, batch_size: int) -> int:
    """Minibatches per epoch over the combined known and background pool"""
    pool = len(split.train_known) + len(split.train_background)
    return max(1, pool // batch_size)


def _snapshot(state: RunState, ds: LabeledDataset, split: OpenSetSplit, epoch: int,
              repository: Optional[IRunRepository]) -> None:
    result = evaluate_model(state.model, ds, split, use_validation=True)
    state.history.snapshots.append((epoch, result.report))
    if repository is not None:
        repository.save_snapshot(epoch, {'epoch': epoch, 'step': state.step, **result.report.to_dict()})


def fit(ds: LabeledDataset, split: OpenSetSplit, model_cfg: EncoderConfig, train_cfg: TrainConfig,
        repository: Optional[IRunRepository] = None) -> Tuple[DualBranchModel, TrainingHistory]:
    """
    Train a fresh model for train_cfg.epochs epochs.

    Each epoch runs max(1, pool_size // batch_size) steps. Evaluation snapshots
    (known-validation slice plus unknown test) are taken every eval_every epochs
    and after the last one. On failure the partial history is saved before the
    error propagates.
    """
    if model_cfg.input_dim != ds.input_dim:
        model_cfg = replace(model_cfg, input_dim=ds.input_dim)
    if train_cfg.validation_fraction > 0 and split.validation_known is None:
        split = hold_out_validation(split, ds, train_cfg.validation_fraction, train_cfg.seed)

    model = init_model(model_cfg, split.n_known, train_cfg.seed, dual=train_cfg.flags.multi_projection)
    state = RunState(model=model, config=train_cfg, rng=np.random.default_rng([train_cfg.seed, 2]))
    n_steps = steps_per_epoch(split, train_cfg.batch_size)
    logger.info(f"[Trainer] {train_cfg.flags.label()}: {train_cfg.epochs} epochs x {n_steps} steps, "
                f"lr={train_cfg.learning_rate}, batch={train_cfg.batch_size}")

    try:
        for epoch in range(1, train_cfg.epochs + 1):
            for _ in range(n_steps):
                sgd_step(state, sample_batch(split, ds, train_cfg, state.rng))
                if repository is not None:
                    repository.append_step(state.history.steps[-1].to_log_line(state.step))

            last = state.history.steps[-1]
            logger.info(f"[Trainer] epoch {epoch}/{train_cfg.epochs} step={state.step} "
                        f"total={last.total:.6f} l_orth={last.l_orth:.6f} m_pb={last.m_pb}")
            if epoch == train_cfg.epochs or (train_cfg.eval_every and epoch % train_cfg.eval_every == 0):
                _snapshot(state, ds, split, epoch, repository)
        state.history.completed = True
    except Exception as e:
        state.history.error = f"{type(e).__name__}: {e}"
        logger.error(f"[Trainer] Aborted at step {state.step}: {e}")
        raise
    finally:
        if repository is not None:
            repository.save_history(state.history.to_dict())

    return state.model, state.history
