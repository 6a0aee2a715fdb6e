"""
Model Training
==============
Mini-batch SGD with inverted dropout, learning-rate reduction on a
validation plateau and early stopping. The parameters of the best
validation epoch are returned.
"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from pydantic import BaseModel, field_validator

from angle_metrics import circular_mae
from neural_net import (
    LossReport, Model, NonFiniteError, forward, loss_and_gradients, loss_report,
    make_dropout_masks, predict_angles,
)
from window_dataset import EmptyInputError, TargetMode, WindowSet

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
SURVEY_EPOCHS = 50
FOCUSED_EPOCHS = 150
HISTORY_COLUMNS = ['epoch', 'train_loss', 'val_loss', 'learning_rate']


class DivergenceError(NonFiniteError):
    """Training produced a non-finite loss or gradient."""

    def __init__(self, epoch: int, message: str = ''):
        self.epoch = epoch
        super().__init__(f"diverged at epoch {epoch}" + (f": {message}" if message else ''))


class TrainingConfig(BaseModel):
    learning_rate: float = 0.01
    dropout_rate: float = 0.30
    batch_size: int = 4096
    max_epochs: int = SURVEY_EPOCHS
    plateau_factor: float = 0.5
    plateau_patience: int = 3
    min_delta: float = 1e-4
    min_learning_rate: float = 1e-6
    early_stop_patience: int = 5
    hidden_width: int = 32
    seed: int = 0

    @field_validator('learning_rate')
    @classmethod
    def _positive_lr(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("learning_rate must be > 0")
        return v

    @field_validator('dropout_rate')
    @classmethod
    def _dropout_range(cls, v: float) -> float:
        if not 0.0 <= v < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        return v

    @field_validator('batch_size', 'max_epochs', 'hidden_width')
    @classmethod
    def _at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator('plateau_factor')
    @classmethod
    def _factor_range(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("plateau_factor must be in (0, 1)")
        return v


class ReduceLROnPlateau:
    def __init__(self, factor: float = 0.5, patience: int = 3,
                 min_delta: float = 1e-4, min_lr: float = 1e-6):
        self.factor = factor
        self.patience = patience
        self.min_delta = min_delta
        self.min_lr = min_lr
        self.best_loss = None
        self.counter = 0

    def __call__(self, val_loss: float, lr: float) -> float:
        if self.best_loss is None or self.best_loss - val_loss > self.min_delta:
            self.best_loss = val_loss
            self.counter = 0
            return lr
        self.counter += 1
        if self.counter >= self.patience:
            self.counter = 0
            return max(lr * self.factor, self.min_lr)
        return lr


class EarlyStopping:
    def __init__(self, patience: int = 5, min_delta: float = 1e-4):
        self.patience = patience
        self.min_delta = min_delta
        self.counter = 0
        self.best_loss = None
        self.early_stop = False

    def __call__(self, val_loss: float) -> bool:
        if self.best_loss is None or self.best_loss - val_loss > self.min_delta:
            self.best_loss = val_loss
            self.counter = 0
        else:
            self.counter += 1
            if self.counter >= self.patience:
                self.early_stop = True
        return self.early_stop


@dataclass
class History:
    rows: list[dict] = field(default_factory=list)

    def record(self, epoch: int, train_loss: float, val_loss: float, lr: float) -> None:
        self.rows.append({'epoch': epoch, 'train_loss': train_loss,
                          'val_loss': val_loss, 'learning_rate': lr})

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def val_losses(self) -> list[float]:
        return [r['val_loss'] for r in self.rows]

    @property
    def train_losses(self) -> list[float]:
        return [r['train_loss'] for r in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=HISTORY_COLUMNS)

    def to_csv(self, path: str) -> str:
        self.to_frame().to_csv(path, index=False)
        return path


@dataclass(frozen=True)
class EvaluationReport:
    loss: LossReport
    mae_phi: float | None = None
    mae_psi: float | None = None


# ======================================================================
class Trainer:
    """Owns one model for the duration of a training run."""

    def __init__(self, config: TrainingConfig, verbose: bool = False):
        self.config = config
        self.verbose = verbose

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message)

    # ------------------------------------------------------------------
    def _epoch(self, model: Model, data: WindowSet, lr: float,
               rng: np.random.Generator, epoch: int) -> float:
        cfg = self.config
        order = rng.permutation(len(data))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            masks = make_dropout_masks(model, len(idx), cfg.dropout_rate, rng)
            try:
                report, grads = loss_and_gradients(model, data.inputs[idx],
                                                   data.targets[idx], masks)
            except NonFiniteError as e:
                raise DivergenceError(epoch, str(e)) from e
            for name, grad in grads.items():
                model.params[name] -= lr * grad
            total += report.mse * len(idx)
        return total / len(order)

    def _validation_loss(self, model: Model, data: WindowSet, epoch: int) -> float:
        try:
            return loss_report(forward(model, data.inputs), data.targets).mse
        except NonFiniteError as e:
            raise DivergenceError(epoch, str(e)) from e

    # ------------------------------------------------------------------
    def fit(self, model: Model, train_set: WindowSet,
            val_set: WindowSet) -> tuple[Model, History]:
        if len(train_set) == 0 or len(val_set) == 0:
            raise EmptyInputError("training and validation sets must be non-empty")
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        model = model.copy()
        scheduler = ReduceLROnPlateau(cfg.plateau_factor, cfg.plateau_patience,
                                      cfg.min_delta, cfg.min_learning_rate)
        stopper = EarlyStopping(cfg.early_stop_patience, cfg.min_delta)
        history = History()
        lr = cfg.learning_rate
        best_loss = np.inf
        best_params = model.copy().params

        self._log(f"Training {model.spec.name} on {len(train_set)} window(s), "
                  f"validating on {len(val_set)}...")
        for epoch in range(1, cfg.max_epochs + 1):
            train_loss = self._epoch(model, train_set, lr, rng, epoch)
            val_loss = self._validation_loss(model, val_set, epoch)
            history.record(epoch, train_loss, val_loss, lr)
            self._log(f"  epoch {epoch:3d}  train={train_loss:.5f}  "
                      f"val={val_loss:.5f}  lr={lr:.2e}")

            if val_loss < best_loss:
                best_loss = val_loss
                best_params = {k: v.copy() for k, v in model.params.items()}
            if stopper(val_loss):
                self._log(f"  early stop after epoch {epoch}")
                break
            lr = scheduler(val_loss, lr)

        model.params = best_params
        self._log(f"✓ Training complete (best val loss {best_loss:.5f})")
        return model, history


def train(model: Model, train_set: WindowSet, val_set: WindowSet,
          config: TrainingConfig, verbose: bool = False) -> tuple[Model, History]:
    return Trainer(config, verbose=verbose).fit(model, train_set, val_set)


def evaluate(model: Model, window_set: WindowSet, mode: TargetMode) -> EvaluationReport:
    """Codec-space loss plus degree-space circular MAE per predicted angle."""
    if len(window_set) == 0:
        raise EmptyInputError("cannot evaluate on an empty window set")
    mode = TargetMode(mode)
    loss = loss_report(forward(model, window_set.inputs), window_set.targets)
    predicted = predict_angles(model, window_set.inputs)
    maes = {name: circular_mae(predicted[:, k], window_set.angles[:, k])
            for k, name in enumerate(mode.angle_names)}
    return EvaluationReport(loss=loss, mae_phi=maes.get('phi'), mae_psi=maes.get('psi'))
