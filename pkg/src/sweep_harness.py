"""
Architecture / Encoding / Window Sweep
======================================
Enumerates the grid (encodings x window sizes x models x target modes),
trains and evaluates one model per cell, and journals every result as a
JSON line so an interrupted sweep can resume where it stopped.

The default grid has 11 x 11 x 7 x 3 = 2541 cells.
"""

import hashlib
import itertools
import os
import time
from dataclasses import dataclass
from enum import Enum

import yaml
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from threadpoolctl import threadpool_limits

from angle_codec import AmbiguousAngleError
from model_training import DivergenceError, TrainingConfig, evaluate, train
from neural_net import MODEL_NAMES, NonFiniteError, build_model
from residue_encoder import SCHEME_NAMES, canonical_name
from window_dataset import (
    PARTITIONS, WINDOW_SIZES, Corpus, DatasetBuilder, SplitManifest, TargetMode,
    WindowConfig, build_partitions, split_proteins,
)

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
FOCUSED_WINDOWS = [7, 9, 11, 13]
FOCUSED_MODEL = 'LSTM5'
FOCUSED_EPOCHS = 150


class JournalError(ValueError):
    """A journal line in the middle of the file cannot be parsed."""


class CellStatus(str, Enum):
    COMPLETED = 'COMPLETED'
    DIVERGED = 'DIVERGED'
    SKIPPED = 'SKIPPED'


@dataclass(frozen=True)
class GridCell:
    encoding: str
    window_size: int
    model: str
    target_mode: TargetMode

    def key(self) -> str:
        return f"{self.encoding}|{self.window_size}|{self.model}|{TargetMode(self.target_mode).value}"


class SweepGrid(BaseModel):
    model_config = ConfigDict(extra='forbid')

    encodings: list[str] = Field(default_factory=lambda: list(SCHEME_NAMES))
    window_sizes: list[int] = Field(default_factory=lambda: list(WINDOW_SIZES))
    models: list[str] = Field(default_factory=lambda: list(MODEL_NAMES))
    target_modes: list[TargetMode] = Field(default_factory=lambda: list(TargetMode))
    training: dict = Field(default_factory=dict)

    @field_validator('encodings')
    @classmethod
    def _known_encodings(cls, v: list[str]) -> list[str]:
        try:
            return [canonical_name(name) for name in v]
        except KeyError as e:
            raise ValueError(str(e)) from None

    @field_validator('window_sizes')
    @classmethod
    def _valid_windows(cls, v: list[int]) -> list[int]:
        bad = [w for w in v if w not in WINDOW_SIZES]
        if bad:
            raise ValueError(f"window sizes {bad} not in {WINDOW_SIZES}")
        return v

    @field_validator('models')
    @classmethod
    def _known_models(cls, v: list[str]) -> list[str]:
        v = [m.upper() for m in v]
        bad = [m for m in v if m not in MODEL_NAMES]
        if bad:
            raise ValueError(f"unknown models {bad}; choose from {MODEL_NAMES}")
        return v

    @field_validator('training')
    @classmethod
    def _training_overrides(cls, v: dict) -> dict:
        try:
            TrainingConfig(**v)
        except ValidationError as e:
            raise ValueError(f"invalid training overrides: {e}") from None
        return v

    # ------------------------------------------------------------------
    @classmethod
    def focused(cls) -> 'SweepGrid':
        """Narrowed follow-up grid: deep LSTM, one-hot, mid-size windows."""
        return cls(encodings=['one-hot'], window_sizes=FOCUSED_WINDOWS,
                   models=[FOCUSED_MODEL], training={'max_epochs': FOCUSED_EPOCHS})

    @classmethod
    def from_yaml(cls, path: str) -> 'SweepGrid':
        with open(path, 'r') as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: grid file must be a mapping")
        return cls(**raw)

    def training_config(self, base: TrainingConfig | None = None) -> TrainingConfig:
        base = base or TrainingConfig()
        return TrainingConfig(**{**base.model_dump(), **self.training})

    def cells(self) -> list[GridCell]:
        return [GridCell(e, w, m, t) for e, w, m, t in itertools.product(
            self.encodings, self.window_sizes, self.models, self.target_modes)]

    def __len__(self) -> int:
        return len(self.encodings) * len(self.window_sizes) * len(self.models) * len(self.target_modes)


class SweepResult(BaseModel):
    encoding: str
    window_size: int
    model: str
    target_mode: TargetMode
    status: CellStatus
    codec_rmse: float | None = None
    codec_mse: float | None = None
    degree_mae_phi: float | None = None
    degree_mae_psi: float | None = None
    epochs_run: int = 0
    seed: int = 0
    n_test: int = 0
    reason: str | None = None

    @property
    def cell(self) -> GridCell:
        return GridCell(self.encoding, self.window_size, self.model, self.target_mode)


@dataclass
class SweepData:
    """Corpus and the protein split shared by every cell of a sweep."""
    corpus: Corpus
    split: SplitManifest | None

    @classmethod
    def from_corpus(cls, corpus: Corpus, seed: int) -> 'SweepData':
        ids = corpus.protein_ids()
        return cls(corpus, split_proteins(ids, seed) if ids else None)

    @classmethod
    def from_manifest(cls, manifest_path: str, seed: int,
                      class_label: str | None = None, verbose: bool = False) -> 'SweepData':
        builder = DatasetBuilder(verbose=verbose)
        return cls.from_corpus(builder.load(manifest_path, class_label), seed)


# ------------------------------------------------------------------
# Cells
# ------------------------------------------------------------------
def cell_seed(global_seed: int, cell: GridCell) -> int:
    digest = hashlib.sha256(f"{global_seed}|{cell.key()}".encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'little')


def run_cell(cell: GridCell, data: SweepData, config: TrainingConfig) -> SweepResult:
    mode = TargetMode(cell.target_mode)
    seed = cell_seed(config.seed, cell)
    base = dict(encoding=cell.encoding, window_size=cell.window_size, model=cell.model,
                target_mode=mode, seed=seed)

    if data.split is None or not data.corpus.chains:
        return SweepResult(**base, status=CellStatus.SKIPPED, reason='empty corpus')

    window_config = WindowConfig(window_size=cell.window_size, scheme=cell.encoding,
                                 target_mode=mode)
    parts = build_partitions(data.corpus, data.split, window_config)
    empty = [name for name in PARTITIONS if len(parts[name]) == 0]
    if empty:
        return SweepResult(**base, status=CellStatus.SKIPPED,
                           reason=f"no windows in {', '.join(empty)} partition(s)")

    cell_config = config.model_copy(update={'seed': seed})
    # single-threaded BLAS keeps results bit-identical across worker counts
    with threadpool_limits(limits=1):
        model = build_model(cell.model, mode.output_width, cell_config.hidden_width,
                            seed=seed, window_size=cell.window_size)
        try:
            trained, history = train(model, parts['train'], parts['validation'], cell_config)
            report = evaluate(trained, parts['test'], mode)
        except DivergenceError as e:
            return SweepResult(**base, status=CellStatus.DIVERGED, epochs_run=e.epoch,
                               n_test=len(parts['test']), reason=str(e))
        except (NonFiniteError, AmbiguousAngleError) as e:
            return SweepResult(**base, status=CellStatus.DIVERGED,
                               n_test=len(parts['test']), reason=str(e))

    return SweepResult(
        **base,
        status=CellStatus.COMPLETED,
        codec_rmse=report.loss.rmse,
        codec_mse=report.loss.mse,
        degree_mae_phi=report.mae_phi,
        degree_mae_psi=report.mae_psi,
        epochs_run=len(history),
        n_test=report.loss.n,
    )


# ------------------------------------------------------------------
# Journal
# ------------------------------------------------------------------
def read_journal(path: str) -> list[SweepResult]:
    """Results in journal order. A truncated last line (killed writer) is ignored."""
    if not os.path.exists(path):
        return []
    with open(path, 'r') as fh:
        lines = fh.read().split('\n')
    results = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            results.append(SweepResult.model_validate_json(line))
        except ValueError as e:
            if i == len(lines) - 1:
                break
            raise JournalError(f"{path}:{i + 1}: unreadable journal line ({e})") from e
    return results


def _append(path: str, result: SweepResult) -> None:
    with open(path, 'a') as fh:
        fh.write(result.model_dump_json() + '\n')
        fh.flush()


def _repair_tail(path: str) -> None:
    """Drop an unterminated last line so appends start on a fresh line."""
    if not os.path.exists(path):
        return
    with open(path, 'rb') as fh:
        blob = fh.read()
    if blob and not blob.endswith(b'\n'):
        with open(path, 'wb') as fh:
            fh.write(blob[:blob.rfind(b'\n') + 1])


# ======================================================================
class SweepRunner:
    def __init__(self, verbose: bool = True):
        self.verbose = verbose

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message)

    # ------------------------------------------------------------------
    def run(self, grid: SweepGrid, data: SweepData, config: TrainingConfig,
            workers: int = 1, journal_path: str | None = None,
            resume: bool = False) -> list[SweepResult]:
        cells = grid.cells()
        if not cells:
            raise ValueError("sweep grid is empty")
        config = grid.training_config(config)

        done: dict[str, SweepResult] = {}
        if journal_path:
            if resume:
                _repair_tail(journal_path)
                done = {r.cell.key(): r for r in read_journal(journal_path)}
            else:
                open(journal_path, 'w').close()
        pending = [c for c in cells if c.key() not in done]

        self._log("=" * 60)
        self._log("TORSION SWEEP")
        self._log("=" * 60)
        self._log(f"Grid cells:        {len(cells)}")
        self._log(f"Already journaled: {len(cells) - len(pending)}")
        self._log(f"To run:            {len(pending)}")
        self._log(f"Workers:           {workers}")

        start = time.time()
        jobs = (delayed(run_cell)(cell, data, config) for cell in pending)
        for n, result in enumerate(Parallel(n_jobs=workers, return_as='generator')(jobs), 1):
            done[result.cell.key()] = result
            if journal_path:
                _append(journal_path, result)
            if result.status is CellStatus.COMPLETED:
                self._log(f"✓ [{n}/{len(pending)}] {result.cell.key()}")
            else:
                self._log(f"⚠  [{n}/{len(pending)}] {result.cell.key()} "
                          f"{result.status.value}: {result.reason}")

        results = [done[c.key()] for c in cells]
        counts = {s: sum(r.status is s for r in results) for s in CellStatus}
        self._log("\n" + "=" * 60)
        self._log("SWEEP COMPLETE")
        self._log("=" * 60)
        self._log(f"Completed: {counts[CellStatus.COMPLETED]}  "
                  f"Diverged: {counts[CellStatus.DIVERGED]}  "
                  f"Skipped: {counts[CellStatus.SKIPPED]}")
        self._log(f"Elapsed:   {time.time() - start:.1f}s")
        return results


def run_sweep(grid: SweepGrid, data: SweepData, config: TrainingConfig,
              parallelism: int = 1, journal_path: str | None = None,
              resume: bool = False, verbose: bool = False) -> list[SweepResult]:
    return SweepRunner(verbose=verbose).run(grid, data, config, parallelism,
                                            journal_path, resume)

