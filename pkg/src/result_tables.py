"""
Ranked result tables from sweep results: lowest score first, with
columns score, encoding, window size and model architecture.
"""

from dataclasses import dataclass
from enum import Enum

import pandas as pd

from sweep_harness import CellStatus, SweepResult, read_journal
from window_dataset import TargetMode

TABLE_COLUMNS = ['score', 'encoding', 'window_size', 'model_arch']


class RankMetric(str, Enum):
    CODEC_RMSE = 'rmse'
    CODEC_MSE = 'mse'
    DEGREE_MAE = 'mae'


@dataclass(frozen=True)
class RankedRow:
    score: float
    encoding: str
    window_size: int
    model_arch: str
    target_mode: TargetMode


def result_score(result: SweepResult, metric: RankMetric) -> float | None:
    metric = RankMetric(metric)
    if metric is RankMetric.CODEC_RMSE:
        return result.codec_rmse
    if metric is RankMetric.CODEC_MSE:
        return result.codec_mse
    maes = [m for m in (result.degree_mae_phi, result.degree_mae_psi) if m is not None]
    return sum(maes) / len(maes) if maes else None


def rank_results(results: list[SweepResult], metric: RankMetric = RankMetric.DEGREE_MAE,
                 target: TargetMode | None = None, k: int = 10) -> list[RankedRow]:
    """Top-k COMPLETED results by ascending score; ties break on encoding
    name, then window size, then model."""
    rows = []
    for r in results:
        if r.status is not CellStatus.COMPLETED:
            continue
        if target is not None and r.target_mode is not TargetMode(target):
            continue
        score = result_score(r, metric)
        if score is None:
            continue
        rows.append(RankedRow(score, r.encoding, r.window_size, r.model, r.target_mode))
    rows.sort(key=lambda row: (row.score, row.encoding.casefold(), row.window_size, row.model_arch))
    return rows[:max(k, 0)]


def rows_to_frame(rows: list[RankedRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [[r.score, r.encoding, r.window_size, r.model_arch] for r in rows],
        columns=TABLE_COLUMNS,
    )


def render_table(rows: list[RankedRow], title: str | None = None) -> str:
    if not rows:
        body = "(no completed results)"
    else:
        body = rows_to_frame(rows).to_string(index=False, float_format=lambda v: f"{v:.5f}")
    return f"{title}\n{'-' * len(title)}\n{body}" if title else body


def table_to_csv(rows: list[RankedRow], path: str) -> str:
    rows_to_frame(rows).to_csv(path, index=False)
    return path


def summarize_top(rows: list[RankedRow]) -> dict[str, dict]:
    """How often each encoding, window size and model appears in *rows*."""
    df = rows_to_frame(rows)
    return {
        'encoding': df['encoding'].value_counts().to_dict(),
        'window_size': df['window_size'].value_counts().to_dict(),
        'model_arch': df['model_arch'].value_counts().to_dict(),
    }


def report_from_journal(path: str, metric: RankMetric = RankMetric.DEGREE_MAE,
                        target: TargetMode | None = None, k: int = 10) -> list[RankedRow]:
    return rank_results(read_journal(path), metric, target, k)
