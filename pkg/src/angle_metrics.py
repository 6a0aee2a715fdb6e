"""
Degree-space error metrics for predicted torsion angles.
"""

import numpy as np
from scipy.stats import circmean

from window_dataset import EmptyInputError


def circular_distance(pred, truth) -> np.ndarray:
    """Elementwise min(|d|, 360 - |d|) in degrees; any input range accepted."""
    diff = np.mod(np.asarray(pred, dtype=np.float64) - np.asarray(truth, dtype=np.float64), 360.0)
    return np.minimum(diff, 360.0 - diff)


def circular_mae(pred, truth) -> float:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions, {truth.size} truths")
    if pred.size == 0:
        raise EmptyInputError("circular_mae needs at least one angle")
    return float(np.mean(circular_distance(pred, truth)))


def uniform_baseline_mae() -> float:
    """Expected circular MAE of a uniformly random predictor."""
    return 90.0


def constant_baseline_mae(truth) -> float:
    """MAE of always predicting the circular mean of *truth*."""
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if truth.size == 0:
        raise EmptyInputError("constant baseline needs at least one angle")
    centre = circmean(truth, high=180.0, low=-180.0)
    return circular_mae(np.full_like(truth, centre), truth)
