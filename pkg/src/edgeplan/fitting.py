"""Least-squares estimation of the per-depth hyperparameters.

``fit_affine`` recovers the (slope, intercept) of the concentration growth
from measured (depth, concentration) pairs; ``fit_exponential`` recovers the
noise-amplification decay in the log domain, where the estimator is closed
form and deterministic.  Pure; safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

__all__ = ["DepthSeries", "AffineFit", "ExponentialFit", "fit_affine", "fit_exponential"]


@dataclass(frozen=True, eq=False)
class DepthSeries:
    """Measured (depth, value) pairs, at least two, with distinct depths."""

    depths: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        depths = np.asarray(self.depths, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if depths.ndim != 1 or values.ndim != 1 or depths.shape != values.shape:
            raise ValueError("depths and values must be equal-length 1-D sequences")
        if depths.size < 2:
            raise ValueError("need at least 2 points to fit")
        if not (np.all(np.isfinite(depths)) and np.all(np.isfinite(values))):
            raise ValueError("depths and values must be finite")
        if np.unique(depths).size != depths.size:
            raise ValueError("depths must be distinct")
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(cls, points: Iterable[Tuple[float, float]]) -> "DepthSeries":
        pts = list(points)
        return cls(
            depths=np.array([p[0] for p in pts], dtype=float),
            values=np.array([p[1] for p in pts], dtype=float),
        )

    def __len__(self) -> int:
        return int(self.depths.size)


@dataclass(frozen=True)
class AffineFit:
    c1: float  # slope
    c2: float  # intercept
    residual_rms: float


@dataclass(frozen=True)
class ExponentialFit:
    c3: float  # amplitude
    c4: float  # decay rate
    log_residual_rms: float
    # set when the fitted decay is <= 0, i.e. the series does not decrease
    nonpositive_decay: bool


def _ols(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    xm = x.mean()
    ym = y.mean()
    slope = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    intercept = float(ym - slope * xm)
    return slope, intercept


def fit_affine(series: DepthSeries) -> AffineFit:
    """Ordinary least squares of value on depth."""
    slope, intercept = _ols(series.depths, series.values)
    residual = series.values - (slope * series.depths + intercept)
    return AffineFit(
        c1=slope,
        c2=intercept,
        residual_rms=float(np.sqrt(np.mean(residual**2))),
    )


def fit_exponential(series: DepthSeries) -> ExponentialFit:
    """Least squares of log(value) on depth: ``value = c3 exp(-c4 depth)``.

    Residual RMS is reported in the log domain, where the fit is performed.
    A fitted decay rate of zero or below is flagged rather than rejected.
    """
    if np.any(series.values <= 0.0):
        raise ValueError("exponential fitting requires strictly positive values")
    log_values = np.log(series.values)
    slope, intercept = _ols(series.depths, log_values)
    residual = log_values - (slope * series.depths + intercept)
    c4 = -slope
    return ExponentialFit(
        c3=float(math.exp(intercept)),
        c4=float(c4),
        log_residual_rms=float(np.sqrt(np.mean(residual**2))),
        nonpositive_decay=bool(c4 <= 0.0),
    )
