"""Online CUSUM / Page-CUSUM detectors, boundary function, and stopping rules.

The monitored statistic is built from the centered partial sum

    Q(m, k) = sum(X[m+1..m+k]) - (k/m) * sum(X[1..m]),

updated in O(1) per observation. The four detector statistics are

    ordinary one-sided   Q(m, k)
    ordinary two-sided   |Q(m, k)|
    page one-sided       S1 = Q(m, k) - min_{0<=i<=k} Q(m, i)
    page two-sided       S2 = max_{0<=i<=k} |Q(m, k) - Q(m, i)|,

and monitoring stops at the first k >= 1 with statistic >= sigma_hat * c *
g(m, k). Ties count as a stop (the comparison is >=).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import MonitoringParams, ValidationError, _require


class DegenerateTrainingError(ValidationError):
    """Training data with zero sample variance cannot calibrate the monitor."""


@dataclass(frozen=True)
class TrainingSummary:
    """Mean and scale estimated from the change-free training period."""

    m: int
    mean: float
    sigma_hat: float

    def __post_init__(self):
        _require(self.m >= 2, "m must be >= 2")
        if not self.sigma_hat > 0.0:
            raise DegenerateTrainingError("sigma_hat must be positive")


def summarize_training(x) -> TrainingSummary:
    """Sample mean and standard deviation (ddof=1) of the training data.

    Raises DegenerateTrainingError when all observations are equal.
    """
    arr = np.asarray(x, dtype=float)
    _require(arr.ndim == 1, "training data must be one-dimensional")
    m = int(arr.size)
    _require(m >= 2, "training period needs at least 2 observations")
    mean = float(arr.mean())
    sigma_hat = float(arr.std(ddof=1))
    if not sigma_hat > 0.0:
        raise DegenerateTrainingError(
            "training data are constant (sigma_hat = 0)")
    return TrainingSummary(m=m, mean=mean, sigma_hat=sigma_hat)


def boundary_g(m: int, k, gamma: float):
    """Boundary curve g(m, k) = sqrt(m) * (1 + k/m) * (k/(k+m))**gamma.

    Strictly increasing in k for fixed (m, gamma). Accepts a scalar k or an
    array of monitoring indices.
    """
    _require(0.0 <= gamma < 0.5, "gamma must lie in [0, 0.5)")
    _require(m >= 1, "m must be positive")
    karr = np.asarray(k, dtype=float)
    _require(bool(np.all(karr >= 1)), "k must be >= 1")
    val = math.sqrt(m) * (1.0 + karr / m) * (karr / (karr + m)) ** gamma
    return float(val) if np.isscalar(k) else val


@dataclass(frozen=True)
class DetectorState:
    """Detector state after k monitored observations.

    q is Q(m, k); q_min / q_max are the running extremes of Q(m, i) over
    0 <= i <= k (Q(m, 0) = 0 participates, so q_min <= 0 <= q_max).
    comp carries the Kahan compensation of the q accumulation so that very
    long streams do not drift.
    """

    k: int = 0
    q: float = 0.0
    q_min: float = 0.0
    q_max: float = 0.0
    comp: float = 0.0


def step_detector(state: DetectorState, x_new: float,
                  training: TrainingSummary) -> DetectorState:
    """Advance the detector by one observation (compensated summation)."""
    term = (x_new - training.mean) - state.comp
    q = state.q + term
    comp = (q - state.q) - term
    return DetectorState(k=state.k + 1, q=q,
                         q_min=min(state.q_min, q),
                         q_max=max(state.q_max, q),
                         comp=comp)


def detector_stat(state: DetectorState, params: MonitoringParams) -> float:
    """Current detector statistic for the configured detector/side."""
    if params.detector == "ordinary":
        return abs(state.q) if params.side == "two_sided" else state.q
    if params.side == "two_sided":
        # max_i |Q(k) - Q(i)| is attained at the running min or max
        return max(state.q - state.q_min, state.q_max - state.q)
    return state.q - state.q_min


@dataclass(frozen=True)
class StoppingResult:
    """Outcome of a monitoring run.

    tau is the first monitoring index whose statistic reached the threshold,
    or None when the horizon was exhausted. stat/threshold report the values
    at tau. detector_path optionally records (k, statistic, threshold) for
    every step up to tau (or the horizon).
    """

    stopped: bool
    tau: int | None
    stat: float | None = None
    threshold: float | None = None
    detector_path: tuple | None = None


def _scan_array(x: np.ndarray, training: TrainingSummary,
                params: MonitoringParams, c: float):
    """Vectorized first-crossing scan over a fully materialized stream."""
    q = np.cumsum(x - training.mean)
    if params.detector == "ordinary":
        stat = np.abs(q) if params.side == "two_sided" else q
    else:
        prev = np.concatenate(([0.0], q))
        q_min = np.minimum.accumulate(prev)[1:]
        if params.side == "two_sided":
            q_max = np.maximum.accumulate(prev)[1:]
            stat = np.maximum(q - q_min, q_max - q)
        else:
            stat = q - q_min
    k = np.arange(1, x.size + 1)
    thresh = training.sigma_hat * c * boundary_g(params.m, k, params.gamma)
    hits = np.nonzero(stat >= thresh)[0]
    if hits.size == 0:
        return None, None, None
    j = int(hits[0])
    return j + 1, float(stat[j]), float(thresh[j])


def run_monitor(training, stream, params: MonitoringParams, c: float,
                record_path: bool = False) -> StoppingResult:
    """Monitor a stream until the detector crosses sigma_hat * c * g(m, k).

    training is the raw training sample (length params.m) or a precomputed
    TrainingSummary. stream may be a sequence (scanned vectorized) or any
    iterable (consumed lazily, one observation at a time). At most
    params.horizon observations are read.
    """
    _require(c > 0.0, "critical value c must be positive")
    if isinstance(training, TrainingSummary):
        summary = training
    else:
        summary = summarize_training(training)
    _require(summary.m == params.m,
             f"training length {summary.m} does not match params.m {params.m}")

    horizon = params.horizon
    if isinstance(stream, (np.ndarray, list, tuple)) and not record_path:
        x = np.asarray(stream, dtype=float)[:horizon]
        _require(x.size >= 1, "stream yields no observations")
        tau, stat, thresh = _scan_array(x, summary, params, c)
        if tau is None:
            return StoppingResult(stopped=False, tau=None)
        return StoppingResult(stopped=True, tau=tau, stat=stat,
                              threshold=thresh)

    state = DetectorState()
    path = [] if record_path else None
    for x_new in itertools.islice(iter(stream), horizon):
        state = step_detector(state, float(x_new), summary)
        stat = detector_stat(state, params)
        thresh = summary.sigma_hat * c * boundary_g(params.m, state.k,
                                                    params.gamma)
        if record_path:
            path.append((state.k, stat, thresh))
        if stat >= thresh:
            return StoppingResult(stopped=True, tau=state.k, stat=stat,
                                  threshold=thresh,
                                  detector_path=tuple(path) if record_path else None)
    _require(state.k >= 1, "stream yields no observations")
    return StoppingResult(stopped=False, tau=None,
                          detector_path=tuple(path) if record_path else None)
