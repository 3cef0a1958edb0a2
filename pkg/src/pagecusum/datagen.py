"""Simulation-study processes: GARCH(1,1) innovations and the location model.

The observed series is X_i = mu + eps_i before the change and
X_i = mu + eps_i + delta from global index m + kstar on (1-based), where the
innovations eps_i are zero-mean but possibly conditionally heteroskedastic.
GARCH(1,1) innovations with alpha_g + beta_g < 1 satisfy the invariance
principles the monitoring theory rests on (they are uncorrelated martingale
differences with finite variance; the theory additionally assumes a moment of
order nu > 2, which holds here and plays no algorithmic role).
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import ChangeScenario, _require
from .rng import rng_stream


@dataclass(frozen=True)
class Garch11Spec:
    """eps_i = sig_i * z_i with sig_i^2 = omega + alpha_g*eps_{i-1}^2 + beta_g*sig_{i-1}^2.

    Covariance stationarity requires alpha_g + beta_g < 1; the unconditional
    variance is then omega / (1 - alpha_g - beta_g). burn_in draws are
    discarded so the emitted values start near stationarity.
    """

    omega: float
    alpha_g: float = 0.0
    beta_g: float = 0.0
    burn_in: int = 500

    def __post_init__(self):
        _require(self.omega > 0.0, "omega must be positive")
        _require(self.alpha_g >= 0.0, "alpha_g must be >= 0")
        _require(self.beta_g >= 0.0, "beta_g must be >= 0")
        _require(self.alpha_g + self.beta_g < 1.0,
                 "alpha_g + beta_g must be < 1 (covariance stationarity)")
        _require(self.burn_in >= 0, "burn_in must be >= 0")

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.alpha_g - self.beta_g)


def generate_garch11(spec: Garch11Spec, n: int,
                     rng: np.random.Generator) -> np.ndarray:
    """One path of n innovations.

    The recursion starts at the stationary variance with eps_0 = 0; the first
    spec.burn_in values are discarded. With alpha_g = beta_g = 0 this
    collapses to i.i.d. N(0, omega).
    """
    _require(n >= 1, "n must be positive")
    total = spec.burn_in + n
    z = rng.standard_normal(total)
    eps = np.empty(total)
    sig2 = spec.unconditional_variance
    e_prev = 0.0
    for i in range(total):
        sig2 = spec.omega + spec.alpha_g * e_prev * e_prev + spec.beta_g * sig2
        e_prev = math.sqrt(sig2) * z[i]
        eps[i] = e_prev
    return eps[spec.burn_in:]


def generate_garch11_batch(spec: Garch11Spec, n: int, n_paths: int, seed: int,
                           first_stream: int = 0) -> np.ndarray:
    """(n_paths, n) array of independent paths with per-path RNG streams.

    Row i reproduces generate_garch11(spec, n, rng_stream(seed,
    first_stream + i)) exactly, so batching never changes the data.
    """
    _require(n >= 1, "n must be positive")
    _require(n_paths >= 1, "n_paths must be positive")
    total = spec.burn_in + n
    z = np.empty((n_paths, total))
    for i in range(n_paths):
        z[i] = rng_stream(seed, first_stream + i).standard_normal(total)
    eps = np.empty_like(z)
    sig2 = np.full(n_paths, spec.unconditional_variance)
    e_prev = np.zeros(n_paths)
    for i in range(total):
        sig2 = spec.omega + spec.alpha_g * e_prev * e_prev + spec.beta_g * sig2
        e_prev = np.sqrt(sig2) * z[:, i]
        eps[:, i] = e_prev
    return eps[:, spec.burn_in:]


@dataclass(frozen=True)
class StreamSpec:
    """Location-model series: baseline mean mu, a change scenario (or None
    for a change-free series), training length m and monitoring length."""

    mu: float
    scenario: ChangeScenario | None
    m: int
    length: int

    def __post_init__(self):
        _require(self.m >= 2, "m must be >= 2")
        _require(self.length >= 1, "length must be positive")


def generate_stream(spec: StreamSpec, innovations):
    """Split innovations into (training, stream) and inject the mean shift.

    The shift enters at global 1-based index m + kstar, i.e. at stream
    position kstar; observation m + kstar - 1 is still unshifted. A kstar
    beyond the stream length (or scenario None) leaves the series unchanged,
    which is how null-hypothesis streams are produced.
    """
    eps = np.asarray(innovations, dtype=float)
    need = spec.m + spec.length
    _require(eps.size >= need, "innovations must cover m + length values")
    x = spec.mu + eps[:need]
    if spec.scenario is not None:
        start = spec.m + spec.scenario.kstar - 1
        if start < need:
            x[start:] += spec.scenario.delta
    return x[:spec.m], x[spec.m:]
