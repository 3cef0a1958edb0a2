"""Shared domain types: monitoring parameters, change scenarios, regime labels.

A mean-shift scenario is classified into one of three asymptotic regimes by
the exponent eta = beta*(1-gamma) - 1/2 + gamma, where kstar ~ theta*m**beta
is the change time and gamma the boundary tuning parameter:

    I   (eta < 0, early change):  normalized delay is asymptotically normal,
    II  (eta = 0, knife edge):    limit is a Brownian supremum over (d1, 1),
    III (eta > 0, late change):   limit is a Brownian supremum over (0, 1).

For shifts decaying like m**(-r) the same trichotomy applies to eta - r.
"""

import math
import warnings
from dataclasses import dataclass

SIDES = ("one_sided", "two_sided")
DETECTORS = ("ordinary", "page")

# |eta| below this is treated as the knife-edge regime II
ETA_TOL = 1e-12


class ValidationError(ValueError):
    """A parameter violates its documented domain."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


@dataclass(frozen=True)
class MonitoringParams:
    """Configuration of one open-end monitoring run.

    m: length of the change-free training period (>= 2).
    gamma: boundary tuning exponent in [0, 0.5); values near 0.5 speed up
        detection of early changes, values near 0 of late ones.
    alpha: asymptotic false-alarm probability in (0, 1).
    side: "one_sided" (upward shifts) or "two_sided".
    detector: "ordinary" (plain CUSUM) or "page" (CUSUM against its running
        extremes).
    horizon_factor: monitoring is truncated after ceil(horizon_factor * m)
        observations; open-end behaviour is recovered as the factor grows.
    """

    m: int
    gamma: float = 0.0
    alpha: float = 0.1
    side: str = "one_sided"
    detector: str = "page"
    horizon_factor: float = 20.0

    def __post_init__(self):
        _require(int(self.m) == self.m and self.m >= 2,
                 "m must be an integer >= 2 (sample variance needs two points)")
        _require(0.0 <= self.gamma < 0.5, "gamma must lie in [0, 0.5)")
        _require(0.0 < self.alpha < 1.0, "alpha must lie in (0, 1)")
        _require(self.side in SIDES, f"side must be one of {SIDES}")
        _require(self.detector in DETECTORS, f"detector must be one of {DETECTORS}")
        _require(self.horizon_factor > 0.0, "horizon_factor must be positive")

    @property
    def horizon(self) -> int:
        return math.ceil(self.horizon_factor * self.m)


def resolve_kstar(theta: float, beta: float, m: int) -> int:
    """Change time floor(theta * m**beta).

    Evaluated in plain floating point, so e.g. beta = 1/3, m = 1000 resolves
    to 9 (1000**(1/3) rounds just below 10).
    """
    _require(theta > 0.0, "theta must be positive")
    _require(0.0 <= beta < 1.0, "beta must lie in [0, 1)")
    _require(m >= 1, "m must be positive")
    kstar = math.floor(theta * m ** beta)
    _require(kstar >= 1, "floor(theta * m**beta) must be >= 1")
    return kstar


@dataclass(frozen=True)
class ChangeScenario:
    """A mean-shift alternative: shift delta entering at monitoring index kstar.

    theta and beta record how kstar scales with the training length
    (kstar = floor(theta * m**beta)); scenarios built from an explicit kstar
    use beta = 0 and theta = kstar. sigma is the long-run noise scale of the
    errors. c_tilde1 / c1 optionally override the limit constants of the
    knife-edge regime (by default they are inferred from delta and theta).
    """

    delta: float
    kstar: int
    sigma: float = 1.0
    theta: float = 1.0
    beta: float = 0.0
    c_tilde1: float | None = None
    c1: float | None = None

    def __post_init__(self):
        _require(self.delta != 0.0, "delta must be nonzero")
        _require(int(self.kstar) == self.kstar and self.kstar >= 1,
                 "kstar must be a positive integer")
        _require(self.sigma > 0.0, "sigma must be positive")
        _require(self.theta > 0.0, "theta must be positive")
        _require(0.0 <= self.beta < 1.0, "beta must lie in [0, 1)")
        if self.c_tilde1 is not None:
            _require(self.c_tilde1 > 0.0, "c_tilde1 must be positive")
        if self.c1 is not None:
            _require(self.c1 > 0.0, "c1 must be positive")

    @classmethod
    def from_exponent(cls, delta: float, theta: float, beta: float, m: int,
                      sigma: float = 1.0, **kwargs) -> "ChangeScenario":
        """Scenario with kstar resolved from (theta, beta) at training length m."""
        return cls(delta=delta, kstar=resolve_kstar(theta, beta, m),
                   sigma=sigma, theta=theta, beta=beta, **kwargs)

    @classmethod
    def at_kstar(cls, delta: float, kstar: int, sigma: float = 1.0,
                 **kwargs) -> "ChangeScenario":
        """Scenario with a fixed change time (beta = 0, theta = kstar)."""
        return cls(delta=delta, kstar=kstar, sigma=sigma,
                   theta=float(kstar), beta=0.0, **kwargs)


def validate_scenario(scenario: ChangeScenario, m: int) -> None:
    """Warn when the shift is too weak for the delay asymptotics at this m.

    The theory needs sqrt(m)*|delta| to diverge; that cannot be checked for a
    single m, so a finite-sample proxy threshold of 3 triggers a warning
    rather than a rejection.
    """
    snr = math.sqrt(m) * abs(scenario.delta)
    if snr < 3.0:
        warnings.warn(
            f"sqrt(m)*|delta| = {snr:.3g} < 3: shift too weak for reliable "
            "delay asymptotics at this training length", stacklevel=2)


def compute_eta(gamma: float, beta: float) -> float:
    """Regime exponent eta(gamma, beta) = beta*(1-gamma) - 1/2 + gamma."""
    _require(0.0 <= gamma < 0.5, "gamma must lie in [0, 0.5)")
    _require(0.0 <= beta < 1.0, "beta must lie in [0, 1)")
    return beta * (1.0 - gamma) - 0.5 + gamma


def eta_zero_beta(gamma: float) -> float:
    """The change-time exponent at which eta vanishes: (1/2-gamma)/(1-gamma)."""
    _require(0.0 <= gamma < 0.5, "gamma must lie in [0, 0.5)")
    return (0.5 - gamma) / (1.0 - gamma)


@dataclass(frozen=True)
class CaseLabel:
    """Asymptotic regime of a scenario, with the knife-edge constants if any.

    d1 (regime II only) is the left endpoint of the limiting Brownian
    supremum interval; c1 is the limit of |delta| * m**(gamma-1/2) *
    kstar**(1-gamma).
    """

    variant: str
    eta: float
    d1: float | None = None
    c1: float | None = None

    def __post_init__(self):
        _require(self.variant in ("I", "II", "III"),
                 "variant must be 'I', 'II' or 'III'")
        if self.variant == "II":
            if self.d1 is not None:
                _require(0.0 < self.d1 < 1.0, "d1 must lie in (0, 1)")
        else:
            _require(self.d1 is None, "d1 applies to regime II only")


def classify_case(scenario: ChangeScenario, gamma: float,
                  delta_regime: str = "fixed", rate: float = 0.0,
                  c: float | None = None) -> CaseLabel:
    """Classify a scenario into regime I, II or III.

    delta_regime "fixed" means the shift does not shrink with m; "local_rate"
    means delta_m = delta * m**(-rate) with rate >= 0. The decision is the
    sign of eta (fixed) or eta - rate (local), with |.| < ETA_TOL treated as
    the knife edge. For regime II the constant c1 = theta**(1-gamma) *
    c_tilde1 is reported, and d1 is solved when a critical value c is given.

    The variant never depends on theta (theta only rescales c1), and for a
    fixed shift every beta < (1/2-gamma)/(1-gamma) lands in regime I.
    """
    _require(delta_regime in ("fixed", "local_rate"),
             "delta_regime must be 'fixed' or 'local_rate'")
    if delta_regime == "fixed":
        _require(rate == 0.0, "rate applies to delta_regime='local_rate' only")
    else:
        _require(rate >= 0.0, "rate must be >= 0")
    eta = compute_eta(gamma, scenario.beta)
    effective = eta - rate
    if abs(effective) < ETA_TOL:
        c_tilde1 = scenario.c_tilde1
        if c_tilde1 is None:
            # m**eta * |delta_m| -> |delta| for both supported shift regimes
            c_tilde1 = abs(scenario.delta)
        c1 = scenario.c1
        if c1 is None:
            c1 = scenario.theta ** (1.0 - gamma) * c_tilde1
        _require(c1 > 0.0, "regime II requires a positive limit constant c1")
        d1 = None
        if c is not None:
            from .asymptotics import solve_d1
            d1 = solve_d1(c, scenario.sigma, c1, gamma)
        return CaseLabel(variant="II", eta=eta, d1=d1, c1=c1)
    variant = "I" if effective < 0.0 else "III"
    return CaseLabel(variant=variant, eta=eta)
