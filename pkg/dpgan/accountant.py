#!/usr/bin/env python3
"""
Moment accountant for the Poisson-subsampled Gaussian mechanism

Per-step log moments are computed by numerical integration of

    E1 = E_{z ~ mu0} [(mu0(z) / mu(z)) ** lam]
    E2 = E_{z ~ mu}  [(mu(z) / mu0(z)) ** lam]

with mu0 = N(0, sigma^2), mu1 = N(1, sigma^2) and mu = (1 - q) mu0 + q mu1,
alpha(lam) = log max(E1, E2). Identical steps compose additively and the total
converts to (epsilon, delta) through the tail bound
delta = min_lam exp(alpha(lam) - lam * epsilon).

The accountant only ever sees (q, sigma, step count). The clipping bound is not
an input, so clipping decay cannot change the reported privacy.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, List, Tuple

import numpy as np
from scipy.integrate import simpson

try:
    from .errors import ConfigError, QuadratureError
    from .settings import LAMBDA_MAX
except ImportError:
    from errors import ConfigError, QuadratureError
    from settings import LAMBDA_MAX

# Create logger for this module
logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-12
CONVERGENCE_TOLERANCE = 1e-10
# Integration half-width beyond the integrand's peak, in units of sigma
TAIL_SIGMAS = 12.0
INITIAL_POINTS_PER_SIGMA = 32
MAX_REFINEMENTS = 6


@dataclass(frozen=True)
class MechanismParams:
    """Sampling probability q and noise scale sigma (noise std / clipping bound)"""
    q: float
    sigma: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ConfigError(f"Sampling probability q must be in [0, 1], got {self.q}")
        if not self.sigma > 0.0:
            raise ConfigError(f"Noise scale sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class MixtureIntegrand:
    """Log densities of mu0, mu1 and the mixture mu on an integration grid"""
    params: MechanismParams

    def log_mu0(self, z: np.ndarray) -> np.ndarray:
        sigma = self.params.sigma
        return -0.5 * (z / sigma) ** 2 - math.log(sigma * math.sqrt(2.0 * math.pi))

    def log_mu1(self, z: np.ndarray) -> np.ndarray:
        sigma = self.params.sigma
        return -0.5 * ((z - 1.0) / sigma) ** 2 - math.log(sigma * math.sqrt(2.0 * math.pi))

    def log_ratio(self, z: np.ndarray) -> np.ndarray:
        """log(mu(z) / mu0(z)) = log((1 - q) + q exp((2z - 1) / (2 sigma^2)))"""
        q, sigma = self.params.q, self.params.sigma
        with np.errstate(divide='ignore'):
            log_keep = np.log1p(-q) if q < 1.0 else -np.inf
            log_q = np.log(q) if q > 0.0 else -np.inf
        return np.logaddexp(log_keep, log_q + (2.0 * z - 1.0) / (2.0 * sigma ** 2))

    def log_mu(self, z: np.ndarray) -> np.ndarray:
        return self.log_mu0(z) + self.log_ratio(z)

    def log_e1_integrand(self, z: np.ndarray, lam: int) -> np.ndarray:
        return self.log_mu0(z) - lam * self.log_ratio(z)

    def log_e2_integrand(self, z: np.ndarray, lam: int) -> np.ndarray:
        return self.log_mu(z) + lam * self.log_ratio(z)


def _log_integral(log_integrand, lower: float, upper: float, sigma: float, label: str) -> float:
    """
    Integrate exp(log_integrand) over [lower, upper] with composite Simpson,
    halving the step until two successive estimates agree

    Raises:
        QuadratureError: tails above tolerance or no convergence
    """
    points = int(math.ceil((upper - lower) / sigma * INITIAL_POINTS_PER_SIGMA)) | 1
    previous = None
    for _ in range(MAX_REFINEMENTS + 1):
        z = np.linspace(lower, upper, points)
        log_values = log_integrand(z)
        peak = float(np.max(log_values))
        integral = simpson(np.exp(log_values - peak), x=z)
        estimate = peak + math.log(integral)

        # Both tails decay like a Gaussian of width sigma: tail mass <= f(edge) * sigma
        edge = max(log_values[0], log_values[-1]) + math.log(sigma)
        if edge - estimate > math.log(TAIL_TOLERANCE):
            raise QuadratureError(
                f"{label}: truncated tail exceeds {TAIL_TOLERANCE:g} of the integral on "
                f"[{lower:.3g}, {upper:.3g}]"
            )
        if previous is not None and abs(estimate - previous) <= CONVERGENCE_TOLERANCE * max(1.0, abs(estimate)):
            return estimate
        previous = estimate
        points = 2 * points - 1
    raise QuadratureError(f"{label}: Simpson estimates did not converge after {MAX_REFINEMENTS} refinements")


@lru_cache(maxsize=4096)
def _cached_log_moment(q: float, sigma: float, lam: int) -> float:
    params = MechanismParams(q, sigma)
    if q == 0.0:
        return 0.0
    integrand = MixtureIntegrand(params)
    # E1 mass lies in [-lam, 1] (centred at -lam when q = 1); E2 behaves like
    # N(1 + lam, sigma^2) for large z.
    span = TAIL_SIGMAS * sigma
    log_e1 = _log_integral(
        lambda z: integrand.log_e1_integrand(z, lam), -span - lam, span + 1.0, sigma, f"E1(lambda={lam})"
    )
    log_e2 = _log_integral(
        lambda z: integrand.log_e2_integrand(z, lam), -span, span + 1.0 + lam, sigma, f"E2(lambda={lam})"
    )
    # alpha >= 0 analytically (Jensen); clamp quadrature round-off
    return max(0.0, log_e1, log_e2)


def per_step_log_moment(params: MechanismParams, lam: int) -> float:
    """
    Log moment alpha(lam) of one subsampled Gaussian step

    Args:
        params: sampling probability and noise scale
        lam: moment order, a positive integer

    Returns:
        alpha(lam) >= 0
    """
    if int(lam) != lam or lam < 1:
        raise ConfigError(f"Moment order lambda must be a positive integer, got {lam}")
    return _cached_log_moment(float(params.q), float(params.sigma), int(lam))


def asymptotic_bound(params: MechanismParams, lam: int) -> float:
    """Leading term q^2 lam (lam + 1) / ((1 - q) sigma^2) of the per-step log moment"""
    q, sigma = params.q, params.sigma
    return q * q * lam * (lam + 1) / ((1.0 - q) * sigma * sigma)


@dataclass(frozen=True)
class PrivacySpent:
    """A reported (epsilon, delta) pair and the moment order that attains it"""
    epsilon: float
    delta: float
    best_lambda: int = 0


@dataclass(frozen=True)
class MomentAccountant:
    """
    Accumulated log moments of ``steps`` identical subsampled Gaussian steps

    ``log_moments`` is steps * per-step moments, computed by one multiplication
    so that k recordings of one step each and one recording of k steps agree
    exactly.
    """
    params: MechanismParams
    lambda_max: int = LAMBDA_MAX
    steps: int = 0
    per_step: Tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.lambda_max < 1:
            raise ConfigError(f"lambda_max must be at least 1, got {self.lambda_max}")
        if not self.per_step:
            moments = tuple(per_step_log_moment(self.params, lam) for lam in self.lambdas)
            object.__setattr__(self, 'per_step', moments)

    @property
    def lambdas(self) -> List[int]:
        return list(range(1, self.lambda_max + 1))

    @property
    def log_moments(self) -> np.ndarray:
        return self.steps * np.asarray(self.per_step)

    def record_steps(self, count: int) -> 'MomentAccountant':
        return record_steps(self, count)

    def epsilon_for_delta(self, delta: float) -> float:
        return epsilon_for_delta(self, delta)

    def delta_for_epsilon(self, epsilon: float) -> float:
        return delta_for_epsilon(self, epsilon)

    def privacy_spent(self, delta: float) -> PrivacySpent:
        """Epsilon at ``delta`` together with the minimising moment order"""
        epsilon, lam = _epsilon_and_lambda(self, delta)
        return PrivacySpent(epsilon=epsilon, delta=delta, best_lambda=lam)

    def epsilon_trace(self, deltas: Iterable[float]) -> List[PrivacySpent]:
        return [self.privacy_spent(d) for d in deltas]


def record_steps(acc: MomentAccountant, count: int) -> MomentAccountant:
    """Compose ``count`` more identical steps into the accountant"""
    if count < 0:
        raise ConfigError(f"Step count must be nonnegative, got {count}")
    if count == 0:
        return acc
    return replace(acc, steps=acc.steps + int(count))


def _epsilon_and_lambda(acc: MomentAccountant, delta: float) -> Tuple[float, int]:
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"delta must be in (0, 1), got {delta}")
    if acc.steps == 0:
        return 0.0, 0
    lambdas = np.asarray(acc.lambdas, dtype=np.float64)
    candidates = (acc.log_moments + math.log(1.0 / delta)) / lambdas
    # argmin returns the first minimum: ties go to the smaller lambda
    best = int(np.argmin(candidates))
    return float(candidates[best]), int(lambdas[best])


def epsilon_for_delta(acc: MomentAccountant, delta: float) -> float:
    """
    Smallest epsilon over the lambda grid with exp(alpha(lam) - lam eps) <= delta

    Returns 0 for an accountant with no recorded steps.
    """
    return _epsilon_and_lambda(acc, delta)[0]


def delta_for_epsilon(acc: MomentAccountant, epsilon: float) -> float:
    """delta = min_lam exp(alpha(lam) - lam eps), clamped to (0, 1]"""
    if epsilon < 0:
        raise ConfigError(f"epsilon must be nonnegative, got {epsilon}")
    lambdas = np.asarray(acc.lambdas, dtype=np.float64)
    log_delta = float(np.min(acc.log_moments - lambdas * epsilon))
    return min(1.0, max(math.exp(log_delta), np.finfo(np.float64).tiny))


def steps_for_epochs(epochs: float, q: float) -> int:
    """Accounted steps for ``epochs`` passes at sampling rate q (T = epochs / q)"""
    if not 0.0 < q <= 1.0:
        raise ConfigError(f"Sampling probability q must be in (0, 1], got {q}")
    return int(math.ceil(epochs / q))
