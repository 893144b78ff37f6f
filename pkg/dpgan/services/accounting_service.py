#!/usr/bin/env python3
"""
Accounting service: standalone privacy calculator
"""

import logging

try:
    from ..accountant import MechanismParams, MomentAccountant, PrivacySpent
    from ..errors import ConfigError
    from ..settings import LAMBDA_MAX
except ImportError:
    from dpgan.accountant import MechanismParams, MomentAccountant, PrivacySpent
    from dpgan.errors import ConfigError
    from dpgan.settings import LAMBDA_MAX

# Create logger for this module
logger = logging.getLogger(__name__)


def run_accounting(q: float, sigma: float, steps: int, delta: float, lambda_max: int = LAMBDA_MAX) -> PrivacySpent:
    """Epsilon after ``steps`` subsampled Gaussian steps, with the minimising lambda"""
    if steps < 0:
        raise ConfigError(f"steps must be nonnegative, got {steps}")
    accountant = MomentAccountant(MechanismParams(q, sigma), lambda_max=lambda_max).record_steps(steps)
    spent = accountant.privacy_spent(delta)
    logger.debug(f"q={q}, sigma={sigma}, steps={steps}, delta={delta}: epsilon={spent.epsilon}")
    return spent
