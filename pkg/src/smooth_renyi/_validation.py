"""Scalar parameter checks used at every public entry point."""
import math

from .exceptions import ValidationError


def check_alpha(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def check_epsilon(epsilon, *, allow_one=False):
    epsilon = float(epsilon)
    upper_ok = epsilon <= 1.0 if allow_one else epsilon < 1.0
    if not (epsilon >= 0.0 and upper_ok):
        interval = "[0, 1]" if allow_one else "[0, 1)"
        raise ValidationError(f"epsilon must lie in {interval}, got {epsilon!r}")
    return epsilon


def check_rho(rho):
    rho = float(rho)
    if not (rho > 0.0 and math.isfinite(rho)):
        raise ValidationError(f"rho must be a positive finite number, got {rho!r}")
    return rho


def alpha_from_rho(rho):
    """Order of the smooth entropy that governs moments of order ``rho``."""
    return 1.0 / (1.0 + check_rho(rho))
