"""Estimator-style wrappers over the functional API.

Each estimator is fitted either on a joint pmf matrix ``X`` (``y=None``) or on
paired integer samples ``(X, y)``, in which case the plug-in joint is used.
"""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_alpha, check_epsilon, check_rho
from .coding import Escape, build_code, code_error_probability, code_moment, decode, encode_records
from .distributions import empirical_joint, validate_joint
from .entropy import smooth_conditional_entropy
from .guessing import evaluate, optimal_strategy


def _joint_from(X, y):
    if y is None:
        return validate_joint(X)
    return empirical_joint(X, y)


class SmoothRenyiEntropy(BaseEstimator):
    """Conditional smooth Rényi entropy of the fitted joint.

    After ``fit``: ``value_`` (nats), ``allocation_`` (per-``y`` budgets) and
    ``result_``.
    """

    def __init__(self, alpha=0.5, epsilon=0.0):
        self.alpha = alpha
        self.epsilon = epsilon

    def fit(self, X, y=None):
        check_alpha(self.alpha)
        check_epsilon(self.epsilon)
        self.joint_ = _joint_from(X, y)
        self.result_ = smooth_conditional_entropy(self.joint_, self.alpha, self.epsilon)
        self.value_ = self.result_.value
        self.allocation_ = self.result_.allocation
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "result_")
        return self.value_


class OptimalGuesser(BaseEstimator):
    """Least-cost guesser with error probability at most ``epsilon``."""

    def __init__(self, rho=1.0, epsilon=0.0):
        self.rho = rho
        self.epsilon = epsilon

    def fit(self, X, y=None):
        check_rho(self.rho)
        check_epsilon(self.epsilon)
        self.joint_ = _joint_from(X, y)
        self.strategy_ = optimal_strategy(self.joint_, self.rho, self.epsilon)
        self.evaluation_ = evaluate(self.strategy_, self.joint_, self.rho)
        return self

    def predict(self, side):
        """First guess for each side-information symbol in ``side``."""
        check_is_fitted(self, "strategy_")
        return self.strategy_.order[np.asarray(side, dtype=int), 0]

    def guess_order(self, side: int):
        """Full guessing order under ``side`` (symbols, most likely first)."""
        check_is_fitted(self, "strategy_")
        return self.strategy_.order[int(side)].copy()


class SmoothPrefixCoder(BaseEstimator):
    """Prefix coder with escape; ``transform`` encodes, ``inverse_transform`` decodes.

    Escaped records decode to ``-1``.
    """

    def __init__(self, rho=1.0, epsilon=0.0, lengths="shannon", random_state=None):
        self.rho = rho
        self.epsilon = epsilon
        self.lengths = lengths
        self.random_state = random_state

    def fit(self, X, y=None):
        check_rho(self.rho)
        check_epsilon(self.epsilon)
        self.joint_ = _joint_from(X, y)
        self.code_ = build_code(self.joint_, self.rho, self.epsilon, self.lengths)
        self.moment_ = code_moment(self.code_, self.joint_, self.rho)
        self.error_prob_ = code_error_probability(self.code_, self.joint_)
        return self

    def transform(self, X, y):
        check_is_fitted(self, "code_")
        pairs = zip(np.asarray(X, dtype=int).ravel(), np.asarray(y, dtype=int).ravel())
        return encode_records(self.code_, pairs, self.random_state)

    def inverse_transform(self, bits, y):
        check_is_fitted(self, "code_")
        out = [decode(self.code_, b, int(s)) for b, s in zip(bits, np.asarray(y, dtype=int).ravel())]
        return np.array([-1 if v is Escape else v for v in out], dtype=int)
