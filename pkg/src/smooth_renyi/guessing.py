"""Guessing with a give-up option.

A strategy fixes, for every side-information symbol ``y``, a guessing order
and a give-up probability ``pi_y(i)`` checked just before the ``i``-th guess.
The guesser pays ``i**rho`` when the ``i``-th guess is correct and nothing
when it gives up first; giving up counts as an error.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._validation import alpha_from_rho, check_epsilon, check_rho
from .distributions import (
    DEFAULT_MAX_CELLS,
    JointDistribution,
    MixtureSource,
    mixture_block,
    regime_index,
    sorted_conditional,
    validate_joint,
)
from .entropy import optimize_allocation
from .exceptions import AlphabetMismatch, ValidationError

#: Default resolution of the error-budget grid in :func:`optimize_with_penalty`.
PENALTY_GRID = 1e-3


@dataclass(frozen=True, eq=False)
class GuessingStrategy:
    """Per-``y`` guessing order and give-up probabilities.

    ``order[y, i]`` is the symbol guessed at rank ``i + 1`` and
    ``giveup[y, i]`` the probability of giving up just before that guess.
    """

    order: np.ndarray
    giveup: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=int)
        giveup = np.asarray(self.giveup, dtype=float)
        if order.ndim != 2 or order.shape != giveup.shape:
            raise ValidationError("order and giveup must be matching (|Y|, K) arrays")
        k = order.shape[1]
        if np.any(np.sort(order, axis=1) != np.arange(k)[None, :]):
            raise ValidationError("every row of order must be a permutation of 0..K-1")
        if np.any(~np.isfinite(giveup)) or np.any(giveup < 0) or np.any(giveup > 1):
            raise ValidationError("give-up probabilities must lie in [0, 1]")
        order.setflags(write=False)
        giveup.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "giveup", giveup)

    @property
    def y_size(self) -> int:
        return self.order.shape[0]

    @property
    def x_size(self) -> int:
        return self.order.shape[1]

    @property
    def sigma(self) -> np.ndarray:
        """``sigma[y, x]``: 1-based rank at which ``x`` is guessed under ``y``."""
        ranks = np.empty_like(self.order)
        rows = np.arange(self.y_size)[:, None]
        ranks[rows, self.order] = np.arange(1, self.x_size + 1)[None, :]
        return ranks

    def is_single_dice(self) -> bool:
        """True when each row gives up with certainty after at most one random rank."""
        for row in self.giveup:
            frac = np.flatnonzero((row > 0) & (row < 1))
            first = np.flatnonzero(row > 0)
            if frac.size > 1:
                return False
            if first.size and np.any(row[first[0] + 1:] < 1):
                return False
        return True

    def to_dict(self) -> dict:
        return {"order": self.order.tolist(), "giveup": self.giveup.tolist()}


@dataclass(frozen=True)
class GuessEvaluation:
    error_prob: float
    cost: float
    penalty: Optional[float] = None

    @property
    def combined_cost(self) -> Optional[float]:
        if self.penalty is None:
            return None
        return self.cost + self.error_prob * self.penalty

    def to_dict(self) -> dict:
        out = {"error_prob": self.error_prob, "cost": self.cost}
        if self.penalty is not None:
            out.update(penalty=self.penalty, combined_cost=self.combined_cost)
        return out


def _check_match(strategy: GuessingStrategy, joint: JointDistribution):
    if strategy.order.shape != (joint.y_size, joint.x_size):
        raise AlphabetMismatch(
            f"strategy is for |Y|={strategy.y_size}, K={strategy.x_size}; "
            f"joint has |Y|={joint.y_size}, K={joint.x_size}"
        )


def survival_weights(strategy: GuessingStrategy) -> np.ndarray:
    """``lambda[y, i]``: probability that the guesser is still playing at rank ``i + 1``."""
    return np.cumprod(1.0 - strategy.giveup, axis=1)


def _ranked_mass(strategy, joint):
    # mass[y, i] = P_XY(order[y, i], y)
    return np.take_along_axis(joint.probs.T, strategy.order, axis=1)


def error_probability(strategy: GuessingStrategy, joint) -> float:
    joint = validate_joint(joint)
    _check_match(strategy, joint)
    kept = np.sum(survival_weights(strategy) * _ranked_mass(strategy, joint))
    return float(min(max(1.0 - kept, 0.0), 1.0))


def expected_cost(strategy: GuessingStrategy, joint, rho: float) -> float:
    """Expected ``rank**rho`` over correctly guessed outcomes."""
    joint = validate_joint(joint)
    rho = check_rho(rho)
    _check_match(strategy, joint)
    ranks = np.arange(1, strategy.x_size + 1, dtype=float) ** rho
    return float(np.sum(survival_weights(strategy) * _ranked_mass(strategy, joint) * ranks[None, :]))


def evaluate(strategy: GuessingStrategy, joint, rho: float, penalty: Optional[float] = None) -> GuessEvaluation:
    if penalty is not None and not penalty >= 0:
        raise ValidationError(f"penalty must be nonnegative, got {penalty!r}")
    return GuessEvaluation(
        error_prob=error_probability(strategy, joint),
        cost=expected_cost(strategy, joint, rho),
        penalty=None if penalty is None else float(penalty),
    )


# ---------------------------------------------------------------------------
# strategy synthesis


def _descending_orders(joint: JointDistribution) -> np.ndarray:
    order = np.tile(np.arange(joint.x_size), (joint.y_size, 1))
    for y in joint.support_y:
        order[y] = sorted_conditional(joint, y).order
    return order


def _rank_masses(joint: JointDistribution, order: np.ndarray) -> np.ndarray:
    """``M[i]``: total probability of being correct exactly at rank ``i + 1``."""
    return np.take_along_axis(joint.probs.T, order, axis=1).sum(axis=0)


def _tails(masses):
    # tails[r] = mass guessed at ranks > r (0-based r), tails[0] = 1
    return np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])


def _cutoff(masses, epsilon):
    """Rank ``r`` (0-based) where the budget runs out and the fraction dropped there."""
    tails = _tails(masses)
    r = int(np.flatnonzero(tails[1:] <= epsilon)[0])
    if masses[r] <= 0:
        return r, 0.0
    return r, float(np.clip((epsilon - tails[r + 1]) / masses[r], 0.0, 1.0))


def optimal_strategy(joint, rho: float, epsilon: float) -> GuessingStrategy:
    """Strategy of least expected cost among those with error probability at most ``epsilon``.

    Guesses go in nonincreasing conditional probability. The cost of a correct
    guess depends only on its rank, so the cheapest way to spend the error
    budget is to drop the deepest ranks first, uniformly across ``y``: every
    row gives up for sure after one common rank and with one common
    probability at it.
    """
    joint = validate_joint(joint)
    check_rho(rho)
    epsilon = check_epsilon(epsilon)
    order = _descending_orders(joint)
    giveup = np.zeros(order.shape)
    if epsilon > 0:
        r, frac = _cutoff(_rank_masses(joint, order), epsilon)
        giveup[:, r] = frac
        giveup[:, r + 1:] = 1.0
    return GuessingStrategy(order=order, giveup=giveup)


def optimal_cost(joint, rho: float, epsilon: float) -> float:
    """Least expected cost at error budget ``epsilon``; convex and piecewise linear in ``epsilon``."""
    joint = validate_joint(joint)
    return expected_cost(optimal_strategy(joint, rho, epsilon), joint, rho)


def cost_breakpoints(joint) -> np.ndarray:
    """Budgets in ``[0, 1)`` where the least-cost curve changes slope."""
    joint = validate_joint(joint)
    tails = _tails(_rank_masses(joint, _descending_orders(joint)))
    return np.unique(tails[(tails > 0) & (tails < 1)])


def smooth_entropy_strategy(joint, rho: float, epsilon: float) -> GuessingStrategy:
    """Single-dice strategy read off the optimal smooth-entropy truncation.

    Row ``y`` guesses the retained symbols of ``Q*(.|y)`` in order and keeps
    guessing at the residual rank with probability ``Q*/P`` there. Its cost is
    at most ``exp(rho * H)`` with ``H`` the smooth entropy of order ``1/(1+rho)``.
    """
    joint = validate_joint(joint)
    rho = check_rho(rho)
    epsilon = check_epsilon(epsilon)
    result = optimize_allocation(joint, alpha_from_rho(rho), epsilon)
    order = _descending_orders(joint)
    giveup = np.zeros(order.shape)
    if epsilon > 0:
        p_y = joint.p_y
        for ts in result.slices:
            y, k = ts.y, ts.index
            if k == 0:
                giveup[y, :] = 1.0
                continue
            cond = joint.probs[order[y, k - 1], y] / p_y[y]
            giveup[y, k - 1] = np.clip(1.0 - ts.values[k - 1] / cond, 0.0, 1.0)
            giveup[y, k:] = 1.0
    return GuessingStrategy(order=order, giveup=giveup)


def _rho_entropy_exp(joint, rho, epsilon):
    # exp(rho * H) equals the inner objective at alpha = 1/(1+rho)
    return optimize_allocation(joint, alpha_from_rho(rho), epsilon).objective


def direct_bound(joint, rho: float, epsilon: float) -> float:
    """Achievable cost ``exp(rho * H)``."""
    joint = validate_joint(joint)
    return float(_rho_entropy_exp(joint, check_rho(rho), epsilon))


def converse_bound(joint, rho: float, epsilon: float) -> float:
    """``(1 + log K)^-rho exp(rho * H)``: no strategy within budget ``epsilon`` costs less."""
    joint = validate_joint(joint)
    rho = check_rho(rho)
    return float((1.0 + np.log(joint.x_size)) ** (-rho) * _rho_entropy_exp(joint, rho, epsilon))


def optimize_with_penalty(joint, rho: float, penalty: float, eps_grid: float = PENALTY_GRID):
    """Minimize ``C*(eps) + eps * penalty`` over ``eps`` in ``[0, 1)``.

    Candidates are the grid ``0, eps_grid, ...`` plus every slope change of
    ``C*``; the smallest minimizing budget is returned with its evaluation.
    """
    joint = validate_joint(joint)
    rho = check_rho(rho)
    if not penalty >= 0:
        raise ValidationError(f"penalty must be nonnegative, got {penalty!r}")
    if not 0 < eps_grid <= 0.5:
        raise ValidationError(f"eps_grid must lie in (0, 0.5], got {eps_grid!r}")
    grid = np.arange(0.0, 1.0, eps_grid)
    candidates = np.unique(np.concatenate([grid, cost_breakpoints(joint)]))
    values = np.array([optimal_cost(joint, rho, e) + e * penalty for e in candidates])
    best = values.min()
    i = int(np.flatnonzero(values <= best + 1e-12 * max(1.0, abs(best)))[0])
    eps_star = float(candidates[i])
    strategy = optimal_strategy(joint, rho, eps_star)
    return eps_star, evaluate(strategy, joint, rho, penalty)


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimulatedGuessing:
    trials: int
    error_prob: float
    cost: float
    error_se: float
    cost_se: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def simulate_guessing(strategy: GuessingStrategy, joint, rho: float, seed: int, trials: int) -> SimulatedGuessing:
    """Play the game ``trials`` times with one seeded generator.

    Before each guess the guesser gives up with probability ``pi_y(i)``; a
    trial ends at the first correct guess or at giving up.
    """
    joint = validate_joint(joint)
    rho = check_rho(rho)
    _check_match(strategy, joint)
    trials = int(trials)
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    flat = joint.probs.ravel()
    idx = rng.choice(flat.size, size=trials, p=flat / flat.sum())
    x, y = np.divmod(idx, joint.y_size)
    target = strategy.sigma[y, x]
    playing = np.ones(trials, dtype=bool)
    for i in range(1, strategy.x_size + 1):
        active = np.flatnonzero(playing & (target >= i))
        if active.size == 0:
            break
        quit_ = rng.random(active.size) < strategy.giveup[y[active], i - 1]
        playing[active[quit_]] = False
    cost = np.where(playing, target.astype(float) ** rho, 0.0)
    err = (~playing).astype(float)
    scale = np.sqrt(trials)
    return SimulatedGuessing(
        trials=trials,
        error_prob=float(err.mean()),
        cost=float(cost.mean()),
        error_se=float(err.std(ddof=1) / scale) if trials > 1 else 0.0,
        cost_se=float(cost.std(ddof=1) / scale) if trials > 1 else 0.0,
    )


# ---------------------------------------------------------------------------
# block exponents


@dataclass(frozen=True)
class ExponentPoint:
    """Per-letter exponents at block length ``n``; all logs natural."""

    n: int
    exponent: float
    target: float
    p_e: float
    cost: float
    bound_lo: float
    bound_hi: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def single_letter_target(mix: MixtureSource, rho: float, epsilon: float) -> float:
    """``rho * H(X_i|Y_i)`` for the component selected by ``epsilon``."""
    i = regime_index(mix, epsilon)
    return float(check_rho(rho) * mix.component_cond_entropies[i - 1])


def guessing_exponent_curve(mix: MixtureSource, rho: float, epsilon: float, n_list: Sequence[int],
                            max_cells=DEFAULT_MAX_CELLS):
    """``(1/n) log`` of the least cost at each block length, with both bounds."""
    rho = check_rho(rho)
    epsilon = check_epsilon(epsilon)
    target = single_letter_target(mix, rho, epsilon)
    rows = []
    for n in n_list:
        block = mixture_block(mix, n, max_cells)
        ev = evaluate(optimal_strategy(block, rho, epsilon), block, rho)
        hi = _rho_entropy_exp(block, rho, epsilon)
        lo = (1.0 + np.log(block.x_size)) ** (-rho) * hi
        rows.append(ExponentPoint(
            n=int(n),
            exponent=float(np.log(ev.cost) / n),
            target=target,
            p_e=ev.error_prob,
            cost=ev.cost,
            bound_lo=float(np.log(lo) / n),
            bound_hi=float(np.log(hi) / n),
        ))
    return rows
