"""Exhaustive allocation search used as ground truth for the solver.

The error budget ``epsilon`` is split over at most three side-information
symbols on a uniform lattice of budget shares, and the lattice minimum is found
by brute-force min-plus combination. A refinement pass then pins slices at each
of their cumulative-mass breakpoints, recursively, so that every split with
all but one slice at a breakpoint is evaluated exactly.

Slice scores are evaluated here with the water-level form
``Q_i = clip((1 - eps_y) - C_{i-1}, 0, p_i)``, independently of the solver.
"""
from dataclasses import replace

import numpy as np

from ._validation import check_alpha, check_epsilon
from .distributions import sorted_conditional, validate_joint
from .entropy import EntropyResult, result_from_allocation
from .exceptions import InstanceTooLarge, ValidationError

MAX_ORACLE_Y = 3
MIN_STEP = 1e-5


class _WaterLevel:
    def __init__(self, probs_desc, alpha):
        p = np.asarray(probs_desc, dtype=float)
        self.p = p[p > 0]
        self.prev_cum = np.concatenate([[0.0], np.cumsum(self.p)[:-1]])
        self.alpha = alpha
        self.breakpoints = np.clip(1.0 - np.concatenate([[0.0], np.cumsum(self.p)]), 0.0, 1.0)
        self.breakpoints[-1] = 0.0

    def score(self, eps):
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        q = np.clip((1.0 - eps)[:, None] - self.prev_cum[None, :], 0.0, self.p[None, :])
        out = np.sum(q ** self.alpha, axis=1) ** (1.0 / self.alpha)
        out[(eps < -1e-12) | (eps > 1.0 + 1e-12)] = np.inf
        return out


def _split_two(fa, fb, pa, pb, budget, n_grid):
    """Best split of ``budget`` between two slices: lattice plus both breakpoint sets."""
    ea = np.concatenate([
        budget * np.arange(n_grid + 1) / n_grid / pa,
        fa.breakpoints,
        (budget - pb * fb.breakpoints) / pa,
    ])
    ea = ea[(ea >= 0) & (ea <= 1) & (pa * ea <= budget + 1e-15)]
    eb = np.maximum((budget - pa * ea) / pb, 0.0)
    vals = pa * fa.score(ea) + pb * fb.score(eb)
    i = int(np.argmin(vals))
    return vals[i], ea[i], eb[i]


def oracle_allocation(joint, alpha: float, epsilon: float, step: float = 1e-4) -> EntropyResult:
    """Global minimum over a discretized allocation simplex with breakpoint refinement."""
    joint = validate_joint(joint)
    alpha = check_alpha(alpha)
    epsilon = check_epsilon(epsilon)
    if step < MIN_STEP or step > 1:
        raise ValidationError(f"grid step must lie in [{MIN_STEP}, 1], got {step!r}")
    support = joint.support_y
    if len(support) > MAX_ORACLE_Y:
        raise InstanceTooLarge(f"oracle handles at most {MAX_ORACLE_Y} side symbols, got {len(support)}")
    p_y = joint.p_y[support]
    eps = np.zeros(joint.y_size)
    if epsilon == 0 or len(support) == 1:
        eps[support] = epsilon / p_y
        return result_from_allocation(joint, alpha, epsilon, eps)

    n_grid = int(round(1.0 / step))
    fs = [_WaterLevel(sorted_conditional(joint, y).probs_desc, alpha) for y in support]
    shares = epsilon * np.arange(n_grid + 1) / n_grid
    lattice = [w * f.score(shares / w) for f, w in zip(fs, p_y)]

    best_val, best = np.inf, None
    if len(support) == 2:
        vals = lattice[0] + lattice[1][::-1]
        k = int(np.argmin(vals))
        best_val, best = vals[k], (shares[k], epsilon - shares[k])
    else:
        for k1 in range(n_grid + 1):
            rest = lattice[1][: n_grid - k1 + 1] + lattice[2][n_grid - k1::-1]
            k2 = int(np.argmin(rest))
            v = lattice[0][k1] + rest[k2]
            if v < best_val:
                best_val = v
                best = (shares[k1], shares[k2], epsilon - shares[k1] - shares[k2])

    # pin each slice at each breakpoint and solve the remainder exactly
    idx = list(range(len(support)))
    for a in idx:
        for ea in fs[a].breakpoints:
            used = p_y[a] * ea
            if used > epsilon + 1e-15:
                continue
            rem = max(epsilon - used, 0.0)
            others = [j for j in idx if j != a]
            head = p_y[a] * fs[a].score(ea)[0]
            if len(others) == 1:
                b = others[0]
                eb = rem / p_y[b]
                v = head + p_y[b] * fs[b].score(eb)[0]
                budgets = {a: used, b: rem}
            else:
                b, c = others
                v2, eb, ec = _split_two(fs[b], fs[c], p_y[b], p_y[c], rem, n_grid)
                v = head + v2
                budgets = {a: used, b: p_y[b] * eb, c: p_y[c] * ec}
            if v < best_val:
                best_val = v
                best = tuple(budgets[j] for j in idx)

    eps[support] = np.clip(np.asarray(best) / p_y, 0.0, 1.0)
    result = result_from_allocation(joint, alpha, epsilon, eps)
    # report the oracle's own evaluation, not the solver-side recomputation
    value = float(alpha / (1.0 - alpha) * np.log(best_val))
    return replace(result, value=value, objective=float(best_val))
