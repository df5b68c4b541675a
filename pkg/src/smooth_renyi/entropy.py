"""Conditional smooth Rényi entropy of order ``alpha`` in (0, 1).

``H_alpha^eps(X|Y) = alpha/(1-alpha) * log r`` where ``r`` is the infimum of
``sum_y ||Q(., y)||_alpha`` over sub-distributions ``Q <= P_XY`` keeping mass at
least ``1 - eps``. For a fixed per-``y`` error budget ``eps_y`` the inner
infimum is attained by truncating the likelihood-sorted conditional slice
(keep the most likely symbols, one fractional residual), so the problem
reduces to splitting the budget ``eps`` across side-information symbols.

Each per-``y`` score ``f_y(eps_y)`` is concave between consecutive
cumulative-mass breakpoints, hence an optimal split has every ``eps_y`` at a
breakpoint except at most one. The solver starts from the Lagrangian (convex
hull) greedy split and polishes it with exact pairwise budget exchanges, plus
three-way exchanges on small instances (exact when ``|Y| <= 3``).
"""
from dataclasses import dataclass
from itertools import combinations
from typing import List

import numpy as np

from ._validation import check_alpha, check_epsilon
from .distributions import (
    DEFAULT_MAX_CELLS,
    JointDistribution,
    MixtureSource,
    SortedConditional,
    mixture_block,
    sorted_conditional,
    validate_joint,
)
from .exceptions import InstanceTooLarge

#: Slack when comparing cumulative masses against ``1 - eps_y``.
CUM_TOL = 1e-12
#: Instances with more side-information symbols only get the cheap polish.
FULL_POLISH_MAX_Y = 40
#: Three-way exchanges are tried only up to this many side-information symbols.
TRIPLE_POLISH_MAX_Y = 8


# ---------------------------------------------------------------------------
# single-slice truncation


@dataclass(frozen=True, eq=False)
class TruncatedSlice:
    """Optimal sub-distribution of one conditional slice.

    ``values[i]`` is the retained mass of ``order[i]``; only the first
    ``index`` ranks are retained (``index == 0`` means everything was dropped).
    """

    y: int
    eps_y: float
    index: int
    order: np.ndarray
    values: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.values.sum())


def truncation_point(slice_: SortedConditional, eps_y: float) -> int:
    """Smallest rank ``i`` whose cumulative mass reaches ``1 - eps_y``; 0 when ``eps_y = 1``."""
    eps_y = check_epsilon(eps_y, allow_one=True)
    target = 1.0 - eps_y
    if target <= CUM_TOL:
        return 0
    if eps_y == 0:
        # no smoothing keeps every positive symbol, however small
        return int(np.count_nonzero(slice_.probs_desc))
    cum = np.cumsum(slice_.probs_desc)
    idx = int(np.searchsorted(cum, target - CUM_TOL, side="left"))
    return min(idx + 1, len(cum))


def truncated_q(slice_: SortedConditional, eps_y: float) -> TruncatedSlice:
    """Keep the most likely symbols until mass ``1 - eps_y`` is reached."""
    k = truncation_point(slice_, eps_y)
    p = slice_.probs_desc
    values = np.zeros_like(p)
    if eps_y == 0:
        values = p.astype(float).copy()
    elif k > 0:
        values[: k - 1] = p[: k - 1]
        residual = (1.0 - eps_y) - p[: k - 1].sum()
        values[k - 1] = min(max(residual, 0.0), p[k - 1])
    return TruncatedSlice(y=slice_.y, eps_y=float(eps_y), index=k, order=slice_.order, values=values)


def inner_score(values, alpha: float) -> float:
    """``(sum_i q_i^alpha)^(1/alpha)``; zero for an empty truncation."""
    alpha = check_alpha(alpha)
    q = np.asarray(values, dtype=float)
    q = q[q > 0]
    if q.size == 0:
        return 0.0
    return float(np.sum(q ** alpha) ** (1.0 / alpha))


class _SliceCurve:
    """Score ``f(eps_y)`` of one slice as a piecewise function of its budget."""

    def __init__(self, probs_desc, alpha):
        p = np.asarray(probs_desc, dtype=float)
        p = p[p > 0]
        self.alpha = alpha
        self.p = p
        self.cum = np.concatenate([[0.0], np.cumsum(p)])
        self.apow = np.concatenate([[0.0], np.cumsum(p ** alpha)])
        m = len(p)
        # breakpoint k keeps the k most likely symbols in full
        eps = 1.0 - self.cum
        eps[0], eps[m] = 1.0, 0.0
        self.bp_eps = np.clip(eps, 0.0, 1.0)
        self.bp_val = self.apow ** (1.0 / alpha)

    def __call__(self, eps):
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        s = 1.0 - eps
        m = len(self.p)
        k = np.searchsorted(self.cum[1:], s - CUM_TOL, side="left") + 1
        k = np.minimum(k, m)
        u = np.clip(s - self.cum[k - 1], 0.0, self.p[k - 1])
        out = (self.apow[k - 1] + u ** self.alpha) ** (1.0 / self.alpha)
        out[s <= CUM_TOL] = 0.0
        out[eps <= 0] = self.bp_val[-1]
        return out

    def min_budget_for(self, level):
        """Smallest ``eps_y`` with ``f(eps_y) <= level``."""
        if level >= self.bp_val[-1]:
            return 0.0
        if level <= 0:
            return 1.0
        k = int(np.searchsorted(self.bp_val, level, side="right")) - 1
        u = (level ** self.alpha - self.apow[k]) ** (1.0 / self.alpha)
        u = min(max(u, 0.0), self.p[k])
        return float(min(max(1.0 - (self.cum[k] + u), 0.0), 1.0))


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True, eq=False)
class EntropyResult:
    """Value of a smooth entropy together with the minimizing allocation.

    ``allocation[y]`` is ``eps_y`` (zero for symbols with ``P_Y(y) = 0``),
    ``truncation[y]`` the number of retained ranks and ``q_conditional`` the
    retained conditional mass ``Q*(x|y)`` as an ``(|X|, |Y|)`` array.
    """

    value: float
    alpha: float
    epsilon: float
    objective: float
    allocation: np.ndarray
    truncation: np.ndarray
    q_conditional: np.ndarray
    slices: List[TruncatedSlice]

    def q_joint(self, joint: JointDistribution) -> np.ndarray:
        return self.q_conditional * joint.p_y[None, :]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "objective": self.objective,
            "allocation": self.allocation.tolist(),
            "truncation": self.truncation.tolist(),
        }


def _log_scale(alpha, objective):
    if objective <= 0:
        return -np.inf
    return float(alpha / (1.0 - alpha) * np.log(objective))


def result_from_allocation(joint: JointDistribution, alpha, epsilon, eps_y) -> EntropyResult:
    """Assemble an :class:`EntropyResult` for a given per-``y`` budget vector."""
    joint = validate_joint(joint)
    alpha = check_alpha(alpha)
    p_y = joint.p_y
    eps_y = np.asarray(eps_y, dtype=float)
    allocation = np.zeros(joint.y_size)
    truncation = np.zeros(joint.y_size, dtype=int)
    q_cond = np.zeros(joint.probs.shape)
    slices = []
    objective = 0.0
    for y in joint.support_y:
        e = float(np.clip(eps_y[y], 0.0, 1.0))
        ts = truncated_q(sorted_conditional(joint, y), e)
        slices.append(ts)
        allocation[y] = e
        truncation[y] = ts.index
        q_cond[ts.order, y] = ts.values
        objective += p_y[y] * inner_score(ts.values, alpha)
    return EntropyResult(
        value=_log_scale(alpha, objective),
        alpha=alpha,
        epsilon=float(epsilon),
        objective=float(objective),
        allocation=allocation,
        truncation=truncation,
        q_conditional=q_cond,
        slices=slices,
    )


# ---------------------------------------------------------------------------
# closed forms


def arimoto_conditional_renyi(joint, alpha: float) -> float:
    """Arimoto's conditional Rényi entropy, the ``eps = 0`` case."""
    joint = validate_joint(joint)
    alpha = check_alpha(alpha)
    r = np.sum(np.sum(joint.probs ** alpha, axis=0) ** (1.0 / alpha))
    return _log_scale(alpha, r)


def smooth_unconditional_entropy(pmf, alpha: float, epsilon: float) -> float:
    """Smooth Rényi entropy of a single pmf via tail truncation."""
    alpha = check_alpha(alpha)
    epsilon = check_epsilon(epsilon)
    joint = validate_joint(np.asarray(pmf, dtype=float).ravel())
    ts = truncated_q(sorted_conditional(joint, 0), epsilon)
    q = ts.values[ts.values > 0]
    return float(np.log(np.sum(q ** alpha)) / (1.0 - alpha))


# ---------------------------------------------------------------------------
# allocation solver


def _hull_greedy(curves, p_y, epsilon):
    """Lagrangian start: spend the budget along per-slice lower convex hulls."""
    slopes, owners, b_starts, b_ends = [], [], [], []
    for j, (c, w) in enumerate(zip(curves, p_y)):
        # budget spent grows as fewer ranks are kept
        b = w * c.bp_eps[::-1]
        v = w * c.bp_val[::-1]
        hull = []
        for i in range(len(b)):
            while len(hull) >= 2:
                i0, i1 = hull[-2], hull[-1]
                cross = (b[i1] - b[i0]) * (v[i] - v[i0]) - (v[i1] - v[i0]) * (b[i] - b[i0])
                if cross <= 0:
                    hull.pop()
                else:
                    break
            hull.append(i)
        h = np.asarray(hull)
        db = np.diff(b[h])
        keep = db > 0
        slopes.append((np.diff(v[h])[keep] / db[keep]))
        b_starts.append(b[h][:-1][keep])
        b_ends.append(b[h][1:][keep])
        owners.append(np.full(int(keep.sum()), j))
    slopes = np.concatenate(slopes)
    owners = np.concatenate(owners)
    b_starts = np.concatenate(b_starts)
    b_ends = np.concatenate(b_ends)
    order = np.lexsort((owners, slopes))
    budget = np.zeros(len(curves))
    spent = np.cumsum((b_ends - b_starts)[order])
    full = int(np.searchsorted(spent, epsilon, side="right"))
    for s in order[:full]:
        budget[owners[s]] = max(budget[owners[s]], b_ends[s])
    if full < len(order):
        s = order[full]
        used = spent[full - 1] if full > 0 else 0.0
        budget[owners[s]] = b_starts[s] + (epsilon - used)
    return np.clip(budget / p_y, 0.0, 1.0)


def _objective(curves, p_y, eps):
    return float(sum(w * c(e)[0] for c, w, e in zip(curves, p_y, eps)))


def _best_split(curves, p_y, a, b, total):
    """Exact best split of budget ``total`` between slices ``a`` and ``b``.

    The pair score is concave between breakpoints of either slice, so only
    those breakpoints and the range ends need to be evaluated.
    """
    pa, pb = p_y[a], p_y[b]
    lo = max(0.0, (total - pb) / pa)
    hi = min(1.0, total / pa)
    lo = min(lo, hi)  # rounding can push an exactly feasible total past capacity
    cand = np.concatenate([curves[a].bp_eps, (total - pb * curves[b].bp_eps) / pa, [lo, hi]])
    cand = cand[(cand >= lo) & (cand <= hi)]
    eb = np.clip((total - pa * cand) / pb, 0.0, 1.0)
    vals = pa * curves[a](cand) + pb * curves[b](eb)
    i = int(np.argmin(vals))
    return float(vals[i]), float(cand[i]), float(eb[i])


def _pair_exchange(curves, p_y, eps, a, b):
    """Returns (gain, e_a, e_b) for the best re-split of the budget of ``a`` and ``b``."""
    total = p_y[a] * eps[a] + p_y[b] * eps[b]
    val, ea, eb = _best_split(curves, p_y, a, b, total)
    current = p_y[a] * curves[a](eps[a])[0] + p_y[b] * curves[b](eps[b])[0]
    return current - val, ea, eb


def _triple_exchange(curves, p_y, eps, trio):
    """Pin one slice of ``trio`` at each breakpoint and re-split the rest exactly."""
    total = sum(p_y[j] * eps[j] for j in trio)
    current = sum(p_y[j] * curves[j](eps[j])[0] for j in trio)
    best = (0.0, None)
    for a in trio:
        b, c = [j for j in trio if j != a]
        for ea in curves[a].bp_eps:
            used = p_y[a] * ea
            if used > total or total - used > p_y[b] + p_y[c]:
                continue
            val, eb, ec = _best_split(curves, p_y, b, c, total - used)
            gain = current - (p_y[a] * curves[a](ea)[0] + val)
            if gain > best[0]:
                best = (gain, {a: float(ea), b: eb, c: ec})
    return best


def _at_breakpoint(curve, e):
    return bool(np.any(np.abs(curve.bp_eps - e) <= 1e-12))


def _polish(curves, p_y, eps, max_passes=100):
    eps = eps.copy()
    n = len(curves)
    for _ in range(max_passes):
        improved = False
        # objective only decreases within a pass, so this scale stays an upper bound
        tol = 1e-14 * max(1.0, _objective(curves, p_y, eps))
        if n <= FULL_POLISH_MAX_Y:
            pairs = combinations(range(n), 2)
        else:
            frac = [j for j in range(n) if not _at_breakpoint(curves[j], eps[j])]
            pairs = ((f, j) for f in frac for j in range(n) if j != f)
        for a, b in pairs:
            gain, ea, eb = _pair_exchange(curves, p_y, eps, a, b)
            if gain > tol:
                eps[a], eps[b] = ea, eb
                improved = True
        if n <= TRIPLE_POLISH_MAX_Y:
            for trio in combinations(range(n), 3):
                gain, moves = _triple_exchange(curves, p_y, eps, trio)
                if moves is not None and gain > tol:
                    for j, e in moves.items():
                        eps[j] = e
                    improved = True
        if not improved:
            break
    return eps


def _saturate(curves, p_y, eps, epsilon):
    """Enforce ``sum_y P_Y(y) eps_y = epsilon`` exactly on one non-breakpoint slice."""
    gap = epsilon - float(np.dot(p_y, eps))
    if gap == 0:
        return eps
    order = sorted(range(len(curves)), key=lambda j: _at_breakpoint(curves[j], eps[j]))
    for j in order:
        new = eps[j] + gap / p_y[j]
        if 0.0 <= new <= 1.0:
            eps[j] = new
            return eps
    return eps


def optimize_allocation(joint, alpha: float, epsilon: float) -> EntropyResult:
    """Minimize ``sum_y P_Y(y) f_y(eps_y)`` subject to ``sum_y P_Y(y) eps_y = epsilon``."""
    joint = validate_joint(joint)
    alpha = check_alpha(alpha)
    epsilon = check_epsilon(epsilon)
    support = joint.support_y
    p_y = joint.p_y[support]
    eps_full = np.zeros(joint.y_size)
    if epsilon > 0:
        curves = [_SliceCurve(sorted_conditional(joint, y).probs_desc, alpha) for y in support]
        eps = _hull_greedy(curves, p_y, epsilon)
        eps = _polish(curves, p_y, eps)
        eps = _saturate(curves, p_y, eps, epsilon)
        eps_full[support] = eps
    return result_from_allocation(joint, alpha, epsilon, eps_full)


def smooth_conditional_entropy(joint, alpha: float, epsilon: float) -> EntropyResult:
    """Conditional ``epsilon``-smooth Rényi entropy of order ``alpha`` (nats)."""
    return optimize_allocation(joint, alpha, epsilon)


# ---------------------------------------------------------------------------
# worst-case (max over y) variant


def renner_wolf_entropy(joint, alpha: float, epsilon: float, max_cells=DEFAULT_MAX_CELLS,
                        iterations=200) -> float:
    """Smooth entropy with the worst case over ``y`` in place of the average.

    Solved by bisection on the common score level: a level ``t`` is feasible
    when the budgets ``min{eps_y : f_y(eps_y) <= t}`` average to at most
    ``epsilon``.
    """
    joint = validate_joint(joint)
    alpha = check_alpha(alpha)
    epsilon = check_epsilon(epsilon)
    if joint.probs.size > max_cells:
        raise InstanceTooLarge(f"{joint.probs.size} cells exceed the budget of {max_cells}")
    support = joint.support_y
    p_y = joint.p_y[support]
    curves = [_SliceCurve(sorted_conditional(joint, y).probs_desc, alpha) for y in support]
    hi = max(c.bp_val[-1] for c in curves)
    if epsilon > 0:
        lo = 0.0
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            need = sum(w * c.min_budget_for(mid) for c, w in zip(curves, p_y))
            if need <= epsilon:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * hi:
                break
    return _log_scale(alpha, hi)


# ---------------------------------------------------------------------------
# block rates


def finite_n_rate(mix: MixtureSource, alpha: float, epsilon: float, n: int,
                  max_cells=DEFAULT_MAX_CELLS) -> float:
    """``(1/n) H_alpha^eps(X^n|Y^n)`` for the mixture block of length ``n``."""
    block = mixture_block(mix, n, max_cells)
    return smooth_conditional_entropy(block, alpha, epsilon).value / n


def nonnegativity_floor(alpha: float, epsilon: float, n: int = 1) -> float:
    """Lower bound ``log(1 - eps) / (n (1 - alpha))`` on the per-letter smooth entropy."""
    alpha = check_alpha(alpha)
    epsilon = check_epsilon(epsilon)
    return float(np.log1p(-epsilon) / (n * (1.0 - alpha)))
