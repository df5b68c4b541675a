"""Finite joint distributions, likelihood-sorted conditionals and mixtures of i.i.d. sources.

A joint pmf ``P_XY`` is stored as a dense ``(|X|, |Y|)`` array: rows index the
guessed/encoded symbol ``x``, columns index the side information ``y``.
All logarithms are natural.
"""
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from ._validation import check_epsilon
from .exceptions import (
    BlockTooLarge,
    MassDeviationTooLarge,
    NegativeEntry,
    ValidationError,
    ZeroMarginal,
)

#: Absolute tolerance for the unit-mass invariant of a validated joint.
MASS_TOL = 1e-12
#: Largest deviation of the raw mass from 1 that is silently renormalized.
RENORMALIZE_TOL = 1e-9
#: Default cap on the number of cells of a block distribution.
DEFAULT_MAX_CELLS = 2 ** 22


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Validated joint pmf over ``X x Y``. Build it with :func:`validate_joint`."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs.setflags(write=False)

    @property
    def x_size(self) -> int:
        return self.probs.shape[0]

    @property
    def y_size(self) -> int:
        return self.probs.shape[1]

    @property
    def p_y(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    @property
    def support_y(self) -> np.ndarray:
        """Indices of side-information symbols with positive marginal."""
        return np.flatnonzero(self.p_y > 0)

    def conditional(self, y: int) -> np.ndarray:
        """``P_{X|Y}(.|y)``; raises :class:`ZeroMarginal` when ``P_Y(y) = 0``."""
        py = self.p_y[y]
        if py <= 0:
            raise ZeroMarginal(f"P_Y({y}) = 0, the conditional slice is undefined")
        return self.probs[:, y] / py

    def to_dict(self) -> dict:
        return {"x_size": self.x_size, "y_size": self.y_size, "pxy": self.probs.tolist()}

    def __repr__(self):
        return f"JointDistribution(x_size={self.x_size}, y_size={self.y_size})"


def validate_joint(raw) -> JointDistribution:
    """Check a nonnegative matrix and return it as a :class:`JointDistribution`.

    A one-dimensional input is read as a pmf of ``X`` with trivial side
    information (a single column). Masses within ``RENORMALIZE_TOL`` of one
    are renormalized; anything further away is rejected.
    """
    if isinstance(raw, JointDistribution):
        return raw
    arr = np.array(raw, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError("a joint pmf must be a nonempty 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("a joint pmf must have finite entries")
    if np.any(arr < 0):
        raise NegativeEntry("a joint pmf cannot have negative entries")
    total = arr.sum()
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise MassDeviationTooLarge(f"total mass {total!r} is not 1")
    return JointDistribution(arr / total)


def empirical_joint(x, y, x_size=None, y_size=None) -> JointDistribution:
    """Plug-in joint pmf from paired integer samples."""
    x = np.asarray(x, dtype=int).ravel()
    y = np.asarray(y, dtype=int).ravel()
    if x.shape != y.shape or x.size == 0:
        raise ValidationError("x and y must be nonempty and of equal length")
    if x.min() < 0 or y.min() < 0:
        raise ValidationError("symbols must be nonnegative integers")
    x_size = int(x.max()) + 1 if x_size is None else x_size
    y_size = int(y.max()) + 1 if y_size is None else y_size
    counts = np.zeros((x_size, y_size))
    np.add.at(counts, (x, y), 1.0)
    return JointDistribution(counts / counts.sum())


@dataclass(frozen=True, eq=False)
class SortedConditional:
    """Conditional slice of ``X`` given ``y`` in nonincreasing probability order.

    ``order[i]`` is the symbol guessed at rank ``i + 1``.
    """

    y: int
    order: np.ndarray
    probs_desc: np.ndarray


def sorted_conditional(joint: JointDistribution, y: int) -> SortedConditional:
    """Sort ``P_{X|Y}(.|y)`` in nonincreasing order; ties keep ascending symbol index."""
    cond = joint.conditional(y)
    order = np.argsort(-cond, kind="stable")
    return SortedConditional(y=int(y), order=order, probs_desc=cond[order])


def conditional_entropy(joint: JointDistribution) -> float:
    """Shannon conditional entropy ``H(X|Y)`` in nats."""
    p = joint.probs
    p_y = joint.p_y
    mask = p > 0
    cond = np.divide(p, p_y[None, :], out=np.ones_like(p), where=p_y[None, :] > 0)
    return float(-np.sum(p[mask] * np.log(cond[mask])))


def product_block(joint: JointDistribution, n: int, max_cells=DEFAULT_MAX_CELLS) -> np.ndarray:
    """``n``-fold i.i.d. extension as a dense array.

    Block symbols use positional base-``|alphabet|`` encoding with the first
    coordinate most significant, which is exactly what repeated Kronecker
    products produce.
    """
    _check_block(joint.x_size, joint.y_size, n, max_cells)
    out = np.ones((1, 1))
    for _ in range(n):
        out = np.kron(out, joint.probs)
    return out


def _check_block(x_size, y_size, n, max_cells):
    if int(n) != n or n < 1:
        raise ValidationError(f"block length must be a positive integer, got {n!r}")
    cells = (x_size * y_size) ** n
    if cells > max_cells:
        raise BlockTooLarge(f"block of {cells} cells exceeds the budget of {max_cells}")


@dataclass(frozen=True, eq=False)
class MixtureSource:
    """Mixture ``sum_i w_i prod_t P_{X_i Y_i}`` of i.i.d. components.

    Components are stored in strictly decreasing order of their conditional
    entropy; the constructor :func:`make_mixture` sorts them.
    """

    components: List[JointDistribution]
    weights: np.ndarray
    cumulative: np.ndarray = field(repr=False)
    component_cond_entropies: np.ndarray = field(repr=False)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def single_letter(self) -> JointDistribution:
        return mixture_block(self, 1)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "components": [c.to_dict() for c in self.components],
        }


def make_mixture(components: Sequence, weights: Sequence[float]) -> MixtureSource:
    """Validate and sort a mixture so that ``H(X_1|Y_1) > H(X_2|Y_2) > ...``."""
    comps = [validate_joint(c) for c in components]
    w = np.asarray(weights, dtype=float)
    if len(comps) == 0 or w.shape != (len(comps),):
        raise ValidationError("need one positive weight per component")
    if np.any(w <= 0):
        raise ValidationError("mixture weights must be strictly positive")
    if abs(w.sum() - 1.0) > MASS_TOL:
        raise MassDeviationTooLarge(f"mixture weights sum to {w.sum()!r}")
    shape = comps[0].probs.shape
    if any(c.probs.shape != shape for c in comps):
        raise ValidationError("all components must share the same alphabets")
    ent = np.array([conditional_entropy(c) for c in comps])
    order = np.argsort(-ent, kind="stable")
    ent = ent[order]
    if np.any(np.diff(ent) >= 0):
        raise ValidationError("component conditional entropies must be pairwise distinct")
    w = w[order]
    cumulative = np.concatenate([[0.0], np.cumsum(w)[:-1], [1.0]])
    return MixtureSource(
        components=[comps[i] for i in order],
        weights=w,
        cumulative=cumulative,
        component_cond_entropies=ent,
    )


def mixture_block(mix: MixtureSource, n: int, max_cells=DEFAULT_MAX_CELLS) -> JointDistribution:
    """Joint pmf of ``(X^n, Y^n)`` for a mixture of i.i.d. sources."""
    first = mix.components[0]
    _check_block(first.x_size, first.y_size, n, max_cells)
    probs = sum(w * product_block(c, n, max_cells) for w, c in zip(mix.weights, mix.components))
    return JointDistribution(probs / probs.sum())


def sample(joint: JointDistribution, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. pairs; returns an int array of shape ``(count, 2)``."""
    rng = np.random.default_rng(seed)
    flat = joint.probs.ravel()
    idx = rng.choice(flat.size, size=int(count), p=flat / flat.sum())
    x, y = np.divmod(idx, joint.y_size)
    return np.stack([x, y], axis=1)


def regime_index(mix: MixtureSource, epsilon: float) -> int:
    """1-based component number ``i`` with ``A_i <= epsilon < A_{i+1}``.

    ``A_1 = 0`` and intervals are half-open, so an ``epsilon`` equal to a
    cumulative weight selects the later component.
    """
    epsilon = check_epsilon(epsilon)
    return int(np.searchsorted(mix.cumulative[1:], epsilon, side="right")) + 1
