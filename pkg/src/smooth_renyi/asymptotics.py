"""Finite-block diagnostics for mixtures of i.i.d. sources.

For a mixture whose components are ordered by decreasing conditional entropy,
the per-letter smooth entropy at budget ``epsilon`` approaches the conditional
Shannon entropy of the component selected by ``regime_index``. The helpers
here tabulate the finite-``n`` rates so that approach can be inspected.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ._validation import alpha_from_rho, check_alpha, check_epsilon, check_rho
from .distributions import (
    DEFAULT_MAX_CELLS,
    MixtureSource,
    _check_block,
    conditional_entropy,
    make_mixture,
    mixture_block,
    regime_index,
    validate_joint,
)
from .entropy import arimoto_conditional_renyi, finite_n_rate, nonnegativity_floor
from .exceptions import ValidationError
from .guessing import optimal_cost

__all__ = [
    "ConvergenceRow",
    "ConvergenceReport",
    "ContrastRow",
    "regime_index",
    "convergence_report",
    "vanishing_vs_zero_error_contrast",
]

#: Shift of the budget used for the sensitivity column.
SENSITIVITY_SHIFT = 1e-3
#: Number of trailing block lengths checked for a shrinking gap.
TAIL_WINDOW = 5
_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    rate: float
    target: float
    gap: float
    lower_bound: float
    sensitivity_rate: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ConvergenceReport:
    rows: List[ConvergenceRow]
    regime: int
    target: float
    on_boundary: bool
    tail: Tuple[int, int]
    monotone_tail_ok: bool

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "target": self.target,
            "on_boundary": self.on_boundary,
            "tail": list(self.tail),
            "monotone_tail_ok": self.monotone_tail_ok,
            "rows": [r.to_dict() for r in self.rows],
        }


def _tail_nonincreasing(values, tol=1e-12):
    v = np.abs(np.asarray(values, dtype=float))
    return bool(np.all(np.diff(v) <= tol))


def convergence_report(mix: MixtureSource, alpha: float, epsilon: float, n_max: int,
                       tail_window: int = TAIL_WINDOW, max_cells=DEFAULT_MAX_CELLS) -> ConvergenceReport:
    """Rates ``(1/n) H`` for ``n = 1..n_max`` against the single-letter target.

    Budgets sitting exactly on a cumulative weight are flagged, since the
    limit there need not equal the target of either neighbouring regime.
    """
    alpha = check_alpha(alpha)
    epsilon = check_epsilon(epsilon)
    n_max = int(n_max)
    if n_max < 1:
        raise ValidationError("n_max must be at least 1")
    _probe_budget(mix, n_max, max_cells)  # fail before any expensive row
    regime = regime_index(mix, epsilon)
    target = float(mix.component_cond_entropies[regime - 1])
    shifted = min(epsilon + SENSITIVITY_SHIFT, np.nextafter(1.0, 0.0))
    rows = []
    for n in range(1, n_max + 1):
        rate = finite_n_rate(mix, alpha, epsilon, n, max_cells)
        rows.append(ConvergenceRow(
            n=n,
            rate=rate,
            target=target,
            gap=rate - target,
            lower_bound=nonnegativity_floor(alpha, epsilon, n),
            sensitivity_rate=finite_n_rate(mix, alpha, shifted, n, max_cells),
        ))
    first = max(1, n_max - tail_window + 1)
    inner = mix.cumulative[1:-1]
    return ConvergenceReport(
        rows=rows,
        regime=regime,
        target=target,
        on_boundary=bool(np.any(np.abs(inner - epsilon) <= _BOUNDARY_TOL)),
        tail=(first, n_max),
        monotone_tail_ok=_tail_nonincreasing([r.gap for r in rows[first - 1:]]),
    )


def _probe_budget(mix, n, max_cells):
    first = mix.components[0]
    _check_block(first.x_size, first.y_size, n, max_cells)


@dataclass(frozen=True)
class ContrastRow:
    """Per-letter exponents at block length ``n`` (nats).

    ``entropy_exponent`` is ``(rho/n) H`` at the given budget and
    ``zero_error_exponent`` the same quantity at budget zero; ``cost_exponent``
    is ``(1/n) log`` of the least achievable guessing cost at the given budget.
    """

    n: int
    entropy_exponent: float
    zero_error_exponent: float
    arikan_exponent: float
    shannon_target: float
    cost_exponent: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def vanishing_vs_zero_error_contrast(component, rho: float, epsilon: float, n_max: int,
                                     max_cells=DEFAULT_MAX_CELLS) -> List[ContrastRow]:
    """Compare exponents with and without an error allowance for one i.i.d. source."""
    joint = validate_joint(component)
    rho = check_rho(rho)
    epsilon = check_epsilon(epsilon)
    alpha = alpha_from_rho(rho)
    mix = make_mixture([joint], [1.0])
    _probe_budget(mix, int(n_max), max_cells)
    arikan = rho * arimoto_conditional_renyi(joint, alpha)
    shannon = rho * conditional_entropy(joint)
    rows = []
    for n in range(1, int(n_max) + 1):
        block = mixture_block(mix, n, max_cells)
        rows.append(ContrastRow(
            n=n,
            entropy_exponent=rho * finite_n_rate(mix, alpha, epsilon, n, max_cells),
            zero_error_exponent=rho * finite_n_rate(mix, alpha, 0.0, n, max_cells),
            arikan_exponent=arikan,
            shannon_target=shannon,
            cost_exponent=float(np.log(optimal_cost(block, rho, epsilon)) / n),
        ))
    return rows
