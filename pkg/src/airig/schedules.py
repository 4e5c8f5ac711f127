"""Diminishing stepsize and regularization schedules, plus the harmonic-sum
sandwich used by the convergence-rate certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ScheduleParams", "gamma", "eta", "harmonic_sum_bounds", "min_valid_n"]


@dataclass(frozen=True)
class ScheduleParams:
    """Decay parameters shared by the solver and its rate certificates.

    ``gamma0`` and ``eta0`` scale the stepsize and regularization sequences
    ``gamma_k = gamma0 / sqrt(1 + k)`` and ``eta_k = eta0 / (1 + k)**b``.
    ``b`` must lie strictly inside (0, 0.5) so the rate denominators
    ``0.5 - b`` and ``1 - 0.5*r - b`` stay bounded away from zero.
    ``r`` in [0, 1) sets the averaging weight ``gamma_k**r`` (r = 0 gives the
    plain uniform average).
    """

    gamma0: float = 1.0
    eta0: float = 1.0
    b: float = 0.25
    r: float = 0.0

    def __post_init__(self) -> None:
        if not self.gamma0 > 0.0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if not self.eta0 > 0.0:
            raise ValueError(f"eta0 must be positive, got {self.eta0}")
        if not 0.0 < self.b < 0.5:
            raise ValueError(f"b must lie strictly in (0, 0.5), got {self.b}")
        if not 0.0 <= self.r < 1.0:
            raise ValueError(f"r must lie in [0, 1), got {self.r}")


def gamma(params: ScheduleParams, k):
    """Stepsize at outer iteration k: gamma0 / sqrt(1 + k). Accepts arrays."""
    return params.gamma0 / (1.0 + k) ** 0.5


def eta(params: ScheduleParams, k):
    """Regularization weight at outer iteration k: eta0 / (1 + k)**b."""
    return params.eta0 / (1.0 + k) ** params.b


def min_valid_n(alpha: float) -> int:
    """Smallest integer N for which the harmonic-sum sandwich applies,
    i.e. N >= 2**(1 / (1 - alpha)) - 1."""
    thr = 2.0 ** (1.0 / (1.0 - alpha))
    # relative tolerance so exact powers of two are not pushed up by float
    # fuzz (e.g. alpha = 0.9 evaluating to 1024.0000000000016)
    return max(0, math.ceil(thr - 1.0 - 1e-9 * max(1.0, thr)))


def harmonic_sum_bounds(alpha: float, n: int) -> tuple[float, float, float]:
    """Sandwich the partial sum ``sum_{k=0}^{n} (k + 1)**(-alpha)``.

    Returns ``(lower, upper, total)`` where total is the directly accumulated
    sum and

        lower = (n + 1)**(1 - alpha) / (2 * (1 - alpha)),   upper = 2 * lower.

    Requires ``0 <= alpha < 1`` and ``n >= 2**(1 / (1 - alpha)) - 1``; below
    that threshold the lower bound can fail, so we refuse to evaluate.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    n_min = min_valid_n(alpha)
    if n < n_min:
        raise ValueError(
            f"n={n} is below the sandwich threshold; need n >= {n_min} "
            f"for alpha={alpha}"
        )
    lower = (n + 1.0) ** (1.0 - alpha) / (2.0 * (1.0 - alpha))
    upper = 2.0 * lower
    total = float(np.sum((np.arange(n + 1) + 1.0) ** (-alpha)))
    return lower, upper, total
