"""Empirical rate fitting and closed-form rate ceilings.

``fit_rates`` regresses log(metric) on log(k + 1) over the tail of a run's
records to expose the observed decay exponents. ``suboptimality_bound`` and
``infeasibility_bound`` evaluate the guaranteed ceilings

    f(xbar_N) - f* <= (2 - r) / (gamma0^r (N+1)^(0.5-b)) *
        ( 2 M^2 / (eta0 gamma0^(1-r))
          + (m+1) gamma0^(1+r) (C + eta0 C_f)^2 / (2 m eta0 (0.5 - 0.5 r + b)) )

    phi(xbar_N) <= (2 - r) / (N+1)^b *
        ( 2 M^2 / gamma0
          + 2 M_f eta0 / (1 - 0.5 r - b)
          + (m+1) (C + eta0 C_f)^2 gamma0 / (2 m (0.5 - 0.5 r)) )

valid for N >= 2^(2/(1-r)) - 1, given constants (C, C_f, M, M_f) that
majorize the run (see ``estimate_bounds``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import BoundEstimates
from .schedules import ScheduleParams
from .solver import RunHistory

__all__ = [
    "RateReport",
    "fit_rates",
    "suboptimality_bound",
    "infeasibility_bound",
    "rate_valid_from",
    "METRIC_FLOOR",
]

# metric values at or below this are treated as converged-to-zero noise and
# excluded from log-log fits
METRIC_FLOOR = 1e-14


@dataclass(frozen=True)
class RateReport:
    """Log-log tail fit of suboptimality and infeasibility decay.

    Slopes are the fitted exponents of k; ``bound_check_*`` report whether
    every windowed record at or past the validity threshold sits under the
    closed-form ceiling (None when no ceiling was evaluated).
    """

    slope_f: float | None
    intercept_f: float | None
    r2_f: float | None
    n_used_f: int
    n_excluded_f: int
    slope_phi: float
    intercept_phi: float
    r2_phi: float
    n_used_phi: int
    n_excluded_phi: int
    window_fraction: float
    bound_check_f: bool | None = None
    bound_check_phi: bool | None = None
    threshold_k: int | None = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def rate_valid_from(params: ScheduleParams) -> int:
    """Smallest N the ceilings hold for: ceil(2^(2/(1-r)) - 1)."""
    return max(0, math.ceil(2.0 ** (2.0 / (1.0 - params.r)) - 1.0 - 1e-12))


def _ceiling_common(params: ScheduleParams, bounds: BoundEstimates, m: int):
    if m < 1:
        raise ValueError("m must be >= 1")
    g0, e0, b, r = params.gamma0, params.eta0, params.b, params.r
    mix = (m + 1.0) * (bounds.C + e0 * bounds.C_f) ** 2 / (2.0 * m)
    return g0, e0, b, r, mix


def suboptimality_bound(
    params: ScheduleParams, bounds: BoundEstimates, m: int, n
):
    """Guaranteed f(xbar_N) - f* ceiling; n may be an int or an array."""
    g0, e0, b, r, mix = _ceiling_common(params, bounds, m)
    inner = 2.0 * bounds.M**2 / (e0 * g0 ** (1.0 - r))
    inner += mix * g0 ** (1.0 + r) / (e0 * (0.5 - 0.5 * r + b))
    n = np.asarray(n, dtype=float)
    out = (2.0 - r) / (g0**r * (n + 1.0) ** (0.5 - b)) * inner
    return float(out) if out.ndim == 0 else out


def infeasibility_bound(
    params: ScheduleParams, bounds: BoundEstimates, m: int, n
):
    """Guaranteed phi(xbar_N) ceiling; n may be an int or an array."""
    g0, e0, b, r, mix = _ceiling_common(params, bounds, m)
    inner = 2.0 * bounds.M**2 / g0
    inner += 2.0 * bounds.M_f * e0 / (1.0 - 0.5 * r - b)
    inner += mix * g0 / (0.5 - 0.5 * r)
    n = np.asarray(n, dtype=float)
    out = (2.0 - r) / (n + 1.0) ** b * inner
    return float(out) if out.ndim == 0 else out


def _loglog_fit(ks: np.ndarray, vals: np.ndarray) -> tuple[float, float, float]:
    lx = np.log(ks + 1.0)
    ly = np.log(vals)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot <= 1e-30:
        # constant series: perfect fit by convention, up to float roundoff
        r2 = 1.0 if ss_res <= 1e-24 * max(1.0, float(np.sum(ly**2))) else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def fit_rates(
    history: RunHistory,
    f_star: float | None,
    window_fraction: float = 0.5,
    bounds: BoundEstimates | None = None,
    min_used: int = 50,
) -> RateReport:
    """Fit decay exponents over the last ``window_fraction`` of records.

    Records with metric <= 1e-14 are excluded (and counted); fewer than
    ``min_used`` usable records for a fitted metric is an error naming the
    count. Pass ``f_star=None`` to skip the suboptimality fit. When
    ``bounds`` is given and the history carries schedule parameters, every
    windowed record past the validity threshold is checked against the
    ceilings.
    """
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must be in (0, 1]")
    recs = history.records
    if not recs:
        raise ValueError("history has no records")
    start = int(len(recs) * (1.0 - window_fraction))
    window = recs[start:]
    ks = np.array([rec.k for rec in window], dtype=float)

    phi = np.array([rec.phi_bar for rec in window])
    usable_phi = phi > METRIC_FLOOR
    n_used_phi = int(usable_phi.sum())
    if n_used_phi < min_used:
        raise ValueError(
            f"only {n_used_phi} usable infeasibility records in window "
            f"(need {min_used}); {int((~usable_phi).sum())} at or below the floor"
        )
    slope_phi, icpt_phi, r2_phi = _loglog_fit(ks[usable_phi], phi[usable_phi])

    slope_f = icpt_f = r2_f = None
    n_used_f = n_excluded_f = 0
    if f_star is not None:
        gap = np.array([rec.f_bar for rec in window]) - f_star
        usable_f = gap > METRIC_FLOOR
        n_used_f = int(usable_f.sum())
        n_excluded_f = int((~usable_f).sum())
        if n_used_f < min_used:
            raise ValueError(
                f"only {n_used_f} usable suboptimality records in window "
                f"(need {min_used}); {n_excluded_f} at or below the floor"
            )
        slope_f, icpt_f, r2_f = _loglog_fit(ks[usable_f], gap[usable_f])

    check_f = check_phi = None
    threshold = None
    if bounds is not None and history.params is not None and history.m >= 1:
        threshold = rate_valid_from(history.params)
        in_range = ks >= threshold
        if np.any(in_range):
            kk = ks[in_range]
            ceil_phi = infeasibility_bound(history.params, bounds, history.m, kk)
            check_phi = bool(np.all(phi[in_range] <= ceil_phi * (1.0 + 1e-9)))
            if f_star is not None:
                ceil_f = suboptimality_bound(history.params, bounds, history.m, kk)
                check_f = bool(np.all(gap[in_range] <= ceil_f * (1.0 + 1e-9)))

    return RateReport(
        slope_f=slope_f,
        intercept_f=icpt_f,
        r2_f=r2_f,
        n_used_f=n_used_f,
        n_excluded_f=n_excluded_f,
        slope_phi=float(slope_phi),
        intercept_phi=float(icpt_phi),
        r2_phi=float(r2_phi),
        n_used_phi=n_used_phi,
        n_excluded_phi=int((~usable_phi).sum()),
        window_fraction=window_fraction,
        bound_check_f=check_f,
        bound_check_phi=check_phi,
        threshold_k=threshold,
    )
