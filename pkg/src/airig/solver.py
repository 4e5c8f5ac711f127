"""Averaged iteratively regularized incremental subgradient method.

One outer iteration sweeps the agents in fixed cyclic order. Agent i takes
the current point y and applies a box-clamped subgradient step on its own
infeasibility measure plus a decaying multiple of its own objective:

    y <- clamp( y - gamma_k * (subgrad phi_i(y) + eta_k * subgrad f_i(y)) ).

No polyhedral projection is ever solved; the box clamp is the only feasible
set handled explicitly, constraint violation being driven down by the phi
term while eta_k -> 0 anneals the objective back in. Reported iterates are
the weighted running averages

    xbar_{k+1} = (S_k * xbar_k + gamma_{k+1}^r * x_{k+1}) / S_{k+1},
    S_{k+1} = S_k + gamma_{k+1}^r,   S_0 = gamma_0^r,  xbar_0 = x_0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .problem import ProblemSpec, eval_phi_total
from .schedules import ScheduleParams, eta, gamma

__all__ = [
    "AveragingState",
    "IterRecord",
    "RunHistory",
    "cycle",
    "update_average",
    "run_airig",
]


@dataclass
class AveragingState:
    """Running weighted average: S is the accumulated weight mass."""

    S: float
    xbar: np.ndarray


def update_average(state: AveragingState, x_next: np.ndarray, weight: float) -> AveragingState:
    """Fold one iterate with the given weight into the running average."""
    if weight < 0.0:
        raise ValueError("averaging weight must be nonnegative")
    s_new = state.S + weight
    xbar_new = (state.S * state.xbar + weight * x_next) / s_new
    return AveragingState(s_new, xbar_new)


@dataclass(frozen=True)
class IterRecord:
    """Metrics at outer iteration k (k iterations completed).

    ``gamma_k`` and ``eta_k`` are the schedules evaluated at index k, i.e.
    the values a rate certificate with N = k would use, not the stepsize that
    produced iterate k.
    """

    k: int
    f_bar: float
    phi_bar: float
    f_last: float
    phi_last: float
    gamma_k: float
    eta_k: float
    elapsed_s: float


@dataclass
class RunHistory:
    """Everything a run reports: sampled metrics plus final iterates.

    ``passes`` counts full sweeps over the agent set, the unit all solvers
    are compared in. ``iterates`` / ``xbar_iterates`` / ``drift`` are only
    populated when explicitly requested.
    """

    solver: str
    records: list[IterRecord]
    x_last: np.ndarray
    xbar: np.ndarray
    iterations: int
    passes: float
    truncated: bool = False
    params: ScheduleParams | None = None
    m: int = 0
    iterates: list[np.ndarray] | None = None
    xbar_iterates: list[np.ndarray] | None = None
    drift: list[np.ndarray] | None = None
    stepsize: float | None = None

    def final_record(self) -> IterRecord:
        return self.records[-1]


def cycle(
    problem: ProblemSpec,
    x: np.ndarray,
    gamma_k: float,
    eta_k: float,
    collect_positions: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """One full agent sweep from x; returns (x_next, deviations).

    ``deviations[i]`` is ||x - y_i|| for the within-cycle positions
    y_1 = x, ..., y_{m+1} = x_next (only computed when requested).
    """
    lo, up = problem.box.lower, problem.box.upper
    y = x
    devs = np.zeros(problem.m + 1) if collect_positions else None
    for i, blk in enumerate(problem.blocks):
        g = problem.phi_subgrad_agent(i, y)
        g += eta_k * blk.f(y)[1]
        y = np.clip(y - gamma_k * g, lo, up)
        if devs is not None:
            devs[i + 1] = float(np.linalg.norm(y - x))
    return y, devs


def run_airig(
    problem: ProblemSpec,
    params: ScheduleParams,
    n_iters: int,
    x0: np.ndarray | None = None,
    budget_s: float | None = None,
    eval_every: int = 1,
    log_iterates: bool = False,
    log_drift: bool = False,
) -> RunHistory:
    """Run n_iters outer iterations (fewer if budget_s expires first).

    x0 defaults to the zero vector; a starting point outside the box is
    clamped into it first. Metrics are recorded every ``eval_every``
    iterations and always at the last one.
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    if eval_every < 1:
        raise ValueError("eval_every must be >= 1")
    x = np.zeros(problem.n) if x0 is None else np.asarray(x0, dtype=float)
    x = problem.box.project(x)

    avg = AveragingState(S=gamma(params, 0) ** params.r, xbar=x.copy())
    records: list[IterRecord] = []
    iterates = [x.copy()] if log_iterates else None
    xbar_iterates = [x.copy()] if log_iterates else None
    drift = [] if log_drift else None

    start = time.perf_counter()
    done = 0
    truncated = False
    for k in range(n_iters):
        g_k = gamma(params, k)
        e_k = eta(params, k)
        x, devs = cycle(problem, x, g_k, e_k, collect_positions=log_drift)
        avg = update_average(avg, x, gamma(params, k + 1) ** params.r)
        done = k + 1
        if log_iterates:
            iterates.append(x.copy())
            xbar_iterates.append(avg.xbar.copy())
        if log_drift:
            drift.append(devs)
        if done % eval_every == 0 or done == n_iters:
            records.append(_measure(problem, params, avg.xbar, x, done, start))
        if budget_s is not None and time.perf_counter() - start >= budget_s:
            truncated = done < n_iters
            break
    if not records or records[-1].k != done:
        records.append(_measure(problem, params, avg.xbar, x, done, start))

    return RunHistory(
        solver="airig",
        records=records,
        x_last=x,
        xbar=avg.xbar,
        iterations=done,
        passes=float(done),
        truncated=truncated,
        params=params,
        m=problem.m,
        iterates=iterates,
        xbar_iterates=xbar_iterates,
        drift=drift,
    )


def _measure(problem, params, xbar, x, k, start) -> IterRecord:
    return IterRecord(
        k=k,
        f_bar=problem.f_value(xbar),
        phi_bar=eval_phi_total(problem, xbar),
        f_last=problem.f_value(x),
        phi_last=eval_phi_total(problem, x),
        gamma_k=float(gamma(params, k)),
        eta_k=float(eta(params, k)),
        elapsed_s=time.perf_counter() - start,
    )
