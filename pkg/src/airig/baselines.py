"""Projection-based incremental baselines: projected IG, proximal IAG, SAGA.

All three maintain feasibility by projecting every step onto the given
polyhedron (which should encode the full feasible set, box included), so
their per-step cost is dominated by a QP solve; they are the comparison
points for the projection-free incremental method.

Iteration units differ by design and ``RunHistory.passes`` normalizes them:
projected IG counts one iteration per full agent cycle (m projections),
proximal IAG and SAGA count one iteration per single-agent update (one
projection), so their pass count is iterations / m.
"""

from __future__ import annotations

from dataclasses import dataclass
import time

import numpy as np

from .problem import ProblemSpec, eval_phi_total
from .qp import PolyhedralProjector, PolyhedralSet
from .solver import IterRecord, RunHistory

__all__ = [
    "GradientTable",
    "step_projected_ig",
    "step_prox_iag",
    "step_saga",
    "saga_direction",
    "estimate_smoothness",
    "tune_constant_step",
    "run_baseline",
    "BASELINE_KINDS",
]

BASELINE_KINDS = ("proj_ig", "prox_iag", "saga")


@dataclass
class GradientTable:
    """Stored per-agent gradients plus their running sum.

    The sum is updated incrementally on refresh and re-accumulated every 64
    refreshes so float drift between ``total`` and ``grads.sum(0)`` stays
    below 1e-9.
    """

    grads: np.ndarray  # (m, n)
    total: np.ndarray  # (n,)
    refreshes: int = 0

    @classmethod
    def init(cls, problem: ProblemSpec, x: np.ndarray) -> "GradientTable":
        grads = np.stack([blk.f(x)[1] for blk in problem.blocks])
        return cls(grads=grads, total=grads.sum(axis=0))

    @property
    def m(self) -> int:
        return self.grads.shape[0]

    def refresh(self, i: int, g_new: np.ndarray) -> None:
        self.total += g_new - self.grads[i]
        self.grads[i] = g_new
        self.refreshes += 1
        if self.refreshes % 64 == 0:
            self.total = self.grads.sum(axis=0)


def step_projected_ig(
    problem: ProblemSpec,
    x: np.ndarray,
    gamma_k: float,
    projector: PolyhedralProjector,
) -> np.ndarray:
    """One full cycle of projected incremental gradient: each agent in turn
    steps along its own gradient and projects back."""
    y = x
    for blk in problem.blocks:
        y = projector.project(y - gamma_k * blk.f(y)[1])
    return y


def step_prox_iag(
    problem: ProblemSpec,
    x: np.ndarray,
    step: float,
    table: GradientTable,
    projector: PolyhedralProjector,
    agent: int,
) -> np.ndarray:
    """One aggregated-gradient update: refresh agent's slot at the current
    point, then project a step along the averaged table."""
    table.refresh(agent, problem.blocks[agent].f(x)[1])
    return projector.project(x - (step / table.m) * table.total)


def saga_direction(
    problem: ProblemSpec, table: GradientTable, x: np.ndarray, j: int
) -> np.ndarray:
    """Variance-reduced direction for drawn index j. Its expectation over j
    uniform is exactly the mean gradient (1/m) sum_i grad f_i(x), whatever
    the table contents."""
    g_new = problem.blocks[j].f(x)[1]
    return g_new - table.grads[j] + table.total / table.m


def step_saga(
    problem: ProblemSpec,
    x: np.ndarray,
    step: float,
    table: GradientTable,
    projector: PolyhedralProjector,
    rng: np.random.Generator,
) -> np.ndarray:
    """One SAGA update: uniform draw, variance-reduced step, projection;
    the drawn slot is refreshed after the direction is formed."""
    j = int(rng.integers(table.m))
    g_new = problem.blocks[j].f(x)[1]
    direction = g_new - table.grads[j] + table.total / table.m
    table.refresh(j, g_new)
    return projector.project(x - step * direction)


def estimate_smoothness(
    problem: ProblemSpec, samples: int = 32, seed: int = 0
) -> float:
    """Largest per-agent gradient Lipschitz ratio over sampled box pairs.

    A cheap stand-in for max_i L_i used only to scale the constant-step
    grid; floored at 1e-12 so steps stay finite for flat objectives.
    """
    rng = np.random.default_rng(seed)
    xs = problem.box.sample(rng, samples)
    ys = problem.box.sample(rng, samples)
    L = 0.0
    for x, y in zip(xs, ys):
        gap = float(np.linalg.norm(x - y))
        if gap < 1e-12:
            continue
        for blk in problem.blocks:
            L = max(L, float(np.linalg.norm(blk.f(x)[1] - blk.f(y)[1])) / gap)
    return max(L, 1e-12)


def tune_constant_step(
    kind: str,
    problem: ProblemSpec,
    feasible: PolyhedralSet,
    x0: np.ndarray,
    seed: int = 0,
    grid: tuple[float, ...] = (1.0, 0.1, 0.01),
    pilot_iters: int | None = None,
    tol: float = 1e-8,
) -> float:
    """Pick a constant stepsize by short pilot runs: candidates are
    grid / L_est and the winner is the lowest final objective on the pilot's
    averaged iterate. Runs before any budget clock starts.

    Nearly flat objectives make L_est hit its floor and grid / L_est absurd,
    so candidates are capped at a box-diameter multiple; on a compact set
    nothing is gained past that anyway."""
    L = estimate_smoothness(problem, seed=seed)
    diam = float(np.linalg.norm(problem.box.upper - problem.box.lower))
    gnorm = max(
        (float(np.linalg.norm(blk.f(problem.box.project(x0))[1]))
         for blk in problem.blocks),
        default=0.0,
    )
    cap = 1e3 * (1.0 + diam) / (1.0 + gnorm)
    pilots = pilot_iters if pilot_iters is not None else 3 * problem.m
    best_step, best_val = min(grid[0] / L, cap), np.inf
    for cand in grid:
        step = min(cand / L, cap)
        hist = run_baseline(
            kind, problem, feasible, n_iters=pilots, x0=x0,
            stepsize=step, seed=seed, tol=tol, eval_every=max(pilots, 1),
        )
        val = hist.records[-1].f_bar
        if np.isfinite(val) and val < best_val:
            best_val, best_step = val, step
    return best_step


def run_baseline(
    kind: str,
    problem: ProblemSpec,
    feasible: PolyhedralSet,
    n_iters: int,
    x0: np.ndarray | None = None,
    budget_s: float | None = None,
    stepsize: float | None = None,
    gamma0: float = 1.0,
    eval_every: int = 1,
    seed: int = 0,
    tol: float = 1e-8,
) -> RunHistory:
    """Run one baseline to n_iters iterations or until budget_s expires.

    proj_ig uses the diminishing schedule gamma0 / sqrt(1 + k); the other
    two use a constant step, tuned by pilot runs when ``stepsize`` is None
    (tuning happens before the budget clock starts). The start point is
    projected onto the feasible polyhedron, and every subsequent iterate is
    feasible by construction. The reported trajectory is the plain running
    average of the iterates.
    """
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline {kind!r}; known: {BASELINE_KINDS}")
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    if eval_every < 1:
        raise ValueError("eval_every must be >= 1")
    if stepsize is None and kind in ("prox_iag", "saga"):
        stepsize = tune_constant_step(kind, problem, feasible, x0 if x0 is not None
                                      else np.zeros(problem.n), seed=seed, tol=tol)

    projector = PolyhedralProjector(feasible, tol=tol)
    x = np.zeros(problem.n) if x0 is None else np.asarray(x0, dtype=float)
    x = projector.project(problem.box.project(x))
    m = problem.m
    rng = np.random.default_rng(seed)
    table = GradientTable.init(problem, x) if kind in ("prox_iag", "saga") else None

    xbar = x.copy()
    count = 1.0
    records: list[IterRecord] = []
    start = time.perf_counter()
    done = 0
    truncated = False
    for k in range(n_iters):
        if kind == "proj_ig":
            step = gamma0 / (1.0 + k) ** 0.5
            x = step_projected_ig(problem, x, step, projector)
        elif kind == "prox_iag":
            step = stepsize
            x = step_prox_iag(problem, x, step, table, projector, agent=k % m)
        else:
            step = stepsize
            x = step_saga(problem, x, step, table, projector, rng)
        count += 1.0
        xbar += (x - xbar) / count
        done = k + 1
        if done % eval_every == 0 or done == n_iters:
            records.append(_measure_baseline(problem, xbar, x, done, step, start))
        if budget_s is not None and time.perf_counter() - start >= budget_s:
            truncated = done < n_iters
            break
    if not records or records[-1].k != done:
        records.append(_measure_baseline(problem, xbar, x, done, step, start))

    return RunHistory(
        solver=kind,
        records=records,
        x_last=x,
        xbar=xbar,
        iterations=done,
        passes=float(done) if kind == "proj_ig" else done / m,
        truncated=truncated,
        m=m,
        stepsize=None if kind == "proj_ig" else stepsize,
    )


def _measure_baseline(problem, xbar, x, k, step, start) -> IterRecord:
    return IterRecord(
        k=k,
        f_bar=problem.f_value(xbar),
        phi_bar=eval_phi_total(problem, xbar),
        f_last=problem.f_value(x),
        phi_last=eval_phi_total(problem, x),
        gamma_k=float(step),
        eta_k=0.0,
        elapsed_s=time.perf_counter() - start,
    )
