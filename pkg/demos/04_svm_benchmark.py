#!/usr/bin/env python3
"""Distributed soft-margin SVM benchmark: all four solvers on one instance.

The averaged solver touches only its box clamp. The three baselines project
onto the full margin polyhedron every iteration, which is where their time
goes; the point of the benchmark is the pass count each method affords
under an equal wall-clock budget.
"""

import numpy as np

from airig import (
    build_preset,
    eval_phi_total,
    reference_optimum,
    run_airig,
    run_baseline,
    svm_objective,
)

# desk-scale cell of the benchmark grid: 60 samples, 8 features, 6 agents
inst, params, cfg = build_preset("paper-fig1", n_samples=60, n_features=8, agents=6)
print(f"instance: {inst.n_samples} samples, {inst.n_features} features, "
      f"m={inst.problem.m}, decision dim {inst.dim}")
print(f"schedules: gamma0={params.gamma0} eta0={params.eta0} b={params.b} r={params.r}")

x_star, f_star, _ = reference_optimum(inst)
print(f"reference optimum: f* = {f_star:.6f}")

budget = 3.0  # seconds per solver
poly = inst.feasible_with_box()

hist = run_airig(inst.problem, params, n_iters=10**9, budget_s=budget, eval_every=200)
rows = [("airig", hist)]
for kind in ("proj_ig", "prox_iag", "saga"):
    rows.append((kind, run_baseline(
        kind, inst.problem, poly, n_iters=10**9, budget_s=budget, eval_every=5,
    )))

print(f"\n{budget:.0f}s budget each:")
print(f"{'solver':10s} {'passes':>8s} {'f(xbar)-f*':>12s} {'phi(xbar)':>11s}")
for name, h in rows:
    rec = h.records[-1]
    print(f"{name:10s} {h.passes:8.0f} {rec.f_bar - f_star:12.3e} {rec.phi_bar:11.3e}")

# sanity: the objective helper agrees with the block oracles
x = rows[0][1].xbar
w, b, z = inst.split(x)
assert abs(svm_objective(inst, x) - sum(blk.f(x)[0] for blk in inst.problem.blocks)) < 1e-9
print(f"\nairig final iterate: ||w||={np.linalg.norm(w):.4f}  b={b:.4f}  "
      f"max z={z.max():.4f}  phi={eval_phi_total(inst.problem, x):.2e}")
