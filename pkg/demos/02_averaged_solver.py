#!/usr/bin/env python3
# Run the averaged regularized incremental solver on a small analytic
# problem and compare the measured gaps against the certified ceilings.
#
# The solver never projects onto the constraint polyhedron. Each cycle
# applies one clamped subgradient step per agent with a vanishing
# regularization weight, and the reported iterate is a running weighted
# average of the cycle endpoints.

import numpy as np

from airig import (
    ScheduleParams,
    estimate_bounds,
    eval_phi_total,
    infeasibility_bound,
    problem_from_dict,
    run_airig,
    suboptimality_bound,
)

# minimize (x0-2)^2 + (x1+1)^2 split across two agents,
# subject to x0 + x1 <= 0 and the box [-4, 4]^2.
# Optimum sits on the halfspace boundary at (1.5, -1.5), f* = 0.5.
prob = problem_from_dict({
    "n": 2,
    "box": {"lower": [-4.0, -4.0], "upper": [4.0, 4.0]},
    "blocks": [
        {
            "f": {"family": "quadratic", "Q": [[2, 0], [0, 0]], "c": [-4, 0], "c0": 4.0},
            "h": {"family": "affine", "c": [1, 1], "c0": 0.0},
        },
        {
            "f": {"family": "quadratic", "Q": [[0, 0], [0, 2]], "c": [0, 2], "c0": 1.0},
            "h": {"family": "affine", "c": [1, 1], "c0": 0.0},
        },
    ],
})
f_star = 0.5

params = ScheduleParams(gamma0=1.0, eta0=1.0, b=0.25, r=0.0)
hist = run_airig(prob, params, n_iters=20000, eval_every=500)

print("   k      f(xbar)-f*    phi(xbar)")
for rec in hist.records[::8]:
    print(f"{rec.k:6d}   {rec.f_bar - f_star: .3e}   {rec.phi_bar:.3e}")

last = hist.records[-1]
print(f"\nfinal averaged iterate: {np.round(hist.xbar, 4).tolist()}")
print(f"final last iterate:     {np.round(hist.x_last, 4).tolist()}")
print(f"gap  f(xbar)-f* = {last.f_bar - f_star:.3e}   phi(xbar) = {last.phi_bar:.3e}")

# the certified ceilings are computable from sampled bound constants
bounds = estimate_bounds(prob, samples=512, seed=0)
k = last.k
sub_cap = suboptimality_bound(params, bounds, prob.m, k)
inf_cap = infeasibility_bound(params, bounds, prob.m, k)
print(f"\nceilings at k={k}:")
print(f"  suboptimality  {last.f_bar - f_star:.3e}  <=  {sub_cap:.3e}")
print(f"  infeasibility  {last.phi_bar:.3e}  <=  {inf_cap:.3e}")

# zero projections were needed; feasibility emerges from the schedule alone
assert eval_phi_total(prob, hist.xbar) == last.phi_bar
