"""Build a two-agent constrained problem, evaluate the infeasibility
metric, and round-trip it through the JSON format.

Run:  python3 demos/01_problem_model.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from airig import (
    eval_phi_agent,
    eval_phi_total,
    load_problem,
    problem_from_dict,
    save_problem,
)

# Two agents in R^2. Agent 0 pulls toward (1, 1) and carries the halfspace
# x0 + x1 <= 1; agent 1 pulls toward (-1, 0) and carries x0 - x1 <= 0.5.
# Both share the box [-5, 5]^2 and the nonnegativity set J = {0}.
spec = {
    "n": 2,
    "J": [0],
    "box": {"lower": [-5.0, -5.0], "upper": [5.0, 5.0]},
    "blocks": [
        {
            "f": {"family": "quadratic", "Q": [[1, 0], [0, 1]], "c": [-1, -1], "c0": 1.0},
            "h": {"family": "affine", "c": [1, 1], "c0": -1.0},
            "A": None,
            "b": None,
        },
        {
            "f": {"family": "quadratic", "Q": [[1, 0], [0, 1]], "c": [1, 0], "c0": 0.5},
            "h": {"family": "affine", "c": [1, -1], "c0": -0.5},
            "A": [[0.0, 1.0]],
            "b": [0.25],
        },
    ],
}
prob = problem_from_dict(spec)
print(f"problem: n={prob.n}, m={prob.m}, J={prob.J.tolist()}")

# evaluate objective and infeasibility at a deliberately infeasible point
x = np.array([2.0, 2.0])
f = sum(blk.f(x)[0] for blk in prob.blocks)
print(f"\nat x = {x.tolist()}:")
print(f"  f(x)        = {f:.6f}")
print(f"  phi(x)      = {eval_phi_total(prob, x):.6f}")
for i, blk in enumerate(prob.blocks):
    print(f"  phi_{i}(x)    = {eval_phi_agent(blk, x, prob.J, prob.m):.6f}")

# phi is zero exactly on the constraint set
x_feas = np.array([0.25, 0.25])
print(f"\nat the feasible point {x_feas.tolist()}: phi = {eval_phi_total(prob, x_feas):.6f}")

# subgradient inequality spot check for the hinge-style constraint penalty
g = prob.blocks[0].h(x)[1]
h_x = prob.blocks[0].h(x)[0]
h_y = prob.blocks[0].h(x_feas)[0]
assert h_y >= h_x + g @ (x_feas - x) - 1e-12
print("subgradient inequality holds between the two points")

# JSON round trip preserves everything the solvers consume
with tempfile.TemporaryDirectory() as td:
    path = Path(td) / "problem.json"
    save_problem(prob, path)
    prob2 = load_problem(path)
    same_phi = eval_phi_total(prob2, x) == eval_phi_total(prob, x)
    print(f"\nsaved {path.name} ({path.stat().st_size} bytes), reload matches: {same_phi}")
    print(json.dumps(json.loads(path.read_text())["blocks"][0]["h"]))
