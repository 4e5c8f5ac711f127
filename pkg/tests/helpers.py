"""Shared test fixtures and independent reference oracles.

The reference implementations here deliberately avoid the library's own
algorithms: projections come from exhaustive active-set enumeration, sums
from direct accumulation, so library results are checked against a second
route rather than against themselves.
"""

from __future__ import annotations

import numpy as np

from airig import AgentBlock, BoxSet, PolyhedralSet, ProblemSpec
from airig.oracles import build_oracle


def make_block(f_spec: dict, h_spec: dict, A=None, b=None) -> AgentBlock:
    return AgentBlock(
        f=build_oracle(f_spec), h=build_oracle(h_spec),
        A=A, b=b, f_spec=f_spec, h_spec=h_spec,
    )


def never_active_h(n: int) -> dict:
    """h(x) = -1: an inequality oracle that never binds."""
    return {"family": "affine", "c": [0.0] * n, "c0": -1.0}


def one_d_nonneg_problem() -> ProblemSpec:
    """min x over [-1, 1] subject to x >= 0 (via J); f* = 0 at x* = 0."""
    blk = make_block({"family": "affine", "c": [1.0]}, never_active_h(1))
    return ProblemSpec(n=1, blocks=(blk,), box=BoxSet.cube(1, 1.0), J=[0])


def two_d_equality_problem() -> ProblemSpec:
    """min x0 + x1 over [-1, 1]^2 subject to x0 - x1 = 0.5.

    On the segment the objective is 2*x1 + 0.5, minimized at the box edge:
    x* = (-0.5, -1), f* = -1.5.
    """
    blk = make_block(
        {"family": "affine", "c": [1.0, 1.0]}, never_active_h(2),
        A=np.array([[1.0, -1.0]]), b=np.array([0.5]),
    )
    return ProblemSpec(n=2, blocks=(blk,), box=BoxSet.cube(2, 1.0))


def random_small_problem(rng: np.random.Generator) -> ProblemSpec:
    """A small random instance mixing equalities, affine inequalities, and
    nonnegativity indices; used by drift and property tests."""
    n = int(rng.integers(2, 5))
    m = int(rng.integers(2, 6))
    blocks = []
    for _ in range(m):
        f_spec = {
            "family": "affine",
            "c": rng.normal(size=n).tolist(),
            "c0": float(rng.normal()),
        }
        h_spec = {
            "family": "affine",
            "c": rng.normal(scale=0.5, size=n).tolist(),
            "c0": float(rng.normal(scale=0.5)),
        }
        if rng.random() < 0.5:
            A = rng.normal(size=(1, n))
            b = rng.normal(size=1)
        else:
            A = b = None
        blocks.append(make_block(f_spec, h_spec, A=A, b=b))
    j_count = int(rng.integers(0, n + 1))
    J = rng.choice(n, size=j_count, replace=False) if j_count else []
    return ProblemSpec(n=n, blocks=tuple(blocks), box=BoxSet.cube(n, 2.0), J=J)


def enumeration_projection(
    poly: PolyhedralSet, z: np.ndarray, tol: float = 1e-9
) -> np.ndarray | None:
    """Exact Euclidean projection by exhaustive active-set enumeration.

    Tries every subset of inequality rows as the active set (equalities are
    always active), solves the KKT system by least squares, and keeps KKT-
    consistent candidates. Returns None when no subset passes (infeasible
    set). Exponential in the row count: test-scale only.
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    C = poly.C if poly.n_ineq else np.zeros((0, n))
    d = poly.d
    E = poly.E if poly.n_eq else np.zeros((0, n))
    e = poly.e
    q = C.shape[0]
    best_x, best_val = None, np.inf
    for mask in range(1 << q):
        idx = [i for i in range(q) if (mask >> i) & 1]
        act = np.vstack([C[idx], E])
        rhs = np.concatenate([d[idx], e])
        if act.shape[0]:
            gram = act @ act.T
            nu, *_ = np.linalg.lstsq(gram, act @ z - rhs, rcond=None)
            x = z - act.T @ nu
            if np.max(np.abs(act @ x - rhs), initial=0.0) > tol:
                continue  # inconsistent active set
            if len(idx) and np.min(nu[: len(idx)]) < -tol:
                continue  # wrong multiplier sign
        else:
            x = z.copy()
        if q and np.max(C @ x - d) > tol:
            continue
        if E.shape[0] and np.max(np.abs(E @ x - e)) > tol:
            continue
        val = float(np.sum((x - z) ** 2))
        if val < best_val - 1e-15:
            best_val, best_x = val, x
    return best_x


def random_feasible_polyhedron(
    rng: np.random.Generator, with_eq: bool = True
) -> tuple[PolyhedralSet, np.ndarray]:
    """A random nonempty polyhedron plus an interior-ish witness point."""
    n = int(rng.integers(1, 5))
    q = int(rng.integers(0, 7))
    s = int(rng.integers(0, min(2, n - 1) + 1)) if (with_eq and n > 1) else 0
    xhat = rng.normal(scale=2.0, size=n)
    C = d = E = e = None
    if q:
        C = rng.normal(size=(q, n))
        C /= np.linalg.norm(C, axis=1, keepdims=True)
        d = C @ xhat + np.abs(rng.normal(scale=1.0, size=q))
    if s:
        E = rng.normal(size=(s, n))
        e = E @ xhat
    poly = PolyhedralSet(C=C, d=d, E=E, e=e, dim=n)
    return poly, xhat


def weighted_average_oracle(iterates: list[np.ndarray], gammas: np.ndarray, r: float) -> np.ndarray:
    """Direct weighted sum over the full iterate list: the averaging identity
    the recursive update must reproduce."""
    w = gammas**r
    stack = np.stack(iterates)
    return (w[:, None] * stack).sum(axis=0) / w.sum()
