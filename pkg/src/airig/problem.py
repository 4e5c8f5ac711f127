"""Finite-sum constrained problem model.

A problem couples m agent blocks, each holding a local objective oracle
``f_i``, a local convex inequality oracle ``h_i`` (the constraint is
``h_i(x) <= 0``), and local linear equalities ``A_i x = b_i``, with a shared
box set and a shared list J of coordinates required to be nonnegative.

The scalar infeasibility measure aggregated by the solver is

    phi(x) = sum_i phi_i(x),
    phi_i(x) = 0.5 * ||A_i x - b_i||^2 + pen(h_i(x))
               + sum_{j in J} max(-x_j, 0) / m,

where ``pen`` depends on the penalty mode: ``"hinge"`` uses
``pen(h) = max(h, 0)`` and ``"product"`` uses ``pen(h) = 0.5 * max(h, 0)**2``.
The matching subgradients are ``1{h > 0} * s`` and ``max(h, 0) * s`` for any
``s`` in the subdifferential of ``h_i``; at ``h_i(x) = 0`` both modes pick the
zero vector, the minimum-norm element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as _cartesian
from typing import Callable

import numpy as np

__all__ = [
    "PHI_MODES",
    "BoxSet",
    "AgentBlock",
    "ProblemSpec",
    "BoundEstimates",
    "project_box",
    "eval_phi_agent",
    "subgrad_phi_agent",
    "eval_phi_total",
    "estimate_bounds",
]

PHI_MODES = ("hinge", "product")

# an oracle maps x to (value, subgradient)
Oracle = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class BoxSet:
    """Axis-aligned box {x : lower <= x <= upper} with finite bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        if lo.ndim != 1 or lo.shape != up.shape:
            raise ValueError("box bounds must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > up):
            raise ValueError("box has lower > upper in some coordinate")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, z: np.ndarray) -> np.ndarray:
        return np.clip(z, self.lower, self.upper)

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        return bool(
            np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol)
        )

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform samples, one per row."""
        return rng.uniform(self.lower, self.upper, size=(count, self.dim))

    def corners(self) -> np.ndarray:
        """All 2**dim corner points; only call for small dim."""
        cols = [(lo, up) for lo, up in zip(self.lower, self.upper)]
        return np.array(list(_cartesian(*cols)), dtype=float)

    @staticmethod
    def cube(n: int, radius: float) -> "BoxSet":
        return BoxSet(np.full(n, -radius), np.full(n, radius))


def project_box(box: BoxSet, z: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the box (coordinate clamp)."""
    return np.clip(z, box.lower, box.upper)


@dataclass(frozen=True)
class AgentBlock:
    """One agent's slice of the problem.

    ``f`` and ``h`` are oracles returning ``(value, subgradient)``. ``A`` and
    ``b`` hold the local equality rows; pass ``None`` for both when the agent
    has no equalities. ``f_spec`` / ``h_spec`` optionally carry the JSON
    description the oracle was built from, which is what makes a block
    serializable.
    """

    f: Oracle
    h: Oracle
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    f_spec: dict | None = None
    h_spec: dict | None = None

    def __post_init__(self) -> None:
        if (self.A is None) != (self.b is None):
            raise ValueError("A and b must be given together or not at all")
        if self.A is not None:
            A = np.atleast_2d(np.asarray(self.A, dtype=float))
            b = np.asarray(self.b, dtype=float).ravel()
            if A.shape[0] != b.shape[0]:
                raise ValueError(
                    f"A has {A.shape[0]} rows but b has {b.shape[0]} entries"
                )
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "b", b)

    @property
    def n_eq(self) -> int:
        return 0 if self.A is None else self.A.shape[0]


@dataclass(frozen=True)
class ProblemSpec:
    """Immutable description of one finite-sum constrained instance."""

    n: int
    blocks: tuple[AgentBlock, ...]
    box: BoxSet
    J: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    phi_mode: str = "hinge"

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if len(self.blocks) < 1:
            raise ValueError("need at least one agent block")
        if self.box.dim != self.n:
            raise ValueError(f"box dim {self.box.dim} != n={self.n}")
        J = np.unique(np.asarray(self.J, dtype=np.intp).ravel())
        if J.size and (J[0] < 0 or J[-1] >= self.n):
            raise ValueError("J contains an index outside range(n)")
        object.__setattr__(self, "J", J)
        if self.phi_mode not in PHI_MODES:
            raise ValueError(f"phi_mode must be one of {PHI_MODES}")
        for i, blk in enumerate(self.blocks):
            if blk.A is not None and blk.A.shape[1] != self.n:
                raise ValueError(f"block {i}: A has {blk.A.shape[1]} cols, expected {self.n}")

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def n_eq_total(self) -> int:
        return sum(blk.n_eq for blk in self.blocks)

    def equality_system(self) -> tuple[np.ndarray, np.ndarray]:
        """All equality rows stacked into one (p, n) matrix and length-p rhs."""
        mats = [blk.A for blk in self.blocks if blk.A is not None]
        rhss = [blk.b for blk in self.blocks if blk.b is not None]
        if not mats:
            return np.zeros((0, self.n)), np.zeros(0)
        return np.vstack(mats), np.concatenate(rhss)

    # convenience wrappers over the module-level operations

    def f_value(self, x: np.ndarray) -> float:
        return float(sum(blk.f(x)[0] for blk in self.blocks))

    def f_subgrad_total(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros(self.n)
        for blk in self.blocks:
            g += blk.f(x)[1]
        return g

    def phi_value(self, x: np.ndarray) -> float:
        return eval_phi_total(self, x)

    def phi_agent(self, i: int, x: np.ndarray) -> float:
        return eval_phi_agent(self.blocks[i], x, self.J, self.m, self.phi_mode)

    def phi_subgrad_agent(self, i: int, x: np.ndarray) -> np.ndarray:
        return subgrad_phi_agent(self.blocks[i], x, self.J, self.m, self.phi_mode)


def _nonneg_violation(x: np.ndarray, J: np.ndarray) -> float:
    if J.size == 0:
        return 0.0
    return float(np.maximum(-x[J], 0.0).sum())


def eval_phi_agent(
    block: AgentBlock,
    x: np.ndarray,
    J: np.ndarray,
    m: int,
    mode: str = "hinge",
) -> float:
    """Agent-level infeasibility: equality residual energy, penalized
    inequality, and this agent's 1/m share of the nonnegativity violation."""
    val = 0.0
    if block.A is not None:
        res = block.A @ x - block.b
        val += 0.5 * float(res @ res)
    hval = float(block.h(x)[0])
    hplus = max(hval, 0.0)
    val += hplus if mode == "hinge" else 0.5 * hplus * hplus
    val += _nonneg_violation(x, J) / m
    return val


def subgrad_phi_agent(
    block: AgentBlock,
    x: np.ndarray,
    J: np.ndarray,
    m: int,
    mode: str = "hinge",
) -> np.ndarray:
    """A subgradient of ``eval_phi_agent`` at x.

    The inequality term contributes ``1{h > 0} * s`` (hinge mode) or
    ``max(h, 0) * s`` (product mode) with ``s`` the oracle's subgradient of
    h; at the kink ``h = 0`` both pick the zero vector.
    """
    g = np.zeros(x.shape[0])
    if block.A is not None:
        g += block.A.T @ (block.A @ x - block.b)
    hval, hsub = block.h(x)
    if hval > 0.0:
        g += hsub if mode == "hinge" else hval * hsub
    if J.size:
        neg = J[x[J] < 0.0]
        g[neg] -= 1.0 / m
    return g


def eval_phi_total(problem: ProblemSpec, x: np.ndarray) -> float:
    """Sum of all agent infeasibilities; zero iff x satisfies every equality,
    every inequality, and every nonnegativity index."""
    total = 0.0
    for blk in problem.blocks:
        if blk.A is not None:
            res = blk.A @ x - blk.b
            total += 0.5 * float(res @ res)
        hplus = max(float(blk.h(x)[0]), 0.0)
        total += hplus if problem.phi_mode == "hinge" else 0.5 * hplus * hplus
    total += _nonneg_violation(x, problem.J)
    return total


@dataclass(frozen=True)
class BoundEstimates:
    """Sampled constants feeding the closed-form rate certificates.

    C bounds both ``sum_i ||subgrad phi_i||`` and ``m * max_i`` of the agent
    norms over the box, so each agent norm is at most C / m; C_f does the
    same for the objective subgradients. M bounds ||x|| over the box and M_f
    bounds |f(x)|. All are inflated sample maxima, not certified suprema.
    """

    C: float
    C_f: float
    M: float
    M_f: float

    def __post_init__(self) -> None:
        for name in ("C", "C_f", "M", "M_f"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and positive, got {v}")


def estimate_bounds(
    problem: ProblemSpec,
    samples: int = 256,
    seed: int = 0,
    safety: float = 1.25,
) -> BoundEstimates:
    """Estimate (C, C_f, M, M_f) by sampling the box.

    Uses ``samples`` uniform draws plus every box corner when n <= 12 (for
    the affine/quadratic oracles used here the relevant suprema sit on
    corners, so including them makes the estimate tight). Maxima are
    inflated by ``safety`` and floored at 1e-12 so downstream divisions are
    well defined. Deterministic for a fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = problem.box.sample(rng, samples)
    if problem.n <= 12:
        pts = np.vstack([pts, problem.box.corners()])

    m = problem.m
    sum_phi = 0.0       # max over x of sum_i ||subgrad phi_i||
    agent_phi = 0.0     # max over x, i of the single-agent norm
    sum_f = 0.0
    agent_f = 0.0
    m_x = 0.0
    m_f = 0.0
    for x in pts:
        phi_norms = [
            float(np.linalg.norm(subgrad_phi_agent(blk, x, problem.J, m, problem.phi_mode)))
            for blk in problem.blocks
        ]
        f_vals_grads = [blk.f(x) for blk in problem.blocks]
        f_norms = [float(np.linalg.norm(g)) for _, g in f_vals_grads]
        sum_phi = max(sum_phi, sum(phi_norms))
        agent_phi = max(agent_phi, max(phi_norms))
        sum_f = max(sum_f, sum(f_norms))
        agent_f = max(agent_f, max(f_norms))
        m_x = max(m_x, float(np.linalg.norm(x)))
        m_f = max(m_f, abs(sum(v for v, _ in f_vals_grads)))

    floor = 1e-12
    # the per-agent invariant ||subgrad phi_i|| <= C / m forces the
    # m * max_i form whenever one agent dominates the sum
    C = safety * max(sum_phi, m * agent_phi, floor)
    C_f = safety * max(sum_f, m * agent_f, floor)
    M = safety * max(m_x, floor)
    M_f = safety * max(m_f, floor)
    return BoundEstimates(C=C, C_f=C_f, M=M, M_f=M_f)
