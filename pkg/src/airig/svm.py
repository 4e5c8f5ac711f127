"""Distributed soft-margin SVM benchmark at desk scale.

The primal problem over x = (w, b, z) with N samples (u_i, v_i), v_i = +-1:

    min 0.5 ||w||^2 + (1/lam) sum_i z_i
    s.t. v_i (w.u_i + b) >= 1 - z_i   (margin rows)
         z_i >= 0,

split across m agents: agent j owns a contiguous block of samples (block
sizes differ by at most one when m does not divide N), carries

    f_j(x) = (n_j / N) * 0.5 ||w||^2 + (1/lam) * sum of its z's,

so the agent objectives sum exactly to the primal objective, and exposes its
block's margin constraints through h_j, either as one max-affine function
(default) or as a sum of hinges. The z >= 0 rows go into the shared
nonnegativity index list J; the box is [-R, R] on every coordinate with
R = 10 * (1 + max_i ||u_i||).

``instance.poly`` collects all N margin rows and N nonnegativity rows as one
polyhedron, which is what the projected baselines and the reference QP use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracles import build_oracle
from .problem import AgentBlock, BoxSet, ProblemSpec
from .qp import PolyhedralSet, QpSolution, solve_qp
from .schedules import ScheduleParams

__all__ = [
    "SvmDataset",
    "SvmInstance",
    "generate_data",
    "build_instance",
    "svm_objective",
    "reference_optimum",
    "preset_config",
    "build_preset",
    "PRESETS",
]


@dataclass(frozen=True)
class SvmDataset:
    """Feature matrix (one sample per row) and +-1 labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        U = np.atleast_2d(np.asarray(self.features, dtype=float))
        v = np.asarray(self.labels, dtype=float).ravel()
        if U.shape[0] != v.shape[0]:
            raise ValueError("features and labels disagree on sample count")
        if not np.all(np.isin(v, (-1.0, 1.0))):
            raise ValueError("labels must be +-1")
        object.__setattr__(self, "features", U)
        object.__setattr__(self, "labels", v)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SvmInstance:
    """A dataset lifted into the finite-sum model plus its feasible polyhedron."""

    problem: ProblemSpec
    poly: PolyhedralSet
    lam: float
    n_features: int
    n_samples: int
    dataset: SvmDataset | None = None

    @property
    def dim(self) -> int:
        return self.problem.n

    def split(self, x: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
        n = self.n_features
        return x[:n], float(x[n]), x[n + 1:]

    def feasible_with_box(self) -> PolyhedralSet:
        """The benchmark polyhedron with the box rows appended, so projected
        baselines stay inside the same feasible set the solver's clamp uses."""
        n = self.dim
        eye = np.eye(n)
        C = np.vstack([self.poly.C, eye, -eye])
        d = np.concatenate([self.poly.d, self.problem.box.upper, -self.problem.box.lower])
        return PolyhedralSet(C=C, d=d, dim=n)


def generate_data(
    n_samples: int,
    n_features: int,
    seed: int = 0,
    separation: float = 2.0,
    flip_prob: float = 0.05,
) -> SvmDataset:
    """Labeled Gaussian blobs around a random hyperplane.

    Points are pushed ``separation/2`` along the normal on their label's
    side, then a ``flip_prob`` fraction of labels is flipped so the soft
    margin actually pays for slack at the optimum.
    """
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n_features)
    w /= np.linalg.norm(w)
    U = rng.standard_normal((n_samples, n_features))
    margins = U @ w
    v = np.where(margins >= 0.0, 1.0, -1.0)
    U += np.outer(v * (separation / 2.0), w)
    flips = rng.random(n_samples) < flip_prob
    v[flips] *= -1.0
    return SvmDataset(features=U, labels=v)


def build_instance(
    dataset: SvmDataset,
    m: int = 20,
    lam: float = 10.0,
    h_form: str = "max",
    box_radius: float | None = None,
    phi_mode: str = "hinge",
) -> SvmInstance:
    """Lift a dataset into an m-agent instance over x = (w, b, z)."""
    if h_form not in ("max", "sum"):
        raise ValueError("h_form must be 'max' or 'sum'")
    if m < 1 or m > dataset.n_samples:
        raise ValueError("need 1 <= m <= n_samples")
    N, n = dataset.n_samples, dataset.n_features
    dim = n + 1 + N
    U, v = dataset.features, dataset.labels

    # margin row i: 1 - v_i (w.u_i + b) - z_i <= 0
    G_all = np.zeros((N, dim))
    G_all[:, :n] = -v[:, None] * U
    G_all[:, n] = -v
    G_all[np.arange(N), n + 1 + np.arange(N)] = -1.0
    g0_all = np.ones(N)

    blocks = []
    for idx in np.array_split(np.arange(N), m):
        n_j = idx.size
        f_spec = {
            "family": "svm-local",
            "n_features": n,
            "z_indices": (n + 1 + idx).tolist(),
            "w_coeff": n_j / N,
            "z_coeff": 1.0 / lam,
        }
        h_spec = {
            "family": "hinge-max" if h_form == "max" else "hinge-sum",
            "G": G_all[idx].tolist(),
            "g0": g0_all[idx].tolist(),
        }
        blocks.append(
            AgentBlock(
                f=build_oracle(f_spec), h=build_oracle(h_spec),
                f_spec=f_spec, h_spec=h_spec,
            )
        )

    R = box_radius if box_radius is not None else 10.0 * (1.0 + float(np.max(np.linalg.norm(U, axis=1))))
    box = BoxSet.cube(dim, R)
    problem = ProblemSpec(
        n=dim, blocks=tuple(blocks), box=box,
        J=np.arange(n + 1, dim), phi_mode=phi_mode,
    )

    # the full feasible polyhedron: N margin rows then N nonnegativity rows
    C = np.vstack([G_all, np.zeros((N, dim))])
    C[N + np.arange(N), n + 1 + np.arange(N)] = -1.0
    d = np.concatenate([-g0_all, np.zeros(N)])
    poly = PolyhedralSet(C=C, d=d, dim=dim)
    return SvmInstance(
        problem=problem, poly=poly, lam=lam,
        n_features=n, n_samples=N, dataset=dataset,
    )


def svm_objective(instance: SvmInstance, x: np.ndarray) -> float:
    """The primal objective 0.5||w||^2 + (1/lam) sum z at x = (w, b, z)."""
    w, _, z = instance.split(x)
    return 0.5 * float(w @ w) + float(z.sum()) / instance.lam


def reference_optimum(
    instance: SvmInstance, tol: float = 1e-8
) -> tuple[np.ndarray, float, QpSolution]:
    """Solve the primal QP directly for (x_star, f_star).

    The box is omitted from the QP (its radius is far outside any optimum);
    we assert that after the fact rather than pay for 2*dim extra rows.
    """
    dim = instance.dim
    Q = np.zeros((dim, dim))
    Q[: instance.n_features, : instance.n_features] = np.eye(instance.n_features)
    c = np.zeros(dim)
    c[instance.n_features + 1:] = 1.0 / instance.lam
    sol = solve_qp(Q, c, instance.poly, tol=tol)
    if not instance.problem.box.contains(sol.x, tol=1e-6):
        raise RuntimeError("reference optimum escaped the box; enlarge box_radius")
    return sol.x, svm_objective(instance, sol.x), sol


PRESETS = ("paper-fig1",)


def preset_config(name: str) -> dict:
    """Named benchmark configurations; values are plain config keys that the
    caller may override."""
    if name == "paper-fig1":
        return {
            "n_samples": 100,
            "n_features": 50,
            "agents": 20,
            "lam": 10.0,
            "gamma0": 1.0,
            "eta0": 1.0,
            "b": 0.25,
            "r": 0.0,
            "seed": 0,
            "separation": 2.0,
            "flip_prob": 0.05,
            "grid": {"n_samples": [100, 200, 500], "n_features": [50, 100]},
        }
    raise KeyError(f"unknown preset {name!r}; known: {PRESETS}")


def build_preset(
    name: str, **overrides
) -> tuple[SvmInstance, ScheduleParams, dict]:
    """Materialize a preset (with overrides applied) into an instance, its
    schedule parameters, and the resolved config."""
    cfg = preset_config(name)
    unknown = set(overrides) - set(cfg)
    if unknown:
        raise KeyError(f"unknown preset overrides: {sorted(unknown)}")
    cfg.update(overrides)
    ds = generate_data(
        cfg["n_samples"], cfg["n_features"], seed=cfg["seed"],
        separation=cfg["separation"], flip_prob=cfg["flip_prob"],
    )
    inst = build_instance(ds, m=cfg["agents"], lam=cfg["lam"])
    params = ScheduleParams(
        gamma0=cfg["gamma0"], eta0=cfg["eta0"], b=cfg["b"], r=cfg["r"]
    )
    return inst, params, cfg
