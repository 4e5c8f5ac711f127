"""Registered oracle families.

An oracle spec is a JSON-shaped dict with a ``"family"`` key naming a
registered builder plus family-specific parameters (all 0-based indices,
matrices as nested lists). ``build_oracle`` turns a spec into a callable
``x -> (value, subgradient)``. Keeping construction data-driven is what lets
problem files round-trip through JSON.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .problem import Oracle

__all__ = ["build_oracle", "register_family", "affine_oracle", "ORACLE_FAMILIES"]

ORACLE_FAMILIES: dict[str, Callable[[dict], Oracle]] = {}


def register_family(name: str):
    def deco(builder: Callable[[dict], Oracle]):
        ORACLE_FAMILIES[name] = builder
        return builder
    return deco


def build_oracle(spec: dict) -> Oracle:
    """Instantiate the oracle described by ``spec``; raises KeyError with the
    list of known families when the name is not registered."""
    family = spec.get("family")
    if family not in ORACLE_FAMILIES:
        raise KeyError(
            f"unknown oracle family {family!r}; known: {sorted(ORACLE_FAMILIES)}"
        )
    return ORACLE_FAMILIES[family](spec)


@register_family("affine")
def affine_oracle(spec: dict) -> Oracle:
    """f(x) = c.x + c0; subgradient is the constant c."""
    c = np.asarray(spec["c"], dtype=float)
    c0 = float(spec.get("c0", 0.0))

    def oracle(x: np.ndarray) -> tuple[float, np.ndarray]:
        return float(c @ x) + c0, c

    return oracle


@register_family("quadratic")
def quadratic_oracle(spec: dict) -> Oracle:
    """f(x) = 0.5 x.Q x + c.x + c0 with symmetric PSD Q."""
    Q = np.atleast_2d(np.asarray(spec["Q"], dtype=float))
    c = np.asarray(spec["c"], dtype=float)
    c0 = float(spec.get("c0", 0.0))

    def oracle(x: np.ndarray) -> tuple[float, np.ndarray]:
        Qx = Q @ x
        return 0.5 * float(x @ Qx) + float(c @ x) + c0, Qx + c

    return oracle


@register_family("hinge-max")
def hinge_max_oracle(spec: dict) -> Oracle:
    """h(x) = max_r (G x + g0)_r, the max-affine form; the subgradient is the
    row achieving the max (lowest index on ties)."""
    G = np.atleast_2d(np.asarray(spec["G"], dtype=float))
    g0 = np.asarray(spec["g0"], dtype=float).ravel()
    if G.shape[0] != g0.shape[0]:
        raise ValueError("G rows and g0 length disagree")

    def oracle(x: np.ndarray) -> tuple[float, np.ndarray]:
        vals = G @ x + g0
        r = int(np.argmax(vals))
        return float(vals[r]), G[r]

    return oracle


@register_family("hinge-sum")
def hinge_sum_oracle(spec: dict) -> Oracle:
    """h(x) = sum_r max((G x + g0)_r, 0), sum of row hinges."""
    G = np.atleast_2d(np.asarray(spec["G"], dtype=float))
    g0 = np.asarray(spec["g0"], dtype=float).ravel()
    if G.shape[0] != g0.shape[0]:
        raise ValueError("G rows and g0 length disagree")

    def oracle(x: np.ndarray) -> tuple[float, np.ndarray]:
        vals = G @ x + g0
        active = vals > 0.0
        val = float(vals[active].sum())
        g = G[active].sum(axis=0) if np.any(active) else np.zeros(x.shape[0])
        return val, g

    return oracle


@register_family("svm-local")
def svm_local_oracle(spec: dict) -> Oracle:
    """One agent's share of a soft-margin SVM objective over x = (w, b, z):
    f(x) = 0.5 * w_coeff * ||w||^2 + z_coeff * sum_{j in z_indices} x_j."""
    n_features = int(spec["n_features"])
    z_idx = np.asarray(spec["z_indices"], dtype=np.intp)
    w_coeff = float(spec["w_coeff"])
    z_coeff = float(spec["z_coeff"])

    def oracle(x: np.ndarray) -> tuple[float, np.ndarray]:
        w = x[:n_features]
        val = 0.5 * w_coeff * float(w @ w) + z_coeff * float(x[z_idx].sum())
        g = np.zeros(x.shape[0])
        g[:n_features] = w_coeff * w
        g[z_idx] += z_coeff
        return val, g

    return oracle
