import numpy as np
import pytest
from scipy.optimize import LinearConstraint, minimize

from airig import (
    build_instance,
    build_preset,
    generate_data,
    preset_config,
    reference_optimum,
    svm_objective,
)


def tiny_dataset(seed: int = 3, n_samples: int = 8, n_features: int = 2):
    return generate_data(n_samples, n_features, seed=seed)


def test_generate_data_shapes_and_labels():
    ds = generate_data(40, 5, seed=1)
    assert ds.features.shape == (40, 5)
    assert ds.labels.shape == (40,)
    assert set(np.unique(ds.labels)) <= {-1.0, 1.0}
    assert ds.n_samples == 40 and ds.n_features == 5


def test_generate_data_deterministic_and_seed_sensitive():
    a = generate_data(30, 4, seed=7)
    b = generate_data(30, 4, seed=7)
    c = generate_data(30, 4, seed=8)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.features, c.features)


def test_generate_data_separation_and_flips():
    # with no flips and wide separation the data is linearly separable,
    # so some (w, b) classifies everything correctly
    ds = generate_data(200, 3, seed=2, separation=6.0, flip_prob=0.0)
    # recover a separator by least squares on the labels
    X = np.hstack([ds.features, np.ones((200, 1))])
    coef, *_ = np.linalg.lstsq(X, ds.labels, rcond=None)
    assert np.all(ds.labels * (X @ coef) > 0)
    flipped = generate_data(2000, 3, seed=2, separation=6.0, flip_prob=0.3)
    frac = np.mean(flipped.labels != ds.labels[:0].tolist() + list(
        generate_data(2000, 3, seed=2, separation=6.0, flip_prob=0.0).labels))
    assert 0.2 < frac < 0.4


def test_build_instance_validation():
    ds = tiny_dataset()
    with pytest.raises(ValueError, match="h_form"):
        build_instance(ds, m=2, h_form="prod")
    with pytest.raises(ValueError, match="m <= n_samples"):
        build_instance(ds, m=9)
    with pytest.raises(ValueError, match="m <= n_samples"):
        build_instance(ds, m=0)


def test_dimensions_and_split():
    ds = tiny_dataset(n_samples=8, n_features=3)
    inst = build_instance(ds, m=3, lam=5.0)
    assert inst.dim == 3 + 1 + 8
    assert inst.problem.m == 3
    x = np.arange(inst.dim, dtype=float)
    w, b, z = inst.split(x)
    assert np.array_equal(w, [0.0, 1.0, 2.0])
    assert b == 3.0
    assert np.array_equal(z, np.arange(4.0, 12.0))


def test_block_sizes_differ_by_at_most_one():
    ds = tiny_dataset(n_samples=10, n_features=2)
    inst = build_instance(ds, m=4)
    sizes = [len(blk.h_spec["g0"]) for blk in inst.problem.blocks]
    assert sum(sizes) == 10
    assert max(sizes) - min(sizes) <= 1
    # z ownership covers every sample exactly once
    owned = sorted(
        i for blk in inst.problem.blocks for i in blk.f_spec["z_indices"]
    )
    assert owned == list(range(3, 13))


def test_agent_objectives_sum_to_primal():
    ds = tiny_dataset(n_samples=9, n_features=4)
    inst = build_instance(ds, m=4, lam=7.0)
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.normal(size=inst.dim)
        total = sum(blk.f(x)[0] for blk in inst.problem.blocks)
        assert total == pytest.approx(svm_objective(inst, x), abs=1e-12)
        assert inst.problem.f_value(x) == pytest.approx(
            svm_objective(inst, x), abs=1e-12)


def test_margin_rows_match_polyhedron():
    ds = tiny_dataset(n_samples=6, n_features=2)
    inst = build_instance(ds, m=2)
    U, v = ds.features, ds.labels
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.normal(size=inst.dim)
        w, b, z = inst.split(x)
        slack = 1.0 - v * (U @ w + b) - z  # <= 0 when the margin holds
        # agent h values are the blockwise max of those rows
        hs = [blk.h(x)[0] for blk in inst.problem.blocks]
        assert hs[0] == pytest.approx(np.max(slack[:3]), abs=1e-12)
        assert hs[1] == pytest.approx(np.max(slack[3:]), abs=1e-12)
        # and the first N polyhedron rows encode exactly the same inequalities
        assert np.allclose(inst.poly.C[:6] @ x - inst.poly.d[:6], slack, atol=1e-12)


def test_phi_zero_iff_feasible():
    ds = tiny_dataset(n_samples=6, n_features=2)
    inst = build_instance(ds, m=3)
    x_good = np.zeros(inst.dim)
    x_good[inst.n_features + 1:] = 2.0  # z = 2 > 1 covers every margin at w=0,b=0
    assert inst.problem.phi_value(x_good) == 0.0
    assert inst.poly.contains(x_good, tol=0.0)
    x_bad = np.zeros(inst.dim)  # z = 0 violates the margins
    assert inst.problem.phi_value(x_bad) > 0.0
    assert not inst.poly.contains(x_bad, tol=1e-9)


def test_hinge_sum_form():
    ds = tiny_dataset(n_samples=6, n_features=2)
    inst = build_instance(ds, m=2, h_form="sum")
    U, v = ds.features, ds.labels
    x = np.random.default_rng(2).normal(size=inst.dim)
    w, b, z = inst.split(x)
    slack = 1.0 - v * (U @ w + b) - z
    h0 = inst.problem.blocks[0].h(x)[0]
    assert h0 == pytest.approx(np.maximum(slack[:3], 0.0).sum(), abs=1e-12)


def test_box_radius_default_and_override():
    ds = tiny_dataset(n_samples=5, n_features=3)
    inst = build_instance(ds, m=2)
    expected = 10.0 * (1.0 + np.max(np.linalg.norm(ds.features, axis=1)))
    assert inst.problem.box.upper[0] == pytest.approx(expected)
    assert np.all(inst.problem.box.lower == -inst.problem.box.upper)
    custom = build_instance(ds, m=2, box_radius=42.0)
    assert np.all(custom.problem.box.upper == 42.0)


def test_feasible_with_box_appends_rows():
    ds = tiny_dataset(n_samples=5, n_features=2)
    inst = build_instance(ds, m=2)
    big = inst.feasible_with_box()
    assert big.n_ineq == inst.poly.n_ineq + 2 * inst.dim
    x = np.zeros(inst.dim)
    x[inst.n_features + 1:] = 2.0
    assert big.contains(x, tol=1e-9)


def test_reference_optimum_against_general_solver():
    ds = tiny_dataset(seed=5, n_samples=6, n_features=2)
    inst = build_instance(ds, m=2, lam=4.0)
    x_star, f_star, sol = reference_optimum(inst, tol=1e-10)
    assert sol.kkt_residual <= 1e-9
    assert inst.poly.contains(x_star, tol=1e-7)
    # independent route: scipy's SLSQP on the same QP
    cons = LinearConstraint(inst.poly.C, -np.inf, inst.poly.d)
    res = minimize(
        lambda x: svm_objective(inst, x),
        np.zeros(inst.dim),
        jac=lambda x: np.concatenate(
            [x[: inst.n_features], [0.0], np.full(inst.n_samples, 1.0 / inst.lam)]
        ),
        constraints=[cons],
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-12},
    )
    assert res.success
    assert f_star == pytest.approx(res.fun, abs=1e-6)


def test_preset_config_frozen_contract():
    cfg = preset_config("paper-fig1")
    assert cfg["n_samples"] == 100 and cfg["n_features"] == 50
    assert cfg["agents"] == 20 and cfg["lam"] == 10.0
    assert cfg["gamma0"] == 1.0 and cfg["eta0"] == 1.0
    assert cfg["b"] == 0.25 and cfg["r"] == 0.0
    assert cfg["grid"] == {"n_samples": [100, 200, 500], "n_features": [50, 100]}
    with pytest.raises(KeyError):
        preset_config("paper-fig2")


def test_build_preset_overrides():
    inst, params, cfg = build_preset("paper-fig1", n_samples=20, n_features=4)
    assert inst.n_samples == 20 and inst.n_features == 4
    assert inst.dim == 4 + 1 + 20
    assert params.b == 0.25 and params.r == 0.0
    assert cfg["n_samples"] == 20
    with pytest.raises(KeyError, match="unknown preset overrides"):
        build_preset("paper-fig1", samples=20)


def test_build_preset_deterministic():
    a, _, _ = build_preset("paper-fig1", n_samples=15, n_features=3, agents=5)
    b, _, _ = build_preset("paper-fig1", n_samples=15, n_features=3, agents=5)
    assert np.array_equal(a.dataset.features, b.dataset.features)
