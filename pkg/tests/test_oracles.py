import numpy as np
import pytest

from airig.oracles import ORACLE_FAMILIES, build_oracle


def fd_gradient(fun, x, eps=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        up = x.copy(); up[i] += eps
        dn = x.copy(); dn[i] -= eps
        g[i] = (fun(up)[0] - fun(dn)[0]) / (2 * eps)
    return g


def test_registry_rejects_unknown():
    with pytest.raises(KeyError, match="unknown oracle family"):
        build_oracle({"family": "nope"})
    assert {"affine", "quadratic", "hinge-max", "hinge-sum", "svm-local"} <= set(
        ORACLE_FAMILIES
    )


def test_affine():
    f = build_oracle({"family": "affine", "c": [2.0, -1.0], "c0": 3.0})
    x = np.array([1.0, 4.0])
    val, g = f(x)
    assert val == pytest.approx(2.0 - 4.0 + 3.0)
    assert np.allclose(g, [2.0, -1.0])


def test_quadratic_matches_finite_differences():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(3, 3))
    Q = B @ B.T
    spec = {"family": "quadratic", "Q": Q.tolist(), "c": [1.0, 0.0, -2.0], "c0": 0.5}
    f = build_oracle(spec)
    for _ in range(5):
        x = rng.normal(size=3)
        val, g = f(x)
        assert val == pytest.approx(0.5 * x @ Q @ x + np.dot([1, 0, -2], x) + 0.5)
        assert np.allclose(g, fd_gradient(f, x), atol=1e-5)


def test_hinge_max():
    spec = {"family": "hinge-max", "G": [[1.0, 0.0], [0.0, 1.0]], "g0": [0.0, -1.0]}
    h = build_oracle(spec)
    val, g = h(np.array([2.0, 5.0]))
    assert val == pytest.approx(4.0)
    assert np.allclose(g, [0.0, 1.0])
    # tie goes to the lowest row index
    val, g = h(np.array([1.0, 2.0]))
    assert val == pytest.approx(1.0)
    assert np.allclose(g, [1.0, 0.0])


def test_hinge_sum():
    spec = {"family": "hinge-sum", "G": [[1.0, 0.0], [0.0, 1.0]], "g0": [0.0, 0.0]}
    h = build_oracle(spec)
    val, g = h(np.array([2.0, -3.0]))
    assert val == pytest.approx(2.0)
    assert np.allclose(g, [1.0, 0.0])
    val, g = h(np.array([2.0, 3.0]))
    assert val == pytest.approx(5.0)
    assert np.allclose(g, [1.0, 1.0])
    val, g = h(np.array([-1.0, -1.0]))
    assert val == 0.0
    assert np.allclose(g, [0.0, 0.0])


def test_hinge_shape_validation():
    with pytest.raises(ValueError):
        build_oracle({"family": "hinge-max", "G": [[1.0]], "g0": [0.0, 1.0]})
    with pytest.raises(ValueError):
        build_oracle({"family": "hinge-sum", "G": [[1.0]], "g0": [0.0, 1.0]})


def test_svm_local():
    # x = (w0, w1, b, z0, z1): value 0.5*0.4*||w||^2 + 0.1*(z0+z1)
    spec = {
        "family": "svm-local", "n_features": 2, "z_indices": [3, 4],
        "w_coeff": 0.4, "z_coeff": 0.1,
    }
    f = build_oracle(spec)
    x = np.array([1.0, 2.0, 9.0, 3.0, 4.0])
    val, g = f(x)
    assert val == pytest.approx(0.5 * 0.4 * 5.0 + 0.1 * 7.0)
    assert np.allclose(g, [0.4, 0.8, 0.0, 0.1, 0.1])
    assert np.allclose(g, fd_gradient(f, x), atol=1e-5)


def test_subgradient_inequality_for_nonsmooth_families():
    # h(y) >= h(x) + g.(y - x) must hold for max and sum-of-hinge forms
    rng = np.random.default_rng(4)
    G = rng.normal(size=(4, 3))
    g0 = rng.normal(size=4)
    for family in ("hinge-max", "hinge-sum"):
        h = build_oracle({"family": family, "G": G.tolist(), "g0": g0.tolist()})
        for _ in range(30):
            x = rng.normal(size=3)
            y = rng.normal(size=3)
            vx, gx = h(x)
            vy, _ = h(y)
            assert vy >= vx + gx @ (y - x) - 1e-9
