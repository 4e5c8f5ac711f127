import numpy as np
import pytest

from airig import (
    AgentBlock,
    BoxSet,
    ProblemSpec,
    estimate_bounds,
    eval_phi_agent,
    eval_phi_total,
    project_box,
    subgrad_phi_agent,
)
from helpers import make_block, never_active_h, random_small_problem


def test_box_validation_and_ops():
    box = BoxSet([-1.0, 0.0], [1.0, 2.0])
    assert box.dim == 2
    assert np.array_equal(box.project([5.0, -3.0]), [1.0, 0.0])
    assert np.array_equal(project_box(box, np.array([0.5, 0.5])), [0.5, 0.5])
    assert box.contains(np.array([1.0, 2.0]))
    assert not box.contains(np.array([1.0001, 0.0]))
    corners = box.corners()
    assert corners.shape == (4, 2)
    with pytest.raises(ValueError):
        BoxSet([1.0], [0.0])
    with pytest.raises(ValueError):
        BoxSet([0.0], [np.inf])
    with pytest.raises(ValueError):
        BoxSet([[0.0]], [1.0])


def test_box_sampling_stays_inside():
    box = BoxSet([-2.0, 1.0, 0.0], [2.0, 1.5, 10.0])
    pts = box.sample(np.random.default_rng(0), 200)
    assert pts.shape == (200, 3)
    assert all(box.contains(p) for p in pts)


def test_agent_block_validation():
    f = {"family": "affine", "c": [1.0, 0.0]}
    with pytest.raises(ValueError, match="together"):
        make_block(f, never_active_h(2), A=np.eye(2))
    with pytest.raises(ValueError, match="rows"):
        make_block(f, never_active_h(2), A=np.eye(2), b=np.zeros(3))


def test_problem_validation():
    blk = make_block({"family": "affine", "c": [1.0, 1.0]}, never_active_h(2))
    box = BoxSet.cube(2, 1.0)
    with pytest.raises(ValueError, match="at least one"):
        ProblemSpec(n=2, blocks=(), box=box)
    with pytest.raises(ValueError, match="box dim"):
        ProblemSpec(n=3, blocks=(blk,), box=box)
    with pytest.raises(ValueError, match="J contains"):
        ProblemSpec(n=2, blocks=(blk,), box=box, J=[2])
    with pytest.raises(ValueError, match="phi_mode"):
        ProblemSpec(n=2, blocks=(blk,), box=box, phi_mode="huber")
    bad = make_block({"family": "affine", "c": [1.0]}, never_active_h(1),
                     A=np.ones((1, 1)), b=np.zeros(1))
    with pytest.raises(ValueError, match="cols"):
        ProblemSpec(n=2, blocks=(bad,), box=box)


def _hand_example():
    """Worked example, all numbers hand-derived.

    n=2, m=2, J={1}. Block: A=[[1, 0]], b=[2], h(x) = x0 + x1 - 1 (affine).
    At x = (3, -1):
      equality residual: 3 - 2 = 1        -> 0.5 * 1^2 = 0.5
      h = 3 - 1 - 1 = 1 > 0               -> hinge adds 1, product adds 0.5
      x_1 = -1 < 0, J share               -> 1/m = 0.5
    hinge phi_i = 2.0; product phi_i = 1.5.
    Subgradient: A'(Ax-b) = (1, 0); h part (1, 1) [hinge] or 1*(1,1)
    [product, h=1 so identical]; J part (0, -1/2).
    """
    blk = make_block(
        {"family": "affine", "c": [0.0, 0.0]},
        {"family": "affine", "c": [1.0, 1.0], "c0": -1.0},
        A=np.array([[1.0, 0.0]]), b=np.array([2.0]),
    )
    return blk, np.array([3.0, -1.0]), np.array([1], dtype=np.intp)


def test_phi_agent_hand_value():
    blk, x, J = _hand_example()
    assert eval_phi_agent(blk, x, J, m=2, mode="hinge") == pytest.approx(2.0)
    assert eval_phi_agent(blk, x, J, m=2, mode="product") == pytest.approx(1.5)


def test_phi_subgrad_hand_value():
    blk, x, J = _hand_example()
    g_h = subgrad_phi_agent(blk, x, J, m=2, mode="hinge")
    assert np.allclose(g_h, [2.0, 0.5])
    # h = 1 makes the product-mode h term coincide with hinge here
    g_p = subgrad_phi_agent(blk, x, J, m=2, mode="product")
    assert np.allclose(g_p, [2.0, 0.5])
    # at a point with h = 3 the product term scales by h
    x2 = np.array([5.0, -1.0])
    g_p2 = subgrad_phi_agent(blk, x2, J, m=2, mode="product")
    # A'(Ax-b) = (3, 0); product h part 3*(1,1); J part (0, -0.5)
    assert np.allclose(g_p2, [6.0, 2.5])


def test_phi_mode_tie_break_zero_at_kink():
    # h(x) = x0 exactly zero at x0 = 0: both modes must pick the zero vector
    blk = make_block(
        {"family": "affine", "c": [0.0]},
        {"family": "affine", "c": [1.0], "c0": 0.0},
    )
    x = np.zeros(1)
    for mode in ("hinge", "product"):
        g = subgrad_phi_agent(blk, x, np.zeros(0, dtype=np.intp), m=1, mode=mode)
        assert np.array_equal(g, np.zeros(1)), mode


def test_phi_total_is_sum_of_agents():
    rng = np.random.default_rng(3)
    for _ in range(10):
        prob = random_small_problem(rng)
        x = prob.box.sample(rng, 1)[0]
        direct = sum(prob.phi_agent(i, x) for i in range(prob.m))
        assert eval_phi_total(prob, x) == pytest.approx(direct, abs=1e-12)


def test_phi_zero_iff_feasible():
    blk = make_block(
        {"family": "affine", "c": [0.0, 0.0]},
        {"family": "affine", "c": [1.0, 0.0], "c0": -1.0},  # h: x0 <= 1
        A=np.array([[0.0, 1.0]]), b=np.array([0.5]),        # x1 = 0.5
    )
    prob = ProblemSpec(n=2, blocks=(blk,), box=BoxSet.cube(2, 2.0), J=[0])
    assert eval_phi_total(prob, np.array([0.5, 0.5])) == 0.0
    assert eval_phi_total(prob, np.array([2.0, 0.5])) > 0.0   # h violated
    assert eval_phi_total(prob, np.array([0.5, 0.0])) > 0.0   # equality violated
    assert eval_phi_total(prob, np.array([-0.5, 0.5])) > 0.0  # J violated


def test_phi_subgrad_is_valid_subgradient():
    # convexity: phi(y) >= phi(x) + g.(y - x) for the reported g
    rng = np.random.default_rng(11)
    for _ in range(20):
        prob = random_small_problem(rng)
        x, y = prob.box.sample(rng, 2)
        for i in range(prob.m):
            g = prob.phi_subgrad_agent(i, x)
            lhs = prob.phi_agent(i, y)
            rhs = prob.phi_agent(i, x) + float(g @ (y - x))
            assert lhs >= rhs - 1e-9


def test_estimate_bounds_properties():
    rng = np.random.default_rng(5)
    prob = random_small_problem(rng)
    est = estimate_bounds(prob, samples=128, seed=1)
    assert est.C > 0 and est.C_f > 0 and est.M > 0 and est.M_f > 0
    # deterministic for a fixed seed
    est2 = estimate_bounds(prob, samples=128, seed=1)
    assert (est.C, est.C_f, est.M, est.M_f) == (est2.C, est2.C_f, est2.M, est2.M_f)
    # per-agent norms stay below C/m at fresh sample points (the m*max form
    # inside the estimator is what guarantees headroom)
    pts = prob.box.sample(np.random.default_rng(99), 64)
    for x in pts:
        for i in range(prob.m):
            assert np.linalg.norm(prob.phi_subgrad_agent(i, x)) <= est.C / prob.m * 1.0001
            assert np.linalg.norm(prob.blocks[i].f(x)[1]) <= est.C_f / prob.m * 1.0001
        assert np.linalg.norm(x) <= est.M
        assert abs(prob.f_value(x)) <= est.M_f


def test_estimate_bounds_covers_sampled_sums():
    rng = np.random.default_rng(6)
    prob = random_small_problem(rng)
    est = estimate_bounds(prob, samples=256, seed=2)
    pts = prob.box.sample(np.random.default_rng(123), 64)
    for x in pts:
        s_phi = sum(np.linalg.norm(prob.phi_subgrad_agent(i, x)) for i in range(prob.m))
        s_f = sum(np.linalg.norm(blk.f(x)[1]) for blk in prob.blocks)
        assert s_phi <= est.C * 1.0001
        assert s_f <= est.C_f * 1.0001


def test_estimate_bounds_floor_and_validation():
    # an all-zero objective still yields strictly positive constants
    blk = make_block({"family": "affine", "c": [0.0]}, never_active_h(1))
    prob = ProblemSpec(n=1, blocks=(blk,), box=BoxSet.cube(1, 1.0))
    est = estimate_bounds(prob, samples=8, seed=0)
    assert est.C_f >= 1e-12
    with pytest.raises(ValueError, match="samples"):
        estimate_bounds(prob, samples=0)
