"""Solver tests: region geometry, projection, gradients, optima vs oracle."""

import math

import numpy as np
import pytest

from vlcnoma.noma import (
    CumulativePower,
    LinkBudget,
    UserSet,
    noma_power_ordered,
    qos_satisfied,
    rate_vector,
)
from vlcnoma.optimizer import (
    InfeasibleError,
    SolverConfig,
    brute_force_oracle,
    build_feasible_region,
    check_feasibility,
    maximize_min_rate,
    maximize_sum_rate,
    project,
    softmin,
    softmin_gradient,
    sum_rate_gradient,
)

# rho = 20 with unit responsivity; with unit gains every m_k = 0.05
RHO20_DB = 10.0 * math.log10(20.0)


def budget20(eps=0.0):
    return LinkBudget(tsnr_db=RHO20_DB, responsivity=1.0,
                      residual_interference=eps)


def example_users():
    return UserSet(np.array([0.293, 0.359, 0.454]), np.ones(3))


def example_budget(eps=0.05):
    return LinkBudget(tsnr_db=70.0, responsivity=0.4,
                      residual_interference=eps)


def rates_feasible(budget, users, s_tail):
    s = CumulativePower(np.concatenate(([1.0], np.atleast_1d(s_tail))))
    return qos_satisfied(rate_vector(budget, users, s), users.qos_targets)


# ---------------------------------------------------------------------------
# feasible region


def test_two_user_region_interval():
    # m_1 = m_2 = 0.05, both targets 1 bit: the admissible s_2 interval
    # is [m_2, (1 - m_1)/2] = [0.05, 0.475]
    users = UserSet(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
    b = budget20()
    region = build_feasible_region(b, users)
    grid = np.linspace(0.0, 1.0, 1001)
    inside = np.array([region.contains(np.array([v])) for v in grid])
    by_rates = np.array([rates_feasible(b, users, v) for v in grid])
    np.testing.assert_array_equal(inside, by_rates)
    feas = grid[inside]
    assert feas.min() == pytest.approx(0.05, abs=1e-3)
    assert feas.max() == pytest.approx(0.475, abs=1e-3)


def test_linearized_rows_match_rate_feasibility_k3():
    rng = np.random.default_rng(5)
    users = example_users()
    b = example_budget()
    region = build_feasible_region(b, users)
    for _ in range(500):
        x = np.sort(rng.random(2))[::-1]
        lin = region.contains(x, tol=1e-12)
        by_rates = rates_feasible(b, users, x)
        if lin != by_rates:
            # disagreement allowed only within float hair of a boundary
            dist = np.max(region.G @ x - region.h)
            assert abs(dist) < 1e-9
        else:
            assert lin == by_rates


def test_region_shape_and_labels():
    users = example_users()
    region = build_feasible_region(example_budget(), users)
    assert region.dim == 2
    assert len(region.labels) == 6
    assert region.labels[:3] == ("qos_1", "qos_2", "qos_3")
    for row in region.G:
        assert np.linalg.norm(row) == pytest.approx(1.0, rel=1e-12)


def test_witness_chain_is_feasible():
    users = example_users()
    b = example_budget()
    ok, witness, stage = check_feasibility(b, users)
    assert ok and stage == 0
    assert qos_satisfied(rate_vector(b, users, witness), users.qos_targets)
    region = build_feasible_region(b, users)
    assert region.contains(witness.s[1:])


def test_infeasible_targets_report_failing_user():
    users = UserSet(np.array([1.0, 1.0]), np.array([0.0, 30.0]))
    b = budget20()
    ok, witness, stage = check_feasibility(b, users)
    assert not ok and witness is None and stage == 2
    with pytest.raises(InfeasibleError) as err:
        maximize_sum_rate(b, users)
    assert err.value.stage == 2
    with pytest.raises(InfeasibleError):
        maximize_min_rate(b, users)


def test_infeasible_chain_collapse_mid_way():
    # an enormous weak-user demand closes the chain before the last user
    users = UserSet(np.array([1.0, 1.0, 1.0]), np.array([20.0, 0.0, 0.0]))
    ok, _w, stage = check_feasibility(budget20(), users)
    assert not ok and stage == 1


# ---------------------------------------------------------------------------
# projection


def slab_region():
    # zero targets reduce the polytope to the monotone slab
    users = UserSet(np.array([1.0, 1.0, 1.0]), np.zeros(3))
    return build_feasible_region(budget20(), users)


def test_projection_clips_to_slab():
    region = slab_region()
    np.testing.assert_allclose(project(region, np.array([1.2, 0.5])),
                               [1.0, 0.5], atol=1e-9)
    np.testing.assert_allclose(project(region, np.array([0.3, 0.8])),
                               [0.55, 0.55], atol=1e-9)
    np.testing.assert_allclose(project(region, np.array([-0.2, -0.4])),
                               [0.0, 0.0], atol=1e-9)
    interior = np.array([0.6, 0.2])
    np.testing.assert_allclose(project(region, interior), interior, atol=1e-12)


def test_projection_interval_endpoints():
    users = UserSet(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
    region = build_feasible_region(budget20(), users)
    assert project(region, np.array([1.2]))[0] == pytest.approx(0.475, abs=1e-9)
    assert project(region, np.array([-0.5]))[0] == pytest.approx(0.05, abs=1e-9)


def test_projection_idempotent_feasible_and_variational():
    rng = np.random.default_rng(71)
    users = example_users()
    region = build_feasible_region(example_budget(), users)
    feas_pool = [np.asarray(region.witness_x)]
    for _ in range(200):
        p = rng.uniform(-0.5, 1.5, size=2)
        y = project(region, p)
        assert region.contains(y, tol=1e-8)
        np.testing.assert_allclose(project(region, y), y, atol=1e-8)
        # variational inequality: the residual points away from the set
        for z in feas_pool:
            assert float(np.dot(p - y, z - y)) <= 1e-8
        feas_pool.append(y)
        if len(feas_pool) > 12:
            feas_pool.pop(0)


def test_projection_matches_reference_qp_solver():
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(13)
    users = example_users()
    region = build_feasible_region(example_budget(), users)
    G, h = region.G, region.h
    for _ in range(20):
        p = rng.uniform(-0.5, 1.5, size=2)
        y = project(region, p)
        ref = scipy_opt.minimize(
            lambda x: float(np.sum((x - p) ** 2)),
            x0=np.asarray(region.witness_x),
            jac=lambda x: 2.0 * (x - p),
            constraints=[{"type": "ineq", "fun": lambda x: h - G @ x}],
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 200},
        )
        assert ref.success
        assert np.linalg.norm(y - p) <= np.linalg.norm(ref.x - p) + 1e-7


def test_projection_validates_input():
    region = slab_region()
    with pytest.raises(ValueError):
        project(region, np.array([0.5]))
    users = UserSet(np.array([1.0, 1.0]), np.array([0.0, 30.0]))
    empty = build_feasible_region(budget20(), users)
    with pytest.raises(InfeasibleError):
        project(empty, np.array([0.5]))


# ---------------------------------------------------------------------------
# gradients


def interior_tail(rng, k):
    x = np.sort(rng.uniform(0.05, 0.95, size=k - 1))[::-1]
    # keep slab margins so finite differences stay one-sided safe
    return x


def sum_rate_at(budget, users, tail):
    s = np.concatenate(([1.0], tail))
    m = np.array([budget.residual_interference + 1.0 / (budget.rho * g * g)
                  for g in users.gains])
    s_next = np.append(s[1:], 0.0)
    eps = budget.residual_interference
    return float(np.sum(np.log2(((1 - eps) * s + m) / (s_next - eps * s + m))))


def softmin_rate_at(budget, users, tail, beta):
    s = CumulativePower(np.concatenate(([1.0], tail)))
    return softmin(rate_vector(budget, users, s), beta)


def test_sum_rate_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    for k in (2, 3, 4):
        gains = np.sort(rng.random(k) * 0.3 + 0.2)
        users = UserSet(gains, np.zeros(k))
        b = LinkBudget(tsnr_db=66.0, responsivity=0.4,
                       residual_interference=0.04)
        for _ in range(30):
            tail = interior_tail(rng, k)
            g = sum_rate_gradient(b, users, np.concatenate(([1.0], tail)))
            for j in range(k - 1):
                e = np.zeros(k - 1)
                e[j] = 1e-6
                fd = (sum_rate_at(b, users, tail + e)
                      - sum_rate_at(b, users, tail - e)) / 2e-6
                assert g[j] == pytest.approx(fd, rel=2e-5, abs=1e-7)


def test_softmin_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    beta = 50.0
    for k in (2, 3):
        gains = np.sort(rng.random(k) * 0.3 + 0.2)
        users = UserSet(gains, np.zeros(k))
        b = LinkBudget(tsnr_db=70.0, responsivity=0.4,
                       residual_interference=0.06)
        for _ in range(30):
            tail = interior_tail(rng, k)
            g = softmin_gradient(b, users, np.concatenate(([1.0], tail)), beta)
            for j in range(k - 1):
                e = np.zeros(k - 1)
                e[j] = 1e-6
                fd = (softmin_rate_at(b, users, tail + e, beta)
                      - softmin_rate_at(b, users, tail - e, beta)) / 2e-6
                assert g[j] == pytest.approx(fd, rel=2e-5, abs=1e-7)


def test_gradient_input_validation():
    users = example_users()
    b = example_budget()
    with pytest.raises(ValueError):
        sum_rate_gradient(b, users, np.array([0.9, 0.5, 0.2]))
    with pytest.raises(ValueError):
        sum_rate_gradient(b, users, np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        softmin_gradient(b, users, np.array([1.0, 0.5, 0.2]), 0.0)


def test_ideal_cancellation_equal_gains_sum_rate_is_constant():
    # eps = 0 with equal m telescopes the sum: log2((1+m)/m) everywhere,
    # so the gradient vanishes identically
    users = UserSet(np.array([1.0, 1.0, 1.0]), np.full(3, 0.5))
    b = budget20()
    rng = np.random.default_rng(17)
    expect = math.log2(1.05 / 0.05)
    for _ in range(20):
        tail = interior_tail(rng, 3)
        g = sum_rate_gradient(b, users, np.concatenate(([1.0], tail)))
        np.testing.assert_allclose(g, 0.0, atol=1e-12)
    res = maximize_sum_rate(b, users)
    assert res.objective == pytest.approx(expect, rel=1e-9)


def test_softmin_bounds():
    v = np.array([1.0, 1.3, 2.0])
    for beta in (10.0, 100.0, 1250.0):
        sm = softmin(v, beta)
        assert sm <= 1.0 + 1e-12
        assert sm >= 1.0 - math.log(3.0) / beta - 1e-12
    with pytest.raises(ValueError):
        softmin(v, 0.0)


# ---------------------------------------------------------------------------
# solvers vs closed forms and the grid oracle


def test_two_user_sum_rate_closed_form():
    # distinct gains, ideal cancellation: the sum rate increases in s_2,
    # so the optimum sits at the weak user's QoS bound s_2 = 0.475 with
    # value 1 + log2(0.4875/0.0125) = 6.285402
    users = UserSet(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    b = budget20()
    res = maximize_sum_rate(b, users)
    assert res.cumulative.s[1] == pytest.approx(0.475, abs=1e-7)
    assert res.objective == pytest.approx(6.285402, rel=1e-6)
    oracle = brute_force_oracle(b, users, objective="sum", grid_step=0.005)
    assert oracle.objective == pytest.approx(6.285402, rel=1e-6)


def test_two_user_max_min_equalizes():
    # balancing log2(1.05/(s+0.05)) = log2((s+0.0125)/0.0125) gives
    # s = 0.0848386 and a common rate of 2.961053
    users = UserSet(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    b = budget20()
    res = maximize_min_rate(b, users)
    # the smooth-minimum maximizer sits O(1/beta) from the exact crossing
    assert res.cumulative.s[1] == pytest.approx(0.0848386, abs=3e-5)
    assert res.rates[0] == pytest.approx(res.rates[1], abs=1e-3)
    assert res.objective == pytest.approx(2.961053, abs=2e-4)


def test_example_triple_equal_targets_equalize():
    res = maximize_min_rate(example_budget(), example_users())
    assert qos_satisfied(res.rates, example_users().qos_targets)
    assert np.max(res.rates) - np.min(res.rates) < 1e-3
    assert res.objective == pytest.approx(1.577, abs=2e-3)
    assert noma_power_ordered(res.allocation, tol=1e-6)


def test_example_triple_unequal_targets():
    users = UserSet(np.array([0.293, 0.359, 0.454]), np.array([2.0, 1.0, 1.0]))
    res = maximize_min_rate(example_budget(), users)
    assert qos_satisfied(res.rates, users.qos_targets, tol=1e-6)
    # weak-user demand binds; the other two equalize above target
    assert res.rates[0] == pytest.approx(2.0, abs=1e-3)
    assert res.rates[1] == pytest.approx(res.rates[2], abs=1e-3)
    assert res.rates[1] == pytest.approx(1.372, abs=2e-3)
    assert noma_power_ordered(res.allocation, tol=1e-6)


def test_solvers_dominate_grid_oracle_on_random_instances():
    rng = np.random.default_rng(29)
    for k in (2, 3):
        for _ in range(8):
            gains = np.sort(rng.random(k) * 0.25 + 0.25)
            targets = np.full(k, float(rng.uniform(0.3, 0.9)))
            users = UserSet(gains, targets)
            b = LinkBudget(tsnr_db=float(rng.uniform(65.0, 85.0)),
                           responsivity=0.4,
                           residual_interference=float(rng.uniform(0.0, 0.1)))
            sum_res = maximize_sum_rate(b, users)
            min_res = maximize_min_rate(b, users)
            sum_o = brute_force_oracle(b, users, "sum", grid_step=0.01)
            min_o = brute_force_oracle(b, users, "min", grid_step=0.01)
            assert sum_res.objective >= sum_o.objective - 1e-9
            assert min_res.objective >= min_o.objective - 2e-3
            assert qos_satisfied(sum_res.rates, targets, tol=1e-6)
            assert qos_satisfied(min_res.rates, targets, tol=1e-6)


def test_oracle_refinement_is_monotone():
    users = example_users()
    b = example_budget()
    coarse = brute_force_oracle(b, users, "sum", grid_step=0.01)
    fine = brute_force_oracle(b, users, "sum", grid_step=0.005)
    assert fine.objective >= coarse.objective - 1e-12
    coarse_min = brute_force_oracle(b, users, "min", grid_step=0.01)
    fine_min = brute_force_oracle(b, users, "min", grid_step=0.005)
    assert fine_min.objective >= coarse_min.objective - 1e-12


def test_oracle_validation_and_tie_breaking():
    users = UserSet(np.array([1.0, 1.0]), np.zeros(2))
    b = budget20()
    with pytest.raises(ValueError):
        brute_force_oracle(b, users, objective="max")
    with pytest.raises(ValueError):
        brute_force_oracle(b, users, grid_step=0.003)
    five = UserSet(np.ones(5), np.zeros(5))
    with pytest.raises(ValueError):
        brute_force_oracle(b, five, grid_step=0.01)
    # equal m with ideal cancellation telescopes: log2(1.05/0.05) everywhere
    res = brute_force_oracle(b, users, objective="sum", grid_step=0.005)
    assert res.objective == pytest.approx(math.log2(21.0), rel=1e-12)
    assert res.iterations == 201  # every grid point is feasible at zero targets


def test_oracle_infeasible_raises_stage_zero():
    users = UserSet(np.array([1.0, 1.0]), np.array([0.0, 30.0]))
    with pytest.raises(InfeasibleError) as err:
        brute_force_oracle(budget20(), users, "sum", grid_step=0.01)
    assert err.value.stage == 0


def test_single_user_solves():
    users = UserSet(np.array([0.454]), np.array([1.0]))
    b = example_budget()
    res = maximize_sum_rate(b, users)
    expect = math.log2(1.0 + b.rho * 0.454**2)
    assert res.objective == pytest.approx(expect, rel=1e-12)
    assert res.converged and res.iterations == 0
    hopeless = UserSet(np.array([0.454]), np.array([expect + 1.0]))
    with pytest.raises(InfeasibleError) as err:
        maximize_min_rate(b, hopeless)
    assert err.value.stage == 1


def test_solver_determinism():
    users = example_users()
    b = example_budget()
    a = maximize_sum_rate(b, users)
    bb = maximize_sum_rate(b, users)
    np.testing.assert_array_equal(a.cumulative.s, bb.cumulative.s)
    assert a.objective == bb.objective and a.iterations == bb.iterations
    c = maximize_min_rate(b, users)
    d = maximize_min_rate(b, users)
    np.testing.assert_array_equal(c.cumulative.s, d.cumulative.s)
    o1 = brute_force_oracle(b, users, "min", grid_step=0.01)
    o2 = brute_force_oracle(b, users, "min", grid_step=0.01)
    np.testing.assert_array_equal(o1.cumulative.s, o2.cumulative.s)


def test_sum_rate_trace_is_monotone_ascent():
    users = example_users()
    res = maximize_sum_rate(example_budget(), users, trace=True)
    assert res.trace is not None and len(res.trace) >= 1
    objs = [row[1] for row in res.trace]
    assert all(b2 >= a2 - 1e-12 for a2, b2 in zip(objs, objs[1:]))
    assert objs[-1] == pytest.approx(res.objective, abs=1e-12)


def test_max_min_trace_tracks_best_minimum():
    users = example_users()
    res = maximize_min_rate(example_budget(), users, trace=True)
    assert res.trace is not None and len(res.trace) >= 1
    best_seen = max(row[3] for row in res.trace)
    assert res.objective == pytest.approx(best_seen, abs=1e-12)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(backtracking_shrink=1.0)
    with pytest.raises(ValueError):
        SolverConfig(backtracking_accept=0.0)
    with pytest.raises(ValueError):
        SolverConfig(softmin_beta=-1.0)


def test_iteration_budget_respected():
    users = example_users()
    cfg = SolverConfig(max_iterations=5)
    res = maximize_min_rate(example_budget(), users, cfg)
    assert res.iterations <= 5
    res2 = maximize_sum_rate(example_budget(), users, cfg)
    assert res2.iterations <= 5
