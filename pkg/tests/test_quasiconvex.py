import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ssimopt.core import MatrixMap, dissim_T, identity
from ssimopt.quasiconvex import (
    Box,
    DifferenceL1Ball,
    FeasibilityProblem,
    L1Ball,
    QuadraticBall,
    bisection_solve,
    make_constraint,
    phi_alpha,
    project_intersection,
    project_l1_ball,
    solve_feasibility,
)
from ssimopt.report import SolverError

import oracles

# frozen from tests/oracles.py
L1BALL_N4_MIN = 0.3570481937542511


def test_phi_alpha_examples():
    I = identity((3,))
    y = np.array([1.0, -2.0, 0.5])
    x = np.array([0.5, 0.5, 0.0])
    # alpha = 0 reduces to the squared error
    assert phi_alpha(x, I, y, 0.0) == pytest.approx(np.sum((x - y) ** 2))
    # alpha = 1 leaves only the correlation term
    assert phi_alpha(x, I, y, 1.0) == pytest.approx(-2.0 * x @ y)
    assert phi_alpha(y, I, y, 0.5) == pytest.approx(-(y @ y))


@pytest.mark.parametrize("alpha", [-0.1, 2.5])
def test_phi_alpha_rejects_alpha(alpha):
    with pytest.raises(ValueError):
        phi_alpha(np.zeros(2), identity((2,)), np.ones(2), alpha)
    with pytest.raises(ValueError):
        FeasibilityProblem(alpha, identity((2,)), np.ones(2))


def test_phi_alpha_sign_matches_level():
    r = np.random.default_rng(12)
    for _ in range(1000):
        n = 5
        M = MatrixMap(r.standard_normal((n, n)))
        y = r.standard_normal(n)
        x = r.standard_normal(n)
        if M.apply(x) @ y < 0:
            x = -x
        alpha = float(r.uniform(0, 2))
        t = dissim_T(M.apply(x), y)
        if abs(t - alpha) < 1e-9:
            continue
        assert np.sign(phi_alpha(x, M, y, alpha)) == np.sign(t - alpha)


# ---------------------------------------------------------------- constraints


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12), st.floats(0, 10))
def test_project_l1_ball(v, radius):
    v = np.array(v)
    p = project_l1_ball(v, radius)
    assert np.abs(p).sum() <= radius + 1e-9
    if np.abs(v).sum() <= radius:
        np.testing.assert_array_equal(p, v)
    # optimality: no sampled ball point is closer
    r = np.random.default_rng(0)
    for _ in range(20):
        q = project_l1_ball(r.standard_normal(v.size) * 3, radius)
        assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-9


def test_constraint_projections(rng):
    v = rng.standard_normal(6) * 3
    b = Box(-1.0, 1.0)
    assert b.value(b.project(v)) <= 0
    A = rng.standard_normal((4, 6))
    q = QuadraticBall(A, 0.5)
    assert q.value(q.project(v)) <= 1e-9
    d = DifferenceL1Ball(0.7)
    assert d.value(d.project(v)) <= 1e-6
    w = project_intersection(v, [L1Ball(2.0), Box(-0.5, 0.5)])
    assert np.abs(w).sum() <= 2.0 + 1e-8 and np.all(np.abs(w) <= 0.5 + 1e-8)


def test_unsupported_descriptor():
    with pytest.raises(ValueError):
        make_constraint(("simplex", 1.0))
    with pytest.raises(ValueError):
        make_constraint(3.0)
    with pytest.raises(ValueError):
        L1Ball(-1.0)


# ---------------------------------------------------------------- feasibility


def test_feasibility_examples():
    y = np.array([0.6, -0.4, 0.3, -0.5])
    I = identity((4,))
    assert solve_feasibility(FeasibilityProblem(2.0, I, y))[0]
    # alpha = 0 asks for x = y, outside a ball smaller than ||y||_1
    assert not solve_feasibility(FeasibilityProblem(0.0, I, y, [("l1", 1.0)]))[0]
    ok, w = solve_feasibility(FeasibilityProblem(0.05, I, y, [("l1", 2.0)]))
    assert ok and dissim_T(w, y) <= 0.05 + 1e-7


def test_feasibility_against_l1ball_oracle():
    D, y, radius = oracles.l1ball_instance()
    M = MatrixMap(D)
    above = FeasibilityProblem(L1BALL_N4_MIN + 0.01, M, y, [("l1", radius)])
    below = FeasibilityProblem(L1BALL_N4_MIN - 0.01, M, y, [("l1", radius)])
    assert solve_feasibility(above)[0]
    assert not solve_feasibility(below)[0]


# ---------------------------------------------------------------- bisection


def test_bisection_iteration_count(rng):
    y = rng.standard_normal(16)
    res = bisection_solve(identity((16,)), y, eps=0.01)
    assert res.status == "ok"
    assert res.iterations == math.ceil(math.log2(2 / 0.01)) == 8
    assert res.value <= 0.01
    assert res.bracket[1] - res.bracket[0] <= 0.01


def test_bisection_loose_constraint_reaches_zero(rng):
    y = rng.standard_normal(8)
    y -= y.mean()
    res = bisection_solve(identity((8,)), y, constraints=[("l1", np.abs(y).sum() + 1.0)], eps=0.01)
    assert res.value <= 0.01


def test_bisection_l1ball_matches_oracle():
    D, y, radius = oracles.l1ball_instance()
    res = bisection_solve(D, y, constraints=[("l1", radius)], eps=1e-4)
    assert res.status == "ok"
    assert np.abs(res.solution).sum() <= radius + 1e-7
    assert abs(res.value - L1BALL_N4_MIN) <= 1e-4


def test_bisection_bracket_halves_and_upset(rng):
    y = rng.standard_normal(6)
    res = bisection_solve(identity((6,)), y, constraints=[("l1", 0.5)], eps=1e-3)
    lo, hi = 0.0, 2.0
    for alpha, ok in res.feasibility_trace:
        assert alpha == 0.5 * (lo + hi)
        lo, hi = (lo, alpha) if ok else (alpha, hi)
    assert (lo, hi) == res.bracket
    feas = sorted(a for a, ok in res.feasibility_trace if ok)
    infeas = sorted(a for a, ok in res.feasibility_trace if not ok)
    # feasible levels form an up-set
    if feas and infeas:
        assert max(infeas) < min(feas)
    assert res.value <= hi + 1e-7


def test_bisection_infeasible_at_one():
    y = np.array([1.0, -1.0, 2.0, -2.0])
    # x pinned to -y: T = 2, only alpha >= 2 is feasible
    res = bisection_solve(identity((4,)), y, equality=(np.eye(4), -y), eps=0.1)
    assert res.status == "infeasible_at_one"
    assert res.iterations == 1 and res.value is None


def test_bisection_errors(rng):
    with pytest.raises(ValueError):
        bisection_solve(identity((3,)), np.ones(3))
    with pytest.raises(ValueError):
        bisection_solve(identity((3,)), rng.standard_normal(3), eps=0.0)
    with pytest.raises(ValueError):
        bisection_solve(identity((3,)), rng.standard_normal(3), constraints=[("ball", 1.0)])


def test_bisection_trace_csv(tmp_path, rng):
    res = bisection_solve(identity((5,)), rng.standard_normal(5), eps=0.25)
    path = tmp_path / "trace.csv"
    res.write_trace(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,alpha,feasible"
    assert len(lines) == res.iterations + 1
    assert lines[1].startswith("1,1.0,")


def test_bisection_solver_error_wraps(monkeypatch, rng):
    import ssimopt.quasiconvex as q

    def boom(*a, **k):
        raise np.linalg.LinAlgError("singular")

    monkeypatch.setattr(q, "solve_feasibility", boom)
    with pytest.raises(SolverError):
        bisection_solve(identity((3,)), rng.standard_normal(3))
