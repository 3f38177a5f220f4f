import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from coopclean.bounds import (
    BoundDomainError, BoundParams, closed_form_time, combined_frontier, default_delta_grid,
    deterministic_trajectory, growth_term, impossibility_probability, impossibility_threshold,
    lemma_floor_probability, minimal_s_hat, naive_trajectory, pointwise_max,
    recursive_bound_trajectory, step_probability,
)


# --- per-step probability ---

def test_zero_slack_is_vacuous():
    assert step_probability(500, 10, 0.3, 0.0) == 0.0


def test_step_probability_high_precision():
    mpmath.mp.dps = 40
    exact = 1 - mpmath.exp(-mpmath.mpf("0.09") * mpmath.mpf("0.5") * mpmath.sqrt(39699))
    got = step_probability(20000, 150, 0.5, 0.3)
    assert abs(got - float(exact)) < 1e-15
    assert round(got, 5) == 0.99987


def test_step_probability_grows_with_area():
    assert step_probability(10000, 150, 0.1, 0.1) < step_probability(20000, 150, 0.1, 0.1)


def test_step_probability_domain():
    with pytest.raises(BoundDomainError):
        step_probability(5, 5, 0.5, 0.3)


@settings(max_examples=200)
@given(st.integers(1, 10 ** 7), st.integers(0, 1000), st.floats(0, 1), st.floats(0, 0.999))
def test_step_probability_in_unit_interval(extra, k, p, delta):
    q = step_probability(k + extra, k, p, delta)
    assert 0.0 <= q <= 1.0 and not math.isnan(q)


# --- trajectories ---

def test_first_step_of_sphere_bound():
    curve = recursive_bound_trajectory(BoundParams(13, 0, 1.0, 0.0), 1)
    assert curve.s_lower == [13, 23]


def test_large_k_shrinks_strictly():
    curve = recursive_bound_trajectory(BoundParams(2000, 100, 0.2, 0.3), 50)
    assert all(b < a for a, b in zip(curve.s_lower, curve.s_lower[1:]))


def test_deterministic_d1_matches_full_spread_bound():
    for s0, k in [(13, 0), (500, 10), (20000, 150), (100, 30)]:
        det = deterministic_trajectory(s0, k, 1, 200)
        rec = recursive_bound_trajectory(BoundParams(s0, k, 1.0, 0.0), 200)
        assert [s for _, s in det] == rec.s_lower[:len(det)]
        assert len(det) == len(rec)


def test_deterministic_single_tile():
    assert deterministic_trajectory(1, 0, 1, 1) == [(0, 1), (1, 3)]


def test_naive_line():
    assert naive_trajectory(10, 3, 10) == [(0, 10), (1, 7), (2, 4), (3, 1), (4, 0)]


def test_small_slack_bound_below_deterministic_d3():
    rec = recursive_bound_trajectory(BoundParams(20000, 150, 1 / 3, 0.01), 400)
    det = dict(deterministic_trajectory(20000, 150, 3, 400))
    assert all(s <= det[t] for t, s in zip(rec.t, rec.s_lower) if t in det)


@settings(max_examples=60)
@given(st.integers(50, 50_000), st.integers(1, 200), st.floats(0.01, 1), st.floats(0.01, 0.99))
def test_cumulative_is_running_product(s0, k, p, delta):
    if s0 <= k:
        return
    curve = recursive_bound_trajectory(BoundParams(s0, k, p, delta), 300)
    prod = 1.0
    for qs, qc in zip(curve.q_step[1:], curve.q_cum[1:]):
        prod *= qs
        assert qc == pytest.approx(prod, rel=1e-12, abs=0)
    assert all(b <= a for a, b in zip(curve.q_cum, curve.q_cum[1:]))


def test_lemma_floor_below_product_on_grid():
    checked = 0
    for s0 in (2000, 8000, 20000):
        for k in (20, 50, 150):
            for p in (0.1, 0.3, 0.5):
                for delta in (0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.75, 0.9):
                    curve = recursive_bound_trajectory(BoundParams(s0, k, p, delta), 200)
                    T = len(curve) - 1
                    s_min = min(curve.s_lower)
                    if T < 1 or s_min - k < 1:
                        continue
                    assert lemma_floor_probability(s_min, k, p, delta, T) <= curve.q_cum[-1] * (1 + 1e-12)
                    checked += 1
    assert checked >= 100


def test_lemma_floor_single_step():
    assert lemma_floor_probability(900, 10, 0.2, 0.4, 1) == step_probability(900, 10, 0.2, 0.4)


# --- closed form ---

def test_time_is_zero_at_start():
    tau, q = closed_form_time(BoundParams(20000, 150, 0.5, 0.3, 20000))
    assert tau == 0.0 and q == 1.0


def test_time_decreases_in_target_and_slack():
    taus = [closed_form_time(BoundParams(20000, 150, 0.5, 0.3, s))[0]
            for s in range(1000, 20000, 500)]
    assert all(b < a for a, b in zip(taus, taus[1:]))
    by_delta = [closed_form_time(BoundParams(20000, 150, 0.5, d, 5000))[0]
                for d in (0.3, 0.5, 0.7, 0.9)]
    assert all(b < a for a, b in zip(by_delta, by_delta[1:]))


def test_growing_region_has_no_time_bound():
    with pytest.raises(BoundDomainError):
        closed_form_time(BoundParams(20000, 10, 0.5, 0.1, 15000))


def test_closed_form_matches_recursion_under_strong_cleaning():
    params = BoundParams(20000, 150, 0.1, 0.5, 5000)
    tau, _ = closed_form_time(params)
    t_rec = recursive_bound_trajectory(params, 10_000).first_passage(5000)
    assert abs(math.ceil(tau) - t_rec) <= max(2, 0.02 * t_rec)


def test_varpi():
    assert BoundParams(100, 1, 0.5, 0.5).varpi == pytest.approx(0.125)


def test_param_validation():
    for bad in [(10, 20, 0.5, 0.3), (100, 5, 0.0, 0.3), (100, 5, 0.5, 1.0), (100, 5, 1.2, 0.3)]:
        with pytest.raises(BoundDomainError):
            BoundParams(*bad)


# --- target search and frontier ---

def test_minimal_s_hat_is_minimal():
    for delta in (0.2, 0.4, 0.6, 0.8):
        s_hat = minimal_s_hat(20000, 50, 0.1, 0.95, delta)
        if s_hat is None:
            continue
        tau, q = closed_form_time(BoundParams(20000, 50, 0.1, delta, s_hat))
        assert lemma_floor_probability(s_hat, 50, 0.1, delta, max(1, math.ceil(tau))) >= 0.95
        if s_hat > 51:
            tau1, _ = closed_form_time(BoundParams(20000, 50, 0.1, delta, s_hat - 1))
            assert lemma_floor_probability(s_hat - 1, 50, 0.1, delta, max(1, math.ceil(tau1))) < 0.95


def test_tiny_target_guarantee_gives_smallest_target():
    tau, _ = closed_form_time(BoundParams(2000, 50, 0.1, 0.5, 51))
    floor = lemma_floor_probability(51, 50, 0.1, 0.5, math.ceil(tau))
    assert 0 < floor < 1e-60
    assert minimal_s_hat(2000, 50, 0.1, floor, 0.5) == 51
    assert minimal_s_hat(2000, 50, 0.1, floor * 2, 0.5) > 51


def test_minimal_s_hat_plateaus():
    values = [minimal_s_hat(20000, 50, 0.1, 0.95, d) for d in default_delta_grid(60)]
    feasible = [v for v in values if v is not None]
    assert values[0] is None  # too little slack: no solution
    assert feasible
    first = values.index(feasible[0])
    assert all(v is not None for v in values[first:])


def test_frontier_dominates_members_and_single_delta():
    deltas = [0.3, 0.5, 0.7]
    front = combined_frontier(20000, 50, 0.1, 0.95, deltas, 2000)
    members = 0
    for d in deltas:
        s_hat = minimal_s_hat(20000, 50, 0.1, 0.95, d)
        if s_hat is None:
            continue
        members += 1
        member = recursive_bound_trajectory(BoundParams(20000, 50, 0.1, d, s_hat), 2000)
        fmap = dict(zip(front.t, front.s_lower))
        assert all(fmap[t] >= s for t, s in zip(member.t, member.s_lower))
    assert members >= 2
    one = combined_frontier(20000, 50, 0.1, 0.95, [0.5], 2000)
    s_hat = minimal_s_hat(20000, 50, 0.1, 0.95, 0.5)
    member = recursive_bound_trajectory(BoundParams(20000, 50, 0.1, 0.5, s_hat), 2000)
    assert one.t == member.t and one.s_lower == member.s_lower
    assert one.guarantee == 0.95


def test_frontier_all_infeasible():
    with pytest.raises(BoundDomainError):
        combined_frontier(20000, 50, 0.1, 0.95, [0.01], 100)
    with pytest.raises(BoundDomainError):
        combined_frontier(20000, 50, 0.1, 0.95, [], 100)


def test_pointwise_max_simple():
    a = recursive_bound_trajectory(BoundParams(1000, 20, 0.2, 0.2), 5)
    assert pointwise_max([a]).s_lower == a.s_lower


# --- impossibility ---

def test_threshold_examples():
    assert impossibility_threshold(4, 0.5) == 12
    assert impossibility_threshold(2, 1.0) == 3


def test_threshold_monotone():
    for p in (0.1, 0.2, 0.3, 0.4):
        ts = [impossibility_threshold(k, p) for k in range(1, 61)]
        assert all(b > a for a, b in zip(ts, ts[1:]))
    for k in (1, 10, 60):
        ts = [impossibility_threshold(k, p) for p in (0.1, 0.2, 0.3, 0.4)]
        assert all(b <= a for a, b in zip(ts, ts[1:]))
        assert ts[-1] < ts[0]


def test_threshold_is_growth_boundary():
    # one tile past the threshold the bound keeps growing at zero slack
    for k, p in [(4, 0.5), (10, 0.2), (20, 0.1)]:
        s = impossibility_threshold(k, p) + 1
        assert growth_term(s, k, p, 0.0) >= k - 1


def test_impossibility_probability():
    s0 = impossibility_threshold(10, 0.2, 0.3) + 1
    assert impossibility_probability(s0, 10, 0.2, 0.3, 0) == 1.0
    ps = [impossibility_probability(s0, 10, 0.2, 0.3, t) for t in range(30)]
    assert all(b <= a for a, b in zip(ps, ps[1:]))
    with pytest.raises(BoundDomainError):
        impossibility_probability(s0 - 1, 10, 0.2, 0.3, 5)


def test_impossibility_probability_rises_with_k():
    for p in (0.1, 0.2, 0.3, 0.4):
        qs = [impossibility_probability(impossibility_threshold(k, p, 0.3) + 1, k, p, 0.3, 10)
              for k in range(1, 61)]
        assert all(b >= a for a, b in zip(qs, qs[1:]))
