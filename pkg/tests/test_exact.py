"""Exhaustive solver: base cases, tie-breaking, safety rails, gap metric,
and a brute-force cross-check against a departure-time grid scan."""

import dataclasses
import itertools
import random

import pytest
from hypothesis import given, strategies as st

from conftest import single_pair_reference, synthetic_instance
from evrelo.errors import InstanceTooLarge
from evrelo.exact import OracleLimits, optimality_gap, solve_exact
from evrelo.feasibility import replay_route, validate_route, validate_solution
from evrelo.model import (
    Instance,
    Parameters,
    Request,
    RequestKind,
    Solution,
)


def _solution_with(profit=0.0, served=()):
    return Solution(routes=(), served=frozenset(served), rejected=frozenset(),
                    total_revenue=0.0, worker_cost=0.0, profit=profit)


def _coincident(pairs, park=1.0, load=1.0, opens=None, **params):
    """Pairs all sharing one station 1 km from the depot."""
    big = 10_000.0
    requests = []
    for i in range(pairs):
        open_ = opens[i] if opens else 10.0
        requests.append(Request(id=2 * i + 1, kind=RequestKind.PICKUP, location=1,
                                tw_min=open_, tw_max=big, battery=1.0, revenue=20.0))
        requests.append(Request(id=2 * i + 2, kind=RequestKind.DELIVERY, location=1,
                                tw_min=0.0, tw_max=big, battery=0.0, revenue=20.0))
    defaults = dict(park_time=park, load_time=load, worker_cost=30.0)
    defaults.update(params)
    return Instance(parameters=Parameters(**defaults), requests=tuple(requests),
                    distances=((0.0, 1.0), (1.0, 0.0)))


# ---------------------------------------------------------------------------
# Base cases.
# ---------------------------------------------------------------------------

def test_exact_empty_instance():
    inst = Instance(parameters=Parameters(), requests=(), distances=((0.0,),))
    solution = solve_exact(inst)
    assert solution.routes == ()
    assert solution.profit == 0.0
    assert solution.optimal is True


def test_exact_serves_pair_that_pays_for_its_worker():
    inst = single_pair_reference()  # revenue 40 against a 30 worker cost
    solution = solve_exact(inst, objective="profit")
    assert solution.served == frozenset({1, 2})
    assert solution.profit == pytest.approx(10.0)
    assert solution.optimal is True
    assert validate_solution(solution, inst).ok


def test_exact_profit_mode_leaves_unprofitable_pair_unserved():
    base = single_pair_reference()
    inst = dataclasses.replace(base, parameters=dataclasses.replace(
        base.parameters, worker_cost=60.0))
    by_profit = solve_exact(inst, objective="profit")
    assert by_profit.routes == ()
    assert by_profit.profit == 0.0
    by_requests = solve_exact(inst, objective="requests")
    assert by_requests.served == frozenset({1, 2})
    assert by_requests.profit == pytest.approx(-20.0)


def test_exact_rejects_unknown_objective():
    with pytest.raises(ValueError):
        solve_exact(single_pair_reference(), objective="fastest")


# ---------------------------------------------------------------------------
# Tie-breaking and determinism.
# ---------------------------------------------------------------------------

def test_exact_prefers_fewer_routes_at_equal_value():
    inst = _coincident(pairs=2, opens=[10.0, 10.0])
    solution = solve_exact(inst, objective="requests")
    assert len(solution.served) == 4
    assert len(solution.routes) == 1


def test_exact_breaks_remaining_ties_by_lowest_served_ids():
    # duty fits exactly one pair and every single-pair route serves two
    # requests, so the lexicographically smallest served set wins
    inst = _coincident(pairs=3, park=15.0, load=15.0,
                       opens=[10.0, 10.0, 10.0], duty_time=50.0,
                       worker_count=1)
    solution = solve_exact(inst, objective="requests")
    assert len(solution.routes) == 1
    assert solution.served == frozenset({1, 2})


def test_exact_deterministic():
    rng = random.Random(3)
    inst = synthetic_instance(rng, n_pairs=2)
    assert solve_exact(inst, "profit") == solve_exact(inst, "profit")
    assert solve_exact(inst, "requests") == solve_exact(inst, "requests")


# ---------------------------------------------------------------------------
# Safety rails.
# ---------------------------------------------------------------------------

def test_exact_refuses_oversized_instances():
    rng = random.Random(5)
    inst = synthetic_instance(rng, n_pairs=3)  # six requests
    with pytest.raises(InstanceTooLarge):
        solve_exact(inst, limits=OracleLimits(max_requests=4))


def test_exact_default_cap_is_ten_requests():
    rng = random.Random(6)
    inst = synthetic_instance(rng, n_pairs=6)  # twelve requests
    with pytest.raises(InstanceTooLarge):
        solve_exact(inst)


def test_exact_time_budget_clears_optimality_flag():
    inst = _coincident(pairs=2)
    rushed = solve_exact(inst, objective="requests",
                         limits=OracleLimits(time_budget=0.0))
    assert rushed.optimal is False
    relaxed = solve_exact(inst, objective="requests",
                          limits=OracleLimits(time_budget=60.0))
    assert relaxed.optimal is True


def test_exact_counts_search_nodes():
    limits = OracleLimits()
    solve_exact(_coincident(pairs=2), objective="requests", limits=limits)
    assert limits.nodes > 0


# ---------------------------------------------------------------------------
# Gap metric.
# ---------------------------------------------------------------------------

def test_gap_profit_percentage():
    gap = optimality_gap(_solution_with(profit=15.0), _solution_with(profit=20.0))
    assert gap == pytest.approx(25.0)


def test_gap_requests_percentage():
    gap = optimality_gap(_solution_with(served={1, 2}),
                         _solution_with(served={1, 2, 3, 4}),
                         objective="requests")
    assert gap == pytest.approx(50.0)


def test_gap_zero_reference_conventions():
    assert optimality_gap(_solution_with(profit=0.0), _solution_with(profit=0.0)) == 0.0
    assert optimality_gap(_solution_with(profit=5.0), _solution_with(profit=0.0)) is None


def test_gap_rejects_unknown_objective():
    with pytest.raises(ValueError):
        optimality_gap(_solution_with(), _solution_with(), objective="fastest")


# ---------------------------------------------------------------------------
# Brute-force cross-check: the oracle equals an independent search that
# judges sequence feasibility by replaying a grid of depot departures.
# ---------------------------------------------------------------------------

def _grid_route(instance, order, extra_starts):
    first = order[0]
    ride = instance.bike_minutes(0, first.location)
    lo = first.tw_min - ride
    hi = first.tw_max - ride
    starts = {lo, hi}
    starts.update(s for s in extra_starts if lo - 1e-9 <= s <= hi + 1e-9)
    step = lo
    while step < hi:
        starts.add(step)
        step += 1.0
    for start in sorted(starts, reverse=True):
        route = replay_route(instance, start, order)
        if validate_route(route, instance).ok:
            return route
    return None


def _brute_force(instance, objective, extra_starts):
    pickups = [r for r in instance.requests if r.kind is RequestKind.PICKUP]
    deliveries = [r for r in instance.requests if r.kind is RequestKind.DELIVERY]
    routes = {}
    for k in (1, 2):
        for ps in itertools.permutations(pickups, k):
            for ds in itertools.permutations(deliveries, k):
                order = [r for pair in zip(ps, ds) for r in pair]
                route = _grid_route(instance, order, extra_starts)
                if route is not None:
                    routes.setdefault(frozenset(r.id for r in order), route)

    def value(ids_sets):
        if objective == "requests":
            return float(sum(len(ids) for ids in ids_sets))
        revenue = sum(instance.request(i).revenue for ids in ids_sets for i in ids)
        return revenue - instance.parameters.worker_cost * len(ids_sets)

    best = 0.0
    keys = list(routes)
    limit = min(len(keys), instance.parameters.worker_count)
    for k in range(1, limit + 1):
        for combo in itertools.combinations(keys, k):
            if len(frozenset().union(*combo)) != sum(len(c) for c in combo):
                continue
            best = max(best, value(combo))
    return best


@given(st.integers(min_value=0, max_value=300))
def test_exact_matches_grid_scan_brute_force(seed):
    rng = random.Random(seed)
    instance = synthetic_instance(rng, n_pairs=2)
    for objective in ("requests", "profit"):
        solution = solve_exact(instance, objective=objective)
        assert solution.optimal is True
        assert validate_solution(solution, instance).ok
        oracle_value = (float(len(solution.served)) if objective == "requests"
                        else solution.profit)
        brute = _brute_force(
            instance, objective,
            extra_starts=[r.start_time for r in solution.routes],
        )
        assert oracle_value == pytest.approx(brute, abs=1e-6)
