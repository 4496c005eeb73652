"""Single-route greedy construction.

Routes are grown one visit at a time: from the current position the worker
commits to the best feasible next request under a selection policy, riding to
a pickup by bike and driving its EV to a delivery.  Two policies are
provided: nearest next request, and most urgent (earliest window closing).
"""

from __future__ import annotations

import enum

from .feasibility import (
    after_delivery,
    after_pickup,
    delivery_feasible,
    opening_state,
    pickup_feasible,
    route_start_for_pickup,
    replay_route,
)
from .model import EPS, RequestKind, assemble_solution


class GreedyPolicy(enum.Enum):
    """How the next request is chosen among the feasible candidates."""

    NEAREST = "nearest"
    MOST_URGENT = "most_urgent"


def _distance_from(state, request, instance):
    origin = 0 if state is None else state.location
    return instance.distance(origin, request.location)


def select_next(state, candidates, policy, instance, delivery_pool=()):
    """Best feasible next request from ``candidates`` under ``policy``.

    With ``state`` None the route is still empty and each pickup is judged
    from its own window-opening departure; otherwise the candidates are
    checked against the current position.  ``delivery_pool`` is the set of
    deliveries still open, needed to judge whether a pickup can lead
    anywhere.  Returns None when nothing is feasible.  Ties (equal distance
    or equal window closing) break toward the lowest request id.
    """
    best = None
    best_key = None
    for request in candidates:
        if request.kind is RequestKind.PICKUP:
            st = opening_state(request, instance) if state is None else state
            if not pickup_feasible(st, request, delivery_pool, instance):
                continue
        else:
            if state is None or not delivery_feasible(state, request, instance):
                continue
        if policy is GreedyPolicy.NEAREST:
            key = (_distance_from(state, request, instance), request.id)
        else:
            key = (request.tw_max, request.id)
        if best_key is None or key < best_key:
            best, best_key = request, key
    return best


def run_greedy(instance, policy=GreedyPolicy.NEAREST, drop_unprofitable=False):
    """Grow routes one by one until the workers run out or nothing fits.

    Each route starts at the pickup whose opening ride scores best, then
    alternates deliveries and pickups by the policy.  A committed pickup
    whose EV cannot be dropped anywhere is rolled back and barred from the
    current route (it stays available for later routes).  With
    ``drop_unprofitable`` routes that do not pay for their worker are
    discarded from the final solution.
    """
    unserved = {r.id: r for r in instance.requests}
    routes = []
    while len(routes) < instance.parameters.worker_count:
        barred = set()
        order = []
        states = []
        state = None
        while True:
            deliveries = [r for r in unserved.values() if r.kind is RequestKind.DELIVERY]
            if order and order[-1].kind is RequestKind.PICKUP:
                chosen = select_next(state, deliveries, policy, instance)
                if chosen is None:
                    popped = order.pop()
                    states.pop()
                    state = states[-1] if states else None
                    unserved[popped.id] = popped
                    barred.add(popped.id)
                    continue
                state, _ = after_delivery(state, chosen, instance)
            else:
                pickups = [
                    r
                    for r in unserved.values()
                    if r.kind is RequestKind.PICKUP and r.id not in barred
                ]
                chosen = select_next(state, pickups, policy, instance, deliveries)
                if chosen is None:
                    break
                if state is None:
                    state = opening_state(chosen, instance)
                state, _ = after_pickup(state, chosen, instance)
            order.append(chosen)
            states.append(state)
            del unserved[chosen.id]
        if not order:
            break
        start = route_start_for_pickup(order[0], instance)
        routes.append(replay_route(instance, start, order, worker=len(routes)))
    if drop_unprofitable:
        cost = instance.parameters.worker_cost
        routes = [r for r in routes if r.revenue(instance) >= cost - EPS]
    return assemble_solution(routes, instance)
