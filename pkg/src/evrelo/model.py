"""Problem data model: parameters, requests, instances, routes and solutions.

Conventions used throughout the package:

* times are minutes, distances kilometres, speeds km/h;
* battery levels are fractions of a full charge in [0, 1];
* the depot occupies row/column 0 of the distance matrix and every request
  location is an index into that same matrix;
* a worker route alternates pickup and delivery visits, starts and ends at
  the depot, and may not last longer than the duty time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .errors import IndexOutOfRange, UnknownRequest

#: Tolerance, in minutes (or charge fraction), absorbed by all feasibility
#: comparisons so that chained floating-point schedule propagation never flips
#: a verdict on numerical noise.
EPS = 1e-6


class Mode(enum.Enum):
    """How a worker moves between two locations."""

    BIKE = "bike"
    EV = "ev"


class RequestKind(enum.Enum):
    PICKUP = "pickup"
    DELIVERY = "delivery"


@dataclass(frozen=True)
class Parameters:
    """Worker and fleet constants.

    duty_time      -- maximum route duration per worker, minutes
    ev_speed       -- driving speed when relocating an EV, km/h
    bike_speed     -- riding speed on the folding bike, km/h
    park_time      -- minutes to park the EV and unfold the bike at a delivery
    load_time      -- minutes to stow the bike and start the EV at a pickup
    full_range     -- kilometres an EV covers on a full charge
    recharge_time  -- minutes a docked EV needs to charge from empty to full
    worker_count   -- number of workers available
    worker_cost    -- fixed cost charged per non-empty route, euros
    """

    duty_time: float = 300.0
    ev_speed: float = 25.0
    bike_speed: float = 15.0
    park_time: float = 1.0
    load_time: float = 1.0
    full_range: float = 150.0
    recharge_time: float = 240.0
    worker_count: int = 10
    worker_cost: float = 60.0

    def __post_init__(self):
        for name in ("duty_time", "ev_speed", "bike_speed", "full_range", "recharge_time"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        # Handling times may be zero (instant swap), never negative.
        for name in ("park_time", "load_time"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")
        if self.worker_cost < 0:
            raise ValueError("worker_cost must be non-negative")


@dataclass(frozen=True)
class Request:
    """One relocation request.

    A pickup is an EV stranded at a full station; ``battery`` is its charge
    level at the moment the time window opens (it keeps charging while parked).
    A delivery is a station short of EVs; ``battery`` is the minimum charge the
    delivered EV must reach by the closing time of the window.
    """

    id: int
    kind: RequestKind
    location: int
    tw_min: float
    tw_max: float
    battery: float
    revenue: float

    def __post_init__(self):
        if self.tw_min > self.tw_max:
            raise ValueError(f"request {self.id}: tw_min exceeds tw_max")
        if not 0.0 <= self.battery <= 1.0:
            raise ValueError(f"request {self.id}: battery outside [0, 1]")
        if self.revenue < 0:
            raise ValueError(f"request {self.id}: negative revenue")
        if self.location < 0:
            raise ValueError(f"request {self.id}: negative location index")

    @property
    def is_pickup(self):
        return self.kind is RequestKind.PICKUP


@dataclass(frozen=True)
class RevenueModel:
    """How request revenues are priced.

    kind "flat": every request earns ``amount``.
    kind "vrc_frc": a variable component (rate_per_min times a rent time drawn
    uniformly from [rent_min, rent_max]) plus the fixed component ``frc``.
    """

    kind: str = "flat"
    amount: float = 20.0
    rate_per_min: float = 0.29
    rent_min: float = 5.0
    rent_max: float = 15.0
    frc: float = 15.0

    def __post_init__(self):
        if self.kind not in ("flat", "vrc_frc"):
            raise ValueError(f"unknown revenue model kind {self.kind!r}")
        if self.rent_min > self.rent_max:
            raise ValueError("rent_min exceeds rent_max")

    def draw(self, rng):
        """Draw one request revenue using ``rng.uniform``."""
        if self.kind == "flat":
            return self.amount
        rent = float(rng.uniform(self.rent_min, self.rent_max))
        return self.rate_per_min * rent + self.frc


@dataclass(frozen=True)
class Instance:
    """An immutable problem instance, safe to share between solver runs."""

    parameters: Parameters
    requests: tuple
    distances: tuple
    revenue_model: Optional[RevenueModel] = None
    provenance: Optional[dict] = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        object.__setattr__(self, "distances", tuple(tuple(row) for row in self.distances))

    # -- lookups ----------------------------------------------------------

    @cached_property
    def _by_id(self):
        return {r.id: r for r in self.requests}

    def request(self, request_id):
        try:
            return self._by_id[request_id]
        except KeyError:
            raise UnknownRequest(f"no request with id {request_id}") from None

    @property
    def pickups(self):
        return tuple(r for r in self.requests if r.kind is RequestKind.PICKUP)

    @property
    def deliveries(self):
        return tuple(r for r in self.requests if r.kind is RequestKind.DELIVERY)

    @property
    def n_locations(self):
        return len(self.distances)

    def distance(self, origin, destination):
        if not (0 <= origin < self.n_locations and 0 <= destination < self.n_locations):
            raise IndexOutOfRange(
                f"location pair ({origin}, {destination}) outside matrix of size {self.n_locations}"
            )
        return self.distances[origin][destination]

    # -- travel times -----------------------------------------------------

    def bike_minutes(self, origin, destination):
        """Riding time between two matrix locations, minutes."""
        return self.distance(origin, destination) * 60.0 / self.parameters.bike_speed

    def ev_minutes(self, origin, destination):
        """Driving time between two matrix locations, minutes."""
        return self.distance(origin, destination) * 60.0 / self.parameters.ev_speed


def travel_time(instance, origin, destination, mode):
    """Travel minutes between two locations for the given movement mode."""
    if mode is Mode.BIKE:
        return instance.bike_minutes(origin, destination)
    if mode is Mode.EV:
        return instance.ev_minutes(origin, destination)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class ScheduledVisit:
    """One stop of a route as stored in a solution.

    ``arrival`` and ``waiting`` are the worker's arrival time and the waiting
    incurred at the stop.  ``ev_charge`` is recorded at pickups only: the
    charge level of the EV at the moment the worker drives it away (parking
    time since the window opened counts as recharge).
    """

    request_id: int
    arrival: float
    waiting: float
    ev_charge: Optional[float] = None


@dataclass(frozen=True)
class RouteSchedule:
    """A fully timed worker route: depot -> p1 d1 ... pn dn -> depot."""

    worker: int
    start_time: float
    visits: tuple
    end_time: float

    def __post_init__(self):
        object.__setattr__(self, "visits", tuple(self.visits))

    @property
    def duration(self):
        return self.end_time - self.start_time

    @property
    def request_ids(self):
        return tuple(v.request_id for v in self.visits)

    def revenue(self, instance):
        return sum(instance.request(v.request_id).revenue for v in self.visits)


@dataclass(frozen=True)
class Solution:
    """A set of routes plus bookkeeping totals.

    ``optimal`` is only meaningful for solver outputs that can certify
    optimality: the exact solver sets it True/False, heuristics leave None.
    """

    routes: tuple
    served: frozenset
    rejected: frozenset
    total_revenue: float
    worker_cost: float
    profit: float
    optimal: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, "routes", tuple(self.routes))
        object.__setattr__(self, "served", frozenset(self.served))
        object.__setattr__(self, "rejected", frozenset(self.rejected))


def assemble_solution(routes, instance, optimal=None):
    """Build a consistent Solution record from finished routes.

    Requests absent from every route are marked rejected.  Worker ids are
    reassigned to the route order so dropped routes leave no holes.
    """
    from dataclasses import replace

    routes = tuple(replace(r, worker=i) for i, r in enumerate(routes))
    served = set()
    for route in routes:
        for visit in route.visits:
            if visit.request_id in served:
                raise ValueError(f"request {visit.request_id} served twice")
            served.add(visit.request_id)
    revenue = sum(instance.request(rid).revenue for rid in served)
    cost = instance.parameters.worker_cost * len(routes)
    rejected = frozenset(r.id for r in instance.requests) - served
    return Solution(
        routes=routes,
        served=frozenset(served),
        rejected=rejected,
        total_revenue=revenue,
        worker_cost=cost,
        profit=revenue - cost,
        optimal=optimal,
    )


def evaluate_profit(solution, instance):
    """Recompute profit from first principles: served revenue minus the
    per-route worker cost.

    Raises UnknownRequest when the solution serves an id the instance lacks,
    and ValueError when the stored profit disagrees with the recomputation
    (a solution that inconsistent was assembled by hand or corrupted).
    """
    revenue = 0.0
    for rid in solution.served:
        revenue += instance.request(rid).revenue
    profit = revenue - instance.parameters.worker_cost * len(solution.routes)
    if abs(profit - solution.profit) > EPS:
        raise ValueError(
            f"stored profit {solution.profit} disagrees with recomputed {profit}"
        )
    return profit


def count_served(solution):
    """Number of requests the solution serves."""
    return len(solution.served)


def empty_solution(instance, optimal=None):
    """The solution that serves nothing; profit is zero by definition."""
    return Solution(
        routes=(),
        served=frozenset(),
        rejected=frozenset(r.id for r in instance.requests),
        total_revenue=0.0,
        worker_cost=0.0,
        profit=0.0,
        optimal=optimal,
    )
