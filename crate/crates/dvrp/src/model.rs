//! Problem data model: instances, requests, routes, schedules and feasibility checks.
//!
//! The objective is purely geometric (total Euclidean travel distance); vehicle
//! speed only enters feasibility through the arrival-time schedule. Routes may
//! contain interior depot stops (reload visits), so one vehicle can run several
//! trips per day. Unused vehicles are simply absent from a solution.

use thiserror::Error;

/// Absolute tolerance for feasibility comparisons on times and loads.
pub const FEAS_TOL: f64 = 1e-6;

/// A 2-D location in distance units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to another point.
    pub fn dist(self, other: Point) -> f64 {
        distance(self, other)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// One client request: where it is, how much cargo it needs, how long the
/// delivery takes and when the dispatcher learns about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    /// Positive id; requests are indexable as stops 1..=m, stop 0 is the depot.
    pub id: usize,
    pub location: Point,
    /// Cargo size in capacity units; never exceeds the vehicle capacity.
    pub size: f64,
    /// Service duration spent at the client.
    pub unload_time: f64,
    /// Time at which the request becomes known to the dispatcher.
    pub arrival_time: f64,
}

/// Axis-aligned bounding rectangle over request locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    /// Diagonal length; a convenient scale for jitter and the like.
    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    /// Closed-rectangle membership test.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Immutable problem description: depot, working hours, homogeneous fleet and
/// the full request list (arrival times included).
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub depot: Point,
    pub t_start: f64,
    pub t_end: f64,
    pub capacity: f64,
    pub speed: f64,
    pub fleet_size: usize,
    pub requests: Vec<Request>,
}

impl Instance {
    /// Number of real requests m.
    pub fn num_requests(&self) -> usize {
        self.requests.len()
    }

    /// Working day length.
    pub fn day_length(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Instant after which no unknown request may appear, for a given cut-off
    /// fraction of the working day.
    pub fn cutoff_time(&self, t_co: f64) -> f64 {
        self.t_start + t_co * (self.t_end - self.t_start)
    }

    /// Location of a stop index (0 = depot).
    pub fn location_of(&self, stop: usize) -> Point {
        if stop == 0 {
            self.depot
        } else {
            self.requests[stop - 1].location
        }
    }

    /// Cargo size of a stop (0 for the depot).
    pub fn size_of(&self, stop: usize) -> f64 {
        if stop == 0 {
            0.0
        } else {
            self.requests[stop - 1].size
        }
    }

    /// Unload time of a stop (depot visits take no time).
    pub fn unload_of(&self, stop: usize) -> f64 {
        if stop == 0 {
            0.0
        } else {
            self.requests[stop - 1].unload_time
        }
    }

    /// Release time of a stop: the request's arrival time, 0 for the depot.
    pub fn release_of(&self, stop: usize) -> f64 {
        if stop == 0 {
            0.0
        } else {
            self.requests[stop - 1].arrival_time
        }
    }

    /// Travel time between two points at the fleet's speed.
    pub fn travel_time(&self, a: Point, b: Point) -> f64 {
        distance(a, b) / self.speed
    }

    /// Bounding rectangle over all request locations (the spatial envelope is
    /// assumed known a priori, so this uses the full request list, not just
    /// the revealed part). Falls back to a degenerate rect at the depot for
    /// empty instances.
    pub fn bounding_rect(&self) -> Rect {
        let mut r = Rect {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for req in &self.requests {
            r.x_min = r.x_min.min(req.location.x);
            r.x_max = r.x_max.max(req.location.x);
            r.y_min = r.y_min.min(req.location.y);
            r.y_max = r.y_max.max(req.location.y);
        }
        if self.requests.is_empty() {
            r = Rect {
                x_min: self.depot.x,
                x_max: self.depot.x,
                y_min: self.depot.y,
                y_max: self.depot.y,
            };
        }
        r
    }
}

/// One vehicle's route: stop indices with depot endpoints (interior 0s are
/// reload visits) and the aligned arrival-time schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub vehicle: usize,
    pub stops: Vec<usize>,
    pub arrivals: Vec<f64>,
}

/// A complete plan: at most one route per fleet vehicle plus the cached cost.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub total_cost: f64,
}

impl Solution {
    /// Builds a solution from routes, computing and caching the total cost.
    pub fn from_routes(routes: Vec<Route>, instance: &Instance) -> Result<Self, StructureError> {
        let total_cost = total_cost(&routes, instance)?;
        Ok(Solution { routes, total_cost })
    }

    /// Route of a given vehicle, if the vehicle is used.
    pub fn route_of(&self, vehicle: usize) -> Option<&Route> {
        self.routes.iter().find(|r| r.vehicle == vehicle)
    }
}

/// Structural problems that make a cost or statistic undefined.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("route of vehicle {0} must start and end at the depot (stop 0)")]
    BadEndpoints(usize),
    #[error("route of vehicle {0} has fewer than 2 stops")]
    TooShort(usize),
    #[error("instance has no requests")]
    EmptyInstance,
}

/// Length of one route: sum of consecutive-stop Euclidean legs.
pub fn route_cost(stops: &[usize], instance: &Instance) -> f64 {
    stops
        .windows(2)
        .map(|w| distance(instance.location_of(w[0]), instance.location_of(w[1])))
        .sum()
}

/// Total travel distance over all routes; the minimized objective.
pub fn total_cost(routes: &[Route], instance: &Instance) -> Result<f64, StructureError> {
    let mut sum = 0.0;
    for route in routes {
        if route.stops.len() < 2 {
            return Err(StructureError::TooShort(route.vehicle));
        }
        if *route.stops.first().unwrap() != 0 || *route.stops.last().unwrap() != 0 {
            return Err(StructureError::BadEndpoints(route.vehicle));
        }
        sum += route_cost(&route.stops, instance);
    }
    Ok(sum)
}

/// Earliest-feasible arrival times along a stop sequence.
///
/// `release[j]` is the time the request at stop j became known (0 for depot
/// stops): a vehicle may not leave for a client before the client is known,
/// so `arrivals[j] = max(arrivals[j-1] + unload[j-1] + travel, release[j] + travel)`.
/// The first stop (depot) is timed at `t_start`.
pub fn schedule_route(stops: &[usize], instance: &Instance, release: &[f64]) -> Vec<f64> {
    let mut arrivals = Vec::with_capacity(stops.len());
    if stops.is_empty() {
        return arrivals;
    }
    arrivals.push(instance.t_start);
    for j in 1..stops.len() {
        let prev = stops[j - 1];
        let travel = instance.travel_time(instance.location_of(prev), instance.location_of(stops[j]));
        let ready = arrivals[j - 1] + instance.unload_of(prev) + travel;
        let known = release[j] + travel;
        arrivals.push(ready.max(known));
    }
    arrivals
}

/// `schedule_route` with release times looked up from the instance.
pub fn schedule_with_releases(stops: &[usize], instance: &Instance) -> Vec<f64> {
    let release: Vec<f64> = stops.iter().map(|&s| instance.release_of(s)).collect();
    schedule_route(stops, instance, &release)
}

/// Constraint tags for feasibility violations, numbered after the model's
/// constraint set: E2 serve-once, E3/E4 arrival recurrences, E5 return by
/// closing time, E6 no departure before opening, E7 per-trip capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintId {
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
}

/// First violated constraint found by `check_feasibility`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub vehicle: Option<usize>,
    pub position: Option<usize>,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.constraint)?;
        if let Some(v) = self.vehicle {
            write!(f, " vehicle {v}")?;
        }
        if let Some(p) = self.position {
            write!(f, " stop position {p}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

fn violation(
    constraint: ConstraintId,
    vehicle: Option<usize>,
    position: Option<usize>,
    detail: String,
) -> Violation {
    Violation { constraint, vehicle, position, detail }
}

/// Checks a solution against the full constraint set for the given revealed
/// request indices. Returns the first violation in checking order: serve-once,
/// then per route the arrival recurrences, closing time, opening time and
/// per-trip capacity.
pub fn check_feasibility(
    solution: &Solution,
    instance: &Instance,
    revealed: &[usize],
) -> Result<(), Violation> {
    let m = instance.num_requests();

    // E2: every revealed request appears exactly once across all routes.
    let mut seen = vec![0u32; m + 1];
    for route in &solution.routes {
        for (pos, &stop) in route.stops.iter().enumerate() {
            if stop == 0 {
                continue;
            }
            seen[stop] += 1;
            if seen[stop] > 1 {
                return Err(violation(
                    ConstraintId::E2,
                    Some(route.vehicle),
                    Some(pos),
                    format!("request {stop} served more than once"),
                ));
            }
        }
    }
    for &idx in revealed {
        if seen[idx] == 0 {
            return Err(violation(
                ConstraintId::E2,
                None,
                None,
                format!("revealed request {idx} is not served"),
            ));
        }
    }

    for route in &solution.routes {
        let stops = &route.stops;
        let arrivals = &route.arrivals;
        debug_assert_eq!(stops.len(), arrivals.len(), "schedule must align with stops");
        debug_assert!(stops.len() >= 2 && stops[0] == 0 && *stops.last().unwrap() == 0);

        // E6: the vehicle may not leave the depot before opening time.
        if arrivals[0] < instance.t_start - FEAS_TOL {
            return Err(violation(
                ConstraintId::E6,
                Some(route.vehicle),
                Some(0),
                format!("first departure {} before opening {}", arrivals[0], instance.t_start),
            ));
        }

        // E3/E4: arrival recurrences along the route.
        for j in 1..stops.len() {
            let prev = stops[j - 1];
            let travel =
                instance.travel_time(instance.location_of(prev), instance.location_of(stops[j]));
            let ready = arrivals[j - 1] + instance.unload_of(prev) + travel;
            if arrivals[j] < ready - FEAS_TOL {
                return Err(violation(
                    ConstraintId::E3,
                    Some(route.vehicle),
                    Some(j),
                    format!("arrival {} earlier than reachable {}", arrivals[j], ready),
                ));
            }
            let known = instance.release_of(stops[j]) + travel;
            if arrivals[j] < known - FEAS_TOL {
                return Err(violation(
                    ConstraintId::E4,
                    Some(route.vehicle),
                    Some(j),
                    format!(
                        "arrival {} precedes request availability + travel {}",
                        arrivals[j], known
                    ),
                ));
            }
        }

        // E5: back at the depot before closing time.
        let last = *arrivals.last().unwrap();
        if last > instance.t_end + FEAS_TOL {
            return Err(violation(
                ConstraintId::E5,
                Some(route.vehicle),
                Some(stops.len() - 1),
                format!("returns at {} after closing {}", last, instance.t_end),
            ));
        }

        // E7: cargo between consecutive depot visits fits the vehicle.
        let mut trip_load = 0.0;
        let mut trip_start = 0;
        for (pos, &stop) in stops.iter().enumerate() {
            if stop == 0 {
                trip_load = 0.0;
                trip_start = pos;
            } else {
                trip_load += instance.size_of(stop);
                if trip_load > instance.capacity + FEAS_TOL {
                    return Err(violation(
                        ConstraintId::E7,
                        Some(route.vehicle),
                        Some(pos),
                        format!(
                            "trip starting at position {trip_start} loads {} over capacity {}",
                            trip_load, instance.capacity
                        ),
                    ));
                }
            }
        }
    }

    Ok(())
}

/// Share of requests unknown at the start of the working day.
pub fn degree_of_dynamism(instance: &Instance) -> Result<f64, StructureError> {
    let m = instance.num_requests();
    if m == 0 {
        return Err(StructureError::EmptyInstance);
    }
    let dynamic = instance
        .requests
        .iter()
        .filter(|r| r.arrival_time > instance.t_start)
        .count();
    Ok(dynamic as f64 / m as f64)
}
