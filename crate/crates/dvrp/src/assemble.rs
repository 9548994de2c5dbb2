//! Turning a cluster forest into vehicle routes, and scoring the result.
//!
//! Between clustering and scheduling sits a purely structural step: each tree
//! becomes a stop sequence for one vehicle, committed stops stay in front,
//! depot visits are inserted wherever the running trip load would exceed
//! vehicle capacity, and sampled placeholder requests are removed again before
//! a plan is ever executed or compared against a real instance.

use crate::cluster::Tree;
use crate::model::{
    distance, schedule_with_releases, Instance, Point, Request, Route, Solution, StructureError,
    FEAS_TOL,
};

/// Cost added per unit of lateness past the end of the working day.
/// Distances in the benchmark set run into the low tens of thousands, so one
/// hour of overtime outweighs any achievable routing gain.
pub const OVERTIME_PENALTY: f64 = 1e4;

/// A routing scenario: the real instance plus sampled placeholder requests,
/// addressable through one stop-index space. Stops `1..=m` are the instance's
/// requests, stops `m+1..` are the placeholders, stop 0 is the depot.
#[derive(Debug, Clone)]
pub struct Scenario<'a> {
    pub instance: &'a Instance,
    artificial: Vec<Request>,
}

impl<'a> Scenario<'a> {
    pub fn new(instance: &'a Instance, artificial: Vec<Request>) -> Self {
        let m = instance.num_requests();
        debug_assert!(
            artificial.iter().enumerate().all(|(i, r)| r.id == m + 1 + i),
            "placeholder ids must continue the instance's id range"
        );
        Scenario { instance, artificial }
    }

    /// Scenario with no placeholders: the real instance as-is.
    pub fn real_only(instance: &'a Instance) -> Self {
        Scenario { instance, artificial: Vec::new() }
    }

    pub fn real_count(&self) -> usize {
        self.instance.num_requests()
    }

    pub fn total_count(&self) -> usize {
        self.instance.num_requests() + self.artificial.len()
    }

    pub fn is_artificial(&self, stop: usize) -> bool {
        stop > self.real_count()
    }

    pub fn location_of(&self, stop: usize) -> Point {
        if stop <= self.real_count() {
            self.instance.location_of(stop)
        } else {
            self.artificial[stop - self.real_count() - 1].location
        }
    }

    pub fn size_of(&self, stop: usize) -> f64 {
        if stop <= self.real_count() {
            self.instance.size_of(stop)
        } else {
            self.artificial[stop - self.real_count() - 1].size
        }
    }

    pub fn unload_of(&self, stop: usize) -> f64 {
        if stop <= self.real_count() {
            self.instance.unload_of(stop)
        } else {
            self.artificial[stop - self.real_count() - 1].unload_time
        }
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        distance(self.location_of(a), self.location_of(b))
    }
}

/// Appends `members` to `route`, inserting a depot reload stop whenever the
/// open trip would exceed `capacity`. `trip_load` tracks the open trip's
/// cargo (full request sizes) and is updated in place.
pub fn extend_with_reloads(
    route: &mut Vec<usize>,
    trip_load: &mut f64,
    members: impl IntoIterator<Item = usize>,
    size_of: impl Fn(usize) -> f64,
    capacity: f64,
) {
    for member in members {
        let size = size_of(member);
        if *trip_load + size > capacity + FEAS_TOL {
            route.push(0);
            *trip_load = 0.0;
        }
        route.push(member);
        *trip_load += size;
    }
}

/// Cargo already loaded for the trip a committed route is currently on.
pub fn open_trip_load(stops: &[usize], size_of: impl Fn(usize) -> f64) -> f64 {
    let open_start = stops.iter().rposition(|&s| s == 0).map_or(0, |p| p + 1);
    stops[open_start..].iter().map(|&s| size_of(s)).sum()
}

/// Expands a clustered forest into one stop sequence per vehicle.
///
/// `fixed` holds each vehicle's committed stops (starting with the depot);
/// those are copied verbatim. A tree bound to a vehicle continues that
/// vehicle's route, skipping members already inside the committed part.
/// Unbound trees queue behind vehicles that are out with work pending (so the
/// new stops stay revisable as long as possible), then take idle and fresh
/// vehicles; when trees outnumber vehicles they wrap round-robin over the
/// fleet, least committed cargo first. Whenever the running trip load would
/// exceed `capacity`, a depot reload stop is inserted first. Used vehicles end
/// at the depot; unused vehicles get an empty sequence.
pub fn assemble_routes(
    scenario: &Scenario,
    trees: &[Tree],
    fixed: &[Vec<usize>],
    capacity: f64,
) -> Vec<Vec<usize>> {
    let fleet = fixed.len();
    let mut routes: Vec<Vec<usize>> = Vec::with_capacity(fleet);
    let mut trip_load: Vec<f64> = Vec::with_capacity(fleet);
    for f in fixed {
        debug_assert!(f.first() == Some(&0), "committed stops must start at the depot");
        trip_load.push(open_trip_load(f, |s| scenario.size_of(s)));
        routes.push(f.clone());
    }

    let mut bound = vec![false; fleet];
    for tree in trees {
        if let Some(v) = tree.vehicle {
            bound[v] = true;
        }
    }
    let append = |routes: &mut Vec<Vec<usize>>, trip_load: &mut Vec<f64>, v: usize, tree: &Tree| {
        let fresh = tree.members.iter().copied().filter(|m| !fixed[v].contains(m));
        extend_with_reloads(
            &mut routes[v],
            &mut trip_load[v],
            fresh,
            |s| scenario.size_of(s),
            capacity,
        );
    };

    for tree in trees {
        if let Some(v) = tree.vehicle {
            append(&mut routes, &mut trip_load, v, tree);
        }
    }

    if trees.len() > fleet {
        // More trees than vehicles: multi-trip routes are unavoidable, so
        // spread the extras round-robin, least committed cargo first.
        let mut order: Vec<usize> = (0..fleet).collect();
        let committed_load = |v: usize| -> f64 {
            fixed[v].iter().filter(|&&s| s != 0).map(|&s| scenario.size_of(s)).sum()
        };
        order.sort_by(|&a, &b| committed_load(a).total_cmp(&committed_load(b)).then(a.cmp(&b)));
        let mut next = 0usize;
        for tree in trees {
            if tree.vehicle.is_none() {
                let v = order[next % fleet];
                next += 1;
                append(&mut routes, &mut trip_load, v, tree);
            }
        }
    } else {
        // Target choice for a tree without a committed core. A dispatched
        // vehicle with a short tail of uncommitted stops is best: the tree
        // joins its open trip while capacity lasts (no extra depot leg) and
        // stays revisable behind the committed prefix, so later rounds may
        // still merge it with a neighbouring cluster. But the preference has
        // a limit: unload time is a fixed cost per stop, and a long pile-up
        // on one vehicle serialises service that an idle vehicle could run
        // in parallel until the return drifts past the end of the day. Past
        // roughly a trip's worth of queued stops, an idle vehicle wins.
        // Only real stops count as queued work: placeholders are stripped
        // before anything is executed, so they cost the vehicle no time.
        const CHAIN_CAP: usize = 8;
        for tree in trees.iter().filter(|t| t.vehicle.is_none()) {
            let v = (0..fleet)
                .min_by_key(|&v| {
                    let dispatched = fixed[v].len() > 1;
                    let pending = routes[v][fixed[v].len()..]
                        .iter()
                        .filter(|&&s| s != 0 && !scenario.is_artificial(s))
                        .count();
                    let class = if dispatched {
                        if pending == 0 {
                            1 // committed work only: defer behind it
                        } else if pending <= CHAIN_CAP {
                            0 // open trip with room to grow
                        } else {
                            3 // already piled up: last resort
                        }
                    } else if pending == 0 {
                        2 // idle, never dispatched
                    } else {
                        4 // fresh but just given a tree above
                    };
                    (class, pending, v)
                })
                .unwrap();
            append(&mut routes, &mut trip_load, v, tree);
        }
    }

    for (v, route) in routes.iter_mut().enumerate() {
        if route.len() <= 1 && fixed[v].len() <= 1 {
            route.clear(); // vehicle never dispatched
        } else if route.last() != Some(&0) {
            route.push(0);
        }
    }
    routes
}

/// Removes placeholder stops (index greater than `real_count`) from every
/// route, collapsing the depot runs this leaves behind. Routes without any
/// remaining client become empty: a vehicle that would only have served
/// placeholders is not dispatched.
pub fn strip_artificial(routes: &[Vec<usize>], real_count: usize) -> Vec<Vec<usize>> {
    routes
        .iter()
        .map(|route| {
            let mut out: Vec<usize> = Vec::with_capacity(route.len());
            for &stop in route {
                if stop > real_count {
                    continue;
                }
                if stop == 0 && out.last() == Some(&0) {
                    continue;
                }
                out.push(stop);
            }
            if out.iter().all(|&s| s == 0) {
                out.clear();
            }
            out
        })
        .collect()
}

/// Travel cost plus accumulated lateness of a set of routes on the real
/// instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Total travel distance of all non-empty routes.
    pub cost: f64,
    /// Sum over vehicles of how far past closing time they return.
    pub overtime: f64,
}

impl Evaluation {
    /// Scalar objective for comparing candidate plans: lateness is priced so
    /// high that any on-time plan beats any late one.
    pub fn penalized(&self) -> f64 {
        self.cost + OVERTIME_PENALTY * self.overtime
    }

    pub fn within_hours(&self) -> bool {
        self.overtime <= FEAS_TOL
    }
}

/// Scores per-vehicle stop sequences against the real instance. Empty
/// sequences are unused vehicles and contribute nothing.
pub fn evaluate(routes: &[Vec<usize>], instance: &Instance) -> Evaluation {
    let mut cost = 0.0;
    let mut overtime = 0.0;
    for stops in routes.iter().filter(|r| r.len() >= 2) {
        cost += crate::model::route_cost(stops, instance);
        let arrivals = schedule_with_releases(stops, instance);
        let back = *arrivals.last().unwrap();
        if back > instance.t_end {
            overtime += back - instance.t_end;
        }
    }
    Evaluation { cost, overtime }
}

/// Converts per-vehicle stop sequences into a checked solution with computed
/// arrival times; empty sequences are skipped as unused vehicles.
pub fn to_solution(routes: &[Vec<usize>], instance: &Instance) -> Result<Solution, StructureError> {
    let mut out = Vec::new();
    for (v, stops) in routes.iter().enumerate() {
        if stops.is_empty() {
            continue;
        }
        let arrivals = schedule_with_releases(stops, instance);
        out.push(Route { vehicle: v, stops: stops.clone(), arrivals });
    }
    Solution::from_routes(out, instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_feasibility;
    use proptest::prelude::*;

    fn instance_with(requests: Vec<(f64, f64, f64)>, capacity: f64, t_end: f64) -> Instance {
        let requests = requests
            .into_iter()
            .enumerate()
            .map(|(i, (x, y, size))| Request {
                id: i + 1,
                location: Point::new(x, y),
                size,
                unload_time: 0.1,
                arrival_time: 0.0,
            })
            .collect();
        Instance {
            name: "assemble-test".into(),
            depot: Point::new(0.0, 0.0),
            t_start: 0.0,
            t_end,
            capacity,
            speed: 60.0,
            fleet_size: 4,
            requests,
        }
    }

    fn unbound(members: Vec<usize>, weight: f64) -> Tree {
        Tree { vehicle: None, members, weight }
    }

    #[test]
    fn scenario_indexes_both_request_kinds() {
        let inst = instance_with(vec![(1.0, 0.0, 2.0), (2.0, 0.0, 3.0)], 10.0, 8.0);
        let art = vec![Request {
            id: 3,
            location: Point::new(0.0, 4.0),
            size: 5.0,
            unload_time: 0.1,
            arrival_time: 1.0,
        }];
        let sc = Scenario::new(&inst, art);
        assert_eq!(sc.total_count(), 3);
        assert!(!sc.is_artificial(2));
        assert!(sc.is_artificial(3));
        assert_eq!(sc.size_of(3), 5.0);
        assert_eq!(sc.location_of(3), Point::new(0.0, 4.0));
        assert!((sc.dist(1, 3) - (1.0f64 + 16.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reload_inserted_when_trip_would_overflow() {
        let inst = instance_with(
            vec![(1.0, 0.0, 4.0), (2.0, 0.0, 5.0), (3.0, 0.0, 3.0)],
            10.0,
            8.0,
        );
        let sc = Scenario::real_only(&inst);
        let trees = vec![unbound(vec![1, 2, 3], 12.0)];
        let fixed = vec![vec![0]; 2];
        let routes = assemble_routes(&sc, &trees, &fixed, inst.capacity);
        assert_eq!(routes[0], vec![0, 1, 2, 0, 3, 0]);
        assert!(routes[1].is_empty());
    }

    #[test]
    fn bound_tree_continues_the_committed_route() {
        let inst = instance_with(vec![(1.0, 0.0, 6.0), (1.0, 1.0, 5.0)], 10.0, 8.0);
        let sc = Scenario::real_only(&inst);
        // Vehicle 0 is already on its way to request 1; request 2 joins its
        // cluster but does not fit in the open trip next to the full size of 1.
        let trees = vec![Tree { vehicle: Some(0), members: vec![1, 2], weight: 11.0 }];
        let fixed = vec![vec![0, 1], vec![0]];
        let routes = assemble_routes(&sc, &trees, &fixed, inst.capacity);
        assert_eq!(routes[0], vec![0, 1, 0, 2, 0]);
        assert!(routes[1].is_empty());
    }

    #[test]
    fn unbound_trees_queue_behind_a_dispatched_vehicle() {
        let inst = instance_with(
            vec![(1.0, 0.0, 1.0), (2.0, 0.0, 1.0), (3.0, 0.0, 1.0), (4.0, 0.0, 1.0)],
            10.0,
            8.0,
        );
        let sc = Scenario::real_only(&inst);
        let trees = vec![unbound(vec![1], 1.0), unbound(vec![2], 1.0), unbound(vec![3], 1.0)];
        // Vehicle 0 already delivered request 4; the new trees queue behind it
        // (keeping them revisable) instead of waking the fresh vehicles 1, 2.
        let fixed = vec![vec![0, 4, 0], vec![0], vec![0]];
        let routes = assemble_routes(&sc, &trees, &fixed, inst.capacity);
        assert_eq!(routes[0], vec![0, 4, 0, 1, 2, 3, 0]);
        assert!(routes[1].is_empty());
        assert!(routes[2].is_empty());
    }

    #[test]
    fn a_pile_up_defers_to_an_idle_vehicle() {
        // Vehicle 0 is out and its cluster alone queues nine more stops, which
        // is past the chaining cap: the unbound tree goes to idle vehicle 1
        // instead of serialising even more service time behind vehicle 0.
        let requests = (0..11).map(|i| (1.0 + i as f64, 0.0, 1.0)).collect();
        let inst = instance_with(requests, 20.0, 8.0);
        let sc = Scenario::real_only(&inst);
        let trees = vec![
            Tree { vehicle: Some(0), members: (1..=10).collect(), weight: 10.0 },
            unbound(vec![11], 1.0),
        ];
        let fixed = vec![vec![0, 1], vec![0]];
        let routes = assemble_routes(&sc, &trees, &fixed, inst.capacity);
        assert_eq!(routes[0], vec![0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 0]);
        assert_eq!(routes[1], vec![0, 11, 0]);
    }

    #[test]
    fn placeholders_do_not_count_toward_the_pile() {
        // Same shape, but eight of vehicle 0's queued stops are placeholders.
        // They are stripped before execution and cost no service time, so the
        // vehicle still counts as lightly loaded and the new tree chains onto
        // it rather than waking vehicle 1.
        let inst = instance_with(
            vec![(1.0, 0.0, 1.0), (2.0, 0.0, 1.0), (3.0, 0.0, 1.0)],
            30.0,
            8.0,
        );
        let art = (0..8)
            .map(|i| Request {
                id: 4 + i,
                location: Point::new(4.0 + i as f64, 0.0),
                size: 1.0,
                unload_time: 0.1,
                arrival_time: 0.0,
            })
            .collect();
        let sc = Scenario::new(&inst, art);
        let mut members = vec![1, 2];
        members.extend(4..=11);
        let trees =
            vec![Tree { vehicle: Some(0), members, weight: 10.0 }, unbound(vec![3], 1.0)];
        let fixed = vec![vec![0, 1], vec![0]];
        let routes = assemble_routes(&sc, &trees, &fixed, inst.capacity);
        assert_eq!(routes[0], vec![0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11, 3, 0]);
        assert!(routes[1].is_empty());
    }

    #[test]
    fn fresh_vehicles_each_take_one_tree_when_nobody_is_out() {
        let inst = instance_with(vec![(1.0, 0.0, 1.0), (2.0, 0.0, 1.0)], 10.0, 8.0);
        let sc = Scenario::real_only(&inst);
        let trees = vec![unbound(vec![1], 1.0), unbound(vec![2], 1.0)];
        let fixed = vec![vec![0]; 3];
        let routes = assemble_routes(&sc, &trees, &fixed, inst.capacity);
        assert_eq!(routes[0], vec![0, 1, 0]);
        assert_eq!(routes[1], vec![0, 2, 0]);
        assert!(routes[2].is_empty());
    }

    #[test]
    fn overflow_wraps_around_the_fleet() {
        let inst = instance_with(
            vec![(1.0, 0.0, 1.0), (2.0, 0.0, 1.0), (3.0, 0.0, 1.0)],
            10.0,
            8.0,
        );
        let sc = Scenario::real_only(&inst);
        let trees = vec![unbound(vec![1], 1.0), unbound(vec![2], 1.0), unbound(vec![3], 1.0)];
        let fixed = vec![vec![0]; 2];
        let routes = assemble_routes(&sc, &trees, &fixed, inst.capacity);
        assert_eq!(routes[0], vec![0, 1, 3, 0]);
        assert_eq!(routes[1], vec![0, 2, 0]);
    }

    #[test]
    fn stripping_removes_placeholders_and_collapses_depot_runs() {
        let routes = vec![
            vec![0, 1, 7, 0, 8, 2, 0],
            vec![0, 7, 0, 8, 0],
            vec![],
            vec![0, 9, 3, 0],
        ];
        let stripped = strip_artificial(&routes, 5);
        assert_eq!(stripped[0], vec![0, 1, 0, 2, 0]);
        assert!(stripped[1].is_empty(), "placeholder-only route is dropped");
        assert!(stripped[2].is_empty());
        assert_eq!(stripped[3], vec![0, 3, 0]);
    }

    #[test]
    fn evaluation_scores_distance_and_overtime() {
        let inst = instance_with(vec![(30.0, 0.0, 1.0), (0.0, 40.0, 1.0)], 10.0, 1.2);
        let routes = vec![vec![0, 1, 0], vec![0, 2, 0], vec![]];
        let eval = evaluate(&routes, &inst);
        assert!((eval.cost - 140.0).abs() < 1e-9);
        // Tours of 60 resp. 80 units at speed 60 plus 0.1h unload return at
        // 1.1 and 80/60 + 0.1; only the second misses the 1.2h closing time.
        let expected_overtime: f64 = 80.0 / 60.0 + 0.1 - 1.2;
        assert!(eval.overtime > 0.0);
        assert!((eval.overtime - expected_overtime).abs() < 1e-9);
        assert!(!eval.within_hours());
        assert!((eval.penalized() - (eval.cost + OVERTIME_PENALTY * eval.overtime)).abs() < 1e-9);

        let relaxed = instance_with(vec![(30.0, 0.0, 1.0), (0.0, 40.0, 1.0)], 10.0, 8.0);
        let on_time = evaluate(&routes, &relaxed);
        assert_eq!(on_time.overtime, 0.0);
        assert!(on_time.within_hours());
        assert_eq!(on_time.penalized(), on_time.cost);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Assembled routes serve every member once, respect per-trip capacity
        /// and structural rules, and survive a full feasibility check.
        #[test]
        fn assembled_routes_are_structurally_sound(
            specs in proptest::collection::vec((-9.0f64..9.0, -9.0f64..9.0, 0.5f64..6.0), 1..12),
            capacity in 6.0f64..12.0,
        ) {
            let inst = instance_with(specs, capacity, 1000.0);
            let sc = Scenario::real_only(&inst);
            let nodes: Vec<crate::cluster::ClusterNode> = (1..=inst.num_requests())
                .map(|i| crate::cluster::ClusterNode {
                    request_index: i,
                    location: inst.location_of(i),
                    weight: inst.size_of(i),
                    fixed_to: None,
                })
                .collect();
            let forest = crate::cluster::cluster(&nodes, inst.depot, capacity).unwrap();
            let fixed = vec![vec![0]; inst.fleet_size];
            let routes = assemble_routes(&sc, &forest.trees, &fixed, capacity);
            let solution = to_solution(&routes, &inst).unwrap();
            let revealed: Vec<usize> = (1..=inst.num_requests()).collect();
            prop_assert!(check_feasibility(&solution, &inst, &revealed).is_ok());
        }

        /// Removing placeholder stops and re-linking the remaining legs
        /// directly never lengthens a route (triangle inequality).
        #[test]
        fn stripping_never_increases_route_length(
            specs in proptest::collection::vec((-9.0f64..9.0, -9.0f64..9.0, 0.5f64..3.0), 2..6),
            art in proptest::collection::vec((-9.0f64..9.0, -9.0f64..9.0), 1..5),
            order in proptest::collection::vec(0usize..100, 3..9),
        ) {
            let inst = instance_with(specs, 50.0, 1000.0);
            let m = inst.num_requests();
            let artificial: Vec<Request> = art
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| Request {
                    id: m + 1 + i,
                    location: Point::new(x, y),
                    size: 1.0,
                    unload_time: 0.0,
                    arrival_time: 0.0,
                })
                .collect();
            let sc = Scenario::new(&inst, artificial);
            let total = sc.total_count();
            // A route visiting an arbitrary mix of real and placeholder stops.
            let mut route = vec![0];
            route.extend(order.iter().map(|&o| o % (total + 1)));
            route.push(0);
            let full_len: f64 = route.windows(2).map(|w| sc.dist(w[0], w[1])).sum();
            let stripped = &strip_artificial(&[route], m)[0];
            let stripped_len: f64 = stripped.windows(2).map(|w| sc.dist(w[0], w[1])).sum();
            prop_assert!(stripped_len <= full_len + 1e-9);
        }

        /// Stripping placeholders twice changes nothing more than once.
        #[test]
        fn stripping_is_idempotent(
            raw in proptest::collection::vec(
                proptest::collection::vec(0usize..12, 0..10),
                0..5,
            ),
        ) {
            // Make each non-empty row depot-terminated like a real route.
            let routes: Vec<Vec<usize>> = raw
                .into_iter()
                .map(|mut r| {
                    if !r.is_empty() {
                        r.insert(0, 0);
                        r.push(0);
                    }
                    r
                })
                .collect();
            let once = strip_artificial(&routes, 6);
            let twice = strip_artificial(&once, 6);
            prop_assert_eq!(once, twice);
        }
    }
}
