//! Particle swarm optimizer over the cluster-center assignment encoding.
//!
//! A particle is a flat vector of (x, y) cluster centers, a fixed number per
//! active vehicle. Decoding sends every movable request to its nearest center,
//! builds each vehicle's route behind its committed stops with greedy depot
//! reloads, polishes the movable part with 2-OPT and scores the plan with an
//! overtime penalty. Velocities follow the standard attraction/inertia rule
//! with componentwise uniform draws; positions are unbounded because decoding
//! is total. A route-order encoding exists as an optional second phase but is
//! off by default: the assignment phase buys more quality per evaluation.

use crate::assemble::{evaluate, extend_with_reloads, open_trip_load};
use crate::local_search::{two_opt, MutableRoute};
use crate::model::{distance, Instance, Point};
use rand::Rng;

/// Seeded particles are jittered by this fraction of the bounding-rectangle
/// diagonal, so "near the seed" scales with the instance.
pub const SEED_JITTER_FRACTION: f64 = 0.05;

/// Which particles a particle learns from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    /// Every particle sees the swarm-wide best.
    Global,
    /// Each particle sees itself and its two index neighbors (cyclic).
    Ring,
}

#[derive(Debug, Clone)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    /// Attraction toward the neighborhood best; uniform draw upper bound.
    pub g: f64,
    /// Attraction toward the particle's own best; uniform draw upper bound.
    pub l: f64,
    /// Inertia weight on the previous velocity.
    pub a: f64,
    pub neighborhood: Neighborhood,
    pub centers_per_vehicle: usize,
    /// Run the per-vehicle route-order phase after the assignment phase.
    pub order_phase: bool,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm_size: 4,
            iterations: 28,
            g: 1.4,
            l: 1.4,
            a: 0.63,
            neighborhood: Neighborhood::Global,
            centers_per_vehicle: 1,
            order_phase: false,
        }
    }
}

impl PsoParams {
    fn assert_valid(&self) {
        assert!(self.swarm_size >= 1 && self.iterations >= 1);
        assert!(self.g >= 0.0 && self.l >= 0.0 && self.a >= 0.0);
        assert!(self.centers_per_vehicle >= 1);
    }
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_value: f64,
}

impl Particle {
    fn at_rest(position: Vec<f64>) -> Self {
        let dims = position.len();
        Particle {
            best_position: position.clone(),
            position,
            velocity: vec![0.0; dims],
            best_value: f64::INFINITY,
        }
    }
}

/// New velocity from the attraction/inertia rule with explicit draw vectors:
/// `v'[d] = u_neigh[d]·(nbest[d] − x[d]) + u_local[d]·(pbest[d] − x[d]) + a·v[d]`.
pub fn velocity_step(
    velocity: &[f64],
    position: &[f64],
    nbest: &[f64],
    pbest: &[f64],
    u_neigh: &[f64],
    u_local: &[f64],
    a: f64,
) -> Vec<f64> {
    (0..velocity.len())
        .map(|d| {
            u_neigh[d] * (nbest[d] - position[d])
                + u_local[d] * (pbest[d] - position[d])
                + a * velocity[d]
        })
        .collect()
}

fn uniform_vec(rng: &mut impl Rng, dims: usize, hi: f64) -> Vec<f64> {
    (0..dims).map(|_| rng.gen_range(0.0..=hi)).collect()
}

/// Index of each particle's neighborhood-best under the given topology,
/// computed from the current personal bests.
fn neighborhood_best(swarm: &[Particle], topology: Neighborhood) -> Vec<usize> {
    let n = swarm.len();
    let best_of = |candidates: &mut dyn Iterator<Item = usize>| {
        candidates
            .min_by(|&a, &b| swarm[a].best_value.partial_cmp(&swarm[b].best_value).unwrap())
            .unwrap()
    };
    match topology {
        Neighborhood::Global => {
            let g = best_of(&mut (0..n));
            vec![g; n]
        }
        Neighborhood::Ring => (0..n)
            .map(|i| best_of(&mut [(i + n - 1) % n, i, (i + 1) % n].into_iter()))
            .collect(),
    }
}

/// One synchronous swarm iteration: snapshot the neighborhood bests, then move
/// and re-evaluate every particle. For each particle the neighborhood draw
/// vector is taken first, the personal one second; best updates happen at the
/// end of the particle's own evaluation, so results do not depend on how
/// evaluations would be scheduled.
pub fn pso_step(
    swarm: &mut [Particle],
    params: &PsoParams,
    objective: &mut impl FnMut(&[f64]) -> f64,
    rng: &mut impl Rng,
) {
    let nbest_idx = neighborhood_best(swarm, params.neighborhood);
    let nbest_pos: Vec<Vec<f64>> =
        nbest_idx.iter().map(|&i| swarm[i].best_position.clone()).collect();
    for (i, particle) in swarm.iter_mut().enumerate() {
        let dims = particle.position.len();
        let u_neigh = uniform_vec(rng, dims, params.g);
        let u_local = uniform_vec(rng, dims, params.l);
        particle.velocity = velocity_step(
            &particle.velocity,
            &particle.position,
            &nbest_pos[i],
            &particle.best_position,
            &u_neigh,
            &u_local,
            params.a,
        );
        for d in 0..dims {
            particle.position[d] += particle.velocity[d];
        }
        let value = objective(&particle.position);
        if value < particle.best_value {
            particle.best_value = value;
            particle.best_position = particle.position.clone();
        }
    }
}

/// Ranks indices by ascending value; equal values keep ascending index order.
pub fn decode_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

/// The assignment search space: positions are flattened (x, y) centers,
/// `centers_per_vehicle` of them for each active vehicle in order.
pub struct AssignmentEncoding<'a> {
    pub instance: &'a Instance,
    pub movable: &'a [usize],
    pub fixed: &'a [Vec<usize>],
    pub active_vehicles: &'a [usize],
    pub centers_per_vehicle: usize,
}

impl AssignmentEncoding<'_> {
    pub fn dims(&self) -> usize {
        2 * self.centers_per_vehicle * self.active_vehicles.len()
    }

    /// Decodes a position into per-vehicle stop sequences. Total on all real
    /// vectors: degenerate centers simply attract everything to the lowest
    /// center index.
    pub fn decode(&self, position: &[f64]) -> Vec<Vec<usize>> {
        debug_assert_eq!(position.len(), self.dims());
        let k = self.centers_per_vehicle;
        let slots = self.active_vehicles.len();
        let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); slots];
        for &req in self.movable {
            let loc = self.instance.location_of(req);
            let mut best_center = 0usize;
            let mut best_dist = f64::INFINITY;
            for (c, xy) in position.chunks_exact(2).enumerate() {
                let d = distance(loc, Point::new(xy[0], xy[1]));
                if d < best_dist {
                    best_dist = d;
                    best_center = c;
                }
            }
            assigned[best_center / k].push(req);
        }

        let mut routes: Vec<Vec<usize>> = self.fixed.to_vec();
        for (slot, &v) in self.active_vehicles.iter().enumerate() {
            let route = &mut routes[v];
            let mut trip_load = open_trip_load(route, |s| self.instance.size_of(s));
            extend_with_reloads(
                route,
                &mut trip_load,
                assigned[slot].iter().copied(),
                |s| self.instance.size_of(s),
                self.instance.capacity,
            );
        }
        for (v, route) in routes.iter_mut().enumerate() {
            if route.len() <= 1 {
                route.clear();
                continue;
            }
            if route.last() != Some(&0) {
                route.push(0);
            }
            let fpl = self.fixed[v].len().max(1);
            if route.len() > fpl + 1 {
                let polished = two_opt(MutableRoute::new(std::mem::take(route), fpl), &|a, b| {
                    distance(self.instance.location_of(a), self.instance.location_of(b))
                });
                *route = polished.stops;
            }
        }
        routes
    }
}

/// Result of a swarm run: the best plan ever evaluated, its penalized value,
/// and that value after initialization and after each iteration.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub routes: Vec<Vec<usize>>,
    pub value: f64,
    pub trace: Vec<f64>,
}

/// Committed routes closed at the depot, with unused vehicles left empty.
fn closed_fixed(fixed: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fixed
        .iter()
        .map(|f| {
            if f.len() <= 1 {
                Vec::new()
            } else {
                let mut r = f.clone();
                if r.last() != Some(&0) {
                    r.push(0);
                }
                r
            }
        })
        .collect()
}

/// Center position representing one seed plan: each active vehicle's centers
/// sit at the centroid of the movable requests that plan gives the vehicle
/// (falling back to all its clients, then to the depot).
fn project_seed(
    seed: &[Vec<usize>],
    instance: &Instance,
    movable: &[usize],
    active: &[usize],
    k: usize,
) -> Vec<f64> {
    let mut is_movable = vec![false; instance.num_requests() + 1];
    for &r in movable {
        is_movable[r] = true;
    }
    let mut position = Vec::with_capacity(2 * k * active.len());
    for &v in active {
        let route: &[usize] = seed.get(v).map_or(&[], |r| r.as_slice());
        let centroid = |keep: &dyn Fn(usize) -> bool| -> Option<Point> {
            let pts: Vec<Point> = route
                .iter()
                .filter(|&&s| s != 0 && keep(s))
                .map(|&s| instance.location_of(s))
                .collect();
            if pts.is_empty() {
                return None;
            }
            let n = pts.len() as f64;
            Some(Point::new(
                pts.iter().map(|p| p.x).sum::<f64>() / n,
                pts.iter().map(|p| p.y).sum::<f64>() / n,
            ))
        };
        let center = centroid(&|s| is_movable[s])
            .or_else(|| centroid(&|_| true))
            .unwrap_or(instance.depot);
        for _ in 0..k {
            position.push(center.x);
            position.push(center.y);
        }
    }
    position
}

/// Runs the assignment-phase swarm (plus the optional order phase) and returns
/// the best plan found. Seeds are prior plans as per-vehicle stop sequences;
/// their scores enter best tracking directly, so the result can never be worse
/// than the best seed. Part of the swarm starts at jittered projections of the
/// seeds, the rest uniformly over the instance's bounding rectangle.
pub fn optimize_assignment(
    instance: &Instance,
    movable: &[usize],
    fixed: &[Vec<usize>],
    params: &PsoParams,
    seeds: &[Vec<Vec<usize>>],
    rng: &mut impl Rng,
) -> OptimizeOutcome {
    params.assert_valid();

    if movable.is_empty() {
        let routes = closed_fixed(fixed);
        let value = evaluate(&routes, instance).penalized();
        return OptimizeOutcome { routes, value, trace: vec![value; params.iterations + 1] };
    }

    // Only plans that serve every movable request may enter best tracking; a
    // stale seed that misses newly revealed requests would otherwise win on
    // cost simply by doing less work.
    let serves_all = |plan: &[Vec<usize>]| -> bool {
        let mut present = vec![false; instance.num_requests() + 1];
        for &s in plan.iter().flatten() {
            present[s] = true;
        }
        movable.iter().all(|&r| present[r])
    };
    let best = std::cell::RefCell::new((f64::INFINITY, closed_fixed(fixed)));
    for seed in seeds {
        if !serves_all(seed) {
            continue;
        }
        let value = evaluate(seed, instance).penalized();
        let mut b = best.borrow_mut();
        if value < b.0 {
            *b = (value, seed.clone());
        }
    }

    let mut active: Vec<usize> = (0..fixed.len())
        .filter(|&v| {
            fixed[v].len() > 1 || seeds.iter().any(|s| s.get(v).is_some_and(|r| !r.is_empty()))
        })
        .collect();
    if active.is_empty() {
        active.push(0);
    }
    let encoding = AssignmentEncoding {
        instance,
        movable,
        fixed,
        active_vehicles: &active,
        centers_per_vehicle: params.centers_per_vehicle,
    };
    let dims = encoding.dims();
    let rect = instance.bounding_rect();
    let jitter = SEED_JITTER_FRACTION * rect.diagonal();

    let seeded = if seeds.is_empty() { 0 } else { (params.swarm_size / 4).max(1) };
    let mut swarm: Vec<Particle> = (0..params.swarm_size)
        .map(|i| {
            let position = if i < seeded {
                let mut p = project_seed(
                    &seeds[i % seeds.len()],
                    instance,
                    movable,
                    &active,
                    params.centers_per_vehicle,
                );
                if i >= seeds.len() {
                    // Exact projections for the first pass over the seeds,
                    // jittered copies after that.
                    for x in &mut p {
                        *x += rng.gen_range(-jitter..=jitter);
                    }
                }
                p
            } else {
                (0..dims / 2)
                    .flat_map(|_| {
                        [
                            rng.gen_range(rect.x_min..=rect.x_max),
                            rng.gen_range(rect.y_min..=rect.y_max),
                        ]
                    })
                    .collect()
            };
            Particle::at_rest(position)
        })
        .collect();

    let mut objective = |position: &[f64]| -> f64 {
        let routes = encoding.decode(position);
        let value = evaluate(&routes, instance).penalized();
        let mut b = best.borrow_mut();
        if value < b.0 {
            *b = (value, routes);
        }
        value
    };

    for particle in &mut swarm {
        particle.best_value = objective(&particle.position);
    }
    let mut trace = Vec::with_capacity(params.iterations + 1);
    trace.push(best.borrow().0);
    for _ in 0..params.iterations {
        pso_step(&mut swarm, params, &mut objective, rng);
        trace.push(best.borrow().0);
    }

    let (mut best_value, mut best_routes) = best.into_inner();
    if params.order_phase {
        let (plan, value) = optimize_order(instance, movable, fixed, params, &best_routes, rng);
        if value < best_value {
            best_value = value;
            best_routes = plan;
        }
    }

    OptimizeOutcome { routes: best_routes, value: best_value, trace }
}

/// Per-vehicle route-order refinement: one real value per movable stop, the
/// visit order given by ranking the values. Scores are full-plan penalized
/// costs with only this vehicle's route rebuilt (no 2-OPT — the phase exists
/// to explore orders 2-OPT cannot reach).
fn optimize_order(
    instance: &Instance,
    movable: &[usize],
    fixed: &[Vec<usize>],
    params: &PsoParams,
    plan: &[Vec<usize>],
    rng: &mut impl Rng,
) -> (Vec<Vec<usize>>, f64) {
    let mut is_movable = vec![false; instance.num_requests() + 1];
    for &r in movable {
        is_movable[r] = true;
    }
    let best = std::cell::RefCell::new({
        let value = evaluate(plan, instance).penalized();
        (value, plan.to_vec())
    });

    for v in 0..plan.len() {
        // Each vehicle phase starts from the incumbent plan of the previous one.
        let base = best.borrow().1.clone();
        let stops: Vec<usize> =
            base[v].iter().copied().filter(|&s| s != 0 && is_movable[s]).collect();
        if stops.len() < 2 {
            continue;
        }
        let prefix: Vec<usize> = if v < fixed.len() { fixed[v].clone() } else { vec![0] };
        let rebuild = |order: &[usize]| -> Vec<Vec<usize>> {
            let mut route = prefix.clone();
            let mut load = open_trip_load(&route, |s| instance.size_of(s));
            extend_with_reloads(
                &mut route,
                &mut load,
                order.iter().map(|&i| stops[i]),
                |s| instance.size_of(s),
                instance.capacity,
            );
            route.push(0);
            let mut plan = base.clone();
            plan[v] = route;
            plan
        };

        let dims = stops.len();
        let mut swarm: Vec<Particle> = (0..params.swarm_size)
            .map(|i| {
                let position = if i == 0 {
                    // Current order as priorities: the incumbent is in the swarm.
                    (0..dims).map(|d| d as f64).collect()
                } else {
                    (0..dims).map(|_| rng.gen_range(0.0..=1.0)).collect()
                };
                Particle::at_rest(position)
            })
            .collect();
        let mut objective = |position: &[f64]| -> f64 {
            let candidate = rebuild(&decode_order(position));
            let value = evaluate(&candidate, instance).penalized();
            let mut b = best.borrow_mut();
            if value < b.0 {
                *b = (value, candidate);
            }
            value
        };
        for particle in &mut swarm {
            particle.best_value = objective(&particle.position);
        }
        for _ in 0..params.iterations {
            pso_step(&mut swarm, params, &mut objective, rng);
        }
    }
    let (value, plan) = best.into_inner();
    (plan, value)
}
