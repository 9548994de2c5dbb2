//! The working day as discrete time slices.
//!
//! Between two slice boundaries the world is frozen: vehicles follow the
//! current plan, requests pile up unseen. At each boundary the simulator
//! reveals what arrived, walks every vehicle along its route — a stop becomes
//! committed the moment the vehicle departs its predecessor, and can then
//! never be moved again — and re-optimizes everything still open with a
//! portfolio of independent solver runs, keeping the cheapest feasible
//! candidate. Four strategies share this loop: the spanning-forest heuristic,
//! the same heuristic over sampled placeholder requests, a particle swarm over
//! cluster centers, and sampling before the no-more-requests instant with the
//! swarm after it.

use crate::assemble::{assemble_routes, strip_artificial, to_solution, Scenario};
use crate::cluster::{cluster, ClusterNode};
use crate::local_search::{two_opt, MutableRoute};
use crate::mc::{artificial_count, generate, GenerationContext};
use crate::model::{
    check_feasibility, schedule_with_releases, Instance, Route, Solution, FEAS_TOL,
};
use crate::pso::{optimize_assignment, PsoParams};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};
use thiserror::Error;

/// The four re-planning strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Spanning-forest heuristic on the revealed requests.
    Tree,
    /// Tree over the revealed requests plus sampled future ones.
    McTree,
    /// Particle swarm over cluster-center assignments, every slice.
    TwoMpso,
    /// McTree while requests may still appear, TwoMpso afterwards.
    McTreePso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Tree, Algorithm::McTree, Algorithm::TwoMpso, Algorithm::McTreePso];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Tree => "tree",
            Algorithm::McTree => "mctree",
            Algorithm::TwoMpso => "2mpso",
            Algorithm::McTreePso => "mctree-pso",
        };
        f.pad(s)
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" => Ok(Algorithm::Tree),
            "mctree" => Ok(Algorithm::McTree),
            "2mpso" => Ok(Algorithm::TwoMpso),
            "mctree-pso" | "mctree_pso" => Ok(Algorithm::McTreePso),
            other => Err(format!(
                "unknown algorithm '{other}' (expected tree, mctree, 2mpso or mctree-pso)"
            )),
        }
    }
}

/// Full configuration of one simulated day.
#[derive(Debug, Clone)]
pub struct StrategyConfig {
    pub algorithm: Algorithm,
    pub time_slices: usize,
    pub workers: usize,
    pub pso: PsoParams,
    /// Fraction of the day after which no new request appears.
    pub t_co: f64,
    pub seed: u64,
}

impl StrategyConfig {
    /// Published defaults: 200 slices for the heuristics, 40 for the swarm
    /// variants; 8 portfolio workers; 4 particles x 28 iterations for the
    /// all-day swarm, 7 x 49 for the half-day one.
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        let (time_slices, pso) = match algorithm {
            Algorithm::Tree | Algorithm::McTree => (200, PsoParams::default()),
            Algorithm::TwoMpso => {
                (40, PsoParams { swarm_size: 4, iterations: 28, ..PsoParams::default() })
            }
            Algorithm::McTreePso => {
                (40, PsoParams { swarm_size: 7, iterations: 49, ..PsoParams::default() })
            }
        };
        StrategyConfig { algorithm, time_slices, workers: 8, pso, t_co: 0.5, seed: 0 }
    }
}

/// One vehicle's committed stops and their arrival times. Index 0 is the
/// departure depot with arrival pinned to the day's opening time.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub fixed_stops: Vec<usize>,
    pub fixed_arrivals: Vec<f64>,
}

impl VehicleState {
    fn new(t_start: f64) -> Self {
        VehicleState { fixed_stops: vec![0], fixed_arrivals: vec![t_start] }
    }

    pub fn dispatched(&self) -> bool {
        self.fixed_stops.len() > 1
    }
}

/// Everything the dispatcher knows at an instant of the day.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub now: f64,
    /// `revealed[r]` for request index r (entry 0 unused).
    pub revealed: Vec<bool>,
    /// `served[r]`: service completed.
    pub served: Vec<bool>,
    pub vehicles: Vec<VehicleState>,
    /// Installed plan, one stop sequence per vehicle; empty = unused.
    pub current_plan: Vec<Vec<usize>>,
}

impl SimulationState {
    pub fn new(instance: &Instance) -> Self {
        let m = instance.num_requests();
        SimulationState {
            now: instance.t_start,
            revealed: vec![false; m + 1],
            served: vec![false; m + 1],
            vehicles: vec![VehicleState::new(instance.t_start); instance.fleet_size],
            current_plan: vec![Vec::new(); instance.fleet_size],
        }
    }

    pub fn revealed_list(&self) -> Vec<usize> {
        (1..self.revealed.len()).filter(|&r| self.revealed[r]).collect()
    }

    /// Marks requests that sit inside some committed prefix.
    fn fixed_requests(&self) -> Vec<bool> {
        let mut fixed = vec![false; self.revealed.len()];
        for vehicle in &self.vehicles {
            for &s in &vehicle.fixed_stops {
                if s != 0 {
                    fixed[s] = true;
                }
            }
        }
        fixed
    }

    /// Revealed requests that are neither served nor committed: the ones a
    /// re-planning step may still move.
    pub fn pending(&self) -> Vec<usize> {
        let fixed = self.fixed_requests();
        (1..self.revealed.len())
            .filter(|&r| self.revealed[r] && !self.served[r] && !fixed[r])
            .collect()
    }

    /// Committed-but-unserved stops, one per vehicle at most: the stop the
    /// vehicle is currently driving to or unloading at. New clusters grow
    /// around these.
    pub fn anchors(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (v, vehicle) in self.vehicles.iter().enumerate() {
            let unserved: Vec<usize> = vehicle
                .fixed_stops
                .iter()
                .copied()
                .filter(|&s| s != 0 && !self.served[s])
                .collect();
            debug_assert!(
                unserved.len() <= 1,
                "committing a stop implies its predecessor finished service"
            );
            if let Some(&r) = unserved.first() {
                out.push((r, v));
            }
        }
        out
    }

    fn committed_routes(&self) -> Vec<Vec<usize>> {
        self.vehicles.iter().map(|v| v.fixed_stops.clone()).collect()
    }
}

/// Moves the clock to `t_next`: reveals requests with arrival up to and
/// including that instant, commits every stop some vehicle departs toward by
/// then, and marks completed services. Nothing is ever un-committed.
pub fn advance_to(state: &mut SimulationState, t_next: f64, instance: &Instance) {
    assert!(t_next >= state.now, "time goes forward");
    for r in 1..=instance.num_requests() {
        if !state.revealed[r] && instance.release_of(r) <= t_next {
            state.revealed[r] = true;
        }
    }
    for (v, vehicle) in state.vehicles.iter_mut().enumerate() {
        let plan = &state.current_plan[v];
        if plan.is_empty() {
            continue;
        }
        debug_assert!(
            plan.starts_with(&vehicle.fixed_stops),
            "installed plans must extend the committed prefix"
        );
        let schedule = schedule_with_releases(plan, instance);
        let mut k = vehicle.fixed_stops.len();
        while k < plan.len() {
            let departure = schedule[k - 1] + instance.unload_of(plan[k - 1]);
            if departure <= t_next {
                vehicle.fixed_stops.push(plan[k]);
                vehicle.fixed_arrivals.push(schedule[k]);
                k += 1;
            } else {
                break;
            }
        }
        for j in 1..vehicle.fixed_stops.len() {
            let s = vehicle.fixed_stops[j];
            if s != 0 && !state.served[s] {
                if vehicle.fixed_arrivals[j] + instance.unload_of(s) <= t_next {
                    state.served[s] = true;
                }
            }
        }
    }
    state.now = t_next;
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no feasible plan at slice {slice} (t = {now:.4}): {detail}")]
    NoFeasiblePlan { slice: usize, now: f64, detail: String },
    #[error("executed day is infeasible: {detail}")]
    InfeasibleDay { detail: String },
}

/// One line of the per-slice log.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRecord {
    pub slice: usize,
    pub now: f64,
    pub revealed: usize,
    pub artificial: usize,
    /// Winning worker index; equals the worker count when the fallback plan
    /// had to be used.
    pub best_worker: usize,
    pub best_cost: f64,
    pub used_fallback: bool,
}

impl fmt::Display for SliceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "slice={} now={:.4} revealed={} artificial={} best_worker={} best_cost={:.4}{}",
            self.slice,
            self.now,
            self.revealed,
            self.artificial,
            self.best_worker,
            self.best_cost,
            if self.used_fallback { " fallback" } else { "" }
        )
    }
}

/// Cost and feasibility of one worker's candidate plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSummary {
    pub cost: f64,
    pub feasible: bool,
}

fn worker_rng(seed: u64, slice: usize, workers: usize, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((slice as u64) * (workers as u64) + worker as u64);
    rng
}

/// Spanning-forest construction for one worker: cluster all open requests
/// (anchored at in-transit stops, optionally padded with sampled placeholder
/// requests), expand to routes, improve each route's open part with 2-OPT,
/// then drop the placeholders.
fn heuristic_routes(
    state: &SimulationState,
    scenario: &Scenario,
    shuffle: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let instance = scenario.instance;
    let mut nodes = Vec::new();
    for (r, v) in state.anchors() {
        nodes.push(ClusterNode {
            request_index: r,
            location: instance.location_of(r),
            weight: instance.size_of(r),
            fixed_to: Some(v),
        });
    }
    for r in state.pending() {
        nodes.push(ClusterNode {
            request_index: r,
            location: instance.location_of(r),
            weight: instance.size_of(r),
            fixed_to: None,
        });
    }
    for a in instance.num_requests() + 1..=scenario.total_count() {
        nodes.push(ClusterNode {
            request_index: a,
            location: scenario.location_of(a),
            weight: scenario.size_of(a),
            fixed_to: None,
        });
    }
    let forest = cluster(&nodes, instance.depot, instance.capacity)
        .expect("loaded instances cap request sizes at vehicle capacity");
    let mut trees = forest.trees;
    if shuffle {
        for tree in &mut trees {
            tree.members.shuffle(rng);
        }
    }
    let fixed = state.committed_routes();
    let mut routes = assemble_routes(scenario, &trees, &fixed, instance.capacity);
    for (v, route) in routes.iter_mut().enumerate() {
        let fpl = fixed[v].len();
        if route.len() > fpl + 1 {
            let polished = two_opt(MutableRoute::new(std::mem::take(route), fpl), &|a, b| {
                scenario.dist(a, b)
            });
            *route = polished.stops;
        }
    }
    strip_artificial(&routes, instance.num_requests())
}

fn candidate_summary(
    routes: &[Vec<usize>],
    instance: &Instance,
    revealed: &[usize],
) -> CandidateSummary {
    match to_solution(routes, instance) {
        Ok(solution) => CandidateSummary {
            cost: solution.total_cost,
            feasible: check_feasibility(&solution, instance, revealed).is_ok(),
        },
        Err(_) => CandidateSummary { cost: f64::INFINITY, feasible: false },
    }
}

/// True if a single route respects per-trip capacity and returns by closing
/// time; the structural and serve-once rules are handled by construction.
fn route_ok(stops: &[usize], instance: &Instance) -> bool {
    let mut trip = 0.0;
    for &s in stops {
        if s == 0 {
            trip = 0.0;
        } else {
            trip += instance.size_of(s);
            if trip > instance.capacity + FEAS_TOL {
                return false;
            }
        }
    }
    let arrivals = schedule_with_releases(stops, instance);
    arrivals.last().map_or(true, |&back| back <= instance.t_end + FEAS_TOL)
}

/// Cheapest-insertion repair of the previous plan: each still-open request is
/// inserted at the position (over all vehicles, committed prefixes excluded)
/// that adds the least distance while keeping the route feasible. If no
/// position keeps the day's end, the cheapest capacity-respecting position is
/// taken anyway and the caller's feasibility check decides.
fn fallback_plan(state: &SimulationState, instance: &Instance) -> Vec<Vec<usize>> {
    let fleet = instance.fleet_size;
    let mut plan: Vec<Vec<usize>> = (0..fleet)
        .map(|v| {
            let committed = &state.vehicles[v].fixed_stops;
            let existing = &state.current_plan[v];
            if !existing.is_empty() {
                existing.clone()
            } else if committed.len() > 1 {
                let mut r = committed.clone();
                if r.last() != Some(&0) {
                    r.push(0);
                }
                r
            } else {
                Vec::new()
            }
        })
        .collect();

    let mut present = vec![false; instance.num_requests() + 1];
    for &s in plan.iter().flatten() {
        present[s] = true;
    }
    let missing: Vec<usize> =
        state.pending().into_iter().filter(|&r| !present[r]).collect();

    for r in missing {
        let mut best: Option<(f64, usize, usize, Vec<usize>)> = None;
        let mut best_relaxed: Option<(f64, usize, usize, Vec<usize>)> = None;
        for v in 0..fleet {
            let base: Vec<usize> =
                if plan[v].is_empty() { vec![0, 0] } else { plan[v].clone() };
            let lo = state.vehicles[v].fixed_stops.len().max(1);
            for p in lo..=base.len() {
                let mut candidate = base.clone();
                candidate.insert(p.min(candidate.len()), r);
                if candidate.last() != Some(&0) {
                    candidate.push(0);
                }
                let mut capacity_ok = true;
                let mut trip = 0.0;
                for &s in &candidate {
                    if s == 0 {
                        trip = 0.0;
                    } else {
                        trip += instance.size_of(s);
                        if trip > instance.capacity + FEAS_TOL {
                            capacity_ok = false;
                            break;
                        }
                    }
                }
                if !capacity_ok {
                    continue;
                }
                let delta = crate::model::route_cost(&candidate, instance)
                    - crate::model::route_cost(&base, instance);
                let entry = (delta, v, p, candidate.clone());
                if best_relaxed.as_ref().is_none_or(|b| delta < b.0) {
                    best_relaxed = Some(entry.clone());
                }
                if route_ok(&candidate, instance)
                    && best.as_ref().is_none_or(|b| delta < b.0)
                {
                    best = Some(entry);
                }
            }
        }
        if let Some((_, v, _, candidate)) = best.or(best_relaxed) {
            plan[v] = candidate;
        }
    }
    plan
}

/// Re-plans everything uncommitted at the current instant with
/// `cfg.workers` independent runs and returns the winner plus per-worker
/// summaries. `slice_idx` selects the deterministic random stream of each
/// worker, so outcomes do not depend on scheduling.
pub fn run_slice_detailed(
    state: &SimulationState,
    instance: &Instance,
    cfg: &StrategyConfig,
    slice_idx: usize,
) -> Result<(Vec<Vec<usize>>, SliceRecord, Vec<CandidateSummary>), SimError> {
    let revealed = state.revealed_list();
    let cutoff = instance.cutoff_time(cfg.t_co);
    let sampling_phase = state.now < cutoff;
    let use_mc = match cfg.algorithm {
        Algorithm::Tree | Algorithm::TwoMpso => false,
        Algorithm::McTree | Algorithm::McTreePso => sampling_phase,
    };
    let use_pso = match cfg.algorithm {
        Algorithm::Tree | Algorithm::McTree => false,
        Algorithm::TwoMpso => true,
        Algorithm::McTreePso => !sampling_phase,
    };

    let gen_ctx = use_mc.then(|| GenerationContext::from_revealed(instance, &revealed, state.now, cfg.t_co));
    let artificial = gen_ctx
        .as_ref()
        .map(|ctx| artificial_count(ctx).expect("generation inside its time window"))
        .unwrap_or(0);

    let candidates: Vec<Vec<Vec<usize>>> = if use_pso {
        // Deterministic warm starts shared by every worker: the plan carried
        // over from the previous slice and a fresh forest-heuristic solve.
        let mut no_draws = ChaCha8Rng::seed_from_u64(0);
        let tree_seed =
            heuristic_routes(state, &Scenario::real_only(instance), false, &mut no_draws);
        let seeds = vec![state.current_plan.clone(), tree_seed];
        let pending = state.pending();
        let fixed = state.committed_routes();
        (0..cfg.workers)
            .into_par_iter()
            .map(|w| {
                let mut rng = worker_rng(cfg.seed, slice_idx, cfg.workers, w);
                optimize_assignment(instance, &pending, &fixed, &cfg.pso, &seeds, &mut rng)
                    .routes
            })
            .collect()
    } else {
        (0..cfg.workers)
            .into_par_iter()
            .map(|w| {
                let mut rng = worker_rng(cfg.seed, slice_idx, cfg.workers, w);
                let scenario = match &gen_ctx {
                    Some(ctx) => {
                        let sampled =
                            generate(ctx, &mut rng).expect("generation inside its time window");
                        Scenario::new(instance, sampled)
                    }
                    None => Scenario::real_only(instance),
                };
                heuristic_routes(state, &scenario, w > 0, &mut rng)
            })
            .collect()
    };

    let summaries: Vec<CandidateSummary> =
        candidates.iter().map(|c| candidate_summary(c, instance, &revealed)).collect();
    let winner = summaries
        .iter()
        .enumerate()
        .filter(|(_, s)| s.feasible)
        .min_by(|(wa, a), (wb, b)| a.cost.partial_cmp(&b.cost).unwrap().then(wa.cmp(wb)))
        .map(|(w, _)| w);

    let (routes, record) = match winner {
        Some(w) => (
            candidates[w].clone(),
            SliceRecord {
                slice: slice_idx,
                now: state.now,
                revealed: revealed.len(),
                artificial,
                best_worker: w,
                best_cost: summaries[w].cost,
                used_fallback: false,
            },
        ),
        None => {
            let repair = fallback_plan(state, instance);
            let summary = candidate_summary(&repair, instance, &revealed);
            if !summary.feasible {
                let detail = to_solution(&repair, instance)
                    .map(|s| {
                        check_feasibility(&s, instance, &revealed)
                            .err()
                            .map_or_else(|| "unknown".to_string(), |v| v.to_string())
                    })
                    .unwrap_or_else(|e| e.to_string());
                return Err(SimError::NoFeasiblePlan { slice: slice_idx, now: state.now, detail });
            }
            (
                repair,
                SliceRecord {
                    slice: slice_idx,
                    now: state.now,
                    revealed: revealed.len(),
                    artificial,
                    best_worker: cfg.workers,
                    best_cost: summary.cost,
                    used_fallback: true,
                },
            )
        }
    };
    Ok((routes, record, summaries))
}

/// `run_slice_detailed` without the per-worker summaries.
pub fn run_slice(
    state: &SimulationState,
    instance: &Instance,
    cfg: &StrategyConfig,
    slice_idx: usize,
) -> Result<(Vec<Vec<usize>>, SliceRecord), SimError> {
    run_slice_detailed(state, instance, cfg, slice_idx).map(|(r, rec, _)| (r, rec))
}

/// Outcome of one simulated day.
#[derive(Debug, Clone)]
pub struct DayResult {
    /// The executed routes, exactly as committed.
    pub solution: Solution,
    pub log: Vec<SliceRecord>,
    pub wall_time: Duration,
}

impl DayResult {
    pub fn cost(&self) -> f64 {
        self.solution.total_cost
    }
}

/// Simulates a full day: optimize at every slice boundary, drive the fleet
/// between boundaries, verify the executed routes at the end.
pub fn run_day(instance: &Instance, cfg: &StrategyConfig) -> Result<DayResult, SimError> {
    assert!(cfg.time_slices >= 1 && cfg.workers >= 1);
    let start = Instant::now();
    let mut state = SimulationState::new(instance);
    let mut log = Vec::with_capacity(cfg.time_slices);
    let day = instance.day_length();
    for k in 0..cfg.time_slices {
        let tau = instance.t_start + (k as f64) * day / (cfg.time_slices as f64);
        advance_to(&mut state, tau, instance);
        let (winner, record) = run_slice(&state, instance, cfg, k)?;
        log.push(record);
        state.current_plan = winner;
    }
    advance_to(&mut state, instance.t_end, instance);

    let mut routes = Vec::new();
    for (v, vehicle) in state.vehicles.iter().enumerate() {
        if !vehicle.dispatched() {
            continue;
        }
        routes.push(Route {
            vehicle: v,
            stops: vehicle.fixed_stops.clone(),
            arrivals: vehicle.fixed_arrivals.clone(),
        });
    }
    let solution = Solution::from_routes(routes, instance)
        .map_err(|e| SimError::InfeasibleDay { detail: e.to_string() })?;
    let all: Vec<usize> = (1..=instance.num_requests()).collect();
    check_feasibility(&solution, instance, &all)
        .map_err(|v| SimError::InfeasibleDay { detail: v.to_string() })?;
    debug_assert!((1..=instance.num_requests()).all(|r| state.served[r]));

    Ok(DayResult { solution, log, wall_time: start.elapsed() })
}
