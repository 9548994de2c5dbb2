//! Fixed-prefix-aware 2-OPT for a single vehicle's route.
//!
//! The committed part of a route (depot start plus any stops the vehicle has
//! already departed toward) must not move; everything after it is improved by
//! repeatedly exchanging two edges and reversing the enclosed segment while
//! that strictly shortens the route. Multi-trip routes are optimized per trip:
//! a reversal never crosses an interior depot stop, which would scramble the
//! per-trip load accounting.

/// Minimum strict improvement for an exchange; guards against cycling on
/// degenerate geometry.
pub const IMPROVE_EPS: f64 = 1e-9;

/// A stop sequence whose first `fixed_prefix_len` entries are immovable.
#[derive(Debug, Clone, PartialEq)]
pub struct MutableRoute {
    pub stops: Vec<usize>,
    pub fixed_prefix_len: usize,
}

impl MutableRoute {
    pub fn new(stops: Vec<usize>, fixed_prefix_len: usize) -> Self {
        debug_assert!(fixed_prefix_len >= 1, "the depot start is always fixed");
        debug_assert!(fixed_prefix_len <= stops.len().saturating_sub(1));
        MutableRoute { stops, fixed_prefix_len }
    }

    /// Total length under a stop-index distance oracle.
    pub fn length(&self, dist: &impl Fn(usize, usize) -> f64) -> f64 {
        self.stops.windows(2).map(|w| dist(w[0], w[1])).sum()
    }
}

/// Client segments between depot stops: `(first, last)` positions, inclusive.
fn trips(stops: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, &s) in stops.iter().enumerate() {
        if s == 0 {
            if let Some(a) = start.take() {
                out.push((a, pos - 1));
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    // A well-formed route ends at the depot, so any trailing segment is closed.
    debug_assert!(start.is_none() || *stops.last().unwrap() != 0);
    out
}

/// Improves the route until no exchange helps; first-improvement scan order,
/// restarting after each full pass that changed something.
pub fn two_opt(mut route: MutableRoute, dist: &impl Fn(usize, usize) -> f64) -> MutableRoute {
    let fpl = route.fixed_prefix_len;
    let trip_spans = trips(&route.stops);
    loop {
        let mut improved = false;
        for &(a, b) in &trip_spans {
            if b < fpl {
                continue; // trip fully committed
            }
            let lo = a.max(fpl);
            let mut p1 = lo;
            while p1 <= b {
                // p2 may be the bounding depot position b+1: it then anchors
                // the exchange but is never moved by the reversal.
                let mut p2 = p1 + 1;
                while p2 <= b + 1 {
                    let s = &route.stops;
                    let current = dist(s[p1 - 1], s[p1]) + dist(s[p2 - 1], s[p2]);
                    let exchanged = dist(s[p1 - 1], s[p2 - 1]) + dist(s[p1], s[p2]);
                    if current - exchanged > IMPROVE_EPS {
                        route.stops[p1..p2].reverse();
                        improved = true;
                    }
                    p2 += 1;
                }
                p1 += 1;
            }
        }
        if !improved {
            return route;
        }
    }
}

/// True if some movable pair still admits an improving exchange — the
/// post-condition of `two_opt` is that this returns false.
pub fn improving_exchange_exists(
    stops: &[usize],
    fixed_prefix_len: usize,
    dist: &impl Fn(usize, usize) -> f64,
) -> bool {
    for (a, b) in trips(stops) {
        if b < fixed_prefix_len {
            continue;
        }
        let lo = a.max(fixed_prefix_len);
        for p1 in lo..=b {
            for p2 in (p1 + 1)..=(b + 1) {
                let current = dist(stops[p1 - 1], stops[p1]) + dist(stops[p2 - 1], stops[p2]);
                let exchanged = dist(stops[p1 - 1], stops[p2 - 1]) + dist(stops[p1], stops[p2]);
                if current - exchanged > IMPROVE_EPS {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{distance, Point};
    use proptest::prelude::*;

    fn oracle(points: Vec<Point>) -> impl Fn(usize, usize) -> f64 {
        move |a, b| distance(points[a], points[b])
    }

    /// Best length over all permutations of the movable suffix (per trip
    /// structure preserved by construction: single-trip inputs only).
    fn brute_force_best(stops: &[usize], fpl: usize, dist: &impl Fn(usize, usize) -> f64) -> f64 {
        fn permute(items: &mut Vec<usize>, k: usize, best: &mut f64, eval: &mut impl FnMut(&[usize]) -> f64) {
            if k == items.len() {
                let len = eval(items);
                if len < *best {
                    *best = len;
                }
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                permute(items, k + 1, best, eval);
                items.swap(k, i);
            }
        }
        let prefix = &stops[..fpl];
        let mut movable: Vec<usize> = stops[fpl..stops.len() - 1].to_vec();
        let mut best = f64::INFINITY;
        let mut eval = |mov: &[usize]| {
            let mut full: Vec<usize> = prefix.to_vec();
            full.extend_from_slice(mov);
            full.push(0);
            full.windows(2).map(|w| dist(w[0], w[1])).sum::<f64>()
        };
        permute(&mut movable, 0, &mut best, &mut eval);
        best
    }

    #[test]
    fn uncrosses_the_square_tour() {
        let points = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
        ];
        let dist = oracle(points);
        let route = MutableRoute::new(vec![0, 1, 2, 3, 0], 1);
        let before = route.length(&dist);
        assert!((before - (2.0 + 2.0 * std::f64::consts::SQRT_2)).abs() < 1e-9);
        let optimized = two_opt(route, &dist);
        assert_eq!(optimized.stops, vec![0, 1, 3, 2, 0]);
        let after = optimized.length(&dist);
        // Brute force over the 6 interior permutations confirms 4.0 is optimal.
        let best = brute_force_best(&optimized.stops, 1, &dist);
        assert!((after - 4.0).abs() < 1e-9, "got {after}");
        assert!((best - 4.0).abs() < 1e-9, "oracle said {best}");
    }

    #[test]
    fn convex_tour_is_untouched() {
        // Depot and clients all on one circle, visited in angular order: the
        // convex cycle is already 2-OPT optimal.
        let points: Vec<Point> = (0..7)
            .map(|k| {
                let ang = k as f64 / 7.0 * std::f64::consts::TAU;
                Point::new(5.0 * ang.cos(), 5.0 * ang.sin())
            })
            .collect();
        let dist = oracle(points);
        let route = MutableRoute::new(vec![0, 1, 2, 3, 4, 5, 6, 0], 1);
        let before = route.stops.clone();
        let optimized = two_opt(route, &dist);
        assert_eq!(optimized.stops, before);
    }

    #[test]
    fn all_but_one_fixed_means_no_exchange() {
        let points = vec![
            Point::new(0.0, 0.0),
            Point::new(5.0, 5.0),
            Point::new(-3.0, 1.0),
            Point::new(2.0, -4.0),
        ];
        let dist = oracle(points);
        let route = MutableRoute::new(vec![0, 1, 2, 3, 0], 3);
        let optimized = two_opt(route, &dist);
        assert_eq!(optimized.stops, vec![0, 1, 2, 3, 0]);
    }

    #[test]
    fn reversals_never_cross_a_reload_stop() {
        // Trip 1 is crossed and must be fixed within itself; swapping stops
        // between trips or reversing across the interior depot is illegal.
        let points = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(-5.0, 0.0),
            Point::new(-6.0, 0.0),
        ];
        let dist = oracle(points);
        let route = MutableRoute::new(vec![0, 1, 2, 3, 0, 4, 5, 0], 1);
        let optimized = two_opt(route, &dist);
        assert_eq!(&optimized.stops[4..], &[0, 4, 5, 0], "second trip must stay intact");
        assert_eq!(&optimized.stops[..4], &[0, 1, 3, 2], "first trip uncrossed in place");
    }

    #[test]
    fn committed_stops_keep_their_order() {
        // The prefix [0, 3, 1] is deliberately bad; only the suffix may move.
        let points = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(4.0, 0.0),
        ];
        let dist = oracle(points);
        let route = MutableRoute::new(vec![0, 3, 1, 4, 2, 0], 3);
        let optimized = two_opt(route, &dist);
        assert_eq!(&optimized.stops[..3], &[0, 3, 1]);
        assert!(optimized.length(&dist) <= MutableRoute::new(vec![0, 3, 1, 4, 2, 0], 3).length(&dist));
        assert!(!improving_exchange_exists(&optimized.stops, 3, &dist));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Output is locally optimal, no longer than the input, preserves the
        /// stop multiset and the fixed prefix, and never beats brute force.
        #[test]
        fn local_optimality_and_oracle(
            coords in proptest::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 2..7),
            fpl_extra in 0usize..3,
        ) {
            let mut points = vec![Point::new(0.0, 0.0)];
            points.extend(coords.iter().map(|&(x, y)| Point::new(x, y)));
            let n = coords.len();
            let dist = oracle(points);
            let mut stops: Vec<usize> = vec![0];
            stops.extend(1..=n);
            stops.push(0);
            let fpl = 1 + fpl_extra.min(n.saturating_sub(1));
            let input = MutableRoute::new(stops.clone(), fpl);
            let before = input.length(&dist);
            let out = two_opt(input, &dist);

            prop_assert!(out.length(&dist) <= before + 1e-12);
            prop_assert!(!improving_exchange_exists(&out.stops, fpl, &dist));
            prop_assert_eq!(&out.stops[..fpl], &stops[..fpl]);
            let mut sorted_in = stops.clone();
            let mut sorted_out = out.stops.clone();
            sorted_in.sort_unstable();
            sorted_out.sort_unstable();
            prop_assert_eq!(sorted_in, sorted_out);

            let best = brute_force_best(&stops, fpl, &dist);
            prop_assert!(out.length(&dist) >= best - 1e-9);
        }
    }
}
