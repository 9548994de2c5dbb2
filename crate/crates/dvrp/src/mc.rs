//! Monte Carlo generation of artificial future requests.
//!
//! Before the cut-off time the optimizer pads the known request set with
//! synthetic ones so that routes keep slack for demand that is yet to appear.
//! The number generated shrinks linearly-in-ratio as the day progresses and
//! reaches zero exactly at the cut-off instant; sizes are resampled from the
//! known requests, locations are uniform on the instance's bounding rectangle
//! and unload times take the mean of the known ones.

use crate::model::{Instance, Point, Rect, Request, FEAS_TOL};
use rand::Rng;
use thiserror::Error;

/// Everything the generator needs to know about the frozen moment `now`.
#[derive(Debug, Clone)]
pub struct GenerationContext {
    /// Sizes of all requests known at `now` (sampling pool).
    pub known_sizes: Vec<f64>,
    /// Spatial envelope over the full instance, computed once at load time.
    pub bounding_rect: Rect,
    /// Mean unload time of the known requests.
    pub mean_unload: f64,
    /// The frozen instant.
    pub now: f64,
    /// Number of requests known at `now`.
    pub m_t: usize,
    pub t_co: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// First id of the reserved artificial range (disjoint from real ids).
    pub artificial_id_base: usize,
}

impl GenerationContext {
    /// Builds a context from the revealed request indices of an instance.
    pub fn from_revealed(
        instance: &Instance,
        revealed: &[usize],
        now: f64,
        t_co: f64,
    ) -> GenerationContext {
        let known_sizes: Vec<f64> =
            revealed.iter().map(|&i| instance.requests[i - 1].size).collect();
        let mean_unload = if revealed.is_empty() {
            0.0
        } else {
            revealed.iter().map(|&i| instance.requests[i - 1].unload_time).sum::<f64>()
                / revealed.len() as f64
        };
        GenerationContext {
            m_t: known_sizes.len(),
            known_sizes,
            bounding_rect: instance.bounding_rect(),
            mean_unload,
            now,
            t_co,
            t_start: instance.t_start,
            t_end: instance.t_end,
            artificial_id_base: instance.num_requests() + 1,
        }
    }

    fn cutoff_time(&self) -> f64 {
        self.t_co * (self.t_end - self.t_start) + self.t_start
    }
}

/// Contract violations of the generator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("generation requested at {now} but the cut-off instant is {cutoff}")]
    BeyondCutoff { now: f64, cutoff: f64 },
    #[error("generation requested at {now} before the working day starts at {t_start}")]
    BeforeDayStart { now: f64, t_start: f64 },
    #[error("no known request sizes to sample from")]
    EmptySizePool,
}

/// How many artificial requests to generate at `ctx.now`.
///
/// Evaluates `m_t · (cutoff − now) / (cutoff − 2·t_start + now)` — equal to
/// `m_t` at day start, zero at the cut-off instant — rounded half up.
pub fn artificial_count(ctx: &GenerationContext) -> Result<usize, GenerationError> {
    let cutoff = ctx.cutoff_time();
    if ctx.now > cutoff + FEAS_TOL {
        return Err(GenerationError::BeyondCutoff { now: ctx.now, cutoff });
    }
    if ctx.now < ctx.t_start - FEAS_TOL {
        return Err(GenerationError::BeforeDayStart { now: ctx.now, t_start: ctx.t_start });
    }
    // numerator = T_CO·(t_end − t_start) + t_start − now, kept in the exact
    // association used to define the cut-off instant so the endpoints are
    // integer-exact; denominator is the mirrored expression and is strictly
    // positive for now ≥ t_start.
    let numerator = (cutoff - ctx.now).max(0.0);
    let denominator = (ctx.t_co * (ctx.t_end - ctx.t_start) - ctx.t_start) + ctx.now;
    let raw = ctx.m_t as f64 * numerator / denominator;
    Ok((raw + 0.5).floor() as usize)
}

/// Generates the artificial requests for this moment. Draws, per request:
/// size index, x, y — in that order, so output is a pure function of
/// (context, rng state). Generating zero requests consumes no randomness.
pub fn generate<R: Rng>(
    ctx: &GenerationContext,
    rng: &mut R,
) -> Result<Vec<Request>, GenerationError> {
    let count = artificial_count(ctx)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if ctx.known_sizes.is_empty() {
        return Err(GenerationError::EmptySizePool);
    }
    let rect = ctx.bounding_rect;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let size = ctx.known_sizes[rng.gen_range(0..ctx.known_sizes.len())];
        let x = rng.gen_range(rect.x_min..=rect.x_max);
        let y = rng.gen_range(rect.y_min..=rect.y_max);
        out.push(Request {
            id: ctx.artificial_id_base + i,
            location: Point::new(x, y),
            size,
            unload_time: ctx.mean_unload,
            arrival_time: ctx.now,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(now: f64, m_t: usize) -> GenerationContext {
        GenerationContext {
            known_sizes: vec![1.0; m_t],
            bounding_rect: Rect { x_min: 0.0, x_max: 10.0, y_min: 0.0, y_max: 10.0 },
            mean_unload: 2.5,
            now,
            m_t,
            t_co: 0.5,
            t_start: 0.0,
            t_end: 100.0,
            artificial_id_base: 1000,
        }
    }

    #[test]
    fn count_formula_endpoints_and_midpoint() {
        assert_eq!(artificial_count(&ctx(0.0, 30)).unwrap(), 30);
        assert_eq!(artificial_count(&ctx(50.0, 30)).unwrap(), 0);
        // 30 · (50 − 25) / (50 + 25) = 10
        assert_eq!(artificial_count(&ctx(25.0, 30)).unwrap(), 10);
    }

    #[test]
    fn count_rounds_half_up() {
        // 3 · 25/75 = 1.0; 5 · 25/75 = 1.666 → 2; 7 · (50−30)/(50+30) = 1.75 → 2;
        // 2 · (50−30)/(50+30) = 0.5 → rounds up to 1.
        assert_eq!(artificial_count(&ctx(25.0, 3)).unwrap(), 1);
        assert_eq!(artificial_count(&ctx(25.0, 5)).unwrap(), 2);
        assert_eq!(artificial_count(&ctx(30.0, 7)).unwrap(), 2);
        assert_eq!(artificial_count(&ctx(30.0, 2)).unwrap(), 1);
    }

    #[test]
    fn beyond_cutoff_is_a_contract_error() {
        assert!(matches!(
            artificial_count(&ctx(50.1, 30)),
            Err(GenerationError::BeyondCutoff { .. })
        ));
    }

    #[test]
    fn generate_at_cutoff_is_empty_and_draws_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let before: u64 = rng.clone().gen();
        let out = generate(&ctx(50.0, 30), &mut rng).unwrap();
        assert!(out.is_empty());
        let after: u64 = rng.gen();
        assert_eq!(before, after, "zero-count generation must not consume randomness");
    }

    #[test]
    fn singleton_size_pool() {
        let mut c = ctx(0.0, 4);
        c.known_sizes = vec![7.0];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = generate(&c, &mut rng).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|r| r.size == 7.0));
        assert!(out.iter().all(|r| r.unload_time == 2.5 && r.arrival_time == 0.0));
        let ids: Vec<usize> = out.iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![1000, 1001, 1002, 1003]);
    }

    #[test]
    fn statistical_uniformity() {
        let n = 100_000;
        let mut c = ctx(0.0, n);
        c.known_sizes = vec![2.0, 4.0, 6.0, 8.0];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let out = generate(&c, &mut rng).unwrap();
        assert_eq!(out.len(), n);

        let mean_x: f64 = out.iter().map(|r| r.location.x).sum::<f64>() / n as f64;
        let mean_y: f64 = out.iter().map(|r| r.location.y).sum::<f64>() / n as f64;
        assert!((mean_x - 5.0).abs() < 0.1, "mean x {mean_x}");
        assert!((mean_y - 5.0).abs() < 0.1, "mean y {mean_y}");

        // Each size should appear with frequency n/4 ± 3σ of the binomial law.
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for s in [2.0, 4.0, 6.0, 8.0] {
            let freq = out.iter().filter(|r| r.size == s).count() as f64;
            assert!(
                (freq - n as f64 / 4.0).abs() <= 3.0 * sigma,
                "size {s} frequency {freq} outside 3 sigma"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Locations stay inside the closed rectangle and sizes come from the pool.
        #[test]
        fn generated_requests_respect_the_law(seed in 0u64..1000, now in 0.0f64..50.0, m_t in 1usize..40) {
            let mut c = ctx(now, m_t);
            c.known_sizes = (1..=m_t).map(|i| i as f64).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = generate(&c, &mut rng).unwrap();
            for r in &out {
                prop_assert!(c.bounding_rect.contains(r.location));
                prop_assert!(c.known_sizes.contains(&r.size));
                prop_assert!(r.id >= c.artificial_id_base);
            }
        }

        /// The count never grows as the day progresses.
        #[test]
        fn count_nonincreasing_in_now(m_t in 1usize..200, a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let (early, late) = if a <= b { (a, b) } else { (b, a) };
            let n_early = artificial_count(&ctx(early, m_t)).unwrap();
            let n_late = artificial_count(&ctx(late, m_t)).unwrap();
            prop_assert!(n_late <= n_early, "{n_late} > {n_early}");
        }

        /// Same context and seed produce the same request sequence.
        #[test]
        fn reproducible_given_seed(seed in 0u64..1000) {
            let c = ctx(10.0, 25);
            let a = generate(&c, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = generate(&c, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
