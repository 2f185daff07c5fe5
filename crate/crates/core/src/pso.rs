//! Enhanced particle swarm over the kernel parameter plane.
//!
//! Three departures from the classic swarm: positions start on a
//! logistic-map lattice instead of uniform draws, the inertia weight is an
//! iterated sine map projected into a fixed band, and the learning
//! coefficients follow a sine/cosine schedule that shifts emphasis from
//! the personal to the global best as iterations advance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Smallest accepted logistic coefficient; below the accumulation point
/// the map settles onto periodic orbits and the initial lattice
/// degenerates into a handful of repeated positions.
pub const MU_MIN: f64 = 3.569_945_671;

/// Swarm search parameters. The two coordinates are the shape parameter
/// and the hybrid weight, in that order.
#[derive(Clone, Debug)]
pub struct PsoConfig {
    /// Number of particles.
    pub swarm_size: usize,
    /// Iteration budget.
    pub max_iters: usize,
    /// Inclusive search box per coordinate, in linear scale.
    pub bounds: [(f64, f64); 2],
    /// Logistic coefficient of the initial lattice.
    pub mu: f64,
    /// Seed value of both the logistic lattice and the inertia map; must
    /// avoid the map's fixed and collapsing points.
    pub z0: f64,
    /// Sine-map gain.
    pub varrho: f64,
    /// Band the raw inertia value is projected into before use.
    pub w_clamp: (f64, f64),
    /// Consecutive unimproved iterations tolerated before stopping.
    pub stall_limit: usize,
    /// Seed of the velocity-update draws.
    pub seed: u64,
    /// Search the second coordinate in log10 scale; its bounds must then
    /// be strictly positive. The cost always receives the linear value.
    pub log_rho: bool,
    /// Classic fixed learning coefficients, recorded for reference only;
    /// the schedule replaces them in every update.
    pub legacy_c1: f64,
    /// See `legacy_c1`.
    pub legacy_c2: f64,
}

impl Default for PsoConfig {
    fn default() -> PsoConfig {
        PsoConfig {
            swarm_size: 20,
            max_iters: 100,
            bounds: [(0.0, 2.0), (0.0, 2.0)],
            mu: 4.0,
            z0: 0.3,
            varrho: 4.0,
            w_clamp: (0.4, 0.9),
            stall_limit: 20,
            seed: 0,
            log_rho: false,
            legacy_c1: 1.2,
            legacy_c2: 1.7,
        }
    }
}

impl PsoConfig {
    /// Checks every field against its admissible range.
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::Config("swarm size must be positive".to_string()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("iteration budget must be positive".to_string()));
        }
        for (k, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(Error::Config(format!(
                    "coordinate {k} bounds must satisfy 0 <= min < max, got [{lo}, {hi}]"
                )));
            }
        }
        if !(self.mu > MU_MIN && self.mu <= 4.0) {
            return Err(Error::Config(format!(
                "logistic coefficient must lie in ({MU_MIN}, 4], got {}",
                self.mu
            )));
        }
        if !(self.z0 > 0.0 && self.z0 < 1.0) || [0.25, 0.5, 0.75].contains(&self.z0) {
            return Err(Error::Config(format!(
                "chaotic seed must lie in (0, 1) away from 0.25, 0.5, 0.75, got {}",
                self.z0
            )));
        }
        if !(self.varrho > 0.0 && self.varrho <= 4.0) {
            return Err(Error::Config(format!(
                "sine-map gain must lie in (0, 4], got {}",
                self.varrho
            )));
        }
        let (wmin, wmax) = self.w_clamp;
        if !(wmin.is_finite() && wmax.is_finite() && 0.0 <= wmin && wmin <= wmax) {
            return Err(Error::Config(format!(
                "inertia band must satisfy 0 <= min <= max, got [{wmin}, {wmax}]"
            )));
        }
        if self.stall_limit == 0 {
            return Err(Error::Config("stall limit must be positive".to_string()));
        }
        if self.log_rho && self.bounds[1].0 <= 0.0 {
            return Err(Error::Config(
                "log-scale search needs strictly positive second-coordinate bounds".to_string(),
            ));
        }
        Ok(())
    }
}

/// Full swarm state between iterations. Positions, velocities, and bests
/// live in search scale: coordinate 1 holds log10 of the linear value
/// when the configuration asks for a log-scale search.
#[derive(Clone, Debug)]
pub struct SwarmState {
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub pbest: Vec<[f64; 2]>,
    pub pbest_cost: Vec<f64>,
    pub gbest: [f64; 2],
    pub gbest_cost: f64,
    /// Completed iterations.
    pub t: usize,
    /// Raw (unclamped) sine-map state.
    pub sine_state: f64,
    pub rng: ChaCha8Rng,
    /// Best cost after initialization and after each iteration.
    pub history: Vec<f64>,
}

/// Search outcome in linear scale.
#[derive(Clone, Debug)]
pub struct PsoResult {
    pub eps_opt: f64,
    pub rho_opt: f64,
    pub best_cost: f64,
    /// Iterations actually run (at most the budget; fewer on stall).
    pub iterations_used: usize,
    /// Best cost after initialization and after each iteration.
    pub history: Vec<f64>,
}

fn search_bounds(config: &PsoConfig) -> [(f64, f64); 2] {
    let mut sb = config.bounds;
    if config.log_rho {
        sb[1] = (sb[1].0.log10(), sb[1].1.log10());
    }
    sb
}

fn to_linear(config: &PsoConfig, xi: [f64; 2]) -> (f64, f64) {
    if config.log_rho {
        (xi[0], 10f64.powf(xi[1]))
    } else {
        (xi[0], xi[1])
    }
}

/// Places the swarm on a logistic lattice, evaluates it, and seeds the
/// personal and global bests. Velocities start at zero.
///
/// One logistic stream `z <- mu z (1 - z)` is consumed two values per
/// particle, mapped affinely into the (search-scale) bounds. Non-finite
/// costs are kept as infinities; they lose every later comparison.
pub fn chaotic_init(config: &PsoConfig, cost: impl Fn(f64, f64) -> f64) -> Result<SwarmState> {
    config.validate()?;
    let sb = search_bounds(config);
    let mut z = config.z0;
    let mut positions = Vec::with_capacity(config.swarm_size);
    for _ in 0..config.swarm_size {
        let mut xi = [0.0; 2];
        for (k, x) in xi.iter_mut().enumerate() {
            z = config.mu * z * (1.0 - z);
            *x = sb[k].0 + z * (sb[k].1 - sb[k].0);
        }
        positions.push(xi);
    }
    let pbest_cost: Vec<f64> = positions
        .iter()
        .map(|&xi| {
            let (e, r) = to_linear(config, xi);
            let c = cost(e, r);
            if c.is_finite() {
                c
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut gbest = positions[0];
    let mut gbest_cost = pbest_cost[0];
    for (xi, &c) in positions.iter().zip(&pbest_cost).skip(1) {
        if c < gbest_cost {
            gbest_cost = c;
            gbest = *xi;
        }
    }
    Ok(SwarmState {
        velocities: vec![[0.0; 2]; config.swarm_size],
        pbest: positions.clone(),
        positions,
        pbest_cost,
        gbest,
        gbest_cost,
        t: 0,
        sine_state: config.z0,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        history: vec![gbest_cost],
    })
}

/// Advances the sine map and returns the clamped inertia weight. The raw
/// value `(varrho/4) sin(pi x)` becomes the next map state; only the copy
/// projected into the band enters the velocity update.
pub fn inertia_weight(state: &mut SwarmState, config: &PsoConfig) -> f64 {
    let raw = 0.25 * config.varrho * (std::f64::consts::PI * state.sine_state).sin();
    state.sine_state = raw;
    raw.clamp(config.w_clamp.0, config.w_clamp.1)
}

/// Sine/cosine learning-coefficient schedule at iteration `t` of
/// `max_iters`: exploration (personal-best pull) starts at 2.5 and decays
/// to 2, exploitation (global-best pull) mirrors it upward.
pub fn scac(t: usize, max_iters: usize) -> (f64, f64) {
    debug_assert!(1 <= t && t <= max_iters);
    let phase = (1.0 - t as f64 / max_iters as f64) * std::f64::consts::FRAC_PI_2;
    (2.0 + 0.5 * phase.sin(), 2.0 + 0.5 * phase.cos())
}

/// One particle's unclipped velocity and position update.
pub fn velocity_update(
    w: f64,
    c: (f64, f64),
    r: (f64, f64),
    v: [f64; 2],
    xi: [f64; 2],
    pbest: [f64; 2],
    gbest: [f64; 2],
) -> ([f64; 2], [f64; 2]) {
    let mut v_new = [0.0; 2];
    let mut x_new = [0.0; 2];
    for k in 0..2 {
        v_new[k] = w * v[k] + c.0 * r.0 * (pbest[k] - xi[k]) + c.1 * r.1 * (gbest[k] - xi[k]);
        x_new[k] = xi[k] + v_new[k];
    }
    (v_new, x_new)
}

/// Advances the swarm one iteration: schedule and inertia for this step,
/// two uniform draws per particle, velocity and position updates with
/// clipping into bounds, cost evaluation, then a synchronous best update
/// (the global best every particle saw this sweep is last iteration's).
///
/// Non-finite costs become infinities so one diverged evaluation cannot
/// abort the search. All draws are consumed in particle order before any
/// update, so evaluation scheduling cannot change the stream assignment.
pub fn step(state: &mut SwarmState, cost: impl Fn(f64, f64) -> f64, config: &PsoConfig) {
    let sb = search_bounds(config);
    let t_next = state.t + 1;
    let c = scac(t_next, config.max_iters.max(t_next));
    let w = inertia_weight(state, config);
    let draws: Vec<(f64, f64)> =
        (0..state.positions.len()).map(|_| (state.rng.gen(), state.rng.gen())).collect();
    for (j, &r) in draws.iter().enumerate() {
        let (v, mut x) = velocity_update(
            w,
            c,
            r,
            state.velocities[j],
            state.positions[j],
            state.pbest[j],
            state.gbest,
        );
        for k in 0..2 {
            x[k] = x[k].clamp(sb[k].0, sb[k].1);
        }
        state.velocities[j] = v;
        state.positions[j] = x;
        let (e, rho) = to_linear(config, x);
        let cst = cost(e, rho);
        let cst = if cst.is_finite() { cst } else { f64::INFINITY };
        if cst < state.pbest_cost[j] {
            state.pbest_cost[j] = cst;
            state.pbest[j] = x;
        }
    }
    for j in 0..state.positions.len() {
        if state.pbest_cost[j] < state.gbest_cost {
            state.gbest_cost = state.pbest_cost[j];
            state.gbest = state.pbest[j];
        }
    }
    state.t = t_next;
    state.history.push(state.gbest_cost);
}

fn improved(prev: f64, new: f64) -> bool {
    if !(new < prev) {
        return false;
    }
    if !prev.is_finite() {
        return true;
    }
    prev - new >= 1e-12 * prev.abs().max(f64::MIN_POSITIVE)
}

/// Runs the full search: lattice initialization, then iterations until
/// the budget is spent or the best cost sees no significant relative
/// improvement for `stall_limit` consecutive iterations.
///
/// Fails when every initial evaluation is non-finite; the swarm would
/// have no meaningful attractor.
pub fn optimize(cost: impl Fn(f64, f64) -> f64, config: &PsoConfig) -> Result<PsoResult> {
    let mut state = chaotic_init(config, &cost)?;
    if !state.gbest_cost.is_finite() {
        return Err(Error::AllCostsNonFinite);
    }
    let mut stall = 0usize;
    while state.t < config.max_iters {
        let prev = state.gbest_cost;
        step(&mut state, &cost, config);
        if improved(prev, state.gbest_cost) {
            stall = 0;
        } else {
            stall += 1;
            if stall >= config.stall_limit {
                break;
            }
        }
    }
    let (eps_opt, rho_opt) = to_linear(config, state.gbest);
    Ok(PsoResult {
        eps_opt,
        rho_opt,
        best_cost: state.gbest_cost,
        iterations_used: state.t,
        history: state.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::cell::RefCell;

    fn sphere(e: f64, r: f64) -> f64 {
        e * e + r * r
    }

    fn tiny_state(sine_state: f64) -> SwarmState {
        SwarmState {
            positions: vec![[0.0; 2]],
            velocities: vec![[0.0; 2]],
            pbest: vec![[0.0; 2]],
            pbest_cost: vec![0.0],
            gbest: [0.0; 2],
            gbest_cost: 0.0,
            t: 0,
            sine_state,
            rng: ChaCha8Rng::seed_from_u64(0),
            history: vec![0.0],
        }
    }

    #[test]
    fn config_validation_rejects_out_of_range_parameters() {
        assert!(PsoConfig::default().validate().is_ok());
        let cases: Vec<(&str, Box<dyn Fn(&mut PsoConfig)>)> = vec![
            ("zero swarm", Box::new(|c| c.swarm_size = 0)),
            ("zero iters", Box::new(|c| c.max_iters = 0)),
            ("negative bound", Box::new(|c| c.bounds[0] = (-0.1, 2.0))),
            ("inverted bound", Box::new(|c| c.bounds[1] = (1.0, 1.0))),
            ("tame mu", Box::new(|c| c.mu = 3.5)),
            ("mu above 4", Box::new(|c| c.mu = 4.0 + 1e-12)),
            ("z0 at fixed point", Box::new(|c| c.z0 = 0.75)),
            ("z0 collapsing", Box::new(|c| c.z0 = 0.5)),
            ("z0 pre-fixed-point", Box::new(|c| c.z0 = 0.25)),
            ("z0 zero", Box::new(|c| c.z0 = 0.0)),
            ("zero gain", Box::new(|c| c.varrho = 0.0)),
            ("gain above 4", Box::new(|c| c.varrho = 4.5)),
            ("inverted inertia band", Box::new(|c| c.w_clamp = (0.9, 0.4))),
            ("zero stall", Box::new(|c| c.stall_limit = 0)),
            (
                "log scale over zero bound",
                Box::new(|c| {
                    c.log_rho = true;
                    c.bounds[1] = (0.0, 1.0);
                }),
            ),
        ];
        for (label, mutate) in cases {
            let mut config = PsoConfig::default();
            mutate(&mut config);
            assert!(config.validate().is_err(), "{label} should be rejected");
        }
        let mut config = PsoConfig::default();
        config.mu = 4.0;
        assert!(config.validate().is_ok());
    }

    #[test]
    fn logistic_lattice_matches_hand_iterates_and_is_chaotic() {
        // First particle: z1 = 4*0.3*0.7, z2 = 4*z1*(1 - z1), mapped
        // affinely onto [0, 2] per coordinate.
        let config = PsoConfig { swarm_size: 3, ..PsoConfig::default() };
        let state = chaotic_init(&config, sphere).unwrap();
        assert_abs_diff_eq!(state.positions[0][0], 2.0 * 0.84, epsilon = 1e-15);
        assert_abs_diff_eq!(state.positions[0][1], 2.0 * 0.5376, epsilon = 1e-15);
        let z3 = 4.0 * 0.5376 * (1.0 - 0.5376);
        assert_abs_diff_eq!(state.positions[1][0], 2.0 * z3, epsilon = 1e-14);

        // Sensitivity: nearby seeds separate to O(1) within 40 iterates.
        let (mut a, mut b) = (0.3f64, 0.3 + 1e-9);
        let mut separated = None;
        for i in 1..=40 {
            a = 4.0 * a * (1.0 - a);
            b = 4.0 * b * (1.0 - b);
            if (a - b).abs() > 0.1 {
                separated = Some(i);
                break;
            }
        }
        assert!(separated.is_some(), "seeds never separated: |d| = {:e}", (a - b).abs());
    }

    #[test]
    fn initial_swarm_state_is_consistent() {
        let config = PsoConfig { swarm_size: 20, seed: 3, ..PsoConfig::default() };
        let state = chaotic_init(&config, sphere).unwrap();
        assert_eq!(state.positions.len(), 20);
        assert!(state.velocities.iter().all(|v| *v == [0.0; 2]));
        assert_eq!(state.pbest, state.positions);
        let min = state.pbest_cost.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(state.gbest_cost, min);
        assert_eq!(state.history, vec![min]);
        for xi in &state.positions {
            for k in 0..2 {
                let (lo, hi) = config.bounds[k];
                assert!(xi[k] >= lo && xi[k] <= hi);
            }
        }
    }

    #[test]
    fn inertia_weight_follows_the_clamped_sine_map() {
        let config = PsoConfig::default();

        let mut state = tiny_state(0.5);
        assert_eq!(inertia_weight(&mut state, &config), 0.9);
        assert_abs_diff_eq!(state.sine_state, 1.0, epsilon = 1e-15);

        let mut state = tiny_state(1.0 / 6.0);
        assert_abs_diff_eq!(inertia_weight(&mut state, &config), 0.5, epsilon = 1e-15);

        let mut state = tiny_state(1e-12);
        assert_eq!(inertia_weight(&mut state, &config), 0.4);

        // Half gain scales the raw value before clamping.
        let half = PsoConfig { varrho: 2.0, ..PsoConfig::default() };
        let mut state = tiny_state(0.5);
        assert_abs_diff_eq!(inertia_weight(&mut state, &half), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn learning_coefficient_schedule_examples() {
        let (c1, c2) = scac(100, 100);
        assert_eq!((c1, c2), (2.0, 2.5));
        let (c1, c2) = scac(1, 1_000_000);
        assert_abs_diff_eq!(c1, 2.5, epsilon = 1e-5);
        assert_abs_diff_eq!(c2, 2.0, epsilon = 1e-5);
        let (c1, c2) = scac(50, 100);
        let mid = 2.0 + 0.25 * f64::sqrt(2.0);
        assert_abs_diff_eq!(c1, mid, epsilon = 1e-15);
        assert_abs_diff_eq!(c2, mid, epsilon = 1e-15);
    }

    #[test]
    fn velocity_update_reduces_to_inertia_without_draws() {
        let (v, x) = velocity_update(
            0.5,
            (2.2, 2.3),
            (0.0, 0.0),
            [0.5, -1.0],
            [1.0, 1.0],
            [9.0, 9.0],
            [-9.0, -9.0],
        );
        assert_eq!(v, [0.25, -0.5]);
        assert_eq!(x, [1.25, 0.5]);
    }

    #[test]
    fn converged_swarm_is_a_fixed_point_of_the_step() {
        let config = PsoConfig { swarm_size: 3, ..PsoConfig::default() };
        let spot = [1.25, 0.75];
        let mut state = chaotic_init(&config, sphere).unwrap();
        for j in 0..3 {
            state.positions[j] = spot;
            state.velocities[j] = [0.0; 2];
            state.pbest[j] = spot;
            state.pbest_cost[j] = sphere(spot[0], spot[1]);
        }
        state.gbest = spot;
        state.gbest_cost = sphere(spot[0], spot[1]);
        step(&mut state, sphere, &config);
        assert_eq!(state.t, 1);
        assert!(state.positions.iter().all(|&xi| xi == spot));
        assert!(state.velocities.iter().all(|&v| v == [0.0; 2]));
        assert_eq!(state.gbest_cost, sphere(spot[0], spot[1]));
    }

    #[test]
    fn sphere_cost_converges_with_the_default_profile() {
        let config = PsoConfig { seed: 7, ..PsoConfig::default() };
        let result = optimize(sphere, &config).unwrap();
        assert!(result.best_cost <= 1e-5, "best cost {:e}", result.best_cost);
        assert!(result.iterations_used <= 100);
        for pair in result.history.windows(2) {
            assert!(pair[1] <= pair[0], "best cost increased: {pair:?}");
        }
    }

    #[test]
    fn quadratic_bowl_recovers_the_known_optimum() {
        let config = PsoConfig { seed: 1, ..PsoConfig::default() };
        let cost = |e: f64, r: f64| (e - 1.0).powi(2) + (r - 0.5).powi(2);
        let result = optimize(cost, &config).unwrap();
        assert_abs_diff_eq!(result.eps_opt, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(result.rho_opt, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn constant_cost_stops_at_the_stall_limit() {
        let config = PsoConfig::default();
        let result = optimize(|_, _| 1.0, &config).unwrap();
        assert_eq!(result.iterations_used, config.stall_limit);
        assert_eq!(result.history.len(), config.stall_limit + 1);
        assert_eq!(result.best_cost, 1.0);
    }

    #[test]
    fn identical_seeds_reproduce_identical_histories() {
        // Interior optimum: unlike a corner reached exactly by clipping,
        // gbest costs here expose the full draw stream, so two seeds
        // cannot flatline onto the same value.
        let cost = |e: f64, r: f64| (e - 1.0).powi(2) + (r - 0.5).powi(2);
        let config = PsoConfig { seed: 42, ..PsoConfig::default() };
        let a = optimize(cost, &config).unwrap();
        let b = optimize(cost, &config).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!((a.eps_opt, a.rho_opt), (b.eps_opt, b.rho_opt));

        let other = PsoConfig { seed: 43, ..PsoConfig::default() };
        let c = optimize(cost, &other).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn log_scale_search_spans_tiny_magnitudes() {
        let config = PsoConfig {
            bounds: [(0.0, 2.0), (1e-12, 1e-2)],
            log_rho: true,
            seed: 5,
            ..PsoConfig::default()
        };
        let seen = RefCell::new(Vec::new());
        let cost = |e: f64, r: f64| {
            seen.borrow_mut().push(r);
            (e - 1.0).powi(2) + (r.log10() + 9.0).powi(2)
        };
        let result = optimize(cost, &config).unwrap();
        assert_abs_diff_eq!(result.rho_opt.log10(), -9.0, epsilon = 1e-3);
        assert_abs_diff_eq!(result.eps_opt, 1.0, epsilon = 1e-3);
        // The cost saw linear values, all inside the linear bounds.
        assert!(seen.borrow().iter().all(|&r| (1e-12..=1e-2).contains(&r)));
    }

    #[test]
    fn non_finite_costs_are_tolerated_unless_universal() {
        match optimize(|_, _| f64::NAN, &PsoConfig::default()) {
            Err(Error::AllCostsNonFinite) => {}
            other => panic!("expected the all-non-finite error, got {other:?}"),
        }

        // A half-plane of failures must not abort the search.
        let cost = |e: f64, r: f64| {
            if e > 0.9 {
                f64::NAN
            } else {
                (e - 0.5).powi(2) + (r - 0.5).powi(2)
            }
        };
        let result = optimize(cost, &PsoConfig { seed: 2, ..PsoConfig::default() }).unwrap();
        assert!(result.best_cost.is_finite());
        assert!(result.eps_opt <= 0.9);
        assert_abs_diff_eq!(result.best_cost, 0.0, epsilon = 1e-4);
    }
}
