//! Monte Carlo simulation of the risk process, with or without a dividend
//! barrier.
//!
//! Jump epochs and sizes are exact. With `sigma > 0` the Brownian part is
//! built on a grid of step `dt` by dyadic midpoint refinement of unit-scale
//! cells, so runs at `dt` and `dt / 2` share the same coarse path. Between
//! grid points the Brownian bridge is used to sample the running maximum
//! (exact reflection at the barrier) and the probability of touching zero.
//! With `sigma = 0` paths are piecewise linear and simulated event by event.
//!
//! Path `i` draws only from ChaCha streams derived from `(seed, i)`, and
//! results are summed in path order, so estimates do not depend on the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::LevyModel;
use crate::roots::exponent_minimizer;

const STREAM_JUMPS: u64 = 0;
const STREAM_BROWNIAN: u64 = 1;
const STREAM_BRIDGE: u64 = 2;
const STREAM_INTERP: u64 = 3;
const STREAMS_PER_PATH: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Brownian grid step; unused when `sigma = 0`.
    pub dt: f64,
    /// Horizon; each estimator picks a default when absent.
    pub t_max: Option<f64>,
    pub seed: u64,
    pub bridge_correction: bool,
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n_paths: 10_000, dt: 1e-3, t_max: None, seed: 0, bridge_correction: true, workers: 1 }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidArgument("n_paths must be >= 1".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", self.dt)));
        }
        if let Some(t) = self.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidArgument(format!("t_max must be > 0, got {t}")));
            }
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub ruin_count: usize,
    /// Mean ruin time over ruined paths.
    pub mean_ruin_time: Option<f64>,
    /// Simulated horizon (rounded up to the grid when `sigma > 0`).
    pub horizon: f64,
    /// Grid step actually used; `None` for exact event-driven paths.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_paths)`.
    pub std_error: f64,
    pub n_paths: usize,
    /// Upper bound on the bias from stopping paths at the horizon.
    pub truncation_bound: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuinEstimate {
    /// `P(tau <= t_max)`.
    pub probability: SimEstimate,
    /// `E[exp(-q tau); tau <= t_max]` when a rate `q` was supplied.
    pub transform: Option<SimEstimate>,
}

/// Expected discounted dividends under the barrier strategy at `b`, started from `x0`.
pub fn simulate_dividends(model: &LevyModel, x0: f64, b: f64, delta: f64, cfg: &SimConfig) -> Result<SimEstimate> {
    cfg.validate()?;
    check_level("x0", x0)?;
    check_level("barrier", b)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be > 0, got {delta}")));
    }
    let horizon = cfg.t_max.unwrap_or(50.0 / delta);
    let sim = Simulator::new(model, cfg, Some(Barrier { level: b, delta }), horizon);
    let out = sim.run(x0)?;
    let up_rate = model.drift().max(0.0) + model.lambda() * model.jumps().map_or(0.0, |j| j.mean_up_jump());
    let bound = (-delta * sim.horizon).exp() * (b + up_rate / delta + model.sigma() / (2.0 * delta).sqrt());
    Ok(sim.estimate(&out, |o| o.dividends, bound))
}

/// Ruin probability from `x0` and optionally `E[exp(-q tau)]`.
pub fn estimate_ruin(model: &LevyModel, x0: f64, q: Option<f64>, cfg: &SimConfig) -> Result<RuinEstimate> {
    cfg.validate()?;
    check_level("x0", x0)?;
    if let Some(q) = q {
        check_level("q", q)?;
    }
    let mean = model.mean();
    let minimizer = exponent_minimizer(model).filter(|&t| t < 0.0 && mean > 0.0);
    let kappa = minimizer.map(|t| -model.exponent_extended(t));
    let horizon = cfg.t_max.unwrap_or_else(|| {
        let drift_scale = if mean > 0.0 { 40.0 * (1.0 + x0) / mean } else { 1_000.0 };
        drift_scale.max(kappa.map_or(0.0, |k| 14.0 / k))
    });
    let sim = Simulator::new(model, cfg, None, horizon);
    let out = sim.run(x0)?;
    // Lundberg-type bound: P(T < tau < inf) <= exp(-gamma x0 - kappa T)
    let ruin_bound = match (minimizer, kappa) {
        (Some(t), Some(k)) => (t * x0 - k * sim.horizon).exp(),
        _ => 1.0,
    };
    let probability = sim.estimate(&out, |o| if o.ruin_time.is_some() { 1.0 } else { 0.0 }, ruin_bound);
    let transform = q.map(|q| {
        let bound = if q > 0.0 { (-q * sim.horizon).exp().min(ruin_bound) } else { ruin_bound };
        sim.estimate(&out, |o| o.ruin_time.map_or(0.0, |t| (-q * t).exp()), bound)
    });
    Ok(RuinEstimate { probability, transform })
}

/// `E_x0[exp(-q tau_b)]` for the process reflected at `b`.
pub fn estimate_barrier_ruin_transform(
    model: &LevyModel,
    x0: f64,
    b: f64,
    q: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    cfg.validate()?;
    check_level("x0", x0)?;
    check_level("q", q)?;
    if !(b.is_finite() && b > 0.0 && x0 <= b) {
        return Err(Error::InvalidArgument(format!("need 0 <= x0 <= b with b > 0, got x0 = {x0}, b = {b}")));
    }
    let horizon = cfg.t_max.unwrap_or(if q > 0.0 { 50.0 / q } else { 1_000.0 });
    // delta only discounts dividends, which this estimator ignores
    let sim = Simulator::new(model, cfg, Some(Barrier { level: b, delta: 1.0 }), horizon);
    let out = sim.run(x0)?;
    let bound = if q > 0.0 { (-q * sim.horizon).exp() } else { 1.0 };
    Ok(sim.estimate(&out, |o| o.ruin_time.map_or(0.0, |t| (-q * t).exp()), bound))
}

fn check_level(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and >= 0, got {v}")))
    }
}

#[derive(Debug, Clone, Copy)]
struct Barrier {
    level: f64,
    delta: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct PathOutcome {
    dividends: f64,
    ruin_time: Option<f64>,
}

struct Simulator<'a> {
    model: &'a LevyModel,
    cfg: &'a SimConfig,
    barrier: Option<Barrier>,
    horizon: f64,
    /// Levels of refinement below a macro cell; the cell length is `dt * 2^levels`.
    levels: u32,
    /// `(signed rate, cumulative probability)` per jump phase.
    phases: Vec<(f64, f64)>,
}

impl<'a> Simulator<'a> {
    fn new(model: &'a LevyModel, cfg: &'a SimConfig, barrier: Option<Barrier>, horizon: f64) -> Self {
        let mut levels = 0;
        while cfg.dt * f64::from(1u32 << levels) < 1.0 && levels < 30 {
            levels += 1;
        }
        let horizon = if model.sigma() > 0.0 { (horizon / cfg.dt).ceil() * cfg.dt } else { horizon };
        let lambda = model.lambda();
        let mut acc = 0.0;
        let phases = model
            .up_intensities()
            .into_iter()
            .chain(model.down_intensities().into_iter().map(|(r, m)| (-r, m)))
            .map(|(r, m)| {
                acc += m / lambda;
                (r, acc)
            })
            .collect();
        Self { model, cfg, barrier, horizon, levels, phases }
    }

    fn run(&self, x0: f64) -> Result<Vec<PathOutcome>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        Ok(pool.install(|| (0..self.cfg.n_paths as u64).into_par_iter().map(|i| self.path(i, x0)).collect()))
    }

    fn estimate(&self, out: &[PathOutcome], sample: impl Fn(&PathOutcome) -> f64, truncation_bound: f64) -> SimEstimate {
        let n = out.len() as f64;
        let mean = compensated_sum(out.iter().map(&sample)) / n;
        let ss = compensated_sum(out.iter().map(|o| (sample(o) - mean).powi(2)));
        let std_error = if out.len() > 1 { (ss / (n - 1.0)).sqrt() / n.sqrt() } else { 0.0 };
        let times: Vec<f64> = out.iter().filter_map(|o| o.ruin_time).collect();
        let mean_ruin_time = (!times.is_empty()).then(|| compensated_sum(times.iter().copied()) / times.len() as f64);
        SimEstimate {
            mean,
            std_error,
            n_paths: out.len(),
            truncation_bound,
            diagnostics: Diagnostics {
                ruin_count: times.len(),
                mean_ruin_time,
                horizon: self.horizon,
                dt: (self.model.sigma() > 0.0).then_some(self.cfg.dt),
            },
        }
    }

    fn stream(&self, path: u64, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(STREAMS_PER_PATH * path + k);
        rng
    }

    fn path(&self, index: u64, x0: f64) -> PathOutcome {
        let mut state = PathState { t: 0.0, y: x0, out: PathOutcome::default() };
        if let Some(bar) = self.barrier {
            if x0 > bar.level {
                state.out.dividends += x0 - bar.level;
                state.y = bar.level;
            }
        }
        let mut jumps = JumpClock::new(self, self.stream(index, STREAM_JUMPS));
        if self.model.sigma() > 0.0 {
            if state.y <= 0.0 {
                state.out.ruin_time = Some(0.0);
                return state.out;
            }
            self.diffusion_path(index, &mut state, &mut jumps);
        } else {
            self.linear_path(&mut state, &mut jumps);
        }
        state.out
    }

    /// Exact simulation for `sigma = 0`.
    fn linear_path(&self, s: &mut PathState, jumps: &mut JumpClock) {
        let c = self.model.drift();
        loop {
            let next = jumps.next_time.min(self.horizon);
            let dur = next - s.t;
            if c < 0.0 && s.y + c * dur <= 0.0 {
                s.out.ruin_time = Some(s.t + s.y / -c);
                return;
            }
            match self.barrier {
                Some(bar) if c > 0.0 => {
                    let t_hit = s.t + ((bar.level - s.y) / c).max(0.0);
                    if t_hit < next {
                        s.out.dividends += c / bar.delta * ((-bar.delta * t_hit).exp() - (-bar.delta * next).exp());
                    }
                    s.y = (s.y + c * dur).min(bar.level);
                }
                _ => s.y += c * dur,
            }
            s.t = next;
            if next >= self.horizon {
                return;
            }
            if self.apply_jump(s, jumps) {
                return;
            }
        }
    }

    /// Grid simulation for `sigma > 0`.
    fn diffusion_path(&self, index: u64, s: &mut PathState, jumps: &mut JumpClock) {
        let dt = self.cfg.dt;
        let leaves = 1usize << self.levels;
        let mut brownian = self.stream(index, STREAM_BROWNIAN);
        let mut bridge = self.stream(index, STREAM_BRIDGE);
        let mut interp = self.stream(index, STREAM_INTERP);
        let mut cell = vec![0.0; leaves];
        let n_leaves = (self.horizon / dt).round() as u64;
        let mut w_grid = 0.0;
        for k in 0..n_leaves {
            let slot = (k % leaves as u64) as usize;
            if slot == 0 {
                fill_cell(&mut brownian, k / leaves as u64, dt * leaves as f64, &mut cell);
            }
            let t_end = (k + 1) as f64 * dt;
            let w_end = w_grid + cell[slot];
            let mut w_cur = w_grid;
            while jumps.next_time < t_end {
                let tj = jumps.next_time;
                let span = t_end - s.t;
                let frac = (tj - s.t) / span;
                let z: f64 = interp.sample(StandardNormal);
                let w_j = w_cur + frac * (w_end - w_cur) + (frac * (t_end - tj)).sqrt() * z;
                if self.diffusion_segment(s, &mut bridge, tj, w_j - w_cur) {
                    return;
                }
                w_cur = w_j;
                if self.apply_jump(s, jumps) {
                    return;
                }
            }
            if self.diffusion_segment(s, &mut bridge, t_end, w_end - w_cur) {
                return;
            }
            w_grid = w_end;
        }
    }

    /// Advance from `s.t` to `t_next` with Brownian increment `dw`; returns true on ruin.
    fn diffusion_segment(&self, s: &mut PathState, bridge: &mut ChaCha8Rng, t_next: f64, dw: f64) -> bool {
        let span = t_next - s.t;
        if span <= 0.0 {
            return false;
        }
        let var = self.model.sigma().powi(2) * span;
        let inc = self.model.drift() * span + self.model.sigma() * dw;
        let (u_max, u_cross) = if self.cfg.bridge_correction {
            (1.0 - bridge.random::<f64>(), 1.0 - bridge.random::<f64>())
        } else {
            (1.0, 1.0)
        };
        let start = s.y;
        let mut end = start + inc;
        if let Some(bar) = self.barrier {
            let peak = if self.cfg.bridge_correction {
                start + 0.5 * (inc + (inc * inc - 2.0 * var * u_max.ln()).sqrt())
            } else {
                end
            };
            if peak > bar.level {
                let paid_at = if self.cfg.bridge_correction { s.t + 0.5 * span } else { t_next };
                s.out.dividends += (peak - bar.level) * (-bar.delta * paid_at).exp();
                end -= peak - bar.level;
            }
        }
        let ruined = end <= 0.0 || (self.cfg.bridge_correction && u_cross < (-2.0 * start * end / var).exp());
        if ruined {
            s.out.ruin_time = Some(if self.cfg.bridge_correction { s.t + 0.5 * span } else { t_next });
        }
        s.t = t_next;
        s.y = end;
        ruined
    }

    /// Apply the pending jump at `s.t` and schedule the next; returns true on ruin.
    fn apply_jump(&self, s: &mut PathState, jumps: &mut JumpClock) -> bool {
        s.y += jumps.take(&self.phases);
        if s.y < 0.0 {
            s.out.ruin_time = Some(s.t);
            return true;
        }
        if let Some(bar) = self.barrier {
            if s.y > bar.level {
                s.out.dividends += (s.y - bar.level) * (-bar.delta * s.t).exp();
                s.y = bar.level;
            }
        }
        false
    }
}

struct PathState {
    t: f64,
    y: f64,
    out: PathOutcome,
}

/// Poisson jump epochs and sizes from a single stream.
struct JumpClock {
    rng: ChaCha8Rng,
    lambda: f64,
    next_time: f64,
}

impl JumpClock {
    fn new(sim: &Simulator<'_>, rng: ChaCha8Rng) -> Self {
        let mut clock = Self { rng, lambda: sim.model.lambda(), next_time: 0.0 };
        clock.next_time = clock.wait();
        clock
    }

    fn wait(&mut self) -> f64 {
        if self.lambda > 0.0 {
            let e: f64 = self.rng.sample(Exp1);
            e / self.lambda
        } else {
            f64::INFINITY
        }
    }

    /// Size of the pending jump; advances the clock.
    fn take(&mut self, phases: &[(f64, f64)]) -> f64 {
        let u: f64 = self.rng.random();
        let e: f64 = self.rng.sample(Exp1);
        let rate = phases.iter().find(|p| u < p.1).or(phases.last()).map_or(f64::INFINITY, |p| p.0);
        self.next_time += self.wait();
        e / rate
    }
}

/// Brownian increments over the `cell.len()` leaves of macro cell `j` of length `len`.
///
/// The cell total is drawn first, then midpoints breadth-first, so a finer
/// grid reuses every draw of a coarser one.
fn fill_cell(rng: &mut ChaCha8Rng, j: u64, len: f64, cell: &mut [f64]) {
    rng.set_word_pos(u128::from(j) << 32);
    let n = cell.len();
    let z: f64 = rng.sample(StandardNormal);
    cell[0] = len.sqrt() * z;
    let mut width = n;
    let mut seg_len = len;
    while width > 1 {
        let half = width / 2;
        let sd = 0.5 * seg_len.sqrt();
        for start in (0..n).step_by(width) {
            let z: f64 = rng.sample(StandardNormal);
            let d = cell[start];
            cell[start] = 0.5 * d + sd * z;
            cell[start + half] = 0.5 * d - sd * z;
        }
        width = half;
        seg_len *= 0.5;
    }
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    fn cfg(n: usize) -> SimConfig {
        SimConfig { n_paths: n, dt: 0.05, t_max: None, seed: 7, bridge_correction: true, workers: 1 }
    }

    #[test]
    fn deterministic_drift_pays_perpetuity() {
        let model = LevyModel::brownian(2.0, 0.0).unwrap();
        let est = simulate_dividends(&model, 1.0, 1.0, 0.1, &cfg(3)).unwrap();
        assert!((est.mean - 20.0).abs() <= est.truncation_bound + 1e-9, "{est:?}");
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn lump_payment_above_barrier() {
        let est = simulate_dividends(&presets::brownian_unit(), 5.0, 1.0, 0.1, &cfg(50)).unwrap();
        assert!(est.mean >= 4.0);
    }

    #[test]
    fn zero_start_with_diffusion_ruins_at_once() {
        let est = estimate_ruin(&presets::brownian_unit(), 0.0, Some(0.1), &cfg(10)).unwrap();
        assert_eq!(est.probability.mean, 1.0);
        assert_eq!(est.transform.unwrap().mean, 1.0);
    }

    #[test]
    fn cell_refinement_is_nested() {
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 8];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        fill_cell(&mut rng, 3, 1.0, &mut a);
        fill_cell(&mut rng, 3, 1.0, &mut b);
        for i in 0..4 {
            assert!((a[i] - (b[2 * i] + b[2 * i + 1])).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let m = presets::brownian_unit();
        assert!(estimate_ruin(&m, 1.0, None, &SimConfig { n_paths: 0, ..cfg(1) }).is_err());
        assert!(estimate_ruin(&m, 1.0, None, &SimConfig { dt: 0.0, ..cfg(1) }).is_err());
        assert!(estimate_ruin(&m, -1.0, None, &cfg(1)).is_err());
        assert!(estimate_barrier_ruin_transform(&m, 3.0, 2.0, 0.1, &cfg(1)).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v.iter().copied()), 2.0);
    }
}
