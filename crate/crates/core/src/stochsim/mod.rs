//! Euler-Maruyama simulation of the fast-slow stochastic model
//!
//! ```text
//! dI_i = [beta(t, w_i) J (f_i - I_i) - gamma_i I_i] dt + sigma_i dW_i
//! J    = sum_i mu_i q_i I_i
//! ```
//!
//! with a slowly drifting transmission rate and additive noise that is either
//! shared by all h-states or independent per h-state. In clamped mode the
//! post-step state is projected onto `[0, f_i]`.
//!
//! Ensembles are embarrassingly parallel over paths. Paths are simulated in
//! small lockstep batches (so the drifting `beta(t, .)` is evaluated once per
//! step per batch) and reduced into streaming moments strictly in path-index
//! order. Each path draws from its own counter-based stream, so serial and
//! parallel runs produce bit-identical statistics.

pub mod rng;
pub mod stats;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::detdyn;
use crate::error::{HetsisError, Result};
use crate::hetspace::{HeterogeneitySpace, ModelFields, DEFAULT_RATE_FLOOR};
use crate::roots::bisect;

pub use rng::{path_rng, PathRng};
pub use stats::{EnsembleStats, StreamingMoments};

/// A path whose aggregate leaves `[-DIVERGENCE_BOUND, DIVERGENCE_BOUND]` (or
/// stops being finite) has escaped past the unstable branch and is retired.
pub const DIVERGENCE_BOUND: f64 = 1e6;
/// Paths advanced together in one lockstep batch.
pub const PATH_BATCH: usize = 16;

/// Slow time dependence of the transmission rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DriftSpec {
    /// `beta(t, w_i) = rate * t^exponent * beta_shape_i`.
    SeparablePower {
        rate: f64,
        exponent: f64,
        beta_shape: Vec<f64>,
    },
    /// `beta(t, w_i) = rate * t^(w_i + 0.5)`.
    NonSeparable { rate: f64 },
    /// Time-independent `beta_i`; used for stationary checks.
    Frozen { beta: Vec<f64> },
}

impl DriftSpec {
    /// Linear drift `beta_0(t) = rate * t`.
    pub fn linear(rate: f64, beta_shape: Vec<f64>) -> Self {
        DriftSpec::SeparablePower {
            rate,
            exponent: 1.0,
            beta_shape,
        }
    }

    pub fn validate(&self, space: &HeterogeneitySpace) -> Result<()> {
        let check_rate = |rate: f64| {
            if rate > 0.0 && rate.is_finite() {
                Ok(())
            } else {
                Err(HetsisError::invalid(format!("drift rate must be positive, got {rate}")))
            }
        };
        let check_shape = |shape: &[f64], strict: bool| {
            if shape.len() != space.len() {
                return Err(HetsisError::invalid("beta shape needs one value per node"));
            }
            let ok = shape
                .iter()
                .all(|&b| b.is_finite() && if strict { b > 0.0 } else { b >= 0.0 });
            if ok {
                Ok(())
            } else {
                Err(HetsisError::invalid("beta shape values out of range"))
            }
        };
        match self {
            DriftSpec::SeparablePower {
                rate,
                exponent,
                beta_shape,
            } => {
                check_rate(*rate)?;
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(HetsisError::invalid(format!(
                        "drift exponent must be positive, got {exponent}"
                    )));
                }
                check_shape(beta_shape, true)
            }
            DriftSpec::NonSeparable { rate } => check_rate(*rate),
            DriftSpec::Frozen { beta } => check_shape(beta, false),
        }
    }

    #[inline]
    fn node_beta(&self, space: &HeterogeneitySpace, t: f64, i: usize) -> f64 {
        match self {
            DriftSpec::SeparablePower {
                rate,
                exponent,
                beta_shape,
            } => rate * t.powf(*exponent) * beta_shape[i],
            DriftSpec::NonSeparable { rate } => {
                if t == 0.0 {
                    0.0
                } else {
                    rate * ((space.nodes()[i] + 0.5) * t.ln()).exp()
                }
            }
            DriftSpec::Frozen { beta } => beta[i],
        }
    }

    /// Writes `beta(t, w_i)` for every node into `out`.
    pub fn fill_beta(&self, space: &HeterogeneitySpace, t: f64, out: &mut [f64]) {
        match self {
            DriftSpec::SeparablePower {
                rate,
                exponent,
                beta_shape,
            } => {
                let level = rate * t.powf(*exponent);
                for (o, b) in out.iter_mut().zip(beta_shape) {
                    *o = level * b;
                }
            }
            _ => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = self.node_beta(space, t, i);
                }
            }
        }
    }
}

/// Transmission rate of node `i` at time `t`.
pub fn beta_at(drift: &DriftSpec, space: &HeterogeneitySpace, t: f64, i: usize) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(HetsisError::invalid(format!("time must be nonnegative, got {t}")));
    }
    if i >= space.len() {
        return Err(HetsisError::invalid(format!("node {i} out of range")));
    }
    let mut out = vec![0.0; space.len()];
    drift.fill_beta(space, t, &mut out);
    Ok(out[i])
}

/// `R0(t) = <q f beta(t, .)/gamma>`.
pub fn r0_at(drift: &DriftSpec, space: &HeterogeneitySpace, fields: &ModelFields, t: f64) -> f64 {
    let mut beta = vec![0.0; space.len()];
    drift.fill_beta(space, t, &mut beta);
    (0..space.len())
        .map(|i| space.weights()[i] * fields.q[i] * fields.f[i] * beta[i] / fields.gamma[i])
        .sum()
}

/// Time at which the drifting `R0(t)` reaches one.
///
/// Closed form for separable power drift, bisection (relative tolerance
/// 1e-12) otherwise.
pub fn t_crit(drift: &DriftSpec, space: &HeterogeneitySpace, fields: &ModelFields) -> Result<f64> {
    drift.validate(space)?;
    match drift {
        DriftSpec::SeparablePower {
            rate,
            exponent,
            beta_shape,
        } => {
            let k: f64 = (0..space.len())
                .map(|i| space.weights()[i] * fields.q[i] * fields.f[i] * beta_shape[i] / fields.gamma[i])
                .sum();
            if !(k > 0.0) {
                return Err(HetsisError::NoCrossing("<q f beta/gamma> vanishes".into()));
            }
            Ok((1.0 / (rate * k)).powf(1.0 / exponent))
        }
        DriftSpec::NonSeparable { .. } => {
            let excess = |t: f64| r0_at(drift, space, fields, t) - 1.0;
            let mut hi = 1.0;
            while excess(hi) < 0.0 {
                hi *= 2.0;
                if hi > 1e15 {
                    return Err(HetsisError::NoCrossing(format!(
                        "R0(t) still below 1 at t = {hi:e}"
                    )));
                }
            }
            bisect(excess, 0.0, hi, 1e-13 * hi)
                .ok_or_else(|| HetsisError::Internal("t_crit bracket lost".into()))
        }
        DriftSpec::Frozen { .. } => Err(HetsisError::NoCrossing(
            "a frozen transmission rate never crosses the threshold".into(),
        )),
    }
}

/// Leading eigenvalue of the linearization at zero with `beta` frozen at
/// its value at time `t`.
pub fn leading_eigenvalue_at(
    drift: &DriftSpec,
    space: &HeterogeneitySpace,
    fields: &ModelFields,
    t: f64,
) -> Result<f64> {
    let mut frozen = fields.clone();
    drift.fill_beta(space, t, &mut frozen.beta);
    detdyn::leading_eigenvalue(space, &frozen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[serde(alias = "shared")]
    SharedAcrossNodes,
    #[serde(alias = "independent")]
    IndependentPerNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Clamped,
    Free,
}

/// How ensemble batches are scheduled. Both give identical results;
/// `Parallel` falls back to serial execution without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Serial,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub noise_mode: NoiseMode,
    pub boundary_mode: BoundaryMode,
    pub i0: Vec<f64>,
    pub execution: Execution,
}

impl SimConfig {
    /// Defaults: `dt = 0.1`, stride 10, 100 paths, seed 0, shared noise,
    /// clamped, zero initial data.
    pub fn new(n_nodes: usize, t_end: f64) -> Self {
        Self {
            dt: 0.1,
            t_end,
            record_stride: 10,
            n_paths: 100,
            seed: 0,
            noise_mode: NoiseMode::SharedAcrossNodes,
            boundary_mode: BoundaryMode::Clamped,
            i0: vec![0.0; n_nodes],
            execution: Execution::default(),
        }
    }

    pub fn validate(&self, space: &HeterogeneitySpace, fields: &ModelFields) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(HetsisError::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(HetsisError::invalid("t_end must be positive"));
        }
        if self.record_stride == 0 || self.n_paths == 0 {
            return Err(HetsisError::invalid("record_stride and n_paths must be at least 1"));
        }
        if self.i0.len() != space.len() {
            return Err(HetsisError::invalid("i0 needs one value per node"));
        }
        if self
            .i0
            .iter()
            .zip(&fields.f)
            .any(|(&x, &f)| !(x.is_finite() && (0.0..=f).contains(&x)))
        {
            return Err(HetsisError::invalid("initial data must satisfy 0 <= I0 <= f"));
        }
        Ok(())
    }

    /// Number of Euler steps: the largest `k` with `k dt <= t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    /// Times `k dt` for `k = 0, stride, 2 stride, ... <= n_steps`.
    pub fn record_times(&self) -> Vec<f64> {
        (0..=self.n_steps())
            .step_by(self.record_stride)
            .map(|k| k as f64 * self.dt)
            .collect()
    }
}

/// Recorded aggregate `I(t) = sum_i mu_i I_i(t)` of one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_index: u64,
    /// Values at the recorded times up to (not including) divergence.
    pub values: Vec<f64>,
    pub diverged_at: Option<f64>,
}

impl PathRecord {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

struct Engine<'a> {
    space: &'a HeterogeneitySpace,
    fields: &'a ModelFields,
    drift: &'a DriftSpec,
    cfg: &'a SimConfig,
    qmu: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(
        space: &'a HeterogeneitySpace,
        fields: &'a ModelFields,
        drift: &'a DriftSpec,
        cfg: &'a SimConfig,
    ) -> Result<Self> {
        fields.validate(space, DEFAULT_RATE_FLOOR)?;
        drift.validate(space)?;
        cfg.validate(space, fields)?;
        let qmu = space.weights().iter().zip(&fields.q).map(|(m, q)| m * q).collect();
        Ok(Self {
            space,
            fields,
            drift,
            cfg,
            qmu,
        })
    }

    /// Advances paths `first .. first + count` in lockstep. `snapshot` sees
    /// the node states of each live path at every recorded time.
    fn run_batch<F>(&self, first: u64, count: usize, mut snapshot: F) -> Vec<PathRecord>
    where
        F: FnMut(usize, &[f64]),
    {
        let n = self.space.len();
        let cfg = self.cfg;
        let mu = self.space.weights();
        let (f, gamma, sigma) = (&self.fields.f, &self.fields.gamma, &self.fields.sigma);
        let dt = cfg.dt;
        let sqrt_dt = dt.sqrt();
        let steps = cfg.n_steps();
        let stride = cfg.record_stride;
        let clamped = cfg.boundary_mode == BoundaryMode::Clamped;
        let shared = cfg.noise_mode == NoiseMode::SharedAcrossNodes;

        let mut state: Vec<f64> = (0..count).flat_map(|_| cfg.i0.iter().copied()).collect();
        let mut rngs: Vec<PathRng> = (0..count as u64).map(|b| path_rng(cfg.seed, first + b)).collect();
        let mut records: Vec<PathRecord> = (0..count as u64)
            .map(|b| PathRecord {
                path_index: first + b,
                values: Vec::with_capacity(steps / stride + 1),
                diverged_at: None,
            })
            .collect();
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

        for (b, rec) in records.iter_mut().enumerate() {
            let s = &state[b * n..(b + 1) * n];
            rec.values.push(dot(mu, s));
            snapshot(b, s);
        }

        let mut beta = vec![0.0; n];
        for k in 0..steps {
            self.drift.fill_beta(self.space, k as f64 * dt, &mut beta);
            let record_now = (k + 1) % stride == 0;
            for (b, rec) in records.iter_mut().enumerate() {
                if rec.diverged_at.is_some() {
                    continue;
                }
                let s = &mut state[b * n..(b + 1) * n];
                let rng = &mut rngs[b];
                let j = dot(&self.qmu, s);
                if !(j.abs() <= DIVERGENCE_BOUND) {
                    rec.diverged_at = Some(k as f64 * dt);
                    continue;
                }
                if shared {
                    let dw = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
                    for i in 0..n {
                        s[i] += dt * (beta[i] * j * (f[i] - s[i]) - gamma[i] * s[i]) + sigma[i] * dw;
                    }
                } else {
                    for i in 0..n {
                        let dw = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
                        s[i] += dt * (beta[i] * j * (f[i] - s[i]) - gamma[i] * s[i]) + sigma[i] * dw;
                    }
                }
                if clamped {
                    for i in 0..n {
                        s[i] = s[i].max(0.0).min(f[i]);
                    }
                }
                if record_now {
                    let aggregate = dot(mu, s);
                    if !(aggregate.abs() <= DIVERGENCE_BOUND) {
                        rec.diverged_at = Some((k + 1) as f64 * dt);
                        continue;
                    }
                    rec.values.push(aggregate);
                    snapshot(b, s);
                }
            }
        }
        records
    }
}

/// One path of the ensemble; identical to the corresponding path inside
/// [`simulate_ensemble`].
pub fn simulate_path(
    space: &HeterogeneitySpace,
    fields: &ModelFields,
    drift: &DriftSpec,
    config: &SimConfig,
    path_index: u64,
) -> Result<PathRecord> {
    let engine = Engine::new(space, fields, drift, config)?;
    Ok(engine.run_batch(path_index, 1, |_, _| {}).remove(0))
}

/// Like [`simulate_path`], also returning the node states at every
/// recorded time.
pub fn simulate_path_with_states(
    space: &HeterogeneitySpace,
    fields: &ModelFields,
    drift: &DriftSpec,
    config: &SimConfig,
    path_index: u64,
) -> Result<(PathRecord, Vec<Vec<f64>>)> {
    let engine = Engine::new(space, fields, drift, config)?;
    let mut states = Vec::new();
    let record = engine
        .run_batch(path_index, 1, |_, s| states.push(s.to_vec()))
        .remove(0);
    Ok((record, states))
}

fn run_wave(engine: &Engine<'_>, batches: &[(u64, usize)], execution: Execution) -> Vec<Vec<PathRecord>> {
    let run = |&(first, count): &(u64, usize)| engine.run_batch(first, count, |_, _| {});
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            batches.par_iter().map(run).collect()
        }
        _ => batches.iter().map(run).collect(),
    }
}

/// Cross-path mean and unbiased variance of the aggregated prevalence.
pub fn simulate_ensemble(
    space: &HeterogeneitySpace,
    fields: &ModelFields,
    drift: &DriftSpec,
    config: &SimConfig,
) -> Result<EnsembleStats> {
    let engine = Engine::new(space, fields, drift, config)?;
    let times = config.record_times();
    let mut moments = StreamingMoments::new(times.len());
    let mut n_diverged = 0;

    let batches: Vec<(u64, usize)> = (0..config.n_paths)
        .step_by(PATH_BATCH)
        .map(|start| (start as u64, PATH_BATCH.min(config.n_paths - start)))
        .collect();
    // Bound memory by reducing a few batches per thread at a time.
    let wave = 2 * worker_count().max(1);
    for chunk in batches.chunks(wave) {
        for batch in run_wave(&engine, chunk, config.execution) {
            for path in batch {
                n_diverged += usize::from(path.diverged());
                moments.push(&path.values);
            }
        }
    }
    Ok(EnsembleStats::from_moments(&times, &moments, config.n_paths, n_diverged))
}

/// Ensemble statistics of externally supplied paths, reduced in the order
/// given.
pub fn ensemble_from_paths(times: &[f64], paths: &[PathRecord]) -> EnsembleStats {
    let mut moments = StreamingMoments::new(times.len());
    for p in paths {
        moments.push(&p.values);
    }
    let n_diverged = paths.iter().filter(|p| p.diverged()).count();
    EnsembleStats::from_moments(times, &moments, paths.len(), n_diverged)
}

fn worker_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetspace::{make_discrete_space, make_quadrature_space, truncated_normal_density};

    fn homogeneous() -> (HeterogeneitySpace, ModelFields) {
        let s = make_quadrature_space(1).unwrap();
        (s, ModelFields::uniform(1, 0.3, 0.4, 0.01))
    }

    #[test]
    fn beta_at_examples() {
        let s = make_quadrature_space(1).unwrap();
        let d = DriftSpec::linear(1e-4, vec![0.3]);
        assert!((beta_at(&d, &s, 1000.0, 0).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(beta_at(&d, &s, 0.0, 0).unwrap(), 0.0);

        let s = make_discrete_space(3).unwrap();
        let d = DriftSpec::NonSeparable { rate: 1e-4 };
        assert!((beta_at(&d, &s, 100.0, 1).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(beta_at(&d, &s, 0.0, 2).unwrap(), 0.0);
        assert!(beta_at(&d, &s, -1.0, 0).is_err());
    }

    #[test]
    fn drift_validation() {
        let s = make_discrete_space(2).unwrap();
        assert!(DriftSpec::linear(0.0, vec![1.0, 1.0]).validate(&s).is_err());
        assert!(DriftSpec::linear(1e-4, vec![1.0]).validate(&s).is_err());
        assert!(DriftSpec::SeparablePower { rate: 1e-4, exponent: 0.0, beta_shape: vec![1.0; 2] }
            .validate(&s)
            .is_err());
        assert!(DriftSpec::NonSeparable { rate: -1.0 }.validate(&s).is_err());
    }

    #[test]
    fn t_crit_closed_form_and_scaling() {
        let (s, f) = homogeneous();
        let tc = t_crit(&DriftSpec::linear(1e-4, vec![0.3]), &s, &f).unwrap();
        assert!((tc - 0.4 / (0.3 * 1e-4)).abs() < 1e-8);
        let tc2 = t_crit(&DriftSpec::linear(2e-4, vec![0.3]), &s, &f).unwrap();
        assert!((tc2 - tc / 2.0).abs() < 1e-8);
        assert!(matches!(
            t_crit(&DriftSpec::Frozen { beta: vec![0.3] }, &s, &f),
            Err(HetsisError::NoCrossing(_))
        ));
    }

    #[test]
    fn t_crit_power_matches_bisection_of_r0() {
        let (s, f) = homogeneous();
        let d = DriftSpec::SeparablePower { rate: 1e-4, exponent: 1.5, beta_shape: vec![0.3] };
        let tc = t_crit(&d, &s, &f).unwrap();
        assert!((r0_at(&d, &s, &f, tc) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_grid() {
        let mut c = SimConfig::new(1, 1.0);
        c.dt = 0.1;
        c.record_stride = 3;
        assert_eq!(c.n_steps(), 10);
        assert_eq!(c.record_times().len(), 4);
        assert!((c.record_times()[3] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_matches_hand_euler() {
        let s = make_discrete_space(3).unwrap();
        let dens = truncated_normal_density(&s, 0.5, 0.3).unwrap();
        let f = ModelFields::uniform(3, 0.3, 0.4, 0.0).with_density(&s, dens.f).unwrap();
        let drift = DriftSpec::linear(0.01, vec![0.3; 3]);
        let mut cfg = SimConfig::new(3, 20.0);
        cfg.boundary_mode = BoundaryMode::Free;
        cfg.record_stride = 1;
        cfg.i0 = f.f.iter().map(|x| 0.2 * x).collect();
        let path = simulate_path(&s, &f, &drift, &cfg, 0).unwrap();

        let mut state = cfg.i0.clone();
        let mut expected = vec![s.integrate(&state)];
        for k in 0..cfg.n_steps() {
            let t = k as f64 * cfg.dt;
            let j = s.integrate_product(&f.q, &state);
            let b = 0.01 * t * 0.3;
            for i in 0..3 {
                state[i] += cfg.dt * (b * j * (f.f[i] - state[i]) - 0.4 * state[i]);
            }
            expected.push(s.integrate(&state));
        }
        assert_eq!(path.values.len(), expected.len());
        for (a, e) in path.values.iter().zip(&expected) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_state_without_noise_stays_zero() {
        let (s, mut f) = homogeneous();
        f.sigma = vec![0.0];
        let cfg = SimConfig::new(1, 100.0);
        let stats = simulate_ensemble(&s, &f, &DriftSpec::linear(1e-4, vec![0.3]), &cfg).unwrap();
        assert!(stats.mean_path.iter().all(|&m| m == 0.0));
        assert!(stats.var_path.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn clamped_nodes_stay_in_band() {
        let s = make_discrete_space(5).unwrap();
        let dens = truncated_normal_density(&s, 0.5, 0.2).unwrap();
        let mut f = ModelFields::uniform(5, 0.3, 0.4, 0.05).with_density(&s, dens.f).unwrap();
        f.sigma = vec![0.2; 5];
        let drift = DriftSpec::linear(1e-3, vec![0.3; 5]);
        let mut cfg = SimConfig::new(5, 300.0);
        cfg.noise_mode = NoiseMode::IndependentPerNode;
        cfg.record_stride = 1;
        let (rec, states) = simulate_path_with_states(&s, &f, &drift, &cfg, 3).unwrap();
        assert_eq!(states.len(), rec.values.len());
        for st in &states {
            for (x, fi) in st.iter().zip(&f.f) {
                assert!(*x >= 0.0 && x <= fi);
            }
        }
        assert!(rec.values.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    }

    #[test]
    fn single_node_shared_noise_is_homogeneous_run() {
        let (s, f) = homogeneous();
        let drift = DriftSpec::linear(1e-4, vec![0.3]);
        let cfg = SimConfig::new(1, 2000.0);
        let a = simulate_path(&s, &f, &drift, &cfg, 5).unwrap();

        let s3 = make_discrete_space(3).unwrap();
        let f3 = ModelFields::uniform(3, 0.3, 0.4, 0.01);
        let mut cfg3 = SimConfig::new(3, 2000.0);
        cfg3.seed = cfg.seed;
        let b = simulate_path(&s3, &f3, &DriftSpec::linear(1e-4, vec![0.3; 3]), &cfg3, 5).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_equals_merged_single_paths() {
        let (s, f) = homogeneous();
        let drift = DriftSpec::linear(1e-3, vec![0.3]);
        let mut cfg = SimConfig::new(1, 500.0);
        cfg.n_paths = 37;
        cfg.seed = 11;
        let stats = simulate_ensemble(&s, &f, &drift, &cfg).unwrap();
        let paths: Vec<PathRecord> = (0..37)
            .map(|k| simulate_path(&s, &f, &drift, &cfg, k).unwrap())
            .collect();
        let merged = ensemble_from_paths(&cfg.record_times(), &paths);
        assert_eq!(stats, merged);

        cfg.execution = Execution::Serial;
        assert_eq!(simulate_ensemble(&s, &f, &drift, &cfg).unwrap(), stats);
    }

    #[test]
    fn single_path_ensemble_has_zero_variance() {
        let (s, f) = homogeneous();
        let mut cfg = SimConfig::new(1, 100.0);
        cfg.n_paths = 1;
        let stats = simulate_ensemble(&s, &f, &DriftSpec::linear(1e-4, vec![0.3]), &cfg).unwrap();
        assert!(stats.var_path.iter().all(|&v| v == 0.0));
        assert!(stats.undersampled());
    }

    #[test]
    fn free_mode_supercritical_paths_diverge() {
        // Strong noise pushes free paths below the negative unstable branch
        // (beta - gamma)/beta = -1/3, after which they escape to -infinity.
        let (s, mut f) = homogeneous();
        f.sigma = vec![0.3];
        let drift = DriftSpec::Frozen { beta: vec![0.3] };
        let mut cfg = SimConfig::new(1, 400.0);
        cfg.boundary_mode = BoundaryMode::Free;
        cfg.n_paths = 20;
        let stats = simulate_ensemble(&s, &f, &drift, &cfg).unwrap();
        assert!(stats.n_diverged > 0);
        assert!(stats.counts.last().copied().unwrap_or(0) < 20 || stats.truncated);
        assert!(stats.var_path.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn rejects_bad_config() {
        let (s, f) = homogeneous();
        let drift = DriftSpec::linear(1e-4, vec![0.3]);
        let mut cfg = SimConfig::new(1, 10.0);
        cfg.i0 = vec![2.0];
        assert!(simulate_path(&s, &f, &drift, &cfg, 0).is_err());
        let mut cfg = SimConfig::new(1, 10.0);
        cfg.n_paths = 0;
        assert!(simulate_ensemble(&s, &f, &drift, &cfg).is_err());
        let mut cfg = SimConfig::new(1, 10.0);
        cfg.dt = -0.1;
        assert!(simulate_path(&s, &f, &drift, &cfg, 0).is_err());
    }
}
