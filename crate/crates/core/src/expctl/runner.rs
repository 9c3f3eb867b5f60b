use serde::Serialize;

use super::artifacts::{DirLock, Outputs, RunRecord};
use super::{ExperimentName, ExperimentSpec};
use crate::error::Result;
use crate::hetspace::{
    make_discrete_space, make_quadrature_space, theta_of_p, truncated_normal_density,
    HeterogeneitySpace, ModelFields,
};
use crate::stochsim::{
    leading_eigenvalue_at, simulate_ensemble, t_crit, BoundaryMode, DriftSpec, EnsembleStats, SimConfig,
};
use crate::warnsign::{fit_amplitude, fit_power_law, sweep_summary, theoretical_reference, FitResult};

/// Runs the experiment named in `spec`, writing its artifacts and manifest
/// into `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunRecord> {
    spec.validate()?;
    let _lock = DirLock::acquire(&spec.output_dir)?;
    let mut out = Outputs::new(&spec.output_dir);
    out.json("spec.json", spec)?;
    match spec.name {
        ExperimentName::HomFree | ExperimentName::HomClamped => {
            simulate_case(spec, &homogeneous_case(spec, 1.0)?, &mut out, "")?;
        }
        ExperimentName::DiscreteNSweep => {
            let theta = theta_of_p(spec.density.p)?;
            sweep(spec, &mut out, &spec.n_grid(), |n| format!("n_{n}"), |&n| {
                centred_case(spec, make_discrete_space(n)?, theta)
            })?;
        }
        ExperimentName::ContinuousPSweep | ExperimentName::ContinuousPSweepFree => {
            let space = make_quadrature_space(spec.space.m)?;
            sweep(spec, &mut out, &spec.p_grid(), |p| format!("p_{p:?}"), |&p| {
                centred_case(spec, space.clone(), theta_of_p(p)?)
            })?;
        }
        ExperimentName::NonseparableMuSweep => {
            sweep(spec, &mut out, &spec.mu_grid(), |mu| format!("mu_{mu:?}"), |&mu| {
                nonseparable_case(spec, mu)
            })?;
        }
        ExperimentName::DriftExponentSweep => {
            sweep(spec, &mut out, &spec.r_grid(), |r| format!("r_{r:?}"), |&r| {
                homogeneous_case(spec, r)
            })?;
        }
        ExperimentName::LambdaCurves => lambda_curves(spec, &mut out)?,
        ExperimentName::NormalizationCurve => {
            let theta = theta_of_p(spec.density.p)?;
            let grid = spec.n_grid();
            let c = grid
                .iter()
                .map(|&n| Ok(truncated_normal_density(&make_discrete_space(n)?, 0.5, theta)?.c))
                .collect::<Result<Vec<f64>>>()?;
            let n: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
            out.csv("normalization.csv", &["n", "C"], &[&n, &c])?;
        }
        ExperimentName::DensityPlot => {
            let space = make_quadrature_space(spec.space.m)?;
            let mut header = vec!["omega".to_owned()];
            let mut columns = vec![space.nodes().to_vec()];
            for p in spec.p_grid() {
                header.push(format!("f_p{p:?}"));
                columns.push(truncated_normal_density(&space, 0.5, theta_of_p(p)?)?.f);
            }
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let columns: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
            out.csv("density.csv", &header, &columns)?;
        }
        ExperimentName::MeanPath => mean_path(spec, &mut out)?,
    }
    out.finish(spec.name.as_str(), spec.spec_hash(), spec.seed)
}

struct Case {
    space: HeterogeneitySpace,
    fields: ModelFields,
    drift: DriftSpec,
}

/// One h-state, `beta(t) = epsilon t^exponent beta`.
fn homogeneous_case(spec: &ExperimentSpec, exponent: f64) -> Result<Case> {
    let m = &spec.model;
    let space = make_quadrature_space(1)?;
    let fields = ModelFields::uniform(1, m.beta, m.gamma, m.sigma);
    let drift = DriftSpec::SeparablePower {
        rate: m.epsilon,
        exponent,
        beta_shape: fields.beta.clone(),
    };
    Ok(Case { space, fields, drift })
}

/// Linear drift with `f` a normal density centred at 0.5, truncated to the
/// space.
fn centred_case(spec: &ExperimentSpec, space: HeterogeneitySpace, theta: f64) -> Result<Case> {
    let m = &spec.model;
    let f = truncated_normal_density(&space, 0.5, theta)?.f;
    let fields = ModelFields::uniform(space.len(), m.beta, m.gamma, m.sigma).with_density(&space, f)?;
    let drift = DriftSpec::linear(m.epsilon, fields.beta.clone());
    Ok(Case { space, fields, drift })
}

/// `beta(t, w) = epsilon t^(w + 1/2)` with `f` centred at `mu`. The static
/// `beta` field holds the rates at `t_crit`, where `R0 = 1`.
fn nonseparable_case(spec: &ExperimentSpec, mu: f64) -> Result<Case> {
    let m = &spec.model;
    let space = make_quadrature_space(spec.space.m)?;
    let f = truncated_normal_density(&space, mu, spec.density.sd)?.f;
    let mut fields = ModelFields::uniform(space.len(), m.beta, m.gamma, m.sigma).with_density(&space, f)?;
    let drift = DriftSpec::NonSeparable { rate: m.epsilon };
    let tc = t_crit(&drift, &space, &fields)?;
    drift.fill_beta(&space, tc, &mut fields.beta);
    Ok(Case { space, fields, drift })
}

fn sim_config(spec: &ExperimentSpec, case: &Case, tc: f64) -> SimConfig {
    let sim = &spec.sim;
    let t_end = sim.horizon * tc;
    let mut config = SimConfig::new(case.space.len(), t_end);
    config.dt = sim.dt.max(t_end / sim.max_steps as f64);
    let steps = config.n_steps();
    config.record_stride = sim.record_stride.max(steps.div_ceil(sim.max_records - 1));
    config.n_paths = sim.paths;
    config.seed = spec.seed;
    config.noise_mode = spec.noise();
    config.boundary_mode = spec.boundary();
    config.execution = sim.execution;
    config.i0 = case.fields.f.iter().map(|f| spec.model.i0 * f).collect();
    config
}

fn ensemble(spec: &ExperimentSpec, case: &Case, boundary: BoundaryMode) -> Result<(EnsembleStats, f64)> {
    let tc = t_crit(&case.drift, &case.space, &case.fields)?;
    let mut config = sim_config(spec, case, tc);
    config.boundary_mode = boundary;
    Ok((simulate_ensemble(&case.space, &case.fields, &case.drift, &config)?, tc))
}

/// Curve values where `t < t_crit`, NaN elsewhere.
fn curve(times: &[f64], fit: &FitResult) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            if t < fit.t_crit && !fit.is_degenerate() {
                theoretical_reference(&[t], fit.t_crit, fit.a, fit.alpha).map_or(f64::NAN, |v| v[0])
            } else {
                f64::NAN
            }
        })
        .collect()
}

fn join(dir: &str, file: &str) -> String {
    if dir.is_empty() {
        file.to_owned()
    } else {
        format!("{dir}/{file}")
    }
}

/// Simulates one case, fits the variance and writes `variance.csv` and
/// `fit.json` under `dir`.
fn simulate_case(spec: &ExperimentSpec, case: &Case, out: &mut Outputs, dir: &str) -> Result<FitResult> {
    let (stats, tc) = ensemble(spec, case, spec.boundary())?;
    let fraction = spec.fit_fraction();
    let fit = fit_power_law(&stats.times, &stats.var_path, tc, fraction)?;
    let reference = fit_amplitude(&stats.times, &stats.var_path, tc, fraction, 1.0)?;
    let paths: Vec<f64> = stats.counts.iter().map(|&c| c as f64).collect();
    out.csv(
        &join(dir, "variance.csv"),
        &["t", "mean", "variance", "paths", "fit", "reference"],
        &[
            &stats.times,
            &stats.mean_path,
            &stats.var_path,
            &paths,
            &curve(&stats.times, &fit),
            &curve(&stats.times, &reference),
        ],
    )?;
    out.json(&join(dir, "fit.json"), &fit)?;
    Ok(fit)
}

fn sweep<P>(
    spec: &ExperimentSpec,
    out: &mut Outputs,
    grid: &[P],
    label: impl Fn(&P) -> String,
    make_case: impl Fn(&P) -> Result<Case>,
) -> Result<()>
where
    P: Copy + Into<SweepParam>,
{
    let mut results = Vec::with_capacity(grid.len());
    for p in grid {
        let fit = simulate_case(spec, &make_case(p)?, out, &label(p))?;
        results.push((Into::<SweepParam>::into(*p).0, fit));
    }
    let column = |g: fn(&FitResult) -> f64| results.iter().map(|(_, f)| g(f)).collect::<Vec<f64>>();
    let params: Vec<f64> = results.iter().map(|(p, _)| *p).collect();
    out.csv(
        "sweep.csv",
        &["param", "A", "alpha", "t_crit", "rss", "n_points"],
        &[
            &params,
            &column(|f| f.a),
            &column(|f| f.alpha),
            &column(|f| f.t_crit),
            &column(|f| f.rss),
            &column(|f| f.n_points as f64),
        ],
    )?;
    out.json("sweep.json", &sweep_summary(&results)?)
}

/// Sweep grid value as a table entry.
struct SweepParam(f64);

impl From<f64> for SweepParam {
    fn from(v: f64) -> Self {
        SweepParam(v)
    }
}

impl From<usize> for SweepParam {
    fn from(v: usize) -> Self {
        SweepParam(v as f64)
    }
}

#[derive(Serialize)]
struct LambdaSummary {
    mu: f64,
    t_crit: f64,
    lambda_at_t_crit: f64,
    /// Extremes of `lambda(t_{k-1}) - 2 lambda(t_k) + lambda(t_{k+1})` over
    /// interior grid points.
    second_difference_min: f64,
    second_difference_max: f64,
    /// Extremes of `lambda` minus the chord from `(0, lambda(0))` to
    /// `(t_crit, lambda(t_crit))`.
    chord_deviation_min: f64,
    chord_deviation_max: f64,
}

fn lambda_curves(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let k = spec.curve.points;
    let mut summaries = Vec::new();
    for mu in spec.mu_grid() {
        let case = nonseparable_case(spec, mu)?;
        let tc = t_crit(&case.drift, &case.space, &case.fields)?;
        let times: Vec<f64> = (0..k)
            .map(|j| if j + 1 == k { tc } else { tc * j as f64 / (k - 1) as f64 })
            .collect();
        let lambda = times
            .iter()
            .map(|&t| leading_eigenvalue_at(&case.drift, &case.space, &case.fields, t))
            .collect::<Result<Vec<f64>>>()?;
        let second: Vec<f64> = lambda.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
        let (first, last) = (lambda[0], lambda[k - 1]);
        let chord: Vec<f64> = times
            .iter()
            .zip(&lambda)
            .map(|(t, l)| l - (first + (last - first) * t / tc))
            .collect();
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        summaries.push(LambdaSummary {
            mu,
            t_crit: tc,
            lambda_at_t_crit: last,
            second_difference_min: min(&second),
            second_difference_max: max(&second),
            chord_deviation_min: min(&chord),
            chord_deviation_max: max(&chord),
        });
        out.csv(&format!("lambda/mu_{mu:?}.csv"), &["t", "lambda"], &[&times, &lambda])?;
    }
    out.json("lambda.json", &summaries)
}

fn mean_path(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let case = homogeneous_case(spec, 1.0)?;
    let (clamped, _) = ensemble(spec, &case, BoundaryMode::Clamped)?;
    let (free, _) = ensemble(spec, &case, BoundaryMode::Free)?;
    let len = clamped.len().max(free.len());
    let times = if clamped.len() == len { &clamped.times } else { &free.times };
    let pad = |v: &[f64]| {
        let mut v = v.to_vec();
        v.resize(len, f64::NAN);
        v
    };
    let counts = |s: &EnsembleStats| pad(&s.counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    out.csv(
        "mean_path.csv",
        &["t", "mean_clamped", "variance_clamped", "mean_free", "variance_free", "paths_free"],
        &[
            times,
            &pad(&clamped.mean_path),
            &pad(&clamped.var_path),
            &pad(&free.mean_path),
            &pad(&free.var_path),
            &counts(&free),
        ],
    )
}
