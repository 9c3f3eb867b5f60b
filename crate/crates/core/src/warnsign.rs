//! Early-warning scaling fits.
//!
//! The ensemble variance is compared against `A / (t_crit - t)^alpha`. For a
//! fixed exponent the best amplitude is a one-dimensional linear least
//! squares problem, so the fit reduces to minimizing the profiled residual
//! over `alpha in [0, 3]`: a coarse scan on a 0.05 grid followed by
//! golden-section refinement around the best grid point.

use serde::{Deserialize, Serialize};

use crate::error::{HetsisError, Result};

pub const ALPHA_MIN: f64 = 0.0;
pub const ALPHA_MAX: f64 = 3.0;
pub const ALPHA_GRID_STEP: f64 = 0.05;
/// Golden-section stopping width on `alpha`.
pub const ALPHA_TOL: f64 = 1e-9;
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(rename = "A")]
    pub a: f64,
    /// NaN (serialized as `null`) for a degenerate all-zero series.
    #[serde(with = "nullable_f64")]
    pub alpha: f64,
    pub t_crit: f64,
    pub fit_fraction: f64,
    pub rss: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn is_degenerate(&self) -> bool {
        self.alpha.is_nan()
    }
}

mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

struct Window {
    /// `ln(t_crit - t_k)`
    log_gap: Vec<f64>,
    var: Vec<f64>,
}

impl Window {
    /// Profiled amplitude `A(alpha) = max(0, sum v w / sum w^2)` and the
    /// residual sum of squares at that amplitude.
    fn profile(&self, alpha: f64) -> (f64, f64) {
        let mut vw = 0.0;
        let mut ww = 0.0;
        for (lg, v) in self.log_gap.iter().zip(&self.var) {
            let w = (-alpha * lg).exp();
            vw += v * w;
            ww += w * w;
        }
        let a = (vw / ww).max(0.0);
        (a, self.rss(a, alpha))
    }

    fn rss(&self, a: f64, alpha: f64) -> f64 {
        self.log_gap
            .iter()
            .zip(&self.var)
            .map(|(lg, v)| {
                let r = v - a * (-alpha * lg).exp();
                r * r
            })
            .sum()
    }
}

/// Points of `(times, var)` inside the leading `fit_fraction` of
/// `[times[0], t_crit]`.
fn fit_window(times: &[f64], var: &[f64], t_crit: f64, fit_fraction: f64) -> Result<Window> {
    if times.len() != var.len() {
        return Err(HetsisError::invalid("times and variances differ in length"));
    }
    if !(fit_fraction > 0.0 && fit_fraction < 1.0) {
        return Err(HetsisError::invalid(format!(
            "fit fraction must lie in (0, 1), got {fit_fraction}"
        )));
    }
    if !t_crit.is_finite() {
        return Err(HetsisError::invalid("t_crit must be finite"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(HetsisError::invalid("times must be strictly increasing"));
    }
    let start = times.first().copied().unwrap_or(0.0);
    if !(start < t_crit) {
        return Err(HetsisError::invalid("series starts after t_crit"));
    }
    let upper = start + fit_fraction * (t_crit - start);

    let mut window = Window {
        log_gap: Vec::new(),
        var: Vec::new(),
    };
    for (&t, &v) in times.iter().zip(var) {
        if t > upper {
            break;
        }
        if !(v.is_finite() && v >= 0.0) {
            return Err(HetsisError::invalid(format!("variance {v} at t = {t}")));
        }
        window.log_gap.push((t_crit - t).ln());
        window.var.push(v);
    }
    if window.var.len() < MIN_FIT_POINTS {
        return Err(HetsisError::InsufficientData {
            got: window.var.len(),
            need: MIN_FIT_POINTS,
        });
    }
    Ok(window)
}

/// Least-squares fit of `A / (t_crit - t)^alpha` over the leading
/// `fit_fraction` of the interval `[times[0], t_crit]`.
pub fn fit_power_law(times: &[f64], var: &[f64], t_crit: f64, fit_fraction: f64) -> Result<FitResult> {
    let window = fit_window(times, var, t_crit, fit_fraction)?;
    let n_points = window.var.len();
    if window.var.iter().all(|&v| v == 0.0) {
        return Ok(FitResult {
            a: 0.0,
            alpha: f64::NAN,
            t_crit,
            fit_fraction,
            rss: 0.0,
            n_points,
        });
    }

    let grid_len = ((ALPHA_MAX - ALPHA_MIN) / ALPHA_GRID_STEP).round() as usize;
    let (mut best_alpha, mut best_rss) = (ALPHA_MIN, f64::INFINITY);
    for k in 0..=grid_len {
        let alpha = ALPHA_MIN + k as f64 * ALPHA_GRID_STEP;
        let (_, rss) = window.profile(alpha);
        if rss < best_rss {
            best_rss = rss;
            best_alpha = alpha;
        }
    }

    let mut lo = (best_alpha - ALPHA_GRID_STEP).max(ALPHA_MIN);
    let mut hi = (best_alpha + ALPHA_GRID_STEP).min(ALPHA_MAX);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = window.profile(x1).1;
    let mut f2 = window.profile(x2).1;
    while hi - lo > ALPHA_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = window.profile(x1).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = window.profile(x2).1;
        }
    }
    let refined = 0.5 * (lo + hi);
    let (a_ref, rss_ref) = window.profile(refined);
    let (alpha, a, rss) = if rss_ref <= best_rss {
        (refined, a_ref, rss_ref)
    } else {
        let (a, rss) = window.profile(best_alpha);
        (best_alpha, a, rss)
    };
    Ok(FitResult {
        a,
        alpha,
        t_crit,
        fit_fraction,
        rss,
        n_points,
    })
}

/// Best amplitude for a prescribed exponent over the same window as
/// [`fit_power_law`]; used for the `alpha = 1` reference curve.
pub fn fit_amplitude(
    times: &[f64],
    var: &[f64],
    t_crit: f64,
    fit_fraction: f64,
    alpha: f64,
) -> Result<FitResult> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(HetsisError::invalid(format!("exponent must be nonnegative, got {alpha}")));
    }
    let window = fit_window(times, var, t_crit, fit_fraction)?;
    let (a, rss) = window.profile(alpha);
    Ok(FitResult {
        a,
        alpha,
        t_crit,
        fit_fraction,
        rss,
        n_points: window.var.len(),
    })
}

/// `A / (t_crit - t)^alpha` on the given grid.
pub fn theoretical_reference(times: &[f64], t_crit: f64, a: f64, alpha: f64) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            if t < t_crit {
                Ok(a / (t_crit - t).powf(alpha))
            } else {
                Err(HetsisError::invalid(format!(
                    "reference curve undefined at t = {t} >= t_crit = {t_crit}"
                )))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(with = "nullable_f64")]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Rows sorted by parameter.
    pub rows: Vec<SweepRow>,
    /// Spearman rank correlation of `alpha` with the parameter.
    pub alpha_trend: f64,
    /// Spearman rank correlation of `A` with the parameter.
    pub a_trend: f64,
}

/// Sorted `(param, A, alpha)` table with rank-correlation trends.
/// Degenerate fits are kept in the table but left out of the trends.
pub fn sweep_summary(results: &[(f64, FitResult)]) -> Result<SweepSummary> {
    if results.is_empty() {
        return Err(HetsisError::invalid("empty sweep"));
    }
    let mut rows: Vec<SweepRow> = results
        .iter()
        .map(|(p, fit)| SweepRow {
            param: *p,
            a: fit.a,
            alpha: fit.alpha,
        })
        .collect();
    rows.sort_by(|x, y| x.param.total_cmp(&y.param));
    let usable: Vec<&SweepRow> = rows.iter().filter(|r| r.alpha.is_finite()).collect();
    let params: Vec<f64> = usable.iter().map(|r| r.param).collect();
    let alphas: Vec<f64> = usable.iter().map(|r| r.alpha).collect();
    let amps: Vec<f64> = usable.iter().map(|r| r.a).collect();
    Ok(SweepSummary {
        alpha_trend: spearman(&params, &alphas),
        a_trend: spearman(&params, &amps),
        rows,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; values.len()];
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[k]] {
            end += 1;
        }
        let avg = (k + end) as f64 / 2.0 + 1.0;
        for &idx in &order[k..=end] {
            out[idx] = avg;
        }
        k = end + 1;
    }
    out
}

/// Spearman rank correlation. NaN for fewer than two points; zero when
/// either series is constant, since a flat series carries no trend.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}
