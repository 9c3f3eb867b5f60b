//! Deterministic structure of the heterogeneous SIS model
//!
//! ```text
//! dI/dt(w) = (beta(w) J + eta(w)) f(w) - (beta(w) J + eta(w) + gamma(w)) I(w)
//! J        = sum_i mu_i q_i I_i
//! ```
//!
//! Steady states are the roots of
//! `g(x) = <q f (beta x + eta)/(beta x + eta + gamma)> - x` on `[0, 1]`; `g` is
//! concave with `g(1) < 0`, so a sign change brackets each nontrivial root.

use serde::{Deserialize, Serialize};

use crate::error::{HetsisError, Result};
use crate::hetspace::{HeterogeneitySpace, ModelFields};
use crate::roots::bisect;

/// Residual bound on `|g(j_hat)|` for returned steady states.
pub const STEADY_STATE_TOL: f64 = 1e-12;
/// Finite differences of `J(t)` below this magnitude count as flat.
pub const MONOTONE_BAND: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub j_hat: f64,
    pub i_hat: Vec<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub i_of_t: Vec<Vec<f64>>,
    pub j_of_t: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.i_of_t.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_j(&self) -> f64 {
        self.j_of_t.last().copied().unwrap_or(f64::NAN)
    }
}

/// Basic reproduction number `<q f beta / gamma>`.
pub fn r0(space: &HeterogeneitySpace, fields: &ModelFields) -> Result<f64> {
    if fields.gamma.iter().any(|&g| g <= 0.0) {
        return Err(HetsisError::invalid("gamma must be positive for R0"));
    }
    Ok(space
        .weights()
        .iter()
        .enumerate()
        .map(|(i, m)| m * fields.q[i] * fields.f[i] * fields.beta[i] / fields.gamma[i])
        .sum())
}

/// Steady-state root function `g(x)`.
pub fn g_eval(x: f64, space: &HeterogeneitySpace, fields: &ModelFields) -> f64 {
    space
        .weights()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let force = fields.beta[i] * x + fields.eta[i];
            m * fields.q[i] * fields.f[i] * force / (force + fields.gamma[i])
        })
        .sum::<f64>()
        - x
}

/// Whether imports act on a set of positive measure (`eta f > 0` somewhere).
pub fn has_import(space: &HeterogeneitySpace, fields: &ModelFields) -> bool {
    space
        .weights()
        .iter()
        .enumerate()
        .any(|(i, m)| m * fields.eta[i] * fields.f[i] > 0.0)
}

/// Node profile `I_hat_i = f_i (beta_i J + eta_i)/(beta_i J + eta_i + gamma_i)`.
pub fn steady_profile(j: f64, fields: &ModelFields) -> Vec<f64> {
    (0..fields.len())
        .map(|i| {
            let force = fields.beta[i] * j + fields.eta[i];
            fields.f[i] * force / (force + fields.gamma[i])
        })
        .collect()
}

fn state_at(j: f64, fields: &ModelFields, stable: bool) -> SteadyState {
    SteadyState {
        j_hat: j,
        i_hat: steady_profile(j, fields),
        stable,
    }
}

fn root_of_g(lo: f64, space: &HeterogeneitySpace, fields: &ModelFields) -> Result<f64> {
    let g = |x: f64| g_eval(x, space, fields);
    let root = bisect(g, lo, 1.0, 0.0)
        .ok_or_else(|| HetsisError::Internal(format!("g does not change sign on [{lo}, 1]")))?;
    let residual = g(root);
    if residual.abs() > STEADY_STATE_TOL {
        return Err(HetsisError::Internal(format!(
            "steady-state residual {residual:e} at J = {root}"
        )));
    }
    Ok(root)
}

/// All steady states, classified by the global stability trichotomy:
///
/// - imports present: one globally stable state;
/// - no imports, `R0 <= 1`: only the disease-free state, stable;
/// - no imports, `R0 > 1`: the unstable disease-free state followed by the
///   stable endemic state.
pub fn solve_steady_states(
    space: &HeterogeneitySpace,
    fields: &ModelFields,
) -> Result<Vec<SteadyState>> {
    if has_import(space, fields) {
        let j = root_of_g(0.0, space, fields)?;
        return Ok(vec![state_at(j, fields, true)]);
    }
    let basic = r0(space, fields)?;
    if basic <= 1.0 {
        return Ok(vec![state_at(0.0, fields, true)]);
    }
    // g'(0) = R0 - 1 > 0, so g is positive just right of zero; shrink the
    // seed until that shows up numerically.
    let mut lo = 1e-8;
    while g_eval(lo, space, fields) <= 0.0 {
        lo *= 1e-2;
        if lo < 1e-300 {
            return Err(HetsisError::Internal(format!(
                "no positive g near 0 although R0 = {basic}"
            )));
        }
    }
    let j = root_of_g(lo, space, fields)?;
    Ok(vec![state_at(0.0, fields, false), state_at(j, fields, true)])
}

/// The stable entry of [`solve_steady_states`].
pub fn stable_steady_state(space: &HeterogeneitySpace, fields: &ModelFields) -> Result<SteadyState> {
    solve_steady_states(space, fields)?
        .into_iter()
        .find(|s| s.stable)
        .ok_or_else(|| HetsisError::Internal("no stable steady state".into()))
}

/// Leading eigenvalue of the linearization at `I = 0` (imports ignored):
/// the unique `lambda > -min gamma` with `<q f beta/(gamma + lambda)> = 1`.
/// With `q f beta` vanishing everywhere this is `-min gamma`.
pub fn leading_eigenvalue(space: &HeterogeneitySpace, fields: &ModelFields) -> Result<f64> {
    let mu = space.weights();
    let mass: Vec<f64> = (0..fields.len())
        .map(|i| mu[i] * fields.q[i] * fields.f[i] * fields.beta[i])
        .collect();
    let gamma_min = (0..fields.len())
        .filter(|&i| mass[i] > 0.0)
        .map(|i| fields.gamma[i])
        .fold(f64::INFINITY, f64::min);
    if !gamma_min.is_finite() {
        // No transmission anywhere: the linearization is pure recovery.
        return Ok(-fields.gamma.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let total: f64 = mass.iter().sum();
    let lhs = |lambda: f64| -> f64 {
        mass.iter()
            .zip(&fields.gamma)
            .map(|(m, g)| m / (g + lambda))
            .sum::<f64>()
            - 1.0
    };
    // lhs -> +inf at -gamma_min and lhs(total) < 0 since every gamma > 0.
    let hi = total.max(-gamma_min + 1e-300);
    let lo = -gamma_min;
    let mut a = lo;
    let mut b = hi;
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if lhs(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn rhs(space: &HeterogeneitySpace, fields: &ModelFields, state: &[f64], out: &mut [f64]) {
    let j = space.integrate_product(&fields.q, state);
    for (i, d) in out.iter_mut().enumerate() {
        let force = fields.beta[i] * j + fields.eta[i];
        *d = force * fields.f[i] - (force + fields.gamma[i]) * state[i];
    }
}

/// Fixed-step RK4 integration; see [`integrate_deterministic_strided`].
pub fn integrate_deterministic(
    space: &HeterogeneitySpace,
    fields: &ModelFields,
    i0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_deterministic_strided(space, fields, i0, t_end, dt, 1)
}

/// Fixed-step RK4 on `[0, t_end]`, recording every `stride`-th step and
/// always the final one. The step is `t_end / ceil(t_end / dt)`, so the grid
/// ends exactly at `t_end`.
pub fn integrate_deterministic_strided(
    space: &HeterogeneitySpace,
    fields: &ModelFields,
    i0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(HetsisError::invalid("dt and t_end must be positive"));
    }
    if stride == 0 {
        return Err(HetsisError::invalid("stride must be at least 1"));
    }
    if i0.len() != space.len() {
        return Err(HetsisError::invalid("initial data needs one value per node"));
    }
    if i0
        .iter()
        .zip(&fields.f)
        .any(|(&x, &f)| !(x.is_finite() && (0.0..=f).contains(&x)))
    {
        return Err(HetsisError::invalid("initial data must satisfy 0 <= I0 <= f"));
    }

    let n = space.len();
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut state = i0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];

    let cap = steps / stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        i_of_t: Vec::with_capacity(cap),
        j_of_t: Vec::with_capacity(cap),
    };
    let record = |k: usize, s: &[f64], traj: &mut Trajectory| {
        traj.times.push(k as f64 * h);
        traj.j_of_t.push(space.integrate_product(&fields.q, s));
        traj.i_of_t.push(s.to_vec());
    };
    record(0, &state, &mut traj);

    for k in 1..=steps {
        rhs(space, fields, &state, &mut k1);
        for i in 0..n {
            tmp[i] = state[i] + 0.5 * h * k1[i];
        }
        rhs(space, fields, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = state[i] + 0.5 * h * k2[i];
        }
        rhs(space, fields, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = state[i] + h * k3[i];
        }
        rhs(space, fields, &tmp, &mut k4);
        for i in 0..n {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if k % stride == 0 || k == steps {
            record(k, &state, &mut traj);
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceStatus {
    Converged,
    /// `|J(t_end) - J(t_end/2)| >= 0.01`: the run is too short to judge.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub status: ConvergenceStatus,
    /// `J` at the last grid time.
    pub limit: f64,
    /// Time after which the finite differences of `J` no longer change sign.
    pub onset_time: f64,
    /// +1 increasing, -1 decreasing, 0 flat after the onset.
    pub direction: i8,
    /// True when the onset falls in the first half of the run, i.e. `J` is
    /// monotone over at least the second half.
    pub monotone: bool,
}

/// Eventual monotonicity and limit of `J(t)`.
pub fn convergence_diagnostics(traj: &Trajectory) -> ConvergenceReport {
    let j = &traj.j_of_t;
    let times = &traj.times;
    let n = j.len();
    let limit = traj.final_j();
    if n < 3 {
        return ConvergenceReport {
            status: ConvergenceStatus::Inconclusive,
            limit,
            onset_time: times.first().copied().unwrap_or(0.0),
            direction: 0,
            monotone: false,
        };
    }
    let t_end = times[n - 1];
    let half = times.partition_point(|&t| t < 0.5 * (times[0] + t_end)).min(n - 1);
    let status = if (j[n - 1] - j[half]).abs() < 0.01 {
        ConvergenceStatus::Converged
    } else {
        ConvergenceStatus::Inconclusive
    };

    let sign = |k: usize| -> i8 {
        let d = j[k + 1] - j[k];
        if d > MONOTONE_BAND {
            1
        } else if d < -MONOTONE_BAND {
            -1
        } else {
            0
        }
    };
    let direction = (0..n - 1).rev().map(sign).find(|&s| s != 0).unwrap_or(0);
    let onset_idx = if direction == 0 {
        0
    } else {
        (0..n - 1)
            .rev()
            .find(|&k| sign(k) == -direction)
            .map_or(0, |k| k + 1)
    };
    let onset_time = times[onset_idx];
    ConvergenceReport {
        status,
        limit,
        onset_time,
        direction,
        monotone: onset_time <= 0.5 * (times[0] + t_end),
    }
}
