//! Heterogeneity spaces, parameter fields and the truncated normal density.
//!
//! A heterogeneity space is a finite set of h-states `omega_i` in `[0, 1]`
//! carrying positive weights `mu_i` that sum to one. Every integral over the
//! h-state space in the rest of the crate is the weighted sum
//! `sum_i mu_i * phi(omega_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{HetsisError, Result};

/// Tolerance on `sum_i mu_i = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance on the normalizations `<f> = 1` and `<q f> = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Default positivity floor for `beta` and `gamma`.
pub const DEFAULT_RATE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// `{i/(n-1)}` with the counting measure normed to one.
    DiscreteCounting,
    /// Midpoint-rule discretization of `[0, 1]` with Lebesgue measure.
    ContinuousQuadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneitySpace {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: SpaceKind,
}

impl HeterogeneitySpace {
    /// Builds a space from explicit nodes and weights, checking ordering,
    /// range, positivity and the unit total weight.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, kind: SpaceKind) -> Result<Self> {
        if nodes.is_empty() {
            return Err(HetsisError::invalid("space needs at least one node"));
        }
        if nodes.len() != weights.len() {
            return Err(HetsisError::invalid(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(HetsisError::invalid("nodes must lie in [0, 1]"));
        }
        if nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(HetsisError::invalid("nodes must be strictly increasing"));
        }
        if weights.iter().any(|&m| !(m.is_finite() && m > 0.0)) {
            return Err(HetsisError::invalid("weights must be positive and finite"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(HetsisError::invalid(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            nodes,
            weights,
            kind,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i mu_i v_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(m, v)| m * v).sum()
    }

    /// `sum_i mu_i a_i b_i`.
    pub fn integrate_product(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.len());
        debug_assert_eq!(b.len(), self.len());
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(m, (x, y))| m * x * y)
            .sum()
    }
}

/// Discrete h-states `{0, 1/(n-1), ..., 1}`, each with weight `1/n`.
///
/// The endpoints get the full weight `1/n` as well (no trapezoid halving).
pub fn make_discrete_space(n: usize) -> Result<HeterogeneitySpace> {
    if n < 2 {
        return Err(HetsisError::invalid(format!(
            "discrete space needs n >= 2, got {n}"
        )));
    }
    let last = (n - 1) as f64;
    let nodes = (0..n).map(|i| i as f64 / last).collect();
    let weights = vec![1.0 / n as f64; n];
    HeterogeneitySpace::from_parts(nodes, weights, SpaceKind::DiscreteCounting)
}

/// Midpoint rule on `[0, 1]`: nodes `(i + 0.5)/m`, weights `1/m`.
pub fn make_quadrature_space(m: usize) -> Result<HeterogeneitySpace> {
    if m < 1 {
        return Err(HetsisError::invalid("quadrature space needs m >= 1"));
    }
    let h = 1.0 / m as f64;
    let nodes = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
    let weights = vec![h; m];
    HeterogeneitySpace::from_parts(nodes, weights, SpaceKind::ContinuousQuadrature)
}

/// Standard deviation of the truncated normal as a function of the
/// parametrisation value `p in (0, 1)`: `1/(2p-2)^2 - 1/4`.
pub fn theta_of_p(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(HetsisError::invalid(format!("p must lie in (0, 1), got {p}")));
    }
    let d = 2.0 * p - 2.0;
    Ok(1.0 / (d * d) - 0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    pub mean: f64,
    pub theta: f64,
    pub p: Option<f64>,
}

impl DensityParams {
    pub fn new(mean: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mean) {
            return Err(HetsisError::invalid(format!("mean {mean} outside [0, 1]")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(HetsisError::invalid(format!("theta must be positive, got {theta}")));
        }
        Ok(Self {
            mean,
            theta,
            p: None,
        })
    }

    pub fn from_p(mean: f64, p: f64) -> Result<Self> {
        let theta = theta_of_p(p)?;
        let mut params = Self::new(mean, theta)?;
        params.p = Some(p);
        Ok(params)
    }
}

/// Per-node density values and the normalization constant `C` used to
/// produce them.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedNormal {
    pub f: Vec<f64>,
    pub c: f64,
}

/// Normal density with the given mean and standard deviation `theta`,
/// truncated to the space and renormalized so that `<f> = 1` on it.
///
/// `C = sum_j mu_j phi((omega_j - mean)/theta)/theta` and
/// `f_i = phi((omega_i - mean)/theta) / (theta C)`. The ratio is formed in
/// log space so `f` stays well defined when every `phi` value underflows
/// (very small `theta`); `C` itself may then be reported as zero.
pub fn truncated_normal_density(
    space: &HeterogeneitySpace,
    mean: f64,
    theta: f64,
) -> Result<TruncatedNormal> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(HetsisError::invalid(format!("theta must be positive, got {theta}")));
    }
    let log_kernel: Vec<f64> = space
        .nodes()
        .iter()
        .map(|&w| {
            let z = (w - mean) / theta;
            -0.5 * z * z
        })
        .collect();
    let peak = log_kernel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_kernel.iter().map(|l| (l - peak).exp()).collect();
    let scaled_mass = space.integrate(&scaled);
    if !(scaled_mass > 0.0 && scaled_mass.is_finite()) {
        return Err(HetsisError::DegenerateInput(format!(
            "truncated normal (mean {mean}, theta {theta}) has no mass on the space"
        )));
    }
    let norm = (2.0 * std::f64::consts::PI).sqrt() * theta;
    let c = scaled_mass * peak.exp() / norm;
    let f = scaled.into_iter().map(|v| v / scaled_mass).collect();
    Ok(TruncatedNormal { f, c })
}

/// Rescales `q_raw` so that `<q f> = 1`.
pub fn normalize_q(space: &HeterogeneitySpace, q_raw: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    if q_raw.len() != space.len() || f.len() != space.len() {
        return Err(HetsisError::invalid("q and f must have one value per node"));
    }
    if q_raw.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
        return Err(HetsisError::invalid("q must be positive at every node"));
    }
    let scale = space.integrate_product(q_raw, f);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(HetsisError::DegenerateInput(format!(
            "<q f> = {scale}, cannot normalize"
        )));
    }
    Ok(q_raw.iter().map(|q| q / scale).collect())
}

/// Per-node model parameters.
///
/// `beta` doubles as the h-state shape of a separable drifting transmission
/// rate; `eta` only enters the deterministic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFields {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub q: Vec<f64>,
    pub eta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub f: Vec<f64>,
}

impl ModelFields {
    /// Constant `beta`, `gamma`, `sigma` with `q = f = 1` and `eta = 0`.
    pub fn uniform(n: usize, beta: f64, gamma: f64, sigma: f64) -> Self {
        Self {
            beta: vec![beta; n],
            gamma: vec![gamma; n],
            q: vec![1.0; n],
            eta: vec![0.0; n],
            sigma: vec![sigma; n],
            f: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta.iter_mut().for_each(|e| *e = eta);
        self
    }

    /// Replaces the density and renormalizes `q` against it.
    pub fn with_density(mut self, space: &HeterogeneitySpace, f: Vec<f64>) -> Result<Self> {
        self.q = normalize_q(space, &self.q, &f)?;
        self.f = f;
        Ok(self)
    }

    fn columns(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("q", &self.q),
            ("eta", &self.eta),
            ("sigma", &self.sigma),
            ("f", &self.f),
        ]
    }

    /// Checks shapes, finiteness, nonnegativity, the rate floor on `beta`
    /// and `gamma`, positivity of `q` and both normalizations.
    pub fn validate(&self, space: &HeterogeneitySpace, rate_floor: f64) -> Result<()> {
        for (name, col) in self.columns() {
            if col.len() != space.len() {
                return Err(HetsisError::invalid(format!(
                    "{name} has {} values, space has {} nodes",
                    col.len(),
                    space.len()
                )));
            }
            if col.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(HetsisError::invalid(format!(
                    "{name} must be finite and nonnegative"
                )));
            }
        }
        for (name, col) in [("beta", &self.beta), ("gamma", &self.gamma)] {
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            if min < rate_floor {
                return Err(HetsisError::invalid(format!(
                    "min {name} = {min} is below the floor {rate_floor}"
                )));
            }
        }
        if self.q.iter().any(|&q| q <= 0.0) {
            return Err(HetsisError::invalid("q must be positive at every node"));
        }
        let mass = space.integrate(&self.f);
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(HetsisError::invalid(format!("<f> = {mass}, expected 1")));
        }
        let qf = space.integrate_product(&self.q, &self.f);
        if (qf - 1.0).abs() > NORMALIZATION_TOL {
            return Err(HetsisError::invalid(format!("<q f> = {qf}, expected 1")));
        }
        Ok(())
    }
}
