//! Market primitives: valuation ladder, arrival law, transition minor and patience.
//!
//! Price indices are 1-based everywhere in the public API (`k = 1` is the reset
//! price `v_1`). Internally vectors are 0-based, so level `m` lives at `v[m - 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed on probability sums.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Patience {
    Bounded(usize),
    Unbounded,
}

impl Patience {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Patience::Bounded(t) => Some(*t),
            Patience::Unbounded => None,
        }
    }
}

/// When a waiting customer's valuation moves relative to its purchase checks.
///
/// `Lagged`: incumbents decide, then transition; the new arrival decides last. A
/// customer therefore checks its arrival valuation twice (arrival period and the
/// next one) before the first transition.
///
/// `Immediate`: every waiting customer transitions before each check after the
/// arrival period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timing {
    #[default]
    Lagged,
    Immediate,
}

impl Timing {
    /// Whether a customer of `age` periods since arrival moves before its check.
    pub fn moves_at(&self, age: usize) -> bool {
        match self {
            Timing::Lagged => age >= 2,
            Timing::Immediate => age >= 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct MarketModel {
    pub v: Vec<f64>,
    pub gamma: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub tau: Patience,
    pub timing: Timing,
}

/// On-disk schema: `{K, v, gamma, Q, tau, timing?}` with `tau: null` for unbounded.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    #[serde(rename = "K")]
    k: usize,
    v: Vec<f64>,
    gamma: Vec<f64>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    tau: Option<usize>,
    #[serde(default)]
    timing: Timing,
}

impl TryFrom<ModelFile> for MarketModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.v.len() != f.k || f.gamma.len() != f.k || f.q.len() != f.k {
            return Err(Error::validation(format!(
                "K = {} but v, gamma, Q have lengths {}, {}, {}",
                f.k,
                f.v.len(),
                f.gamma.len(),
                f.q.len()
            )));
        }
        Ok(MarketModel {
            v: f.v,
            gamma: f.gamma,
            q: f.q,
            tau: f.tau.map_or(Patience::Unbounded, Patience::Bounded),
            timing: f.timing,
        })
    }
}

impl From<MarketModel> for ModelFile {
    fn from(m: MarketModel) -> Self {
        ModelFile {
            k: m.v.len(),
            tau: m.tau.finite(),
            v: m.v,
            gamma: m.gamma,
            q: m.q,
            timing: m.timing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub invariant: &'static str,
    pub index: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, invariant: &'static str, index: Option<usize>, message: String) {
        self.issues.push(Issue {
            invariant,
            index,
            message,
        });
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            let msgs: Vec<String> = self.issues.iter().map(|i| i.message.clone()).collect();
            Err(Error::validation(msgs.join("; ")))
        }
    }
}

impl MarketModel {
    pub fn new(v: Vec<f64>, gamma: Vec<f64>, q: Vec<Vec<f64>>, tau: Patience) -> Self {
        MarketModel {
            v,
            gamma,
            q,
            tau,
            timing: Timing::default(),
        }
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = timing;
        self
    }

    pub fn with_tau(mut self, tau: Patience) -> Self {
        self.tau = tau;
        self
    }

    pub fn k(&self) -> usize {
        self.v.len()
    }

    /// Finite patience or a validation error.
    pub fn tau_finite(&self) -> Result<usize> {
        self.tau
            .finite()
            .ok_or_else(|| Error::validation("model has unbounded patience"))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.q[i].iter().sum()
    }

    /// Exit probability from level `i` (0-based): the row slack of `Q`.
    pub fn exit_prob(&self, i: usize) -> f64 {
        (1.0 - self.row_sum(i)).max(0.0)
    }

    pub fn check_price(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k() {
            Err(Error::validation(format!(
                "price index {k} outside [1, {}]",
                self.k()
            )))
        } else {
            Ok(())
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn validate(model: &MarketModel) -> ValidationReport {
    let mut r = ValidationReport::default();
    let k = model.k();
    if k == 0 {
        r.push("K", None, "K must be positive".into());
        return r;
    }
    if model.gamma.len() != k {
        r.push("gamma", None, format!("gamma has length {}, expected {k}", model.gamma.len()));
    }
    if model.q.len() != k {
        r.push("Q", None, format!("Q has {} rows, expected {k}", model.q.len()));
    }
    for (i, row) in model.q.iter().enumerate() {
        if row.len() != k {
            r.push("Q", Some(i + 1), format!("Q row {} has length {}", i + 1, row.len()));
        }
    }
    if !r.passed() {
        return r;
    }
    for i in 0..k {
        if !(model.v[i] > 0.0) || !model.v[i].is_finite() {
            r.push("v", Some(i + 1), format!("v_{} = {} is not positive", i + 1, model.v[i]));
        }
        if i > 0 && !(model.v[i] > model.v[i - 1]) {
            r.push("v", Some(i + 1), format!("v is not strictly increasing at index {}", i + 1));
        }
        if !(model.gamma[i] >= 0.0) {
            r.push("gamma", Some(i + 1), format!("gamma_{} = {} is negative", i + 1, model.gamma[i]));
        }
    }
    let gs: f64 = model.gamma.iter().sum();
    if (gs - 1.0).abs() > PROB_TOL {
        r.push("gamma", None, format!("gamma sums to {gs}"));
    }
    for i in 0..k {
        for j in 0..k {
            if !(model.q[i][j] >= 0.0) {
                r.push("Q", Some(i + 1), format!("q_{}{} = {} is negative", i + 1, j + 1, model.q[i][j]));
            }
        }
        let s = model.row_sum(i);
        if s > 1.0 + PROB_TOL {
            r.push("Q", Some(i + 1), format!("substochasticity: row {} of Q sums to {s}", i + 1));
        }
    }
    match model.tau {
        Patience::Bounded(0) => r.push("tau", None, "tau must be positive".into()),
        Patience::Unbounded if !(nu(model) > 0.0) => {
            r.push("tau", None, "unbounded patience requires nu > 0".into())
        }
        _ => {}
    }
    r
}

/// `1 - max_i sum_j q_ij`.
pub fn nu(model: &MarketModel) -> f64 {
    let max = (0..model.k())
        .map(|i| model.row_sum(i))
        .fold(f64::NEG_INFINITY, f64::max);
    1.0 - max
}

/// `floor(|ln eps / ln(1 - nu)|)`, at least 1.
pub fn tau_epsilon(epsilon: f64, nu: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::validation(format!("epsilon = {epsilon} outside (0,1)")));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::validation(format!("nu = {nu} outside (0,1)")));
    }
    let ratio = (epsilon.ln() / (1.0 - nu).ln()).abs();
    // ratios that are integers up to rounding (eps = (1-nu)^n) floor to n
    let t = (ratio + 1e-9).floor() as usize;
    Ok(t.max(1))
}

/// Bounded-patience approximation of an unbounded model, with its error bound `v_K eps / nu`.
pub fn truncate_to_bp(model: &MarketModel, epsilon: f64) -> Result<(MarketModel, f64)> {
    truncate_to_bp_with_nu(model, epsilon, None)
}

/// As [`truncate_to_bp`] but with an externally supplied `nu`.
pub fn truncate_to_bp_with_nu(
    model: &MarketModel,
    epsilon: f64,
    nu_override: Option<f64>,
) -> Result<(MarketModel, f64)> {
    if model.tau != Patience::Unbounded {
        return Err(Error::validation("already bounded"));
    }
    let nu = nu_override.unwrap_or_else(|| nu(model));
    if !(nu > 0.0) {
        return Err(Error::validation("no finite truncation: nu = 0"));
    }
    let tau = tau_epsilon(epsilon, nu)?;
    let vk = *model.v.last().expect("K >= 1");
    Ok((model.clone().with_tau(Patience::Bounded(tau)), vk * epsilon / nu))
}

/// Minimal phase duration and number of phases per patience window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaceConfig {
    pub sigma: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

impl PaceConfig {
    /// Pace for a finite-patience model; `tau` must be a multiple of `sigma`.
    pub fn new(tau: usize, sigma: usize) -> Result<Self> {
        if sigma == 0 || tau == 0 {
            return Err(Error::validation("sigma and tau must be positive"));
        }
        if tau % sigma != 0 {
            return Err(Error::validation(format!(
                "tau not a multiple of sigma (tau = {tau}, sigma = {sigma})"
            )));
        }
        Ok(PaceConfig {
            sigma,
            m: tau / sigma,
        })
    }

    pub fn for_model(model: &MarketModel, sigma: usize) -> Result<Self> {
        PaceConfig::new(model.tau_finite()?, sigma)
    }

    pub fn tau(&self) -> usize {
        self.sigma * self.m
    }
}
