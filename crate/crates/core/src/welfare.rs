//! Utilitarian welfare of natives and migrants, and the verdict on the
//! allowance that just tips the economy into full assimilation.

use serde::Serialize;

use crate::equilibria::{thresholds, Thresholds};
use crate::error::{Error, Result};
use crate::model::{utilities_open, State};
use crate::params::{Admissible, ModelParams};

/// Band around `c_A = rhs` inside which the two verdict routes may disagree.
pub const VERDICT_BAND: f64 = 1e-12;

/// Total native utility at `state` under allowance `allowance`.
pub fn sw_natives(params: &ModelParams, state: State, allowance: f64) -> Result<f64> {
    let u = utilities_open(&params.with_allowance(allowance), state)?.natives;
    Ok(params.n * (state.q * (u.u_hs - u.u_ls) + u.u_ls))
}

/// Total migrant utility at `state` under allowance `allowance`.
pub fn sw_migrants(params: &ModelParams, state: State, allowance: f64) -> Result<f64> {
    let mig = utilities_open(&params.with_allowance(allowance), state)?
        .migrants
        .expect("open profile has migrants");
    Ok(params.migrants() * (state.p * mig.u_a + (1.0 - state.p) * mig.u_na))
}

/// Upper bound on `c_A` below which the policy raises native welfare.
pub fn cost_threshold(params: &ModelParams, th: &Thresholds) -> f64 {
    let b = params.beta;
    th.ca_bar
        + th.q_star * th.q_star2 * b * (params.c_hs - (1.0 - b) * params.i_e)
            / ((1.0 + params.m) * (1.0 - b) * (1.0 - b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyStatus {
    /// The allowance `A*` is needed and was evaluated.
    Evaluated,
    /// `A* <= 0`: migrants assimilate without any allowance.
    NoPolicyNeeded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareReport {
    pub status: PolicyStatus,
    pub thresholds: Thresholds,
    /// Welfare at `(0, q*)` with no allowance.
    pub sw_natives_baseline: f64,
    pub sw_migrants_baseline: f64,
    /// Welfare at `(1, q**)` with allowance `A*`.
    pub sw_natives_policy: Option<f64>,
    pub sw_migrants_policy: Option<f64>,
    pub ca_threshold_rhs: Option<f64>,
    pub natives_better_off: Option<bool>,
    pub migrants_better_off: Option<bool>,
    /// `c_A < ca_threshold_rhs`.
    pub cost_condition_holds: Option<bool>,
}

/// Compares no assimilation without allowance against full assimilation
/// bought with the minimal allowance `A*`.
pub fn policy_verdict(params: &Admissible) -> Result<WelfareReport> {
    let p = params.params();
    let th = thresholds(params);
    let baseline = State::unchecked(0.0, th.q_star);
    let sw_natives_baseline = sw_natives(p, baseline, 0.0)?;
    let sw_migrants_baseline = sw_migrants(p, baseline, 0.0)?;

    if th.a_star <= 0.0 {
        return Ok(WelfareReport {
            status: PolicyStatus::NoPolicyNeeded,
            thresholds: th,
            sw_natives_baseline,
            sw_migrants_baseline,
            sw_natives_policy: None,
            sw_migrants_policy: None,
            ca_threshold_rhs: None,
            natives_better_off: None,
            migrants_better_off: None,
            cost_condition_holds: None,
        });
    }

    let assimilated = State::unchecked(1.0, th.q_star2);
    let sw_natives_policy = sw_natives(p, assimilated, th.a_star)?;
    let sw_migrants_policy = sw_migrants(p, assimilated, th.a_star)?;
    let rhs = cost_threshold(p, &th);
    let natives_better_off = sw_natives_policy > sw_natives_baseline;
    let condition = p.c_a < rhs;

    if natives_better_off != condition && (rhs - p.c_a).abs() > VERDICT_BAND {
        return Err(Error::Assumption(format!(
            "welfare comparison ({sw_natives_policy} vs {sw_natives_baseline}) disagrees with cost condition {} < {rhs}",
            p.c_a
        )));
    }

    Ok(WelfareReport {
        status: PolicyStatus::Evaluated,
        thresholds: th,
        sw_natives_baseline,
        sw_migrants_baseline,
        sw_natives_policy: Some(sw_natives_policy),
        sw_migrants_policy: Some(sw_migrants_policy),
        ca_threshold_rhs: Some(rhs),
        natives_better_off: Some(natives_better_off),
        migrants_better_off: Some(sw_migrants_policy > sw_migrants_baseline),
        cost_condition_holds: Some(condition),
    })
}
