//! Incomes, relative deprivation, utilities and replicator right-hand sides.
//!
//! Every function here is a direct transcription of the model's closed
//! forms; nothing is cached. The public entry points reject states outside
//! the unit square. Integrators and oracles that need to evaluate the field
//! at arbitrary points use [`payoff_gaps`] and [`field`], which do not check.

use serde::Serialize;

use crate::error::{check_unit, Result};
use crate::params::ModelParams;

/// A point of the unit square: `p` is the share of assimilating migrants,
/// `q` the share of high-skill natives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub p: f64,
    pub q: f64,
}

impl State {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_unit("p", p)?;
        check_unit("q", q)?;
        Ok(State { p, q })
    }

    /// Builds a state without range checks. Used for roots that may fall
    /// outside the square and for intermediate integrator stages.
    pub fn unchecked(p: f64, q: f64) -> Self {
        State { p, q }
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.p - other.p).hypot(self.q - other.q)
    }

    pub fn in_square(&self, slack: f64) -> bool {
        (-slack..=1.0 + slack).contains(&self.p) && (-slack..=1.0 + slack).contains(&self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NativeUtilities {
    pub u_hs: f64,
    pub u_ls: f64,
    pub rd_ls: f64,
    pub i_hs: f64,
    pub i_ls: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MigrantUtilities {
    pub u_a: f64,
    pub u_na: f64,
    pub rd_a: f64,
    pub rd_na: f64,
    pub i_a: f64,
    pub i_na: f64,
}

/// Utilities, deprivation indices and incomes at one state. The migrant
/// block is absent for the closed economy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilityProfile {
    pub natives: NativeUtilities,
    pub migrants: Option<MigrantUtilities>,
}

pub fn utilities_closed(params: &ModelParams, q: f64) -> Result<UtilityProfile> {
    check_unit("q", q)?;
    let b = params.beta;
    let i_hs = params.i_hs + q * params.i_e;
    let i_ls = params.i_ls + q * params.i_e;
    let rd_ls = q * params.skill_gap();
    Ok(UtilityProfile {
        natives: NativeUtilities {
            u_hs: (1.0 - b) * i_hs - q * params.c_hs,
            u_ls: (1.0 - b) * i_ls - b * rd_ls,
            rd_ls,
            i_hs,
            i_ls,
        },
        migrants: None,
    })
}

pub fn utilities_open(params: &ModelParams, state: State) -> Result<UtilityProfile> {
    let State { p, q } = State::new(state.p, state.q)?;
    Ok(open_profile(params, p, q))
}

fn open_profile(params: &ModelParams, p: f64, q: f64) -> UtilityProfile {
    let b = params.beta;
    let m = params.m;
    let tax = p * m * params.allowance;

    let i_hs = params.i_hs + q * params.i_e - tax;
    let i_ls = params.i_ls + q * params.i_e - tax;
    let i_a = params.i_a + q * params.i_e;
    let i_na = params.i_na;

    let rd_ls = q / (1.0 + p * m) * params.skill_gap();
    let rd_a = (q * params.skill_gap() + (params.i_ls - params.i_a - tax)) / (1.0 + m);
    let rd_na = p * (i_a - i_na);

    UtilityProfile {
        natives: NativeUtilities {
            u_hs: (1.0 - b) * i_hs - q * params.c_hs,
            u_ls: (1.0 - b) * i_ls - b * rd_ls,
            rd_ls,
            i_hs,
            i_ls,
        },
        migrants: Some(MigrantUtilities {
            u_a: (1.0 - b) * i_a - (params.c_a - params.allowance) - b * rd_a,
            u_na: (1.0 - b) * i_na - b * rd_na,
            rd_a,
            rd_na,
            i_a,
            i_na,
        }),
    }
}

/// Payoff advantages `(u_A - u_NA, u_HS - u_LS)` at an arbitrary point.
pub fn payoff_gaps(params: &ModelParams, p: f64, q: f64) -> (f64, f64) {
    let profile = open_profile(params, p, q);
    let n = profile.natives;
    let mig = profile.migrants.expect("open profile has migrants");
    (mig.u_a - mig.u_na, n.u_hs - n.u_ls)
}

/// Replicator field of the open economy at an arbitrary point.
pub fn field(params: &ModelParams, p: f64, q: f64) -> (f64, f64) {
    let (h1, h2) = payoff_gaps(params, p, q);
    (p * (1.0 - p) * h1, q * (1.0 - q) * h2)
}

/// `u_HS - u_LS` in the closed economy at an arbitrary `q`.
pub fn closed_gap(params: &ModelParams, q: f64) -> f64 {
    let b = params.beta;
    let gap = params.skill_gap();
    (1.0 - b) * gap + b * q * gap - q * params.c_hs
}

/// Replicator field of the closed economy at an arbitrary `q`.
pub fn closed_field(params: &ModelParams, q: f64) -> f64 {
    q * (1.0 - q) * closed_gap(params, q)
}

pub fn rhs_closed(params: &ModelParams, q: f64) -> Result<f64> {
    check_unit("q", q)?;
    let u = utilities_closed(params, q)?.natives;
    Ok(q * (1.0 - q) * (u.u_hs - u.u_ls))
}

pub fn rhs_open(params: &ModelParams, state: State) -> Result<(f64, f64)> {
    let State { p, q } = State::new(state.p, state.q)?;
    Ok(field(params, p, q))
}
