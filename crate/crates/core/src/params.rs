//! Model parameters, loading from JSON documents, and admissibility checks.
//!
//! Loading and validation are separate steps: [`load_params`] only checks
//! the shape of the document, while [`validate`] evaluates every inequality
//! the model relies on and reports both sides of each one.

use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, ParseError, Result};

/// Margin below which a passing strict inequality is flagged as marginal.
pub const MARGINAL_EPS: f64 = 1e-12;

/// Economic parameters of the model plus the assimilation allowance `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// High-skill native base salary.
    #[serde(rename = "I_HS")]
    pub i_hs: f64,
    /// Low-skill native base salary.
    #[serde(rename = "I_LS")]
    pub i_ls: f64,
    /// Base salary of an assimilating migrant.
    #[serde(rename = "I_A")]
    pub i_a: f64,
    /// Wage of a non-assimilating migrant.
    #[serde(rename = "I_NA")]
    pub i_na: f64,
    /// Income added per unit share of high-skill natives.
    #[serde(rename = "I_E")]
    pub i_e: f64,
    /// Human-capital formation cost coefficient.
    #[serde(rename = "c_HS")]
    pub c_hs: f64,
    /// Cost of assimilation borne by a migrant.
    #[serde(rename = "c_A")]
    pub c_a: f64,
    /// Weight on relative deprivation.
    pub beta: f64,
    /// Migrant-to-native population ratio.
    pub m: f64,
    /// Native population size; only scales welfare.
    #[serde(rename = "N")]
    pub n: f64,
    /// Assimilation allowance paid per assimilating migrant.
    #[serde(rename = "A")]
    pub allowance: f64,
}

const REQUIRED_KEYS: [&str; 9] = ["I_HS", "I_LS", "I_A", "I_NA", "I_E", "c_HS", "c_A", "beta", "m"];
const OPTIONAL_KEYS: [&str; 2] = ["N", "A"];

impl ModelParams {
    /// Parameters of the two worked examples (the closed-economy example uses
    /// the native subset of these values).
    pub fn example() -> Self {
        ModelParams {
            i_hs: 1.0,
            i_ls: 0.6,
            i_a: 0.53,
            i_na: 0.3,
            i_e: 0.35,
            c_hs: 0.7,
            c_a: 0.2,
            beta: 0.5,
            m: 0.1,
            n: 1.0,
            allowance: 0.0,
        }
    }

    pub fn with_allowance(self, allowance: f64) -> Self {
        ModelParams { allowance, ..self }
    }

    /// Wage gap between high- and low-skill natives.
    pub fn skill_gap(&self) -> f64 {
        self.i_hs - self.i_ls
    }

    /// Migrant population size, `m * N`.
    pub fn migrants(&self) -> f64 {
        self.m * self.n
    }

    fn fields(&self) -> [(&'static str, f64); 11] {
        [
            ("I_HS", self.i_hs),
            ("I_LS", self.i_ls),
            ("I_A", self.i_a),
            ("I_NA", self.i_na),
            ("I_E", self.i_e),
            ("c_HS", self.c_hs),
            ("c_A", self.c_a),
            ("beta", self.beta),
            ("m", self.m),
            ("N", self.n),
            ("A", self.allowance),
        ]
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        match self.fields().iter().find(|(_, v)| !v.is_finite()) {
            Some((key, _)) => Err(Error::NonFinite(key)),
            None => Ok(()),
        }
    }
}

/// Parses a parameter document. Does not check the economics.
pub fn load_params(text: &str) -> std::result::Result<ModelParams, ParseError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(ParseError::NotAnObject);
    };
    params_from_map(&map)
}

pub fn load_params_file(path: &Path) -> Result<ModelParams> {
    let text = std::fs::read_to_string(path)?;
    Ok(load_params(&text)?)
}

fn params_from_map(map: &Map<String, Value>) -> std::result::Result<ModelParams, ParseError> {
    if let Some(key) = map
        .keys()
        .find(|k| !REQUIRED_KEYS.contains(&k.as_str()) && !OPTIONAL_KEYS.contains(&k.as_str()))
    {
        return Err(ParseError::Unknown(key.clone()));
    }

    let number = |key: &str| -> std::result::Result<Option<f64>, ParseError> {
        match map.get(key) {
            None => Ok(None),
            Some(v) => {
                let x = v.as_f64().ok_or_else(|| ParseError::WrongType(key.to_string()))?;
                if x.is_finite() {
                    Ok(Some(x))
                } else {
                    Err(ParseError::NonFinite(key.to_string()))
                }
            }
        }
    };
    let required = |key: &'static str| number(key)?.ok_or(ParseError::Missing(key));

    Ok(ModelParams {
        i_hs: required("I_HS")?,
        i_ls: required("I_LS")?,
        i_a: required("I_A")?,
        i_na: required("I_NA")?,
        i_e: required("I_E")?,
        c_hs: required("c_HS")?,
        c_a: required("c_A")?,
        beta: required("beta")?,
        m: required("m")?,
        n: number("N")?.unwrap_or(1.0),
        allowance: number("A")?.unwrap_or(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = ">=")]
    GreaterOrEqual,
}

/// One evaluated inequality `lhs <relation> rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub inequality: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub passed: bool,
    /// Set when the sides of a strict check are within [`MARGINAL_EPS`].
    pub marginal: bool,
    /// Implied by other checks; reported for completeness.
    pub derived: bool,
}

impl Check {
    fn new(name: &'static str, inequality: &'static str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let passed = match relation {
            Relation::Greater => lhs > rhs,
            Relation::GreaterOrEqual => lhs >= rhs,
        };
        Check {
            name,
            inequality,
            lhs,
            rhs,
            relation,
            passed,
            marginal: relation == Relation::Greater && (lhs - rhs).abs() < MARGINAL_EPS,
            derived: false,
        }
    }

    fn derived(mut self) -> Self {
        self.derived = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl ValidationReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        let overall = checks.iter().all(|c| c.passed);
        ValidationReport { checks, overall }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn has_marginal(&self) -> bool {
        self.checks.iter().any(|c| c.marginal)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok  " } else { "FAIL" };
            let op = match c.relation {
                Relation::Greater => ">",
                Relation::GreaterOrEqual => ">=",
            };
            write!(f, "{status} {:<16} {:<44} {} {op} {}", c.name, c.inequality, c.lhs, c.rhs)?;
            if c.marginal {
                write!(f, "  (marginal)")?;
            }
            writeln!(f)?;
        }
        write!(f, "overall: {}", if self.overall { "pass" } else { "fail" })
    }
}

fn native_checks(p: &ModelParams) -> Vec<Check> {
    use Relation::*;
    vec![
        Check::new("I_HS>I_LS", "I_HS > I_LS", p.i_hs, Greater, p.i_ls),
        Check::new("I_LS>0", "I_LS > 0", p.i_ls, Greater, 0.0),
        Check::new("beta>0", "beta > 0", p.beta, Greater, 0.0),
        Check::new("beta<1", "1 > beta", 1.0, Greater, p.beta),
        Check::new("N>0", "N > 0", p.n, Greater, 0.0),
        Check::new("Eq5", "c_HS > I_HS - I_LS", p.c_hs, Greater, p.skill_gap()),
    ]
}

/// Evaluates every admissibility condition of the open economy.
pub fn validate(p: &ModelParams) -> Result<ValidationReport> {
    use Relation::*;
    p.ensure_finite()?;
    let gap = p.skill_gap();
    let rd_weight = p.beta / (1.0 + p.m);

    let mut checks = native_checks(p);
    checks.extend([
        Check::new("I_A>I_NA", "I_A > I_NA", p.i_a, Greater, p.i_na),
        Check::new("I_NA>0", "I_NA > 0", p.i_na, Greater, 0.0),
        Check::new("I_LS-m*c_A>I_A", "I_LS - m*c_A > I_A", p.i_ls - p.m * p.c_a, Greater, p.i_a),
        Check::new("m>0", "m > 0", p.m, Greater, 0.0),
        Check::new("m<1", "1 > m", 1.0, Greater, p.m),
        Check::new("A>=0", "A >= 0", p.allowance, GreaterOrEqual, 0.0),
        Check::new("A<c_A", "c_A > A", p.c_a, Greater, p.allowance),
        Check::new(
            "Eq8",
            "beta/(1+m)*(I_HS-I_LS) > (1-beta)*I_E",
            rd_weight * gap,
            Greater,
            (1.0 - p.beta) * p.i_e,
        ),
        Check::new("Eq9", "c_HS > (1-beta)*I_E", p.c_hs, Greater, (1.0 - p.beta) * p.i_e).derived(),
        Check::new(
            "Eq10",
            "(1-beta)*(I_A+I_E-I_NA) > beta/(1+m)*(I_HS-I_A)",
            (1.0 - p.beta) * (p.i_a + p.i_e - p.i_na),
            Greater,
            rd_weight * (p.i_hs - p.i_a),
        ),
    ]);
    Ok(ValidationReport::from_checks(checks))
}

/// Evaluates the subset of conditions the closed (natives-only) economy needs.
pub fn validate_closed(p: &ModelParams) -> Result<ValidationReport> {
    p.ensure_finite()?;
    Ok(ValidationReport::from_checks(native_checks(p)))
}

/// Parameters that passed [`validate`], or were explicitly forced through.
///
/// Analysis of the open economy (thresholds, steady states, simulation,
/// welfare) is only supported on admissible parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissible {
    params: ModelParams,
    forced: bool,
}

impl Admissible {
    pub fn new(params: ModelParams) -> Result<Self> {
        let report = validate(&params)?;
        if report.overall {
            Ok(Admissible { params, forced: false })
        } else {
            Err(Error::Inadmissible(Box::new(report)))
        }
    }

    /// Skips the admissibility gate. Results are unsupported: the closed forms
    /// may divide by zero or describe states that do not exist.
    pub fn force(params: ModelParams) -> Result<Self> {
        params.ensure_finite()?;
        Ok(Admissible { params, forced: true })
    }

    /// Re-admits these parameters with a different allowance.
    pub fn with_allowance(&self, allowance: f64) -> Result<Self> {
        let params = self.params.with_allowance(allowance);
        if self.forced {
            Admissible::force(params)
        } else {
            Admissible::new(params)
        }
    }

    pub fn is_forced(&self) -> bool {
        self.forced
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

impl Deref for Admissible {
    type Target = ModelParams;

    fn deref(&self) -> &ModelParams {
        &self.params
    }
}

/// Gate for the closed-economy operations.
pub(crate) fn ensure_closed_admissible(p: &ModelParams) -> Result<()> {
    let report = validate_closed(p)?;
    if report.overall {
        Ok(())
    } else {
        Err(Error::Inadmissible(Box::new(report)))
    }
}
