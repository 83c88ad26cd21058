//! Primitive system parameters and the derived decision thresholds.
//!
//! Customers arrive at rate `lambda` to a single exponential server of rate
//! `mu`. An arriving customer may instead sit in a lounge, leaving it after an
//! Exp(`nu`) delay. Waiting costs accrue at rate `alpha` in the queue and
//! `beta` in the lounge, with `alpha > beta > 0`: the lounge is the more
//! comfortable place to wait.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// The five primitive rates/costs of the model.
///
/// Construct through [`SystemParams::new`] or [`SystemParams::from_config_str`],
/// both of which validate; every other operation in the crate assumes a
/// validated instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Arrival rate (customers/time).
    pub lambda: f64,
    /// Service rate (customers/time).
    pub mu: f64,
    /// Lounge-exit rate (1/time).
    pub nu: f64,
    /// Queue waiting cost rate (cost/time).
    pub alpha: f64,
    /// Lounge waiting cost rate (cost/time).
    pub beta: f64,
}

/// One violated constraint, with the offending field and bound.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub value: f64,
    pub constraint: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.field, self.value, self.constraint)
    }
}

/// Outcome of validating a [`SystemParams`]: empty means ok.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

impl SystemParams {
    /// Builds and validates a parameter set.
    pub fn new(lambda: f64, mu: f64, nu: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = SystemParams {
            lambda,
            mu,
            nu,
            alpha,
            beta,
        };
        let report = p.validate();
        if report.ok() {
            Ok(p)
        } else {
            Err(Error::InvalidParams(report))
        }
    }

    /// Checks every model constraint, reporting all violations at once.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut require =
            |cond: bool, field: &'static str, value: f64, constraint: &'static str| {
                if !cond {
                    violations.push(Violation {
                        field,
                        value,
                        constraint,
                    });
                }
            };
        require(
            self.lambda.is_finite() && self.lambda > 0.0,
            "lambda",
            self.lambda,
            "lambda must be positive",
        );
        require(
            self.mu.is_finite() && self.mu > 0.0,
            "mu",
            self.mu,
            "mu must be positive",
        );
        require(
            self.nu.is_finite() && self.nu > 0.0,
            "nu",
            self.nu,
            "nu must be positive",
        );
        require(
            self.beta.is_finite() && self.beta > 0.0,
            "beta",
            self.beta,
            "beta must be positive",
        );
        require(
            self.alpha.is_finite() && self.alpha > self.beta,
            "alpha",
            self.alpha,
            "alpha must exceed beta",
        );
        if self.lambda > 0.0 && self.mu > 0.0 {
            require(
                self.lambda < self.mu,
                "lambda",
                self.lambda,
                "rho >= 1: lambda must be below mu for stability",
            );
        }
        ValidationReport { violations }
    }

    /// Load factor `lambda / mu`.
    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    /// Parses a flat key-value config (`key = value` or `key=value`, `#`
    /// comments). Keys: `lambda`, `mu`, `nu`, `alpha`, and either `beta` or
    /// `eta` (in which case `beta = eta * nu`). Beta is canonical: supplying
    /// both is rejected.
    pub fn from_config_str(text: &str) -> Result<Self> {
        Self::from_config_map(&parse_config_str(text)?)
    }

    /// Same as [`from_config_str`](Self::from_config_str) but from an already
    /// parsed key/value map; used by the CLI to merge flag overrides.
    pub fn from_config_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        for key in map.keys() {
            match key.as_str() {
                "lambda" | "mu" | "nu" | "alpha" | "beta" | "eta" => {}
                other => return Err(Error::Config(format!("unknown key {:?}", other))),
            }
        }
        let get = |k: &str| -> Result<f64> {
            map.get(k)
                .copied()
                .ok_or_else(|| Error::Config(format!("missing key {:?}", k)))
        };
        let nu = get("nu")?;
        let beta = match (map.get("beta"), map.get("eta")) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "both beta and eta given; supply only one".into(),
                ))
            }
            (Some(&b), None) => b,
            (None, Some(&eta)) => eta * nu,
            (None, None) => return Err(Error::Config("missing key \"beta\" (or \"eta\")".into())),
        };
        SystemParams::new(get("lambda")?, get("mu")?, nu, get("alpha")?, beta)
    }
}

/// Parses the flat key-value config syntax into a raw map, without
/// interpreting the keys; callers can layer overrides before handing the map
/// to [`SystemParams::from_config_map`].
pub fn parse_config_str(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut map: BTreeMap<String, f64> = BTreeMap::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", line_no + 1)))?;
        let key = key.trim().to_string();
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!(
                "line {}: bad number {:?}",
                line_no + 1,
                value.trim()
            ))
        })?;
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("duplicate key {:?}", key)));
        }
    }
    Ok(map)
}

/// Quantities derived from [`SystemParams`] that the rest of the crate
/// consumes, chiefly the queue/lounge thresholds of the join rule.
///
/// `a_real = mu*beta/(alpha*nu)` and `b_real = (mu-lambda)/nu - a_real` are
/// the real-valued thresholds; the queueing system lives on integers, so the
/// effective rule is `q > a_int` and `l < b_int` with `a_int = floor(a_real)`
/// and `b_int = ceil(b_real)`. When `b_real <= 0` the lounge is never used:
/// `b_int` is clamped to 0 and `lounge_inactive` records the clamp.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivedThresholds {
    pub rho: f64,
    /// Lounge-viability bound `1 - beta/alpha`; the lounge sees use only
    /// while `rho < delta`.
    pub delta: f64,
    /// Comfort factor `beta / nu`.
    pub eta: f64,
    pub a_real: f64,
    pub b_real: f64,
    pub a_int: u32,
    pub b_int: u32,
    pub lounge_inactive: bool,
}

/// Computes every derived quantity from validated parameters.
pub fn derive_thresholds(params: &SystemParams) -> DerivedThresholds {
    let rho = params.rho();
    let a_real = params.mu * params.beta / (params.alpha * params.nu);
    let b_real = (params.mu - params.lambda) / params.nu - a_real;
    let lounge_inactive = b_real <= 0.0;
    let b_int = if lounge_inactive {
        0
    } else {
        b_real.ceil() as u32
    };
    DerivedThresholds {
        rho,
        delta: 1.0 - params.beta / params.alpha,
        eta: params.beta / params.nu,
        a_real,
        b_real,
        a_int: a_real.floor() as u32,
        b_int,
        lounge_inactive,
    }
}
