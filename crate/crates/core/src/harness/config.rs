//! Experiment configuration and the table of overridable constants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complexity::ComplexityConstants;
use crate::constructions::{TheoremAModel, TheoremBModel, TheoremBParams};
use crate::error::{invalid, Result};

/// Every overridable constant with its default.
pub const CONSTANT_DEFAULTS: &[(&str, f64)] = &[
    ("b0", 1.0),
    ("be_a", 0.56),
    ("c0", 1.0),
    ("c3", 1.0),
    ("c5", 1.0),
    ("c_key", 1.0),
    ("c_lambda", 1.0),
    ("c_m", 1.0),
    ("c_pac", 1.0),
    ("c_theta", 1.0),
    ("c_u", 1.0),
    ("eps_c", 1.0),
    ("kappa1", 1.0),
    ("lambda_c", 1.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    values: BTreeMap<String, f64>,
}

impl Default for Constants {
    fn default() -> Self {
        Self { values: CONSTANT_DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }
}

impl Constants {
    /// Defaults with `overrides` applied; unknown keys and non-finite values are rejected.
    pub fn with_overrides(overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in overrides {
            c.set(k, *v)?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !self.values.contains_key(key) {
            let known: Vec<&str> = CONSTANT_DEFAULTS.iter().map(|(k, _)| *k).collect();
            return invalid(format!("unknown constant `{key}` (known: {})", known.join(", ")));
        }
        if !value.is_finite() || value < 0.0 {
            return invalid(format!("constant `{key}` must be finite and >= 0 (got {value})"));
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> f64 {
        *self.values.get(key).unwrap_or_else(|| panic!("constant `{key}` is not registered"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn complexity(&self) -> ComplexityConstants {
        ComplexityConstants {
            c_u: self.get("c_u"),
            c_lambda: self.get("c_lambda"),
            kappa1: self.get("kappa1"),
            c_key: self.get("c_key"),
            c_pac: self.get("c_pac"),
            c_theta: self.get("c_theta"),
            c0: self.get("c0"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    A,
    B,
    C,
}

/// Dictionary used by the `Theorem::C` pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DictionaryChoice {
    Bernstein { m: usize, b: f64 },
    /// The two-indicator model; every grid `n` must be odd and >= 5.
    TheoremA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub theorem: Theorem,
    pub n_grid: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Size of the worker pool; results do not depend on it.
    pub workers: usize,
    /// `Theorem::B` only.
    pub epsilon: f64,
    pub kappa: f64,
    pub lambda_override: Option<f64>,
    pub m_override: Option<usize>,
    /// `Theorem::C` only.
    pub dictionary: DictionaryChoice,
    /// Confidence parameter `x` of the `Theorem::C` bounds.
    pub x: f64,
    /// The `Theorem::A` tail threshold is `tail_c / sqrt(n)`.
    pub tail_c: f64,
    pub constants: Constants,
}

impl ExperimentConfig {
    pub fn new(theorem: Theorem, master_seed: u64) -> Self {
        let (n_grid, t_grid, trials) = match theorem {
            Theorem::A => (vec![101], vec![0.1], 1000),
            Theorem::B => (vec![1000], vec![0.05], 100),
            Theorem::C => (vec![100, 400, 1600, 6400], vec![0.8], 2000),
        };
        Self {
            theorem,
            n_grid,
            t_grid,
            trials,
            master_seed,
            workers: 1,
            epsilon: 0.1,
            kappa: 1.0,
            lambda_override: None,
            m_override: None,
            dictionary: DictionaryChoice::Bernstein { m: 50, b: 1.0 },
            x: 3.0,
            tail_c: 0.5,
            constants: Constants::default(),
        }
    }

    pub fn theorem_b_params(&self, n: usize, temperature: f64) -> TheoremBParams {
        TheoremBParams {
            n,
            epsilon: self.epsilon,
            kappa: self.kappa,
            temperature,
            c_m: self.constants.get("c_m"),
            lambda_c: self.constants.get("lambda_c"),
            eps_c: self.constants.get("eps_c"),
            m_override: self.m_override,
            lambda_override: self.lambda_override,
        }
    }

    /// Checks every precondition before any sampling.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be >= 1");
        }
        if self.workers == 0 {
            return invalid("workers must be >= 1");
        }
        if self.n_grid.is_empty() || self.t_grid.is_empty() {
            return invalid("n and temperature grids must be non-empty");
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return invalid(format!("temperature must be finite and > 0 (got {t})"));
        }
        match self.theorem {
            Theorem::A => {
                for &n in &self.n_grid {
                    TheoremAModel::new(n)?;
                }
                if !(self.tail_c.is_finite()) {
                    return invalid("tail_c must be finite");
                }
            }
            Theorem::B => {
                for &n in &self.n_grid {
                    for &t in &self.t_grid {
                        TheoremBModel::new(&self.theorem_b_params(n, t))?;
                    }
                }
            }
            Theorem::C => {
                if !(self.x.is_finite() && self.x > 0.0) {
                    return invalid(format!("x must be finite and > 0 (got {})", self.x));
                }
                match self.dictionary {
                    DictionaryChoice::Bernstein { m, b } => {
                        if m < 2 || !(b.is_finite() && b > 0.0) {
                            return invalid(format!("Bernstein dictionary needs M >= 2 and b > 0 (got M = {m}, b = {b})"));
                        }
                        if let Some(n) = self.n_grid.iter().find(|n| **n == 0) {
                            return invalid(format!("n must be >= 1 (got {n})"));
                        }
                    }
                    DictionaryChoice::TheoremA => {
                        for &n in &self.n_grid {
                            TheoremAModel::new(n)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_overrides() {
        let mut m = BTreeMap::new();
        m.insert("kappa1".to_string(), 2.5);
        let c = Constants::with_overrides(&m).unwrap();
        assert_eq!(c.get("kappa1"), 2.5);
        assert_eq!(c.get("be_a"), 0.56);
        m.insert("nope".to_string(), 1.0);
        assert!(Constants::with_overrides(&m).is_err());
        let mut c = Constants::default();
        assert!(c.set("c_u", f64::NAN).is_err());
        assert_eq!(c.complexity(), ComplexityConstants::default());
    }

    #[test]
    fn validation() {
        let mut a = ExperimentConfig::new(Theorem::A, 1);
        assert!(a.validate().is_ok());
        a.n_grid = vec![101, 100];
        assert!(a.validate().is_err());
        let mut b = ExperimentConfig::new(Theorem::B, 1);
        assert!(b.validate().is_ok());
        b.epsilon = 0.2;
        assert!(b.validate().is_err());
        let mut c = ExperimentConfig::new(Theorem::C, 1);
        assert!(c.validate().is_ok());
        c.dictionary = DictionaryChoice::TheoremA;
        assert!(c.validate().is_err());
        c.n_grid = vec![101, 401];
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
    }
}
