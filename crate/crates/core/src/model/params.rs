//! Keyed parameter and initial-condition maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar, array or matrix of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Array(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Scalar(v)
    }
}

impl From<Vec<f64>> for ParamValue {
    fn from(v: Vec<f64>) -> Self {
        ParamValue::Array(v)
    }
}

/// Keyed map shared by [`ParameterSet`] and [`InitialConditions`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeyedMap(pub BTreeMap<String, ParamValue>);

impl KeyedMap {
    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<ParamValue>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn remove(&mut self, key: &str) -> Option<ParamValue> {
        self.0.remove(key)
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        match self.0.get(key) {
            Some(ParamValue::Scalar(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn array(&self, key: &str) -> Option<&[f64]> {
        match self.0.get(key) {
            Some(ParamValue::Array(v)) => Some(v),
            _ => None,
        }
    }
}

/// Collects every schema problem before reporting.
struct Checker<'a> {
    section: &'static str,
    map: &'a KeyedMap,
    problems: Vec<String>,
}

impl<'a> Checker<'a> {
    fn new(section: &'static str, map: &'a KeyedMap) -> Self {
        Self {
            section,
            map,
            problems: Vec::new(),
        }
    }

    fn complain(&mut self, key: &str, what: &str) {
        self.problems.push(format!("{}.{key}: {what}", self.section));
    }

    fn scalar(&mut self, key: &str) -> Option<f64> {
        match self.map.get(key) {
            None => {
                self.complain(key, "missing");
                None
            }
            Some(ParamValue::Scalar(v)) if v.is_finite() => Some(*v),
            Some(ParamValue::Scalar(_)) => {
                self.complain(key, "must be finite");
                None
            }
            Some(_) => {
                self.complain(key, "expected a scalar");
                None
            }
        }
    }

    fn in_range(&mut self, key: &str, lo: f64, hi: f64) {
        if let Some(v) = self.scalar(key) {
            if !(lo..=hi).contains(&v) {
                self.complain(key, &format!("{v} outside [{lo}, {hi}]"));
            }
        }
    }

    fn nonnegative(&mut self, key: &str) {
        if let Some(v) = self.scalar(key) {
            if v < 0.0 {
                self.complain(key, &format!("{v} must be nonnegative"));
            }
        }
    }

    fn count(&mut self, key: &str, min: f64) -> Option<f64> {
        let v = self.scalar(key)?;
        if v.fract() != 0.0 || v < min {
            self.complain(key, &format!("{v} must be an integer >= {min}"));
            return None;
        }
        Some(v)
    }

    fn array(&mut self, key: &str, len: Option<usize>) -> Option<&'a [f64]> {
        match self.map.get(key) {
            None => {
                self.complain(key, "missing");
                None
            }
            Some(ParamValue::Array(v)) => {
                if let Some(len) = len {
                    if v.len() != len {
                        self.complain(key, &format!("length {} but S = {len}", v.len()));
                        return None;
                    }
                }
                if v.iter().any(|x| !x.is_finite()) {
                    self.complain(key, "must be finite");
                    return None;
                }
                Some(v)
            }
            Some(_) => {
                self.complain(key, "expected an array");
                None
            }
        }
    }

    fn finish(self) -> Result<()> {
        if self.problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema(self.problems))
        }
    }
}

const FRACTIONS: &[&str] = &[
    "tau_INC",
    "mu",
    "psi",
    "psi_deposits",
    "rho",
    "pi_star",
    "r_star",
    "g_star",
    "theta_dividend",
    "eta",
    "loan_repayment",
];

/// Model parameters keyed by their conventional names.
///
/// Unknown keys are kept (and serialized back) but ignored by the model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterSet(pub KeyedMap);

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    pub fn set(&mut self, key: &str, value: impl Into<ParamValue>) {
        self.0.insert(key, value);
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.0.scalar(key)
    }

    pub fn array(&self, key: &str) -> Option<&[f64]> {
        self.0.array(key)
    }

    /// Number of sectors, when present and valid.
    pub fn sectors(&self) -> Option<usize> {
        self.scalar("S")
            .filter(|s| s.fract() == 0.0 && *s >= 1.0)
            .map(|s| s as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let mut c = Checker::new("parameters", &self.0);
        for key in FRACTIONS {
            c.in_range(key, 0.0, 1.0);
        }
        c.nonnegative("gamma_pi");
        c.nonnegative("gamma_y");
        c.nonnegative("lambda");
        c.nonnegative("benefit");
        let s = c.count("S", 1.0).map(|s| s as usize);
        c.count("scale", 1.0);
        if let Some(alpha) = c.array("alpha", s) {
            if alpha.iter().any(|&a| a <= 0.0) {
                c.complain("alpha", "productivities must be positive");
            }
        }
        if self.get("expectation_noise").is_some() {
            c.nonnegative("expectation_noise");
        }
        c.finish()
    }
}

/// Initial stocks, counts and calibration targets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InitialConditions(pub KeyedMap);

/// Relative tolerance for the expenditure identity of authored targets.
pub const IC_IDENTITY_TOL: f64 = 1e-10;

impl InitialConditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    pub fn set(&mut self, key: &str, value: impl Into<ParamValue>) {
        self.0.insert(key, value);
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.0.scalar(key)
    }

    pub fn array(&self, key: &str) -> Option<&[f64]> {
        self.0.array(key)
    }

    /// Schema validation against a sector count `s`.
    ///
    /// Reports every missing or malformed key together. Identity checks on
    /// the targets are separate (see [`InitialConditions::check_consistency`]).
    pub fn validate(&self, s: Option<usize>) -> Result<()> {
        let mut c = Checker::new("initial_conditions", &self.0);
        if let Some(counts) = c.array("N_firms", s) {
            if counts.iter().any(|&n| n < 0.0 || n.fract() != 0.0) {
                c.complain("N_firms", "counts must be nonnegative integers");
            }
        }
        c.count("N_active", 0.0);
        c.count("N_inactive", 0.0);
        for key in ["industry_sizes", "inventories"] {
            if let Some(v) = c.array(key, s) {
                if v.iter().any(|&x| x < 0.0) {
                    c.complain(key, "must be nonnegative");
                }
            }
        }
        for key in ["prices", "wages"] {
            if let Some(v) = c.array(key, s) {
                if v.iter().any(|&x| x <= 0.0) {
                    c.complain(key, "must be positive");
                }
            }
        }
        c.in_range("policy_rate", 0.0, 1.0);
        for key in [
            "gov_debt",
            "bank_equity",
            "loans",
            "deposits",
            "deposits_firms",
            "nominal_gdp",
            "consumption",
            "investment",
            "government",
            "exports",
            "imports",
        ] {
            c.nonnegative(key);
        }
        if self.get("rotw_net_position").is_some() {
            c.scalar("rotw_net_position");
        }
        for key in ["gdp_history", "deflator_history"] {
            if let Some(h) = c.array(key, None) {
                if h.len() < 4 {
                    c.complain(key, "needs at least 4 quarters");
                } else if h.iter().any(|&x| x <= 0.0) {
                    c.complain(key, "must be positive");
                }
            }
        }
        c.finish()
    }

    /// Target identities: GDP equals its expenditure components, firm
    /// deposits fit inside total deposits, and gross output exceeds GDP.
    pub fn check_consistency(&self) -> Result<()> {
        let get = |k: &str| self.scalar(k).unwrap_or(0.0);
        let gdp = get("nominal_gdp");
        let sum = get("consumption") + get("investment") + get("government") + get("exports")
            - get("imports");
        if (gdp - sum).abs() > IC_IDENTITY_TOL * gdp.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Consistency(format!(
                "nominal_gdp {gdp} != consumption + investment + government + exports - imports = {sum}"
            )));
        }
        if get("deposits_firms") > get("deposits") {
            return Err(Error::Consistency(
                "deposits_firms exceeds total deposits".to_string(),
            ));
        }
        if let (Some(sizes), Some(prices)) = (self.array("industry_sizes"), self.array("prices")) {
            let gross: f64 = sizes.iter().zip(prices).map(|(y, p)| y * p).sum();
            if gross <= gdp {
                return Err(Error::Consistency(format!(
                    "gross output {gross} must exceed nominal_gdp {gdp} (intermediate use)"
                )));
            }
            let domestic_use = get("consumption") + get("investment") + (gross - gdp);
            if get("imports") > domestic_use {
                return Err(Error::Consistency(
                    "imports exceed household, investment and intermediate demand".to_string(),
                ));
            }
        }
        if let Some(counts) = self.array("N_firms") {
            if let Some(sizes) = self.array("industry_sizes") {
                for (s, (&n, &y)) in counts.iter().zip(sizes).enumerate() {
                    if n == 0.0 && y > 0.0 {
                        return Err(Error::Consistency(format!(
                            "sector {s} has output but no firms"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
