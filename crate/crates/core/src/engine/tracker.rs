use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{inspect, Model};

pub type DerivedFn = Arc<dyn Fn(&Model) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Extractor {
    /// A dotted attribute path resolving to a scalar.
    Path(String),
    Derived(DerivedFn),
}

impl std::fmt::Debug for Extractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extractor::Path(p) => write!(f, "Path({p:?})"),
            Extractor::Derived(_) => f.write_str("Derived"),
        }
    }
}

impl Extractor {
    fn extract(&self, model: &Model) -> Result<f64> {
        match self {
            Extractor::Path(p) => inspect(model, p)?.as_f64().ok_or_else(|| {
                Error::Validation(format!("tracked path `{p}` is not a scalar"))
            }),
            Extractor::Derived(f) => Ok(f(model)),
        }
    }
}

pub const DEFAULT_VARIABLES: [&str; 25] = [
    "nominal_gdp",
    "real_gdp",
    "real_household_consumption",
    "nominal_household_consumption",
    "real_government_consumption",
    "nominal_government_consumption",
    "real_capitalformation",
    "nominal_capitalformation",
    "real_exports",
    "nominal_exports",
    "real_imports",
    "nominal_imports",
    "gdp_deflator",
    "inflation_rate",
    "expected_inflation",
    "expected_growth",
    "employment_rate",
    "unemployment_rate",
    "nominal_wages",
    "policy_rate",
    "bank_profits",
    "bank_equity",
    "total_loans",
    "government_debt",
    "government_deficit",
];

fn default_path(name: &str) -> String {
    match name {
        "nominal_wages" => "agg.nominal_wage".to_string(),
        "policy_rate" => "cb.rate".to_string(),
        "bank_profits" => "bank.Pi_k".to_string(),
        "bank_equity" => "bank.E_k".to_string(),
        "total_loans" => "bank.L".to_string(),
        "government_debt" => "gov.debt".to_string(),
        "government_deficit" => "gov.deficit".to_string(),
        other => format!("agg.{other}"),
    }
}

/// Ordered list of named series to record after every quarter.
#[derive(Debug, Clone)]
pub struct DataTracker {
    entries: Vec<(String, Extractor)>,
}

impl Default for DataTracker {
    fn default() -> Self {
        let entries = DEFAULT_VARIABLES
            .iter()
            .map(|&name| {
                let ex = if name == "unemployment_rate" {
                    Extractor::Derived(Arc::new(|m: &Model| 1.0 - m.agg.employment_rate))
                } else {
                    Extractor::Path(default_path(name))
                };
                (name.to_string(), ex)
            })
            .collect();
        Self { entries }
    }
}

impl DataTracker {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_name(&self, name: &str) -> Result<()> {
        if self.entries.iter().any(|(n, _)| n == name) {
            return Err(Error::Validation(format!(
                "tracked variable `{name}` already exists"
            )));
        }
        Ok(())
    }

    /// Tracks the scalar at `path`; the path is resolved against `model` now.
    pub fn track(&mut self, name: &str, path: &str, model: &Model) -> Result<()> {
        self.check_name(name)?;
        let ex = Extractor::Path(path.to_string());
        ex.extract(model)?;
        self.entries.push((name.to_string(), ex));
        Ok(())
    }

    pub fn track_derived(
        &mut self,
        name: &str,
        f: impl Fn(&Model) -> f64 + Send + Sync + 'static,
    ) -> Result<()> {
        self.check_name(name)?;
        self.entries
            .push((name.to_string(), Extractor::Derived(Arc::new(f))));
        Ok(())
    }

    pub fn record(&self, model: &Model, data: &mut SimulationData) -> Result<()> {
        for (name, ex) in &self.entries {
            let v = ex.extract(model)?;
            data.series.entry(name.clone()).or_default().push(v);
        }
        Ok(())
    }

    pub fn start(&self) -> SimulationData {
        SimulationData {
            series: self
                .entries
                .iter()
                .map(|(n, _)| (n.clone(), Vec::new()))
                .collect(),
        }
    }
}

/// Named time series of one run, one value per completed quarter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimulationData {
    pub series: IndexMap<String, Vec<f64>>,
}

impl SimulationData {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(Vec::as_slice)
    }

    /// Quarters recorded.
    pub fn len(&self) -> usize {
        self.series.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }
}

impl std::ops::Index<&str> for SimulationData {
    type Output = [f64];

    fn index(&self, name: &str) -> &[f64] {
        self.get(name)
            .unwrap_or_else(|| panic!("no tracked variable `{name}`"))
    }
}
