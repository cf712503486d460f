//! Per-quarter accounting checks and the deterministic golden comparison.

use crate::engine::{step, DataTracker, NoShock, SimulationData, StepReport};
use crate::error::{Error, Result};
use crate::io::read_table;
use crate::model::Model;
use crate::rng::RngKey;

/// Deterministic fixture run over 20 quarters, frozen.
pub const GOLDEN_CSV: &str = include_str!("../fixtures/golden_deterministic_T20.csv");

/// The frozen deterministic trajectory of the bundled fixture.
pub fn golden() -> SimulationData {
    read_table(GOLDEN_CSV.as_bytes())
        .expect("bundled golden table is valid")
        .remove(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Quarters in which the check failed.
    pub failed_quarters: Vec<u32>,
    pub detail: Option<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            failed_quarters: Vec::new(),
            detail: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failed_quarters.is_empty() && self.detail.is_none()
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed() {
            return write!(f, "PASS {}", self.name);
        }
        write!(f, "FAIL {}", self.name)?;
        if !self.failed_quarters.is_empty() {
            let q: Vec<String> = self.failed_quarters.iter().map(u32::to_string).collect();
            write!(f, " (quarters {})", q.join(", "))?;
        }
        if let Some(d) = &self.detail {
            write!(f, ": {d}")?;
        }
        Ok(())
    }
}

/// Runs a copy of `model` under run key `for_run(seed, 1)` and checks the
/// income identity, money conservation and market conservation in every
/// quarter.
pub fn identity_suite(model: &Model, seed: u64) -> Result<Vec<Check>> {
    let mut m = model.clone();
    m.rng = RngKey::for_run(seed, 1);
    let mut income = Check::new("income identity");
    let mut money = Check::new("money conservation");
    let mut market = Check::new("market conservation");
    let mut reports: Vec<StepReport> = Vec::new();
    while m.agg.t <= m.prop.horizon {
        match step(&mut m, &NoShock) {
            Ok(r) => reports.push(r),
            Err(Error::Identity { quarter, .. }) => {
                income.failed_quarters.push(quarter);
                income.detail = Some(format!("run stopped in quarter {quarter}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    for r in &reports {
        if !r.income_identity_ok() {
            income.failed_quarters.push(r.quarter);
        }
        if !r.money_ok() {
            money.failed_quarters.push(r.quarter);
        }
        if !r.market_ok() {
            market.failed_quarters.push(r.quarter);
        }
    }
    Ok(vec![income, money, market])
}

/// Compares a deterministic run of `model` with `golden` bit for bit, over
/// as many quarters as `golden` holds.
pub fn golden_check(model: &Model, golden: &SimulationData) -> Result<Check> {
    let mut check = Check::new("deterministic golden");
    let mut m = model.clone();
    m.set_deterministic(true)?;
    m.prop.horizon = golden.len() as u32;
    let data = crate::engine::run(&mut m, &NoShock, &DataTracker::default())?;
    let mut missing = Vec::new();
    let mut first: Option<String> = None;
    for (name, want) in &golden.series {
        let Some(got) = data.get(name) else {
            missing.push(name.clone());
            continue;
        };
        for (q, (a, b)) in got.iter().zip(want).enumerate() {
            let quarter = q as u32 + 1;
            if a.to_bits() == b.to_bits() {
                continue;
            }
            if first.is_none() {
                first = Some(format!("{name} in quarter {quarter} is {a:e}, golden {b:e}"));
            }
            if !check.failed_quarters.contains(&quarter) {
                check.failed_quarters.push(quarter);
            }
        }
    }
    check.failed_quarters.sort_unstable();
    if !missing.is_empty() {
        check.detail = Some(format!("untracked variables {}", missing.join(", ")));
    } else {
        check.detail = first;
    }
    Ok(check)
}
