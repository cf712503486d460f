use crate::error::{Error, Result};
use crate::model::Model;

/// A policy applied to the whole model at the start of every quarter,
/// before any agent acts.
pub trait Shock: Send + Sync {
    fn name(&self) -> &str;

    fn apply(&self, model: &mut Model);
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoShock;

impl Shock for NoShock {
    fn name(&self) -> &str {
        "none"
    }

    fn apply(&self, _model: &mut Model) {}
}

/// Raises the propensity to consume by `multiplier` at quarter 1 and takes
/// it back at `final_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsumptionShock {
    pub multiplier: f64,
    pub final_time: u32,
}

impl ConsumptionShock {
    pub fn new(multiplier: f64, final_time: u32) -> Result<Self> {
        if !(multiplier.is_finite() && multiplier > 0.0) {
            return Err(Error::Validation(format!(
                "consumption shock multiplier must be positive, got {multiplier}"
            )));
        }
        if final_time < 2 {
            return Err(Error::Validation(format!(
                "consumption shock final_time must be at least 2, got {final_time}"
            )));
        }
        Ok(Self {
            multiplier,
            final_time,
        })
    }
}

impl Shock for ConsumptionShock {
    fn name(&self) -> &str {
        "consumption"
    }

    fn apply(&self, model: &mut Model) {
        if model.agg.t == 1 {
            model.prop.psi *= self.multiplier;
        } else if model.agg.t == self.final_time {
            let p = &mut model.prop;
            p.psi /= self.multiplier;
            if (p.psi - p.psi_base).abs() <= 8.0 * f64::EPSILON * p.psi_base.abs() {
                p.psi = p.psi_base;
            }
        }
    }
}

impl<F> Shock for F
where
    F: Fn(&mut Model) + Send + Sync,
{
    fn name(&self) -> &str {
        "custom"
    }

    fn apply(&self, model: &mut Model) {
        self(model)
    }
}
