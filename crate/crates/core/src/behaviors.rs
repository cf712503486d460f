//! Phase functions of the step pipeline and the behavior-override registry.
//!
//! Every phase function reads the acting agent group and the whole model and
//! returns the new values of specific attributes; the engine commits them.
//! A [`BehaviorRegistry`] can replace any named phase with a user function
//! while every other phase keeps its default.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Bank, CentralBank, Firms, Government, Model};

/// Coefficients of the policy rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorRule {
    pub rho: f64,
    pub r_star: f64,
    pub pi_star: f64,
    pub gamma_pi: f64,
    pub gamma_y: f64,
}

impl TaylorRule {
    pub fn from_model(model: &Model) -> Self {
        let p = &model.prop;
        Self {
            rho: p.rho,
            r_star: p.r_star,
            pi_star: p.pi_star,
            gamma_pi: p.gamma_pi,
            gamma_y: p.gamma_y,
        }
    }
}

/// Smoothed Taylor rule with a zero lower bound:
/// `max(0, rho*r_prev + (1-rho)*(r_star + pi_star + gamma_pi*(pi - pi_star) + gamma_y*gap))`.
pub fn taylor_rule(rule: &TaylorRule, r_prev: f64, pi_t: f64, gap_t: f64) -> Result<f64> {
    let inputs = [
        rule.rho,
        rule.r_star,
        rule.pi_star,
        rule.gamma_pi,
        rule.gamma_y,
        r_prev,
        pi_t,
        gap_t,
    ];
    if inputs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(format!(
            "taylor_rule: non-finite input in {inputs:?}"
        )));
    }
    let target = rule.r_star
        + rule.pi_star
        + rule.gamma_pi * (pi_t - rule.pi_star)
        + rule.gamma_y * gap_t;
    Ok((rule.rho * r_prev + (1.0 - rule.rho) * target).max(0.0))
}

/// Default policy rate: Taylor rule on current inflation and the expected
/// growth gap.
pub fn central_bank_rate(cb: &CentralBank, model: &Model) -> Result<f64> {
    let gap = model.agg.expected_growth - model.prop.g_star;
    taylor_rule(
        &TaylorRule::from_model(model),
        cb.rate,
        model.agg.inflation_rate,
        gap,
    )
}

/// Net interest income: `(rate + mu) * L - rate * D`.
pub fn bank_profits(bank: &Bank, model: &Model) -> f64 {
    let r = model.cb.rate;
    (r + model.prop.mu) * bank.loans - r * bank.deposits
}

/// Bound on the relative excess demand that feeds into prices.
pub const EXCESS_DEMAND_CLIP: f64 = 0.25;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FirmPlan {
    pub desired_output: Vec<f64>,
    pub labor_demand: Vec<u32>,
    pub price: Vec<f64>,
    pub wage: Vec<f64>,
}

/// Inventory-adjusted output targets, labor demand and prices.
///
/// Desired output is expected sales net of inventory; prices follow expected
/// inflation plus a bounded response to last quarter's excess demand. Wages
/// are indexed to expected inflation.
pub fn firms_plan(firms: &Firms, model: &Model) -> FirmPlan {
    let growth = model.agg.expected_growth;
    let inflation = model.agg.expected_inflation;
    let eta = model.prop.eta;
    let n = firms.len();
    let mut plan = FirmPlan {
        desired_output: Vec::with_capacity(n),
        labor_demand: Vec::with_capacity(n),
        price: Vec::with_capacity(n),
        wage: Vec::with_capacity(n),
    };
    for i in 0..n {
        let desired = ((1.0 + growth) * firms.sales[i] - firms.inventory[i]).max(0.0);
        let alpha = firms.productivity[i];
        let workers = if alpha > 0.0 {
            (desired / alpha).ceil()
        } else {
            0.0
        };
        let y = firms.output[i];
        let excess = ((firms.sales[i] - y) / y.max(1.0))
            .clamp(-EXCESS_DEMAND_CLIP, EXCESS_DEMAND_CLIP);
        let price = firms.price[i] * (1.0 + inflation) * (1.0 + eta * excess);
        plan.desired_output.push(desired);
        plan.labor_demand.push(workers.min(u32::MAX as f64) as u32);
        plan.price.push(price.max(f64::MIN_POSITIVE));
        plan.wage.push(firms.wage[i] * (1.0 + inflation));
    }
    plan
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GovernmentFlows {
    pub consumption: f64,
    pub transfers: f64,
    pub tax_revenue: f64,
    pub deficit: f64,
}

/// Taxes on labor income and distributed profits, transfers to everyone
/// without a job, and the resulting deficit.
///
/// Reads the quarter's income flows from [`Model::flows`]; `consumption` is
/// what the government actually bought in this quarter's goods market.
pub fn government_step(_gov: &Government, model: &Model) -> GovernmentFlows {
    let flows = &model.flows;
    let tax_revenue = model.prop.tau_inc * (flows.gross_wages + flows.dividends);
    let recipients = (model.unemployed_count() + model.w_inact.len()) as f64;
    let transfers = model.prop.benefit * flows.price_level * recipients;
    let consumption = flows.government_spent;
    GovernmentFlows {
        consumption,
        transfers,
        tax_revenue,
        deficit: consumption + transfers - tax_revenue,
    }
}

/// Default seller attractiveness in a sector: units affordable per unit of
/// currency, `S_i / P_i`.
pub fn goods_market_weights(model: &Model, sector: usize) -> Vec<f64> {
    let f = &model.firms;
    f.sector_range(sector)
        .map(|i| (f.inventory[i] / f.price[i]).max(0.0))
        .collect()
}

pub type CentralBankRateFn = Arc<dyn Fn(&CentralBank, &Model) -> f64 + Send + Sync>;
pub type BankProfitsFn = Arc<dyn Fn(&Bank, &Model) -> f64 + Send + Sync>;
pub type FirmsPlanFn = Arc<dyn Fn(&Firms, &Model) -> FirmPlan + Send + Sync>;
pub type GovernmentStepFn = Arc<dyn Fn(&Government, &Model) -> GovernmentFlows + Send + Sync>;
pub type GoodsMarketWeightsFn = Arc<dyn Fn(&Model, usize) -> Vec<f64> + Send + Sync>;

/// A replacement for one behavior point.
#[derive(Clone)]
pub enum Behavior {
    CentralBankRate(CentralBankRateFn),
    BankProfits(BankProfitsFn),
    FirmsPlan(FirmsPlanFn),
    GovernmentStep(GovernmentStepFn),
    GoodsMarketWeights(GoodsMarketWeightsFn),
}

impl Behavior {
    pub fn point(&self) -> &'static str {
        match self {
            Behavior::CentralBankRate(_) => "central_bank_rate",
            Behavior::BankProfits(_) => "bank_profits",
            Behavior::FirmsPlan(_) => "firms_plan",
            Behavior::GovernmentStep(_) => "government_step",
            Behavior::GoodsMarketWeights(_) => "goods_market_weights",
        }
    }

    /// Central bank that always sets the same rate.
    pub fn fixed_rate(rate: f64) -> Self {
        Behavior::CentralBankRate(Arc::new(move |_, _| rate))
    }
}

pub const BEHAVIOR_POINTS: &[&str] = &[
    "central_bank_rate",
    "bank_profits",
    "firms_plan",
    "government_step",
    "goods_market_weights",
];

/// Named overrides; empty by default.
#[derive(Clone, Default)]
pub struct BehaviorRegistry {
    overrides: BTreeMap<&'static str, Behavior>,
}

impl std::fmt::Debug for BehaviorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.overrides.keys()).finish()
    }
}

fn unknown(point: &str) -> Error {
    Error::UnknownBehavior {
        name: point.to_string(),
        valid: BEHAVIOR_POINTS.join(", "),
    }
}

impl BehaviorRegistry {
    pub fn register(&mut self, point: &str, behavior: Behavior) -> Result<()> {
        let key = BEHAVIOR_POINTS
            .iter()
            .find(|&&p| p == point)
            .ok_or_else(|| unknown(point))?;
        if behavior.point() != *key {
            return Err(Error::Validation(format!(
                "behavior for `{}` registered under `{point}`",
                behavior.point()
            )));
        }
        self.overrides.insert(key, behavior);
        Ok(())
    }

    /// Restores the default behavior at `point`.
    pub fn unregister(&mut self, point: &str) -> Result<()> {
        if !BEHAVIOR_POINTS.contains(&point) {
            return Err(unknown(point));
        }
        self.overrides.remove(point);
        Ok(())
    }

    pub fn is_overridden(&self, point: &str) -> bool {
        self.overrides.contains_key(point)
    }

    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn central_bank_rate(&self, model: &Model) -> Result<f64> {
        match self.overrides.get("central_bank_rate") {
            Some(Behavior::CentralBankRate(f)) => Ok(f(&model.cb, model)),
            _ => central_bank_rate(&model.cb, model),
        }
    }

    pub fn bank_profits(&self, model: &Model) -> f64 {
        match self.overrides.get("bank_profits") {
            Some(Behavior::BankProfits(f)) => f(&model.bank, model),
            _ => bank_profits(&model.bank, model),
        }
    }

    pub fn firms_plan(&self, model: &Model) -> FirmPlan {
        match self.overrides.get("firms_plan") {
            Some(Behavior::FirmsPlan(f)) => f(&model.firms, model),
            _ => firms_plan(&model.firms, model),
        }
    }

    pub fn government_step(&self, model: &Model) -> GovernmentFlows {
        match self.overrides.get("government_step") {
            Some(Behavior::GovernmentStep(f)) => f(&model.gov, model),
            _ => government_step(&model.gov, model),
        }
    }

    pub fn goods_market_weights(&self, model: &Model, sector: usize) -> Vec<f64> {
        match self.overrides.get("goods_market_weights") {
            Some(Behavior::GoodsMarketWeights(f)) => f(model, sector),
            _ => goods_market_weights(model, sector),
        }
    }
}
