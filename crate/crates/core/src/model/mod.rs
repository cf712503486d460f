//! Agent groups, the model container and its initialization.
//!
//! Agent attributes are stored column-wise: every attribute of a group is one
//! vector indexed by agent. The model holds the seven agent groups plus the
//! run properties (`prop`) and the aggregate state (`agg`).

mod init;
mod inspect;
mod params;

pub use init::init_model;
pub use inspect::{inspect, Value, TOP_LEVEL};
pub use params::{InitialConditions, KeyedMap, ParamValue, ParameterSet, IC_IDENTITY_TOL};

use serde::{Deserialize, Serialize};

use crate::behaviors::BehaviorRegistry;
use crate::error::{Error, Result};
use crate::rng::RngKey;

/// Households whose members are in the labor force.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ActiveWorkers {
    /// Disposable income last quarter (`Y_h`).
    pub income: Vec<f64>,
    /// Deposits (`D_h`), never negative.
    pub deposits: Vec<f64>,
    pub employer: Vec<Option<u32>>,
    pub sector: Vec<Option<u32>>,
    pub wage: Vec<f64>,
    pub employed: Vec<bool>,
    pub consumption_budget: Vec<f64>,
}

impl ActiveWorkers {
    pub fn len(&self) -> usize {
        self.income.len()
    }

    pub fn is_empty(&self) -> bool {
        self.income.is_empty()
    }

    pub fn employed_count(&self) -> usize {
        self.employed.iter().filter(|&&e| e).count()
    }

    pub(crate) fn with_len(n: usize) -> Self {
        Self {
            income: vec![0.0; n],
            deposits: vec![0.0; n],
            employer: vec![None; n],
            sector: vec![None; n],
            wage: vec![0.0; n],
            employed: vec![false; n],
            consumption_budget: vec![0.0; n],
        }
    }

    pub(crate) fn hire(&mut self, h: usize, firm: usize, sector: usize, wage: f64) {
        self.employer[h] = Some(firm as u32);
        self.sector[h] = Some(sector as u32);
        self.wage[h] = wage;
        self.employed[h] = true;
    }

    pub(crate) fn fire(&mut self, h: usize) {
        self.employer[h] = None;
        self.sector[h] = None;
        self.wage[h] = 0.0;
        self.employed[h] = false;
    }
}

/// Households outside the labor force; they live on transfers and dividends.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InactiveWorkers {
    pub income: Vec<f64>,
    pub deposits: Vec<f64>,
    pub consumption_budget: Vec<f64>,
}

impl InactiveWorkers {
    pub fn len(&self) -> usize {
        self.income.len()
    }

    pub fn is_empty(&self) -> bool {
        self.income.is_empty()
    }
}

/// Non-financial corporations, grouped contiguously by sector.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Firms {
    pub sector: Vec<u32>,
    /// Output per employee (`alpha_i`).
    pub productivity: Vec<f64>,
    /// Employees (`N_i`).
    pub employees: Vec<u32>,
    /// Labor demand (`N_d_i`).
    pub labor_demand: Vec<u32>,
    /// Output this quarter (`Y_i`).
    pub output: Vec<f64>,
    /// Desired output (`Y_d_i`).
    pub desired_output: Vec<f64>,
    /// Inventory in goods units (`S_i`).
    pub inventory: Vec<f64>,
    /// Price (`P_i`).
    pub price: Vec<f64>,
    /// Wage offered per employee (`W_i`).
    pub wage: Vec<f64>,
    /// Deposits (`D_i`).
    pub deposits: Vec<f64>,
    /// Loans outstanding (`L_i`).
    pub loans: Vec<f64>,
    /// Profit this quarter (`Pi_i`).
    pub profit: Vec<f64>,
    /// Units sold this quarter.
    pub sales: Vec<f64>,
    /// Price in the base quarter, for the deflator.
    pub base_price: Vec<f64>,
    /// Unit production cost, used to value inventory changes.
    pub unit_cost: Vec<f64>,
    /// `sector_start[s]..sector_start[s + 1]` are the firms of sector `s`.
    pub sector_start: Vec<usize>,
}

impl Firms {
    pub fn len(&self) -> usize {
        self.sector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sector.is_empty()
    }

    pub fn sector_range(&self, s: usize) -> std::ops::Range<usize> {
        self.sector_start[s]..self.sector_start[s + 1]
    }

    pub fn sectors(&self) -> usize {
        self.sector_start.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Bank {
    /// Equity (`E_k`).
    pub equity: f64,
    /// Total loans (`L`).
    pub loans: f64,
    /// Total deposits (`D`).
    pub deposits: f64,
    /// Profits this quarter (`Pi_k`).
    pub profits: f64,
    /// Set once equity has gone negative.
    pub negative_equity: bool,
}

impl Bank {
    /// Residual in `L + reserves = D + E_k`.
    pub fn reserves(&self) -> f64 {
        self.deposits + self.equity - self.loans
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CentralBank {
    /// Policy rate per quarter.
    pub rate: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Government {
    pub debt: f64,
    pub deficit: f64,
    pub consumption: f64,
    pub transfers: f64,
    pub tax_revenue: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RestOfWorld {
    pub exports: f64,
    pub imports: f64,
    /// Cumulative trade balance.
    pub net_position: f64,
}

/// Run properties: horizon, sizes and behavioral parameters.
///
/// Mutable only through shocks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Properties {
    pub horizon: u32,
    pub sectors: usize,
    pub scale: u32,
    pub tau_inc: f64,
    pub mu: f64,
    pub psi: f64,
    /// `psi` as initialized, for exact restoration after a shock.
    pub psi_base: f64,
    pub psi_deposits: f64,
    pub rho: f64,
    pub pi_star: f64,
    pub r_star: f64,
    pub g_star: f64,
    pub gamma_pi: f64,
    pub gamma_y: f64,
    /// Per-sector productivity per worker at 1:1 scale.
    pub alpha: Vec<f64>,
    pub theta_dividend: f64,
    pub eta: f64,
    pub lambda: f64,
    /// Transfer per model household per quarter, at base prices.
    pub benefit: f64,
    pub loan_repayment: f64,
    pub expectation_noise: f64,
    /// Share of domestic demand going to each sector.
    pub sector_shares: Vec<f64>,
    /// Share of household, investment and intermediate demand that is imported.
    pub import_share: f64,
    /// Intermediate input purchases per unit of output value.
    pub intermediate_share: f64,
    /// Fixed investment per unit of output value.
    pub investment_share: f64,
    /// Real government consumption in the base quarter.
    pub government_base: f64,
    /// Real exports in the base quarter.
    pub exports_base: f64,
}

/// Aggregate state of the national economy.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Aggregates {
    /// Current quarter, starting at 1.
    pub t: u32,
    pub nominal_gdp: f64,
    pub real_gdp: f64,
    pub gdp_deflator: f64,
    pub inflation_rate: f64,
    pub expected_inflation: f64,
    pub expected_growth: f64,
    pub employment_rate: f64,
    /// Gross output per sector in goods units.
    pub sector_output: Vec<f64>,
    pub nominal_household_consumption: f64,
    pub nominal_government_consumption: f64,
    pub nominal_capitalformation: f64,
    pub nominal_exports: f64,
    pub nominal_imports: f64,
    pub real_household_consumption: f64,
    pub real_government_consumption: f64,
    pub real_capitalformation: f64,
    pub real_exports: f64,
    pub real_imports: f64,
    /// Production-side (value added) GDP of the last quarter.
    pub gdp_production: f64,
    /// Average wage of employed workers.
    pub nominal_wage: f64,
    /// Log real GDP, pre-sample history followed by simulated quarters.
    pub log_gdp_history: Vec<f64>,
    /// Log deflator, same layout as `log_gdp_history`.
    pub log_deflator_history: Vec<f64>,
}

/// Within-quarter flows recorded by the engine and read by phase functions.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QuarterFlows {
    /// Expected price level used to index nominal budgets this quarter.
    pub price_level: f64,
    pub gross_wages: f64,
    pub dividends: f64,
    pub government_spent: f64,
    pub household_domestic: f64,
    pub household_imports: f64,
    pub investment_domestic: f64,
    pub investment_imports: f64,
    pub intermediate_domestic: f64,
    pub intermediate_imports: f64,
    pub exports: f64,
    pub sales_revenue: f64,
    /// Inventory change valued at unit cost.
    pub inventory_change: f64,
    pub new_loans: f64,
    pub repayments: f64,
    pub overdrafts: f64,
    pub loan_interest: f64,
    pub deposit_interest: f64,
    pub transfers: f64,
    pub taxes: f64,
}

/// The simulation subject: seven agent groups, `prop` and `agg`.
#[derive(Clone)]
pub struct Model {
    pub w_act: ActiveWorkers,
    pub w_inact: InactiveWorkers,
    pub firms: Firms,
    pub bank: Bank,
    pub cb: CentralBank,
    pub gov: Government,
    pub rotw: RestOfWorld,
    pub agg: Aggregates,
    pub prop: Properties,
    pub behaviors: BehaviorRegistry,
    pub rng: RngKey,
    /// Flows of the quarter in progress (or the last completed one).
    pub flows: QuarterFlows,
    pub(crate) deterministic: bool,
    pub(crate) sector_parallel: bool,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("t", &self.agg.t)
            .field("w_act", &self.w_act.len())
            .field("w_inact", &self.w_inact.len())
            .field("firms", &self.firms.len())
            .field("deterministic", &self.deterministic)
            .finish_non_exhaustive()
    }
}

impl Model {
    /// Households, firms and the four singleton agents.
    pub fn agent_count(&self) -> usize {
        self.w_act.len() + self.w_inact.len() + self.firms.len() + 4
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn sector_parallel(&self) -> bool {
        self.sector_parallel
    }

    /// Runs the goods market of different sectors concurrently.
    pub fn set_sector_parallel(&mut self, on: bool) {
        self.sector_parallel = on;
    }

    /// Switches deterministic mode; only allowed before the first step.
    pub fn set_deterministic(&mut self, on: bool) -> Result<()> {
        if self.agg.t != 1 {
            return Err(Error::State(format!(
                "deterministic mode can only change before the first step (t = {})",
                self.agg.t
            )));
        }
        self.deterministic = on;
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.rng = RngKey::new(seed);
    }

    /// Sum of all household and firm deposits.
    pub fn total_deposits(&self) -> f64 {
        self.w_act.deposits.iter().sum::<f64>()
            + self.w_inact.deposits.iter().sum::<f64>()
            + self.firms.deposits.iter().sum::<f64>()
    }

    pub fn total_loans(&self) -> f64 {
        self.firms.loans.iter().sum()
    }

    pub fn unemployed_count(&self) -> usize {
        self.w_act.len() - self.w_act.employed_count()
    }
}
