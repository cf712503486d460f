//! Read-only dotted-path access to model attributes (`"cb.rate"`,
//! `"firms.P_i"`, `"agg.real_gdp"`, ...).
//!
//! Attributes answer to their field name and, where one exists, to the
//! conventional symbol (`Y_h`, `P_i`, `Pi_k`, ...).

use serde::Serialize;

use crate::error::{Error, Result};

use super::Model;

pub const TOP_LEVEL: &[&str] = &[
    "w_act", "w_inact", "firms", "bank", "cb", "gov", "rotw", "agg", "prop",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Integer(i64),
    Flag(bool),
    Reals(Vec<f64>),
    Integers(Vec<i64>),
    Flags(Vec<bool>),
    OptionalIndices(Vec<Option<u32>>),
}

impl Value {
    /// Numeric scalar view, if the value is a single number.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            Value::Flag(b) => Some(if *b { 1.0 } else { 0.0 }),
            _ => None,
        }
    }
}

fn reals(v: &[f64]) -> Value {
    Value::Reals(v.to_vec())
}

fn ints<T: Copy + Into<i64>>(v: &[T]) -> Value {
    Value::Integers(v.iter().map(|&x| x.into()).collect())
}

fn lookup_error(path: &str) -> Error {
    Error::Lookup {
        path: path.to_string(),
        valid: TOP_LEVEL.join(", "),
    }
}

pub fn inspect(model: &Model, path: &str) -> Result<Value> {
    let (group, attr) = path.split_once('.').ok_or_else(|| lookup_error(path))?;
    let value = match group {
        "w_act" => {
            let w = &model.w_act;
            match attr {
                "Y_h" | "income" => reals(&w.income),
                "D_h" | "deposits" => reals(&w.deposits),
                "employer_id" | "employer" => Value::OptionalIndices(w.employer.clone()),
                "sector_id" | "sector" => Value::OptionalIndices(w.sector.clone()),
                "wage" | "w_h" => reals(&w.wage),
                "employed" => Value::Flags(w.employed.clone()),
                "consumption_budget" | "C_d_h" => reals(&w.consumption_budget),
                "N" | "len" => Value::Integer(w.len() as i64),
                _ => return Err(lookup_error(path)),
            }
        }
        "w_inact" => {
            let w = &model.w_inact;
            match attr {
                "Y_h" | "income" => reals(&w.income),
                "D_h" | "deposits" => reals(&w.deposits),
                "consumption_budget" | "C_d_h" => reals(&w.consumption_budget),
                "N" | "len" => Value::Integer(w.len() as i64),
                _ => return Err(lookup_error(path)),
            }
        }
        "firms" => {
            let f = &model.firms;
            match attr {
                "sector_id" | "sector" => ints(&f.sector),
                "alpha_i" | "productivity" => reals(&f.productivity),
                "N_i" | "employees" => ints(&f.employees),
                "N_d_i" | "labor_demand" => ints(&f.labor_demand),
                "Y_i" | "output" => reals(&f.output),
                "Y_d_i" | "desired_output" => reals(&f.desired_output),
                "S_i" | "inventory" => reals(&f.inventory),
                "P_i" | "price" => reals(&f.price),
                "W_i" | "wage" => reals(&f.wage),
                "D_i" | "deposits" => reals(&f.deposits),
                "L_i" | "loans" => reals(&f.loans),
                "Pi_i" | "profit" => reals(&f.profit),
                "sales_i" | "sales" => reals(&f.sales),
                "unit_cost" => reals(&f.unit_cost),
                "N" | "len" => Value::Integer(f.len() as i64),
                _ => return Err(lookup_error(path)),
            }
        }
        "bank" => {
            let b = &model.bank;
            match attr {
                "E_k" | "equity" => Value::Real(b.equity),
                "L" | "loans" => Value::Real(b.loans),
                "D" | "deposits" => Value::Real(b.deposits),
                "Pi_k" | "profits" => Value::Real(b.profits),
                "reserves" => Value::Real(b.reserves()),
                "negative_equity" => Value::Flag(b.negative_equity),
                _ => return Err(lookup_error(path)),
            }
        }
        "cb" => match attr {
            "rate" | "r_bar" => Value::Real(model.cb.rate),
            _ => return Err(lookup_error(path)),
        },
        "gov" => {
            let g = &model.gov;
            match attr {
                "debt" | "L_G" => Value::Real(g.debt),
                "deficit" => Value::Real(g.deficit),
                "consumption" | "C_G" => Value::Real(g.consumption),
                "transfers" => Value::Real(g.transfers),
                "tax_revenue" => Value::Real(g.tax_revenue),
                _ => return Err(lookup_error(path)),
            }
        }
        "rotw" => {
            let r = &model.rotw;
            match attr {
                "exports" | "C_E" => Value::Real(r.exports),
                "imports" | "Y_I" => Value::Real(r.imports),
                "net_position" | "D_RoW" => Value::Real(r.net_position),
                _ => return Err(lookup_error(path)),
            }
        }
        "agg" => {
            let a = &model.agg;
            match attr {
                "t" => Value::Integer(a.t as i64),
                "nominal_gdp" => Value::Real(a.nominal_gdp),
                "real_gdp" | "Y" => Value::Real(a.real_gdp),
                "gdp_deflator" | "P_bar" => Value::Real(a.gdp_deflator),
                "inflation_rate" | "pi" => Value::Real(a.inflation_rate),
                "expected_inflation" | "pi_e" => Value::Real(a.expected_inflation),
                "expected_growth" | "gamma_e" => Value::Real(a.expected_growth),
                "employment_rate" => Value::Real(a.employment_rate),
                "sector_output" => reals(&a.sector_output),
                "nominal_household_consumption" => Value::Real(a.nominal_household_consumption),
                "nominal_government_consumption" => {
                    Value::Real(a.nominal_government_consumption)
                }
                "nominal_capitalformation" => Value::Real(a.nominal_capitalformation),
                "nominal_exports" => Value::Real(a.nominal_exports),
                "nominal_imports" => Value::Real(a.nominal_imports),
                "real_household_consumption" => Value::Real(a.real_household_consumption),
                "real_government_consumption" => Value::Real(a.real_government_consumption),
                "real_capitalformation" => Value::Real(a.real_capitalformation),
                "real_exports" => Value::Real(a.real_exports),
                "real_imports" => Value::Real(a.real_imports),
                "gdp_production" => Value::Real(a.gdp_production),
                "nominal_wage" => Value::Real(a.nominal_wage),
                _ => return Err(lookup_error(path)),
            }
        }
        "prop" => {
            let p = &model.prop;
            match attr {
                "T" | "horizon" => Value::Integer(p.horizon as i64),
                "S" | "sectors" => Value::Integer(p.sectors as i64),
                "scale" => Value::Integer(p.scale as i64),
                "tau_INC" | "tau_inc" => Value::Real(p.tau_inc),
                "mu" => Value::Real(p.mu),
                "psi" => Value::Real(p.psi),
                "psi_base" => Value::Real(p.psi_base),
                "psi_deposits" => Value::Real(p.psi_deposits),
                "rho" => Value::Real(p.rho),
                "pi_star" => Value::Real(p.pi_star),
                "r_star" => Value::Real(p.r_star),
                "g_star" => Value::Real(p.g_star),
                "gamma_pi" => Value::Real(p.gamma_pi),
                "gamma_y" => Value::Real(p.gamma_y),
                "alpha" => reals(&p.alpha),
                "theta_dividend" => Value::Real(p.theta_dividend),
                "eta" => Value::Real(p.eta),
                "lambda" => Value::Real(p.lambda),
                "benefit" => Value::Real(p.benefit),
                "loan_repayment" => Value::Real(p.loan_repayment),
                "expectation_noise" => Value::Real(p.expectation_noise),
                "sector_shares" => reals(&p.sector_shares),
                "import_share" => Value::Real(p.import_share),
                "intermediate_share" => Value::Real(p.intermediate_share),
                "investment_share" => Value::Real(p.investment_share),
                _ => return Err(lookup_error(path)),
            }
        }
        _ => return Err(lookup_error(path)),
    };
    Ok(value)
}
