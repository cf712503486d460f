use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::expectations::{ar1_fit, ar1_forecast};
use crate::markets::{credit_market, goods_market, labor_market, BuyerLayout, MarketOutcome};
use crate::model::{Model, QuarterFlows};
use crate::rng::{tag, StreamRng};

use super::Shock;

/// Relative tolerance of the national income identity.
pub const INCOME_IDENTITY_TOL: f64 = 1e-8;
/// Relative tolerance of money conservation, against gross quarterly flows.
pub const MONEY_TOL: f64 = 1e-8;
/// Relative tolerance of buyer spending against seller revenue.
pub const MARKET_TOL: f64 = 1e-10;

/// Residuals of the accounting checks for one quarter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub quarter: u32,
    pub gdp_expenditure: f64,
    pub gdp_production: f64,
    /// `sum dD + dE_k - dL - d(debt) - d(net position)`.
    pub money_residual: f64,
    /// Gross quarterly flows, the scale of `money_residual`.
    pub gross_flows: f64,
    pub buyer_spending: f64,
    pub seller_revenue: f64,
    /// Firms whose units sold exceed their pre-market inventory or are negative.
    pub oversold_firms: Vec<usize>,
    /// Buyers whose spending exceeds their budget.
    pub overspent_buyers: Vec<usize>,
    pub unmet_demand: f64,
}

impl StepReport {
    pub fn income_identity_ok(&self) -> bool {
        (self.gdp_expenditure - self.gdp_production).abs()
            <= INCOME_IDENTITY_TOL * self.gdp_expenditure.abs()
    }

    pub fn money_ok(&self) -> bool {
        self.money_residual.abs() <= MONEY_TOL * self.gross_flows
    }

    pub fn market_ok(&self) -> bool {
        (self.buyer_spending - self.seller_revenue).abs()
            <= MARKET_TOL * self.seller_revenue.abs().max(f64::MIN_POSITIVE)
            && self.oversold_firms.is_empty()
            && self.overspent_buyers.is_empty()
    }
}

struct MoneyStocks {
    deposits: f64,
    equity: f64,
    loans: f64,
    debt: f64,
    net_position: f64,
}

impl MoneyStocks {
    fn of(model: &Model) -> Self {
        Self {
            deposits: model.total_deposits(),
            equity: model.bank.equity,
            loans: model.total_loans(),
            debt: model.gov.debt,
            net_position: model.rotw.net_position,
        }
    }
}

/// One-step AR(1) forecast of the change in `series` after its last entry,
/// with optional noise of `scale` residual standard deviations.
fn forecast_change(series: &[f64], noise: Option<(&mut StreamRng, f64)>) -> Result<f64> {
    let est = ar1_fit(series)?;
    let last = *series.last().expect("fit checked length");
    let mut x = ar1_forecast(&est, last);
    if let Some((rng, scale)) = noise {
        let sd = est.sigma * scale;
        if sd > 0.0 {
            x += Normal::new(0.0, sd)
                .expect("finite positive sd")
                .sample(rng);
        }
    }
    Ok(x - last)
}

/// Expected growth from an AR(1) on log real GDP levels, expected inflation
/// from an AR(1) on log deflator differences.
fn update_expectations(model: &mut Model) -> Result<()> {
    let t = model.agg.t as u64;
    let mut rng = model.rng.stream(&[tag::EXPECTATIONS, t]);
    let scale = (!model.deterministic).then_some(model.prop.expectation_noise);
    let a = &model.agg;
    let g = forecast_change(&a.log_gdp_history, scale.map(|s| (&mut rng, s)))?;
    let diffs: Vec<f64> = a.log_deflator_history.windows(2).map(|w| w[1] - w[0]).collect();
    let pi = diffs.last().copied().unwrap_or(0.0)
        + forecast_change(&diffs, scale.map(|s| (&mut rng, s)))?;
    model.agg.expected_growth = g.exp() - 1.0;
    model.agg.expected_inflation = pi.exp() - 1.0;
    Ok(())
}

fn commit_plan(model: &mut Model) -> Result<()> {
    let plan = model.behaviors.firms_plan(model);
    let n = model.firms.len();
    if plan.desired_output.len() != n
        || plan.labor_demand.len() != n
        || plan.price.len() != n
        || plan.wage.len() != n
    {
        return Err(Error::Validation(format!(
            "firms_plan must return {n} entries per attribute"
        )));
    }
    if let Some(i) = plan
        .price
        .iter()
        .position(|p| !(p.is_finite() && *p > 0.0))
    {
        return Err(Error::Validation(format!(
            "firms_plan returned price {} for firm {i}",
            plan.price[i]
        )));
    }
    if let Some(i) = plan
        .desired_output
        .iter()
        .chain(&plan.wage)
        .position(|y| !(y.is_finite() && *y >= 0.0))
    {
        return Err(Error::Validation(format!(
            "firms_plan returned a negative or non-finite output or wage at position {i}"
        )));
    }
    let f = &mut model.firms;
    f.desired_output = plan.desired_output;
    f.labor_demand = plan.labor_demand;
    f.price = plan.price;
    f.wage = plan.wage;
    Ok(())
}

/// Spending plans of every buyer, in [`BuyerLayout`] order.
struct Demand {
    /// Domestic budget per buyer.
    domestic: Vec<f64>,
    /// Imports per buyer (households and firms only).
    imports: Vec<f64>,
    /// Intermediate part of each firm's total budget.
    intermediate_fraction: Vec<f64>,
}

fn demand(model: &mut Model, layout: &BuyerLayout) -> Demand {
    let p = &model.prop;
    let m = p.import_share;
    let growth = model.agg.expected_growth;
    let nominal = 1.0 + model.agg.expected_inflation;
    let mut domestic = vec![0.0; layout.len()];
    let mut imports = vec![0.0; layout.len()];

    let budget = |income: f64, deposits: f64| {
        (p.psi * income * nominal + p.psi_deposits * deposits)
            .min(deposits)
            .max(0.0)
    };
    let w = &mut model.w_act;
    for h in 0..w.len() {
        let b = budget(w.income[h], w.deposits[h]);
        w.consumption_budget[h] = b;
        imports[h] = m * b;
        domestic[h] = b - imports[h];
    }
    let w = &mut model.w_inact;
    let off = layout.inactive_start();
    for h in 0..w.len() {
        let b = budget(w.income[h], w.deposits[h]);
        w.consumption_budget[h] = b;
        imports[off + h] = m * b;
        domestic[off + h] = b - imports[off + h];
    }

    let f = &model.firms;
    let mut intermediate_fraction = vec![0.0; f.len()];
    let inputs = p.intermediate_share + p.investment_share;
    for i in 0..f.len() {
        let value = f.price[i] * f.output[i];
        let b = inputs * value;
        let k = layout.firm(i);
        imports[k] = m * b;
        domestic[k] = b - imports[k];
        intermediate_fraction[i] = if inputs > 0.0 {
            p.intermediate_share / inputs
        } else {
            0.0
        };
    }
    let price_level = model.flows.price_level;
    domestic[layout.government()] = p.government_base * price_level * (1.0 + growth);
    domestic[layout.rest_of_world()] = p.exports_base * price_level;
    Demand {
        domestic,
        imports,
        intermediate_fraction,
    }
}

/// Firm-level results of the goods market used by accounting.
struct FirmBooks {
    revenue: Vec<f64>,
    intermediates: Vec<f64>,
}

fn settle_goods(
    model: &mut Model,
    layout: &BuyerLayout,
    demand: &Demand,
    out: &MarketOutcome,
) -> FirmBooks {
    let fl = &mut model.flows;
    let mut pay = |deposits: &mut [f64], offset: usize| {
        for (h, d) in deposits.iter_mut().enumerate() {
            let spent = out.buyer_spent[offset + h];
            let imported = demand.imports[offset + h];
            *d -= spent + imported;
            fl.household_domestic += spent;
            fl.household_imports += imported;
        }
    };
    pay(&mut model.w_act.deposits, 0);
    pay(&mut model.w_inact.deposits, layout.inactive_start());

    let f = &mut model.firms;
    let nf = f.len();
    let mut books = FirmBooks {
        revenue: out.seller_revenue.clone(),
        intermediates: vec![0.0; nf],
    };
    for i in 0..nf {
        let k = layout.firm(i);
        let spent = out.buyer_spent[k];
        let imported = demand.imports[k];
        let q = demand.intermediate_fraction[i];
        let int_dom = spent * q;
        let int_imp = imported * q;
        books.intermediates[i] = int_dom + int_imp;
        fl.intermediate_domestic += int_dom;
        fl.intermediate_imports += int_imp;
        fl.investment_domestic += spent - int_dom;
        fl.investment_imports += imported - int_imp;
        f.deposits[i] += out.seller_revenue[i] - spent - imported;
        f.sales[i] = out.seller_sold[i];
        fl.sales_revenue += out.seller_revenue[i];
    }
    fl.government_spent = out.buyer_spent[layout.government()];
    fl.exports = out.buyer_spent[layout.rest_of_world()];
    books
}

/// `total * w / sum(w)` for each weight, or an equal split if they sum to zero.
fn pro_rata(total: f64, weights: &[f64]) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    let n = weights.len();
    weights
        .iter()
        .map(|w| {
            if sum > 0.0 {
                total * (w / sum)
            } else {
                total / n as f64
            }
        })
        .collect()
}

/// Interest, wages, profits, dividends, taxes, transfers and loan
/// settlement; commits the government, rest-of-world and bank accounts.
fn accounting(model: &mut Model, books: &FirmBooks) -> Result<()> {
    let rate = model.cb.rate;
    let loan_rate = rate + model.prop.mu;
    let nf = model.firms.len();
    let n_act = model.w_act.len();

    model.bank.loans = model.total_loans();
    model.bank.deposits = model.w_act.deposits.iter().map(|d| d.max(0.0)).sum::<f64>()
        + model.w_inact.deposits.iter().map(|d| d.max(0.0)).sum::<f64>()
        + model.firms.deposits.iter().map(|d| d.max(0.0)).sum::<f64>();
    let bank_profits = model.behaviors.bank_profits(model);

    let fl = &mut model.flows;
    let f = &mut model.firms;
    let mut dividends = vec![0.0; nf];
    for i in 0..nf {
        let loan_interest = loan_rate * f.loans[i];
        let deposit_interest = rate * f.deposits[i].max(0.0);
        let wage_bill = f.wage[i] * f.employees[i] as f64;
        if f.output[i] > 0.0 {
            f.unit_cost[i] = (wage_bill + books.intermediates[i]) / f.output[i];
        }
        let stock_change = f.unit_cost[i] * (f.output[i] - f.sales[i]);
        f.profit[i] = books.revenue[i] + stock_change
            - wage_bill
            - books.intermediates[i]
            - loan_interest
            + deposit_interest;
        dividends[i] = model.prop.theta_dividend * f.profit[i].max(0.0);
        f.deposits[i] += deposit_interest - loan_interest - wage_bill - dividends[i];
        fl.loan_interest += loan_interest;
        fl.deposit_interest += deposit_interest;
        fl.gross_wages += wage_bill;
        fl.inventory_change += stock_change;
        fl.dividends += dividends[i];
    }

    // household gross income: wages and dividends pro rata to last income
    let w = &model.w_act;
    let wi = &model.w_inact;
    let last_income: Vec<f64> = w.income.iter().chain(&wi.income).map(|y| y.max(0.0)).collect();
    let div_h = pro_rata(fl.dividends, &last_income);
    let taxable: Vec<f64> = (0..last_income.len())
        .map(|h| if h < n_act { w.wage[h] + div_h[h] } else { div_h[h] })
        .collect();

    let gflows = model.behaviors.government_step(model);
    let tax_h = pro_rata(gflows.tax_revenue, &taxable);
    let recipients: Vec<f64> = (0..last_income.len())
        .map(|h| {
            if h >= n_act || !model.w_act.employed[h] {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let transfer_h = if recipients.iter().any(|&r| r > 0.0) {
        pro_rata(gflows.transfers, &recipients)
    } else {
        vec![0.0; recipients.len()]
    };
    let transfers: f64 = transfer_h.iter().sum();
    let taxes: f64 = tax_h.iter().sum();

    let fl = &mut model.flows;
    let mut settle = |h: usize, deposits: &mut f64, income: &mut f64, wage: f64| {
        let interest = rate * deposits.max(0.0);
        let y = wage + div_h[h] - tax_h[h] + transfer_h[h] + interest;
        *deposits += y;
        *income = y;
        fl.deposit_interest += interest;
    };
    let w = &mut model.w_act;
    for h in 0..n_act {
        let wage = if w.employed[h] { w.wage[h] } else { 0.0 };
        settle(h, &mut w.deposits[h], &mut w.income[h], wage);
    }
    let w = &mut model.w_inact;
    for h in 0..w.len() {
        settle(n_act + h, &mut w.deposits[h], &mut w.income[h], 0.0);
    }
    fl.taxes = taxes;
    fl.transfers = transfers;

    let g = &mut model.gov;
    g.consumption = fl.government_spent;
    g.transfers = transfers;
    g.tax_revenue = taxes;
    g.deficit = g.consumption + g.transfers - g.tax_revenue;
    g.debt += g.deficit;

    let r = &mut model.rotw;
    r.exports = fl.exports;
    r.imports = fl.household_imports + fl.investment_imports + fl.intermediate_imports;
    r.net_position += r.exports - r.imports;

    // repayment out of positive deposits, overdrafts become loans
    let f = &mut model.firms;
    let repay_share = model.prop.loan_repayment;
    for i in 0..nf {
        let repay = (repay_share * f.loans[i]).min(f.deposits[i].max(0.0));
        f.loans[i] -= repay;
        f.deposits[i] -= repay;
        fl.repayments += repay;
        if f.deposits[i] < 0.0 {
            let gap = -f.deposits[i];
            f.loans[i] += gap;
            f.deposits[i] = 0.0;
            fl.overdrafts += gap;
        }
    }

    let b = &mut model.bank;
    b.profits = bank_profits;
    b.equity += bank_profits;
    b.negative_equity |= b.equity < 0.0;
    b.loans = model.firms.loans.iter().sum();
    b.deposits = model.w_act.deposits.iter().sum::<f64>()
        + model.w_inact.deposits.iter().sum::<f64>()
        + model.firms.deposits.iter().sum::<f64>();
    Ok(())
}

/// National accounts from both sides, price indices and expectation histories.
fn aggregate(model: &mut Model, books: &FirmBooks) -> Result<(f64, f64)> {
    let fl = &model.flows;
    let f = &model.firms;
    let intermediates: f64 = books.intermediates.iter().sum();
    let production = fl.sales_revenue + fl.inventory_change - intermediates;

    let c = fl.household_domestic + fl.household_imports;
    let g = fl.government_spent;
    let i = fl.investment_domestic + fl.investment_imports + fl.inventory_change;
    let x = fl.exports;
    let m = fl.household_imports + fl.investment_imports + fl.intermediate_imports;
    let expenditure = c + g + i + x - m;

    let (mut current, mut base) = (0.0, 0.0);
    for k in 0..f.len() {
        current += f.price[k] * f.output[k];
        base += f.base_price[k] * f.output[k];
    }
    let a = &mut model.agg;
    let previous = a.gdp_deflator;
    if base > 0.0 {
        a.gdp_deflator = current / base;
    }
    a.inflation_rate = a.gdp_deflator / previous - 1.0;
    let d = a.gdp_deflator;
    a.nominal_gdp = expenditure;
    a.real_gdp = expenditure / d;
    a.gdp_production = production;
    a.nominal_household_consumption = c;
    a.nominal_government_consumption = g;
    a.nominal_capitalformation = i;
    a.nominal_exports = x;
    a.nominal_imports = m;
    a.real_household_consumption = c / d;
    a.real_government_consumption = g / d;
    a.real_capitalformation = i / d;
    a.real_exports = x / d;
    a.real_imports = m / d;

    let employed = model.w_act.employed_count();
    a.employment_rate = if model.w_act.is_empty() {
        0.0
    } else {
        employed as f64 / model.w_act.len() as f64
    };
    a.nominal_wage = if employed > 0 {
        model.flows.gross_wages / employed as f64
    } else {
        0.0
    };
    for s in 0..f.sectors() {
        a.sector_output[s] = f.output[f.sector_range(s)].iter().sum();
    }
    if a.real_gdp > 0.0 && a.gdp_deflator > 0.0 {
        a.log_gdp_history.push(a.real_gdp.ln());
        a.log_deflator_history.push(a.gdp_deflator.ln());
    } else {
        return Err(Error::State(format!(
            "non-positive real GDP {} or deflator {} in quarter {}",
            a.real_gdp, a.gdp_deflator, a.t
        )));
    }
    Ok((expenditure, production))
}

/// Advances the model by one quarter.
///
/// Phases, in order: shock, expectations, policy rate, firm plans, credit
/// market, labor market, production, goods market, accounting, aggregates.
/// Fails with [`Error::Identity`] if GDP measured by expenditure and by
/// production disagree beyond [`INCOME_IDENTITY_TOL`].
pub fn step(model: &mut Model, shock: &dyn Shock) -> Result<StepReport> {
    let t = model.agg.t;
    if t > model.prop.horizon {
        return Err(Error::State(format!(
            "quarter {t} is past the horizon T = {}",
            model.prop.horizon
        )));
    }
    shock.apply(model);
    let start = MoneyStocks::of(model);
    model.flows = QuarterFlows::default();

    update_expectations(model)?;
    model.flows.price_level = model.agg.gdp_deflator * (1.0 + model.agg.expected_inflation);

    model.cb.rate = model.behaviors.central_bank_rate(model)?;

    commit_plan(model)?;
    let credit = credit_market(model);
    model.flows.new_loans = credit.total_granted;

    let mut rng = model.rng.stream(&[tag::LABOR, t as u64]);
    labor_market(model, &mut rng);
    let w = &mut model.w_act;
    for h in 0..w.len() {
        if let Some(e) = w.employer[h] {
            w.wage[h] = model.firms.wage[e as usize];
        }
    }

    let f = &mut model.firms;
    for i in 0..f.len() {
        f.output[i] = f.productivity[i] * f.employees[i] as f64;
        f.inventory[i] += f.output[i];
    }

    let layout = BuyerLayout::of(model);
    let plan = demand(model, &layout);
    let parallel = model.sector_parallel;
    let outcome = goods_market(model, &plan.domestic, parallel)?;
    let books = settle_goods(model, &layout, &plan, &outcome);

    accounting(model, &books)?;
    let (expenditure, production) = aggregate(model, &books)?;

    let end = MoneyStocks::of(model);
    let money_residual = (end.deposits - start.deposits) + (end.equity - start.equity)
        - (end.loans - start.loans)
        - (end.debt - start.debt)
        - (end.net_position - start.net_position);
    let fl = &model.flows;
    let gross_flows = fl.household_domestic
        + fl.household_imports
        + fl.investment_domestic
        + fl.investment_imports
        + fl.intermediate_domestic
        + fl.intermediate_imports
        + fl.government_spent
        + fl.exports
        + fl.gross_wages
        + fl.dividends
        + fl.taxes
        + fl.transfers
        + fl.loan_interest
        + fl.deposit_interest
        + fl.new_loans
        + fl.repayments
        + fl.overdrafts;

    let oversold_firms = (0..outcome.seller_sold.len())
        .filter(|&i| {
            let sold = outcome.seller_sold[i];
            sold < 0.0 || sold > outcome.seller_inventory_before[i]
        })
        .collect();
    let overspent_buyers = (0..layout.len())
        .filter(|&b| outcome.buyer_spent[b] > plan.domestic[b])
        .collect();
    let report = StepReport {
        quarter: t,
        gdp_expenditure: expenditure,
        gdp_production: production,
        money_residual,
        gross_flows,
        buyer_spending: outcome.total_spent(),
        seller_revenue: outcome.total_revenue(),
        oversold_firms,
        overspent_buyers,
        unmet_demand: outcome.unmet_demand,
    };
    if !report.income_identity_ok() {
        return Err(Error::Identity {
            identity: "national income (expenditure vs production GDP)",
            quarter: t,
            residual: expenditure - production,
            scale: expenditure,
        });
    }
    model.agg.t += 1;
    Ok(report)
}
