use crate::behaviors::BehaviorRegistry;
use crate::error::{Error, Result};
use crate::rng::RngKey;

use super::{
    ActiveWorkers, Aggregates, Bank, CentralBank, Firms, Government, InactiveWorkers,
    InitialConditions, Model, ParameterSet, Properties, QuarterFlows, RestOfWorld,
};

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Splits `total` units over `weights` with at least one unit each, by
/// largest remainder (ties to the lower index).
fn apportion(total: usize, weights: &[f64]) -> Vec<u32> {
    let n = weights.len();
    let mut out = vec![1u32; n];
    let rest = total.saturating_sub(n);
    if rest == 0 || n == 0 {
        return out;
    }
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| rest as f64 * w / sum).collect();
    let mut assigned = 0usize;
    for (o, q) in out.iter_mut().zip(&quotas) {
        let f = q.floor() as u32;
        *o += f;
        assigned += f as usize;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(rest - assigned) {
        out[i] += 1;
    }
    out
}

/// Relative firm sizes within a sector: a repeating skewed pattern, so the
/// size distribution does not depend on the number of firms.
fn size_weight(j: usize) -> f64 {
    1.0 / (1.0 + (j % 10) as f64)
}

/// Builds a model whose initial aggregates reproduce the calibration targets
/// in `ic` exactly.
///
/// Agent counts are divided by `scale` (rounded half-up, at least one firm
/// per non-empty sector) and per-agent flows are multiplied accordingly, so
/// aggregates do not depend on the scale.
pub fn init_model(params: &ParameterSet, ic: &InitialConditions, horizon: u32) -> Result<Model> {
    params.validate()?;
    let sectors = params.sectors().expect("validated");
    ic.validate(Some(sectors))?;
    ic.check_consistency()?;
    if horizon < 1 {
        return Err(Error::Validation("T must be at least 1".to_string()));
    }

    let p = |k: &str| params.scalar(k).expect("validated");
    let icv = |k: &str| ic.scalar(k).expect("validated");
    let ica = |k: &str| ic.array(k).expect("validated");

    let scale = p("scale") as usize;
    let k = scale as f64;
    let tau = p("tau_INC");
    let theta = p("theta_dividend");
    let alpha = params.array("alpha").expect("validated").to_vec();

    let n_firms = ica("N_firms");
    let sizes = ica("industry_sizes");
    let prices = ica("prices");
    let wages = ica("wages");
    let inventories = ica("inventories");

    let mut firms = Firms {
        sector_start: vec![0],
        ..Firms::default()
    };
    for s in 0..sectors {
        let nf = if n_firms[s] == 0.0 {
            0
        } else {
            round_half_up(n_firms[s] / k).max(1)
        };
        if nf > 0 {
            let workers_real = sizes[s] / alpha[s];
            let ne = round_half_up(workers_real / k).max(nf);
            let productivity = if sizes[s] > 0.0 {
                sizes[s] / ne as f64
            } else {
                alpha[s] * k
            };
            let wage = wages[s] * workers_real / ne as f64;
            let weights: Vec<f64> = (0..nf).map(size_weight).collect();
            let staff = apportion(ne, &weights);
            let first = firms.len();
            for &n in &staff {
                let y = productivity * n as f64;
                firms.sector.push(s as u32);
                firms.productivity.push(productivity);
                firms.employees.push(n);
                firms.labor_demand.push(n);
                firms.output.push(y);
                firms.desired_output.push(y);
                firms.inventory.push(inventories[s] * n as f64 / ne as f64);
                firms.price.push(prices[s]);
                firms.base_price.push(prices[s]);
                firms.wage.push(wage);
                firms.sales.push(y);
                firms.profit.push(0.0);
                firms.unit_cost.push(0.0);
            }
            // proportional pass so the sector total hits its target exactly
            let sum: f64 = firms.output[first..].iter().sum();
            if sum > 0.0 {
                let adj = sizes[s] / sum;
                for i in first..firms.len() {
                    firms.output[i] *= adj;
                    firms.sales[i] = firms.output[i];
                    firms.desired_output[i] = firms.output[i];
                }
            }
        }
        firms.sector_start.push(firms.sector.len());
    }
    let nf_total = firms.len();

    let gross_output: f64 = sizes.iter().zip(prices).map(|(y, p)| y * p).sum();
    let firm_value: Vec<f64> = (0..nf_total)
        .map(|i| firms.price[i] * firms.output[i])
        .collect();
    let value_sum: f64 = firm_value.iter().sum();
    firms.deposits = firm_value
        .iter()
        .map(|v| icv("deposits_firms") * v / value_sum)
        .collect();
    firms.loans = firm_value
        .iter()
        .map(|v| icv("loans") * v / value_sum)
        .collect();
    let gdp = icv("nominal_gdp");
    let intermediates = gross_output - gdp;
    for i in 0..nf_total {
        let y = firms.output[i];
        firms.unit_cost[i] = if y > 0.0 {
            (firms.wage[i] * firms.employees[i] as f64) / y
                + firms.price[i] * intermediates / gross_output
        } else {
            firms.price[i]
        };
    }

    let employees_total: usize = firms.employees.iter().map(|&n| n as usize).sum();
    let n_act = round_half_up(icv("N_active") / k);
    let n_inact = round_half_up(icv("N_inactive") / k);
    if n_act < employees_total {
        return Err(Error::Validation(format!(
            "{n_act} active workers at scale {scale} cannot staff {employees_total} jobs"
        )));
    }
    let mut w_act = ActiveWorkers::with_len(n_act);
    let mut h = 0;
    for i in 0..nf_total {
        for _ in 0..firms.employees[i] {
            w_act.hire(h, i, firms.sector[i] as usize, firms.wage[i]);
            h += 1;
        }
    }
    let mut w_inact = InactiveWorkers {
        income: vec![0.0; n_inact],
        deposits: vec![0.0; n_inact],
        consumption_budget: vec![0.0; n_inact],
    };

    let benefit = p("benefit") * k;
    let wage_bill: f64 = w_act.wage.iter().sum();
    let dividends = theta * (gdp - wage_bill).max(0.0);

    // disposable income before dividends, then dividends pro rata
    for h in 0..n_act {
        w_act.income[h] = if w_act.employed[h] {
            (1.0 - tau) * w_act.wage[h]
        } else {
            benefit
        };
    }
    w_inact.income.iter_mut().for_each(|y| *y = benefit);
    let pre_sum: f64 = w_act.income.iter().sum::<f64>() + w_inact.income.iter().sum::<f64>();
    if pre_sum > 0.0 {
        let factor = 1.0 + (1.0 - tau) * dividends / pre_sum;
        w_act.income.iter_mut().for_each(|y| *y *= factor);
        w_inact.income.iter_mut().for_each(|y| *y *= factor);
    }
    let income_sum: f64 = w_act.income.iter().sum::<f64>() + w_inact.income.iter().sum::<f64>();
    let household_deposits = icv("deposits") - icv("deposits_firms");
    let n_households = (n_act + n_inact).max(1) as f64;
    let share = |y: f64| {
        if income_sum > 0.0 {
            y / income_sum
        } else {
            1.0 / n_households
        }
    };
    for h in 0..n_act {
        w_act.deposits[h] = household_deposits * share(w_act.income[h]);
    }
    for h in 0..n_inact {
        w_inact.deposits[h] = household_deposits * share(w_inact.income[h]);
    }

    let consumption = icv("consumption");
    let investment = icv("investment");
    let government = icv("government");
    let exports = icv("exports");
    let imports = icv("imports");

    let prop = Properties {
        horizon,
        sectors,
        scale: scale as u32,
        tau_inc: tau,
        mu: p("mu"),
        psi: p("psi"),
        psi_base: p("psi"),
        psi_deposits: p("psi_deposits"),
        rho: p("rho"),
        pi_star: p("pi_star"),
        r_star: p("r_star"),
        g_star: p("g_star"),
        gamma_pi: p("gamma_pi"),
        gamma_y: p("gamma_y"),
        alpha,
        theta_dividend: theta,
        eta: p("eta"),
        lambda: p("lambda"),
        benefit,
        loan_repayment: p("loan_repayment"),
        expectation_noise: params.scalar("expectation_noise").unwrap_or(1.0),
        sector_shares: sizes
            .iter()
            .zip(prices)
            .map(|(y, p)| y * p / gross_output)
            .collect(),
        import_share: imports / (consumption + investment + intermediates),
        intermediate_share: intermediates / gross_output,
        investment_share: investment / gross_output,
        government_base: government,
        exports_base: exports,
    };

    let unemployed_plus_inactive = (n_act - employees_total + n_inact) as f64;
    let transfers = benefit * unemployed_plus_inactive;
    let tax_revenue = tau * (wage_bill + dividends);
    let gov = Government {
        debt: icv("gov_debt"),
        deficit: government + transfers - tax_revenue,
        consumption: government,
        transfers,
        tax_revenue,
    };

    let deflator_hist = ica("deflator_history");
    let base_deflator = *deflator_hist.last().expect("validated");
    let log_deflator_history: Vec<f64> =
        deflator_hist.iter().map(|d| (d / base_deflator).ln()).collect();
    let log_gdp_history: Vec<f64> = ica("gdp_history").iter().map(|y| y.ln()).collect();
    let last_diff = |h: &[f64]| h[h.len() - 1] - h[h.len() - 2];
    let inflation = last_diff(&log_deflator_history).exp() - 1.0;
    let growth = last_diff(&log_gdp_history).exp() - 1.0;

    let sector_output: Vec<f64> = (0..sectors)
        .map(|s| firms.output[firms.sector_range(s)].iter().sum())
        .collect();

    let agg = Aggregates {
        t: 1,
        nominal_gdp: gdp,
        real_gdp: gdp,
        gdp_deflator: 1.0,
        inflation_rate: inflation,
        expected_inflation: inflation,
        expected_growth: growth,
        employment_rate: if n_act > 0 {
            employees_total as f64 / n_act as f64
        } else {
            0.0
        },
        sector_output,
        nominal_household_consumption: consumption,
        nominal_government_consumption: government,
        nominal_capitalformation: investment,
        nominal_exports: exports,
        nominal_imports: imports,
        real_household_consumption: consumption,
        real_government_consumption: government,
        real_capitalformation: investment,
        real_exports: exports,
        real_imports: imports,
        gdp_production: gdp,
        nominal_wage: if employees_total > 0 {
            wage_bill / employees_total as f64
        } else {
            0.0
        },
        log_gdp_history,
        log_deflator_history,
    };

    let bank = Bank {
        equity: icv("bank_equity"),
        loans: firms.loans.iter().sum(),
        deposits: firms.deposits.iter().sum::<f64>()
            + w_act.deposits.iter().sum::<f64>()
            + w_inact.deposits.iter().sum::<f64>(),
        profits: 0.0,
        negative_equity: false,
    };

    Ok(Model {
        w_act,
        w_inact,
        firms,
        bank,
        cb: CentralBank {
            rate: icv("policy_rate"),
        },
        gov,
        rotw: RestOfWorld {
            exports,
            imports,
            net_position: ic.scalar("rotw_net_position").unwrap_or(0.0),
        },
        agg,
        prop,
        behaviors: BehaviorRegistry::default(),
        rng: RngKey::new(0),
        flows: QuarterFlows {
            price_level: 1.0,
            ..QuarterFlows::default()
        },
        deterministic: false,
        sector_parallel: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportion_gives_everyone_one_and_sums() {
        let w: Vec<f64> = (0..7).map(size_weight).collect();
        let out = apportion(40, &w);
        assert_eq!(out.iter().sum::<u32>(), 40);
        assert!(out.iter().all(|&n| n >= 1));
        assert!(out[0] >= out[6]);
        assert_eq!(apportion(3, &[1.0, 1.0, 1.0]), vec![1, 1, 1]);
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.49), 2);
        assert_eq!(round_half_up(0.4), 0);
    }
}
