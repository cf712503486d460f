use std::sync::Arc;

use approx::assert_relative_eq;
use macroforge::behaviors::{
    bank_profits, central_bank_rate, firms_plan, goods_market_weights, government_step, Behavior,
    FirmPlan,
};
use macroforge::engine::{run, DataTracker, NoShock};
use macroforge::io::fixture;
use macroforge::model::{init_model, Model};
use macroforge::rng::RngKey;
use macroforge::Error;

fn model(horizon: u32) -> Model {
    let doc = fixture();
    let mut m = init_model(&doc.parameters, &doc.initial_conditions, horizon).unwrap();
    m.rng = RngKey::for_run(5, 1);
    m
}

#[test]
fn bank_profit_examples() {
    let mut m = model(4);
    m.bank.loans = 0.0;
    m.bank.deposits = 0.0;
    assert_eq!(bank_profits(&m.bank, &m), 0.0);

    m.cb.rate = 0.01;
    m.prop.mu = 0.02;
    m.bank.loans = 1000.0;
    m.bank.deposits = 500.0;
    assert_relative_eq!(bank_profits(&m.bank, &m), 25.0, max_relative = 1e-12);

    m.prop.mu = 0.0;
    m.bank.deposits = 1000.0;
    assert_eq!(bank_profits(&m.bank, &m), 0.0);
}

#[test]
fn central_bank_rate_without_gaps() {
    let mut m = model(4);
    m.prop.rho = 0.0;
    m.agg.inflation_rate = m.prop.pi_star;
    m.agg.expected_growth = m.prop.g_star;
    let r = central_bank_rate(&m.cb, &m).unwrap();
    assert_relative_eq!(r, m.prop.r_star + m.prop.pi_star, max_relative = 1e-12);
}

#[test]
fn replacement_planning_and_labor_demand() {
    let mut m = model(4);
    m.agg.expected_growth = 0.0;
    m.agg.expected_inflation = 0.0;
    m.firms.inventory.iter_mut().for_each(|s| *s = 0.0);
    let plan = firms_plan(&m.firms, &m);
    assert_eq!(plan.desired_output, m.firms.sales);

    m.firms.sales[0] = 100.0;
    m.firms.output[0] = 100.0;
    m.firms.productivity[0] = 10.0;
    m.firms.sales[1] = 95.0;
    m.firms.productivity[1] = 10.0;
    let plan = firms_plan(&m.firms, &m);
    assert_eq!(plan.price[0], m.firms.price[0]);
    assert_eq!(plan.labor_demand[1], 10);
}

#[test]
fn government_examples() {
    let mut m = model(4);
    m.flows.gross_wages = 1000.0;
    m.flows.dividends = 200.0;
    m.prop.tau_inc = 0.0;
    assert_eq!(government_step(&m.gov, &m).tax_revenue, 0.0);

    m.prop.tau_inc = 0.2;
    assert_relative_eq!(government_step(&m.gov, &m).tax_revenue, 240.0, max_relative = 1e-12);

    m.prop.benefit = 0.0;
    m.flows.government_spent = 0.0;
    let g = government_step(&m.gov, &m);
    assert_eq!(g.transfers, 0.0);
    assert!(g.deficit < 0.0);
}

#[test]
fn goods_weights_examples() {
    let mut m = model(4);
    let range = m.firms.sector_range(0);
    for i in range.clone() {
        m.firms.inventory[i] = 0.0;
    }
    assert!(goods_market_weights(&m, 0).iter().all(|&w| w == 0.0));

    let (a, b) = (range.start, range.start + 1);
    m.firms.inventory[a] = 4.0;
    m.firms.price[a] = 2.0;
    m.firms.inventory[b] = 2.0;
    m.firms.price[b] = 1.0;
    let w = goods_market_weights(&m, 0);
    assert_eq!(&w[..2], &[2.0, 2.0]);
}

#[test]
fn fixed_rate_central_bank_holds_every_quarter() {
    let mut m = model(12);
    m.behaviors
        .register("central_bank_rate", Behavior::fixed_rate(0.02))
        .unwrap();
    let mut tracker = DataTracker::default();
    tracker.track("rate_alias", "cb.rate", &m).unwrap();
    let data = run(&mut m, &NoShock, &tracker).unwrap();
    assert!(data["policy_rate"].iter().all(|&r| r == 0.02));
    assert_eq!(data["rate_alias"], data["policy_rate"]);
}

#[test]
fn unknown_override_is_rejected_at_registration() {
    let mut m = model(4);
    let err = m
        .behaviors
        .register("not_a_point", Behavior::fixed_rate(0.02))
        .unwrap_err();
    assert!(matches!(err, Error::UnknownBehavior { .. }));
    let err = m
        .behaviors
        .register("bank_profits", Behavior::fixed_rate(0.02))
        .unwrap_err();
    assert!(matches!(err, Error::Validation(_)));
    assert!(m.behaviors.is_empty());
}

#[test]
fn unregistering_restores_default_trajectory() {
    let base = model(8);
    let mut plain = base.clone();
    let expected = run(&mut plain, &NoShock, &DataTracker::default()).unwrap();

    let mut m = base.clone();
    m.behaviors
        .register("central_bank_rate", Behavior::fixed_rate(0.05))
        .unwrap();
    m.behaviors.unregister("central_bank_rate").unwrap();
    let got = run(&mut m, &NoShock, &DataTracker::default()).unwrap();
    assert_eq!(got, expected);
}

#[test]
fn weight_override_steers_the_goods_market() {
    let mut m = model(1);
    m.set_deterministic(true).unwrap();
    m.behaviors
        .register(
            "goods_market_weights",
            Behavior::GoodsMarketWeights(Arc::new(|model: &Model, s: usize| {
                let r = model.firms.sector_range(s);
                let mut w = vec![0.0; r.len()];
                w[0] = 1.0;
                w
            })),
        )
        .unwrap();
    let mut probe = m.clone();
    run(&mut m, &NoShock, &DataTracker::empty()).unwrap();
    for s in 0..m.firms.sectors() {
        let r = m.firms.sector_range(s);
        for i in r.start + 1..r.end {
            assert_eq!(m.firms.sales[i], 0.0, "sector {s} firm {i}");
        }
    }
    probe.behaviors.unregister("goods_market_weights").unwrap();
    run(&mut probe, &NoShock, &DataTracker::empty()).unwrap();
    assert!(probe.firms.sales.iter().filter(|&&x| x > 0.0).count() > m.firms.sectors());
}

#[test]
fn plan_override_must_cover_every_firm() {
    let mut m = model(2);
    m.behaviors
        .register(
            "firms_plan",
            Behavior::FirmsPlan(Arc::new(|_, _| FirmPlan::default())),
        )
        .unwrap();
    assert!(run(&mut m, &NoShock, &DataTracker::empty()).is_err());
}
