use crate::model::Model;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CreditOutcome {
    pub requested: Vec<f64>,
    pub granted: Vec<f64>,
    pub total_granted: f64,
}

/// Grants `gaps` in full when they fit in `capacity`, otherwise rations
/// every request by the same proportion.
pub fn ration(gaps: &[f64], capacity: f64) -> Vec<f64> {
    let demand: f64 = gaps.iter().sum();
    let capacity = capacity.max(0.0);
    if demand <= capacity {
        gaps.to_vec()
    } else {
        let fraction = capacity / demand;
        gaps.iter().map(|g| g * fraction).collect()
    }
}

/// Lends each firm the part of its planned wage bill its deposits do not
/// cover, subject to the bank's leverage cap `L <= lambda * E_k`.
pub fn credit_market(model: &mut Model) -> CreditOutcome {
    let firms = &model.firms;
    let requested: Vec<f64> = (0..firms.len())
        .map(|i| {
            let bill = firms.wage[i] * firms.labor_demand[i] as f64;
            (bill - firms.deposits[i]).max(0.0)
        })
        .collect();
    let outstanding = model.total_loans();
    let capacity = model.prop.lambda * model.bank.equity - outstanding;
    let granted = ration(&requested, capacity);
    let mut total = 0.0;
    for (i, &g) in granted.iter().enumerate() {
        if g > 0.0 {
            model.firms.loans[i] += g;
            model.firms.deposits[i] += g;
            total += g;
        }
    }
    model.bank.loans += total;
    model.bank.deposits += total;
    model.flows.new_loans += total;
    CreditOutcome {
        requested,
        granted,
        total_granted: total,
    }
}
