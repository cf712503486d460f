use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::par;
use crate::rng::tag;
use crate::sampling::Picker;

/// Index space of goods-market buyers: active households, inactive
/// households, firms, then the government and the rest of the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuyerLayout {
    pub active: usize,
    pub inactive: usize,
    pub firms: usize,
}

impl BuyerLayout {
    pub fn of(model: &Model) -> Self {
        Self {
            active: model.w_act.len(),
            inactive: model.w_inact.len(),
            firms: model.firms.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.active + self.inactive + self.firms + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn inactive_start(&self) -> usize {
        self.active
    }

    pub fn firm(&self, i: usize) -> usize {
        self.active + self.inactive + i
    }

    pub fn government(&self) -> usize {
        self.active + self.inactive + self.firms
    }

    pub fn rest_of_world(&self) -> usize {
        self.government() + 1
    }
}

/// Result of clearing one sector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SectorOutcome {
    /// Revenue per seller of the sector.
    pub revenue: Vec<f64>,
    /// Buyers left with budget, and how much.
    pub unspent: Vec<(u32, f64)>,
    pub quantity: f64,
    pub value: f64,
    pub unmet: f64,
}

/// Clears one sector by search and matching.
///
/// Each buyer with a positive budget, in random order (index order when
/// `deterministic`), draws sellers from `weights` and buys
/// `min(remaining / P_j, S_j)` units until its budget is spent or the sector
/// is sold out. A seller's weight shrinks in proportion to its inventory and
/// drops to zero when it sells out. Budgets of buyer `b` are
/// `budgets[b] * share`.
pub fn clear_sector<R: Rng + ?Sized>(
    inventory: &mut [f64],
    prices: &[f64],
    weights: &[f64],
    budgets: &[f64],
    share: f64,
    deterministic: bool,
    rng: &mut R,
) -> Result<SectorOutcome> {
    let n = inventory.len();
    let mut out = SectorOutcome {
        revenue: vec![0.0; n],
        ..SectorOutcome::default()
    };
    let mut picker = Picker::new(weights, deterministic)?;
    let mut order: Vec<u32> = (0..budgets.len() as u32)
        .filter(|&b| budgets[b as usize] * share > 0.0)
        .collect();
    if !deterministic {
        order.shuffle(rng);
    }
    let start: f64 = inventory.iter().sum();
    for &b in &order {
        let mut remaining = budgets[b as usize] * share;
        while remaining > 0.0 {
            let Some(j) = picker.pick(rng) else {
                out.unspent.push((b, remaining));
                out.unmet += remaining;
                break;
            };
            let stock = inventory[j];
            let price = prices[j];
            let wanted = remaining / price;
            let spend = if wanted < stock {
                inventory[j] = stock - wanted;
                let s = remaining;
                remaining = 0.0;
                s
            } else {
                inventory[j] = 0.0;
                let s = (stock * price).min(remaining);
                remaining -= s;
                s
            };
            out.revenue[j] += spend;
            out.value += spend;
            let w = if inventory[j] > 0.0 {
                picker.weight(j) * (inventory[j] / stock)
            } else {
                0.0
            };
            picker.update(j, w)?;
        }
    }
    out.quantity = start - inventory.iter().sum::<f64>();
    Ok(out)
}

/// Transactions of one goods-market call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarketOutcome {
    pub sector_quantity: Vec<f64>,
    pub sector_value: Vec<f64>,
    /// Spending per buyer, indexed by [`BuyerLayout`].
    pub buyer_spent: Vec<f64>,
    /// Units sold per firm: its inventory decrease.
    pub seller_sold: Vec<f64>,
    pub seller_revenue: Vec<f64>,
    pub seller_inventory_before: Vec<f64>,
    /// Budget left unspent because sectors sold out.
    pub unmet_demand: f64,
    /// Inventory left after the market, in goods units.
    pub unsold_inventory: f64,
}

impl MarketOutcome {
    pub fn total_spent(&self) -> f64 {
        self.buyer_spent.iter().sum()
    }

    pub fn total_revenue(&self) -> f64 {
        self.seller_revenue.iter().sum()
    }
}

fn sector_weights(model: &Model, s: usize) -> Result<Vec<f64>> {
    let w = model.behaviors.goods_market_weights(model, s);
    let n = model.firms.sector_range(s).len();
    if w.len() != n {
        return Err(Error::Validation(format!(
            "goods_market_weights returned {} weights for {n} firms in sector {s}",
            w.len()
        )));
    }
    if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Validation(format!(
            "goods_market_weights returned {bad} in sector {s}"
        )));
    }
    Ok(w)
}

/// Clears every sector's goods market for the quarter `model.agg.t`.
///
/// `budgets` holds each buyer's domestic budget (see [`BuyerLayout`]); it is
/// split across sectors by `prop.sector_shares`. Sector `s` draws from the
/// stream `(GOODS, t, s)` of the model key, so running sectors concurrently
/// (`parallel`) gives the same outcome bit for bit.
pub fn goods_market(model: &mut Model, budgets: &[f64], parallel: bool) -> Result<MarketOutcome> {
    let layout = BuyerLayout::of(model);
    if budgets.len() != layout.len() {
        return Err(Error::Validation(format!(
            "{} budgets for {} buyers",
            budgets.len(),
            layout.len()
        )));
    }
    let sectors = model.firms.sectors();
    let weights = (0..sectors)
        .map(|s| sector_weights(model, s))
        .collect::<Result<Vec<_>>>()?;
    let before = model.firms.inventory.clone();
    let deterministic = model.deterministic;
    let key = model.rng;
    let t = model.agg.t as u64;
    let shares = model.prop.sector_shares.clone();

    let firms = &mut model.firms;
    let prices = &firms.price;
    let mut slices = Vec::with_capacity(sectors);
    let mut rest: &mut [f64] = &mut firms.inventory;
    for s in 0..sectors {
        let (head, tail) = rest.split_at_mut(firms.sector_start[s + 1] - firms.sector_start[s]);
        slices.push((s, head, weights[s].as_slice()));
        rest = tail;
    }
    let sector_start = &firms.sector_start;
    let results = par::map(slices, parallel, |(s, inventory, w)| {
        let mut rng = key.stream(&[tag::GOODS, t, s as u64]);
        let range = sector_start[s]..sector_start[s + 1];
        clear_sector(
            inventory,
            &prices[range],
            w,
            budgets,
            shares[s],
            deterministic,
            &mut rng,
        )
    });

    let nf = model.firms.len();
    let mut out = MarketOutcome {
        sector_quantity: Vec::with_capacity(sectors),
        sector_value: Vec::with_capacity(sectors),
        buyer_spent: budgets.to_vec(),
        seller_sold: vec![0.0; nf],
        seller_revenue: vec![0.0; nf],
        seller_inventory_before: before,
        unmet_demand: 0.0,
        unsold_inventory: 0.0,
    };
    for (s, r) in results.into_iter().enumerate() {
        let r = r?;
        let first = model.firms.sector_start[s];
        for (k, rev) in r.revenue.iter().enumerate() {
            out.seller_revenue[first + k] = *rev;
        }
        for &(b, left) in &r.unspent {
            out.buyer_spent[b as usize] -= left;
        }
        out.sector_quantity.push(r.quantity);
        out.sector_value.push(r.value);
        out.unmet_demand += r.unmet;
    }
    for b in out.buyer_spent.iter_mut() {
        *b = b.max(0.0);
    }
    for i in 0..nf {
        out.seller_sold[i] = out.seller_inventory_before[i] - model.firms.inventory[i];
    }
    out.unsold_inventory = model.firms.inventory.iter().sum();
    Ok(out)
}
