//! Search-and-matching markets for labor, credit and goods.

mod credit;
mod goods;
mod labor;

pub use credit::{credit_market, ration, CreditOutcome};
pub use goods::{clear_sector, goods_market, BuyerLayout, MarketOutcome, SectorOutcome};
pub use labor::{labor_market, match_workers, LaborOutcome};

use rand::seq::SliceRandom;
use rand::Rng;

/// Visit order for `n` agents: a uniform shuffle, or index order when
/// `rng` is `None`.
pub(crate) fn visit_order<R: Rng + ?Sized>(
    candidates: impl Iterator<Item = u32>,
    rng: Option<&mut R>,
) -> Vec<u32> {
    let mut order: Vec<u32> = candidates.collect();
    if let Some(rng) = rng {
        order.shuffle(rng);
    }
    order
}
