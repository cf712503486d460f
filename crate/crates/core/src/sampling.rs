//! Dynamic weighted discrete sampling.
//!
//! [`DynamicWeightedSampler`] implements composition-rejection sampling over
//! dyadic weight levels: an item of weight `w` lives in level `k` where
//! `2^k <= w < 2^(k+1)`. Sampling first picks a level proportionally to its
//! total weight, then draws members of that level uniformly and accepts
//! member `j` with probability `w_j / 2^(k+1)` (at least one half). Both
//! sampling and updates run in expected constant time, independent of the
//! number of items, which keeps the goods market cheap even when every
//! purchase changes the weight of a seller.
//!
//! [`ArgmaxTree`] is the deterministic counterpart used in deterministic mode:
//! it always yields the index with the largest weight (ties to the lowest
//! index).

use rand::Rng;

use crate::error::{Error, Result};

const NO_LEVEL: u32 = u32::MAX;
/// Smallest binary exponent of a positive f64 (subnormal 2^-1074).
const EXP_OFFSET: i32 = 1074;
const N_LEVELS: usize = 1074 + 1024;
/// Exact recomputation period for the incremental totals.
const RECOMPUTE_EVERY: u32 = 1 << 16;
/// A level total that falls below this fraction of its peak since the last
/// exact summation is summed again, bounding cancellation error.
const CANCELLATION: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, Default)]
struct Level {
    total: f64,
    peak: f64,
    members: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct DynamicWeightedSampler {
    weights: Vec<f64>,
    level_of: Vec<u32>,
    slot: Vec<u32>,
    levels: Vec<Level>,
    /// Indices of non-empty levels.
    occupied: Vec<u32>,
    occupied_slot: Vec<u32>,
    total: f64,
    updates_since_recompute: u32,
}

/// Binary exponent `k` with `2^k <= w < 2^(k+1)`, for finite `w > 0`.
fn dyadic_exponent(w: f64) -> i32 {
    let bits = w.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        // subnormal: value = mantissa * 2^-1074
        let mantissa = bits & ((1u64 << 52) - 1);
        63 - mantissa.leading_zeros() as i32 - EXP_OFFSET
    } else {
        biased - 1023
    }
}

/// `2^k` for `k` in the f64 exponent range.
fn pow2(k: i32) -> f64 {
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + EXP_OFFSET))
    }
}

fn check_weight(index: usize, weight: f64) -> Result<()> {
    if weight.is_finite() && weight >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight { index, weight })
    }
}

impl DynamicWeightedSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Validation(
                "sampler needs at least one item".to_string(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            check_weight(i, w)?;
        }
        let n = weights.len();
        let mut sampler = Self {
            weights: vec![0.0; n],
            level_of: vec![NO_LEVEL; n],
            slot: vec![0; n],
            levels: vec![Level::default(); N_LEVELS],
            occupied: Vec::new(),
            occupied_slot: vec![NO_LEVEL; N_LEVELS],
            total: 0.0,
            updates_since_recompute: 0,
        };
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                sampler.attach(i, w);
            }
            sampler.weights[i] = w;
        }
        sampler.recompute_totals();
        Ok(sampler)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of non-empty dyadic levels.
    pub fn occupied_levels(&self) -> usize {
        self.occupied.len()
    }

    /// Binary exponents of the non-empty levels, ascending.
    pub fn level_exponents(&self) -> Vec<i32> {
        let mut out: Vec<i32> = self
            .occupied
            .iter()
            .map(|&l| l as i32 - EXP_OFFSET)
            .collect();
        out.sort_unstable();
        out
    }

    /// Level exponent holding item `i`, or `None` for zero-weight items.
    pub fn level_of(&self, i: usize) -> Option<i32> {
        match self.level_of[i] {
            NO_LEVEL => None,
            l => Some(l as i32 - EXP_OFFSET),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.total <= 0.0 || self.occupied.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let target = rng.random::<f64>() * self.total;
        let mut acc = 0.0;
        let mut chosen = *self.occupied.last().expect("non-empty");
        for &l in &self.occupied {
            acc += self.levels[l as usize].total;
            if target < acc {
                chosen = l;
                break;
            }
        }
        let level = &self.levels[chosen as usize];
        let floor = pow2(chosen as i32 - EXP_OFFSET);
        let len = level.members.len();
        loop {
            let j = level.members[rng.random_range(0..len)] as usize;
            // w / 2^(k+1), computed without overflowing at the top level
            if rng.random::<f64>() < 0.5 * (self.weights[j] / floor) {
                return Ok(j);
            }
        }
    }

    pub fn update(&mut self, i: usize, w: f64) -> Result<()> {
        if i >= self.weights.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.weights.len(),
            });
        }
        check_weight(i, w)?;
        let old = self.weights[i];
        if self.level_of[i] != NO_LEVEL {
            self.detach(i, old);
        }
        if w > 0.0 {
            self.attach(i, w);
        }
        self.weights[i] = w;
        self.updates_since_recompute += 1;
        if self.updates_since_recompute >= RECOMPUTE_EVERY || self.occupied.is_empty() {
            self.recompute_totals();
        } else {
            self.total = self
                .occupied
                .iter()
                .map(|&l| self.levels[l as usize].total)
                .sum();
        }
        Ok(())
    }

    /// Recomputes every level total and the grand total by exact summation.
    pub fn recompute_totals(&mut self) {
        let mut total = 0.0;
        for &l in &self.occupied {
            let level = &mut self.levels[l as usize];
            level.total = level
                .members
                .iter()
                .map(|&j| self.weights[j as usize])
                .sum();
            level.peak = level.total;
            total += level.total;
        }
        self.total = total;
        self.updates_since_recompute = 0;
    }

    fn attach(&mut self, i: usize, w: f64) {
        let l = (dyadic_exponent(w) + EXP_OFFSET) as usize;
        let level = &mut self.levels[l];
        if level.members.is_empty() {
            self.occupied_slot[l] = self.occupied.len() as u32;
            self.occupied.push(l as u32);
        }
        self.slot[i] = level.members.len() as u32;
        level.members.push(i as u32);
        level.total += w;
        level.peak = level.peak.max(level.total);
        self.level_of[i] = l as u32;
    }

    fn detach(&mut self, i: usize, w: f64) {
        let l = self.level_of[i] as usize;
        let s = self.slot[i] as usize;
        let level = &mut self.levels[l];
        level.members.swap_remove(s);
        if let Some(&moved) = level.members.get(s) {
            self.slot[moved as usize] = s as u32;
        }
        if level.members.is_empty() {
            level.total = 0.0;
            level.peak = 0.0;
            let os = self.occupied_slot[l] as usize;
            self.occupied.swap_remove(os);
            if let Some(&moved) = self.occupied.get(os) {
                self.occupied_slot[moved as usize] = os as u32;
            }
            self.occupied_slot[l] = NO_LEVEL;
        } else {
            level.total -= w;
            if level.total < level.peak * CANCELLATION {
                level.total = level
                    .members
                    .iter()
                    .map(|&j| self.weights[j as usize])
                    .sum();
                level.peak = level.total;
            }
        }
        self.level_of[i] = NO_LEVEL;
    }
}

/// Max-tournament tree returning the index of the largest weight, ties to the
/// lowest index.
#[derive(Debug, Clone)]
pub struct ArgmaxTree {
    n: usize,
    size: usize,
    weights: Vec<f64>,
    /// Winner index per internal node; leaves live at `size..2*size`.
    nodes: Vec<u32>,
}

impl ArgmaxTree {
    pub fn new(weights: &[f64]) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            check_weight(i, w)?;
        }
        let n = weights.len();
        let size = n.next_power_of_two().max(1);
        let mut padded = weights.to_vec();
        padded.resize(size, -1.0);
        let mut nodes = vec![0u32; 2 * size];
        for i in 0..size {
            nodes[size + i] = i as u32;
        }
        let mut tree = Self {
            n,
            size,
            weights: padded,
            nodes,
        };
        for node in (1..size).rev() {
            tree.nodes[node] = tree.winner(tree.nodes[2 * node], tree.nodes[2 * node + 1]);
        }
        Ok(tree)
    }

    fn winner(&self, a: u32, b: u32) -> u32 {
        // a always has the lower index of the pair
        if self.weights[b as usize] > self.weights[a as usize] {
            b
        } else {
            a
        }
    }

    /// Index of the maximal weight, or `None` when every weight is zero.
    pub fn argmax(&self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let top = if self.size == 1 { 0 } else { self.nodes[1] as usize };
        (self.weights[top] > 0.0).then_some(top)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn update(&mut self, i: usize, w: f64) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            });
        }
        check_weight(i, w)?;
        self.weights[i] = w;
        let mut node = (self.size + i) / 2;
        while node >= 1 {
            self.nodes[node] = self.winner(self.nodes[2 * node], self.nodes[2 * node + 1]);
            node /= 2;
        }
        Ok(())
    }
}

/// Seller/firm picker: random composition-rejection or deterministic argmax.
#[derive(Debug, Clone)]
pub enum Picker {
    Random(DynamicWeightedSampler),
    Argmax(ArgmaxTree),
}

impl Picker {
    pub fn new(weights: &[f64], deterministic: bool) -> Result<Self> {
        Ok(if deterministic {
            Picker::Argmax(ArgmaxTree::new(weights)?)
        } else {
            Picker::Random(DynamicWeightedSampler::new(weights)?)
        })
    }

    /// `None` once no positive weight remains.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        match self {
            Picker::Random(s) => s.sample(rng).ok(),
            Picker::Argmax(t) => t.argmax(),
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        match self {
            Picker::Random(s) => s.weight(i),
            Picker::Argmax(t) => t.weight(i),
        }
    }

    pub fn update(&mut self, i: usize, w: f64) -> Result<()> {
        match self {
            Picker::Random(s) => s.update(i, w),
            Picker::Argmax(t) => t.update(i, w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Chi-square statistic of observed counts against expected probabilities.
    fn chi_square(counts: &[u64], probs: &[f64], draws: u64) -> f64 {
        counts
            .iter()
            .zip(probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&c, &p)| {
                let e = p * draws as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum()
    }

    #[test]
    fn dyadic_exponent_matches_log2() {
        for &w in &[1.0, 1.5, 2.0, 3.999, 4.0, 0.75, 1e-300, 5e-324, 1e308, f64::MAX] {
            let k = dyadic_exponent(w);
            assert!(pow2(k) <= w, "{w}");
            if k < 1023 {
                assert!(w < pow2(k + 1), "{w}");
            }
        }
    }

    #[test]
    fn single_element() {
        let s = DynamicWeightedSampler::new(&[1.0]).unwrap();
        assert_eq!(s.total(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(s.sample(&mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn all_zero_weights_are_valid_but_empty() {
        let s = DynamicWeightedSampler::new(&[0.0, 0.0]).unwrap();
        assert_eq!(s.total(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(s.sample(&mut rng), Err(Error::EmptyDistribution)));
    }

    #[test]
    fn two_levels_for_one_and_three() {
        let s = DynamicWeightedSampler::new(&[1.0, 3.0]).unwrap();
        assert_eq!(s.total(), 4.0);
        assert_eq!(s.occupied_levels(), 2);
        assert_eq!(s.level_exponents(), vec![0, 1]);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            DynamicWeightedSampler::new(&[1.0, -1.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        assert!(matches!(
            DynamicWeightedSampler::new(&[f64::NAN]),
            Err(Error::InvalidWeight { index: 0, .. })
        ));
        assert!(DynamicWeightedSampler::new(&[]).is_err());
        let mut s = DynamicWeightedSampler::new(&[1.0, 3.0]).unwrap();
        assert!(matches!(s.update(2, 1.0), Err(Error::IndexOutOfRange { .. })));
        assert!(s.update(0, f64::INFINITY).is_err());
    }

    #[test]
    fn update_examples() {
        let mut s = DynamicWeightedSampler::new(&[1.0, 3.0]).unwrap();
        s.update(1, 0.0).unwrap();
        assert_eq!(s.total(), 1.0);
        assert_eq!(s.level_of(1), None);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            assert_eq!(s.sample(&mut rng).unwrap(), 0);
        }
        let mut s = DynamicWeightedSampler::new(&[1.0, 3.0]).unwrap();
        s.update(0, 3.0).unwrap();
        assert_eq!(s.total(), 6.0);
    }

    #[test]
    fn frequency_of_heavier_item() {
        let s = DynamicWeightedSampler::new(&[1.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let hits = (0..draws).filter(|_| s.sample(&mut rng).unwrap() == 1).count();
        let freq = hits as f64 / draws as f64;
        assert!((0.74..=0.76).contains(&freq), "{freq}");
    }

    #[test]
    fn uniform_weights_pass_chi_square() {
        let s = DynamicWeightedSampler::new(&[5.0; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000u64;
        let mut counts = [0u64; 4];
        for _ in 0..draws {
            counts[s.sample(&mut rng).unwrap()] += 1;
        }
        // 99.9% critical value, 3 degrees of freedom
        assert!(chi_square(&counts, &[0.25; 4], draws) < 16.27);
    }

    #[test]
    fn incremental_total_tracks_exact_sum() {
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let init: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 100.0).collect();
        let mut s = DynamicWeightedSampler::new(&init).unwrap();
        for _ in 0..1_000_000 {
            let i = rng.random_range(0..n);
            let w = if rng.random::<f64>() < 0.1 {
                0.0
            } else {
                rng.random::<f64>() * 10f64.powi(rng.random_range(-3..4))
            };
            s.update(i, w).unwrap();
        }
        let exact: f64 = s.weights().iter().sum();
        assert!((s.total() - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn membership_invariant_after_updates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = DynamicWeightedSampler::new(&[0.0; 64]).unwrap();
        for _ in 0..5000 {
            let i = rng.random_range(0..64);
            let w = if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() * 1e3 };
            s.update(i, w).unwrap();
        }
        for i in 0..64 {
            let w = s.weight(i);
            match s.level_of(i) {
                None => assert_eq!(w, 0.0),
                Some(k) => assert!(pow2(k) <= w && w < pow2(k + 1)),
            }
        }
    }

    #[test]
    fn argmax_tree_ties_to_lowest_index() {
        let mut t = ArgmaxTree::new(&[1.0, 3.0, 3.0, 0.5]).unwrap();
        assert_eq!(t.argmax(), Some(1));
        t.update(1, 0.0).unwrap();
        assert_eq!(t.argmax(), Some(2));
        t.update(0, 3.0).unwrap();
        assert_eq!(t.argmax(), Some(0));
        for i in 0..4 {
            t.update(i, 0.0).unwrap();
        }
        assert_eq!(t.argmax(), None);
        let single = ArgmaxTree::new(&[2.0]).unwrap();
        assert_eq!(single.argmax(), Some(0));
    }
}
