use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::model::Model;
use crate::sampling::Picker;

use super::visit_order;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaborOutcome {
    pub fired: usize,
    pub hired: usize,
    pub hires_per_firm: Vec<u32>,
    pub vacancies_left: u64,
    pub unemployed_left: usize,
}

/// Matches job seekers to firms one draw at a time, firms weighted by open
/// vacancies. Returns `(worker, firm)` pairs; `vacancies` is decremented.
pub fn match_workers<R: Rng + ?Sized>(
    vacancies: &mut [u32],
    seekers: &[u32],
    deterministic: bool,
    rng: &mut R,
) -> Vec<(u32, u32)> {
    let mut matches = Vec::new();
    if vacancies.is_empty() || seekers.is_empty() {
        return matches;
    }
    let weights: Vec<f64> = vacancies.iter().map(|&v| v as f64).collect();
    let mut picker = Picker::new(&weights, deterministic).expect("counts are valid weights");
    for &h in seekers {
        let Some(firm) = picker.pick(rng) else { break };
        vacancies[firm] -= 1;
        picker
            .update(firm, vacancies[firm] as f64)
            .expect("counts are valid weights");
        matches.push((h, firm as u32));
    }
    matches
}

/// Firing down to labor demand, then search-and-matching of the unemployed.
///
/// Firms above their labor demand fire uniformly random employees (the most
/// recently indexed ones in deterministic mode). Unemployed workers, in
/// random order (index order in deterministic mode), are matched to firms
/// sampled by open vacancies until either side runs out.
pub fn labor_market<R: Rng + ?Sized>(model: &mut Model, rng: &mut R) -> LaborOutcome {
    let deterministic = model.deterministic;
    let nf = model.firms.len();
    let w = &mut model.w_act;

    // employees grouped by firm (counting sort, ascending worker index)
    let mut start = vec![0usize; nf + 1];
    for e in w.employer.iter().flatten() {
        start[*e as usize + 1] += 1;
    }
    for i in 0..nf {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut staff = vec![0u32; start[nf]];
    for (h, e) in w.employer.iter().enumerate() {
        if let Some(e) = e {
            staff[fill[*e as usize]] = h as u32;
            fill[*e as usize] += 1;
        }
    }

    let mut fired = 0;
    for i in 0..nf {
        let members = &staff[start[i]..start[i + 1]];
        let have = members.len();
        let want = model.firms.labor_demand[i] as usize;
        if have > want {
            let excess = have - want;
            if deterministic {
                for &h in &members[want..] {
                    w.fire(h as usize);
                }
            } else {
                for j in sample_indices(rng, have, excess) {
                    w.fire(members[j] as usize);
                }
            }
            fired += excess;
        }
        model.firms.employees[i] = have.min(want) as u32;
    }

    let mut vacancies: Vec<u32> = (0..nf)
        .map(|i| {
            model.firms.labor_demand[i]
                .saturating_sub(model.firms.employees[i])
        })
        .collect();
    let seekers_iter = (0..w.len() as u32).filter(|&h| !w.employed[h as usize]);
    let seekers = if deterministic {
        visit_order::<R>(seekers_iter, None)
    } else {
        visit_order(seekers_iter, Some(&mut *rng))
    };
    let matches = match_workers(&mut vacancies, &seekers, deterministic, rng);

    let mut hires_per_firm = vec![0u32; nf];
    for &(h, firm) in &matches {
        let firm = firm as usize;
        w.hire(
            h as usize,
            firm,
            model.firms.sector[firm] as usize,
            model.firms.wage[firm],
        );
        model.firms.employees[firm] += 1;
        hires_per_firm[firm] += 1;
    }
    LaborOutcome {
        fired,
        hired: matches.len(),
        hires_per_firm,
        vacancies_left: vacancies.iter().map(|&v| v as u64).sum(),
        unemployed_left: seekers.len() - matches.len(),
    }
}
