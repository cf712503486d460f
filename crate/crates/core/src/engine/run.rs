use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::RngKey;

use super::{step, DataTracker, Shock, SimulationData, StepReport};

/// Steps `model` until `agg.t > prop.horizon`, recording `tracker` after
/// every quarter. The model is left in its final state.
pub fn run(model: &mut Model, shock: &dyn Shock, tracker: &DataTracker) -> Result<SimulationData> {
    run_with_reports(model, shock, tracker).map(|(data, _)| data)
}

/// As [`run`], also returning the accounting residuals of every quarter.
pub fn run_with_reports(
    model: &mut Model,
    shock: &dyn Shock,
    tracker: &DataTracker,
) -> Result<(SimulationData, Vec<StepReport>)> {
    let mut data = tracker.start();
    let mut reports = Vec::new();
    while model.agg.t <= model.prop.horizon {
        reports.push(step(model, shock)?);
        tracker.record(model, &mut data)?;
    }
    Ok((data, reports))
}

/// Monte Carlo driver: independent copies of one initialized model.
///
/// Run `i` (1-based) gets the key [`RngKey::for_run`]`(master_seed, i)`, so
/// results depend only on the model, the seed and the shock, never on the
/// number of workers.
#[derive(Debug, Clone)]
pub struct Ensemble {
    runs: usize,
    master_seed: u64,
    workers: Option<usize>,
    parallel: bool,
    tracker: DataTracker,
}

impl Ensemble {
    pub fn new(runs: usize, master_seed: u64) -> Self {
        Self {
            runs,
            master_seed,
            workers: None,
            parallel: true,
            tracker: DataTracker::default(),
        }
    }

    /// Size of the worker pool; `None` uses the global rayon pool.
    pub fn workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn tracker(mut self, tracker: DataTracker) -> Self {
        self.tracker = tracker;
        self
    }

    fn one(&self, model: &Model, shock: &dyn Shock, i: usize) -> Result<SimulationData> {
        let mut m = model.clone();
        m.rng = RngKey::for_run(self.master_seed, i);
        run(&mut m, shock, &self.tracker).map_err(|e| Error::Run {
            run: i,
            source: Box::new(e),
        })
    }

    pub fn run(&self, model: &Model, shock: &dyn Shock) -> Result<Vec<SimulationData>> {
        if self.runs < 1 {
            return Err(Error::Validation("n_runs must be at least 1".to_string()));
        }
        if model.agg.t != 1 {
            return Err(Error::State(format!(
                "ensembles start from a fresh model, got t = {}",
                model.agg.t
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Validation("workers must be at least 1".to_string()));
        }
        let ids: Vec<usize> = (1..=self.runs).collect();
        let go = || crate::par::map(ids.clone(), self.parallel, |i| self.one(model, shock, i));
        let results = match self.workers {
            #[cfg(feature = "parallel")]
            Some(w) if self.parallel => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::State(format!("cannot start {w} workers: {e}")))?
                .install(go),
            _ => go(),
        };
        results.into_iter().collect()
    }
}

/// Runs `n_runs` copies of `model` with the default tracker.
pub fn ensemblerun(
    model: &Model,
    n_runs: usize,
    master_seed: u64,
    shock: &dyn Shock,
    parallel: bool,
) -> Result<Vec<SimulationData>> {
    Ensemble::new(n_runs, master_seed)
        .parallel(parallel)
        .run(model, shock)
}

/// Shocked versus baseline ensemble means of one variable in one quarter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub quarter: u32,
    pub shocked_mean: f64,
    pub baseline_mean: f64,
    pub ratio: f64,
    /// Standard error of the ratio: `sd(shocked) / (sqrt(n) * baseline_mean)`.
    pub se: f64,
}

/// Per-quarter ratio of ensemble means of `variable`, shocked over baseline.
pub fn mean_ratio(
    shocked: &[SimulationData],
    baseline: &[SimulationData],
    variable: &str,
) -> Result<Vec<RatioPoint>> {
    if shocked.is_empty() || shocked.len() != baseline.len() {
        return Err(Error::Validation(format!(
            "ensembles of {} and {} runs cannot be compared",
            shocked.len(),
            baseline.len()
        )));
    }
    let column = |runs: &[SimulationData]| -> Result<Vec<Vec<f64>>> {
        runs.iter()
            .map(|d| {
                d.get(variable).map(<[f64]>::to_vec).ok_or_else(|| {
                    Error::Validation(format!("no tracked variable `{variable}`"))
                })
            })
            .collect()
    };
    let s = column(shocked)?;
    let b = column(baseline)?;
    let quarters = s.iter().chain(&b).map(Vec::len).min().unwrap_or(0);
    let n = s.len() as f64;
    Ok((0..quarters)
        .map(|q| {
            let ms = s.iter().map(|x| x[q]).sum::<f64>() / n;
            let mb = b.iter().map(|x| x[q]).sum::<f64>() / n;
            let var = if s.len() > 1 {
                s.iter().map(|x| (x[q] - ms).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            RatioPoint {
                quarter: q as u32 + 1,
                shocked_mean: ms,
                baseline_mean: mb,
                ratio: ms / mb,
                se: var.sqrt() / (n.sqrt() * mb),
            }
        })
        .collect())
}
