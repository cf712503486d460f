//! Per-step wall-time measurement across scales and worker counts.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::engine::{step, NoShock};
use crate::error::{Error, Result};
use crate::io::ConfigDocument;
use crate::model::{init_model, Model};

/// Approximate resident bytes per household at run time.
const BYTES_PER_AGENT: f64 = 160.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub scale: u32,
    pub agents: usize,
    pub steps: usize,
    pub mean_step_s: f64,
    pub sd_step_s: f64,
    pub workers: usize,
    pub timestamp: u64,
    pub machine: String,
    /// Why the row was not measured.
    pub skipped: Option<String>,
}

pub fn machine() -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{}-{} {cpus} cpu(s)",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

fn available_memory() -> Option<f64> {
    let info = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024.0)
}

fn estimated_agents(doc: &ConfigDocument, scale: u32) -> f64 {
    let ic = &doc.initial_conditions;
    let households = ic.scalar("N_active").unwrap_or(0.0) + ic.scalar("N_inactive").unwrap_or(0.0);
    let firms: f64 = ic.array("N_firms").map_or(0.0, |a| a.iter().sum());
    (households + firms) / scale as f64
}

/// Times `steps` quarters after one warm-up quarter, with the goods market
/// spread over `workers` threads (sequential for one worker).
///
/// A scale that does not fit in available memory is reported as skipped.
/// One warm-up step, then the wall time of each of `steps` steps.
fn timed_steps(model: &mut Model, steps: usize) -> Result<Vec<f64>> {
    step(model, &NoShock)?;
    (0..steps)
        .map(|_| {
            let start = Instant::now();
            step(model, &NoShock)?;
            Ok(start.elapsed().as_secs_f64())
        })
        .collect()
}

pub fn bench_scale(doc: &ConfigDocument, scale: u32, steps: usize, workers: usize) -> Result<BenchReport> {
    if steps < 1 || workers < 1 || scale < 1 {
        return Err(Error::Validation(
            "scale, steps and workers must be at least 1".to_string(),
        ));
    }
    let mut report = BenchReport {
        scale,
        agents: 0,
        steps,
        mean_step_s: f64::NAN,
        sd_step_s: f64::NAN,
        workers,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        machine: machine(),
        skipped: None,
    };
    let need = estimated_agents(doc, scale) * BYTES_PER_AGENT;
    if let Some(avail) = available_memory() {
        if need > avail {
            report.skipped = Some(format!(
                "needs about {:.1} GB, {:.1} GB available",
                need / 1e9,
                avail / 1e9
            ));
            return Ok(report);
        }
    }
    let mut params = doc.parameters.clone();
    params.set("scale", scale as f64);
    let mut model = init_model(&params, &doc.initial_conditions, steps as u32 + 1)?;
    model.set_sector_parallel(workers > 1);
    report.agents = model.agent_count();

    #[cfg(feature = "parallel")]
    let times = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::State(format!("cannot start {workers} workers: {e}")))?
        .install(|| timed_steps(&mut model, steps))?;
    #[cfg(not(feature = "parallel"))]
    let times = timed_steps(&mut model, steps)?;

    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = if times.len() > 1 {
        times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    report.mean_step_s = mean;
    report.sd_step_s = var.sqrt();
    Ok(report)
}

/// Every (scale, workers) pair; a failing scale becomes a skipped row.
pub fn bench(doc: &ConfigDocument, scales: &[u32], steps: usize, workers: &[usize]) -> Vec<BenchReport> {
    let mut rows = Vec::new();
    for &scale in scales {
        for &w in workers {
            let row = bench_scale(doc, scale, steps, w).unwrap_or_else(|e| BenchReport {
                scale,
                agents: 0,
                steps,
                mean_step_s: f64::NAN,
                sd_step_s: f64::NAN,
                workers: w,
                timestamp: 0,
                machine: machine(),
                skipped: Some(e.to_string()),
            });
            rows.push(row);
        }
    }
    rows
}
