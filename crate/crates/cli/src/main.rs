use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use macroforge::bench::{bench, BenchReport};
use macroforge::engine::{mean_ratio, run, ConsumptionShock, DataTracker, Ensemble, NoShock, SimulationData};
use macroforge::io::{fixture, format_value, load_config_file, read_table_file, write_json, write_table_file, ConfigDocument};
use macroforge::model::{init_model, Model};
use macroforge::rng::RngKey;
use macroforge::validation::{golden, golden_check, identity_suite};

mod plot;

#[derive(Parser)]
#[command(name = "macroforge", version, about = "Agent-based macroeconomic simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and export the tracked series.
    Run(RunArgs),
    /// Run independent Monte Carlo copies of the model.
    Ensemble(EnsembleArgs),
    /// Shocked and baseline ensembles under common random numbers.
    Shock(ShockArgs),
    /// Accounting checks every quarter plus the deterministic golden run.
    Validate(ValidateArgs),
    /// Mean wall time per step across scales and worker counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Config document; the bundled fixture when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<ConfigDocument> {
        match &self.config {
            Some(p) => load_config_file(p).with_context(|| format!("loading {}", p.display())),
            None => Ok(fixture()),
        }
    }

    fn model(&self, horizon: u32) -> Result<Model> {
        let doc = self.load()?;
        Ok(init_model(&doc.parameters, &doc.initial_conditions, horizon)?)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long = "T", value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; `.json` gives structured output, anything else a table.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    deterministic: bool,
    /// Clear the goods markets of different sectors concurrently.
    #[arg(long)]
    sector_parallel: bool,
    /// Also write an SVG with one chart per tracked variable.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct WorkersArg {
    /// Worker threads; defaults to MACROFORGE_WORKERS or the CPU count.
    #[arg(long, env = "MACROFORGE_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long = "T", value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[command(flatten)]
    workers: WorkersArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ShockArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long = "type")]
    kind: String,
    #[arg(long)]
    multiplier: f64,
    #[arg(long)]
    final_time: u32,
    #[arg(long = "T", default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[command(flatten)]
    workers: WorkersArg,
    /// Shocked ensemble; `_baseline` and `_ratio` tables are written beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long = "T", value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Golden table to compare against; the bundled one for the fixture.
    #[arg(long)]
    golden: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    scales: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    workers: Vec<usize>,
    /// Also write the report rows as a table.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn export(path: &Path, runs: &[SimulationData], run_column: bool) -> Result<()> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let f = std::fs::File::create(path)?;
        write_json(std::io::BufWriter::new(f), runs)?;
    } else {
        write_table_file(path, runs, run_column)?;
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or("out".into(), |s| s.to_string_lossy());
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut model = a.config.model(a.t)?;
    model.set_deterministic(a.deterministic)?;
    model.set_sector_parallel(a.sector_parallel);
    model.rng = RngKey::for_run(a.seed, 1);
    let data = run(&mut model, &NoShock, &DataTracker::default())?;
    export(&a.out, std::slice::from_ref(&data), false)?;
    if let Some(p) = a.plot {
        std::fs::write(&p, plot::svg(&data))?;
    }
    Ok(())
}

fn ensemble(config: &ConfigArg, t: u32, runs: u64, seed: u64, workers: &WorkersArg) -> Result<(Model, Ensemble)> {
    let model = config.model(t)?;
    let e = Ensemble::new(runs as usize, seed).workers(workers.workers.map(|w| w as usize));
    Ok((model, e))
}

fn cmd_ensemble(a: EnsembleArgs) -> Result<()> {
    let (model, e) = ensemble(&a.config, a.t, a.runs, a.master_seed, &a.workers)?;
    let data = e.run(&model, &NoShock)?;
    export(&a.out, &data, true)
}

fn ratio_table(shocked: &[SimulationData], base: &[SimulationData]) -> Result<String> {
    let mut out = String::from("quarter,shocked_mean,baseline_mean,ratio,ratio_se\n");
    for p in mean_ratio(shocked, base, "real_gdp")? {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.quarter,
            format_value(p.shocked_mean),
            format_value(p.baseline_mean),
            format_value(p.ratio),
            format_value(p.se),
        ));
    }
    Ok(out)
}

fn cmd_shock(a: ShockArgs) -> Result<()> {
    if a.kind != "consumption" {
        bail!("unknown shock type `{}` (known: consumption)", a.kind);
    }
    let shock = ConsumptionShock::new(a.multiplier, a.final_time)?;
    let (model, e) = ensemble(&a.config, a.t, a.runs, a.master_seed, &a.workers)?;
    let shocked = e.run(&model, &shock)?;
    let base = e.run(&model, &NoShock)?;
    export(&a.out, &shocked, true)?;
    export(&sibling(&a.out, "baseline"), &base, true)?;
    std::fs::write(sibling(&a.out, "ratio").with_extension("csv"), ratio_table(&shocked, &base)?)?;
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<bool> {
    let doc = a.config.load()?;
    let model = init_model(&doc.parameters, &doc.initial_conditions, a.t)?;
    let mut checks = identity_suite(&model, a.seed)?;
    let reference = match &a.golden {
        Some(p) => {
            let mut runs = read_table_file(p)
                .with_context(|| format!("reading golden table {}", p.display()))?;
            if runs.len() != 1 {
                bail!("golden table must hold exactly one run");
            }
            Some(runs.remove(0))
        }
        None if doc == fixture() => Some(golden()),
        None => None,
    };
    match reference {
        Some(g) => checks.push(golden_check(&model, &g)?),
        None => println!("SKIP deterministic golden (no golden table for this config)"),
    }
    for c in &checks {
        println!("{c}");
    }
    Ok(checks.iter().all(|c| c.passed()))
}

fn print_bench(rows: &[BenchReport]) {
    println!("scale,agents,workers,steps,mean_step_s,sd_step_s,per_agent_s,machine");
    for r in rows {
        match &r.skipped {
            Some(why) => println!("{},{},{},{},skipped: {why}", r.scale, r.agents, r.workers, r.steps),
            None => println!(
                "{},{},{},{},{:.6e},{:.6e},{:.6e},{}",
                r.scale,
                r.agents,
                r.workers,
                r.steps,
                r.mean_step_s,
                r.sd_step_s,
                r.mean_step_s / r.agents as f64,
                r.machine
            ),
        }
    }
    let ok: Vec<&BenchReport> = rows.iter().filter(|r| r.skipped.is_none()).collect();
    let workers: std::collections::BTreeSet<usize> = ok.iter().map(|r| r.workers).collect();
    for w in &workers {
        let at: Vec<&&BenchReport> = ok.iter().filter(|r| r.workers == *w).collect();
        let small = at.iter().min_by_key(|r| r.agents);
        let large = at.iter().max_by_key(|r| r.agents);
        if let (Some(s), Some(l)) = (small, large) {
            if l.agents > s.agents {
                println!(
                    "workers {w}: {} agents take {:.1}x the time of {} agents",
                    l.agents,
                    l.mean_step_s / s.mean_step_s,
                    s.agents
                );
            }
        }
    }
    let scales: std::collections::BTreeSet<u32> = ok.iter().map(|r| r.scale).collect();
    for s in scales {
        let at: Vec<&&BenchReport> = ok.iter().filter(|r| r.scale == s).collect();
        if let Some(one) = at.iter().find(|r| r.workers == 1) {
            for r in at.iter().filter(|r| r.workers > 1) {
                println!(
                    "scale {s}: speedup with {} workers {:.2}x",
                    r.workers,
                    one.mean_step_s / r.mean_step_s
                );
            }
        }
    }
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.steps < 5 {
        bail!("--steps must be at least 5");
    }
    let doc = a.config.load()?;
    let rows = bench(&doc, &a.scales, a.steps, &a.workers);
    print_bench(&rows);
    if let Some(p) = a.out {
        let mut w = csv::Writer::from_path(p)?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Ensemble(a) => cmd_ensemble(a).map(|_| true),
        Command::Shock(a) => cmd_shock(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
