use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::engine::SimulationData;
use crate::error::{Error, Result};

/// 17 significant digits, enough to read back the same `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one row per quarter and one column per variable.
///
/// With more than one run, or when `run_column` is set, a leading `run`
/// column numbers the runs from 1.
pub fn write_table<W: Write>(out: W, runs: &[SimulationData], run_column: bool) -> Result<()> {
    let Some(first) = runs.first() else {
        return Err(Error::Validation("nothing to export".to_string()));
    };
    let with_run = run_column || runs.len() > 1;
    let names: Vec<&str> = first.names().collect();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = Vec::with_capacity(names.len() + 2);
    if with_run {
        header.push("run");
    }
    header.push("quarter");
    header.extend(&names);
    w.write_record(&header)?;
    for (r, data) in runs.iter().enumerate() {
        if data.names().ne(names.iter().copied()) {
            return Err(Error::Validation(format!(
                "run {} tracks different variables from run 1",
                r + 1
            )));
        }
        for q in 0..data.len() {
            let mut row = Vec::with_capacity(header.len());
            if with_run {
                row.push((r + 1).to_string());
            }
            row.push((q + 1).to_string());
            row.extend(names.iter().map(|n| format_value(data[n][q])));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file(
    path: impl AsRef<Path>,
    runs: &[SimulationData],
    run_column: bool,
) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_table(std::io::BufWriter::new(f), runs, run_column)
}

/// Reads a table written by [`write_table`], one entry per run.
pub fn read_table<R: Read>(input: R) -> Result<Vec<SimulationData>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let with_run = header.first().map(String::as_str) == Some("run");
    let skip = if with_run { 2 } else { 1 };
    if header.len() < skip || header[skip - 1] != "quarter" {
        return Err(Error::Validation(
            "table must start with `quarter` or `run,quarter`".to_string(),
        ));
    }
    let names = &header[skip..];
    let mut runs: Vec<SimulationData> = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let run = if with_run {
            rec[0]
                .parse::<usize>()
                .map_err(|e| Error::Validation(format!("row {}: run: {e}", line + 1)))?
        } else {
            1
        };
        if run == 0 || run > runs.len() + 1 {
            return Err(Error::Validation(format!(
                "row {}: run {run} out of sequence",
                line + 1
            )));
        }
        if run > runs.len() {
            runs.push(SimulationData {
                series: names.iter().map(|n| (n.clone(), Vec::new())).collect::<IndexMap<_, _>>(),
            });
        }
        let data = &mut runs[run - 1];
        for (k, name) in names.iter().enumerate() {
            let v: f64 = rec[skip + k].parse().map_err(|e| {
                Error::Validation(format!("row {}: {name}: {e}", line + 1))
            })?;
            data.series[name.as_str()].push(v);
        }
    }
    Ok(runs)
}

pub fn read_table_file(path: impl AsRef<Path>) -> Result<Vec<SimulationData>> {
    read_table(std::fs::File::open(path)?)
}

/// Structured export: an object of series for one run, an array for several.
pub fn write_json<W: Write>(out: W, runs: &[SimulationData]) -> Result<()> {
    match runs {
        [one] => serde_json::to_writer_pretty(out, one)?,
        many => serde_json::to_writer_pretty(out, many)?,
    }
    Ok(())
}
