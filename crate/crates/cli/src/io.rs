//! Ensemble file format: one metadata header line, a CSV column line, then
//! one row per path with x_0..x_n followed by s_0..s_n.

use maxbound::types::{MarginalSnapshot, MonteCarloEnsemble, TimeGrid};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub const FORMAT_TAG: &str = "# maxbound-ensemble v1";

/// 17 significant digits: round-trip exact for f64.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_ensemble(path: &Path, ens: &MonteCarloEnsemble) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = ens.stages();
    writeln!(
        w,
        "{FORMAT_TAG} seed={} n={} x0={}",
        ens.seed,
        n,
        fmt(ens.start())
    )?;
    let cols: Vec<String> = (0..=n)
        .map(|i| format!("x_{i}"))
        .chain((0..=n).map(|i| format!("s_{i}")))
        .collect();
    writeln!(w, "{}", cols.join(","))?;
    for snap in &ens.snapshots {
        let row: Vec<String> = snap
            .x
            .iter()
            .chain(snap.s.iter())
            .map(|&v| fmt(v))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

fn header_field(header: &str, key: &str) -> Result<String, String> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .map(str::to_string)
        .ok_or_else(|| format!("ensemble header misses '{key}='"))
}

pub fn read_ensemble(path: &Path) -> Result<MonteCarloEnsemble, String> {
    let file = File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or("empty ensemble file")?
        .map_err(|e| e.to_string())?;
    if !header.starts_with(FORMAT_TAG) {
        return Err(format!("not a maxbound ensemble file: header '{header}'"));
    }
    let seed: u64 = header_field(&header, "seed")?
        .parse()
        .map_err(|_| "invalid seed in header".to_string())?;
    let n: usize = header_field(&header, "n")?
        .parse()
        .map_err(|_| "invalid n in header".to_string())?;
    let _x0: f64 = header_field(&header, "x0")?
        .parse()
        .map_err(|_| "invalid x0 in header".to_string())?;
    let _columns = lines
        .next()
        .ok_or("ensemble file misses the column line")?
        .map_err(|e| e.to_string())?;
    let mut snapshots = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("bad number on data row {}", lineno + 1))?;
        if vals.len() != 2 * (n + 1) {
            return Err(format!(
                "data row {} has {} columns, expected {}",
                lineno + 1,
                vals.len(),
                2 * (n + 1)
            ));
        }
        let snap = MarginalSnapshot::new(vals[..=n].to_vec(), vals[n + 1..].to_vec())
            .map_err(|e| format!("data row {}: {e}", lineno + 1))?;
        snapshots.push(snap);
    }
    MonteCarloEnsemble::new(TimeGrid::unit(n), snapshots, seed, "file")
        .map_err(|e| e.to_string())
}

/// Writes `lines` joined by LF to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, lines: &[String]) -> std::io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            for l in lines {
                writeln!(w, "{l}")?;
            }
            w.flush()
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            for l in lines {
                writeln!(w, "{l}")?;
            }
            Ok(())
        }
    }
}
