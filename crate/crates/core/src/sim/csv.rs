use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{ExperimentConfig, MetricsRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "model,prior,scenario,m,n,parameter,abs_bias,mse,coverage95,reps,seed";

/// CSV text for `records`, rows sorted by `(prior, m, parameter)`.
pub fn render_csv(records: &[MetricsRecord]) -> String {
    let mut rows: Vec<&MetricsRecord> = records.iter().collect();
    rows.sort_by_key(|r| (r.prior, r.m, r.parameter_index()));
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{},{}",
            r.model,
            r.prior,
            r.scenario,
            r.m,
            r.n,
            r.parameter,
            r.abs_bias,
            r.mse,
            r.coverage95,
            r.reps,
            r.seed
        );
    }
    out
}

pub fn emit_csv(records: &[MetricsRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to write".into()));
    }
    std::fs::write(path, render_csv(records)).map_err(|e| Error::io(path, e))
}

/// Writes `<path>.meta` describing how the metrics were computed.
pub fn write_metadata(cfg: &ExperimentConfig, path: &Path) -> Result<PathBuf> {
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta");
    let meta = PathBuf::from(meta);
    let priors: Vec<String> = cfg.priors.iter().map(|p| p.to_string()).collect();
    let m: Vec<String> = cfg.m.iter().map(|m| m.to_string()).collect();
    let theta: Vec<String> = cfg.theta().iter().map(|t| t.to_string()).collect();
    let text = format!(
        "interval = equal-tailed 95%\n\
         quantiles = type 7 (linear interpolation), 0.025 and 0.975\n\
         estimator = posterior mean\n\
         ess = initial monotone sequence\n\
         model = {}\nprior = {}\nscenario = {}\ntheta = {}\nm = {}\nn = {}\n\
         reps = {}\nchain = {}\nwarmup = {}\ndg-chain = {}\ndg-warmup = {}\nseed = {}\n",
        cfg.model,
        priors.join(","),
        cfg.scenario,
        theta.join(","),
        m.join(","),
        cfg.n,
        cfg.reps,
        cfg.chain,
        cfg.warmup,
        cfg.dg_chain,
        cfg.dg_warmup,
        cfg.seed,
    );
    std::fs::write(&meta, text).map_err(|e| Error::io(&meta, e))?;
    Ok(meta)
}

fn field<T: std::str::FromStr>(value: &str, name: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} `{value}`")))
}

pub fn parse_csv(text: &str) -> Result<Vec<MetricsRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse(format!("expected header `{CSV_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(Error::Parse(format!(
                "line {line_no}: expected 11 fields, got {}",
                f.len()
            )));
        }
        out.push(MetricsRecord {
            model: f[0].parse()?,
            prior: f[1].parse()?,
            scenario: f[2].to_string(),
            m: field(f[3], "m", line_no)?,
            n: field(f[4], "n", line_no)?,
            parameter: f[5].to_string(),
            abs_bias: field(f[6], "abs_bias", line_no)?,
            mse: field(f[7], "mse", line_no)?,
            coverage95: field(f[8], "coverage95", line_no)?,
            reps: field(f[9], "reps", line_no)?,
            seed: field(f[10], "seed", line_no)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}
