//! Multi-start survey: run descents, annotate isotropy, and write the run
//! directory (records.jsonl, summary.csv, per-minimum CSV + SVG heatmap).

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use symbreak::optimize::{annotate_isotropy, survey, CriticalPointRecord, RunStatus};

use crate::commands::fmt17;
use crate::config::ExperimentConfig;
use crate::svg::heatmap_svg;

#[derive(Args, Debug)]
pub struct SurveyArgs {
    /// TOML experiment config (see `symbreak print-config`).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// CSV-quote a label: always double-quoted, embedded quotes doubled.
fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn summary_csv(records: &[&CriticalPointRecord]) -> String {
    let mut s = String::from("loss,count,label,status,seed\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(r.loss),
            r.multiplicity,
            csv_quote(r.isotropy.as_deref().unwrap_or("")),
            r.status.as_str(),
            r.seed
        ));
    }
    s
}

pub fn run(args: &SurveyArgs) -> Result<i32> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let out_dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    let problem = cfg.build_problem()?;
    let gd = cfg.gd_config();

    println!(
        "survey: kernel={} target={} d={} k={} n_starts={} seed={}",
        cfg.kernel,
        cfg.target,
        problem.target().d(),
        cfg.k,
        cfg.n_starts,
        cfg.seed
    );

    let mut records = survey(&problem, cfg.k, cfg.n_starts, &gd)?;
    annotate_isotropy(&mut records, cfg.iso_tol);

    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    // JSONL in survey order: deterministic for a fixed config, byte for byte.
    let mut jsonl = String::new();
    for r in &records {
        jsonl.push_str(&r.to_json_line());
        jsonl.push('\n');
    }
    fs::write(out_dir.join("records.jsonl"), jsonl)?;

    // Summary: converged levels sorted by (loss, seed), stragglers after.
    let mut converged: Vec<&CriticalPointRecord> = records
        .iter()
        .filter(|r| r.status == RunStatus::Converged)
        .collect();
    converged.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.seed.cmp(&b.seed)));
    let mut rest: Vec<&CriticalPointRecord> = records
        .iter()
        .filter(|r| r.status != RunStatus::Converged)
        .collect();
    rest.sort_by_key(|r| r.seed);
    let mut ordered = converged.clone();
    ordered.extend(rest.iter().copied());
    fs::write(out_dir.join("summary.csv"), summary_csv(&ordered))?;

    // One matrix CSV + heatmap per distinct converged critical point.
    for (idx, r) in converged.iter().enumerate() {
        let stem = format!("minimum_{idx:02}");
        fs::write(out_dir.join(format!("{stem}.csv")), r.w.to_csv())?;
        fs::write(out_dir.join(format!("{stem}.svg")), heatmap_svg(&r.w))?;
    }

    let total_converged: usize = converged.iter().map(|r| r.multiplicity).sum();
    println!(
        "converged {}/{} starts; {} distinct critical points",
        total_converged,
        cfg.n_starts,
        converged.len()
    );
    println!("{:<26} {:>5}  label", "loss", "count");
    for r in &converged {
        println!(
            "{:<26} {:>5}  {}",
            fmt17(r.loss),
            r.multiplicity,
            r.isotropy.as_deref().unwrap_or("?")
        );
    }
    for r in &rest {
        println!(
            "seed {} did not converge: status={} loss={} |grad|={}",
            r.seed,
            r.status.as_str(),
            fmt17(r.loss),
            fmt17(r.grad_norm)
        );
    }
    println!("wrote {}", out_dir.display());
    Ok(0)
}
