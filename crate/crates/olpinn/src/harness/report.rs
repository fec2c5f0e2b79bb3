//! Report emission: machine-readable error rows, per-seed loss histories,
//! solution profiles, and a human summary. Timing is written separately so
//! the numeric reports stay byte-reproducible.

use super::ExperimentReport;
use crate::error::Result;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    let mut f = std::fs::File::create(dir.join(name))?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    // report.csv: one row per (seed, output)
    let mut csv = String::from("benchmark,variant,parameter,include_bc,output,seed,rel_l2_percent\n");
    for s in &report.seeds {
        for (output, err) in [("u_pinn", s.err_pinn), ("u_op", s.err_op)] {
            if let Some(e) = err {
                writeln!(
                    csv,
                    "{},{},{:.17e},{},{},{},{:.17e}",
                    report.benchmark.name(),
                    report.variant.name(),
                    report.parameter,
                    report.include_bc,
                    output,
                    s.seed,
                    e
                )
                .unwrap();
            }
        }
        if let Some(reason) = &s.diverged {
            writeln!(
                csv,
                "{},{},{:.17e},{},diverged,{},{}",
                report.benchmark.name(),
                report.variant.name(),
                report.parameter,
                report.include_bc,
                s.seed,
                reason
            )
            .unwrap();
        }
    }
    write_file(dir, "report.csv", &csv)?;

    // summary.txt: key-value block
    let mut s = String::new();
    writeln!(s, "benchmark: {}", report.benchmark.name()).unwrap();
    writeln!(s, "variant: {}", report.variant.name()).unwrap();
    writeln!(s, "parameter: {}", report.parameter).unwrap();
    writeln!(s, "include_bc: {}", report.include_bc).unwrap();
    writeln!(s, "seeds: {}", report.seeds.len()).unwrap();
    if let Some((m, sd)) = report.pinn_stats {
        writeln!(s, "u_pinn_rel_l2_percent_mean: {m:.6}").unwrap();
        writeln!(s, "u_pinn_rel_l2_percent_std: {sd:.6}").unwrap();
    }
    if let Some((m, sd)) = report.op_stats {
        writeln!(s, "u_op_rel_l2_percent_mean: {m:.6}").unwrap();
        writeln!(s, "u_op_rel_l2_percent_std: {sd:.6}").unwrap();
    }
    writeln!(s, "std_kind: population").unwrap();
    if report.degenerate_stats {
        writeln!(s, "warning: statistics over fewer than two seeds").unwrap();
    }
    for seed in &report.seeds {
        if let Some(reason) = &seed.diverged {
            writeln!(s, "seed_{}_diverged: {reason}", seed.seed).unwrap();
        }
    }
    write_file(dir, "summary.txt", &s)?;

    // timing.csv (non-deterministic; excluded from reproducibility checks)
    let mut t = String::from("seed,wall_seconds\n");
    for seed in &report.seeds {
        writeln!(t, "{},{:.3}", seed.seed, seed.wall_seconds).unwrap();
    }
    write_file(dir, "timing.csv", &t)?;

    // loss histories and profiles per seed
    for seed in &report.seeds {
        if !seed.history.is_empty() {
            let mut h = String::from("epoch,pde,data,mismatch,total\n");
            for (i, l) in seed.history.iter().enumerate() {
                writeln!(
                    h,
                    "{},{:.17e},{:.17e},{:.17e},{:.17e}",
                    i, l.pde, l.data, l.mismatch, l.total
                )
                .unwrap();
            }
            write_file(dir, &format!("loss_history_seed{}.csv", seed.seed), &h)?;
        }
        if !seed.profile.is_empty() {
            let mut p = String::from("x,reference,u_pinn,u_op\n");
            for (x, r, up, uo) in &seed.profile {
                let fmt = |v: &Option<f64>| match v {
                    Some(v) => format!("{v:.17e}"),
                    None => String::new(),
                };
                writeln!(p, "{:.17e},{:.17e},{},{}", x, r, fmt(up), fmt(uo)).unwrap();
            }
            write_file(dir, &format!("profile_seed{}.csv", seed.seed), &p)?;
        }
    }
    Ok(())
}
