//! Experiment orchestration: pretraining, seed-replicated training runs,
//! metrics, and report emission.

mod benchmarks;
pub mod checkpoint;
pub mod config;
mod report;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointPayload};
pub use config::{Benchmark, ExperimentConfig, PretrainCommandConfig, Variant};
pub use report::write_report;

use crate::deeponet::{pretrain, DeepONetModel, PretrainConfig};
use crate::error::{Error, Result};
use crate::nn::Rng;
use crate::olpinn::{self, OlpinnTrainConfig, OlpinnWeights};
use crate::pinn::{train_vanilla, LossBreakdown, TrainConfig};
use crate::problems::{generate_operator_dataset, sample_points, PointSets};
use rayon::prelude::*;
use std::path::Path;
use std::time::Instant;

/// Relative L2 error in percent: 100 * ||pred - ref|| / ||ref||.
pub fn relative_l2(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::contract(format!(
            "relative_l2 needs equal nonzero lengths, got {} and {}",
            pred.len(),
            reference.len()
        )));
    }
    let ref_norm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ref_norm == 0.0 {
        return Err(Error::contract("relative_l2 reference has zero norm"));
    }
    let err_norm = pred
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r) * (p - r))
        .sum::<f64>()
        .sqrt();
    Ok(100.0 * err_norm / ref_norm)
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Outcome of one seed of one experiment.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Relative L2 (%) of the PINN output on the test grid (absent for the
    /// extrapolation variant).
    pub err_pinn: Option<f64>,
    /// Relative L2 (%) of the operator-side output (u_Op for olpinn, the
    /// pretrained prediction for the extrapolation variant).
    pub err_op: Option<f64>,
    pub history: Vec<LossBreakdown>,
    /// Solution profile at the export slice: (x, reference, u_pinn, u_op).
    pub profile: Vec<(f64, f64, Option<f64>, Option<f64>)>,
    pub wall_seconds: f64,
    pub diverged: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub benchmark: Benchmark,
    pub variant: Variant,
    pub parameter: f64,
    pub include_bc: bool,
    pub seeds: Vec<SeedOutcome>,
    /// (mean, std) over seeds, per reported output.
    pub pinn_stats: Option<(f64, f64)>,
    pub op_stats: Option<(f64, f64)>,
    /// True when statistics come from fewer than two seeds.
    pub degenerate_stats: bool,
}

/// Build the pretraining dataset for a benchmark and fit its operator model.
pub fn run_pretrain(
    benchmark: Benchmark,
    cfg: &PretrainConfig,
    export_dataset: Option<&Path>,
) -> Result<(DeepONetModel, Vec<f64>)> {
    let family = benchmark.pretrain_family();
    let (gx, gt) = benchmark.pretrain_grid();
    let dataset = generate_operator_dataset(&family, gx, gt)?;
    if let Some(path) = export_dataset {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let file = std::fs::File::create(path)?;
        dataset.export_columnar(std::io::BufWriter::new(file))?;
    }
    pretrain(&dataset, &benchmark.pretrain_arch(), cfg)
}

fn build_points(cfg: &ExperimentConfig, seed: u64, test_reference: &[f64]) -> Result<PointSets> {
    let problem = cfg.benchmark.problem(cfg.parameter)?;
    let mut rng = Rng::new(seed).split(7);
    sample_points(
        cfg.strategy,
        &cfg.benchmark.point_counts(),
        &problem,
        &mut rng,
        Some(test_reference.to_vec()),
    )
}

fn load_reference_file(path: &Path, expected_len: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut vals = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let last = line
            .split(',')
            .next_back()
            .ok_or_else(|| Error::Oracle(format!("{}: empty row {i}", path.display())))?;
        vals.push(last.trim().parse::<f64>().map_err(|e| {
            Error::Oracle(format!("{} row {i}: {e}", path.display()))
        })?);
    }
    if vals.len() != expected_len {
        return Err(Error::Oracle(format!(
            "{}: {} rows, test grid needs {}",
            path.display(),
            vals.len(),
            expected_len
        )));
    }
    Ok(vals)
}

/// Oracle reference on the benchmark's test grid (or the configured file).
pub fn test_reference(cfg: &ExperimentConfig) -> Result<(ndarray::Array2<f64>, Vec<f64>)> {
    let problem = cfg.benchmark.problem(cfg.parameter)?;
    let counts = cfg.benchmark.point_counts();
    // Build the grid once via a throwaway sampling with a fixed rng: grids
    // are deterministic, only random-uniform residual layouts consume rng.
    let mut rng = Rng::new(0);
    let expected = counts.test_x * counts.test_t.max(1);
    let reference = match &cfg.reference_file {
        Some(path) => Some(load_reference_file(path, expected)?),
        None => None,
    };
    let ps = sample_points(
        crate::problems::SamplingStrategy::UniformGrid,
        &counts,
        &problem,
        &mut rng,
        reference,
    )?;
    Ok((ps.test_grid, ps.test_values))
}

fn run_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    pretrained: Option<&DeepONetModel>,
    test_reference_vals: &[f64],
) -> Result<SeedOutcome> {
    let t0 = Instant::now();
    let problem = cfg.benchmark.problem(cfg.parameter)?;
    let points = build_points(cfg, seed, test_reference_vals)?;
    let epochs = cfg.epochs.unwrap_or_else(|| cfg.benchmark.default_epochs());
    let lr = cfg
        .learning_rate
        .unwrap_or_else(|| cfg.benchmark.default_learning_rate());

    let test = &points.test_grid;
    let profile_time = cfg.benchmark.profile_time();
    let make_profile = |u_pinn: Option<&[f64]>, u_op: Option<&[f64]>| {
        let mut rows = Vec::new();
        for (i, pt) in test.rows().into_iter().enumerate() {
            let keep = match profile_time {
                None => true,
                Some(tp) => (pt[1] - tp).abs() < 1e-9,
            };
            if keep {
                rows.push((
                    pt[0],
                    points.test_values[i],
                    u_pinn.map(|u| u[i]),
                    u_op.map(|u| u[i]),
                ));
            }
        }
        rows
    };

    match cfg.variant {
        Variant::VanillaPinn => {
            let tc = TrainConfig { epochs, learning_rate: lr, seed, include_bc: cfg.include_bc };
            match train_vanilla(&problem, &cfg.benchmark.pinn_widths(), &points, &tc) {
                Ok((net, history)) => {
                    let pred = crate::nn::batch::forward_values(&net, test.view())?
                        .output_scalar()
                        .to_vec();
                    let err = relative_l2(&pred, &points.test_values)?;
                    Ok(SeedOutcome {
                        seed,
                        err_pinn: Some(err),
                        err_op: None,
                        profile: make_profile(Some(&pred), None),
                        history,
                        wall_seconds: t0.elapsed().as_secs_f64(),
                        diverged: None,
                    })
                }
                Err(Error::Diverged { epoch }) => Ok(SeedOutcome {
                    seed,
                    err_pinn: None,
                    err_op: None,
                    history: vec![],
                    profile: vec![],
                    wall_seconds: t0.elapsed().as_secs_f64(),
                    diverged: Some(format!("diverged at epoch {epoch}")),
                }),
                Err(e) => Err(e),
            }
        }
        Variant::DeeponetExtrapolation => {
            let model = pretrained
                .ok_or_else(|| Error::Config("extrapolation variant needs a checkpoint".into()))?;
            let pred = model.predict_grid(&[cfg.parameter], test.view())?;
            let err = relative_l2(&pred, &points.test_values)?;
            Ok(SeedOutcome {
                seed,
                err_pinn: None,
                err_op: Some(err),
                profile: make_profile(None, Some(&pred)),
                history: vec![],
                wall_seconds: t0.elapsed().as_secs_f64(),
                diverged: None,
            })
        }
        Variant::Olpinn => {
            let model = pretrained
                .ok_or_else(|| Error::Config("olpinn variant needs a checkpoint".into()))?;
            let (w1, w2, w3) = cfg
                .weights
                .unwrap_or_else(|| cfg.benchmark.default_weights(cfg.parameter));
            let weights = OlpinnWeights::new(w1, w2, w3)?;
            let coarse = cfg.benchmark.coarse_grid(cfg.parameter, cfg.include_bc);
            let oc = OlpinnTrainConfig {
                epochs,
                learning_rate: lr,
                seed,
                include_bc: cfg.include_bc,
            };
            let outcome = olpinn::train(
                &problem,
                model,
                &[cfg.parameter],
                &cfg.benchmark.pinn_widths(),
                &cfg.benchmark.correction_arch(cfg.parameter),
                coarse.view(),
                &points,
                &weights,
                &oc,
            );
            match outcome {
                Ok(out) => {
                    let pred_pinn = crate::nn::batch::forward_values(&out.pinn, test.view())?
                        .output_scalar()
                        .to_vec();
                    let u_tilde_coarse = model.predict_grid(&[cfg.parameter], coarse.view())?;
                    let u_tilde_test = model.predict_grid(&[cfg.parameter], test.view())?;
                    let pred_op =
                        out.correction
                            .predict(&u_tilde_coarse, test.view(), &u_tilde_test)?;
                    let err_pinn = relative_l2(&pred_pinn, &points.test_values)?;
                    let err_op = relative_l2(&pred_op, &points.test_values)?;
                    Ok(SeedOutcome {
                        seed,
                        err_pinn: Some(err_pinn),
                        err_op: Some(err_op),
                        profile: make_profile(Some(&pred_pinn), Some(&pred_op)),
                        history: out.history,
                        wall_seconds: t0.elapsed().as_secs_f64(),
                        diverged: None,
                    })
                }
                Err(Error::Diverged { epoch }) => Ok(SeedOutcome {
                    seed,
                    err_pinn: None,
                    err_op: None,
                    history: vec![],
                    profile: vec![],
                    wall_seconds: t0.elapsed().as_secs_f64(),
                    diverged: Some(format!("diverged at epoch {epoch}")),
                }),
                Err(e) => Err(e),
            }
        }
    }
}

/// Run every seed of an experiment (seeds execute concurrently, results join
/// in seed order), aggregate statistics, and optionally write report files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let pretrained = match &cfg.pretrained_checkpoint {
        Some(path) => match load_checkpoint(path)? {
            CheckpointPayload::DeepONet(m) => Some(m),
            CheckpointPayload::Networks(_) => {
                return Err(Error::Checkpoint(format!(
                    "{} does not hold a pretrained operator model",
                    path.display()
                )))
            }
        },
        None => None,
    };
    let (_, reference) = test_reference(cfg)?;

    let outcomes: Vec<Result<SeedOutcome>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, pretrained.as_ref(), &reference))
        .collect();
    let mut seeds = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        seeds.push(o?);
    }

    if seeds.iter().all(|s| s.diverged.is_some()) {
        return Err(Error::Diverged { epoch: 0 });
    }

    let pinn_errors: Vec<f64> = seeds.iter().filter_map(|s| s.err_pinn).collect();
    let op_errors: Vec<f64> = seeds.iter().filter_map(|s| s.err_op).collect();
    let report = ExperimentReport {
        benchmark: cfg.benchmark,
        variant: cfg.variant,
        parameter: cfg.parameter,
        include_bc: cfg.include_bc,
        degenerate_stats: pinn_errors.len().max(op_errors.len()) < 2,
        pinn_stats: (!pinn_errors.is_empty()).then(|| mean_std(&pinn_errors)),
        op_stats: (!op_errors.is_empty()).then(|| mean_std(&op_errors)),
        seeds,
    };
    if let Some(dir) = &cfg.out_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}
