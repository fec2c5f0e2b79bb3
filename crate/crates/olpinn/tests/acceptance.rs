//! Acceptance suite: each criterion runs at its stated configuration and
//! tolerance and prints one pass/fail line (visible with `--nocapture`).
//!
//! The Burgers criteria train full-size networks for tens of thousands of
//! full-batch epochs; expect multi-hour wall times on a small machine.
//! Pretrained operator models are cached under `target/acceptance-cache/`.

mod common;

use common::fd_burgers;
use ndarray::Array2;
use olpinn::autodiff::{input_derivative, record, DerivOrder, Dual};
use olpinn::deeponet::PretrainConfig;
use olpinn::harness::{
    load_checkpoint, relative_l2, run_experiment, run_pretrain, save_checkpoint,
    Benchmark, CheckpointPayload, ExperimentConfig, Variant,
};
use olpinn::nn::{Activation, NetworkParams, Rng};
use olpinn::olpinn::{mismatch_loss, train, OlpinnTrainConfig, OlpinnWeights};
use olpinn::problems::{oracles, sample_points, PointCounts, SamplingStrategy};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

const HEAVY_SEEDS: [u64; 3] = [0, 1, 2];

fn cache_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cache");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Pretrain (or load the cached) operator model for a benchmark.
fn pretrained(benchmark: Benchmark) -> PathBuf {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    let _guard = LOCK.get_or_init(|| Mutex::new(())).lock().unwrap();
    let path = cache_dir().join(format!("{}.ckpt", benchmark.name()));
    if path.exists() && load_checkpoint(&path).is_ok() {
        return path;
    }
    let cfg = PretrainConfig::default();
    let (model, history) = run_pretrain(benchmark, &cfg, None).unwrap();
    eprintln!(
        "[fixture] pretrained {} in {} epochs (mse {:.2e})",
        benchmark.name(),
        history.len(),
        history.last().unwrap()
    );
    save_checkpoint(&CheckpointPayload::DeepONet(model), &path).unwrap();
    path
}

fn experiment(
    benchmark: Benchmark,
    variant: Variant,
    parameter: f64,
    seeds: &[u64],
    include_bc: bool,
    strategy: SamplingStrategy,
) -> ExperimentConfig {
    let ckpt = matches!(variant, Variant::Olpinn | Variant::DeeponetExtrapolation)
        .then(|| pretrained(benchmark));
    ExperimentConfig {
        benchmark,
        variant,
        parameter,
        include_bc,
        strategy,
        seeds: seeds.to_vec(),
        epochs: None,
        learning_rate: None,
        pretrained_checkpoint: ckpt,
        out_dir: None,
        reference_file: None,
        weights: matches!(variant, Variant::Olpinn)
            .then(|| benchmark.default_weights(parameter)),
    }
}

#[test]
fn criterion_1_diffusion_reaction_small_residual_budget() {
    let seeds: Vec<u64> = (0..5).collect();
    let mut all_pass = true;
    for a in [5.0, 10.0] {
        let ol = run_experiment(&experiment(
            Benchmark::DiffusionReaction,
            Variant::Olpinn,
            a,
            &seeds,
            true,
            SamplingStrategy::UniformGrid,
        ))
        .unwrap();
        let (ol_mean, ol_std) = ol.pinn_stats.unwrap();
        let van = run_experiment(&experiment(
            Benchmark::DiffusionReaction,
            Variant::VanillaPinn,
            a,
            &seeds,
            true,
            SamplingStrategy::UniformGrid,
        ))
        .unwrap();
        let (van_mean, van_std) = van.pinn_stats.unwrap();
        let pass = ol_mean <= 5.0 && van_mean >= 2.0 * ol_mean;
        all_pass &= pass;
        println!(
            "criterion 1 (a={a}): {} — olpinn u_pinn {ol_mean:.2}+-{ol_std:.2}% (gate 5%), vanilla {van_mean:.2}+-{van_std:.2}% (gate >= {:.2}%)",
            if pass { "PASS" } else { "FAIL" },
            2.0 * ol_mean
        );
        assert!(
            ol_mean <= 5.0,
            "a={a}: olpinn mean {ol_mean:.2}% exceeds the 5% gate"
        );
        assert!(
            van_mean >= 2.0 * ol_mean,
            "a={a}: vanilla {van_mean:.2}% is not 2x the olpinn mean {ol_mean:.2}%"
        );
    }
    assert!(all_pass);
}

#[test]
fn criterion_2_burgers_viscous_sharp_profile() {
    let nu = 0.001 / PI;
    let report = run_experiment(&experiment(
        Benchmark::BurgersCase1,
        Variant::Olpinn,
        nu,
        &HEAVY_SEEDS,
        true,
        SamplingStrategy::UniformGrid,
    ))
    .unwrap();
    let (mean, std) = report.pinn_stats.unwrap();
    // profile check: no deviation above 0.05 away from the sharp front
    let mut max_dev = 0.0f64;
    for seed in &report.seeds {
        for &(x, reference, u_pinn, _) in &seed.profile {
            if x.abs() >= 0.1 {
                if let Some(u) = u_pinn {
                    max_dev = max_dev.max((u - reference).abs());
                }
            }
        }
    }
    let pass = mean <= 8.0 && max_dev <= 0.05;
    println!(
        "criterion 2: {} — u_pinn {mean:.2}+-{std:.2}% (gate 8%), max profile deviation {max_dev:.3} outside |x|<0.1 at t=0.8 (gate 0.05)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(mean <= 8.0, "u_pinn mean {mean:.2}% exceeds the 8% gate");
    assert!(max_dev <= 0.05, "profile oscillation {max_dev:.3} exceeds 0.05");
}

#[test]
fn criterion_3_burgers_inviscid() {
    let report = run_experiment(&experiment(
        Benchmark::BurgersCase1,
        Variant::Olpinn,
        0.0,
        &HEAVY_SEEDS,
        true,
        SamplingStrategy::UniformGrid,
    ))
    .unwrap();
    let (pinn_mean, _) = report.pinn_stats.unwrap();
    let (op_mean, _) = report.op_stats.unwrap();
    let best = pinn_mean.min(op_mean);
    let pass = best <= 12.0;
    println!(
        "criterion 3: {} — best of u_pinn {pinn_mean:.2}% / u_op {op_mean:.2}% (gate 12%)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(best <= 12.0, "best mean {best:.2}% exceeds the 12% gate");
}

#[test]
fn criterion_4_burgers_ill_posed_no_bc() {
    let nu = 0.001 / PI;

    // boundary targets are verifiably absent from the no-BC gradient: two
    // trainings differing only in boundary data produce identical networks
    let problem = Benchmark::BurgersCase1.problem(nu).unwrap();
    let counts = PointCounts {
        residual_x: 6,
        residual_t: 3,
        boundary_t: 5,
        initial_x: 9,
        collocation_x: 11,
        collocation_t: 5,
        test_x: 5,
        test_t: 3,
    };
    let mut rng = Rng::new(0);
    let mut points =
        sample_points(SamplingStrategy::UniformGrid, &counts, &problem, &mut rng, None).unwrap();
    let model = match load_checkpoint(&pretrained(Benchmark::BurgersCase1)).unwrap() {
        CheckpointPayload::DeepONet(m) => m,
        _ => unreachable!(),
    };
    let weights = OlpinnWeights::new(5.0, 5.0, 50.0).unwrap();
    let coarse = Benchmark::BurgersCase1.coarse_grid(nu, false);
    let tc = OlpinnTrainConfig { epochs: 3, learning_rate: 1e-3, seed: 0, include_bc: false };
    let arch = Benchmark::BurgersCase1.correction_arch(nu);
    let widths = Benchmark::BurgersCase1.pinn_widths();
    let run = |pts: &olpinn::problems::PointSets| {
        train(&problem, &model, &[nu], &widths, &arch, coarse.view(), pts, &weights, &tc)
            .unwrap()
            .pinn
    };
    let base = run(&points);
    for v in points.boundary_values.iter_mut() {
        *v += 42.0;
    }
    let perturbed = run(&points);
    assert_eq!(
        base.values(),
        perturbed.values(),
        "boundary targets leaked into the no-BC gradient"
    );

    let report = run_experiment(&experiment(
        Benchmark::BurgersCase1,
        Variant::Olpinn,
        nu,
        &HEAVY_SEEDS,
        false,
        SamplingStrategy::UniformGrid,
    ))
    .unwrap();
    let (mean, std) = report.pinn_stats.unwrap();
    let pass = mean <= 8.0;
    println!(
        "criterion 4: {} — no-BC u_pinn {mean:.2}+-{std:.2}% (gate 8%); boundary-gradient absence verified",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(mean <= 8.0, "no-BC u_pinn mean {mean:.2}% exceeds the 8% gate");
}

#[test]
fn criterion_5_burgers_short_horizon_forecast() {
    let nu = 0.008 / PI;
    let mut all = Vec::new();
    for (name, strategy) in [
        ("uniform", SamplingStrategy::UniformGrid),
        ("clustered", SamplingStrategy::Clustered),
    ] {
        let report = run_experiment(&experiment(
            Benchmark::BurgersCase2,
            Variant::Olpinn,
            nu,
            &HEAVY_SEEDS,
            true,
            strategy,
        ))
        .unwrap();
        let (op_mean, op_std) = report.op_stats.unwrap();
        let pass = op_mean <= 6.0;
        println!(
            "criterion 5 ({name}): {} — u_op {op_mean:.2}+-{op_std:.2}% (gate 6%)",
            if pass { "PASS" } else { "FAIL" }
        );
        all.push((name, op_mean));
    }
    for (name, m) in all {
        assert!(m <= 6.0, "{name} layout u_op mean {m:.2}% exceeds the 6% gate");
    }
}

#[test]
fn criterion_6_property_suite() {
    // gradient check over random tanh networks
    let mut worst_grad = 0.0f64;
    for trial in 0..100 {
        let mut rng = Rng::new(1000 + trial);
        let net = NetworkParams::init(&[2, 5, 4, 1], Activation::Tanh, &mut rng).unwrap();
        let x = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
        let duals: Vec<Dual> = net.values().iter().map(|&v| Dual::constant(v)).collect();
        let tape = record(&duals, |t, ids| Ok(net.record_forward_params(t, ids, &x)?[0])).unwrap();
        let wrt: Vec<_> = (0..net.len()).map(|i| tape.input(i)).collect();
        let grads = tape.gradient(&wrt).unwrap();
        let h = 1e-5;
        for i in (0..net.len()).step_by(9) {
            let mut plus = net.clone();
            plus.values_mut()[i] += h;
            let mut minus = net.clone();
            minus.values_mut()[i] -= h;
            let fd = (plus.forward(&x).unwrap()[0] - minus.forward(&x).unwrap()[0]) / (2.0 * h);
            let g = grads[i].primal;
            if g.abs() > 1e-8 {
                let rel = (g - fd).abs() / g.abs().max(fd.abs());
                worst_grad = worst_grad.max(rel);
                assert!(rel < 1e-4, "trial {trial} param {i}: tape {g} vs fd {fd}");
            }
        }
    }

    // second-derivative check against second-order central differences
    let mut worst_second = 0.0f64;
    for trial in 0..25 {
        let mut rng = Rng::new(4000 + trial);
        let net = NetworkParams::init(&[1, 8, 8, 1], Activation::Tanh, &mut rng).unwrap();
        let x0 = rng.uniform(-0.9, 0.9);
        let d2 = input_derivative(
            |t, ids| Ok(net.record_forward_inputs(t, ids)?[0]),
            &[x0],
            0,
            DerivOrder::Second,
        )
        .unwrap();
        let h = 1e-3;
        let f = |x: f64| net.forward(&[x]).unwrap()[0];
        let fd = (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
        if d2.abs() > 1e-8 {
            let rel = (d2 - fd).abs() / d2.abs().max(fd.abs());
            worst_second = worst_second.max(rel);
            assert!(rel < 1e-3, "trial {trial}: dual {d2} vs fd {fd}");
        }
    }

    // oracle cross-validation against the explicit finite-difference solver
    let nu = 0.03 / PI;
    let (profile, dx) = fd_burgers::solve(nu, 0.5, 2001, 20_001);
    let fd = fd_burgers::sample(&profile, dx, 0.25);
    let quad = oracles::burgers_viscous(nu, 0.25, 0.5).unwrap();
    assert!((fd - quad).abs() < 1e-3, "fd {fd} vs quadrature {quad}");

    // inviscid implicit-equation residual
    for i in 1..50 {
        for j in 0..20 {
            let x = -1.0 + 2.0 * i as f64 / 50.0;
            if x == 0.0 {
                continue;
            }
            let t = 1.9 * j as f64 / 19.0;
            let u = oracles::burgers_inviscid(x, t).unwrap();
            assert!((u + (PI * (x - u * t)).sin()).abs() < 1e-10);
        }
    }

    // forcing consistency identity
    let a = 3.3;
    for i in 0..1000 {
        let x = -1.0 + 2.0 * (i as f64 + 0.5) / 1000.0;
        let u = oracles::dr_exact(a, x);
        let upp = -a * PI * PI * (PI * x).sin();
        assert!((-upp + u.powi(3) - u - oracles::dr_forcing(a, x)).abs() < 1e-8);
    }

    // checkpoint bit-exactness
    let path = pretrained(Benchmark::DiffusionReaction);
    let m1 = match load_checkpoint(&path).unwrap() {
        CheckpointPayload::DeepONet(m) => m,
        _ => unreachable!(),
    };
    let copy = cache_dir().join("roundtrip.ckpt");
    save_checkpoint(&CheckpointPayload::DeepONet(m1.clone()), &copy).unwrap();
    let m2 = match load_checkpoint(&copy).unwrap() {
        CheckpointPayload::DeepONet(m) => m,
        _ => unreachable!(),
    };
    let grid = Array2::from_shape_fn((100, 1), |(i, _)| -1.0 + 2.0 * i as f64 / 99.0);
    let p1 = m1.predict_grid(&[0.4], grid.view()).unwrap();
    let p2 = m2.predict_grid(&[0.4], grid.view()).unwrap();
    for (a, b) in p1.iter().zip(&p2) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    // mismatch-loss and relative-L2 identities
    assert_eq!(mismatch_loss(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
    assert_eq!(mismatch_loss(&[2.0], &[-1.0]).unwrap(), 9.0);
    assert_eq!(relative_l2(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
    assert!((relative_l2(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 100.0).abs() < 1e-12);

    // collocation-count independence of derivative evaluations
    let evals = n_c_independence_evals();
    assert_eq!(evals.0, evals.1, "derivative evaluations depend on N_c: {evals:?}");

    println!(
        "criterion 6: PASS — gradient fd {worst_grad:.2e} (gate 1e-4), second-derivative fd {worst_second:.2e} (gate 1e-3), oracle fd diff {:.2e} (gate 1e-3), N_c-independent evals {} == {}",
        (fd - quad).abs(),
        evals.0,
        evals.1
    );
}

/// Train twice with collocation sets of very different size; report the
/// derivative-evaluation counts (must match).
fn n_c_independence_evals() -> (u64, u64) {
    let problem = Benchmark::DiffusionReaction.problem(5.0).unwrap();
    let model = match load_checkpoint(&pretrained(Benchmark::DiffusionReaction)).unwrap() {
        CheckpointPayload::DeepONet(m) => m,
        _ => unreachable!(),
    };
    let weights = OlpinnWeights::new(1.0, 1.0, 200.0).unwrap();
    let arch = Benchmark::DiffusionReaction.correction_arch(5.0);
    let coarse = Benchmark::DiffusionReaction.coarse_grid(5.0, true);
    let tc = OlpinnTrainConfig { epochs: 4, learning_rate: 1e-3, seed: 0, include_bc: true };
    let mut out = Vec::new();
    for n_c in [51usize, 5001] {
        let counts = PointCounts {
            residual_x: 6,
            residual_t: 1,
            boundary_t: 1,
            initial_x: 0,
            collocation_x: n_c,
            collocation_t: 1,
            test_x: 11,
            test_t: 1,
        };
        let mut rng = Rng::new(0);
        let points =
            sample_points(SamplingStrategy::UniformGrid, &counts, &problem, &mut rng, None)
                .unwrap();
        let o = train(
            &problem,
            &model,
            &[5.0],
            &Benchmark::DiffusionReaction.pinn_widths(),
            &arch,
            coarse.view(),
            &points,
            &weights,
            &tc,
        )
        .unwrap();
        out.push(o.derivative_evals);
    }
    (out[0], out[1])
}

#[test]
fn criterion_7_full_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = experiment(
        Benchmark::DiffusionReaction,
        Variant::Olpinn,
        5.0,
        &[0, 1],
        true,
        SamplingStrategy::UniformGrid,
    );
    let run = |cfg: &ExperimentConfig, out: PathBuf| {
        let mut c = cfg.clone();
        c.out_dir = Some(out.clone());
        run_experiment(&c).unwrap();
        out
    };
    let a = run(&cfg, dir.path().join("a"));
    let b = run(&cfg, dir.path().join("b"));
    let mut compared = 0;
    for name in [
        "report.csv",
        "summary.txt",
        "loss_history_seed0.csv",
        "loss_history_seed1.csv",
        "profile_seed0.csv",
        "profile_seed1.csv",
    ] {
        let fa = std::fs::read(a.join(name)).unwrap();
        let fb = std::fs::read(b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between identical runs");
        compared += 1;
    }
    // also byte-identical when seeds run in a different rayon interleaving:
    // rerun with the seed list reversed and compare per-seed files
    cfg.seeds = vec![1, 0];
    let c = run(&cfg, dir.path().join("c"));
    for name in ["loss_history_seed0.csv", "loss_history_seed1.csv"] {
        let fa = std::fs::read(a.join(name)).unwrap();
        let fc = std::fs::read(c.join(name)).unwrap();
        assert_eq!(fa, fc, "{name} depends on seed scheduling");
    }
    println!("criterion 7: PASS — {compared} report files byte-identical across reruns");
}
